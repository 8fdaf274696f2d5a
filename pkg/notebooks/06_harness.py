"""
Config files, traces and strategy comparison
============================================

The same steps are available from the shell as ``mha run``, ``mha oracle``,
``mha compare`` and ``mha sweep``.
"""
from pathlib import Path
import tempfile

from mha.harness import compare_strategies, load_config, override, read_trace, run_experiment

here = Path(__file__).parent
cfg = override(load_config(here / "configs" / "markov.toml"), horizon=1500)
out = Path(tempfile.mkdtemp())

trace, summary = run_experiment(cfg, out / "run")
print(summary.read_text())
cols, rows = read_trace(trace)
print(cols)
print(rows[-1])

for row in compare_strategies(cfg, ["mha", "const_zero", "H(1,2)"], out / "cmp"):
    print(row)
