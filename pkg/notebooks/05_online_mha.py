"""
Running the aggregated strategy online
======================================

"""
import numpy as np
from mha import MHA, DecisionSet, ProblemGeometry, ProcessSpec, generate, make_loss_spec

geom = ProblemGeometry(d=1, D=1.0, decision_set=DecisionSet.box([-1], [1]),
                       lambda_max=5.0, gamma=0.25)
spec = make_loss_spec("quadratic_tracking", "ridge_constraint")
X = generate(ProcessSpec.iid([[0.6], [0.8], [1.0]], [0.3, 0.4, 0.3], seed=1), 3000)

m = MHA(geom, spec, K=3, H=3)
for rec in m.run(X):
    if rec.n in (10, 100, 1000, 3000):
        print(f"n={rec.n:5d} y={rec.y[0]:.3f} lam={rec.lam:.3f} "
              f"avg_u={rec.avg_u:.4f} avg_c={rec.avg_c:.4f} H(p_y)={rec.entropy_y:.2f}")

# where the weight went
p_y, _ = m.weights()
for eid, p in sorted(zip(m.ids, p_y), key=lambda t: -t[1])[:4]:
    print(eid, round(float(p), 3))
print(m.regret_gaps())
