"""
Dyadic partitions and context matching
======================================

"""
import numpy as np
from mha.partition import ContextIndex, PartitionFamily, match_set, quantize_window

fam = PartitionFamily(D=1.0, d=1)
for h in range(1, 4):
    print(h, fam.n_cells(h), fam.quantize(np.array([0.1]), h), fam.max_diameter(h))

# the cell at level h sits inside its parent at level h - 1
cid = fam.quantize(np.array([0.3]), 3)
print(fam.parent(cid, 3) == fam.quantize(np.array([0.3]), 2))

history = [np.array([v]) for v in (0.5, -0.5, 0.5, -0.5)]
w = quantize_window(history, n=5, k=1, h=1, family=fam)
print(w.ids, match_set(history, 5, 1, 1, w, fam))   # (0,) [3]

# the incremental index gives the same answer without rescanning
idx = ContextIndex(fam, k=1, h=1)
for x in history:
    idx.push(x)
print(idx.lookup(w))
