"""
Regularized saddle points and histogram experts
===============================================

"""
import numpy as np
from mha import DecisionSet, ProblemGeometry, make_loss_spec
from mha.experts import ExpertId, expert_predict, make_expert
from mha.saddle import EmpiricalObjective, solve_saddle

geom = ProblemGeometry(d=1, D=1.0, decision_set=DecisionSet.box([-1], [1]),
                       lambda_max=5.0, gamma=0.25)
spec = make_loss_spec("quadratic_tracking", "ridge_constraint")

# the sample mean 0.8 violates y^2 <= 0.25, so the dual becomes active
sample = np.array([[0.6], [0.8], [1.0]])
for rho in (1.0, 0.1, 0.01, 0.001):
    sp = solve_saddle(EmpiricalObjective(sample, spec, geom, rho))
    print(f"rho={rho:<6} y*={sp.y_star[0]:.4f} lam*={sp.lambda_star:.4f} iters={sp.iterations}")

# a grid expert plays the saddle of the rounds that followed its current context
e = make_expert(ExpertId("grid", 1, 1), geom)
history = [np.array([v]) for v in (0.5, -0.5, 0.5)]
print(expert_predict(e, history, 4, geom, spec))   # sample {-0.5}, rho = 2.25
