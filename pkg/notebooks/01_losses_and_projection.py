"""
Losses, the Lagrangian and the decision set
===========================================

"""
import numpy as np
from mha import DecisionSet, ProblemGeometry, lagrangian, make_loss_spec, regularized_lagrangian

# u = (y - x)^2 tracks the observation, c = y^2 is the constraint loss
spec = make_loss_spec("quadratic_tracking", "ridge_constraint")
y, x = np.array([0.5]), np.array([1.0])
print(lagrangian(y, 2.0, x, spec, gamma=1.0))            # -1.25
print(regularized_lagrangian(y, 2.0, x, spec, 1.0, 0.1))  # -1.625

# projections onto a box and onto the simplex
box = DecisionSet.box([0, 0], [1, 1])
print(box.project(np.array([1.5, 0.5])))
simplex = DecisionSet.simplex(3)
print(simplex.project(np.array([1.0, 0.0, -1.0])))

# a geometry ties the decision set to the observation cube and the dual box
geom = ProblemGeometry(d=1, D=1.0, decision_set=DecisionSet.box([-1], [1]),
                       lambda_max=5.0, gamma=0.25)
print(geom.check_observation([0.3]))
