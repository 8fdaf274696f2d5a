"""
The constrained optimum of a known process
==========================================

"""
from mha import (DecisionSet, ProblemGeometry, ProcessSpec, check_complementary_slackness,
                 make_loss_spec, solve_feasible_optimum, stationary_law)

geom = ProblemGeometry(d=1, D=1.0, decision_set=DecisionSet.box([-1], [1]),
                       lambda_max=5.0, gamma=0.25)
spec = make_loss_spec("quadratic_tracking", "ridge_constraint")

iid = stationary_law(ProcessSpec.iid([[0.6], [0.8], [1.0]], [0.3, 0.4, 0.3]))
res = solve_feasible_optimum(iid, spec, geom)
print(res.to_text())
print(check_complementary_slackness(res, iid, spec, geom))

# for a Markov chain the optimum is taken state by state, given the last observation
chain = stationary_law(ProcessSpec.markov([[-0.5], [0.5]], [[0.9, 0.1], [0.1, 0.9]]))
res = solve_feasible_optimum(chain, spec, geom)
print([float(y[0]) for y in res.decisions], res.lambdas, res.value)

# a constraint no decision can meet is reported, not solved
tight = ProblemGeometry(1, 1.0, DecisionSet.box([0.5], [1]), 5.0, 0.1)
print(solve_feasible_optimum(iid, spec, tight).reason)
