# Tail-measure functionals from a single tail tree
#
# The tail measure nu is never materialised. Orthant and union masses,
# rho-masses and multivariate Pareto probabilities are all expectations over
# Theta_i.

import numpy as np

from tailtrees import (
    HuslerReiss,
    MaxLinearModel,
    RhoFunctional,
    TailTreeModel,
    ThetaSource,
    Tree,
    build_tail_tree,
    consistency_check,
    mpd_probability,
    nu_orthant,
    nu_rho_mass,
    nu_union,
)
from tailtrees.errors import ZeroMassError

ml = MaxLinearModel([[1.0, 1.0], [1.0, 0.0]], alpha=1.0)
s1 = ThetaSource.from_maxlinear(ml, "1")
s2 = ThetaSource.from_maxlinear(ml, "2")

# Exact sources give SE 0. The orthant mass is the same from either node.

print(nu_orthant(s1, ["1", "2"], [0.7, 1.9]), nu_orthant(s2, ["1", "2"], [0.7, 1.9]))

# Unions need the whole of nu to be visible from the source. From node 2 a
# factor that never reaches node 2 is missed, and the call refuses.

print(nu_union(s1, ["1", "2"], [1.0, 1.0]))
try:
    nu_union(s2, ["1", "2"], [1.0, 1.0])
except ZeroMassError as exc:
    print("refused:", exc, exc.offending)

# Multivariate Pareto limit of X/t given max(X) > t.

rho = RhoFunctional("max", {"1": 1.0, "2": 1.0})
print(nu_rho_mass(s1, rho))
print(mpd_probability(s1, rho, {"type": "orthant", "J": ["2"], "y": [1.0]}))
print(mpd_probability(s1, rho, {"type": "boxes", "boxes": [{"1": [2.0, None]}, {"2": [None, 0.5]}]}))

# A Husler-Reiss chain has continuous increments; sources are Monte Carlo
# and report standard errors.

tree = Tree(["1", "2", "3"], [("1", "2"), ("2", "3")])
hr = TailTreeModel(tree, 1.0, {v: 1.0 for v in tree.nodes}, {("1", "2"): HuslerReiss(1.0), ("2", "3"): HuslerReiss(1.0)})
sources = [ThetaSource.from_tail_tree(build_tail_tree(hr, u), 10 ** 5, seed=k) for k, u in enumerate(tree.nodes)]
report = consistency_check(sources, ["1", "2", "3"], np.ones(3))
for k, est in report.estimates.items():
    print(k, est)
print("consistent:", report.ok)
