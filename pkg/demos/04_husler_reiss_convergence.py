# Convergence of X/X_1 given X_1 > t to the tail tree
#
# Simulate a Husler-Reiss Markov chain 1 - 2 - 3 with unit Frechet margins
# and compare the conditioned ratios with the lognormal limit. Pass a larger
# n on the command line for sharper numbers (1e7 takes about a minute).

import sys

import numpy as np

from tailtrees import HuslerReiss, HuslerReissPickands, MarkovTreeSampler, Tree, compare_distributions, empirical_tail_tree
from tailtrees.tail_tree import SampleMatrix

n = int(float(sys.argv[1])) if len(sys.argv) > 1 else 10 ** 6
tree = Tree(["1", "2", "3"], [("1", "2"), ("2", "3")])
A = HuslerReissPickands(1.0)
X = MarkovTreeSampler(tree, "1", {("1", "2"): A, ("2", "3"): A}).sample(n, seed=0, workers=4)

# Margins stay unit Frechet: t P(X_v > t) is close to 1.

print({v: round(100 * float(np.mean(X.column(v) > 100)), 4) for v in tree.nodes})

# Hold the number of exceedances fixed and raise the threshold. The
# one-step ratio X_2/X_1 approaches the limit HR(1) quickly; the two-step
# ratio X_3/X_1 lags behind because both steps must be in their tail regime.

limit_1 = HuslerReiss(1.0)
limit_2 = HuslerReiss(2 ** 0.5)  # product of two independent HR(1) increments
m = n // 1000
for k, q in enumerate((0.9, 0.99, 0.999)):
    size = m * 10 ** (k + 1)
    if size > n:
        break
    ex = empirical_tail_tree(SampleMatrix(X.nodes, X.values[:size]), "1", q)
    d2 = compare_distributions(ex.theta.column("2"), limit_1)
    d3 = compare_distributions(ex.theta.column("3"), limit_2)
    logs = np.log(ex.theta.column("2"))
    print(f"q={q}: {ex.count} exceedances, log ratio mean {logs.mean():.3f} var {logs.var():.3f}, "
          f"KS Theta_12 {d2['ks']:.4f}, KS Theta_13 {d3['ks']:.4f}")
