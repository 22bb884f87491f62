# Max-linear models and recursive max-linear SEMs
#
# X_i = max_r a_{i,r} Z_r with Frechet(alpha) factors. Their tail trees are
# discrete with one atom per factor reaching node i.

import numpy as np

from tailtrees import (
    MaxLinearModel,
    RecursiveMLModel,
    marginal_constants,
    maxlinear_tail_law,
    root_change_law,
    sample_maxlinear,
    sem_to_maxlinear,
    theta_moment_ml,
)

ml = MaxLinearModel([[1.0, 1.0], [1.0, 0.0]], alpha=1.0)
print("tail constants", marginal_constants(ml))
print("Theta_1", maxlinear_tail_law(ml, 0).as_dict())
print("Theta_2", maxlinear_tail_law(ml, 1).as_dict())

# The alpha-moment of Theta_{i,j} tells whether Theta_{j,i} can vanish.
# From node 1 the moment equals c_2/c_1, so Theta_{2,1} > 0 almost surely;
# the other way round it does not, and Theta_{1,2} = 0 with probability 1/2.

print(theta_moment_ml(ml, 0, 1), theta_moment_ml(ml, 1, 0))

# Reweighting the law of Theta_1 by Theta_{1,2}^alpha recovers Theta_2.

print(root_change_law(maxlinear_tail_law(ml, 0), "2", 1.0).as_dict())

# Empirically t P(X_1 > t) approaches c_1 = 2.

x = sample_maxlinear(ml, 10 ** 6, seed=1).column("1")
for t in (10.0, 100.0, 1000.0):
    print(t, t * np.mean(x > t))

# A diamond DAG 1 -> 2 -> 4, 1 -> 3 -> 4. The heavier path through 3 wins,
# so b_{1,4} = 2 * 2 = 4.

rm = RecursiveMLModel(
    {v: 1.0 for v in "1234"},
    {("1", "2"): 1.0, ("2", "4"): 1.0, ("1", "3"): 2.0, ("3", "4"): 2.0},
)
sem = sem_to_maxlinear(rm, alpha=1.0)
print(sem.coeff)
print(maxlinear_tail_law(sem, sem.index("4")).as_dict())
