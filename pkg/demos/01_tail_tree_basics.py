# Tail trees of a small Markov tree
#
# A star with hub 2 and leaves 1, 3, 4. Each edge carries a multiplicative
# increment M; the tail tree at a root u multiplies increments along paths.

from tailtrees import (
    Discrete,
    TailTreeModel,
    Tree,
    build_tail_tree,
    change_root,
    exact_tail_tree_discrete,
    root_change_law,
    sample_tail_tree,
    theta_alpha_moment,
)
from tailtrees.tail_tree import law_difference

tree = Tree(["1", "2", "3", "4"], [("1", "2"), ("2", "3"), ("2", "4")])

# Increments are stored for one direction per edge. With all tail constants
# equal to 1 and E[M] = 1 the reversed laws exist and have no atom at zero.
increments = {
    ("1", "2"): Discrete([0.5, 1.5], [0.5, 0.5]),
    ("2", "3"): Discrete([0.25, 1.75], [0.5, 0.5]),
    ("2", "4"): Discrete.degenerate(1.0),
}
model = TailTreeModel(tree, alpha=1.0, c={v: 1.0 for v in tree.nodes}, increments=increments)
print(model)

# Sampling: the draws for M_{1,2} are shared by Theta_{1,3} and Theta_{1,4}.

tt = build_tail_tree(model, "1")
theta = sample_tail_tree(tt, 5, seed=0)
print(theta.to_csv())

# The law is discrete, so it can also be enumerated exactly.

law = exact_tail_tree_discrete(tt)
for rec in law.to_records():
    print(rec)

# alpha-moments multiply along paths.

print({v: theta_alpha_moment(tt, v) for v in tree.nodes})

# Changing the root to node 3 reverses the increments on the path 1-2-3.
# The structural route and the reweighting route agree atom by atom.

tt3 = change_root(model, "1", "3")
print({e: tt3.increments[e] for e in tt3.rooted.directed_edges})

direct = exact_tail_tree_discrete(tt3)
reweighted = root_change_law(law, "3", alpha=1.0)
for rec in direct.to_records():
    print(rec)
print("largest atomwise gap:", law_difference(direct, reweighted))
