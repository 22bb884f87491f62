import pytest
from hypothesis import given
from hypothesis import strategies as st

from tailtrees import ConfigError, TreeStructureError, Tree, parse_tree, path, root_tree


def test_smallest_tree():
    t = parse_tree({"nodes": ["1", "2"], "edges": [["1", "2"]]})
    assert t.nodes == ("1", "2")
    assert t.edges == {frozenset({"1", "2"})}


def test_parse_object_forms(star):
    t = parse_tree(
        {
            "nodes": [{"id": 1}, {"id": 2}, {"id": 3}, {"id": 4}],
            "edges": [{"from": 1, "to": 2}, {"from": 2, "to": 3}, {"from": 2, "to": 4}],
        }
    )
    assert t == star
    assert t.neighbours("2") == ("1", "3", "4")


@pytest.mark.parametrize(
    "nodes, edges, match",
    [
        (["1", "2", "3"], [("1", "2")], "disconnected"),
        (["1", "2", "2"], [("1", "2")], "duplicate"),
        (["1", "2"], [("1", "3")], "unknown endpoint"),
        (["1", "2", "3"], [("1", "2"), ("2", "3"), ("3", "1")], "cycle"),
        (["1", "2"], [("1", "1"), ("1", "2")], "self-loop"),
        (["1"], [], "at least two"),
        (["1", "2"], [("1", "2"), ("2", "1")], "twice"),
    ],
)
def test_invalid_trees(nodes, edges, match):
    with pytest.raises(TreeStructureError, match=match):
        Tree(nodes, edges)


def test_parse_errors():
    with pytest.raises(ConfigError):
        parse_tree({"nodes": ["1", "2"]})
    with pytest.raises(ConfigError):
        parse_tree({"nodes": ["1", "2"], "edges": [["1"]]})
    with pytest.raises(ConfigError):
        parse_tree([1, 2])


def test_root_tree_star(star):
    assert root_tree(star, "1").directed_edges == (("1", "2"), ("2", "3"), ("2", "4"))
    assert root_tree(star, "3").directed_edges == (("3", "2"), ("2", "1"), ("2", "4"))
    two = Tree(["1", "2"], [("1", "2")])
    assert root_tree(two, "1").directed_edges == (("1", "2"),)
    with pytest.raises(ConfigError):
        root_tree(star, "9")


def test_paths(star, seven):
    assert path(star, "1", "4") == (("1", "2"), ("2", "4"))
    assert path(star, "4", "1") == (("4", "2"), ("2", "1"))
    assert path(seven, "1", "7") == (("1", "4"), ("4", "5"), ("5", "7"))
    assert star.path("3", "4") == (("3", "2"), ("2", "4"))


def test_path_errors(star):
    with pytest.raises(ConfigError, match="itself"):
        path(star, "1", "1")
    with pytest.raises(ConfigError, match="unknown"):
        path(star, "1", "x")


def test_path_from_root(seven):
    rt = root_tree(seven, "6")
    assert rt.path_from_root("6") == ()
    assert rt.path_from_root("1") == path(seven, "6", "1")


@st.composite
def trees(draw):
    # random labelled tree from a parent array (Pruefer-free, always valid)
    n = draw(st.integers(2, 12))
    labels = draw(st.permutations([f"n{k}" for k in range(n)]))
    parents = [draw(st.integers(0, k - 1)) for k in range(1, n)]
    edges = [(labels[p], labels[k + 1]) for k, p in enumerate(parents)]
    return Tree(labels, edges)


@given(trees(), st.data())
def test_path_properties(t, data):
    u, v = data.draw(st.lists(st.sampled_from(t.nodes), min_size=2, max_size=2, unique=True))
    p = path(t, u, v)
    assert p[0][0] == u and p[-1][1] == v
    seq = [p[0][0]] + [b for _, b in p]
    assert len(set(seq)) == len(seq)
    assert all(frozenset(e) in t.edges for e in p)
    # reversal
    assert path(t, v, u) == tuple((b, a) for a, b in reversed(p))
    # concatenation through any interior node
    for w in seq[1:-1]:
        assert path(t, u, w) + path(t, w, v) == p


@given(trees(), st.data())
def test_rooting_covers_edges(t, data):
    u = data.draw(st.sampled_from(t.nodes))
    rt = root_tree(t, u)
    assert {frozenset(e) for e in rt.directed_edges} == t.edges
    assert len(rt.directed_edges) == len(t.nodes) - 1
    children = [b for _, b in rt.directed_edges]
    assert sorted(children) == sorted(set(t.nodes) - {u})
    assert rt.order[0] == u
