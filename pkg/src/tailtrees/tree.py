"""Undirected trees, rooted orientations and path queries.

Node ids are opaque strings. Whenever an order is needed (children of a
node, the node list of a tree) ids are sorted lexicographically so that
all derived objects are reproducible.
"""

from collections import deque
from dataclasses import dataclass, field

from .errors import ConfigError, TreeStructureError


def _node_id(raw):
    if isinstance(raw, dict):
        if "id" not in raw:
            raise ConfigError(f"node entry without 'id': {raw!r}")
        raw = raw["id"]
    if isinstance(raw, bool) or raw is None:
        raise ConfigError(f"invalid node id {raw!r}")
    return str(raw)


def _edge_ends(raw):
    if isinstance(raw, dict):
        try:
            return _node_id(raw["from"]), _node_id(raw["to"])
        except KeyError as exc:
            raise ConfigError(f"edge entry needs 'from' and 'to': {raw!r}") from exc
    try:
        a, b = raw
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"edge must be a pair of node ids, got {raw!r}") from exc
    return _node_id(a), _node_id(b)


class Tree:
    """Undirected tree on string node ids.

    Parameters
    ----------
    nodes : iterable of str
    edges : iterable of pairs of str
        Unordered; ``(a, b)`` and ``(b, a)`` denote the same edge.

    Raises
    ------
    TreeStructureError
        Fewer than two nodes, duplicate ids, self-loops, unknown endpoints,
        repeated edges, cycles or disconnected node sets.
    """

    def __init__(self, nodes, edges):
        nodes = [str(v) for v in nodes]
        if len(set(nodes)) != len(nodes):
            dup = sorted({v for v in nodes if nodes.count(v) > 1})
            raise TreeStructureError(f"duplicate node id(s): {dup}")
        if len(nodes) < 2:
            raise TreeStructureError("a tree needs at least two nodes")
        self.nodes = tuple(sorted(nodes))
        known = set(self.nodes)
        adj = {v: set() for v in self.nodes}
        undirected = set()
        for a, b in edges:
            a, b = str(a), str(b)
            if a == b:
                raise TreeStructureError(f"self-loop at node {a!r}")
            for v in (a, b):
                if v not in known:
                    raise TreeStructureError(f"edge ({a!r}, {b!r}) has unknown endpoint {v!r}")
            key = frozenset((a, b))
            if key in undirected:
                raise TreeStructureError(f"edge {{{a!r}, {b!r}}} listed twice")
            undirected.add(key)
            adj[a].add(b)
            adj[b].add(a)
        self.edges = frozenset(undirected)
        self._adj = {v: tuple(sorted(nb)) for v, nb in adj.items()}

        # connectivity and acyclicity via one BFS from the canonical root
        root = self.nodes[0]
        parent = {root: None}
        depth = {root: 0}
        queue = deque([root])
        while queue:
            a = queue.popleft()
            for b in self._adj[a]:
                if b == parent[a]:
                    continue
                if b in parent:
                    raise TreeStructureError(f"cycle detected through edge ({a!r}, {b!r})")
                parent[b] = a
                depth[b] = depth[a] + 1
                queue.append(b)
        if len(parent) != len(self.nodes):
            missing = sorted(set(self.nodes) - set(parent))
            raise TreeStructureError(f"tree is disconnected; unreachable from {root!r}: {missing}")
        self._parent = parent
        self._depth = depth

    def __repr__(self):
        edges = sorted(tuple(sorted(e)) for e in self.edges)
        return f"Tree(nodes={list(self.nodes)}, edges={edges})"

    def __eq__(self, other):
        return isinstance(other, Tree) and self.nodes == other.nodes and self.edges == other.edges

    def __hash__(self):
        return hash((self.nodes, self.edges))

    def __contains__(self, node):
        return node in self._adj

    def neighbours(self, node):
        self._check(node)
        return self._adj[node]

    def _check(self, node):
        if node not in self._adj:
            raise ConfigError(f"unknown node id {node!r}")

    def path(self, u, v):
        """Directed edges ``((u0, u1), ..., (u_{n-1}, u_n))`` from ``u`` to ``v``."""
        return path(self, u, v)


@dataclass(frozen=True)
class RootedTree:
    """A tree with its edges directed away from ``root``.

    ``directed_edges`` lists the edges in breadth-first order, children of
    each node in lexicographic order; ``order`` is the matching node order
    starting with the root.
    """

    base: Tree
    root: str
    directed_edges: tuple
    parent: dict = field(repr=False)
    children: dict = field(repr=False)
    order: tuple = field(repr=False)

    def path_from_root(self, v):
        """Directed edges from the root down to ``v`` (empty for the root)."""
        self.base._check(v)
        edges = []
        while v != self.root:
            p = self.parent[v]
            edges.append((p, v))
            v = p
        return tuple(reversed(edges))


def parse_tree(doc):
    """Build a :class:`Tree` from a mapping with ``nodes`` and ``edges``.

    Nodes may be given as bare ids or as objects with an ``id`` field; edges
    as pairs or as objects with ``from``/``to`` fields.
    """
    if not isinstance(doc, dict):
        raise ConfigError("tree description must be a mapping with 'nodes' and 'edges'")
    try:
        raw_nodes = doc["nodes"]
        raw_edges = doc["edges"]
    except KeyError as exc:
        raise ConfigError(f"tree description lacks {exc.args[0]!r}") from exc
    nodes = [_node_id(v) for v in raw_nodes]
    edges = [_edge_ends(e) for e in raw_edges]
    return Tree(nodes, edges)


def root_tree(t, u):
    """Orient the edges of ``t`` away from ``u`` by breadth-first search."""
    u = str(u)
    t._check(u)
    parent = {u: None}
    children = {}
    order = [u]
    directed = []
    queue = deque([u])
    while queue:
        a = queue.popleft()
        kids = tuple(b for b in t._adj[a] if b != parent[a])
        children[a] = kids
        for b in kids:
            parent[b] = a
            directed.append((a, b))
            order.append(b)
            queue.append(b)
    return RootedTree(t, u, tuple(directed), parent, children, tuple(order))


def path(t, u, v):
    """Unique path from ``u`` to ``v`` as a tuple of directed edges.

    Raises
    ------
    ConfigError
        If ``u == v`` (the empty path is not represented; the tail tree uses
        ``Theta_{u,u} = 1`` directly) or either node is unknown.
    """
    u, v = str(u), str(v)
    t._check(u)
    t._check(v)
    if u == v:
        raise ConfigError(f"path from {u!r} to itself requested")
    up, down = [], []
    a, b = u, v
    while t._depth[a] > t._depth[b]:
        up.append(a)
        a = t._parent[a]
    while t._depth[b] > t._depth[a]:
        down.append(b)
        b = t._parent[b]
    while a != b:
        up.append(a)
        down.append(b)
        a, b = t._parent[a], t._parent[b]
    seq = up + [a] + down[::-1]
    return tuple(zip(seq[:-1], seq[1:]))
