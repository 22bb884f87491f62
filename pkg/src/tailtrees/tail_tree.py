"""Tail trees of regularly varying Markov trees.

A tail tree rooted at ``u`` is the random vector ``Theta_u`` with
``Theta_{u,u} = 1`` and ``Theta_{u,v}`` the product of independent edge
increments along the path from ``u`` to ``v``. Paths that share edges share
the same increment draws.
"""

import csv
import io
import math

import numpy as np

from . import _random
from .errors import ConfigError, NumericalError, PreconditionError
from .increments import TOL, Discrete, Empirical, reverse_increment
from .tree import Tree, path, root_tree


class SampleMatrix:
    """``n x d`` array of draws with columns labelled by node id."""

    def __init__(self, nodes, values):
        self.nodes = tuple(str(v) for v in nodes)
        self.values = np.asarray(values, dtype=float)
        if self.values.ndim != 2 or self.values.shape[1] != len(self.nodes):
            raise ValueError(f"values of shape {self.values.shape} do not match {len(self.nodes)} nodes")
        self._index = {v: k for k, v in enumerate(self.nodes)}

    def __len__(self):
        return self.values.shape[0]

    def __repr__(self):
        return f"SampleMatrix(n={len(self)}, nodes={list(self.nodes)})"

    def index(self, node):
        try:
            return self._index[str(node)]
        except KeyError:
            raise ConfigError(f"unknown node id {node!r}") from None

    def column(self, node):
        return self.values[:, self.index(node)]

    def head(self, n):
        return SampleMatrix(self.nodes, self.values[:n])

    def to_csv(self, fh=None):
        """Write CSV with a header of node ids; returns the text if ``fh`` is None."""
        out = io.StringIO() if fh is None else fh
        writer = csv.writer(out, lineterminator="\n")
        writer.writerow(self.nodes)
        for row in self.values:
            writer.writerow([repr(float(x)) for x in row])
        if fh is None:
            return out.getvalue()

    @classmethod
    def from_csv(cls, fh):
        reader = csv.reader(fh)
        header = next(reader)
        return cls(header, np.array([[float(x) for x in row] for row in reader]).reshape(-1, len(header)))


class DiscreteLaw:
    """Finitely supported law of a random vector indexed by node ids.

    Equal atoms are merged by exact comparison.
    """

    def __init__(self, nodes, atoms, probs):
        self.nodes = tuple(str(v) for v in nodes)
        atoms = np.asarray(atoms, dtype=float).reshape(-1, len(self.nodes))
        probs = np.asarray(probs, dtype=float).ravel()
        if atoms.shape[0] != probs.size:
            raise ValueError("need one probability per atom")
        uniq, inv = np.unique(atoms, axis=0, return_inverse=True)
        merged = np.bincount(inv.ravel(), weights=probs, minlength=uniq.shape[0])
        keep = merged > 0
        self.atoms = uniq[keep]
        self.probs = merged[keep]
        self._index = {v: k for k, v in enumerate(self.nodes)}

    def __len__(self):
        return self.probs.size

    def __repr__(self):
        body = ", ".join(f"{tuple(a.tolist())}: {p:g}" for a, p in zip(self.atoms, self.probs))
        return f"DiscreteLaw({{{body}}})"

    def index(self, node):
        try:
            return self._index[str(node)]
        except KeyError:
            raise ConfigError(f"unknown node id {node!r}") from None

    def expect(self, f):
        """``E[f(Theta)]`` for ``f`` mapping an ``(m, d)`` array to ``(m,)``."""
        return float(np.sum(self.probs * np.asarray(f(self.atoms), dtype=float)))

    def marginal(self, node):
        return Discrete(self.atoms[:, self.index(node)], self.probs / self.probs.sum())

    def as_dict(self):
        return {tuple(a.tolist()): float(p) for a, p in zip(self.atoms, self.probs)}

    def to_records(self):
        """JSON-ready list of ``{"theta": [...], "p": ...}`` in node order."""
        return [{"theta": a.tolist(), "p": float(p)} for a, p in zip(self.atoms, self.probs)]


class TailTreeModel:
    """Markov-tree tail model: ``alpha``, tail constants and edge increments.

    Parameters
    ----------
    tree : Tree
    alpha : float
        Tail index.
    c : dict
        Tail constants ``c_v > 0``. Nodes without a constant are outside the
        set of admissible roots and cannot sit on a reversal path.
    increments : dict
        ``(a, b) -> Increment`` for directed edges. A missing direction is
        derived from the other by :func:`reverse_increment`.
    check : bool
        Verify that pairs stored in both directions satisfy the reversal
        identity (CDFs on a log grid, tolerance ``1e-6``).
    """

    def __init__(self, tree, alpha, c, increments, check=True):
        if not isinstance(tree, Tree):
            raise ConfigError("tree must be a Tree")
        self.tree = tree
        self.alpha = float(alpha)
        if not self.alpha > 0:
            raise ConfigError(f"alpha must be > 0, got {alpha}")
        self.c = {str(k): float(v) for k, v in c.items()}
        for v, cv in self.c.items():
            if v not in tree:
                raise ConfigError(f"tail constant for unknown node {v!r}")
            if not cv > 0:
                raise ConfigError(f"tail constant c[{v!r}] must be > 0, got {cv}")
        self._stored = {}
        for (a, b), m in increments.items():
            a, b = str(a), str(b)
            if frozenset((a, b)) not in tree.edges:
                raise ConfigError(f"increment given for non-edge ({a!r}, {b!r})")
            self._stored[(a, b)] = m
        self._derived = {}
        if check:
            self.check_consistency()

    def __repr__(self):
        return f"TailTreeModel(alpha={self.alpha:g}, nodes={list(self.tree.nodes)})"

    @property
    def stored(self):
        return dict(self._stored)

    def has_increment(self, a, b):
        return (a, b) in self._stored or (b, a) in self._stored

    def increment(self, a, b):
        """Law of ``M_{a,b}``, stored or derived by reversal."""
        a, b = str(a), str(b)
        if (a, b) in self._stored:
            return self._stored[(a, b)]
        if (a, b) in self._derived:
            return self._derived[(a, b)]
        if (b, a) not in self._stored:
            raise ConfigError(f"no increment for edge ({a!r}, {b!r}) in either direction")
        missing = [v for v in (a, b) if v not in self.c]
        if missing:
            raise PreconditionError(
                f"reversing edge ({b!r}, {a!r}) needs tail constants for {missing}",
                condition="tail constants on the reversal path",
            )
        m = reverse_increment(self._stored[(b, a)], self.c[b], self.c[a], self.alpha)
        self._derived[(a, b)] = m
        return m

    def check_consistency(self, tol=1e-6):
        z = np.logspace(-3, 3, 61)
        for (a, b), m_ab in self._stored.items():
            if a > b and (b, a) in self._stored:
                continue
            if (b, a) not in self._stored or a not in self.c or b not in self.c:
                continue
            derived = reverse_increment(m_ab, self.c[a], self.c[b], self.alpha)
            stored = self._stored[(b, a)]
            gap = np.max(np.abs(np.asarray(derived.cdf(z)) - np.asarray(stored.cdf(z))))
            if gap > tol:
                raise PreconditionError(
                    f"stored M_({b},{a}) disagrees with the reversal of M_({a},{b}) (max CDF gap {gap:.3g})",
                    condition="increment reversal identity",
                )


class TailTree:
    """Tail tree ``Theta_u`` of a :class:`TailTreeModel` rooted at ``root``."""

    def __init__(self, model, root):
        self.model = model
        self.rooted = root_tree(model.tree, root)
        self.root = self.rooted.root
        self.increments = {e: model.increment(*e) for e in self.rooted.directed_edges}
        self.paths = {v: self.rooted.path_from_root(v) for v in model.tree.nodes}

    def __repr__(self):
        return f"TailTree(root={self.root!r}, edges={list(self.rooted.directed_edges)})"

    def __eq__(self, other):
        return (
            isinstance(other, TailTree)
            and other.model is self.model
            and other.root == self.root
            and all(other.increments[e] is m for e, m in self.increments.items())
        )

    __hash__ = object.__hash__

    @property
    def nodes(self):
        return self.model.tree.nodes

    def sample(self, n, seed=0, workers=1, return_increments=False):
        return sample_tail_tree(self, n, seed, workers, return_increments)

    def alpha_moment(self, v):
        return theta_alpha_moment(self, v)

    def exact(self, max_states=10 ** 6):
        return exact_tail_tree_discrete(self, max_states)


def build_tail_tree(model, u):
    """Tail tree rooted at ``u``; reversed increments are derived as needed."""
    return TailTree(model, str(u))


def sample_tail_tree(tt, n, seed=0, workers=1, return_increments=False):
    """``n`` i.i.d. draws of ``Theta_u`` as a :class:`SampleMatrix`.

    With ``return_increments`` also returns the per-edge draws, an
    ``(n, |E|)`` array ordered like ``tt.rooted.directed_edges``.
    """
    nodes = tt.nodes
    col = {v: k for k, v in enumerate(nodes)}
    edges = tt.rooted.directed_edges
    d, ne = len(nodes), len(edges)

    def draw(rng, size):
        out = np.ones((size, d + ne))
        for k, (a, b) in enumerate(edges):
            m = tt.increments[(a, b)]._draw(rng, size)
            out[:, d + k] = m
            out[:, col[b]] = out[:, col[a]] * m
        return out

    both = _random.chunked(draw, n, seed, workers)
    samples = SampleMatrix(nodes, both[:, :d])
    if return_increments:
        return samples, both[:, d:]
    return samples


def sample_discrete_law(law, n, seed=0, workers=1):
    """``n`` i.i.d. rows from a :class:`DiscreteLaw`."""
    p = law.probs / law.probs.sum()

    def draw(rng, size):
        return law.atoms[rng.choice(p.size, size=size, p=p)]

    return SampleMatrix(law.nodes, _random.chunked(draw, n, seed, workers))


def theta_alpha_moment(tt, v):
    """``E[Theta_{u,v}^alpha]`` as the product of edge moments along the path."""
    out = 1.0
    for e in tt.paths[str(v)]:
        out *= tt.increments[e].moment(tt.model.alpha)
        if not math.isfinite(out):
            raise NumericalError(f"alpha-moment along edge {e} is not finite")
    return out


def change_root(model, u, u_bar):
    """Tail tree at ``u_bar`` obtained from the one at ``u``.

    Edges on the path between the roots swap direction and use reversed
    increment laws; all other edges keep theirs. Every node on that path
    must carry a tail constant.
    """
    u, u_bar = str(u), str(u_bar)
    tree = model.tree
    if u not in tree or u_bar not in tree:
        raise ConfigError(f"unknown root in change_root({u!r}, {u_bar!r})")
    if u != u_bar:
        on_path = {a for a, _ in path(tree, u, u_bar)} | {u_bar}
        missing = sorted(v for v in on_path if v not in model.c)
        if missing:
            raise PreconditionError(
                f"root change {u!r} -> {u_bar!r} needs tail constants for nodes {missing}",
                condition="tail constants on the reversal path",
            )
    return build_tail_tree(model, u_bar)


def _rows_and_weights(theta):
    if isinstance(theta, DiscreteLaw):
        return theta.nodes, theta.atoms, theta.probs, True
    if isinstance(theta, SampleMatrix):
        n = len(theta)
        return theta.nodes, theta.values, np.full(n, 1.0 / n), False
    raise TypeError("expected a SampleMatrix or DiscreteLaw")


def root_change_expectation(theta_i, i, j, g, alpha, return_se=False):
    """Estimate ``E[g(Theta_j)]`` from draws (or the exact law) of ``Theta_i``.

    Uses ``E[g(Theta_i / Theta_{i,j}) Theta_{i,j}^alpha] / E[Theta_{i,j}^alpha]``.
    Rows with ``Theta_{i,j} = 0`` get weight zero.

    Parameters
    ----------
    theta_i : SampleMatrix or DiscreteLaw
    i, j : str
        Conditioning node of the input and target root.
    g : callable
        Maps an ``(m, d)`` array (columns in node order) to ``(m,)`` or
        ``(m, k)``.
    alpha : float
    return_se : bool
        Also return the delta-method standard error (zero for exact laws).
    """
    nodes, rows, w, exact = _rows_and_weights(theta_i)
    jj = list(nodes).index(str(j))
    if not np.allclose(rows[:, list(nodes).index(str(i))], 1.0):
        raise PreconditionError(f"column {i!r} is not identically 1", condition="Theta_{i,i} = 1")
    tj = rows[:, jj]
    pos = tj > 0
    if not pos.any():
        raise PreconditionError(
            f"Theta_{{{i},{j}}} = 0 almost surely: root change towards {j!r} is undefined",
            condition="P(Theta_{i,j} > 0) > 0",
        )
    wt = w[pos] * tj[pos] ** alpha
    gv = np.asarray(g(rows[pos] / tj[pos, None]), dtype=float)
    den = wt.sum()
    num = (wt.reshape((-1,) + (1,) * (gv.ndim - 1)) * gv).sum(axis=0)
    value = num / den
    if not return_se:
        return value
    if exact:
        return value, np.zeros_like(value)
    n = rows.shape[0]
    # per-row contributions, zero for rows with Theta_{i,j} = 0
    full_g = np.zeros((n,) + gv.shape[1:])
    full_g[pos] = gv
    full_w = np.zeros(n)
    full_w[pos] = tj[pos] ** alpha
    resid = full_w.reshape((-1,) + (1,) * (gv.ndim - 1)) * (full_g - value)
    se = resid.std(axis=0, ddof=1) / (full_w.mean() * math.sqrt(n))
    return value, se


def root_change_law(law, j, alpha):
    """Exact law of ``Theta_j`` from the exact law of ``Theta_i`` (reweighting)."""
    jj = law.index(j)
    tj = law.atoms[:, jj]
    pos = tj > 0
    if not pos.any():
        raise PreconditionError(f"Theta_{{i,{j}}} = 0 almost surely", condition="P(Theta_{i,j} > 0) > 0")
    wt = law.probs[pos] * tj[pos] ** alpha
    return DiscreteLaw(law.nodes, law.atoms[pos] / tj[pos, None], wt / wt.sum())


def law_difference(p, q, rtol=1e-12):
    """Largest atomwise probability gap between two discrete laws.

    Atoms are matched when all components agree to relative ``rtol``;
    unmatched atoms count with their full probability.
    """
    if p.nodes != q.nodes:
        raise ConfigError("laws are indexed by different nodes")
    used = np.zeros(len(q), dtype=bool)
    gap = 0.0
    for atom, prob in zip(p.atoms, p.probs):
        hit = np.flatnonzero(~used & np.all(np.isclose(q.atoms, atom, rtol=rtol, atol=0.0), axis=1))
        if hit.size:
            used[hit[0]] = True
            gap = max(gap, abs(prob - q.probs[hit[0]]))
        else:
            gap = max(gap, prob)
    if (~used).any():
        gap = max(gap, q.probs[~used].max())
    return float(gap)


def exact_tail_tree_discrete(tt, max_states=10 ** 6):
    """Enumerate the joint law of ``Theta_u`` when all increments are discrete.

    Raises
    ------
    PreconditionError
        If an increment on the rooted edges is not discrete or the product
        of atom counts exceeds ``max_states``.
    """
    laws = []
    for e in tt.rooted.directed_edges:
        m = tt.increments[e]
        if isinstance(m, Empirical):
            m = m.to_discrete()
        if not isinstance(m, Discrete):
            raise PreconditionError(
                f"increment on edge {e} is {m!r}, not discrete", condition="discrete increments"
            )
        laws.append((e, m))
    states = math.prod(m.values.size for _, m in laws)
    if states > max_states:
        raise PreconditionError(
            f"state space of {states} atoms exceeds the bound {max_states}", condition="state-space bound"
        )
    nodes = tt.nodes
    col = {v: k for k, v in enumerate(nodes)}
    rows = np.ones((1, len(nodes)))
    probs = np.ones(1)
    for (a, b), m in laws:
        k = m.values.size
        rows = np.repeat(rows, k, axis=0)
        probs = np.repeat(probs, k) * np.tile(m.weights, probs.size)
        rows[:, col[b]] = rows[:, col[a]] * np.tile(m.values, rows.shape[0] // k)
    law = DiscreteLaw(nodes, rows, probs)
    if abs(law.probs.sum() - 1.0) > 1e-12:
        raise NumericalError(f"enumerated probabilities sum to {law.probs.sum()!r}")
    return law


def zero_mass_check(moments, c, i, tol=TOL):
    """Compare ``E[Theta_{i,j}^alpha]`` with ``c_j/c_i`` for all ``j`` in ``c``.

    ``moments`` maps node ids to the moments. Returns a list of
    ``(j, moment, target, ok)`` tuples.
    """
    out = []
    for j, cj in c.items():
        target = cj / c[i]
        mom = moments[j]
        out.append((j, mom, target, abs(mom - target) <= tol * max(1.0, target)))
    return out
