"""Max-linear models and recursive max-linear structural equation models.

``X_i = max_r a_{i,r} Z_r`` with i.i.d. Frechet(alpha) factors. The tail
trees of such a model are discrete with at most ``s`` atoms, so every
quantity here is exact.

The Python API indexes rows and factors from 0; node labels ``"1".."d"``
are used wherever results are keyed by node id (sample matrices, laws).
"""

import graphlib
import math

import numpy as np

from . import _random
from .errors import ConfigError, TreeStructureError
from .tail_tree import DiscreteLaw, SampleMatrix


class MaxLinearModel:
    """Max-linear model with coefficient matrix ``coeff`` (``d x s``).

    Parameters
    ----------
    coeff : array_like
        Nonnegative; every row needs a positive entry.
    alpha : float
        Tail index of the Frechet factors.
    nodes : sequence of str, optional
        Labels of the rows, default ``"1", ..., "d"``.
    """

    def __init__(self, coeff, alpha, nodes=None):
        a = np.asarray(coeff, dtype=float)
        if a.ndim != 2 or a.size == 0:
            raise ConfigError(f"coeff must be a non-empty matrix, got shape {a.shape}")
        if not np.all(np.isfinite(a)) or np.any(a < 0):
            raise ConfigError("coeff entries must be finite and >= 0")
        bad = np.flatnonzero(a.max(axis=1) <= 0)
        if bad.size:
            raise ConfigError(f"rows {(bad + 1).tolist()} of coeff have no positive entry")
        if not float(alpha) > 0:
            raise ConfigError(f"alpha must be > 0, got {alpha}")
        self.coeff = a
        self.alpha = float(alpha)
        self.nodes = tuple(str(k + 1) for k in range(a.shape[0])) if nodes is None else tuple(map(str, nodes))
        if len(self.nodes) != a.shape[0]:
            raise ConfigError("need one node label per row of coeff")

    def __repr__(self):
        return f"MaxLinearModel(d={self.d}, s={self.s}, alpha={self.alpha:g})"

    @property
    def d(self):
        return self.coeff.shape[0]

    @property
    def s(self):
        return self.coeff.shape[1]

    def index(self, node):
        """Row index of a node label."""
        try:
            return self.nodes.index(str(node))
        except ValueError:
            raise ConfigError(f"unknown node id {node!r}") from None


def marginal_constants(ml):
    """Tail constants ``c_i = sum_r a_{i,r}^alpha``."""
    return (ml.coeff ** ml.alpha).sum(axis=1)


def maxlinear_tail_law(ml, i):
    """Exact law of ``Theta_i`` (0-based row ``i``) as a :class:`DiscreteLaw`."""
    a = ml.coeff
    pos = a[i] > 0
    w = a[i, pos] ** ml.alpha
    atoms = (a[:, pos] / a[i, pos]).T
    return DiscreteLaw(ml.nodes, atoms, w / w.sum())


def theta_moment_ml(ml, i, j):
    """``E[Theta_{i,j}^alpha]`` and whether it equals ``c_j / c_i``.

    The flag is true exactly when ``P(Theta_{j,i} > 0) = 1``. Comparison is
    exact up to a relative ``1e-12`` for floating-point sums.
    """
    a = ml.coeff ** ml.alpha
    c = a.sum(axis=1)
    mom = a[j, ml.coeff[i] > 0].sum() / c[i]
    target = c[j] / c[i]
    return float(mom), bool(math.isclose(mom, target, rel_tol=1e-12, abs_tol=0.0))


def excluded_alpha_mass(ml, i):
    """``sum_{j} sum_{r: a_{i,r}=0} a_{j,r}^alpha / c_i`` per row ``j``.

    Row ``j`` carries zero excluded mass iff the moment flag for ``(i, j)``
    holds.
    """
    a = ml.coeff ** ml.alpha
    return a[:, ml.coeff[i] == 0].sum(axis=1) / a[i].sum()


def sample_maxlinear(ml, n, seed=0, workers=1):
    """Draw ``n`` rows ``X_i = max_r a_{i,r} Z_r`` with Frechet(alpha) ``Z``."""
    a = ml.coeff

    def draw(rng, size):
        z = (-np.log(rng.random((size, ml.s)))) ** (-1.0 / ml.alpha)
        return (z[:, None, :] * a[None, :, :]).max(axis=2)

    return SampleMatrix(ml.nodes, _random.chunked(draw, n, seed, workers))


class RecursiveMLModel:
    """Recursive max-linear SEM ``X_i = max(max_{k in pa(i)} g_{ki} X_k, g_{ii} Z_i)``.

    Parameters
    ----------
    nodes : dict
        Node id to ``gamma_ii > 0``.
    edges : dict
        ``(k, i)`` to ``gamma_ki > 0`` for each edge ``k -> i``.
    """

    def __init__(self, nodes, edges):
        self.gamma_node = {str(k): float(v) for k, v in nodes.items()}
        self.gamma_edge = {(str(k), str(i)): float(v) for (k, i), v in edges.items()}
        for v, g in self.gamma_node.items():
            if not g > 0:
                raise ConfigError(f"node coefficient gamma[{v!r}] must be > 0")
        self.parents = {v: [] for v in self.gamma_node}
        for (k, i), g in self.gamma_edge.items():
            if k not in self.gamma_node or i not in self.gamma_node:
                raise ConfigError(f"edge ({k!r}, {i!r}) has an unknown endpoint")
            if not g > 0:
                raise ConfigError(f"edge coefficient gamma[{k!r}, {i!r}] must be > 0")
            if k == i:
                raise TreeStructureError(f"self-loop at node {k!r}")
            self.parents[i].append(k)
        try:
            self.order = tuple(graphlib.TopologicalSorter({v: sorted(p) for v, p in self.parents.items()}).static_order())
        except graphlib.CycleError as exc:
            raise TreeStructureError(f"cycle detected: {exc.args[1]}") from None
        self.nodes = tuple(sorted(self.gamma_node))

    def __repr__(self):
        return f"RecursiveMLModel(nodes={list(self.nodes)}, edges={sorted(self.gamma_edge)})"

    def ancestors(self, i):
        seen, stack = set(), list(self.parents[str(i)])
        while stack:
            k = stack.pop()
            if k not in seen:
                seen.add(k)
                stack.extend(self.parents[k])
        return seen


def path_coefficients(rm):
    """Matrix ``b`` with ``b[j, i]`` the maximal weighted path product ``j -> i``.

    Rows and columns follow ``rm.nodes``. Computed by dynamic programming in
    topological order.
    """
    idx = {v: k for k, v in enumerate(rm.nodes)}
    b = np.zeros((len(rm.nodes), len(rm.nodes)))
    for i in rm.order:
        col = idx[i]
        b[col, col] = rm.gamma_node[i]
        for k in rm.parents[i]:
            b[:, col] = np.maximum(b[:, col], b[:, idx[k]] * rm.gamma_edge[(k, i)])
    return b


def sem_to_maxlinear(rm, alpha):
    """Max-linear representation ``a_{i,r} = b_{r,i}`` of a recursive SEM."""
    return MaxLinearModel(path_coefficients(rm).T, alpha, nodes=rm.nodes)
