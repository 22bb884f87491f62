"""Monte Carlo simulation of max-stable Markov trees and tail diagnostics.

Margins are unit Frechet, ``P(X <= z) = exp(-1/z)``, so ``alpha = 1`` and
all tail constants equal 1. Neighbouring pairs are bivariate max-stable
with Pickands dependence function ``A``; children are drawn from the exact
conditional law given their parent by inverse-CDF bisection.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from . import _random
from .errors import ConfigError, NumericalError, PreconditionError
from .increments import Discrete, Empirical, Increment, invert_cdf
from .tail_tree import DiscreteLaw, SampleMatrix
from .tree import Tree, root_tree

_S_START = math.log(10.0)
_S_LIMIT = math.log(1e12)


def conditional_cdf(A, x, y):
    """``P(Y <= y | X = x)`` for a unit-Frechet max-stable pair with dependence ``A``."""
    x = np.asarray(x, dtype=float)
    s = np.log(np.asarray(y, dtype=float) / x)
    t1, t2 = A.conditional_terms(s)
    return np.exp(-(t1 - 1.0) / x) * t2


def conditional_inverse(A, x, u, rtol=1e-10, max_iter=200):
    """Solve ``P(Y <= y | X = x) >= u`` for the smallest ``y``, elementwise.

    Bisection runs on ``s = log(y/x)``. The bracket starts at ``[x/10, 10x]``
    and grows geometrically up to ``[1e-12 x, 1e12 x]``.

    Raises
    ------
    NumericalError
        If the bracket cannot be established or bisection does not reach
        relative tolerance ``rtol`` within ``max_iter`` steps.
    """
    x, u = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(u, dtype=float))
    if np.any(x <= 0):
        raise PreconditionError("conditioning value x must be > 0", condition="x > 0")
    if A.comonotone:
        return x.copy()

    def H(s):
        t1, t2 = A.conditional_terms(s)
        return np.exp(-(t1 - 1.0) / x) * t2

    lo = np.full(x.shape, -_S_START)
    hi = np.full(x.shape, _S_START)
    width = _S_START
    while True:
        need_lo = H(lo) >= u
        need_hi = H(hi) < u
        if not (need_lo.any() or need_hi.any()):
            break
        if width >= _S_LIMIT:
            bad = int(need_lo.sum() + need_hi.sum())
            raise NumericalError(
                f"conditional inverse: {bad} value(s) outside the bracket [1e-12 x, 1e12 x] (bisection non-convergence)"
            )
        width = min(2 * width, _S_LIMIT)
        lo = np.where(need_lo, -width, lo)
        hi = np.where(need_hi, width, hi)
    for _ in range(max_iter):
        if np.max(hi - lo) <= rtol:
            break
        mid = 0.5 * (lo + hi)
        up = H(mid) >= u
        hi = np.where(up, mid, hi)
        lo = np.where(up, lo, mid)
    else:
        raise NumericalError(f"conditional inverse did not converge in {max_iter} bisection steps")
    return x * np.exp(hi)


def conditional_sample_maxstable(A, x, seed=0, size=None):
    """Draw ``Y`` given ``X = x`` from the max-stable pair with dependence ``A``.

    Returns a float when ``size`` is None, otherwise an array of ``size``
    draws.
    """
    rng = np.random.default_rng(seed)
    u = rng.random(1 if size is None else size)
    y = conditional_inverse(A, x, u)
    return float(y[0]) if size is None else y


class MarkovTreeSampler:
    """Markov tree with unit-Frechet margins and max-stable neighbour pairs.

    Parameters
    ----------
    tree : Tree
    root : str
        Sampling root; edges are traversed away from it.
    pickands : dict
        Directed edge ``(a, b)`` to the dependence function of the pair
        ``(X_a, X_b)``. If only ``(b, a)`` is given for an edge traversed as
        ``a -> b`` its reflection is used.
    """

    alpha = 1.0

    def __init__(self, tree, root, pickands):
        if not isinstance(tree, Tree):
            raise ConfigError("tree must be a Tree")
        self.tree = tree
        self.rooted = root_tree(tree, root)
        self.root = self.rooted.root
        self.pickands = {}
        for a, b in self.rooted.directed_edges:
            if (a, b) in pickands:
                self.pickands[(a, b)] = pickands[(a, b)]
            elif (b, a) in pickands:
                self.pickands[(a, b)] = pickands[(b, a)].reflect()
            else:
                raise ConfigError(f"no Pickands function for edge ({a!r}, {b!r})")

    def __repr__(self):
        return f"MarkovTreeSampler(root={self.root!r}, edges={list(self.rooted.directed_edges)})"

    @property
    def nodes(self):
        return self.tree.nodes

    def sample(self, n, seed=0, workers=1):
        return sample_markov_tree(self, n, seed, workers)


def sample_markov_tree(sampler, n, seed=0, workers=1):
    """``n`` rows of the Markov tree, sampled root first along the rooted edges."""
    nodes = sampler.nodes
    col = {v: k for k, v in enumerate(nodes)}
    edges = sampler.rooted.directed_edges

    def draw(rng, size):
        out = np.empty((size, len(nodes)))
        out[:, col[sampler.root]] = -1.0 / np.log(rng.random(size))
        for a, b in edges:
            out[:, col[b]] = conditional_inverse(sampler.pickands[(a, b)], out[:, col[a]], rng.random(size))
        return out

    return SampleMatrix(nodes, _random.chunked(draw, n, seed, workers))


@dataclass
class Exceedances:
    """Rows of ``X / X_u`` over ``X_u > threshold``."""

    theta: SampleMatrix
    threshold: float
    count: int


def empirical_tail_tree(X, u, q, min_exceedances=1000):
    """Empirical tail tree: rows with ``X_u`` above its ``q``-quantile, over ``X_u``."""
    if not 0 < q < 1:
        raise ConfigError(f"quantile must lie in (0, 1), got {q}")
    n = len(X)
    if n * (1 - q) < min_exceedances - 1e-6:
        raise PreconditionError(
            f"n(1-q) = {n * (1 - q):.1f} < {min_exceedances} expected exceedances",
            condition="enough exceedances n(1-q) >= 1000",
        )
    xu = X.column(u)
    t = float(np.quantile(xu, q))
    keep = xu > t
    rows = X.values[keep] / xu[keep, None]
    return Exceedances(SampleMatrix(X.nodes, rows), t, int(keep.sum()))


def _as_increment(reference):
    if isinstance(reference, DiscreteLaw):
        raise ConfigError("pass a marginal of the exact law, e.g. law.marginal(node)")
    if isinstance(reference, Empirical):
        return reference.to_discrete()
    if not isinstance(reference, Increment):
        raise ConfigError(f"unsupported reference {reference!r}")
    return reference


def ks_distance(x, reference):
    """Sup distance between the empirical CDF of ``x`` and ``reference``.

    Both CDFs are compared at every data point and every reference atom,
    from the right and as left limits.
    """
    ref = _as_increment(reference)
    x = np.sort(np.asarray(x, dtype=float))
    pts = x
    if isinstance(ref, Discrete):
        pts = np.union1d(x, ref.values)
    else:
        pts = np.unique(np.concatenate([x, [0.0]])) if ref.zero_mass > 0 else np.unique(x)
    n = x.size
    emp_right = np.searchsorted(x, pts, side="right") / n
    emp_left = np.searchsorted(x, pts, side="left") / n
    ref_right = np.asarray(ref.cdf(pts), dtype=float)
    ref_left = np.asarray(ref.cdf_left(pts), dtype=float)
    return float(max(np.max(np.abs(emp_right - ref_right)), np.max(np.abs(emp_left - ref_left))))


def _positive_cdf(ref, p0):
    def F(z):
        return (np.asarray(ref.cdf(z), dtype=float) - p0) / (1.0 - p0)

    return F


def wasserstein_log(x, reference, n_grid=20001):
    """W1 distance between ``log`` of the positive parts of ``x`` and ``reference``.

    Returns ``(distance, zero_mass_empirical, zero_mass_reference)``. Both
    positive parts empty gives distance 0.
    """
    ref = _as_increment(reference)
    x = np.asarray(x, dtype=float)
    pos = np.sort(x[x > 0])
    p0_emp = 1.0 - pos.size / x.size
    p0_ref = float(ref.zero_mass)
    ref_empty = p0_ref >= 1.0 - 1e-15
    if pos.size == 0 and ref_empty:
        return 0.0, p0_emp, p0_ref
    if pos.size == 0 or ref_empty:
        raise PreconditionError(
            "one of the positive parts is empty; the log-scale distance is undefined",
            condition="positive mass on both sides",
        )
    logs = np.log(pos)
    if isinstance(ref, Discrete):
        keep = ref.values > 0
        return (
            float(stats.wasserstein_distance(logs, np.log(ref.values[keep]), v_weights=ref.weights[keep])),
            p0_emp,
            p0_ref,
        )
    F = _positive_cdf(ref, p0_ref)
    # reference quantiles at 1e-10 and 1 - 1e-10 of the positive part bound its support
    q_lo = invert_cdf(ref.cdf, np.array([p0_ref + 1e-10 * (1 - p0_ref)]), p0_ref)[0]
    q_hi = invert_cdf(ref.cdf, np.array([1.0 - 1e-10 * (1 - p0_ref)]), p0_ref)[0]
    a = min(logs[0], math.log(q_lo))
    b = max(logs[-1], math.log(q_hi))
    t = np.union1d(np.linspace(a, b, n_grid), logs)
    emp = np.searchsorted(logs, t, side="right") / logs.size
    diff = np.abs(emp - F(np.exp(t)))
    return float(np.sum(0.5 * (diff[1:] + diff[:-1]) * np.diff(t))), p0_emp, p0_ref


def compare_distributions(empirical, reference):
    """KS distance and log-scale Wasserstein-1 between data and a reference law.

    Parameters
    ----------
    empirical : array_like
        At least 100 points.
    reference : Increment
        Exact reference; use ``law.marginal(node)`` for discrete joint laws.

    Returns
    -------
    dict
        ``ks``, ``wasserstein_log``, ``zero_mass_empirical``,
        ``zero_mass_reference`` and ``zero_mass_diff``.
    """
    x = np.asarray(empirical, dtype=float).ravel()
    if x.size < 100:
        raise PreconditionError(f"need at least 100 empirical points, got {x.size}", condition=">= 100 points")
    w, z_emp, z_ref = wasserstein_log(x, reference)
    return {
        "ks": ks_distance(x, reference),
        "wasserstein_log": w,
        "zero_mass_empirical": z_emp,
        "zero_mass_reference": z_ref,
        "zero_mass_diff": z_emp - z_ref,
    }


def empirical_tail_constant(x, t_grid):
    """Estimates of ``t P(X > t)`` with binomial standard errors.

    Thresholds at or above the sample maximum yield estimate 0 and are
    flagged.
    """
    x = np.asarray(x, dtype=float).ravel()
    n = x.size
    xmax = x.max()
    out = []
    for t in t_grid:
        t = float(t)
        p = float(np.mean(x > t))
        out.append(
            {
                "t": t,
                "estimate": t * p,
                "se": t * math.sqrt(p * (1 - p) / n),
                "flagged": bool(t >= xmax),
            }
        )
    return out
