"""Tail-measure functionals computed from a single tail tree ``Theta_i``.

Every functional has the form ``c_i E[h(Theta_i)]``. Exact discrete laws
give exact values (standard error 0); sampled sources give Monte Carlo
means with standard errors from the per-draw integrands.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, PreconditionError, ZeroMassError
from .maxlinear import marginal_constants, maxlinear_tail_law
from .tail_tree import DiscreteLaw, SampleMatrix, sample_tail_tree, theta_alpha_moment

EXACT_TOL = 1e-6


@dataclass(frozen=True)
class Estimate:
    value: float
    se: float = 0.0

    def as_dict(self):
        return {"value": float(self.value), "se": float(self.se)}


class ThetaSource:
    """Draws or exact law of ``Theta_i`` together with ``alpha`` and constants.

    Parameters
    ----------
    theta : DiscreteLaw or SampleMatrix
    i : str
        Conditioning node; its column must be identically 1.
    c : dict
        Tail constants of the nodes in ``I``, including ``i``.
    alpha : float
    tail_tree : TailTree, optional
        When given, alpha-moments for the zero-mass test are computed
        exactly instead of from the draws.
    """

    def __init__(self, theta, i, c, alpha, tail_tree=None):
        if not isinstance(theta, (DiscreteLaw, SampleMatrix)):
            raise TypeError("theta must be a DiscreteLaw or a SampleMatrix")
        self.theta = theta
        self.i = str(i)
        self.c = {str(k): float(v) for k, v in c.items()}
        if self.i not in self.c:
            raise PreconditionError(f"source node {self.i!r} has no tail constant", condition="i in I")
        self.alpha = float(alpha)
        self.tail_tree = tail_tree
        self.exact = isinstance(theta, DiscreteLaw)
        self.nodes = theta.nodes
        self.rows = theta.atoms if self.exact else theta.values
        self.probs = theta.probs if self.exact else None
        if not np.all(self.rows[:, self.col(self.i)] == 1.0):
            raise PreconditionError(f"column {self.i!r} is not identically 1", condition="Theta_{i,i} = 1")

    def __repr__(self):
        kind = "exact" if self.exact else f"n={self.rows.shape[0]}"
        return f"ThetaSource(i={self.i!r}, {kind}, alpha={self.alpha:g})"

    @property
    def c_i(self):
        return self.c[self.i]

    def col(self, node):
        return self.theta.index(node)

    @classmethod
    def from_law(cls, law, i, c, alpha):
        return cls(law, i, c, alpha)

    @classmethod
    def from_samples(cls, samples, i, c, alpha):
        return cls(samples, i, c, alpha)

    @classmethod
    def from_tail_tree(cls, tt, n, seed=0, workers=1):
        s = sample_tail_tree(tt, n, seed, workers)
        return cls(s, tt.root, tt.model.c, tt.model.alpha, tail_tree=tt)

    @classmethod
    def from_maxlinear(cls, ml, node):
        c = dict(zip(ml.nodes, marginal_constants(ml)))
        return cls(maxlinear_tail_law(ml, ml.index(node)), node, c, ml.alpha)

    def mean(self, vals):
        """``E[vals]`` over the source with its standard error."""
        vals = np.asarray(vals, dtype=float)
        if self.exact:
            return Estimate(float(np.sum(self.probs * vals)), 0.0)
        n = vals.size
        return Estimate(float(vals.mean()), float(vals.std(ddof=1) / math.sqrt(n)) if n > 1 else math.inf)

    def ratio(self, num, den):
        """``E[num] / E[den]`` with a delta-method standard error."""
        a, b = self.mean(num), self.mean(den)
        if b.value <= 0:
            raise PreconditionError("denominator of the ratio estimate is zero", condition="nu(S_rho) > 0")
        r = a.value / b.value
        if self.exact:
            return Estimate(r, 0.0)
        resid = np.asarray(num) - r * np.asarray(den)
        return Estimate(r, float(resid.std(ddof=1) / (b.value * math.sqrt(resid.size))))

    def alpha_moment(self, j):
        """``E[Theta_{i,j}^alpha]``: exact if possible, else a sample mean."""
        if self.tail_tree is not None:
            return Estimate(theta_alpha_moment(self.tail_tree, j), 0.0)
        return self.mean(self.rows[:, self.col(j)] ** self.alpha)


def _coords(src, J, y):
    J = [str(j) for j in J]
    y = np.asarray(y, dtype=float).ravel()
    if len(J) == 0 or len(J) != y.size:
        raise ConfigError(f"J and y must be non-empty and of equal length, got {J} and {y.tolist()}")
    if len(set(J)) != len(J):
        raise ConfigError(f"J contains duplicates: {J}")
    if not np.all(y > 0):
        raise ConfigError("thresholds y must be > 0")
    cols = [src.col(j) for j in J]
    return J, cols, y


def check_zero_mass(src):
    """Verify ``E[Theta_{i,j}^alpha] = c_j / c_i`` for all ``j`` in ``I``.

    Tolerance is ``1e-6`` (relative to ``max(1, target)``) for exact
    moments and three standard errors for sampled ones.

    Raises
    ------
    ZeroMassError
        Listing the offending nodes.
    """
    bad = []
    for j, cj in src.c.items():
        target = cj / src.c_i
        est = src.alpha_moment(j)
        tol = EXACT_TOL * max(1.0, target) if est.se == 0 else 3 * est.se
        if abs(est.value - target) > tol:
            bad.append((j, est.value, target))
    if bad:
        detail = ", ".join(f"{j}: E[Theta^alpha]={m:.6g} vs c_j/c_i={t:.6g}" for j, m, t in bad)
        raise ZeroMassError(
            f"nu puts mass on {{x_{src.i} = 0}}; offending nodes {detail}", offending=[j for j, _, _ in bad]
        )


def nu_orthant(src, J, y):
    """``nu(x_j > y_j for all j in J) = c_i E[min_j y_j^-alpha Theta_{i,j}^alpha]``."""
    J, cols, y = _coords(src, J, y)
    if src.i not in J:
        raise PreconditionError(f"source node {src.i!r} is not in J={J}", condition="i in I and J")
    vals = np.min((src.rows[:, cols] / y) ** src.alpha, axis=1)
    est = src.mean(vals)
    return Estimate(src.c_i * est.value, src.c_i * est.se)


def nu_union(src, J, y):
    """``nu(x_j > y_j for some j in J) = c_i E[max_j y_j^-alpha Theta_{i,j}^alpha]``.

    Only valid without mass on ``{x_i = 0}``, which is checked first.
    """
    J, cols, y = _coords(src, J, y)
    check_zero_mass(src)
    vals = np.max((src.rows[:, cols] / y) ** src.alpha, axis=1)
    est = src.mean(vals)
    return Estimate(src.c_i * est.value, src.c_i * est.se)


@dataclass
class ConsistencyReport:
    estimates: dict
    pairs: list

    @property
    def ok(self):
        return all(p["pass"] for p in self.pairs)

    @property
    def max_discrepancy(self):
        return max(p["discrepancy"] for p in self.pairs)

    def as_dict(self):
        return {
            "estimates": {k: e.as_dict() for k, e in self.estimates.items()},
            "pairs": self.pairs,
            "pass": self.ok,
        }


def consistency_check(sources, J, y, exact_tol=1e-9):
    """Compare ``nu_orthant(J, y)`` across sources whose node lies in ``J``.

    Pairs are flagged when they differ by more than ``exact_tol`` (both
    exact) or three combined standard errors.
    """
    J = [str(j) for j in J]
    eligible = [s for s in sources if s.i in J]
    if len(eligible) < 2:
        raise PreconditionError(
            f"need at least two sources with node in J={J}, got {len(eligible)}", condition="|I and J| >= 2"
        )
    est = {s.i: nu_orthant(s, J, y) for s in eligible}
    pairs = []
    keys = list(est)
    for a in range(len(keys)):
        for b in range(a + 1, len(keys)):
            ea, eb = est[keys[a]], est[keys[b]]
            comb = math.hypot(ea.se, eb.se)
            tol = exact_tol if comb == 0 else 3 * comb
            diff = abs(ea.value - eb.value)
            pairs.append({"i": keys[a], "j": keys[b], "discrepancy": diff, "tolerance": tol, "pass": diff <= tol})
    return ConsistencyReport(est, pairs)


class RhoFunctional:
    """Homogeneous functional ``rho`` of weighted coordinates.

    Parameters
    ----------
    kind : {"max", "sum", "min"}
    weights : dict
        Node id to weight ``>= 0``; unlisted nodes get weight 0 for
        ``max``/``sum``. For ``min`` the listed nodes form the subset ``J``
        and all their weights must be positive.
    """

    KINDS = ("max", "sum", "min")

    def __init__(self, kind, weights):
        if kind not in self.KINDS:
            raise ConfigError(f"rho kind must be one of {self.KINDS}, got {kind!r}")
        self.kind = kind
        self.weights = {str(k): float(v) for k, v in weights.items()}
        if not self.weights:
            raise ConfigError("rho needs at least one weight")
        if any(not (w >= 0 and math.isfinite(w)) for w in self.weights.values()):
            raise ConfigError("rho weights must be finite and >= 0")
        if kind == "min" and any(w <= 0 for w in self.weights.values()):
            raise ConfigError("weights of a min-functional must be > 0")

    def __repr__(self):
        return f"RhoFunctional({self.kind!r}, {self.weights})"

    @classmethod
    def coordinate(cls, node):
        return cls("max", {str(node): 1.0})

    def validate(self, src):
        """Check that ``S_rho`` stays away from ``{x_I = 0}``."""
        I = set(src.c)
        if self.kind == "min":
            outside = sorted(set(self.weights) - I)
            if outside:
                raise PreconditionError(
                    f"min-functional uses nodes {outside} without tail constants",
                    condition="S_rho inside {max(x_I) > eps}",
                )
        elif not any(w > 0 and k in I for k, w in self.weights.items()):
            raise PreconditionError(
                "rho puts no positive weight on a node with a tail constant",
                condition="S_rho inside {max(x_I) > eps}",
            )
        for k in self.weights:
            src.col(k)

    def needs_positive(self, node):
        """Whether ``rho(x) > 0`` forces ``x_node > 0``, i.e. ``S_rho`` lies in ``{x_node > 0}``.

        Then the source at ``node`` sees all of ``nu`` on ``S_rho`` and the
        zero-mass test is not needed.
        """
        if self.kind == "min":
            return node in self.weights
        return all(k == node for k, w in self.weights.items() if w > 0)

    def __call__(self, rows, src):
        cols = [src.col(k) for k in self.weights]
        v = rows[:, cols] * np.array(list(self.weights.values()))
        if self.kind == "max":
            return v.max(axis=1)
        if self.kind == "sum":
            return v.sum(axis=1)
        return v.min(axis=1)


def nu_rho_mass(src, rho):
    """``nu(S_rho) = c_i E[rho(Theta_i)^alpha]``.

    Raises
    ------
    PreconditionError
        If ``rho`` is invalid for the source, the zero-mass test fails
        (only run when ``S_rho`` reaches ``{x_i = 0}``) or ``nu(S_rho) = 0``.
    """
    rho.validate(src)
    if not rho.needs_positive(src.i):
        check_zero_mass(src)
    est = src.mean(rho(src.rows, src) ** src.alpha)
    if est.value == 0:
        raise PreconditionError("nu(S_rho) = 0: conditioning on rho(X) > t is degenerate", condition="nu(S_rho) > 0")
    return Estimate(src.c_i * est.value, src.c_i * est.se)


def _box(spec, src):
    out = []
    for node, bounds in spec.items():
        try:
            lo, hi = bounds
        except (TypeError, ValueError):
            raise ConfigError(f"box bounds for node {node!r} must be [lo, hi], got {bounds!r}") from None
        lo = -math.inf if lo is None else float(lo)
        hi = math.inf if hi is None else float(hi)
        if not lo < hi:
            raise ConfigError(f"empty box side for node {node!r}: ({lo}, {hi}]")
        out.append((src.col(node), lo, hi))
    return out


def parse_event(spec, src):
    """Normalize an event descriptor to ``("boxes", list)`` or a complement.

    Accepted forms: ``{"type": "orthant"|"union", "J": [...], "y": [...]}``,
    ``{"type": "boxes", "boxes": [{node: [lo, hi], ...}, ...]}`` for unions of
    boxes ``lo < x_j <= hi`` (``null`` for an open end), ``{"type": "S_rho"}``
    and ``{"type": "complement", "of": event}``.
    """
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError(f"event descriptor needs a 'type', got {spec!r}")
    kind = spec["type"]
    if kind in ("orthant", "union"):
        J, _, y = _coords(src, spec.get("J", []), spec.get("y", []))
        if kind == "orthant":
            return ("boxes", [_box({j: (yj, None) for j, yj in zip(J, y)}, src)])
        return ("boxes", [_box({j: (yj, None)}, src) for j, yj in zip(J, y)])
    if kind == "boxes":
        boxes = spec.get("boxes")
        if not boxes:
            raise ConfigError("'boxes' event needs a non-empty list of boxes")
        return ("boxes", [_box(b, src) for b in boxes])
    if kind == "S_rho":
        return ("all", None)
    if kind == "complement":
        return ("complement", parse_event(spec.get("of"), src))
    raise ConfigError(f"unsupported event shape {kind!r}")


def _interval_mass(lo, hi, alpha):
    # measure of (lo, hi] under alpha z^(-alpha-1) dz, lo > 0
    return lo ** -alpha - np.where(np.isinf(hi), 0.0, hi ** -alpha)


def _inner_integral(rows, event, start, alpha):
    """Per-row ``int 1{z Theta in A, z > start} alpha z^(-alpha-1) dz``."""
    kind, body = event
    if kind == "all":
        return np.where(np.isfinite(start), start ** -alpha, 0.0)
    if kind == "complement":
        return _inner_integral(rows, ("all", None), start, alpha) - _inner_integral(rows, body, start, alpha)
    n = rows.shape[0]
    los, his = [], []
    for box in body:
        lo = start.copy()
        hi = np.full(n, math.inf)
        for col, a, b in box:
            t = rows[:, col]
            pos = t > 0
            with np.errstate(divide="ignore", invalid="ignore"):
                lo = np.where(pos, np.maximum(lo, a / t), np.where(a < 0 <= b, lo, math.inf))
                hi = np.where(pos, np.minimum(hi, b / t), hi)
        los.append(lo)
        his.append(hi)
    lo = np.stack(los, axis=1)
    hi = np.stack(his, axis=1)
    order = np.argsort(lo, axis=1)
    lo = np.take_along_axis(lo, order, axis=1)
    hi = np.take_along_axis(hi, order, axis=1)
    total = np.zeros(n)
    reach = np.zeros(n)
    for k in range(lo.shape[1]):
        a = np.maximum(lo[:, k], reach)
        live = hi[:, k] > a
        with np.errstate(divide="ignore", invalid="ignore"):
            total += np.where(live, _interval_mass(np.where(live, a, 1.0), hi[:, k], alpha), 0.0)
        reach = np.maximum(reach, hi[:, k])
    return total


def mpd_probability(src, rho, event):
    """``P(Y in A)`` for ``Y`` the multivariate Pareto limit of ``X/t | rho(X) > t``.

    Parameters
    ----------
    src : ThetaSource
    rho : RhoFunctional
    event : dict
        Descriptor accepted by :func:`parse_event`.

    Returns
    -------
    Estimate
        Ratio ``nu(A and S_rho) / nu(S_rho)`` with a delta-method SE.
    """
    ev = parse_event(event, src)
    rho.validate(src)
    if not rho.needs_positive(src.i):
        check_zero_mass(src)
    r = rho(src.rows, src)
    with np.errstate(divide="ignore"):
        start = np.where(r > 0, 1.0 / r, math.inf)
    den = np.where(r > 0, r ** src.alpha, 0.0)
    if src.mean(den).value == 0:
        raise PreconditionError("nu(S_rho) = 0: conditioning on rho(X) > t is degenerate", condition="nu(S_rho) > 0")
    num = _inner_integral(src.rows, ev, start, src.alpha)
    return src.ratio(num, den)


def evaluate_query(src, query):
    """Dispatch a JSON query ``{"kind": ..., ...}`` to the functional it names."""
    if not isinstance(query, dict) or "kind" not in query:
        raise ConfigError("query needs a 'kind'")
    kind = query["kind"]
    if kind == "orthant":
        return nu_orthant(src, query.get("J", []), query.get("y", []))
    if kind == "union":
        return nu_union(src, query.get("J", []), query.get("y", []))
    if kind in ("rho_mass", "mpd"):
        rho = parse_rho(query.get("rho"))
        if kind == "rho_mass":
            return nu_rho_mass(src, rho)
        return mpd_probability(src, rho, query.get("A"))
    raise ConfigError(f"unknown query kind {kind!r}")


def parse_rho(spec):
    """``{"kind": "max"|"sum"|"min", "weights": {node: w}}`` to a :class:`RhoFunctional`."""
    if not isinstance(spec, dict):
        raise ConfigError(f"rho must be a mapping, got {spec!r}")
    weights = spec.get("weights")
    if isinstance(weights, list):
        J = spec.get("J")
        if J is None or len(J) != len(weights):
            raise ConfigError("list-valued rho weights need a matching 'J'")
        weights = dict(zip(J, weights))
    return RhoFunctional(spec.get("kind"), weights or {})
