"""Laws of the multiplicative edge increments M_e.

An increment is a nonnegative random variable, possibly with an atom at
zero. Five concrete laws are provided:

* :class:`Discrete` -- finitely many atoms (an atom at zero is allowed);
* :class:`LogNormal` -- lognormal positive part plus an optional atom at 0;
* :class:`HuslerReiss` -- ``exp{2 lam (Z - lam)}``, a :class:`LogNormal`;
* :class:`PickandsDerived` -- the limit kernel of a bivariate max-stable
  pair, ``P(M <= z) = A(w) - w A'(w)`` with ``w = 1/(1+z)``;
* :class:`Empirical` -- the empirical law of a sample.

:func:`reverse_increment` maps the law of ``M_{a,b}`` to that of
``M_{b,a}``; it stays in closed form for discrete, empirical and lognormal
inputs and falls back to quadrature (:class:`Reversed`) otherwise.

Pickands dependence functions live here as well because they are the
second parametrisation of the same object.
"""

import math
import warnings

import numpy as np
from scipy import integrate, special
from scipy.optimize import isotonic_regression

from . import _random
from .errors import ConfigError, MomentInconsistencyError, NumericalError, PreconditionError

#: tolerance on weight sums and moment validations
TOL = 1e-9
QUAD_EPSABS = 1e-10

_LOG_Z_MIN, _LOG_Z_MAX = -60.0, 60.0


# --------------------------------------------------------------------------
# quadrature helpers
# --------------------------------------------------------------------------

def _quad(f, a, b, what):
    # quadpack warnings are fatal only when the error estimate is also large
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", integrate.IntegrationWarning)
        val, err = integrate.quad(f, a, b, epsabs=QUAD_EPSABS, epsrel=1e-10, limit=400)
    if not np.isfinite(val):
        raise NumericalError(f"quadrature for {what} returned {val}")
    if caught and err > 1e-7 * max(1.0, abs(val)):
        raise NumericalError(f"quadrature for {what} did not converge: {caught[0].message}")
    return val


def _weighted(beta, t, mass):
    # beta * exp(beta t) * mass without overflow
    if mass <= 0:
        return 0.0
    expo = beta * t + math.log(mass)
    return math.inf if expo > 700 else abs(beta) * math.exp(expo)


_LOG_BREAKS = (-300.0, -60.0, -20.0, -5.0, 0.0, 5.0, 20.0, 60.0, 300.0)


def _moment_by_quadrature(cdf, beta):
    """E[M^beta 1{M > 0}] from the distribution function alone.

    Integrates on the log axis ``z = e^t``. For ``beta > 0`` this is
    ``int beta z^(beta-1) P(M > z) dz``; for ``beta < 0`` it is
    ``int -beta z^(beta-1) P(0 < M <= z) dz``. The window ``|t| <= 300``
    is used after checking that the integrand has decayed at its edge.
    """
    p0 = float(cdf(0.0))
    if beta == 0:
        return 1.0 - p0
    if beta > 0:
        def f(t):
            return _weighted(beta, t, 1.0 - float(cdf(math.exp(t))))
        probe = (40.0, 120.0, 300.0)
    else:
        def f(t):
            return _weighted(beta, t, float(cdf(math.exp(t))) - p0)
        probe = (-40.0, -120.0, -300.0)
    vals = [f(t) for t in probe]
    if vals[-1] > 1e-12 or vals[1] > vals[0] > 1e-12:
        raise NumericalError(f"moment of order {beta} diverges (integrand does not decay)")
    what = f"moment of order {beta}"
    return sum(_quad(f, a, b, what) for a, b in zip(_LOG_BREAKS[:-1], _LOG_BREAKS[1:]))


def _moment_by_density(pdf, beta):
    """E[M^beta 1{M > 0}] as ``int e^((beta+1) t) pdf(e^t) dt``.

    Preferred over the survival form when a density exists: ``1 - F`` loses
    all relative accuracy in the far tail, and the weight ``e^(beta t)``
    amplifies that rounding noise.
    """
    def f(t):
        d = float(pdf(math.exp(t)))
        return _weighted(1.0, (beta + 1.0) * t, d) if d > 0 else 0.0

    probe = (40.0, 120.0, 300.0) if beta > -1 else (-40.0, -120.0, -300.0)
    vals = [f(t) for t in probe]
    if vals[-1] > 1e-12 or vals[1] > vals[0] > 1e-12:
        raise NumericalError(f"moment of order {beta} diverges (integrand does not decay)")
    what = f"moment of order {beta}"
    return sum(_quad(f, a, b, what) for a, b in zip(_LOG_BREAKS[:-1], _LOG_BREAKS[1:]))


def _partial_moment_by_quadrature(cdf, cdf_left, beta, s, strict):
    """E[M^beta 1{0 < M <= s}] (``<`` if strict) by quadrature on ``(0, s]``."""
    if s <= 0:
        return 0.0
    p0 = float(cdf(0.0))
    top = float(cdf_left(s)) if strict else float(cdf(s))
    log_s = math.log(s)
    if beta == 0:
        return top - p0
    breaks = [b for b in _LOG_BREAKS if b < log_s] + [log_s]
    what = f"partial moment of order {beta}"
    if beta > 0:
        def f(t):
            return _weighted(beta, t, top - float(cdf(math.exp(t))))
        return sum(_quad(f, a, b, what) for a, b in zip(breaks[:-1], breaks[1:]))

    def g(t):
        return _weighted(beta, t, float(cdf(math.exp(t))) - p0)
    return s ** beta * (top - p0) + sum(_quad(g, a, b, what) for a, b in zip(breaks[:-1], breaks[1:]))


# --------------------------------------------------------------------------
# Pickands dependence functions
# --------------------------------------------------------------------------

class PickandsFunction:
    """Pickands dependence function ``A`` on ``[0, 1]``.

    Parameters
    ----------
    func : callable
        Vectorised ``w -> A(w)``.
    deriv : callable
        Vectorised left derivative ``w -> A'(w)``; at ``w = 0`` it must
        return the right-hand limit.
    deriv2 : callable, optional
        Second derivative on ``(0, 1)``, needed only for densities.
    name : str, optional
    """

    # complete dependence: the conditional law of Y given X = x is a point mass at x
    comonotone = False

    def __init__(self, func, deriv, deriv2=None, name="custom"):
        self._func = func
        self._deriv = deriv
        self._deriv2 = deriv2
        self.name = name

    def __repr__(self):
        return f"{type(self).__name__}({self.name})"

    def __call__(self, w):
        return self._func(np.asarray(w, dtype=float))

    def deriv(self, w):
        return self._deriv(np.asarray(w, dtype=float))

    def deriv2(self, w):
        if self._deriv2 is None:
            raise NotImplementedError(f"{self!r} has no second derivative")
        return self._deriv2(np.asarray(w, dtype=float))

    @property
    def has_deriv2(self):
        return self._deriv2 is not None

    def kernel_cdf(self, w):
        """``A(w) - w A'(w)``: the limit conditional CDF at ``z = (1-w)/w``."""
        w = np.asarray(w, dtype=float)
        return self(w) - w * self.deriv(w)

    def conditional_terms(self, s):
        """Terms of the max-stable conditional CDF on the log-ratio scale.

        For ``s = log(y/x)`` and ``w = x/(x+y)`` returns the pair
        ``(A(w)/(1-w), A(w) - w A'(w))``.
        """
        s = np.asarray(s, dtype=float)
        w = special.expit(-s)
        a = self(w)
        return a / special.expit(s), a - w * self.deriv(w)

    def reflect(self):
        """The dependence function ``w -> A(1-w)`` of the swapped pair."""
        if self.comonotone:
            return self
        return PickandsFunction(
            lambda w: self(1.0 - w),
            lambda w: -_right_derivative(self, 1.0 - w),
            None if self._deriv2 is None else (lambda w: self.deriv2(1.0 - w)),
            name=f"reflect({self.name})",
        )


def _right_derivative(A, w):
    # right derivative of a convex function from left derivatives at nearby points
    h = 1e-9
    w = np.asarray(w, dtype=float)
    return A.deriv(np.minimum(w + h, 1.0))


def _hr_A(lam):
    def func(w):
        w = np.asarray(w, dtype=float)
        out = np.ones_like(w)
        inner = (w > 0) & (w < 1)
        wi = w[inner]
        logit = np.log(wi) - np.log1p(-wi)
        out[inner] = (1 - wi) * special.ndtr(lam - logit / (2 * lam)) + wi * special.ndtr(
            lam + logit / (2 * lam)
        )
        return out if out.ndim else float(out)
    return func


class HuslerReissPickands(PickandsFunction):
    """Closed-form Husler-Reiss dependence function with parameter ``lam``."""

    def __init__(self, lam):
        lam = float(lam)
        if not lam > 0:
            raise ConfigError(f"Husler-Reiss parameter must be > 0, got {lam}")
        self.lam = lam

        def deriv(w):
            w = np.asarray(w, dtype=float)
            with np.errstate(divide="ignore"):
                logit = np.log(w) - np.log1p(-w)
            return special.ndtr(lam + logit / (2 * lam)) - special.ndtr(lam - logit / (2 * lam))

        def deriv2(w):
            w = np.asarray(w, dtype=float)
            logit = np.log(w) - np.log1p(-w)
            phi = np.exp(-0.5 * (lam + logit / (2 * lam)) ** 2) + np.exp(
                -0.5 * (lam - logit / (2 * lam)) ** 2
            )
            return phi / math.sqrt(2 * math.pi) / (2 * lam * w * (1 - w))

        super().__init__(_hr_A(lam), deriv, deriv2, name=f"husler_reiss(lam={lam})")

    def conditional_terms(self, s):
        s = np.asarray(s, dtype=float)
        lam = self.lam
        up = special.ndtr(lam + s / (2 * lam))
        down = special.ndtr(lam - s / (2 * lam))
        return up + np.exp(-s) * down, up


def comonotone_pickands():
    """``A(w) = max(w, 1 - w)``: complete dependence, ``M = 1``."""
    A = PickandsFunction(
        lambda w: np.maximum(w, 1 - w),
        lambda w: np.where(np.asarray(w) > 0.5, 1.0, -1.0),
        name="comonotone",
    )
    A.comonotone = True
    return A


def independence_pickands():
    """``A(w) = 1``: independence, ``M = 0``."""
    return PickandsFunction(
        lambda w: np.ones_like(np.asarray(w, dtype=float)),
        lambda w: np.zeros_like(np.asarray(w, dtype=float)),
        lambda w: np.zeros_like(np.asarray(w, dtype=float)),
        name="independence",
    )


class GridPickands(PickandsFunction):
    """Dependence function given by values on a grid, linearly interpolated.

    Slopes are the one-sided secants between grid points, so near ``w = 0``
    and ``w = 1`` the derivative is the boundary secant. Slope decreases up
    to ``tol`` are treated as noise and removed by a weighted isotonic
    projection (which keeps ``A(0) = A(1) = 1``); larger ones are rejected.

    The implied increment law is discrete, see :meth:`to_discrete`.
    """

    def __init__(self, w, A, tol=1e-6):
        w = np.asarray(w, dtype=float)
        A = np.asarray(A, dtype=float)
        if w.shape != A.shape or w.ndim != 1:
            raise ConfigError("Pickands grid needs 1-d 'w' and 'A' of equal length")
        if np.any(np.diff(w) <= 0) or w[0] < 0 or w[-1] > 1:
            raise ConfigError("Pickands grid 'w' must be strictly increasing within [0, 1]")
        for end in (0.0, 1.0):
            hit = np.isclose(w, end, rtol=0, atol=0)
            if hit.any() and abs(A[hit][0] - 1.0) > TOL:
                raise PreconditionError(
                    f"A({end:g}) = {A[hit][0]!r}, must equal 1", condition="Pickands invariants"
                )
        if w[0] > 0:
            w, A = np.r_[0.0, w], np.r_[1.0, A]
        if w[-1] < 1:
            w, A = np.r_[w, 1.0], np.r_[A, 1.0]
        A[0] = A[-1] = 1.0
        dw = np.diff(w)
        slopes = np.diff(A) / dw
        drop = -np.diff(slopes)
        if drop.size and drop.max() > tol:
            k = int(np.argmax(drop))
            raise PreconditionError(
                f"Pickands grid is not convex near w = {w[k + 1]:g} (slope drops by {drop.max():.3g})",
                condition="Pickands invariants",
            )
        slopes = np.clip(isotonic_regression(slopes, weights=dw).x, -1.0, 1.0)
        A = np.r_[1.0, 1.0 + np.cumsum(slopes * dw)]
        A[-1] = 1.0
        lower = np.maximum(w, 1 - w)
        if np.any(A < lower - tol) or np.any(A > 1 + tol):
            raise PreconditionError(
                "Pickands grid violates max(w, 1-w) <= A(w) <= 1", condition="Pickands invariants"
            )
        self.grid = w
        self.values = A
        self.slopes = slopes

        def deriv(x):
            x = np.asarray(x, dtype=float)
            idx = np.clip(np.searchsorted(w, x, side="left"), 1, len(w) - 1)
            return slopes[idx - 1]

        super().__init__(lambda x: np.interp(x, w, A), deriv, name=f"grid({len(w)} points)")

    def to_discrete(self):
        """Exact increment law implied by the piecewise-linear ``A``.

        A kink at interior grid point ``w_k`` produces an atom at
        ``(1 - w_k)/w_k`` of mass ``w_k`` times the slope jump; the final
        slope ``s`` leaves an atom of mass ``1 - s`` at zero.
        """
        g, s = self.grid, self.slopes
        inner = g[1:-1]
        values = (1 - inner) / inner
        weights = inner * np.diff(s)
        values = np.r_[values, 0.0]
        weights = np.r_[weights, 1.0 - s[-1]]
        keep = weights > 0
        return Discrete(values[keep], weights[keep] / weights[keep].sum())


def check_pickands(A, n_grid=1001, tol=1e-9):
    """Check the Pickands invariants of ``A`` on an evaluation grid.

    Raises
    ------
    PreconditionError
        On violated bounds, endpoint values, derivative range or convexity.
    """
    w = np.linspace(0.0, 1.0, n_grid)
    a = np.asarray(A(w), dtype=float)
    cond = "Pickands invariants"
    if abs(a[0] - 1) > tol or abs(a[-1] - 1) > tol:
        raise PreconditionError(f"A(0) = {float(a[0])!r}, A(1) = {float(a[-1])!r}; both must be 1", condition=cond)
    if np.any(a < np.maximum(w, 1 - w) - tol) or np.any(a > 1 + tol):
        raise PreconditionError("A violates max(w, 1-w) <= A(w) <= 1", condition=cond)
    second = a[2:] - 2 * a[1:-1] + a[:-2]
    if np.any(second < -tol):
        k = int(np.argmin(second))
        raise PreconditionError(f"A is not convex near w = {w[k + 1]:g}", condition=cond)
    d = np.asarray(A.deriv(w), dtype=float)
    if np.any(d < -1 - tol) or np.any(d > 1 + tol) or np.any(np.diff(d) < -tol):
        raise PreconditionError("A' must be nondecreasing with values in [-1, 1]", condition=cond)
    return True


# --------------------------------------------------------------------------
# increment laws
# --------------------------------------------------------------------------

class Increment:
    """Common interface of increment laws on ``[0, inf)``.

    Subclasses implement :meth:`cdf`, :meth:`moment`,
    :meth:`partial_moment` and :meth:`_draw`.
    """

    #: True when the law has no atoms on ``(0, inf)``
    continuous_positive_part = True

    @property
    def zero_mass(self):
        return float(self.cdf(0.0))

    def cdf(self, z):
        raise NotImplementedError

    def cdf_left(self, z):
        """``P(M < z)``."""
        z = np.asarray(z, dtype=float)
        out = np.where(z > 0, self.cdf(np.maximum(z, 0.0)), 0.0)
        return out if out.ndim else float(out)

    def sf(self, z):
        return 1.0 - self.cdf(z)

    def moment(self, beta):
        """``E[M^beta 1{M > 0}]``; for ``beta > 0`` simply ``E[M^beta]``."""
        raise NotImplementedError

    def partial_moment(self, beta, s, strict=False):
        """``E[M^beta 1{0 < M <= s}]``, or with ``M < s`` if ``strict``."""
        raise NotImplementedError

    @property
    def mean(self):
        return self.moment(1.0)

    def _draw(self, rng, size):
        raise NotImplementedError

    def sample(self, n, seed=0, workers=1):
        return _random.chunked(self._draw, n, seed, workers)


class Discrete(Increment):
    """Finitely many atoms. Duplicate values are merged; zero weights dropped."""

    continuous_positive_part = False

    def __init__(self, values, weights):
        values = np.asarray(values, dtype=float).ravel()
        weights = np.asarray(weights, dtype=float).ravel()
        if values.shape != weights.shape or values.size == 0:
            raise ConfigError("discrete increment needs equally many values and weights (>= 1)")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ConfigError("discrete increment values must be finite and >= 0")
        if np.any(weights < 0):
            raise ConfigError("discrete increment weights must be >= 0")
        if abs(weights.sum() - 1.0) > TOL:
            raise ConfigError(f"discrete increment weights sum to {weights.sum()!r}, not 1")
        uniq, inv = np.unique(values, return_inverse=True)
        merged = np.bincount(inv, weights=weights, minlength=uniq.size)
        keep = merged > 0
        self.values = uniq[keep]
        self.weights = merged[keep]
        self._cum = np.cumsum(self.weights)

    @classmethod
    def degenerate(cls, value):
        return cls([value], [1.0])

    @property
    def atoms(self):
        return list(zip(self.values.tolist(), self.weights.tolist()))

    def __repr__(self):
        body = ", ".join(f"{v:g}: {p:g}" for v, p in self.atoms)
        return f"Discrete({{{body}}})"

    def cdf(self, z):
        z = np.asarray(z, dtype=float)
        idx = np.searchsorted(self.values, z, side="right")
        out = np.where(idx > 0, self._cum[np.maximum(idx - 1, 0)], 0.0)
        return out if out.ndim else float(out)

    def cdf_left(self, z):
        z = np.asarray(z, dtype=float)
        idx = np.searchsorted(self.values, z, side="left")
        out = np.where(idx > 0, self._cum[np.maximum(idx - 1, 0)], 0.0)
        return out if out.ndim else float(out)

    def moment(self, beta):
        pos = self.values > 0
        return float(np.sum(self.weights[pos] * self.values[pos] ** beta))

    def partial_moment(self, beta, s, strict=False):
        s = np.asarray(s, dtype=float)
        pos = self.values > 0
        v, p = self.values[pos], self.weights[pos]
        inside = v[None, :] < s.reshape(-1, 1) if strict else v[None, :] <= s.reshape(-1, 1)
        out = (inside * (p * v ** beta)).sum(axis=1).reshape(s.shape)
        return out if out.ndim else float(out)

    def _draw(self, rng, size):
        u = rng.random(size) * self._cum[-1]
        idx = np.minimum(np.searchsorted(self._cum, u, side="right"), self.values.size - 1)
        return self.values[idx]


class LogNormal(Increment):
    """``log M ~ N(mu, sigma^2)`` on the positive part, plus an atom at zero."""

    def __init__(self, mu, sigma, zero_mass=0.0):
        mu, sigma, zero_mass = float(mu), float(sigma), float(zero_mass)
        if not sigma > 0:
            raise ConfigError(f"lognormal sigma must be > 0, got {sigma}")
        if not 0 <= zero_mass < 1:
            raise ConfigError(f"lognormal zero mass must lie in [0, 1), got {zero_mass}")
        self.mu, self.sigma, self.p0 = mu, sigma, zero_mass

    def __repr__(self):
        extra = f", zero_mass={self.p0:g}" if self.p0 else ""
        return f"LogNormal(mu={self.mu:g}, sigma={self.sigma:g}{extra})"

    @property
    def zero_mass(self):
        return self.p0

    def cdf(self, z):
        z = np.asarray(z, dtype=float)
        with np.errstate(divide="ignore"):
            logz = np.log(np.maximum(z, 0.0))
        pos = special.ndtr((logz - self.mu) / self.sigma)
        out = np.where(z < 0, 0.0, self.p0 + (1 - self.p0) * pos)
        return out if out.ndim else float(out)

    def pdf(self, z):
        """Density of the positive part, scaled by ``1 - zero_mass``."""
        z = np.asarray(z, dtype=float)
        with np.errstate(divide="ignore", invalid="ignore"):
            logz = np.log(z)
            dens = np.exp(-0.5 * ((logz - self.mu) / self.sigma) ** 2) / (
                z * self.sigma * math.sqrt(2 * math.pi)
            )
        out = np.where(z > 0, (1 - self.p0) * dens, 0.0)
        return out if out.ndim else float(out)

    def moment(self, beta):
        return (1 - self.p0) * math.exp(beta * self.mu + beta * beta * self.sigma ** 2 / 2)

    def partial_moment(self, beta, s, strict=False):
        s = np.asarray(s, dtype=float)
        with np.errstate(divide="ignore"):
            logs = np.log(np.maximum(s, 0.0))
        frac = special.ndtr((logs - self.mu - beta * self.sigma ** 2) / self.sigma)
        out = self.moment(beta) * np.where(s > 0, frac, 0.0)
        return out if out.ndim else float(out)

    def _draw(self, rng, size):
        out = np.exp(self.mu + self.sigma * rng.standard_normal(size))
        if self.p0 > 0:
            out[rng.random(size) < self.p0] = 0.0
        return out


class HuslerReiss(LogNormal):
    """Husler-Reiss increment ``exp{2 lam (Z - lam)}``, i.e. ``LogNormal(-2 lam^2, 2 lam)``."""

    def __init__(self, lam):
        lam = float(lam)
        if not lam > 0:
            raise ConfigError(f"Husler-Reiss parameter must be > 0, got {lam}")
        self.lam = lam
        super().__init__(-2 * lam * lam, 2 * lam)

    def __repr__(self):
        return f"HuslerReiss(lam={self.lam:g})"

    def pickands(self):
        return HuslerReissPickands(self.lam)


class _QuadratureIncrement(Increment):
    """Moments and sampling for laws known only through a scalar CDF."""

    def moment(self, beta):
        return _moment_by_quadrature(self._scalar_cdf, float(beta))

    def partial_moment(self, beta, s, strict=False):
        f = np.vectorize(
            lambda x: _partial_moment_by_quadrature(
                self._scalar_cdf, self._scalar_cdf_left, float(beta), float(x), strict
            ),
            otypes=[float],
        )
        out = f(np.asarray(s, dtype=float))
        return out if out.ndim else float(out)

    def _scalar_cdf(self, z):
        return float(self.cdf(z))

    def _scalar_cdf_left(self, z):
        return float(self.cdf_left(z))


class PickandsDerived(_QuadratureIncrement):
    """Increment law with ``P(M <= z) = A(w) - w A'(w)``, ``w = 1/(1+z)``.

    Sampled by numeric inversion of the CDF (bisection on ``log z``).
    """

    def __init__(self, A):
        self.A = A

    def __repr__(self):
        return f"PickandsDerived({self.A.name})"

    def moment(self, beta):
        if self.A.has_deriv2 and beta > 0:
            return _moment_by_density(self.pdf, float(beta))
        return super().moment(beta)

    @property
    def zero_mass(self):
        return float(1.0 - self.A.deriv(1.0))

    def cdf(self, z):
        z = np.asarray(z, dtype=float)
        w = 1.0 / (1.0 + np.maximum(z, 0.0))
        out = np.where(z < 0, 0.0, np.clip(self.A.kernel_cdf(w), 0.0, 1.0))
        out = np.where(np.isinf(z), 1.0, out)
        return out if out.ndim else float(out)

    def pdf(self, z):
        """``w^3 A''(w)`` on ``(0, inf)``; needs a twice differentiable ``A``."""
        z = np.asarray(z, dtype=float)
        w = 1.0 / (1.0 + z)
        return w ** 3 * self.A.deriv2(w)

    def _draw(self, rng, size):
        u = rng.random(size)
        return invert_cdf(self.cdf, u, self.zero_mass)


class Empirical(Increment):
    """Empirical law of a sample of nonnegative reals."""

    continuous_positive_part = False

    def __init__(self, samples):
        x = np.sort(np.asarray(samples, dtype=float).ravel())
        if x.size == 0 or np.any(x < 0) or not np.all(np.isfinite(x)):
            raise ConfigError("empirical increment needs a nonempty sample of finite reals >= 0")
        self.samples = x

    def __repr__(self):
        return f"Empirical(n={self.samples.size})"

    def cdf(self, z):
        out = np.searchsorted(self.samples, np.asarray(z, dtype=float), side="right") / self.samples.size
        return out if np.ndim(out) else float(out)

    def cdf_left(self, z):
        out = np.searchsorted(self.samples, np.asarray(z, dtype=float), side="left") / self.samples.size
        return out if np.ndim(out) else float(out)

    def moment(self, beta):
        pos = self.samples[self.samples > 0]
        return float(np.sum(pos ** beta) / self.samples.size)

    def partial_moment(self, beta, s, strict=False):
        return self.to_discrete().partial_moment(beta, s, strict)

    def to_discrete(self):
        vals, counts = np.unique(self.samples, return_counts=True)
        return Discrete(vals, counts / self.samples.size)

    def _draw(self, rng, size):
        return self.samples[rng.integers(0, self.samples.size, size)]


class Reversed(_QuadratureIncrement):
    """Reversal of a law available only numerically.

    ``P(R > z) = ratio * E[M^alpha 1{z M < 1}]`` with ``ratio = c_a/c_b``;
    the remaining mass sits at zero. Sampling draws ``1/M`` from the
    ``M^alpha``-tilted base law discretised on a fine log grid.
    """

    def __init__(self, base, ratio, alpha):
        self.base, self.ratio, self.alpha = base, float(ratio), float(alpha)
        self._pos = self.ratio * base.moment(self.alpha)
        self._table = None

    def __repr__(self):
        return f"Reversed({self.base!r}, ratio={self.ratio:g}, alpha={self.alpha:g})"

    @property
    def zero_mass(self):
        zero = 1.0 - self._pos
        return 0.0 if zero <= TOL else zero

    def _cdf_scalar(self, z, strict):
        if z < 0:
            return 0.0
        if z == 0:
            return 0.0 if strict else self.zero_mass
        if np.isinf(z):
            return 1.0
        # P(R >= z) uses M <= 1/z, P(R > z) uses M < 1/z
        tail = self.ratio * self.base.partial_moment(self.alpha, 1.0 / z, strict=not strict)
        return min(1.0, max(0.0, 1.0 - tail))

    def cdf(self, z):
        out = np.vectorize(lambda x: self._cdf_scalar(x, False), otypes=[float])(np.asarray(z, dtype=float))
        return out if out.ndim else float(out)

    def cdf_left(self, z):
        out = np.vectorize(lambda x: self._cdf_scalar(x, True), otypes=[float])(np.asarray(z, dtype=float))
        return out if out.ndim else float(out)

    def moment(self, beta):
        return self.ratio * self.base.moment(self.alpha - float(beta))

    def partial_moment(self, beta, s, strict=False):
        s = np.asarray(s, dtype=float)
        total = self.base.moment(self.alpha - beta)
        inv = np.where(s > 0, 1.0 / np.where(s > 0, s, 1.0), np.inf)
        # R <= s  <=>  M >= 1/s
        below = self.base.partial_moment(self.alpha - beta, inv, strict=not strict)
        out = np.where(s > 0, self.ratio * (total - below), 0.0)
        return out if out.ndim else float(out)

    def _draw(self, rng, size):
        # tilt the base law by m^alpha on a fine log grid, then invert
        if self._table is None:
            t = np.linspace(-40.0, 40.0, 16001)
            F = np.asarray(self.base.cdf(np.exp(t)), dtype=float)
            mid = 0.5 * (t[1:] + t[:-1])
            mass = np.maximum(np.diff(F), 0.0) * np.exp(self.alpha * mid)
            self._table = (t, np.cumsum(mass) / mass.sum())
        t, cum = self._table
        u = rng.random(size)
        k = np.minimum(np.searchsorted(cum, rng.random(size), side="right"), cum.size - 1)
        out = np.exp(-(t[k] + rng.random(size) * (t[k + 1] - t[k])))
        out[u < self.zero_mass] = 0.0
        return out


def invert_cdf(cdf, u, zero_mass=0.0, rtol=1e-10, max_iter=200):
    """Generalised inverse ``inf{z : cdf(z) >= u}`` by bisection on ``log z``.

    ``cdf`` must be vectorised. Draws with ``u <= zero_mass`` map to 0.
    """
    u = np.asarray(u, dtype=float)
    out = np.zeros_like(u)
    todo = u > zero_mass
    uu = u[todo]
    lo = np.full(uu.shape, _LOG_Z_MIN)
    hi = np.full(uu.shape, _LOG_Z_MAX)
    if np.any(cdf(np.exp(hi)) < uu):
        raise NumericalError("CDF inversion failed: quantile beyond exp(60)")
    tol = math.log1p(rtol)
    for _ in range(max_iter):
        if np.all(hi - lo <= tol):
            break
        mid = 0.5 * (lo + hi)
        ok = cdf(np.exp(mid)) >= uu
        hi = np.where(ok, mid, hi)
        lo = np.where(ok, lo, mid)
    out[todo] = np.exp(hi)
    return out


# --------------------------------------------------------------------------
# operations
# --------------------------------------------------------------------------

def increment_from_pickands(A):
    """Limit kernel law of the max-stable pair with dependence function ``A``.

    Grid-represented ``A`` gives an exact :class:`Discrete` law; otherwise
    a :class:`PickandsDerived` law after the invariants are checked.
    """
    if isinstance(A, GridPickands):
        return A.to_discrete()
    if isinstance(A, HuslerReissPickands):
        return HuslerReiss(A.lam)
    if A.comonotone:
        return Discrete.degenerate(1.0)
    if A.name == "independence":
        return Discrete.degenerate(0.0)
    check_pickands(A)
    return PickandsDerived(A)


class IncrementPickands(PickandsFunction):
    """``A(w) = 1 - E[min(1 - w, w M)]`` for an increment with ``E[M] <= 1``."""

    def __init__(self, M):
        self.M = M

        def z_of(w):
            with np.errstate(divide="ignore"):
                return np.where(w > 0, (1 - w) / np.where(w > 0, w, 1.0), np.inf)

        def func(w):
            w = np.asarray(w, dtype=float)
            z = z_of(w)
            low = np.where(np.isinf(z), M.mean, M.partial_moment(1.0, np.where(np.isinf(z), 0.0, z)))
            out = 1.0 - (w * low + (1 - w) * M.sf(z))
            return out if out.ndim else float(out)

        def deriv(w):
            w = np.asarray(w, dtype=float)
            z = z_of(w)
            low = np.where(np.isinf(z), M.mean, M.partial_moment(1.0, np.where(np.isinf(z), 0.0, z)))
            out = np.where(np.isinf(z), 0.0, M.sf(z)) - low
            return out if out.ndim else float(out)

        super().__init__(func, deriv, name=f"from({M!r})")


def pickands_from_increment(M):
    """Pickands dependence function whose limit kernel law is that of ``M``."""
    m = M.mean
    if m > 1 + TOL:
        raise PreconditionError(f"E[M] = {m!r} exceeds 1", condition="E[M] <= 1")
    if type(M) is HuslerReiss:
        return HuslerReissPickands(M.lam)
    if isinstance(M, Discrete) and M.values.size == 1 and M.values[0] in (0.0, 1.0):
        return comonotone_pickands() if M.values[0] == 1.0 else independence_pickands()
    return IncrementPickands(M)


def alpha_moment(m, alpha):
    """``E[M^alpha]`` (closed form for discrete and lognormal laws)."""
    if not alpha > 0:
        raise ConfigError(f"alpha must be > 0, got {alpha}")
    return m.moment(float(alpha))


def reverse_increment(m_ab, c_a, c_b, alpha):
    """Law of ``M_{b,a}`` from that of ``M_{a,b}`` and the tail constants.

    ``P(M_{b,a} > z) = (c_a/c_b) E[1{z M_{a,b} < 1} M_{a,b}^alpha]`` and the
    remaining mass ``1 - (c_a/c_b) E[M_{a,b}^alpha]`` sits at zero.

    Raises
    ------
    MomentInconsistencyError
        If ``E[M_{a,b}^alpha] > c_b/c_a`` (beyond tolerance).
    """
    c_a, c_b, alpha = float(c_a), float(c_b), float(alpha)
    if not (c_a > 0 and c_b > 0 and alpha > 0):
        raise ConfigError("tail constants and alpha must be > 0")
    ratio = c_a / c_b
    mom = m_ab.moment(alpha)
    if mom > c_b / c_a + TOL:
        raise MomentInconsistencyError(
            f"E[M^alpha] = {mom!r} exceeds c_b/c_a = {c_b / c_a!r}; reversed increment undefined"
        )
    if isinstance(m_ab, Empirical):
        m_ab = m_ab.to_discrete()
    if isinstance(m_ab, Discrete):
        pos = m_ab.values > 0
        v, p = m_ab.values[pos], m_ab.weights[pos]
        w = ratio * p * v ** alpha
        zero = 1.0 - w.sum()
        if zero <= TOL:
            # rounding residue of E[M^alpha] = c_b/c_a: no zero atom
            zero, w = 0.0, w / w.sum()
        return Discrete(np.r_[1.0 / v, 0.0], np.r_[w, zero])
    if isinstance(m_ab, LogNormal):
        mu = -m_ab.mu - alpha * m_ab.sigma ** 2
        zero = 1.0 - ratio * mom
        zero = 0.0 if zero <= TOL else zero
        if zero == 0.0 and mu == -(m_ab.sigma ** 2) / 2:
            return HuslerReiss(m_ab.sigma / 2)
        return LogNormal(mu, m_ab.sigma, zero)
    return Reversed(m_ab, ratio, alpha)


def sample_increment(m, n, seed=0, workers=1):
    """``n`` i.i.d. draws of ``m``; reproducible for fixed ``(n, seed)``."""
    return m.sample(n, seed, workers)


# --------------------------------------------------------------------------
# config parsing
# --------------------------------------------------------------------------

def parse_increment(spec):
    """Increment law from a config mapping (see README for the schema)."""
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError(f"increment spec must be a mapping with 'type': {spec!r}")
    kind = spec["type"]
    try:
        if kind == "husler_reiss":
            return HuslerReiss(spec["lambda"])
        if kind == "lognormal":
            return LogNormal(spec["mu"], spec["sigma"], spec.get("zero_mass", 0.0))
        if kind == "discrete":
            atoms = spec["atoms"]
            return Discrete([a["value"] for a in atoms], [a["weight"] for a in atoms])
        if kind == "degenerate":
            return Discrete.degenerate(spec["value"])
        if kind == "pickands_grid":
            return increment_from_pickands(GridPickands(spec["w"], spec["A"]))
        if kind == "empirical":
            return Empirical(spec["samples"])
    except KeyError as exc:
        raise ConfigError(f"increment spec of type {kind!r} lacks {exc.args[0]!r}") from exc
    raise ConfigError(f"unknown increment type {kind!r}")


def parse_pickands(spec):
    """Pickands dependence function from a config mapping.

    Accepts ``husler_reiss``, ``pickands_grid``, ``comonotone`` and
    ``independence`` directly; any other increment spec is converted with
    :func:`pickands_from_increment`.
    """
    if not isinstance(spec, dict) or "type" not in spec:
        raise ConfigError(f"pickands spec must be a mapping with 'type': {spec!r}")
    kind = spec["type"]
    if kind == "husler_reiss":
        try:
            return HuslerReissPickands(spec["lambda"])
        except KeyError as exc:
            raise ConfigError("husler_reiss spec lacks 'lambda'") from exc
    if kind == "pickands_grid":
        return GridPickands(spec["w"], spec["A"])
    if kind == "comonotone":
        return comonotone_pickands()
    if kind == "independence":
        return independence_pickands()
    return pickands_from_increment(parse_increment(spec))
