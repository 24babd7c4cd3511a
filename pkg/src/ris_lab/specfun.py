"""
Special functions used by the secrecy-throughput formulas.

Gaussian Q and its inverse, the (regularised) lower incomplete gamma
function, the order-1/2 Laguerre function, the parabolic cylinder function
for negative orders, and Gauss-Chebyshev grids for truncated semi-infinite
integrals.

Everything accepts scalars or numpy arrays unless noted otherwise.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate
from scipy.special import erfc, i0e, i1e

# smallest positive normal double; Lentz's method needs a non-zero floor
_TINY = 1e-300
_EPS = 1e-16

# integrand envelope drop used to pick the truncation bound
ENVELOPE_DROP = 1e12
DEFAULT_M2 = 100


# ----------------------------------------------------------------------------
#  Gaussian Q function
# ----------------------------------------------------------------------------

def q_func(x):
    """Gaussian tail probability Q(x) = P{N(0,1) > x}."""
    return 0.5 * erfc(np.asarray(x, dtype=float) / math.sqrt(2.0))


# Acklam's rational approximation of the normal quantile (|rel err| < 1.2e-9)
_A = (-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
      1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00)
_B = (-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
      6.680131188771972e+01, -1.328068155288572e+01)
_C = (-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
      -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00)
_D = (7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
      3.754408661907416e+00)
_P_LOW = 0.02425


def _normal_quantile_seed(p):
    """Rational approximation of Phi^{-1}(p), p in (0, 1)."""
    p = np.asarray(p, dtype=float)
    x = np.empty_like(p)

    lo = p < _P_LOW
    hi = p > 1.0 - _P_LOW
    mid = ~(lo | hi)

    if np.any(lo):
        q = np.sqrt(-2.0 * np.log(p[lo]))
        x[lo] = (((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
                ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    if np.any(hi):
        q = np.sqrt(-2.0 * np.log1p(-p[hi]))
        x[hi] = -(((((_C[0] * q + _C[1]) * q + _C[2]) * q + _C[3]) * q + _C[4]) * q + _C[5]) / \
                 ((((_D[0] * q + _D[1]) * q + _D[2]) * q + _D[3]) * q + 1.0)
    if np.any(mid):
        q = p[mid] - 0.5
        r = q * q
        x[mid] = (((((_A[0] * r + _A[1]) * r + _A[2]) * r + _A[3]) * r + _A[4]) * r + _A[5]) * q / \
                 (((((_B[0] * r + _B[1]) * r + _B[2]) * r + _B[3]) * r + _B[4]) * r + 1.0)
    return x


def q_inv(p):
    """Inverse Gaussian Q function.

    Seeded by a rational approximation, then polished with Halley steps on
    ``q_func`` so that ``q_func(q_inv(p))`` reproduces ``p`` to ~1e-14
    relative.

    Raises
    ------
    ValueError
        If any ``p`` lies outside the open interval (0, 1).
    """
    p_arr = np.asarray(p, dtype=float)
    if np.any(~((p_arr > 0.0) & (p_arr < 1.0))):
        raise ValueError(f"q_inv: probability must lie in (0, 1), got {p!r}")

    # Q^{-1}(p) = Phi^{-1}(1 - p) = -Phi^{-1}(p)
    x = -_normal_quantile_seed(p_arr)
    for _ in range(2):
        err = q_func(x) - p_arr
        pdf = np.exp(-0.5 * x * x) / math.sqrt(2.0 * math.pi)
        u = err / pdf
        x = x + u / (1.0 - 0.5 * x * u)
    if np.ndim(p) == 0:
        return float(x)
    return x


# ----------------------------------------------------------------------------
#  Gamma family
# ----------------------------------------------------------------------------

def gamma_p_series(a, x, max_iter=5000):
    """Regularised P(a, x) by its power series. Converges for all x >= 0,
    fast when x < a + 1."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    a, x = np.broadcast_arrays(a, x)
    out = np.zeros(a.shape)
    pos = x > 0
    if not np.any(pos):
        return out
    aa, xx = a[pos], x[pos]

    ap = aa.copy()
    term = 1.0 / aa
    total = term.copy()
    active = np.ones(aa.shape, dtype=bool)
    for _ in range(max_iter):
        ap = ap + 1.0
        term = np.where(active, term * xx / ap, 0.0)
        total = total + term
        active = np.abs(term) > np.abs(total) * _EPS
        if not np.any(active):
            break

    log_pref = -xx + aa * np.log(xx) - _lgamma_arr(aa)
    out[pos] = np.minimum(total * np.exp(log_pref), 1.0)
    return out


def gamma_q_continued_fraction(a, x, max_iter=5000):
    """Regularised Q(a, x) = 1 - P(a, x) by a continued fraction (modified
    Lentz). Fast when x > a + 1; requires x > 0."""
    a = np.asarray(a, dtype=float)
    x = np.asarray(x, dtype=float)
    a, x = np.broadcast_arrays(a, x)
    if np.any(x <= 0):
        raise ValueError("continued fraction needs x > 0")

    b = x + 1.0 - a
    c = np.full(a.shape, 1.0 / _TINY)
    d = 1.0 / np.where(np.abs(b) < _TINY, _TINY, b)
    h = d.copy()
    active = np.ones(a.shape, dtype=bool)
    for i in range(1, max_iter + 1):
        an = -i * (i - a)
        b = b + 2.0
        d = an * d + b
        d = np.where(np.abs(d) < _TINY, _TINY, d)
        c = b + an / c
        c = np.where(np.abs(c) < _TINY, _TINY, c)
        d = 1.0 / d
        delta = np.where(active, d * c, 1.0)
        h = h * delta
        active = np.abs(delta - 1.0) > _EPS
        if not np.any(active):
            break

    log_pref = -x + a * np.log(x) - _lgamma_arr(a)
    return np.clip(np.exp(log_pref) * h, 0.0, 1.0)


def _lgamma_arr(a):
    flat = np.fromiter((math.lgamma(v) for v in np.ravel(a)), dtype=float, count=np.size(a))
    return flat.reshape(np.shape(a))


def gamma_p(a, x):
    """Regularised lower incomplete gamma P(a, x) = gamma(a, x) / Gamma(a).

    Series below ``x = a + 1``, continued fraction above.
    """
    a_arr = np.asarray(a, dtype=float)
    x_arr = np.asarray(x, dtype=float)
    if np.any(a_arr <= 0):
        raise ValueError("gamma_p: shape parameter a must be positive")
    if np.any(x_arr < 0):
        raise ValueError("gamma_p: x must be non-negative")
    a_b, x_b = np.broadcast_arrays(a_arr, x_arr)
    out = np.zeros(a_b.shape)

    use_cf = x_b >= a_b + 1.0
    use_series = (~use_cf) & (x_b > 0)
    inf = np.isinf(x_b)
    out[inf] = 1.0
    use_cf &= ~inf
    if np.any(use_series):
        out[use_series] = gamma_p_series(a_b[use_series], x_b[use_series])
    if np.any(use_cf):
        out[use_cf] = 1.0 - gamma_q_continued_fraction(a_b[use_cf], x_b[use_cf])
    if out.ndim == 0:
        return float(out)
    return out


def lower_inc_gamma(a, x):
    """Unregularised lower incomplete gamma function gamma(a, x).

    Overflows to inf for ``a`` beyond ~171 where Gamma(a) itself does (but is
    exactly 0 at x = 0); the model code works with :func:`gamma_p` instead.
    """
    p = np.asarray(gamma_p(a, x))
    with np.errstate(over="ignore", invalid="ignore"):
        g = np.exp(_lgamma_arr(np.asarray(a, dtype=float)))
        out = np.where(p > 0, p * g, 0.0)
    return float(out) if out.ndim == 0 else out


# ----------------------------------------------------------------------------
#  Laguerre function of order 1/2
# ----------------------------------------------------------------------------

def laguerre_half(x):
    """L_{1/2}(x) = e^{x/2} [(1 - x) I0(-x/2) - x I1(-x/2)].

    Evaluated with exponentially scaled Bessel functions so large negative
    arguments (strong line-of-sight) do not overflow.
    """
    x = np.asarray(x, dtype=float)
    h = np.abs(x) / 2.0
    # e^{x/2} I_n(|x|/2) = ine(|x|/2) * e^{x/2 + |x|/2}
    scale = np.exp(x / 2.0 + h)
    # I1 is odd: I1(-x/2) = -sign(x) I1(|x|/2)
    val = scale * ((1.0 - x) * i0e(h) + x * np.sign(x) * i1e(h))
    if val.ndim == 0:
        return float(val)
    return val


# ----------------------------------------------------------------------------
#  Parabolic cylinder function, negative order
# ----------------------------------------------------------------------------

def log_parabolic_cylinder_d(order: float, z: float) -> float:
    """ln D_nu(z) for nu < 0 and z >= 0 by quadrature of

        D_nu(z) = e^{-z^2/4} / Gamma(-nu) * int_0^inf t^{-nu-1} e^{-t^2/2 - z t} dt.

    The integrand is scaled by its peak value so very negative orders
    (nu ~ -250 for large RIS arrays) stay representable.
    """
    if math.isnan(order) or math.isnan(z):
        raise ValueError("parabolic_cylinder_d: NaN input")
    if z < 0:
        raise ValueError("parabolic_cylinder_d: z must be non-negative")
    if order == 0.0:
        return -z * z / 4.0
    if order > 0:
        raise ValueError("parabolic_cylinder_d: only negative orders are supported")

    s = -order  # exponent of t is s - 1
    # log integrand g(t) = (s-1) ln t - t^2/2 - z t; peak where g'(t) = 0
    if s > 1.0:
        t_pk = (-z + math.sqrt(z * z + 4.0 * (s - 1.0))) / 2.0
        g_pk = (s - 1.0) * math.log(t_pk) - t_pk * t_pk / 2.0 - z * t_pk
        width = 1.0 / math.sqrt(1.0 + (s - 1.0) / (t_pk * t_pk))
    else:
        t_pk, g_pk, width = 0.0, 0.0, 1.0

    def f(t):
        if t <= 0.0:
            return 0.0 if s > 1.0 else (1.0 if s == 1.0 else math.inf)
        return math.exp((s - 1.0) * math.log(t) - t * t / 2.0 - z * t - g_pk)

    lo = max(0.0, t_pk - 40.0 * width)
    hi = t_pk + 40.0 * width + 10.0
    pts = [t_pk] if lo < t_pk < hi else None
    val, _ = integrate.quad(f, lo, hi, points=pts, limit=400, epsabs=0.0, epsrel=1e-13)
    return -z * z / 4.0 - math.lgamma(s) + g_pk + math.log(val)


def parabolic_cylinder_d(order: float, z: float) -> float:
    """Parabolic cylinder function D_nu(z) for nu <= 0, z >= 0."""
    return math.exp(log_parabolic_cylinder_d(order, z))


# ----------------------------------------------------------------------------
#  Gauss-Chebyshev grids
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class QuadratureGrid:
    """Chebyshev nodes mapped onto (0, m1).

    ``integrate(f)`` approximates int_0^{m1} f(x) dx by
    (pi m1 / (2 m2)) * sum_i w_i f(zeta_i) with w_i = sqrt(1 - varpi_i^2).
    """

    m1: float
    m2: int
    cheb: np.ndarray    # varpi_i
    nodes: np.ndarray   # zeta_i
    weights: np.ndarray  # sqrt(1 - varpi_i^2)

    @property
    def scale(self) -> float:
        return math.pi * self.m1 / (2.0 * self.m2)

    def integrate(self, f) -> float:
        return self.scale * float(np.dot(self.weights, f(self.nodes)))


def make_grid(m1: float, m2: int) -> QuadratureGrid:
    if not m1 > 0:
        raise ValueError("make_grid: m1 must be positive")
    if m2 < 1:
        raise ValueError("make_grid: m2 must be >= 1")
    i = np.arange(1, m2 + 1)
    varpi = np.cos((2 * i - 1) * math.pi / (2 * m2))
    nodes = m1 * (varpi + 1.0) / 2.0
    weights = np.sqrt(1.0 - varpi ** 2)
    return QuadratureGrid(float(m1), int(m2), varpi, nodes, weights)


def truncation_bound(scale: float, drop: float = ENVELOPE_DROP) -> float:
    """Upper limit where an e^{-x/scale} envelope has fallen by ``drop``."""
    return scale * math.log(drop)


def grid_for_scale(scale: float, m2: int = DEFAULT_M2) -> QuadratureGrid:
    return make_grid(truncation_bound(scale), m2)
