"""
Finite-blocklength error probabilities (normal approximation, rates in bits).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .specfun import q_func, q_inv

LOG2E = math.log2(math.e)
# high-SNR limit of the dispersion, in bits^2
DISPERSION_LIMIT = LOG2E ** 2


@dataclass(frozen=True)
class SecrecyCode:
    """Blocklength ``m`` (channel uses), payload ``b`` (bits per block) and
    leakage probability ``delta``.

    ``m`` may be real-valued when the blocklength is relaxed for optimisation.
    """

    m: float
    b: float
    delta: float = 1e-3

    def __post_init__(self):
        if not self.m >= 1:
            raise ValueError("blocklength m must be >= 1")
        if not self.b > 0:
            raise ValueError("payload b must be positive")
        if not 0.0 < self.delta < 0.5:
            raise ValueError("leakage probability delta must lie in (0, 0.5)")

    @property
    def rate(self) -> float:
        return self.b / self.m

    def with_m(self, m: float) -> "SecrecyCode":
        return replace(self, m=m)

    def with_(self, **changes) -> "SecrecyCode":
        return replace(self, **changes)


def dispersion(gamma):
    """Channel dispersion V = (1 - (1 + gamma)^-2) log2(e)^2."""
    g = np.asarray(gamma, dtype=float)
    v = -np.expm1(-2.0 * np.log1p(g)) * DISPERSION_LIMIT
    return float(v) if v.ndim == 0 else v


def _q_of_deficit(scale_sq, deficit):
    """Q(sqrt(scale_sq) * deficit), taking the sign limit where scale_sq is
    infinite (zero dispersion)."""
    with np.errstate(divide="ignore", invalid="ignore"):
        arg = np.sqrt(scale_sq) * deficit
    limit = np.where(deficit > 0, 0.0, np.where(deficit < 0, 1.0, 0.5))
    return np.where(np.isfinite(scale_sq), q_func(arg), limit)


def bler_no_secrecy(gamma, code: SecrecyCode):
    """BLER of rate B/m over an AWGN channel at SNR ``gamma``."""
    g = np.asarray(gamma, dtype=float)
    v = dispersion(g)
    with np.errstate(divide="ignore", over="ignore"):
        scale_sq = code.m / np.asarray(v)
    out = _q_of_deficit(scale_sq, np.log2(1.0 + g) - code.rate)
    return float(out) if out.ndim == 0 else out


def secrecy_bler(gamma_a, gamma_e, code: SecrecyCode):
    """BLER under the leakage constraint; 1 whenever gamma_a <= gamma_e."""
    ga = np.asarray(gamma_a, dtype=float)
    ge = np.asarray(gamma_e, dtype=float)
    ga, ge = np.broadcast_arrays(ga, ge)
    va = np.asarray(dispersion(ga))
    ve = np.asarray(dispersion(ge))
    deficit = (np.log2((1.0 + ga) / (1.0 + ge))
               - np.sqrt(ve / code.m) * q_inv(code.delta) - code.rate)
    with np.errstate(divide="ignore", over="ignore"):
        scale_sq = code.m / va
    out = np.where(ga > ge, _q_of_deficit(scale_sq, deficit), 1.0)
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class Linearization:
    """First-order expansion of an error probability around its 1/2 point.

    1 below ``lower``, affine through (x0, 1/2) with ``slope`` < 0, 0 above
    ``upper``.
    """

    x0: float
    slope: float

    @property
    def lower(self) -> float:
        return self.x0 + 1.0 / (2.0 * self.slope)

    @property
    def upper(self) -> float:
        return self.x0 - 1.0 / (2.0 * self.slope)

    def __call__(self, x):
        out = np.clip(0.5 + self.slope * (np.asarray(x, dtype=float) - self.x0), 0.0, 1.0)
        return float(out) if out.ndim == 0 else out


def secrecy_threshold(gamma_e, code: SecrecyCode, eve_dispersion=None):
    """Legitimate SNR at which the secrecy BLER equals 1/2.

    ``eve_dispersion`` overrides V_E (e.g. with its high-SNR limit);
    by default it is evaluated at ``gamma_e``.
    """
    ge = np.asarray(gamma_e, dtype=float)
    ve = dispersion(ge) if eve_dispersion is None else eve_dispersion
    x0 = 2.0 ** (np.sqrt(np.asarray(ve) / code.m) * q_inv(code.delta) + code.rate) * (1.0 + ge) - 1.0
    return float(x0) if np.ndim(x0) == 0 else x0


def linearize_secrecy(gamma_e: float, code: SecrecyCode, eve_dispersion=None) -> Linearization:
    x0 = secrecy_threshold(gamma_e, code, eve_dispersion)
    slope = -math.sqrt(code.m / (2.0 * math.pi * x0 * (x0 + 2.0)))
    return Linearization(x0=x0, slope=slope)


def linearize_rate(code: SecrecyCode) -> Linearization:
    """Linearised no-secrecy BLER around beta = 2^{B/m} - 1.

    The slope magnitude is sqrt(m / (2 pi beta)), which drops the (beta + 2)
    factor of the exact derivative.
    """
    if not code.rate > 0:
        raise ValueError("linearize_rate needs B/m > 0")
    beta = 2.0 ** code.rate - 1.0
    d = (2.0 * math.pi * beta) ** -0.5
    return Linearization(x0=beta, slope=-d * math.sqrt(code.m))
