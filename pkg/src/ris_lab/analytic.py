"""
Closed-form average secrecy throughput (AST) evaluators.

External eavesdropper
    ``ast_external``              finite blocklength, Gauss-Chebyshev form
    ``ast_external_asymptotic``   high transmit power, parabolic cylinder form
    ``ast_external_infblock``     infinite blocklength, (B/m) P{gA > gE}

Internal (NOMA) eavesdropper
    ``ast_internal``              two-stage decoding, linearised BLERs
    ``ast_internal_asymptotic``   high transmit power, perfect / imperfect SIC
    ``ast_internal_infblock``     infinite blocklength

All evaluators return an :class:`AstResult` whose value lies in [0, B/m].
"""

from __future__ import annotations

import logging
import math
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .channel import (
    CascadeGammaFit, NomaConfig, SystemConfig, cdf_cascade_power, cdf_sinr_noma_first,
    cdf_sinr_noma_second, cdf_snr_external, fit_cascade,
)
from .fbl import DISPERSION_LIMIT, SecrecyCode, bler_no_secrecy, secrecy_threshold
from .specfun import DEFAULT_M2, QuadratureGrid, grid_for_scale, log_parabolic_cylinder_d, q_inv

log = logging.getLogger(__name__)

# how often a probability-like quantity had to be clamped into [0, 1]
CLAMP_EVENTS: Counter = Counter()


class AstKind(str, Enum):
    ANALYTIC = "analytic"
    ASYMPTOTIC = "asymptotic"
    INFINITE_BLOCKLENGTH = "infinite_blocklength"
    MONTE_CARLO = "monte_carlo"


@dataclass(frozen=True)
class AstResult:
    value: float
    kind: AstKind
    components: tuple[float, float] | None = None
    sem: float | None = None
    meta: dict = field(default_factory=dict, compare=False)

    @property
    def eps_bar(self) -> float | None:
        return self.meta.get("eps_bar")


def _clamp_prob(x: float, where: str) -> float:
    if x < 0.0 or x > 1.0:
        CLAMP_EVENTS[where] += 1
        log.debug("clamped %s = %.6g into [0, 1]", where, x)
        return min(max(x, 0.0), 1.0)
    return x


def _snapshot(cfg, code, noma=None, **extra) -> dict:
    meta = {"system": cfg.as_dict(), "code": {"m": code.m, "b": code.b, "delta": code.delta}}
    if noma is not None:
        meta["noma"] = noma.as_dict()
    meta.update(extra)
    return meta


def _result(code, eps, kind, cfg, noma=None, components=None, **extra) -> AstResult:
    eps = _clamp_prob(float(eps), f"{kind.value}.eps_bar")
    return AstResult(value=code.rate * (1.0 - eps), kind=kind, components=components,
                     meta=_snapshot(cfg, code, noma, eps_bar=eps, **extra))


# ----------------------------------------------------------------------------
#  External eavesdropper
# ----------------------------------------------------------------------------

def _eve_average(grid: QuadratureGrid, mean: float, values) -> float:
    """int_0^inf values(y) e^{-y/mean} / mean dy on ``grid``."""
    return grid.scale / mean * float(np.dot(grid.weights * np.exp(-grid.nodes / mean), values))


def ast_external(cfg: SystemConfig, code: SecrecyCode, fit: CascadeGammaFit | None = None,
                 grid: QuadratureGrid | None = None, m2: int = DEFAULT_M2,
                 eve_dispersion: float | None = None) -> AstResult:
    """Finite-blocklength AST against an external eavesdropper.

    The secrecy BLER is replaced by its linearisation around the 1/2 point
    x0(y), the lower limit of the inner integral is moved to zero and the
    remaining average over Eve's SNR is done on a Chebyshev grid.

    x0 is evaluated with Eve's dispersion at each node. Passing
    ``eve_dispersion=1.0`` instead fixes V_E = 1 for every node.
    """
    fit = fit or fit_cascade(cfg)
    mean_e = cfg.eve_mean_snr
    grid = grid or grid_for_scale(mean_e, m2)
    x0 = secrecy_threshold(grid.nodes, code, eve_dispersion)
    eps = _eve_average(grid, mean_e, cdf_snr_external(cfg, fit, x0))
    return _result(code, eps, AstKind.ANALYTIC, cfg, scenario="external")


def average_bler_high_snr(fit: CascadeGammaFit, ratio: float, log2_threshold: float) -> float:
    """E_y[F_Z(c y / ratio)] for y ~ Exp(1), c = 2^log2_threshold.

    Closed form (b^2/2)^{k/2} e^{b^2/8} D_{-k}(b / sqrt 2), b^2 = c / (ratio theta^2),
    evaluated in logs because k is of the order of a few hundred for large
    surfaces.
    """
    k = fit.k_hat
    b2 = 2.0 ** log2_threshold / (ratio * fit.theta_hat ** 2)
    log_eps = 0.5 * k * math.log(b2 / 2.0) + b2 / 8.0 + log_parabolic_cylinder_d(-k, math.sqrt(b2 / 2.0))
    return math.exp(log_eps)


def high_snr_log2_threshold(code: SecrecyCode) -> float:
    """Required log2 SNR ratio at high power: sqrt(V_inf / m) Q^-1(delta) + B/m."""
    return math.sqrt(DISPERSION_LIMIT / code.m) * q_inv(code.delta) + code.rate


def ast_external_asymptotic(cfg: SystemConfig, code: SecrecyCode,
                            fit: CascadeGammaFit | None = None) -> AstResult:
    """High-power limit of :func:`ast_external`; independent of P_G."""
    fit = fit or fit_cascade(cfg)
    eps = average_bler_high_snr(fit, cfg.power_free_ratio, high_snr_log2_threshold(code))
    return _result(code, eps, AstKind.ASYMPTOTIC, cfg, scenario="external")


def ast_external_infblock(cfg: SystemConfig, code: SecrecyCode, fit: CascadeGammaFit | None = None,
                          grid: QuadratureGrid | None = None, m2: int = DEFAULT_M2) -> AstResult:
    """(B/m) P{gA > gE}: throughput when any positive secrecy capacity suffices."""
    fit = fit or fit_cascade(cfg)
    mean_e = cfg.eve_mean_snr
    grid = grid or grid_for_scale(mean_e, m2)
    eps = _eve_average(grid, mean_e, cdf_snr_external(cfg, fit, grid.nodes))
    return _result(code, eps, AstKind.INFINITE_BLOCKLENGTH, cfg, scenario="external")


# ----------------------------------------------------------------------------
#  Internal eavesdropper (NOMA)
# ----------------------------------------------------------------------------

def first_stage_bler(cfg: SystemConfig, noma: NomaConfig, fit: CascadeGammaFit,
                     code: SecrecyCode) -> float:
    """Average error of decoding Eve's layer: the SINR CDF at 2^{B/m} - 1.

    Saturates at 1 when that rate is above the SINR ceiling a_E / a_A.
    """
    beta = 2.0 ** code.rate - 1.0
    if beta >= noma.sinr_ceiling:
        return 1.0
    return float(cdf_sinr_noma_first(cfg, noma, fit, beta))


def _second_stage_average(cfg, noma, fit, thresholds_of, m2) -> float:
    mean_e = noma.a_a * cfg.eve_mean_snr
    grid_j = grid_for_scale(mean_e, m2)
    thr = thresholds_of(grid_j.nodes)
    if noma.omega_sic == 0.0:
        cdf = cdf_cascade_power(fit, thr / (noma.a_a * cfg.delta))
    else:
        grid_i = grid_for_scale(noma.omega_sic * cfg.rho_a * noma.omega_i, m2)
        cdf = cdf_sinr_noma_second(cfg, noma, fit, thr, grid=grid_i)
    return _eve_average(grid_j, mean_e, cdf)


def ast_internal(cfg: SystemConfig, noma: NomaConfig, code: SecrecyCode,
                 fit: CascadeGammaFit | None = None, m2: int = DEFAULT_M2) -> AstResult:
    """Finite-blocklength AST of the AAV with an internal NOMA eavesdropper.

    eps_bar = E[eps_AE] + E[eps_A] (the product term of the two-stage error is
    dropped), each linearised at its 1/2 point. With ``omega_sic == 0`` the
    residual-interference average disappears (perfect SIC).
    """
    fit = fit or fit_cascade(cfg)
    e_ae = first_stage_bler(cfg, noma, fit, code)
    e_a = _second_stage_average(cfg, noma, fit, lambda y: secrecy_threshold(y, code), m2)
    e_a = _clamp_prob(e_a, "internal.e_a")
    total = e_ae + e_a
    if total > 1.0:
        CLAMP_EVENTS["internal.sum"] += 1
        total = 1.0
    return _result(code, total, AstKind.ANALYTIC, cfg, noma, components=(e_ae, e_a),
                   scenario="internal")


def ast_internal_asymptotic(cfg: SystemConfig, noma: NomaConfig, code: SecrecyCode,
                            fit: CascadeGammaFit | None = None,
                            perfect_sic: bool | None = None) -> AstResult:
    """High-power AST. With imperfect SIC the residual interference grows with
    P_G and the throughput collapses to 0."""
    if perfect_sic is None:
        perfect_sic = noma.omega_sic == 0.0
    if not perfect_sic:
        return AstResult(value=0.0, kind=AstKind.ASYMPTOTIC, components=(None, 1.0),
                         meta=_snapshot(cfg, code, noma, eps_bar=1.0, scenario="internal"))
    fit = fit or fit_cascade(cfg)
    # first-stage SINR tends to its ceiling a_E / a_A
    e_ae = float(bler_no_secrecy(noma.sinr_ceiling, code))
    e_a = average_bler_high_snr(fit, cfg.power_free_ratio, high_snr_log2_threshold(code))
    total = min(e_ae + e_a, 1.0)
    return _result(code, total, AstKind.ASYMPTOTIC, cfg, noma, components=(e_ae, e_a),
                   scenario="internal")


def ast_internal_infblock(cfg: SystemConfig, noma: NomaConfig, code: SecrecyCode,
                          fit: CascadeGammaFit | None = None, m2: int = DEFAULT_M2) -> AstResult:
    """(B/m) P{gA_In > gE_In}; the first stage is taken as error-free."""
    fit = fit or fit_cascade(cfg)
    p_out = _second_stage_average(cfg, noma, fit, lambda y: y, m2)
    return _result(code, p_out, AstKind.INFINITE_BLOCKLENGTH, cfg, noma, components=(0.0, p_out),
                   scenario="internal")
