"""
Blocklength optimisation.

The AST is quasi-concave in the relaxed blocklength, so the maximiser is
found by bisection on a central-difference slope inside a bracket obtained
from a coarse scan. The scan doubles as a unimodality check: if it sees more
than one local maximum the optimiser falls back to an exhaustive integer
search and says so in the result.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable

import numpy as np

from .analytic import AstResult, ast_external, ast_internal
from .channel import NomaConfig, SystemConfig, fit_cascade
from .fbl import SecrecyCode
from .specfun import DEFAULT_M2, grid_for_scale

log = logging.getLogger(__name__)

Evaluator = Callable[[SecrecyCode], "AstResult | float"]

TIE_TOL = 1e-10
SCAN_POINTS = 48


class Binding(str, Enum):
    INTERIOR = "interior"
    RELIABILITY_BOUND = "reliability_bound"
    LATENCY_BOUND = "latency_bound"


@dataclass(frozen=True)
class OptConstraints:
    """Reliability target ``eps_th`` on the average BLER and latency cap ``m_th``."""

    eps_th: float
    m_th: float

    def __post_init__(self):
        if not 0.0 < self.eps_th <= 1.0:
            raise ValueError("eps_th must lie in (0, 1]")
        if not self.m_th >= 1:
            raise ValueError("m_th must be >= 1")


@dataclass(frozen=True)
class OptResult:
    m_star: int | None
    ast_at_star: float
    m_relaxed: float
    feasible: bool = True
    binding: Binding = Binding.INTERIOR
    multimodal: bool = False
    evaluations: int = 0
    notes: tuple[str, ...] = field(default=())


@dataclass(frozen=True)
class InverseBler:
    """Blocklength at which the average BLER crosses the target."""

    m: float
    in_range: bool

    def __float__(self) -> float:
        return self.m


# ----------------------------------------------------------------------------
#  Evaluators
# ----------------------------------------------------------------------------

def external_evaluator(cfg: SystemConfig, m2: int = DEFAULT_M2) -> Evaluator:
    """ast_external with the fit and quadrature grid precomputed."""
    fit = fit_cascade(cfg)
    grid = grid_for_scale(cfg.eve_mean_snr, m2)
    return lambda code: ast_external(cfg, code, fit=fit, grid=grid)


def internal_evaluator(cfg: SystemConfig, noma: NomaConfig, m2: int = DEFAULT_M2) -> Evaluator:
    fit = fit_cascade(cfg)
    return lambda code: ast_internal(cfg, noma, code, fit=fit, m2=m2)


def _value(r) -> float:
    return float(r.value if isinstance(r, AstResult) else r)


class _Memo:
    """AST(m) for a fixed code template, cached per m."""

    def __init__(self, evaluator, template):
        self.evaluator = evaluator
        self.template = template
        self.cache: dict[float, float] = {}

    def __call__(self, m: float) -> float:
        m = float(m)
        if m not in self.cache:
            self.cache[m] = _value(self.evaluator(self.template.with_m(m)))
        return self.cache[m]

    def eps_bar(self, m: float) -> float:
        return 1.0 - self(m) * m / self.template.b

    def slope(self, m: float, lo: float, hi: float) -> float:
        h = max(1.0, 1e-3 * m)
        a, b = max(m - h, lo), min(m + h, hi)
        if b <= a:
            return 0.0
        return (self(b) - self(a)) / (b - a)


# ----------------------------------------------------------------------------
#  Unconstrained
# ----------------------------------------------------------------------------

def _scan_grid(lo: int, hi: int, n: int = SCAN_POINTS) -> np.ndarray:
    if hi - lo + 1 <= n:
        return np.arange(lo, hi + 1)
    return np.unique(np.round(np.geomspace(lo, hi, n)).astype(int))


def count_local_maxima(values, tol: float = TIE_TOL) -> int:
    """Number of local maxima of a sequence, counting plateaus once."""
    plateaus = []
    for v in values:
        if plateaus and abs(v - plateaus[-1]) <= tol:
            continue
        plateaus.append(v)
    n = 0
    for i, v in enumerate(plateaus):
        left = plateaus[i - 1] if i > 0 else -math.inf
        right = plateaus[i + 1] if i + 1 < len(plateaus) else -math.inf
        if v > left and v > right:
            n += 1
    return n


def _binding_at(m: int, lo: int, hi: int) -> Binding:
    if m == lo and lo != hi:
        return Binding.RELIABILITY_BOUND
    if m == hi and lo != hi:
        return Binding.LATENCY_BOUND
    return Binding.INTERIOR


def _climb(f: _Memo, m: int, lo: int, hi: int) -> int:
    """Move to a lattice local maximum; a no-op after a correct bisection."""
    while True:
        best = m
        for c in (m - 1, m + 1):
            if lo <= c <= hi and f(c) > f(best) + TIE_TOL:
                best = c
        if best == m:
            return m
        m = best


def _maximise(f: _Memo, lo: int, hi: int) -> OptResult:
    if lo == hi:
        return OptResult(m_star=lo, ast_at_star=f(lo), m_relaxed=float(lo), evaluations=len(f.cache))

    grid = _scan_grid(lo, hi)
    vals = [f(m) for m in grid]
    if count_local_maxima(vals) > 1:
        log.warning("AST(m) not unimodal on [%d, %d]; using exhaustive search", lo, hi)
        ms = np.arange(lo, hi + 1)
        vs = [f(m) for m in ms]
        j = int(np.argmax(vs))
        m = int(ms[j])
        return OptResult(m_star=m, ast_at_star=vs[j], m_relaxed=float(m),
                         binding=_binding_at(m, lo, hi), multimodal=True,
                         evaluations=len(f.cache), notes=("multimodal scan; grid search",))

    j = int(np.argmax(vals))
    a = float(grid[max(j - 1, 0)])
    b = float(grid[min(j + 1, len(grid) - 1)])
    if f.slope(a, lo, hi) <= 0.0 and a == lo:
        b = a
    elif f.slope(b, lo, hi) >= 0.0 and b == hi:
        a = b
    while b - a > 1.0:
        mid = 0.5 * (a + b)
        if f.slope(mid, lo, hi) > 0.0:
            a = mid
        else:
            b = mid
    m_relaxed = 0.5 * (a + b)
    cands = {min(max(int(math.floor(m_relaxed)), lo), hi), min(max(int(math.ceil(m_relaxed)), lo), hi)}
    m = max(sorted(cands), key=f)
    m = _climb(f, m, lo, hi)
    return OptResult(m_star=m, ast_at_star=f(m), m_relaxed=m_relaxed,
                     binding=_binding_at(m, lo, hi), evaluations=len(f.cache))


def optimize_unconstrained(evaluator: Evaluator, code_template: SecrecyCode,
                           bounds: tuple[float, float] = (50, 2000)) -> OptResult:
    """Integer blocklength in ``bounds`` maximising the AST.

    An optimum on the lower bound is reported as ``reliability_bound`` and on
    the upper bound as ``latency_bound``.
    """
    m_lo, m_hi = bounds
    if m_lo > m_hi:
        raise ValueError(f"empty blocklength range: m_lo={m_lo} > m_hi={m_hi}")
    if m_lo < 1:
        raise ValueError("m_lo must be >= 1")
    lo, hi = int(math.ceil(m_lo)), int(math.floor(m_hi))
    if lo > hi:
        raise ValueError(f"no integer blocklength in [{m_lo}, {m_hi}]")
    return _maximise(_Memo(evaluator, code_template), lo, hi)


# ----------------------------------------------------------------------------
#  Constrained
# ----------------------------------------------------------------------------

def _inverse(f: _Memo, eps_th: float, m_max: float) -> InverseBler:
    lo, hi = 1.0, float(m_max)
    if f.eps_bar(lo) <= eps_th:
        return InverseBler(lo, in_range=f.eps_bar(lo) == eps_th)
    if f.eps_bar(hi) > eps_th:
        return InverseBler(hi, in_range=False)
    while hi - lo > 0.5:
        mid = 0.5 * (lo + hi)
        if f.eps_bar(mid) > eps_th:
            lo = mid
        else:
            hi = mid
    return InverseBler(0.5 * (lo + hi), in_range=True)


def inverse_bler(evaluator: Evaluator, code_template: SecrecyCode, eps_th: float,
                 m_max: float = 1e6) -> InverseBler:
    """Real m with average BLER equal to ``eps_th``, to within 0.5.

    Relies on the average BLER decreasing in m. Without a crossing in
    [1, m_max] the nearer boundary is returned with ``in_range=False``.
    """
    if not 0.0 < eps_th <= 1.0:
        raise ValueError("eps_th must lie in (0, 1]")
    return _inverse(_Memo(evaluator, code_template), eps_th, m_max)


def optimize_constrained(evaluator: Evaluator, code_template: SecrecyCode,
                         cons: OptConstraints, m_max: float = 1e6) -> OptResult:
    """Maximise the AST subject to eps_bar(m) <= eps_th and m <= m_th.

    The smallest reliable blocklength m_low = ceil(eps_bar^-1(eps_th)) and
    m_high = floor(m_th) bound the search; the unimodal maximiser is then
    either clipped to one of them or interior. Infeasibility is reported in
    the result rather than raised.
    """
    f = _Memo(evaluator, code_template)
    m_high = int(math.floor(cons.m_th))
    inv = _inverse(f, cons.eps_th, max(m_max, m_high))
    if not inv.in_range and f.eps_bar(inv.m) > cons.eps_th:
        return OptResult(m_star=None, ast_at_star=math.nan, m_relaxed=math.nan, feasible=False,
                         binding=Binding.RELIABILITY_BOUND, evaluations=len(f.cache),
                         notes=("reliability target unreachable",))
    # integer boundary of the reliable set
    m_low = max(int(math.ceil(inv.m)), 1)
    while f.eps_bar(m_low) > cons.eps_th:
        m_low += 1
    while m_low > 1 and f.eps_bar(m_low - 1) <= cons.eps_th:
        m_low -= 1
    if m_low > m_high:
        return OptResult(m_star=None, ast_at_star=math.nan, m_relaxed=inv.m, feasible=False,
                         binding=Binding.RELIABILITY_BOUND, evaluations=len(f.cache),
                         notes=(f"reliable blocklength {m_low} exceeds latency cap {m_high}",))
    return _maximise(f, m_low, m_high)
