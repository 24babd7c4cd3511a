"""Fast invariant checks behind ``ris-lab selftest``."""

from __future__ import annotations

import math
from typing import Callable

import numpy as np
from scipy import special

from .analytic import ast_external
from .channel import SystemConfig, fit_cascade
from .fbl import SecrecyCode, secrecy_bler
from .montecarlo import SimPlan, block_rng, sample_cascade, simulate_ast
from .specfun import gamma_p, gamma_p_series, gamma_q_continued_fraction, make_grid, parabolic_cylinder_d, q_func, q_inv


def _q_reflection():
    x = np.linspace(-8, 8, 161)
    return float(np.max(np.abs(q_func(x) + q_func(-x) - 1.0))) < 1e-15


def _q_round_trip():
    p = np.logspace(-12, math.log10(0.999), 200)
    return max(abs(q_func(q_inv(float(v))) - v) / v for v in p) < 1e-9


def _gamma_dual_path():
    pts = [(2.5, 1.7), (251.6, 240.0), (251.6, 260.0), (5.0, 5.9)]
    ok = all(abs(gamma_p_series(a, x) - (1.0 - gamma_q_continued_fraction(a, x))) < 1e-12 for a, x in pts)
    return ok and all(abs(gamma_p(a, x) - special.gammainc(a, x)) < 1e-12 for a, x in pts)


def _pcf_closed_forms():
    for z in np.linspace(0.0, 3.0, 7):
        exact1 = math.sqrt(math.pi / 2) * math.exp(z * z / 4) * special.erfc(z / math.sqrt(2))
        if not (math.isclose(parabolic_cylinder_d(0.0, z), math.exp(-z * z / 4), rel_tol=1e-12)
                and math.isclose(parabolic_cylinder_d(-1.0, z), exact1, rel_tol=1e-9)):
            return False
    return True


def _quadrature_stable():
    f = lambda x: np.exp(-x) * x
    a = make_grid(40.0, 200).integrate(f)
    b = make_grid(40.0, 400).integrate(f)
    return abs(a - 1.0) < 1e-3 and abs(a - b) < 1e-4


def _fit_moments():
    cfg = SystemConfig(n_elements=64)
    fit = fit_cascade(cfg)
    x = sample_cascade(cfg, block_rng(7, 0), 20000)
    return abs(x.mean() / fit.mean_amplitude - 1.0) < 0.015


def _oracle():
    cfg, code = SystemConfig(n_elements=36), SecrecyCode(200, 200)
    mc = simulate_ast(cfg, code, SimPlan(realizations=20000, seed=3))
    return abs(ast_external(cfg, code).value - mc.value) <= max(0.02, 3 * mc.sem)


def _bler_range():
    g = np.logspace(-3, 4, 50)
    e = secrecy_bler(g[:, None], g[None, :], SecrecyCode(200, 200))
    return bool(np.all((e >= 0) & (e <= 1)))


CHECKS: list[tuple[str, Callable[[], bool]]] = [
    ("Q reflection", _q_reflection),
    ("Q inverse round trip", _q_round_trip),
    ("incomplete gamma series vs continued fraction", _gamma_dual_path),
    ("parabolic cylinder D_0, D_-1 closed forms", _pcf_closed_forms),
    ("Gauss-Chebyshev m2 doubling", _quadrature_stable),
    ("Gamma fit mean vs simulation", _fit_moments),
    ("secrecy BLER within [0, 1]", _bler_range),
    ("analytic AST vs Monte Carlo", _oracle),
]


def run_selftest() -> list[tuple[str, bool]]:
    out = []
    for name, check in CHECKS:
        try:
            ok = bool(check())
        except Exception:  # a crashing check is a failing check
            ok = False
        out.append((name, ok))
    return out
