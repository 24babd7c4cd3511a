"""
Choosing the blocklength
========================

AST is unimodal in m, so the best blocklength is found by a bisection on the
slope followed by an integer polish. With a reliability target and a latency
cap the feasible set is an interval [m_low, m_th].
"""

from ris_lab import SecrecyCode, SystemConfig
from ris_lab.optimize import (
    OptConstraints, external_evaluator, inverse_bler, optimize_constrained, optimize_unconstrained,
)

code = SecrecyCode(100, 300)
for p in (10, 20, 30, 40):
    ev = external_evaluator(SystemConfig(p_g_dbw=p))
    r = optimize_unconstrained(ev, code)
    print(f"P_G = {p} dBW: m* = {r.m_star:4d}, AST = {r.ast_at_star:.4f} ({r.evaluations} evaluations)")

ev = external_evaluator(SystemConfig())
inv = inverse_bler(ev, code, 0.01)
print(f"\nshortest blocklength with eps_bar <= 0.01: {inv.m:.1f}")
for eps_th, m_th in ((0.01, 1000), (0.01, 150), (0.3, 1000), (0.3, 120)):
    r = optimize_constrained(ev, code, OptConstraints(eps_th, m_th))
    if r.feasible:
        print(f"eps_th = {eps_th}, m_th = {m_th}: m* = {r.m_star} ({r.binding.value}), AST = {r.ast_at_star:.4f}")
    else:
        print(f"eps_th = {eps_th}, m_th = {m_th}: infeasible")
