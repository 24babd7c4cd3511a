"""
Secrecy throughput against an external eavesdropper
===================================================

AST(m) = (B/m)(1 - eps_bar) first rises with the blocklength (a longer code
is more reliable), then falls (the rate B/m shrinks). We compare the
closed form with Monte Carlo, the infinite-blocklength reference and the
high-power asymptote.
"""

from ris_lab import SecrecyCode, SimPlan, SystemConfig
from ris_lab.analytic import ast_external, ast_external_asymptotic, ast_external_infblock
from ris_lab.montecarlo import simulate_ast

cfg = SystemConfig()
print(f"P_G = {cfg.p_g_dbw} dBW, B = 300 bits, delta = 1e-3")
print(f"{'m':>6} {'analytic':>9} {'MC':>9} {'sem':>7} {'inf. block':>11}")
for m in (60, 100, 150, 200, 400, 800):
    code = SecrecyCode(m, 300)
    mc = simulate_ast(cfg, code, SimPlan(realizations=20_000, seed=m))
    print(f"{m:6d} {ast_external(cfg, code).value:9.4f} {mc.value:9.4f} {mc.sem:7.4f} "
          f"{ast_external_infblock(cfg, code).value:11.4f}")

# at high power the curve saturates: Alice and Eve both scale with P_G
code = SecrecyCode(100, 300)
print("\nAST versus transmit power (m = 100)")
for p in (10, 20, 30, 40, 50):
    print(f"  {p:2d} dBW: {ast_external(cfg.with_(p_g_dbw=p), code).value:.4f}")
print(f"  asymptote: {ast_external_asymptotic(cfg, code).value:.4f}")
