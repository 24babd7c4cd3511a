"""
NOMA with an internal eavesdropper
==================================

The ground station superposes the AAV's and the ground user's signals; the
ground user is the eavesdropper. Residual interference after imperfect SIC
grows with power, so the AAV's secrecy throughput peaks and then collapses.
"""

from ris_lab import NomaConfig, SecrecyCode, SimPlan, SystemConfig
from ris_lab.analytic import ast_internal, ast_internal_asymptotic
from ris_lab.montecarlo import simulate_ast

code = SecrecyCode(300, 150)
print(f"{'P_G':>4} " + " ".join(f"{'w=' + str(w):>10}" for w in (0.0, 0.01, 0.05)))
for p in (16, 20, 24, 28, 32, 40):
    cfg = SystemConfig(p_g_dbw=p)
    vals = [ast_internal(cfg, NomaConfig(a_a=0.3, omega_sic=w), code).value for w in (0.0, 0.01, 0.05)]
    print(f"{p:4d} " + " ".join(f"{v:10.4f}" for v in vals))

perfect = NomaConfig(a_a=0.3, omega_sic=0.0)
print(f"perfect-SIC asymptote: {ast_internal_asymptotic(SystemConfig(), perfect, code).value:.4f}")

# the analysis drops the product of the two stage errors; the simulation keeps it
cfg, noma = SystemConfig(), NomaConfig()
mc = simulate_ast(cfg, code, SimPlan(realizations=50_000, seed=3, scenario="internal"), noma)
print(f"default point: analytic {ast_internal(cfg, noma, code).value:.4f}, MC {mc.value:.4f} "
      f"(stage errors {mc.components[0]:.4f}, {mc.components[1]:.4f})")

# power split: too little power for the AAV starves it, too much helps Eve
print("\nAST versus a_A at 30 dBW")
for a in (0.05, 0.1, 0.2, 0.3, 0.4, 0.45):
    print(f"  a_A = {a:.2f}: {ast_internal(cfg, NomaConfig(a_a=a), code).value:.4f}")
