"""
Average secrecy throughput of an RIS-assisted aerial link under finite
blocklength coding: closed forms, Monte Carlo reference and blocklength
optimisation, for an external and an internal (NOMA) eavesdropper.
"""

__version__ = "0.1.0"

from .analytic import (  # noqa: E402
    AstKind, AstResult, ast_external, ast_external_asymptotic, ast_external_infblock,
    ast_internal, ast_internal_asymptotic, ast_internal_infblock,
)
from .channel import NomaConfig, SystemConfig, UnsupportedConfigError, fit_cascade  # noqa: E402
from .fbl import SecrecyCode, bler_no_secrecy, secrecy_bler  # noqa: E402
from .montecarlo import SimPlan, simulate_ast  # noqa: E402
from .optimize import (  # noqa: E402
    Binding, OptConstraints, OptResult, external_evaluator, internal_evaluator, inverse_bler,
    optimize_constrained, optimize_unconstrained,
)

__all__ = [
    "AstKind", "AstResult", "Binding", "NomaConfig", "OptConstraints", "OptResult", "SecrecyCode",
    "SimPlan", "SystemConfig", "UnsupportedConfigError", "ast_external", "ast_external_asymptotic",
    "ast_external_infblock", "ast_internal", "ast_internal_asymptotic", "ast_internal_infblock",
    "bler_no_secrecy", "external_evaluator", "fit_cascade", "internal_evaluator", "inverse_bler",
    "optimize_constrained", "optimize_unconstrained", "secrecy_bler", "simulate_ast",
]
