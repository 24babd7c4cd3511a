"""
Monte Carlo reference for the AST.

Realisations are split into fixed blocks of ``BLOCK`` channel draws. Block
``b`` always draws from its own Philox stream keyed by ``(seed, b)``, and
block partial sums are reduced in block order, so a run is bit-identical
for any number of worker threads.
"""

from __future__ import annotations

import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from .analytic import AstKind, AstResult, _snapshot
from .channel import NomaConfig, SystemConfig
from .fbl import SecrecyCode, bler_no_secrecy, secrecy_bler

log = logging.getLogger(__name__)

BLOCK = 4096
THREADS_ENV = "RIS_LAB_THREADS"


def worker_count(requested: int | None = None) -> int:
    """Worker threads: explicit request, else ``RIS_LAB_THREADS`` (0 = auto)."""
    if requested is None:
        requested = int(os.environ.get(THREADS_ENV, "0") or 0)
    if requested <= 0:
        return os.cpu_count() or 1
    return requested


@dataclass(frozen=True)
class SimPlan:
    realizations: int = 100_000
    seed: int = 0
    scenario: str = "external"
    batch: int | None = None

    def __post_init__(self):
        if self.realizations < 1:
            raise ValueError("realizations must be >= 1")
        if not 0 <= self.seed < 2 ** 64:
            raise ValueError("seed must be an unsigned 64-bit integer")
        if self.scenario not in ("external", "internal"):
            raise ValueError(f"unknown scenario {self.scenario!r}")

    @property
    def n_blocks(self) -> int:
        return -(-self.realizations // BLOCK)


def block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(seed, spawn_key=(block,))))


# ----------------------------------------------------------------------------
#  Channel sampling
# ----------------------------------------------------------------------------

def _cn(rng, size, power=1.0):
    """Circularly symmetric complex Gaussian with E|h|^2 = power."""
    z = rng.standard_normal((2,) + tuple(np.atleast_1d(size)))
    return math.sqrt(power / 2.0) * (z[0] + 1j * z[1])


def sample_rician(k_linear: float, omega: float, rng: np.random.Generator, size=None):
    """Rician envelope |LOS + scatter| with E[r^2] = omega and K = k_linear."""
    los = math.sqrt(k_linear * omega / (k_linear + 1.0))
    scatter = _cn(rng, 1 if size is None else size, omega / (k_linear + 1.0))
    r = np.abs(los + scatter)
    return float(r[0]) if size is None else r


def sample_cascade(cfg: SystemConfig, rng: np.random.Generator, size: int):
    """Coherently combined cascade amplitude X = sum_i |h_GR,i h_RA,i|."""
    n = cfg.n_elements
    h_gr = sample_rician(cfg.k_gr, cfg.omega_gr, rng, (size, n))
    h_ra = sample_rician(cfg.k_ra, cfg.omega_ra, rng, (size, n))
    return np.sum(h_gr * h_ra, axis=1)


def sample_snrs_external(cfg: SystemConfig, rng: np.random.Generator, size: int = 1):
    """(gamma_A, gamma_E) for ``size`` independent channel realisations."""
    x = sample_cascade(cfg, rng, size)
    h_ge = np.abs(_cn(rng, size)) ** 2
    return cfg.delta * x * x, cfg.eve_mean_snr * h_ge


def sample_snrs_internal(cfg: SystemConfig, noma: NomaConfig, rng: np.random.Generator,
                         size: int = 1):
    """(first-stage SINR, second-stage SINR, Eve SNR) for the NOMA link.

    Eve is assumed to strip her own layer perfectly before listening to the
    AAV's layer.
    """
    x = sample_cascade(cfg, rng, size)
    h_ge = np.abs(_cn(rng, size)) ** 2
    h_i = np.abs(_cn(rng, size, noma.omega_i)) ** 2
    s = cfg.delta * x * x
    sinr_first = noma.a_e * s / (noma.a_a * s + 1.0)
    sinr_second = noma.a_a * s / (noma.omega_sic * h_i * cfg.rho_a + 1.0)
    snr_eve = noma.a_a * cfg.eve_mean_snr * h_ge
    return sinr_first, sinr_second, snr_eve


# ----------------------------------------------------------------------------
#  AST estimate
# ----------------------------------------------------------------------------

def _block_sums(cfg, noma, code, seed, block, size):
    rng = block_rng(seed, block)
    if noma is None:
        ga, ge = sample_snrs_external(cfg, rng, size)
        eps = secrecy_bler(ga, ge, code)
        return np.array([eps.sum(), (eps * eps).sum()])
    s1, s2, se = sample_snrs_internal(cfg, noma, rng, size)
    e_ae = bler_no_secrecy(s1, code)
    e_a = secrecy_bler(s2, se, code)
    eps = e_ae + (1.0 - e_ae) * e_a
    return np.array([eps.sum(), (eps * eps).sum(), e_ae.sum(), e_a.sum()])


def simulate_ast(cfg: SystemConfig, code: SecrecyCode, plan: SimPlan,
                 noma: NomaConfig | None = None, workers: int | None = None) -> AstResult:
    """Empirical AST (B/m)(1 - mean BLER) with its standard error.

    The internal scenario composes the two stages exactly,
    eps = eps_AE + (1 - eps_AE) eps_A; the additive approximation is reported
    alongside in ``meta['eps_bar_additive']``.
    """
    if plan.scenario == "internal" and noma is None:
        raise ValueError("internal scenario needs a NomaConfig")
    if plan.scenario == "external":
        noma = None

    n = plan.realizations
    sizes = [min(BLOCK, n - b * BLOCK) for b in range(plan.n_blocks)]
    n_workers = min(worker_count(workers), len(sizes))

    def run(b):
        return _block_sums(cfg, noma, code, plan.seed, b, sizes[b])

    if n_workers > 1:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(run, range(len(sizes))))
    else:
        parts = []
        for b in range(len(sizes)):
            parts.append(run(b))
            if plan.batch and ((b + 1) * BLOCK) % plan.batch < BLOCK:
                log.info("simulated %d / %d realisations", min((b + 1) * BLOCK, n), n)

    totals = [math.fsum(p[i] for p in parts) for i in range(len(parts[0]))]
    mean = totals[0] / n
    var = max(totals[1] / n - mean * mean, 0.0) * n / (n - 1) if n > 1 else 0.0
    extra = {"eps_bar": mean, "realizations": n, "seed": plan.seed}
    components = None
    if noma is not None:
        e_ae, e_a = totals[2] / n, totals[3] / n
        components = (e_ae, e_a)
        extra["eps_bar_additive"] = min(e_ae + e_a, 1.0)
    return AstResult(value=code.rate * (1.0 - mean), kind=AstKind.MONTE_CARLO,
                     components=components, sem=code.rate * math.sqrt(var / n),
                     meta=_snapshot(cfg, code, noma, scenario=plan.scenario, **extra))
