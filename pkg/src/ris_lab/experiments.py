"""
Experiment specs, sweeps and CSV / gnuplot output.

An experiment file is INI text with one section per configuration type::

    [experiment]
    name = fig2
    scenario = external
    series = analytic, monte_carlo
    sweep = m
    start = 50
    stop = 1000
    step = 50
    vary = b_bits:200,300; n_elements:100,120

    [system]
    p_g_dbw = 30

    [code]
    b_bits = 300

Units live in the key names (``d_gr_m``, ``p_g_dbw``). Keys left out take
their defaults. ``vary`` adds one series per combination of the listed
values.
"""

from __future__ import annotations

import configparser
import hashlib
import io
import itertools
import logging
import math
import os
import tempfile
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from datetime import datetime, timezone
from importlib import resources
from pathlib import Path

from . import __version__
from .analytic import (
    AstKind, ast_external, ast_external_asymptotic, ast_external_infblock, ast_internal,
    ast_internal_asymptotic, ast_internal_infblock,
)
from .channel import NomaConfig, SystemConfig, UnsupportedConfigError
from .fbl import SecrecyCode
from .montecarlo import SimPlan, simulate_ast, worker_count
from .optimize import (
    OptConstraints, OptResult, external_evaluator, internal_evaluator, optimize_constrained,
    optimize_unconstrained,
)

log = logging.getLogger(__name__)

VERSION_TAG = f"v{__version__}"
CSV_COLUMNS = ("sweep_var", "sweep_value", "series", "ast_bpcu", "sem", "eps_bar", "m_star", "notes")
SCENARIOS = ("external", "internal")
OPTIMIZER_MODES = ("none", "unconstrained", "constrained")


class SpecError(ValueError):
    """Invalid experiment spec; ``path`` names the offending field."""

    def __init__(self, path: str, msg: str):
        super().__init__(f"{path}: {msg}")
        self.path = path


# ----------------------------------------------------------------------------
#  Config keys: file key -> (section, dataclass field, parse, format)
# ----------------------------------------------------------------------------

def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


def _int(s) -> int:
    v = float(s)
    if v != int(v):
        raise ValueError(f"expected an integer, got {s!r}")
    return int(v)


# file key, section, target field, parser
_KEYS = [
    ("d_gr_m", "system", "d_gr", float),
    ("d_ra_m", "system", "d_ra", float),
    ("d_ge_m", "system", "d_ge", float),
    ("alpha", "system", "alpha", float),
    ("k_gr_db", "system", "k_gr_db", float),
    ("k_ra_db", "system", "k_ra_db", float),
    ("omega_gr", "system", "omega_gr", float),
    ("omega_ra", "system", "omega_ra", float),
    ("n_elements", "system", "n_elements", _int),
    ("p_g_dbw", "system", "p_g_dbw", float),
    ("sigma2_a_w", "system", "sigma2_a", float),
    ("sigma2_e_w", "system", "sigma2_e", float),
    ("a_a", "noma", "a_a", float),
    ("omega_sic", "noma", "omega_sic", float),
    ("omega_i", "noma", "omega_i", float),
    ("m", "code", "m", float),
    ("b_bits", "code", "b", float),
    ("delta", "code", "delta", float),
]
KEY_INFO = {k: (sec, fld, parse) for k, sec, fld, parse in _KEYS}
# noise may also be given in dBW at the boundary
_DBW_ALIASES = {"sigma2_a_dbw": "sigma2_a_w", "sigma2_e_dbw": "sigma2_e_w"}
SWEEP_VARS = ("m", "b_bits", "p_g_dbw", "n_elements", "a_a", "delta")


@dataclass(frozen=True)
class Fixed:
    system: SystemConfig = field(default_factory=SystemConfig)
    noma: NomaConfig = field(default_factory=NomaConfig)
    code: SecrecyCode = field(default_factory=lambda: SecrecyCode(m=300.0, b=150.0))

    def get(self, key: str):
        sec, fld, _ = KEY_INFO[key]
        return getattr(getattr(self, sec), fld)

    def set(self, key: str, value) -> "Fixed":
        sec, fld, parse = KEY_INFO[key]
        value = parse(value)
        return replace(self, **{sec: replace(getattr(self, sec), **{fld: value})})


@dataclass(frozen=True)
class Sweep:
    var: str
    start: float
    stop: float
    step: float

    def values(self) -> list[float]:
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        vals = [self.start + i * self.step for i in range(max(n, 1))]
        if KEY_INFO[self.var][2] is _int or self.var == "m":
            vals = [float(round(v)) for v in vals]
        return vals


@dataclass(frozen=True)
class OptimizerSettings:
    mode: str = "none"
    eps_th: float = 1.0
    m_th: float = 2000.0
    m_lo: float = 50.0
    m_hi: float = 2000.0


@dataclass(frozen=True)
class ExperimentSpec:
    name: str
    scenario: str
    sweep: Sweep
    fixed: Fixed = field(default_factory=Fixed)
    series: tuple[str, ...] = ("analytic",)
    plan: SimPlan = field(default_factory=SimPlan)
    vary: tuple[tuple[str, tuple[float, ...]], ...] = ()
    optimizer: OptimizerSettings = field(default_factory=OptimizerSettings)

    def __post_init__(self):
        validate(self)
        # swept and varied fields carry no information of their own; pin them
        # so that serialisation round trips
        fixed = self.fixed.set(self.sweep.var, self.sweep.start)
        for key, vals in self.vary:
            fixed = fixed.set(key, vals[0])
        object.__setattr__(self, "fixed", fixed)
        object.__setattr__(self, "plan", replace(self.plan, scenario=self.scenario))

    def series_labels(self) -> list[tuple[str, dict]]:
        """(label suffix, overrides) per combination of ``vary`` values."""
        if not self.vary:
            return [("", {})]
        keys = [k for k, _ in self.vary]
        out = []
        for combo in itertools.product(*(v for _, v in self.vary)):
            label = ",".join(f"{k}={_fmt_value(k, v)}" for k, v in zip(keys, combo))
            out.append((label, dict(zip(keys, combo))))
        return out


def _fmt_value(key, v) -> str:
    return str(int(v)) if float(v).is_integer() else repr(float(v))


def validate(spec: ExperimentSpec) -> None:
    if not spec.name or not str(spec.name).replace("_", "").replace("-", "").isalnum():
        raise SpecError("experiment.name", "must be a non-empty identifier")
    if spec.scenario not in SCENARIOS:
        raise SpecError("experiment.scenario", f"must be one of {SCENARIOS}")
    if spec.sweep.var not in SWEEP_VARS:
        raise SpecError("experiment.sweep", f"must be one of {SWEEP_VARS}")
    if not spec.sweep.step > 0:
        raise SpecError("experiment.step", "must be positive")
    if spec.sweep.stop < spec.sweep.start:
        raise SpecError("experiment.stop", "must not be below start")
    if not spec.series:
        raise SpecError("experiment.series", "at least one series is required")
    kinds = {k.value for k in AstKind}
    for s in spec.series:
        if s not in kinds:
            raise SpecError("experiment.series", f"unknown series {s!r}")
    if spec.sweep.var == "a_a" and spec.scenario != "internal":
        raise SpecError("experiment.sweep", "a_a only applies to the internal scenario")
    for key, vals in spec.vary:
        if key not in KEY_INFO:
            raise SpecError("experiment.vary", f"unknown key {key!r}")
        if key == spec.sweep.var:
            raise SpecError("experiment.vary", f"{key!r} is already the sweep variable")
        if not vals:
            raise SpecError("experiment.vary", f"no values for {key!r}")
    if spec.optimizer.mode not in OPTIMIZER_MODES:
        raise SpecError("experiment.optimize", f"must be one of {OPTIMIZER_MODES}")


# ----------------------------------------------------------------------------
#  Parsing and serialisation
# ----------------------------------------------------------------------------

def _parse_vary(text: str):
    out = []
    for part in filter(None, (p.strip() for p in text.split(";"))):
        key, _, vals = part.partition(":")
        key = key.strip()
        try:
            out.append((key, tuple(float(v) for v in vals.split(",") if v.strip())))
        except ValueError as exc:
            raise SpecError("experiment.vary", str(exc)) from None
    return tuple(out)


def parse_spec(text: str) -> ExperimentSpec:
    cp = configparser.ConfigParser(interpolation=None, inline_comment_prefixes=("#", ";;"))
    try:
        cp.read_string(text)
    except configparser.Error as exc:
        raise SpecError("<file>", str(exc)) from None
    for sec in cp.sections():
        if sec not in ("experiment", "system", "noma", "code", "plan"):
            raise SpecError(sec, "unknown section")
    if not cp.has_section("experiment"):
        raise SpecError("experiment", "missing section")
    ex = cp["experiment"]

    def num(path, raw, conv=float):
        try:
            return conv(raw)
        except (TypeError, ValueError):
            raise SpecError(path, f"cannot parse {raw!r}") from None

    sweep_var = ex.get("sweep", "")
    start = num("experiment.start", ex.get("start"))
    sweep = Sweep(var=sweep_var, start=start,
                  stop=num("experiment.stop", ex.get("stop", str(start))),
                  step=num("experiment.step", ex.get("step", "1")))

    fixed = Fixed()
    overrides = set()
    for sec in ("system", "noma", "code"):
        if not cp.has_section(sec):
            continue
        for key, raw in cp[sec].items():
            path = f"{sec}.{key}"
            if key in _DBW_ALIASES:
                key, raw = _DBW_ALIASES[key], repr(10.0 ** (num(path, raw) / 10.0))
            if key not in KEY_INFO or KEY_INFO[key][0] != sec:
                raise SpecError(path, "unknown key")
            try:
                fixed = fixed.set(key, num(path, raw))
            except ValueError as exc:
                raise SpecError(path, str(exc)) from None
            overrides.add(key)
    if sweep_var in overrides:
        raise SpecError(f"{KEY_INFO[sweep_var][0]}.{sweep_var}",
                        "swept variable must not also be fixed")
    vary = _parse_vary(ex.get("vary", ""))
    for key, _ in vary:
        if key in overrides:
            raise SpecError(f"{KEY_INFO[key][0]}.{key}", "varied variable must not also be fixed")

    plan = SimPlan()
    if cp.has_section("plan"):
        p = cp["plan"]
        batch = p.get("batch")
        try:
            plan = SimPlan(realizations=num("plan.realizations", p.get("realizations", "100000"), _int),
                           seed=num("plan.seed", p.get("seed", "0"), _int),
                           batch=num("plan.batch", batch, _int) if batch else None)
        except SpecError:
            raise
        except ValueError as exc:
            raise SpecError("plan", str(exc)) from None

    opt = OptimizerSettings(
        mode=ex.get("optimize", "none"),
        eps_th=num("experiment.eps_th", ex.get("eps_th", "1.0")),
        m_th=num("experiment.m_th", ex.get("m_th", "2000")),
        m_lo=num("experiment.m_lo", ex.get("m_lo", "50")),
        m_hi=num("experiment.m_hi", ex.get("m_hi", "2000")),
    )
    series = tuple(s.strip() for s in ex.get("series", "analytic").split(",") if s.strip())
    try:
        return ExperimentSpec(name=ex.get("name", ""), scenario=ex.get("scenario", "external"),
                              sweep=sweep, fixed=fixed, series=series, plan=plan, vary=vary,
                              optimizer=opt)
    except SpecError:
        raise
    except ValueError as exc:
        raise SpecError("experiment", str(exc)) from None


def serialize_spec(spec: ExperimentSpec) -> str:
    cp = configparser.ConfigParser(interpolation=None)
    skip = {spec.sweep.var} | {k for k, _ in spec.vary}
    cp["experiment"] = {
        "name": spec.name,
        "scenario": spec.scenario,
        "series": ", ".join(spec.series),
        "sweep": spec.sweep.var,
        "start": _fmt(spec.sweep.start),
        "stop": _fmt(spec.sweep.stop),
        "step": _fmt(spec.sweep.step),
    }
    if spec.vary:
        cp["experiment"]["vary"] = "; ".join(
            f"{k}:" + ",".join(_fmt(float(v)) for v in vals) for k, vals in spec.vary)
    o = spec.optimizer
    if o.mode != "none":
        cp["experiment"].update(optimize=o.mode, eps_th=_fmt(o.eps_th), m_th=_fmt(o.m_th),
                                m_lo=_fmt(o.m_lo), m_hi=_fmt(o.m_hi))
    for sec in ("system", "noma", "code"):
        cp[sec] = {k: _fmt(spec.fixed.get(k)) for k, s, _, _ in _KEYS if s == sec and k not in skip}
    cp["plan"] = {"realizations": str(spec.plan.realizations), "seed": str(spec.plan.seed)}
    if spec.plan.batch:
        cp["plan"]["batch"] = str(spec.plan.batch)
    buf = io.StringIO()
    cp.write(buf)
    return buf.getvalue()


def bundled_spec_names() -> list[str]:
    root = resources.files("ris_lab") / "specs"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".spec"))


def load_spec(path_or_name: str | os.PathLike) -> ExperimentSpec:
    """Read a spec file, or a bundled one by name (``fig2`` ... ``fig9``)."""
    p = Path(path_or_name)
    if p.exists():
        return parse_spec(p.read_text())
    bundled = resources.files("ris_lab") / "specs" / f"{p.name.removesuffix('.spec')}.spec"
    if bundled.is_file():
        return parse_spec(bundled.read_text())
    raise SpecError("--config", f"no such spec file or bundled spec: {path_or_name}")


def config_hash(spec: ExperimentSpec) -> str:
    return hashlib.sha256(serialize_spec(spec).encode()).hexdigest()[:16]


# ----------------------------------------------------------------------------
#  Running
# ----------------------------------------------------------------------------

@dataclass(frozen=True)
class Row:
    sweep_var: str
    sweep_value: float
    series: str
    ast_bpcu: float
    sem: float | None = None
    eps_bar: float | None = None
    m_star: int | None = None
    notes: str = ""

    @property
    def failed(self) -> bool:
        return self.notes.startswith("error")


NUMERICAL_ERRORS = (ArithmeticError, ValueError, UnsupportedConfigError)


def evaluate(kind: str, scenario: str, fixed: Fixed, plan: SimPlan, workers: int | None = None):
    """One AST value of the given series kind at a fixed point."""
    cfg, noma, code = fixed.system, fixed.noma, fixed.code
    kind = AstKind(kind)
    if scenario == "external":
        if kind is AstKind.ANALYTIC:
            return ast_external(cfg, code)
        if kind is AstKind.ASYMPTOTIC:
            return ast_external_asymptotic(cfg, code)
        if kind is AstKind.INFINITE_BLOCKLENGTH:
            return ast_external_infblock(cfg, code)
        return simulate_ast(cfg, code, replace(plan, scenario="external"), workers=workers)
    if kind is AstKind.ANALYTIC:
        return ast_internal(cfg, noma, code)
    if kind is AstKind.ASYMPTOTIC:
        return ast_internal_asymptotic(cfg, noma, code)
    if kind is AstKind.INFINITE_BLOCKLENGTH:
        return ast_internal_infblock(cfg, noma, code)
    return simulate_ast(cfg, code, replace(plan, scenario="internal"), noma=noma, workers=workers)


def _tasks(spec: ExperimentSpec, series_kinds):
    for x in spec.sweep.values():
        for label, over in spec.series_labels():
            fixed = spec.fixed.set(spec.sweep.var, x)
            for k, v in over.items():
                fixed = fixed.set(k, v)
            for kind in series_kinds:
                name = f"{kind}:{label}" if label else kind
                yield x, name, kind, fixed


def _point(spec, task) -> Row:
    x, name, kind, fixed = task
    try:
        r = evaluate(kind, spec.scenario, fixed, spec.plan, workers=1)
        if not math.isfinite(r.value):
            raise FloatingPointError(f"non-finite AST {r.value}")
    except NUMERICAL_ERRORS as exc:
        log.warning("%s at %s=%s failed: %s", name, spec.sweep.var, x, exc)
        return Row(spec.sweep.var, x, name, math.nan, notes=f"error: {exc}")
    return Row(spec.sweep.var, x, name, r.value, sem=r.sem, eps_bar=r.eps_bar)


def _pmap(fn, items, workers: int | None = None):
    items = list(items)
    n = min(worker_count(workers), max(len(items), 1))
    if n <= 1:
        return [fn(t) for t in items]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(fn, items))


def run_experiment(spec: ExperimentSpec, workers: int | None = None) -> list[Row]:
    """One row per sweep point and series, in sweep order.

    A failing point yields a row with NaN AST and an ``error:`` note; the
    run carries on.
    """
    return _pmap(lambda t: _point(spec, t), _tasks(spec, spec.series), workers)


def evaluator_for(scenario, fixed: Fixed):
    if scenario == "external":
        return external_evaluator(fixed.system)
    return internal_evaluator(fixed.system, fixed.noma)


def _opt_point(spec, task) -> Row:
    x, name, _, fixed = task
    o = spec.optimizer
    try:
        ev = evaluator_for(spec.scenario, fixed)
        if o.mode == "constrained":
            res = optimize_constrained(ev, fixed.code, OptConstraints(o.eps_th, o.m_th))
        else:
            res = optimize_unconstrained(ev, fixed.code, (o.m_lo, o.m_hi))
    except NUMERICAL_ERRORS as exc:
        return Row(spec.sweep.var, x, name, math.nan, notes=f"error: {exc}")
    return opt_row(spec.sweep.var, x, name, res, fixed.code.b)


def opt_row(var: str, x: float, name: str, res: OptResult, b: float) -> Row:
    if not res.feasible:
        return Row(var, x, name, math.nan, notes="infeasible; " + "; ".join(res.notes))
    eps = 1.0 - res.ast_at_star * res.m_star / b
    notes = res.binding.value + ("; multimodal" if res.multimodal else "")
    return Row(var, x, name, res.ast_at_star, eps_bar=eps, m_star=res.m_star, notes=notes)


def run_optimizer_sweep(spec: ExperimentSpec, workers: int | None = None) -> list[Row]:
    """Optimal blocklength and AST per sweep point (typically P_G or delta)."""
    if spec.sweep.var == "m":
        raise SpecError("experiment.sweep", "cannot sweep m while optimising over it")
    mode = spec.optimizer.mode if spec.optimizer.mode != "none" else "unconstrained"
    spec = replace(spec, optimizer=replace(spec.optimizer, mode=mode))
    tasks = _tasks(spec, [f"optimal_{mode}"])
    rows = _pmap(lambda t: _opt_point(spec, t), tasks, workers)
    for line in trend_summary(rows):
        log.info(line)
    return rows


def trend_summary(rows: list[Row]) -> list[str]:
    """Monotonicity of optimal AST and m* along the sweep, per series."""
    out = []
    for name in dict.fromkeys(r.series for r in rows):
        pts = [r for r in rows if r.series == name and r.m_star is not None]
        ast = [r.ast_bpcu for r in pts]
        ms = [r.m_star for r in pts]
        up = all(b >= a - 1e-12 for a, b in zip(ast, ast[1:]))
        down = all(b <= a for a, b in zip(ms, ms[1:]))
        out.append(f"{name}: optimal AST {'nondecreasing' if up else 'not monotone'}, "
                   f"m* {'nonincreasing' if down else 'not monotone'}")
    return out


# ----------------------------------------------------------------------------
#  Output
# ----------------------------------------------------------------------------

def _cell(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        return repr(v)
    return str(v).replace(",", ";")


def provenance(spec: ExperimentSpec, timestamp: str | None = None) -> list[str]:
    ts = timestamp or datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ")
    return [
        f"# ris-lab {VERSION_TAG}",
        f"# spec: {spec.name}",
        f"# config_hash: {config_hash(spec)}",
        f"# seed: {spec.plan.seed}",
        f"# generated: {ts}",
    ]


def render_csv(rows: list[Row], header: list[str]) -> str:
    lines = list(header) + [",".join(CSV_COLUMNS)]
    for r in rows:
        lines.append(",".join(_cell(getattr(r, c)) for c in CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def atomic_write(path: Path, text: str) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "w", newline="") as fh:
            fh.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def gnuplot_script(spec: ExperimentSpec, rows: list[Row], csv_name: str) -> str:
    """Plot AST per series; optimiser sweeps also get m* on the right axis."""
    with_m = any(r.m_star is not None for r in rows)
    plots = []
    for name in dict.fromkeys(r.series for r in rows):
        sel = f"strcol(3) eq \"{name}\""
        plots.append(f"'{csv_name}' using 2:({sel} ? $4 : 1/0) with linespoints title \"{name}\"")
        if with_m:
            plots.append(f"'{csv_name}' using 2:({sel} ? $7 : 1/0) axes x1y2 with linespoints "
                         f"dashtype 2 title \"{name} m*\"")
    lines = [
        f"# {spec.name}: trend reproduction",
        "set datafile separator ','",
        "set datafile missing 'nan'",
        f"set xlabel '{spec.sweep.var}'",
        "set ylabel 'AST (BPCU)'",
    ]
    if with_m:
        lines += ["set y2label 'optimal blocklength m*'", "set y2tics"]
    lines += [
        "set key outside right",
        "set grid",
        "set terminal pngcairo size 900,600",
        f"set output '{spec.name}.png'",
        "plot " + ", \\\n     ".join(plots),
        "",
    ]
    return "\n".join(lines)


def write_outputs(spec: ExperimentSpec, rows: list[Row], out_dir, timestamp: str | None = None):
    """Write ``<name>.csv`` and ``<name>.gp`` into ``out_dir``; returns both paths."""
    out_dir = Path(out_dir)
    csv_path, gp_path = out_dir / f"{spec.name}.csv", out_dir / f"{spec.name}.gp"
    atomic_write(csv_path, render_csv(rows, provenance(spec, timestamp)))
    atomic_write(gp_path, gnuplot_script(spec, rows, csv_path.name))
    return csv_path, gp_path
