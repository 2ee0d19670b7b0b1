"""Batch front end: ``coupledfwm <command> --config run.json --out dir``.

Every command reads one JSON run configuration, writes CSV/JSON artifacts
into the output directory and finishes with ``manifest.json`` (config hash,
seed, package and library versions, output checksums).  Outputs depend only
on the configuration and the seed, so reruns are byte-identical.

Exit codes: 0 success, 2 configuration error, 3 domain error (a model was
queried outside its validity range), 4 numerical failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import re
import sys
from pathlib import Path
from typing import Dict, List, Literal, Optional, Tuple, Union

import numpy as np
import pydantic
import scipy
from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from . import __version__, kernels
from .coupledmode import (
    FiberCoupling,
    RectCoupling,
    constant_coupling,
    read_coupling_csv,
    rect_exponential_fit,
)
from .designsearch import DesignTarget, grid_sweep, refine, write_report
from .dispersion import DeviceGeometry, FiberLP01, FiberParams, RectEIM, read_dispersion_csv
from .errors import ConfigError, DomainError, NumericalError
from .jsa import (
    ApodizationProfile,
    PumpSpec,
    build_jsa,
    default_grid,
    phase_matched_signal,
    pm_branch,
    pm_branch_apodized,
    schmidt,
    side_lobe_ratio,
    write_jsi_csv,
    write_schmidt_json,
)
from .phasematch import (
    BRANCH_LABELS,
    ProcessConfig,
    collapse_kappa,
    gvm_report,
    solve_contours,
    write_contours_csv,
)
from .propagation import (
    SimulationConfig,
    fit_growth_exponent,
    gain_scan,
    peak_kappa_analytic,
    propagate,
    small_signal_gain,
    staircase_period,
    write_gain_csv,
    write_record_csv,
)

EXIT_OK, EXIT_CONFIG, EXIT_DOMAIN, EXIT_NUMERICAL = 0, 2, 3, 4

UNIT_SUFFIXES = ("_um", "_per_m", "_per_w_m", "_w", "_nm", "_mm", "_m", "_ps")
# numeric fields that are genuinely dimensionless
DIMENSIONLESS = re.compile(r"^(n_\w+|\w+_fraction|\w+_weight|\w+_count|seed|index_step|record_every|maxiter|max_evaluations)$")


def _is_numeric(annotation):
    if annotation in (int, float):
        return True
    args = getattr(annotation, "__args__", ())
    return any(_is_numeric(a) for a in args if a is not type(None))


class _Block(BaseModel):
    """Strict base: unknown keys are errors, numeric fields must carry units."""

    model_config = ConfigDict(extra="forbid", frozen=True)

    @classmethod
    def __pydantic_init_subclass__(cls, **kw):
        super().__pydantic_init_subclass__(**kw)
        for name, info in cls.model_fields.items():
            if _is_numeric(info.annotation) and not (
                name.endswith(UNIT_SUFFIXES) or DIMENSIONLESS.match(name)
            ):
                raise TypeError(f"{cls.__name__}.{name}: numeric field without a unit suffix")


# ---- schema


class GeometryBlock(_Block):
    w_a_um: float = 0.32
    h_a_um: float = 0.22
    w_b_um: float = 0.40
    h_b_um: float = 0.42
    separation_um: float = 0.60
    pedestal_height_um: float = 0.02

    def build(self):
        return DeviceGeometry(**self.model_dump())


class DispersionBlock(_Block):
    kind: Literal["fiber", "rect", "table"]
    core_radius_um: float = 4.1
    index_step: float = 0.0036
    geometry: GeometryBlock = GeometryBlock()
    polarization: Literal["TE", "TM"] = "TE"
    table_a: Optional[str] = None
    table_b: Optional[str] = None


class CouplingBlock(_Block):
    model: Literal["none", "constant", "fiber", "rect", "exponential", "table"] = "none"
    kappa_per_m: Optional[float] = Field(None, ge=0)
    separation_um: Optional[float] = None
    table: Optional[str] = None


class ProcessBlock(_Block):
    lambda_p1_um: float = Field(gt=0)
    lambda_p2_um: float = Field(gt=0)
    branch: Literal["none", "even", "odd"] = "odd"
    gamma_per_w_m: float = Field(0.0, ge=0)
    power_w: float = Field(0.0, ge=0)
    supermode_fields: Literal["pump2", "all"] = "pump2"
    lambda_s_um: Optional[float] = None


class ContoursBlock(_Block):
    lambda_p1_range_um: Tuple[float, float]
    n_samples: int = Field(31, ge=2)
    n_signal: int = Field(2001, ge=3)
    span: Literal["half", "full"] = "full"
    pad_um: float = Field(0.02, ge=0)
    tolerance_per_m: float = Field(1e-6, gt=0)
    kappa_list_per_m: List[float] = []
    collapse_range_per_m: Optional[Tuple[float, float]] = None


class SimulationBlock(_Block):
    length_m: float = Field(gt=0)
    dz_m: float = Field(gt=0)
    gamma_per_w_m: float = Field(ge=0)
    lambda_p1_um: float = 0.532
    lambda_p2_um: float = 1.55
    lambda_s_um: Optional[float] = None
    kappa_p2_per_m: Optional[float] = Field(None, ge=0)  # None: analytic gain peak
    p1_power_w: float = Field(1.0, ge=0)
    p2_power_w: float = Field(1.0, ge=0)
    signal_seed_w: float = Field(1e-9, ge=0)
    idler_seed_w: float = Field(0.0, ge=0)
    launches: List[Literal["even", "odd", "mixed"]] = ["odd"]
    pump1_shape: Literal["cw", "gaussian"] = "cw"
    pump1_fwhm_ps: float = Field(1.0, gt=0)
    n_t: int = 256
    t_window_ps: float = Field(20.0, gt=0)
    quantum_noise: bool = False
    record_every: int = Field(1, ge=0)


class GainScanBlock(_Block):
    kappa_range_per_m: Tuple[float, float]
    n_points: int = Field(41, ge=2)
    launch: Literal["even", "odd", "mixed"] = "odd"


class JsaBlock(_Block):
    sigma_p1_nm: float = Field(gt=0)
    sigma_p2_nm: Optional[float] = Field(None, gt=0)
    length_mm: float = Field(gt=0)
    lambda_s_um: Optional[float] = None  # None: phase-matched root near process.lambda_s_um
    n_grid: int = Field(256, ge=8)
    apodization: Literal["uniform", "raised_cosine", "gaussian"] = "uniform"
    n_profile_samples: int = Field(257, ge=64)
    search_window_um: float = Field(0.1, gt=0)


class SearchBlock(_Block):
    lambda_s_um: float = 1.342
    tolerance_per_m: Optional[float] = Field(None, gt=0)
    require_gvm: bool = True
    coupling_model: Literal["rect", "exponential"] = "rect"
    bounds_um: Dict[str, Tuple[float, float]]
    n_samples: Union[int, Dict[str, int]] = 3
    refine: bool = False
    maxiter: int = Field(200, ge=1)
    gvm_weight: float = Field(10.0, ge=0)
    max_evaluations: int = Field(4096, ge=1)


class RunConfig(_Block):
    scenario: str
    output_dir: Optional[str] = None
    seed: int = Field(0, ge=0, lt=2**64)
    dispersion: DispersionBlock
    coupling: CouplingBlock = CouplingBlock()
    process: Optional[ProcessBlock] = None
    contours: Optional[ContoursBlock] = None
    simulation: Optional[SimulationBlock] = None
    gain_scan: Optional[GainScanBlock] = None
    jsa: Optional[JsaBlock] = None
    search: Optional[SearchBlock] = None

    @model_validator(mode="after")
    def _consistent(self):
        d = self.dispersion
        if d.kind == "table" and not d.table_a:
            raise ValueError("dispersion.kind 'table' needs table_a")
        c = self.coupling
        if c.model == "constant" and c.kappa_per_m is None:
            raise ValueError("coupling.model 'constant' needs kappa_per_m")
        if c.model == "fiber" and c.separation_um is None:
            raise ValueError("coupling.model 'fiber' needs separation_um")
        if c.model == "table" and not c.table:
            raise ValueError("coupling.model 'table' needs table")
        if c.model in ("rect", "exponential") and d.kind != "rect":
            raise ValueError(f"coupling.model {c.model!r} needs dispersion.kind 'rect'")
        return self


# ---- loading with line diagnostics


def _line_of(text, loc):
    """Best-effort line number of the JSON key path ``loc`` in ``text``."""
    pos, found = 0, None
    for part in loc:
        if not isinstance(part, str):
            continue
        m = re.compile(r'"%s"\s*:' % re.escape(part)).search(text, pos)
        if m is None:
            break
        pos, found = m.end(), m.start()
    return None if found is None else text.count("\n", 0, found) + 1


def load_config(path) -> Tuple[RunConfig, Path]:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg} (column {exc.colno})", exc.lineno) from None
    try:
        return RunConfig.model_validate(raw), path.parent
    except ValidationError as exc:
        err = exc.errors()[0]
        loc = tuple(err["loc"])
        where = ".".join(str(p) for p in loc) or "<root>"
        msg = err["msg"]
        if err["type"] == "extra_forbidden":
            msg = "unknown key (numeric fields need a unit suffix such as _um, _per_m, _w, _nm, _mm)"
        extra = f" ({len(exc.errors()) - 1} more)" if len(exc.errors()) > 1 else ""
        raise ConfigError(f"{where}: {msg}{extra}", _line_of(text, loc)) from None


def canonical_json(obj):
    return json.dumps(obj, sort_keys=True, separators=(",", ":"), allow_nan=True)


def config_hash(cfg: RunConfig):
    return hashlib.sha256(canonical_json(cfg.model_dump(mode="json")).encode()).hexdigest()


# ---- builders


def _resolve(base: Path, p):
    q = Path(p)
    return q if q.is_absolute() else base / q


def build_guides(cfg: RunConfig, base: Path):
    d = cfg.dispersion
    if d.kind == "fiber":
        return FiberLP01(FiberParams(d.core_radius_um, d.index_step)), None
    if d.kind == "rect":
        g = d.geometry.build()
        return RectEIM(g.w_a_um, g.h_a_um, d.polarization), RectEIM(g.w_b_um, g.h_b_um, d.polarization)
    a = read_dispersion_csv(_resolve(base, d.table_a))
    b = read_dispersion_csv(_resolve(base, d.table_b)) if d.table_b else None
    return a, b


def build_coupling(cfg: RunConfig, base: Path, lp1=None, lp2=None):
    c, d = cfg.coupling, cfg.dispersion
    if c.model == "none":
        return None
    if c.model == "constant":
        return constant_coupling(c.kappa_per_m)
    if c.model == "fiber":
        return FiberCoupling(FiberParams(d.core_radius_um, d.index_step), c.separation_um)
    if c.model == "rect":
        return RectCoupling(d.geometry.build(), d.polarization)
    if c.model == "exponential":
        if lp1 is None:
            raise ConfigError("coupling.model 'exponential' needs a process block")
        return rect_exponential_fit(d.geometry.build(), lp1, lp2, d.polarization)
    return read_coupling_csv(_resolve(base, c.table))


def _need(cfg, name):
    block = getattr(cfg, name)
    if block is None:
        raise ConfigError(f"this command needs a '{name}' block")
    return block


def build_process(cfg: RunConfig, base: Path) -> ProcessConfig:
    p = _need(cfg, "process")
    a, b = build_guides(cfg, base)
    return ProcessConfig(a, p.lambda_p1_um, p.lambda_p2_um, guide_b=b,
                         coupling=build_coupling(cfg, base, p.lambda_p1_um, p.lambda_p2_um),
                         gamma_per_w_m=p.gamma_per_w_m, power_w=p.power_w, branch=p.branch,
                         supermode_fields=p.supermode_fields)


def build_simulation(cfg: RunConfig, base: Path, seed, launch) -> SimulationConfig:
    s = _need(cfg, "simulation")
    a, b = build_guides(cfg, base)
    sim = SimulationConfig(
        a, s.length_m, s.dz_m, s.gamma_per_w_m, lambda_p1_um=s.lambda_p1_um,
        lambda_p2_um=s.lambda_p2_um, lambda_s_um=s.lambda_s_um, guide_b=b,
        p1_power_w=s.p1_power_w, p2_power_w=s.p2_power_w, signal_seed_w=s.signal_seed_w,
        idler_seed_w=s.idler_seed_w, launch=launch, pump1_shape=s.pump1_shape,
        pump1_fwhm_ps=s.pump1_fwhm_ps, n_t=s.n_t, t_window_ps=s.t_window_ps,
        noise_seed=seed if s.quantum_noise else None,
    )
    k = s.kappa_p2_per_m if s.kappa_p2_per_m is not None else peak_kappa_analytic(sim)
    return sim.with_kappa_p2(k)


# ---- commands; each returns (summary dict, list of written files)


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, allow_nan=True)
        fh.write("\n")


def _finite(x):
    return None if x is None or not math.isfinite(x) else float(x)


def cmd_contours(cfg, base, out: Path, threads, seed):
    proc = build_process(cfg, base)
    c = _need(cfg, "contours")
    kw = dict(n_signal=c.n_signal, span=c.span, pad_um=c.pad_um, tol=c.tolerance_per_m, threads=threads)
    files, entries = [], []

    def emit(pc, kappa, name):
        cs = solve_contours(pc, c.lambda_p1_range_um, c.n_samples, **kw)
        path = out / name
        write_contours_csv(path, cs, pc)
        files.append(path)
        ends = [[float(ln[:, 1].min()), float(ln[:, 1].max())] for ln in cs.polylines]
        entries.append({"file": name, "branch": cs.label, "kappa_per_m": kappa,
                        "polylines": len(cs.polylines), "vertices": int(sum(len(ln) for ln in cs.polylines)),
                        "signal_extent_um": ends, "unresolved_brackets": len(cs.failures)})

    emit(proc.uncoupled().with_branch("none"), 0.0, "contours_dk.csv")
    for j, k in enumerate(c.kappa_list_per_m):
        for br in ("even", "odd"):
            emit(proc.with_kappa(k).with_branch(br), float(k), f"contours_k{j}_{BRANCH_LABELS[br]}.csv")
    summary = {"branches": entries, "collapse": None}
    if c.collapse_range_per_m is not None:
        br = proc.branch if proc.branch != "none" else "odd"
        r = collapse_kappa(proc.with_branch(br), c.collapse_range_per_m, n_signal=c.n_signal)
        summary["collapse"] = {"branch": BRANCH_LABELS[br], "kappa_per_m": r.kappa_per_m,
                               "closed_form_per_m": r.closed_form_per_m,
                               "degenerate_um": r.degenerate_um, "last_root_um": r.last_root_um}
    path = out / "contours_summary.json"
    _write_json(path, summary)
    return summary, files + [path]


def cmd_gain_scan(cfg, base, out, threads, seed):
    g = _need(cfg, "gain_scan")
    sim = build_simulation(cfg, base, seed, g.launch)
    scan = gain_scan(sim, g.kappa_range_per_m, g.n_points, threads=threads)
    p = out / "gain_scan.csv"
    write_gain_csv(p, scan)
    summary = {"launch": g.launch, "peak_kappa_per_m": scan.peak_kappa, "peak_gain_db": scan.peak_gain_db,
               "bandwidth_3db_per_m": scan.bandwidth(), "analytic_peak_kappa_per_m": peak_kappa_analytic(sim)}
    q = out / "gain_scan_summary.json"
    _write_json(q, summary)
    return summary, [p, q]


def cmd_propagate(cfg, base, out, threads, seed):
    s = _need(cfg, "simulation")
    runs, files = {}, []
    for launch in s.launches:
        sim = build_simulation(cfg, base, seed, launch)
        rec = propagate(sim, record_every=s.record_every, workers=threads)
        p = out / f"propagate_{launch}.csv"
        write_record_csv(p, rec)
        files.append(p)
        info = {"kappa_p2_per_m": sim.kappa_per_m[1], "signal_gain_db": rec.signal_gain_db(),
                "manley_rowe_residual": rec.manley_rowe_residual(), "warnings": list(rec.warnings)}
        if launch == "odd" and len(rec.z) > 8 and rec.total("i")[-1] > 0:
            gfit, _ = fit_growth_exponent(rec.z, rec.total("i"))
            info["fitted_exponent_per_m"] = gfit
            info["analytic_exponent_per_m"] = _finite(small_signal_gain(sim).g)
        if launch == "mixed" and len(rec.z) > 8:
            stair, pump = staircase_period(rec.z, rec.total("i"), rec.guide("p2", "A"))
            info["staircase_period_m"] = _finite(stair)
            info["pump2_a_period_m"] = _finite(pump)
        runs[launch] = info
    q = out / "propagate_summary.json"
    _write_json(q, runs)
    return runs, files + [q]


def _jsa_setup(cfg, base):
    proc = build_process(cfg, base)
    j = _need(cfg, "jsa")
    pump = PumpSpec(proc.lambda_p1_um, j.sigma_p1_nm, proc.lambda_p2_um, j.sigma_p2_nm)
    length = j.length_mm * 1e-3
    return proc, j, pump, length


def _centre(proc, j, cfg):
    if j.lambda_s_um is not None:
        return j.lambda_s_um
    near = cfg.process.lambda_s_um or proc.degenerate_um
    ls = phase_matched_signal(proc, near, window_um=j.search_window_um)
    if ls is None:
        raise DomainError(f"no phase-matched signal within {j.search_window_um} µm of {near} µm")
    return ls


def _profile(j, length):
    if j.apodization == "uniform":
        return None
    make = ApodizationProfile.raised_cosine if j.apodization == "raised_cosine" else ApodizationProfile.gaussian
    return make(length, j.n_profile_samples)


def cmd_jsa(cfg, base, out, threads, seed):
    proc, j, pump, length = _jsa_setup(cfg, base)
    ls = _centre(proc, j, cfg)
    grid = default_grid(proc, pump, length, ls, n=j.n_grid)
    js = build_jsa(proc, pump, grid, length, profile=_profile(j, length))
    res = schmidt(js)
    p, q = out / "jsi.csv", out / "purity.json"
    write_jsi_csv(p, js)
    write_schmidt_json(q, res)
    rep = gvm_report(proc, ls)
    summary = {"lambda_s_um": ls, "lambda_i_um": rep.lambda_um["i"], "purity": res.purity,
               "schmidt_number": res.schmidt_number, "group_index": rep.group_index,
               "gvm_between": rep.between, "gvm_margin": rep.margin}
    r = out / "jsa_summary.json"
    _write_json(r, summary)
    return summary, [p, q, r]


def cmd_purity(cfg, base, out, threads, seed):
    """Purity of the configured design, of its κ-disabled twin and of apodized variants."""
    proc, j, pump, length = _jsa_setup(cfg, base)
    rows = {}
    for name, pc in (("coupled", proc), ("uncoupled", proc.uncoupled())):
        ls = _centre(pc, j, cfg)
        grid = default_grid(pc, pump, length, ls, n=j.n_grid)
        entry = {"lambda_s_um": ls}
        for apod in ("uniform", "raised_cosine"):
            prof = None if apod == "uniform" else ApodizationProfile.raised_cosine(length, j.n_profile_samples)
            js = build_jsa(pc, pump, grid, length, profile=prof)
            entry[apod] = schmidt(js).purity
        rows[name] = entry
    # side lobes of the phase-matching function along Δk, uniform vs raised cosine
    dk = np.linspace(-40, 40, 4001) * (2 * np.pi / length)
    rc = ApodizationProfile.raised_cosine(length, j.n_profile_samples)
    rows["side_lobe_ratio"] = {"uniform": side_lobe_ratio(dk, pm_branch(dk, length)),
                               "raised_cosine": side_lobe_ratio(dk, pm_branch_apodized(rc, dk))}
    q = out / "purity_comparison.json"
    _write_json(q, rows)
    return rows, [q]


def cmd_sweep(cfg, base, out, threads, seed):
    s = _need(cfg, "search")
    if cfg.dispersion.kind != "rect":
        raise ConfigError("sweep needs dispersion.kind 'rect'")
    p = _need(cfg, "process")
    j = cfg.jsa
    length = j.length_mm * 1e-3 if j is not None else 15e-3
    tol = s.tolerance_per_m if s.tolerance_per_m is not None else 2 * math.pi / length / 10
    try:
        target = DesignTarget(lambda_s_um=s.lambda_s_um, lambda_p1_um=p.lambda_p1_um,
                              lambda_p2_um=p.lambda_p2_um, length_m=length, tolerance_per_m=tol,
                              require_gvm=s.require_gvm, branch=p.branch if p.branch != "none" else "odd",
                              polarization=cfg.dispersion.polarization, coupling_model=s.coupling_model,
                              bounds={k: tuple(v) for k, v in s.bounds_um.items()},
                              base=cfg.dispersion.geometry.build(), gvm_weight=s.gvm_weight,
                              budget=s.max_evaluations)
        ranked = grid_sweep(target, s.n_samples, threads=threads)
    except DomainError:
        raise
    except ValueError as exc:  # bad axis names, empty bounds, budget
        raise ConfigError(f"search: {exc}") from None
    path = out / "sweep.jsonl"
    write_report(path, ranked)
    summary = {"evaluated": len(ranked), "best": ranked[0].as_dict()}
    if s.refine and math.isfinite(ranked[0].objective):
        r = refine(ranked[0], target, maxiter=s.maxiter)
        summary["refined"] = r.candidate.as_dict()
        summary["refine_iterations"] = r.iterations
        summary["refine_converged"] = r.converged
    q = out / "sweep_summary.json"
    _write_json(q, summary)
    return summary, [path, q]


COMMANDS = {
    "contours": cmd_contours,
    "gain-scan": cmd_gain_scan,
    "propagate": cmd_propagate,
    "jsa": cmd_jsa,
    "purity": cmd_purity,
    "sweep": cmd_sweep,
}


def _sha256(path):
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def write_manifest(out: Path, command, cfg: RunConfig, seed, files):
    man = {
        "command": command,
        "scenario": cfg.scenario,
        "config_sha256": config_hash(cfg),
        "config": cfg.model_dump(mode="json"),
        "seed": seed,
        "kernel_backend": kernels.BACKEND,
        "versions": {"coupledfwm": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__, "pydantic": pydantic.VERSION},
        "outputs": {Path(f).name: _sha256(f) for f in files},
    }
    path = out / "manifest.json"
    _write_json(path, man)
    return path


def run(command, config_path, out=None, threads=1, seed=None):
    """Run one command; returns the summary dict.  Raises the package's error types."""
    cfg, base = load_config(config_path)
    seed = cfg.seed if seed is None else int(seed)
    if not 0 <= seed < 2**64:
        raise ConfigError("seed must be an unsigned 64-bit integer")
    out = Path(out) if out is not None else _resolve(base, cfg.output_dir or f"out_{cfg.scenario}")
    out.mkdir(parents=True, exist_ok=True)
    summary, files = COMMANDS[command](cfg, base, out, max(1, int(threads)), seed)
    write_manifest(out, command, cfg, seed, files)
    return summary


def build_parser():
    ap = argparse.ArgumentParser(prog="coupledfwm", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=f"coupledfwm {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        sp = sub.add_parser(name)
        sp.add_argument("--config", required=True, help="JSON run configuration")
        sp.add_argument("--out", default=None, help="output directory (default: from config)")
        sp.add_argument("--threads", type=int, default=1)
        sp.add_argument("--seed", type=int, default=None, help="unsigned 64-bit seed (overrides config)")
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        summary = run(args.command, args.config, args.out, args.threads, args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except DomainError as exc:
        print(f"domain error: {exc}", file=sys.stderr)
        return EXIT_DOMAIN
    except NumericalError as exc:
        print(f"numerical error: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except ValueError as exc:  # parameter rejected by a module constructor
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    print(json.dumps(summary, sort_keys=True, indent=2, allow_nan=True))
    return EXIT_OK


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
