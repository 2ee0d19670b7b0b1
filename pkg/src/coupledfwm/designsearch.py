"""Geometry search for simultaneous phase matching and group-velocity matching.

Objective for a geometry (units: a full coherence-length mismatch 2π/L
scores 1)::

    J = (max(0, |Δk±| - tol) / (2π/L))² + w_gvm · max(0, -margin)²

``margin`` is the GVM margin from :func:`coupledfwm.phasematch.gvm_report`
(how far n_g(p1) sits inside the signal/idler interval; negative when the
ordering fails).  Mode-solver domain errors score +∞.
"""

from __future__ import annotations

import itertools
import json
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, replace

import numpy as np
from scipy.optimize import minimize

from .coupledmode import RectCoupling, rect_exponential_fit
from .dispersion import DeviceGeometry, RectEIM
from .errors import DomainError
from .phasematch import ProcessConfig, gvm_report, phase_mismatch

AXES = ("w_a_um", "h_a_um", "w_b_um", "h_b_um", "separation_um")
TABLE1 = DeviceGeometry()


@dataclass(frozen=True)
class DesignTarget:
    """Wavelengths, tolerances and search box.

    ``bounds`` maps geometry fields (see ``AXES``) to (lo, hi) intervals;
    fields absent from ``bounds`` stay at ``base``.  With
    ``co_optimize_p1`` the pump-1 wavelength becomes an extra search axis
    bounded by ``lambda_p1_bounds_um``.
    """

    lambda_s_um: float = 1.342
    lambda_p1_um: float = 1.265
    lambda_p2_um: float = 1.59
    length_m: float = 15e-3
    tolerance_per_m: float = 2 * math.pi / 15e-3 / 10
    require_gvm: bool = True
    branch: str = "odd"
    polarization: str = "TE"
    coupling_model: str = "rect"  # "rect" | "exponential"
    bounds: dict = field(default_factory=dict)
    base: DeviceGeometry = TABLE1
    gvm_weight: float = 10.0
    budget: int = 4096
    co_optimize_p1: bool = False
    lambda_p1_bounds_um: tuple = (1.22, 1.30)

    def __post_init__(self):
        if not self.tolerance_per_m > 0:
            raise ValueError("tolerance must be > 0")
        for k, (lo, hi) in self.bounds.items():
            if k not in AXES:
                raise ValueError(f"unknown geometry axis {k!r}")
            if not lo <= hi:
                raise ValueError(f"empty bounds for {k}")
        if self.coupling_model not in ("rect", "exponential"):
            raise ValueError("coupling_model must be 'rect' or 'exponential'")

    @property
    def free_axes(self):
        axes = [a for a in AXES if a in self.bounds]
        return axes + (["lambda_p1_um"] if self.co_optimize_p1 else [])

    def box(self):
        b = [self.bounds[a] for a in AXES if a in self.bounds]
        if self.co_optimize_p1:
            b.append(tuple(self.lambda_p1_bounds_um))
        return b


@dataclass(frozen=True)
class Candidate:
    geometry: DeviceGeometry
    objective: float
    residual_per_m: float  # Δk on the branch at the target signal
    gvm_margin: float
    lambda_p1_um: float
    note: str = ""

    def as_dict(self):
        d = {
            "geometry": asdict(self.geometry),
            "objective": self.objective,
            "residual_per_m": self.residual_per_m,
            "gvm_margin": self.gvm_margin,
            "lambda_p1_um": self.lambda_p1_um,
        }
        if self.note:
            d["note"] = self.note
        return d


def process_for(geometry: DeviceGeometry, target: DesignTarget, lambda_p1_um=None,
                coupled=True) -> ProcessConfig:
    """The silicon-pair process used by the objective."""
    lp1 = target.lambda_p1_um if lambda_p1_um is None else lambda_p1_um
    a = RectEIM(geometry.w_a_um, geometry.h_a_um, target.polarization)
    b = RectEIM(geometry.w_b_um, geometry.h_b_um, target.polarization)
    if not coupled:
        cpl = None
    elif target.coupling_model == "rect":
        cpl = RectCoupling(geometry, target.polarization)
    else:
        cpl = rect_exponential_fit(geometry, lp1, target.lambda_p2_um, target.polarization)
    return ProcessConfig(a, lp1, target.lambda_p2_um, guide_b=b, coupling=cpl,
                         branch=target.branch, supermode_fields="all")


def evaluate(geometry: DeviceGeometry, target: DesignTarget, lambda_p1_um=None) -> Candidate:
    lp1 = target.lambda_p1_um if lambda_p1_um is None else float(lambda_p1_um)
    try:
        proc = process_for(geometry, target, lp1)
        dk = float(phase_mismatch(proc, target.lambda_s_um))
        margin = gvm_report(proc, target.lambda_s_um).margin if target.require_gvm else 0.0
    except (DomainError, ValueError) as exc:
        return Candidate(geometry, math.inf, math.nan, math.nan, lp1, note=str(exc))
    norm = 2 * math.pi / target.length_m
    j = (max(0.0, abs(dk) - target.tolerance_per_m) / norm) ** 2
    if target.require_gvm:
        j += target.gvm_weight * max(0.0, -margin) ** 2
    return Candidate(geometry, float(j), dk, float(margin), lp1)


def objective(geometry: DeviceGeometry, target: DesignTarget, lambda_p1_um=None) -> float:
    """Scalar objective (≥ 0, +∞ outside the mode solver's domain)."""
    return evaluate(geometry, target, lambda_p1_um).objective


def _point(target: DesignTarget, x):
    kw = dict(zip(target.free_axes, x))
    lp1 = kw.pop("lambda_p1_um", None)
    try:
        geom = replace(target.base, **kw)
    except ValueError as exc:  # overlapping guides etc.
        return None, lp1, str(exc)
    return geom, lp1, ""


def _evaluate_point(target, x):
    geom, lp1, err = _point(target, x)
    if geom is None:
        # no geometry can be built; keep the base and record the attempted point
        at = ", ".join(f"{a}={v!r}" for a, v in zip(target.free_axes, x))
        return Candidate(target.base, math.inf, math.nan, math.nan,
                         target.lambda_p1_um if lp1 is None else lp1,
                         note=f"{err or 'invalid geometry'} ({at})"), tuple(x)
    return evaluate(geom, target, lp1), tuple(x)


def _rank_key(item):
    cand, x = item
    return (cand.objective, x)


def grid_sweep(target: DesignTarget, samples_per_axis, threads=1) -> list:
    """Exhaustive sweep over the search box, ranked by (objective, coordinates).

    ``samples_per_axis`` is an int or a dict per free axis.  Invalid
    geometries rank last with objective +∞.
    """
    axes = target.free_axes
    if not axes:
        raise ValueError("no free axes: give bounds or enable co_optimize_p1")
    box = target.box()
    if isinstance(samples_per_axis, dict):
        counts = [int(samples_per_axis[a]) for a in axes]
    else:
        counts = [int(samples_per_axis)] * len(axes)
    total = int(np.prod(counts))
    if total > target.budget:
        raise ValueError(f"sweep of {total} points exceeds the budget of {target.budget}")
    ticks = [np.linspace(lo, hi, n) if n > 1 else np.array([0.5 * (lo + hi)]) for (lo, hi), n in zip(box, counts)]
    pts = [tuple(float(v) for v in p) for p in itertools.product(*ticks)]
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            res = list(ex.map(lambda p: _evaluate_point(target, p), pts))
    else:
        res = [_evaluate_point(target, p) for p in pts]
    res.sort(key=_rank_key)
    return [c for c, _ in res]


@dataclass
class RefineResult:
    candidate: Candidate
    trace: list  # best-so-far objective per iteration
    iterations: int
    converged: bool


def _coords(candidate: Candidate, target: DesignTarget):
    x = [getattr(candidate.geometry, a) for a in AXES if a in target.bounds]
    if target.co_optimize_p1:
        x.append(candidate.lambda_p1_um)
    return np.array(x, float)


def refine(candidate: Candidate, target: DesignTarget, xatol=1e-4, maxiter=200) -> RefineResult:
    """Nelder-Mead polish within the search box; never returns a worse candidate."""
    if not math.isfinite(candidate.objective):
        raise ValueError("refine needs a candidate with finite objective")
    x0 = _coords(candidate, target)
    best = {"c": candidate}
    trace = [candidate.objective]

    def fun(x):
        c, _ = _evaluate_point(target, tuple(float(v) for v in x))
        if c.objective < best["c"].objective:
            best["c"] = c
        return c.objective if math.isfinite(c.objective) else 1e300

    def cb(*_):
        trace.append(best["c"].objective)

    res = minimize(fun, x0, method="Nelder-Mead", bounds=target.box(), callback=cb,
                   options={"xatol": xatol, "fatol": math.inf, "maxiter": maxiter})
    # fatol=inf leaves the simplex-size test (xatol, in µm) as the only convergence criterion
    return RefineResult(best["c"], trace, int(res.nit), bool(res.success))


def write_report(path, candidates):
    """JSON lines, one candidate per line."""
    with open(path, "w") as fh:
        for c in candidates:
            fh.write(json.dumps(c.as_dict(), sort_keys=True, allow_nan=True) + "\n")


__all__ = [
    "AXES",
    "Candidate",
    "DesignTarget",
    "RefineResult",
    "TABLE1",
    "evaluate",
    "grid_sweep",
    "objective",
    "process_for",
    "refine",
    "write_report",
]
