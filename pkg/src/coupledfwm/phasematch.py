"""Dual-pump FWM phase matching in a coupled waveguide pair.

Mismatch convention::

    Δk = β_p1 + β_p2 - β_s - β_i - γP

Each β is taken from the provider assigned to the field: the isolated FWM
guide (A) for branch ``"none"``, or the selected supermode branch.  With
``supermode_fields="pump2"`` only pump 2 is moved onto the supermode (the
symmetric-fiber picture, Δk± = Δk ± κ_p2); with ``"all"`` every field uses
the branch, which is what the group-velocity analysis of the asymmetric
silicon pair needs.
"""

from __future__ import annotations

import csv
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .coupledmode import CouplingModel, SupermodeProvider, constant_coupling
from .dispersion import DispersionProvider, group_index, wavelength_to_omega
from .errors import DomainError, NumericalError

BRANCHES = ("none", "even", "odd")
BRANCH_LABELS = {"none": "dk", "even": "dk_plus", "odd": "dk_minus"}
FIELDS = ("p1", "p2", "s", "i")

DEFAULT_TOL = 1e-3  # 1/m


@dataclass(frozen=True)
class ProcessConfig:
    """Providers, pumps and nonlinearity of one dual-pump FWM process.

    ``guide_b=None`` means a symmetric pair (guide B identical to A).
    ``coupling=None`` disables coupling (κ ≡ 0).
    """

    guide_a: DispersionProvider
    lambda_p1_um: float
    lambda_p2_um: float
    guide_b: Optional[DispersionProvider] = None
    coupling: Optional[CouplingModel] = None
    gamma_per_w_m: float = 0.0
    power_w: float = 0.0
    branch: str = "none"
    supermode_fields: str = "pump2"

    def __post_init__(self):
        if not self.lambda_p1_um < self.lambda_p2_um:
            raise ValueError("need lambda_p1 < lambda_p2")
        if self.lambda_p1_um <= 0:
            raise ValueError("wavelengths must be positive")
        if self.gamma_per_w_m < 0 or self.power_w < 0:
            raise ValueError("gamma and power must be >= 0")
        if self.branch not in BRANCHES:
            raise ValueError(f"branch must be one of {BRANCHES}")
        if self.supermode_fields not in ("pump2", "all"):
            raise ValueError("supermode_fields must be 'pump2' or 'all'")

    @property
    def gamma_p(self):
        return self.gamma_per_w_m * self.power_w

    @property
    def degenerate_um(self):
        return 2.0 / (1.0 / self.lambda_p1_um + 1.0 / self.lambda_p2_um)

    def with_branch(self, branch):
        return replace(self, branch=branch)

    def with_kappa(self, kappa_per_m):
        """Copy with a wavelength-independent coupling constant."""
        return replace(self, coupling=constant_coupling(kappa_per_m))

    def uncoupled(self):
        return replace(self, coupling=None)


def idler_wavelength(lp1, lp2, ls):
    """Idler wavelength (µm) from ``1/λ_i = 1/λ_p1 + 1/λ_p2 - 1/λ_s``."""
    inv = 1.0 / np.asarray(lp1, float) + 1.0 / np.asarray(lp2, float) - 1.0 / np.asarray(ls, float)
    if np.any(inv <= 0):
        raise DomainError("energy conservation gives a non-positive idler frequency")
    out = 1.0 / inv
    return out if np.ndim(out) else float(out)


def field_provider(config: ProcessConfig, fld: str) -> DispersionProvider:
    """Provider giving β for field ``fld`` under the configured branch."""
    if fld not in FIELDS:
        raise ValueError(f"unknown field {fld!r}")
    if config.branch == "none" or config.coupling is None and config.guide_b is None:
        return config.guide_a
    if config.supermode_fields == "pump2" and fld != "p2":
        return config.guide_a
    coupling = config.coupling if config.coupling is not None else constant_coupling(0.0)
    guide_b = config.guide_b if config.guide_b is not None else config.guide_a
    return SupermodeProvider(config.guide_a, guide_b, coupling, config.branch)


def _mismatch_omega(config: ProcessConfig, ws, wi, wp1=None):
    wp1 = wavelength_to_omega(config.lambda_p1_um) if wp1 is None else wp1
    wp2 = wavelength_to_omega(config.lambda_p2_um)
    prov = {f: field_provider(config, f) for f in FIELDS}
    return (prov["p1"].beta(wp1) + prov["p2"].beta(wp2)
            - prov["s"].beta(ws) - prov["i"].beta(wi) - config.gamma_p)


def phase_mismatch(config: ProcessConfig, ls):
    """Δk (1/m) on the configured branch at signal wavelength ``ls`` (µm)."""
    li = idler_wavelength(config.lambda_p1_um, config.lambda_p2_um, ls)
    out = _mismatch_omega(config, wavelength_to_omega(ls), wavelength_to_omega(li))
    return out if np.ndim(out) else float(out)


def mismatch_omega(config: ProcessConfig, omega_s, omega_i):
    """Δk on a (ω_s, ω_i) grid with a CW pump 2.

    Energy conservation fixes the contributing pump-1 component at
    ``ω_p1 = ω_s + ω_i - ω_p2``, so β_p1 follows the grid.
    """
    ws = np.asarray(omega_s, float)
    wi = np.asarray(omega_i, float)
    wp1 = ws + wi - wavelength_to_omega(config.lambda_p2_um)
    return _mismatch_omega(config, ws, wi, wp1)


# --------------------------------------------------------------------------
# contours


@dataclass
class ContourSet:
    """Zero-mismatch polylines in the (λ_p1, λ_s) plane for one branch."""

    branch: str
    lambda_p2_um: float
    polylines: list = field(default_factory=list)  # each (n, 2): λ_p1, λ_s
    failures: list = field(default_factory=list)  # (λ_p1, λ_s) of unconverged roots

    @property
    def label(self):
        return BRANCH_LABELS[self.branch]

    def vertices(self):
        if not self.polylines:
            return np.empty((0, 2))
        return np.vstack(self.polylines)

    def __len__(self):
        return len(self.polylines)


def _roots_1d(func, grid, tol, max_iter=100):
    """All sign changes of ``func`` over ``grid``, refined to ``|f| < tol``.

    Vectorised Illinois (modified regula falsi) on every bracket at once.
    Returns (roots, failed) arrays; ``func`` must accept arrays.
    """
    vals = func(grid)
    roots = list(grid[vals == 0.0])
    sc = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if sc.size == 0:
        return np.array(sorted(roots)), np.empty(0)
    a, b = grid[sc].copy(), grid[sc + 1].copy()
    fa, fb = vals[sc].copy(), vals[sc + 1].copy()
    x = np.empty_like(a)
    fx = np.full_like(a, np.inf)
    side = np.zeros(a.shape, int)
    for _ in range(max_iter):
        live = np.abs(fx) >= tol
        if not live.any():
            break
        xn = (a * fb - b * fa) / (fb - fa)
        # fall back to bisection if the secant leaves the bracket
        bad = ~((xn > np.minimum(a, b)) & (xn < np.maximum(a, b)))
        xn = np.where(bad, 0.5 * (a + b), xn)
        if np.all(xn[live] == x[live]):
            break
        x = np.where(live, xn, x)
        fx = np.where(live, func(x), fx)
        left = live & (np.sign(fx) == np.sign(fa))
        right = live & ~left
        # Illinois: halve the retained end point value after a repeated side
        fb = np.where(left & (side == -1), fb * 0.5, fb)
        fa = np.where(right & (side == 1), fa * 0.5, fa)
        a = np.where(left, x, a)
        fa = np.where(left, fx, fa)
        b = np.where(right, x, b)
        fb = np.where(right, fx, fb)
        side = np.where(left, -1, np.where(right, 1, side))
    ok = np.abs(fx) < tol
    roots.extend(x[ok])
    return np.array(sorted(roots)), x[~ok]


def _signal_grid(config, lp1, span, pad_um, n):
    hi = config.lambda_p2_um if span == "full" else 2.0 / (1.0 / lp1 + 1.0 / config.lambda_p2_um)
    if pad_um > 0:
        return np.linspace(lp1 - pad_um, hi + (pad_um if span == "full" else 0.0), n)
    return np.linspace(lp1, hi, n + 1)[1:]  # open at λ_s = λ_p1


def _assemble(points, max_jump):
    """Nearest-neighbour continuation of per-sample root lists into polylines."""
    finished, active = [], []
    for x, ys in points:
        used = np.zeros(len(ys), bool)
        still = []
        for line in active:
            last = line[-1][1]
            if len(ys):
                d = np.abs(ys - last)
                d[used] = np.inf
                j = int(np.argmin(d))
                if d[j] <= max_jump:
                    used[j] = True
                    line.append((x, ys[j]))
                    still.append(line)
                    continue
            finished.append(line)
        for j in np.nonzero(~used)[0]:
            still.append([(x, ys[j])])
        active = still
    finished.extend(active)
    finished.sort(key=lambda ln: (ln[0][0], ln[0][1]))
    return [np.array(ln) for ln in finished]


def solve_contours(config: ProcessConfig, lp1_range, n_samples, n_signal=2001,
                   span="half", pad_um=0.0, tol=DEFAULT_TOL, threads=1) -> ContourSet:
    """Zero-mismatch contours for the configured branch.

    For every λ_p1 sample the mismatch is evaluated on ``n_signal`` signal
    wavelengths over (λ_p1, λ_deg] (``span="half"``) or (λ_p1, λ_p2)
    (``span="full"``, which also shows the signal/idler mirror image); sign
    changes are bisected to ``|Δk| < tol``.  ``pad_um`` widens the interval
    so that the trivial roots at the pump wavelengths are bracketed.
    """
    if span not in ("half", "full"):
        raise ValueError("span must be 'half' or 'full'")
    lp1_grid = np.linspace(lp1_range[0], lp1_range[1], int(n_samples))
    if np.any(lp1_grid >= config.lambda_p2_um):
        raise DomainError("lambda_p1 range must lie below lambda_p2")

    def work(lp1):
        cfg = replace(config, lambda_p1_um=float(lp1))
        grid = _signal_grid(cfg, lp1, span, pad_um, n_signal)
        return _roots_1d(lambda ls: phase_mismatch(cfg, ls), grid, tol)

    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            results = list(ex.map(work, lp1_grid))
    else:
        results = [work(x) for x in lp1_grid]

    cs = ContourSet(config.branch, config.lambda_p2_um)
    for lp1, (_, bad) in zip(lp1_grid, results):
        cs.failures.extend((float(lp1), float(b)) for b in bad)
    lp1_step = (lp1_grid[1] - lp1_grid[0]) if len(lp1_grid) > 1 else 0.0
    ls_step = (config.lambda_p2_um - lp1_grid[0] + 2 * pad_um) / (n_signal - 1)
    max_jump = max(20 * abs(ls_step), 4 * abs(lp1_step))
    cs.polylines = _assemble([(x, r) for x, (r, _) in zip(lp1_grid, results)], max_jump)
    return cs


def contour_rows(cs: ContourSet, config: ProcessConfig):
    """Rows ``(branch, λ_p1, λ_s, λ_i, mismatch)`` re-evaluated at every vertex."""
    rows = []
    for line in cs.polylines:
        for lp1, ls in line:
            cfg = replace(config, lambda_p1_um=float(lp1), branch=cs.branch)
            rows.append((cs.label, float(lp1), float(ls),
                         idler_wavelength(lp1, cfg.lambda_p2_um, ls), phase_mismatch(cfg, ls)))
    return rows


def write_contours_csv(path, cs: ContourSet, config: ProcessConfig):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["branch", "lambda_p1_um", "lambda_s_um", "lambda_i_um", "mismatch_per_m"])
        for label, lp1, ls, li, dk in contour_rows(cs, config):
            w.writerow([label, repr(lp1), repr(ls), repr(li), repr(dk)])


# --------------------------------------------------------------------------
# collapse of the coupled contour


@dataclass(frozen=True)
class CollapseResult:
    kappa_per_m: float
    degenerate_um: float  # λ_s = λ_i at the collapse point
    last_root_um: float  # signal root just below κ*
    closed_form_per_m: float  # ±(Δk_uncoupled(λ_deg) - γP)
    iterations: int


def _has_root(config, grid):
    v = phase_mismatch(config, grid)
    return bool(np.any(v == 0) or np.any(np.sign(v[:-1]) * np.sign(v[1:]) < 0))


def collapse_kappa(config: ProcessConfig, kappa_range, n_signal=2001, tol_kappa=1e-4,
                   max_iter=200) -> CollapseResult:
    """Coupling constant at which the coupled contour shrinks to the degenerate point.

    Bisection on κ (wavelength independent) for the existence of a root of
    the configured branch over (λ_p1, λ_deg].
    """
    if config.branch == "none":
        raise ValueError("collapse_kappa needs branch 'even' or 'odd'")
    k_lo, k_hi = map(float, kappa_range)
    grid = _signal_grid(config, config.lambda_p1_um, "half", 0.0, n_signal)
    if not _has_root(config.with_kappa(k_lo), grid):
        raise DomainError("no phase-matching contour at the start of the kappa range")
    if _has_root(config.with_kappa(k_hi), grid):
        raise DomainError("contour does not collapse within the kappa range")
    it = 0
    while k_hi - k_lo > tol_kappa and it < max_iter:
        mid = 0.5 * (k_lo + k_hi)
        if _has_root(config.with_kappa(mid), grid):
            k_lo = mid
        else:
            k_hi = mid
        it += 1
    cfg = config.with_kappa(k_lo)
    roots, _ = _roots_1d(lambda ls: phase_mismatch(cfg, ls), grid, DEFAULT_TOL)
    if roots.size == 0:
        raise NumericalError("lost the root while refining the collapse point")
    deg = config.degenerate_um
    last = float(roots[np.argmin(np.abs(roots - deg))])
    # uncoupled mismatch without the γP offset; exact for supermode_fields="pump2"
    dk0 = phase_mismatch(config.uncoupled().with_branch("none"), deg) + config.gamma_p
    closed = dk0 - config.gamma_p if config.branch == "odd" else config.gamma_p - dk0
    return CollapseResult(0.5 * (k_lo + k_hi), deg, last, float(closed), it)


# --------------------------------------------------------------------------
# group-velocity matching


@dataclass(frozen=True)
class GVMReport:
    """Group indices on the selected branch and the ordering verdicts.

    ``between``: n_g(p1) lies between n_g(s) and n_g(i) (either order).
    ``ordered``: n_g(s) >= n_g(p1) >= n_g(i), i.e. v_s <= v_p1 <= v_i.
    ``margin``: min of the two gaps n_g(p1) to its neighbours, signed so that
    a positive value means ``between`` holds.
    """

    lambda_um: dict
    group_index: dict
    between: bool
    ordered: bool
    margin: float

    @property
    def satisfied(self):
        return self.between


def gvm_report(config: ProcessConfig, ls) -> GVMReport:
    li = idler_wavelength(config.lambda_p1_um, config.lambda_p2_um, ls)
    lams = {"p1": config.lambda_p1_um, "p2": config.lambda_p2_um, "s": float(ls), "i": float(li)}
    ng = {f: float(group_index(field_provider(config, f), wavelength_to_omega(lams[f])))
          for f in FIELDS}
    lo, hi = min(ng["s"], ng["i"]), max(ng["s"], ng["i"])
    margin = min(ng["p1"] - lo, hi - ng["p1"])
    tiny = 1e-9 * max(abs(hi), 1.0)  # finite-difference noise in n_g
    between = margin >= -tiny
    ordered = ng["s"] + tiny >= ng["p1"] >= ng["i"] - tiny
    return GVMReport(lams, ng, bool(between), bool(ordered), float(margin))


__all__ = [
    "BRANCHES",
    "BRANCH_LABELS",
    "CollapseResult",
    "ContourSet",
    "GVMReport",
    "ProcessConfig",
    "collapse_kappa",
    "contour_rows",
    "field_provider",
    "gvm_report",
    "idler_wavelength",
    "mismatch_omega",
    "phase_mismatch",
    "solve_contours",
    "write_contours_csv",
]
