"""Acceptance criteria, one test per criterion.

Each check records a ``PASS``/``FAIL`` line (with its runtime) that the
terminal summary prints after the run.  Criteria that cannot be met under
the package's dispersion model are strict xfails; the analysis is in the
decisions ledger.
"""

import math
import time
from contextlib import contextmanager
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

import coupledfwm
from coupledfwm import cli
from coupledfwm.coupledmode import constant_coupling
from coupledfwm.jsa import (
    ApodizationProfile,
    PumpSpec,
    build_jsa,
    default_grid,
    phase_matched_signal,
    pm_branch,
    pm_branch_apodized,
    pm_function,
    schmidt,
    side_lobe_ratio,
)
from coupledfwm.phasematch import (
    ProcessConfig,
    collapse_kappa,
    gvm_report,
    idler_wavelength,
    phase_mismatch,
    solve_contours,
)
from coupledfwm.propagation import (
    fit_growth_exponent,
    propagate,
    small_signal_gain,
    staircase_period,
)

RESULTS = []
SCENARIOS = Path(coupledfwm.__file__).parent / "scenarios"


class _Check:
    def __init__(self):
        self.details = []

    def note(self, fmt, *args):
        self.details.append(fmt.format(*args))

    def require(self, cond, fmt, *args):
        msg = fmt.format(*args)
        self.details.append(msg)
        assert cond, msg


@contextmanager
def criterion(label, budget_s=None, setup_s=0.0):
    """``setup_s``: time already spent in fixtures on behalf of this criterion."""
    c = _Check()
    t0 = time.perf_counter() - setup_s
    ok = False
    try:
        yield c
        ok = True
    finally:
        dt = time.perf_counter() - t0
        if ok and budget_s is not None and dt > budget_s:
            c.details.append(f"runtime {dt:.1f} s exceeds {budget_s} s")
            ok = False
        RESULTS.append(f"{'PASS' if ok else 'FAIL'}  criterion {label}  [{dt:.2f} s]  " + "; ".join(c.details))
    if budget_s is not None:
        assert dt <= budget_s, f"criterion {label}: runtime {dt:.1f} s exceeds {budget_s} s"


def _fiber_proc(fiber, kappa=250.0, branch="odd"):
    return ProcessConfig(fiber, 0.532, 1.55, coupling=constant_coupling(kappa), branch=branch)


# ---- 1


def test_criterion_1_energy_conservation():
    with criterion("1 energy conservation", budget_s=1.0) as c:
        deg = 2 / (1 / 0.532 + 1 / 1.55)
        c.require(abs(deg - 0.7921) <= 0.5e-3, "degenerate {:.5f} um", deg)
        c.require(abs(idler_wavelength(0.532, 1.55, deg) - deg) < 1e-12, "idler(deg) = deg")
        li = float(idler_wavelength(1.265, 1.590, 1.342))
        c.require(abs(li - 1.482) <= 0.002, "Table 1 idler {:.4f} um", li)


# ---- 2


def test_criterion_2_fig1b_structure(fiber):
    with criterion("2 Fig. 1b contours", budget_s=10.0) as c:
        kw = dict(span="full", pad_um=0.02, tol=1e-6)
        p = _fiber_proc(fiber)
        n = 31
        unc = solve_contours(p.uncoupled().with_branch("none"), (0.5, 0.8), n, **kw).vertices()
        at_p1 = np.abs(unc[:, 1] - unc[:, 0]) < 1e-6
        at_p2 = np.abs(unc[:, 1] - 1.55) < 1e-6
        c.require(np.all(at_p1 | at_p2) and at_p1.sum() == n and at_p2.sum() == n,
                  "uncoupled branch on both pump lines ({} + {} vertices)", at_p1.sum(), at_p2.sum())
        plus = solve_contours(p.with_branch("even"), (0.5, 0.8), n, **kw).vertices()
        minus = solve_contours(p.with_branch("odd"), (0.5, 0.8), n, **kw).vertices()
        lo_p, lo_m = plus[plus[:, 1] < 1.0], minus[minus[:, 1] < 1.0]
        hi_p, hi_m = plus[plus[:, 1] > 1.0], minus[minus[:, 1] > 1.0]
        bracket = (np.all(lo_p[:, 1] < lo_p[:, 0]) and np.all(lo_m[:, 1] > lo_m[:, 0])
                   and np.all(hi_p[:, 1] > 1.55) and np.all(hi_m[:, 1] < 1.55))
        c.require(len(plus) > 0 and len(minus) > 0 and bracket, "dk+ / dk- distinct and bracketing")
        drift = 0.0
        for br in ("even", "odd"):
            v = solve_contours(p.with_kappa(1e-3).with_branch(br), (0.5, 0.8), n, **kw).vertices()
            assert v.shape == unc.shape
            drift = max(drift, float(np.max(np.abs(v - unc))))
        c.require(drift * 1e6 < 1.0, "kappa = 1e-3 vertex drift {:.3g} pm", drift * 1e6)


# ---- 3


def test_criterion_3_collapse(fiber):
    with criterion("3 collapse kappa*", budget_s=10.0) as c:
        p = _fiber_proc(fiber)
        r = collapse_kappa(p, (1e3, 1e5))
        c.require(abs(r.last_root_um - r.degenerate_um) * 1e3 <= 1.0,
                  "last root {:.5f} um vs degenerate {:.5f} um", r.last_root_um, r.degenerate_um)
        dk_deg = float(phase_mismatch(p.uncoupled().with_branch("none"), r.degenerate_um))
        c.require(abs(r.kappa_per_m - abs(dk_deg)) < 1e-2, "kappa* {:.2f} vs |dk(deg)| {:.2f} 1/m",
                  r.kappa_per_m, abs(dk_deg))
        c.require(abs(r.kappa_per_m / 46e3 - 1) <= 0.25, "kappa* / 46e3 = {:.3f}", r.kappa_per_m / 46e3)


# ---- 4 and 5


@pytest.fixture(scope="module")
def fig2_runs(fig2_base):
    t0 = time.perf_counter()
    runs = {launch: propagate(replace(fig2_base, launch=launch)) for launch in ("odd", "even", "mixed")}
    return runs, time.perf_counter() - t0


def test_criterion_4_fig2_behaviours(fig2_base, fig2_runs):
    runs, setup = fig2_runs
    with criterion("4 Fig. 2 launches", budget_s=120.0, setup_s=setup) as c:
        odd, even, mixed = runs["odd"], runs["even"], runs["mixed"]
        g_fit, _ = fit_growth_exponent(odd.z, odd.total("i"))
        g_ss = small_signal_gain(fig2_base).g
        c.require(abs(g_fit / g_ss - 1) < 0.01, "(a) fitted g {:.3f} vs small-signal {:.3f} 1/m", g_fit, g_ss)
        c.require(even.signal_gain_db() < 0.1, "(b) even gain {:.2e} dB", even.signal_gain_db())
        stair, pump = staircase_period(mixed.z, mixed.total("i"), mixed.guide("p2", "A"))
        c.require(abs(stair / pump - 1) <= 0.05, "(c) staircase {:.4g} m vs pump-2 {:.4g} m", stair, pump)
        ratio = mixed.signal_gain_db() / odd.signal_gain_db()
        c.require(abs(ratio / 0.5 - 1) <= 0.10, "(c) mixed/odd dB ratio {:.3f}", ratio)


def test_criterion_5_conservation(fig2_base, fig2_runs):
    runs, setup = fig2_runs
    with criterion("5 conservation", budget_s=120.0, setup_s=setup) as c:
        mr = max(r.manley_rowe_residual() for r in runs.values())
        c.require(mr < 1e-6, "Manley-Rowe residual {:.2e}", mr)
        worst = 0.0
        for launch in ("odd", "even", "mixed"):
            cfg = replace(fig2_base, gamma_per_w_m=0.0, launch=launch, pump1_shape="gaussian")
            e = propagate(cfg, record_every=0).powers.sum(axis=(1, 2))
            worst = max(worst, abs(e[-1] / e[0] - 1))
        c.require(worst < 1e-8, "gamma = 0 energy drift {:.2e}", worst)
        cfg = replace(fig2_base, length_m=1e-3, launch="mixed")
        ref = propagate(replace(cfg, dz_m=1e-3 / 2048), record_every=0).final.a[0, 3]
        errs = [np.abs(propagate(replace(cfg, dz_m=1e-3 / n), record_every=0).final.a[0, 3] - ref).max()
                for n in (64, 128, 256)]
        order = float(np.min(np.log2(np.array(errs[:-1]) / np.array(errs[1:]))))
        c.require(order >= 1.9, "Strang order {:.3f}", order)


# ---- 6


def test_criterion_6_phi_oracle():
    from numpy.polynomial.legendre import leggauss

    with criterion("6 phi oracle", budget_s=5.0) as c:
        x, w = leggauss(8)
        rng = np.random.default_rng(6)
        worst = 0.0
        for _ in range(1000):
            length = rng.uniform(1e-3, 2e-2)
            dk, kappa = rng.uniform(-2e4, 2e4), rng.uniform(0, 2e4)
            # 10^4-node composite Gauss-Legendre quadrature of the defining integral
            edges = np.linspace(0.0, length, 1251)
            h = np.diff(edges)
            z = (0.5 * (edges[1:] + edges[:-1])[:, None] + 0.5 * h[:, None] * x).ravel()
            t = (0.25 * h[:, None] * w).ravel() * (np.exp(1j * (dk + kappa) * z) + np.exp(1j * (dk - kappa) * z))
            ref = complex(math.fsum(t.real), math.fsum(t.imag))
            worst = max(worst, abs(complex(pm_function(dk, kappa, length)) - ref) / abs(ref))
        c.require(worst < 1e-9, "worst relative error {:.2e} over 1000 triples", worst)
        length = 7e-3
        dk = np.linspace(-5e3, 5e3, 401)
        exact = length * np.exp(1j * dk * length / 2) * np.sinc(dk * length / 2 / np.pi)
        c.require(np.array_equal(pm_function(dk, 0.0, length), exact), "kappa = 0 single sinc exactly")


# ---- 7


@pytest.fixture(scope="module")
def table1_setup(si_process):
    pump = PumpSpec(1.265, 2.0, 1.59)
    return pump, phase_matched_signal(si_process, 1.342)


def test_criterion_7_schmidt(si_process, table1_setup):
    L = 15e-3
    with criterion("7 Schmidt suite (purity part)", budget_s=60.0) as c:
        x = np.linspace(-3, 3, 256)
        sep = schmidt(np.outer(np.exp(-x**2), np.exp(-(x - 0.3) ** 2 / 2) * np.exp(2j * x))).purity
        c.require(sep >= 1 - 1e-10, "separable purity 1 - {:.1e}", 1 - sep)
        ident = schmidt(np.eye(2)).purity
        c.require(ident == 0.5, "2x2 identity purity {!r}", ident)
        pump, ls = table1_setup
        grid256 = default_grid(si_process, pump, L, ls, n=256)
        js = build_jsa(si_process, pump, grid256, L)
        p256 = schmidt(js).purity
        p512 = schmidt(build_jsa(si_process, pump, default_grid(si_process, pump, L, ls, n=512), L)).purity
        c.require(abs(p512 / p256 - 1) < 5e-3, "purity 256^2 {:.5f} -> 512^2 {:.5f}", p256, p512)
        unc = si_process.uncoupled()
        lsu = phase_matched_signal(unc, 1.342)
        pu = schmidt(build_jsa(unc, pump, default_grid(unc, pump, L, lsu), L)).purity
        c.require(p256 > pu, "coupled {:.4f} > kappa-disabled {:.4f}", p256, pu)
        prof = ApodizationProfile.raised_cosine(L, 513)
        pa = schmidt(build_jsa(si_process, pump, grid256, L, profile=prof)).purity
        c.require(pa > p256, "raised cosine {:.4f} > uniform {:.4f}", pa, p256)


@pytest.mark.xfail(strict=True, reason="raised-cosine (Hann) side lobe is 2.7e-2 of peak in |φ|; see decisions ledger")
def test_criterion_7_side_lobes():
    L = 15e-3
    with criterion("7 Schmidt suite (raised-cosine side lobes < 1e-3 in |phi|)", budget_s=60.0) as c:
        dk = np.linspace(-60, 60, 24001) * (2 * np.pi / L)
        rc = side_lobe_ratio(dk, pm_branch_apodized(ApodizationProfile.raised_cosine(L, 1025), dk))
        c.note("uniform side lobe {:.3f}", side_lobe_ratio(dk, pm_branch(dk, L)))
        c.require(rc < 1e-3, "raised-cosine side lobe {:.2e}", rc)


# ---- 8


def test_criterion_8_uncoupled_fails(si_process):
    with criterion("8 GVM (coupling disabled fails)", budget_s=5.0) as c:
        r = gvm_report(si_process.uncoupled(), 1.342)
        ng = r.group_index
        c.require(not r.between, "uncoupled n_g p1 {:.4f} s {:.4f} i {:.4f}", ng["p1"], ng["s"], ng["i"])


@pytest.mark.xfail(strict=True, reason="Table 1 is not group-velocity matched under the effective-index model; "
                                       "see decisions ledger")
def test_criterion_8_gvm_table1(si_process):
    with criterion("8 GVM (Table 1 pump between signal and idler)", budget_s=5.0) as c:
        r = gvm_report(si_process, 1.342)
        ng = r.group_index
        c.require(r.between, "odd branch n_g p1 {:.4f} s {:.4f} i {:.4f} (margin {:+.4f})",
                  ng["p1"], ng["s"], ng["i"], r.margin)


# ---- 9


RUNS = [
    ("fiber_fig1b.json", "contours"),
    ("fiber_fig2.json", "gain-scan"),
    ("fiber_fig2.json", "propagate"),
    ("silicon_table1.json", "jsa"),
    ("silicon_table1.json", "purity"),
    ("silicon_table1.json", "sweep"),
]


def test_criterion_9_determinism(tmp_path):
    with criterion("9 determinism") as c:
        for scen, cmd in RUNS:
            outs = []
            for k in range(2):
                out = tmp_path / f"{scen}_{cmd}_{k}"
                cli.run(cmd, SCENARIOS / scen, out)
                outs.append({p.name: p.read_bytes() for p in sorted(out.iterdir())})
            c.require(outs[0] == outs[1], "{} {}: {} files identical", scen, cmd, len(outs[0]))
