"""Supermodes of two coupled waveguides and coupling-constant models.

Sign convention: amplitudes obey ``dA/dz = i M A`` with
``M = [[beta_a, kappa], [kappa, beta_b]]`` and ``kappa >= 0``.  The even
supermode is the eigenvector of ``beta_bar + psi``; for identical guides it is
the in-phase combination ``(1, 1)/sqrt(2)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.interpolate import CubicSpline, PchipInterpolator
from scipy.optimize import brentq
from scipy.special import k0e, k1e

from .dispersion import (
    DeviceGeometry,
    DispersionProvider,
    FiberParams,
    FUSED_SILICA,
    SILICON,
    _lp01_u,
    _read_two_column_csv,
    material_index,
    omega_to_wavelength,
    slab_index,
    wavelength_to_omega,
)
from .errors import DomainError


@dataclass(frozen=True)
class SupermodeSystem:
    """β̄, δβ, κ, ψ and the two supermode propagation constants (all 1/m)."""

    beta_bar: np.ndarray
    delta_beta: np.ndarray
    kappa: np.ndarray
    psi: np.ndarray
    beta_plus: np.ndarray
    beta_minus: np.ndarray

    def branch(self, name):
        if name == "even":
            return self.beta_plus
        if name == "odd":
            return self.beta_minus
        raise ValueError(f"unknown supermode branch {name!r}")


def supermodes(beta_a, beta_b, kappa) -> SupermodeSystem:
    """Even/odd supermode propagation constants of a (possibly asymmetric) pair."""
    beta_a = np.asarray(beta_a, dtype=float)
    beta_b = np.asarray(beta_b, dtype=float)
    kappa = np.asarray(kappa, dtype=float)
    if np.any(kappa < 0):
        raise ValueError("kappa must be >= 0")
    bbar = 0.5 * (beta_a + beta_b)
    dbeta = 0.5 * (beta_a - beta_b)
    psi = np.hypot(dbeta, kappa)
    return SupermodeSystem(bbar, dbeta, kappa, psi, bbar + psi, bbar - psi)


def coupled_mode_matrix(beta_a, beta_b, kappa):
    return np.array([[beta_a, kappa], [kappa, beta_b]], dtype=float)


@dataclass(frozen=True)
class SupermodeFields:
    """Normalised guide-A/guide-B field coefficients of both supermodes."""

    even: tuple
    odd: tuple
    norm_even: float
    norm_odd: float
    degenerate: bool = False

    def power_in_a(self, branch):
        ca, _ = self.even if branch == "even" else self.odd
        return ca * ca


def supermode_fields(delta_beta, kappa) -> SupermodeFields:
    """Coefficients ``(c_A, c_B)`` of the even and odd supermodes.

    Unnormalised, the even mode is ``((δβ + ψ)/κ, 1)`` and the odd mode
    ``((δβ - ψ)/κ, 1)``.  At ``κ = 0`` the modes localise: the even label goes
    to the guide with the larger β.  ``δβ = κ = 0`` returns the symmetric pair
    with ``degenerate=True``.
    """
    db = float(delta_beta)
    k = float(kappa)
    if k < 0:
        raise ValueError("kappa must be >= 0")
    s = 1.0 / math.sqrt(2.0)
    if k == 0.0:
        if db == 0.0:
            return SupermodeFields((s, s), (-s, s), math.sqrt(2.0), math.sqrt(2.0), True)
        if db > 0:
            return SupermodeFields((1.0, 0.0), (0.0, 1.0), math.inf, 1.0)
        return SupermodeFields((0.0, 1.0), (1.0, 0.0), 1.0, math.inf)
    psi = math.hypot(db, k)
    # avoid cancellation in psi -/+ |db|
    if db >= 0:
        p_plus = psi + db
        p_minus = k * k / p_plus
    else:
        p_minus = psi - db
        p_plus = k * k / p_minus
    r_even = p_plus / k
    r_odd = -p_minus / k
    n_even = math.hypot(r_even, 1.0)
    n_odd = math.hypot(r_odd, 1.0)
    return SupermodeFields(
        (r_even / n_even, 1.0 / n_even), (r_odd / n_odd, 1.0 / n_odd), n_even, n_odd
    )


def beat_length(psi):
    """Power-transfer period π/ψ in metres (``inf`` when ψ = 0)."""
    psi = float(psi)
    if psi < 0:
        raise ValueError("psi must be >= 0")
    return math.inf if psi == 0 else math.pi / psi


def field_beat_length(psi):
    """Period 2π/ψ of the field amplitude (as opposed to power)."""
    psi = float(psi)
    if psi < 0:
        raise ValueError("psi must be >= 0")
    return math.inf if psi == 0 else 2 * math.pi / psi


# --------------------------------------------------------------------------
# coupling models


class CouplingModel:
    """κ(ω) in 1/m over a frequency domain."""

    kind = "base"

    def __init__(self, omega_min, omega_max):
        self.omega_min = float(omega_min)
        self.omega_max = float(omega_max)

    def check(self, omega):
        om = np.asarray(omega, dtype=float)
        tol = 1e-12 * self.omega_max
        if np.any(om < self.omega_min - tol) or np.any(om > self.omega_max + tol):
            raise DomainError(f"{type(self).__name__}: frequency outside coupling-model domain")

    def kappa(self, omega):
        self.check(omega)
        out = self._kappa(np.asarray(omega, dtype=float))
        return out if np.ndim(out) else float(out)

    def _kappa(self, omega):
        raise NotImplementedError


def coupling_eval(model: CouplingModel, omega):
    return model.kappa(omega)


class ExponentialCoupling(CouplingModel):
    """``κ(λ) = κ0 · exp(rate · (λ - λ0))`` with λ in µm."""

    kind = "exponential-parametric"

    def __init__(self, kappa0_per_m, lambda0_um, rate_per_um=0.0, wavelength_window_um=(0.2, 5.0)):
        if kappa0_per_m < 0:
            raise ValueError("kappa0 must be >= 0")
        lo, hi = wavelength_window_um
        super().__init__(wavelength_to_omega(hi), wavelength_to_omega(lo))
        self.kappa0 = float(kappa0_per_m)
        self.lambda0_um = float(lambda0_um)
        self.rate_per_um = float(rate_per_um)

    @classmethod
    def fit(cls, lambda1_um, kappa1, lambda2_um, kappa2, wavelength_window_um=(0.2, 5.0)):
        """Two-point fit; both κ values must be positive."""
        if kappa1 <= 0 or kappa2 <= 0 or lambda1_um == lambda2_um:
            raise ValueError("two-point fit needs distinct wavelengths and positive kappas")
        rate = math.log(kappa2 / kappa1) / (lambda2_um - lambda1_um)
        return cls(kappa1, lambda1_um, rate, wavelength_window_um)

    def _kappa(self, omega):
        lam = omega_to_wavelength(omega)
        return self.kappa0 * np.exp(self.rate_per_um * (lam - self.lambda0_um))


def constant_coupling(kappa_per_m, wavelength_window_um=(0.2, 5.0)):
    return ExponentialCoupling(kappa_per_m, 1.0, 0.0, wavelength_window_um)


class TabulatedCoupling(CouplingModel):
    """Spline through ``(wavelength_um, kappa_per_m)`` samples.

    Strictly positive data is interpolated in log κ (keeps κ > 0); data with
    zeros falls back to a shape-preserving PCHIP interpolant.
    """

    kind = "tabulated"
    MIN_ROWS = 8

    def __init__(self, wavelength_um, kappa_per_m):
        lam = np.asarray(wavelength_um, dtype=float)
        k = np.asarray(kappa_per_m, dtype=float)
        if lam.size < self.MIN_ROWS or lam.shape != k.shape:
            raise ValueError(f"tabulated coupling needs at least {self.MIN_ROWS} rows")
        d = np.diff(lam)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("wavelengths must be strictly monotone")
        if np.any(k < 0) or np.any(~np.isfinite(k)):
            raise ValueError("kappa samples must be finite and >= 0")
        om = wavelength_to_omega(lam)
        order = np.argsort(om)
        om, k = om[order], k[order]
        super().__init__(om[0], om[-1])
        self._scale = 1.0 / om[-1]
        if np.all(k > 0):
            spline = CubicSpline(om * self._scale, np.log(k))
            self._eval = lambda x: np.exp(spline(x))
        else:
            pchip = PchipInterpolator(om * self._scale, k)
            self._eval = lambda x: np.maximum(pchip(x), 0.0)

    def _kappa(self, omega):
        return self._eval(omega * self._scale)


def read_coupling_csv(path) -> TabulatedCoupling:
    rows = _read_two_column_csv(path, ("wavelength_um", "kappa_per_m"))
    lam, k = zip(*rows)
    return TabulatedCoupling(lam, k)


# ---- twin-core fibre


def fiber_coupling(params_a: FiberParams, params_b: FiberParams, separation_um, omega):
    """Coupling constant of two identical step-index cores (weak-guidance formula).

    ``κ = sqrt(2Δ)/a · U²/V³ · K0(W d/a) / K1(W)²`` with ``d`` the
    centre-to-centre separation.
    """
    if params_a != params_b:
        raise ValueError("only identical cores are supported")
    a_um = params_a.core_radius_um
    d = np.asarray(separation_um, dtype=float)
    if np.any(d <= 2 * a_um):
        raise DomainError("cores overlap: separation must exceed two core radii")
    lam = omega_to_wavelength(omega)
    nco, ncl = params_a.indices(lam)
    v = 2 * np.pi / lam * a_um * np.sqrt(nco**2 - ncl**2)
    u = _lp01_u(v)
    w = np.sqrt(v * v - u * u)
    delta = (nco**2 - ncl**2) / (2 * nco**2)
    x = w * d / a_um
    # K0(x)/K1(w)^2 with exponentially scaled Bessels
    ratio = k0e(x) / k1e(w) ** 2 * np.exp(2 * w - x)
    kappa = np.sqrt(2 * delta) / (a_um * 1e-6) * u * u / v**3 * ratio
    return kappa if np.ndim(kappa) else float(kappa)


def separation_for_kappa(params: FiberParams, kappa_target, wavelength_um, d_max_um=200.0):
    """Core separation (µm) giving ``kappa_target`` at ``wavelength_um`` (bisection)."""
    om = wavelength_to_omega(wavelength_um)
    lo = 2 * params.core_radius_um * (1 + 1e-9)
    f = lambda d: math.log(fiber_coupling(params, params, d, om)) - math.log(kappa_target)
    if f(lo) < 0 or f(d_max_um) > 0:
        raise DomainError("target kappa not reachable within the separation range")
    return brentq(f, lo, d_max_um, xtol=1e-12, rtol=1e-14)


class FiberCoupling(CouplingModel):
    kind = "analytic-fiber"

    def __init__(self, params: FiberParams, separation_um, wavelength_window_um=(0.4, 2.0)):
        lo, hi = wavelength_window_um
        super().__init__(wavelength_to_omega(hi), wavelength_to_omega(lo))
        if separation_um <= 2 * params.core_radius_um:
            raise DomainError("cores overlap")
        self.params = params
        self.separation_um = float(separation_um)

    def _kappa(self, omega):
        return fiber_coupling(self.params, self.params, self.separation_um, omega)


# ---- rectangular silicon guides


def _slab_field_parts(lam, width, n_core, n_clad, n_eff):
    k0 = 2 * np.pi / lam
    kx = k0 * np.sqrt(n_core**2 - n_eff**2)
    g = k0 * np.sqrt(n_eff**2 - n_clad**2)
    norm = width / 2 + np.sin(kx * width) / (2 * kx) + np.cos(kx * width / 2) ** 2 / g
    return kx, g, 1.0 / np.sqrt(norm)


def _tail_overlap(kx_src, g_src, amp_src, w_src, kx_dst, amp_dst, w_dst, gap):
    """∫ over the destination core of source tail × destination field (µm units)."""
    # source tail: amp_src cos(kx_src w_src/2) exp(-g_src s), s = distance from source edge
    # destination: amp_dst cos(kx_dst (s - gap - w_dst/2)) for s in [gap, gap + w_dst]
    c0 = amp_src * np.cos(kx_src * w_src / 2) * amp_dst

    def prim(s):
        t = kx_dst * (s - gap - w_dst / 2)
        return np.exp(-g_src * s) * (kx_dst * np.sin(t) - g_src * np.cos(t)) / (g_src**2 + kx_dst**2)

    return c0 * (prim(gap + w_dst) - prim(gap))


def rect_coupling(geometry: DeviceGeometry, omega, polarization="TE",
                  core=SILICON, substrate=FUSED_SILICA, cover_index=1.0):
    """Coupling constant of the two guides of ``geometry`` (1/m).

    Scalar overlap in the lateral effective-index problem:
    ``κ_pq = k0²/(2β_p) ∫_q (n_q² - n_clad²) E_p E_q dx`` with unit-normalised
    slab fields; the returned value is ``sqrt(κ_AB κ_BA)``.
    """
    lam = omega_to_wavelength(omega)
    ncore = material_index(core, lam)
    nsub = material_index(substrate, lam)
    first, second = ("TE", "TM") if polarization == "TE" else ("TM", "TE")
    ns_a = slab_index(lam, geometry.h_a_um, ncore, cover_index, nsub, first)
    ns_b = slab_index(lam, geometry.h_b_um, ncore, cover_index, nsub, first)
    ne_a = slab_index(lam, geometry.w_a_um, ns_a, cover_index, cover_index, second)
    ne_b = slab_index(lam, geometry.w_b_um, ns_b, cover_index, cover_index, second)
    kxa, ga, aa = _slab_field_parts(lam, geometry.w_a_um, ns_a, cover_index, ne_a)
    kxb, gb, ab = _slab_field_parts(lam, geometry.w_b_um, ns_b, cover_index, ne_b)
    gap = geometry.gap_um
    ov_ab = _tail_overlap(kxa, ga, aa, geometry.w_a_um, kxb, ab, geometry.w_b_um, gap)
    ov_ba = _tail_overlap(kxb, gb, ab, geometry.w_b_um, kxa, aa, geometry.w_a_um, gap)
    k0 = 2 * np.pi / lam
    k_ab = k0**2 * (ns_b**2 - cover_index**2) * ov_ab / (2 * k0 * ne_a)
    k_ba = k0**2 * (ns_a**2 - cover_index**2) * ov_ba / (2 * k0 * ne_b)
    kappa = np.sqrt(np.maximum(k_ab * k_ba, 0.0)) * 1e6  # 1/µm -> 1/m
    return kappa if np.ndim(kappa) else float(kappa)


class RectCoupling(CouplingModel):
    kind = "analytic-rect"

    def __init__(self, geometry: DeviceGeometry, polarization="TE", wavelength_window_um=(1.2, 2.5)):
        lo, hi = wavelength_window_um
        super().__init__(wavelength_to_omega(hi), wavelength_to_omega(lo))
        self.geometry = geometry
        self.polarization = polarization

    def _kappa(self, omega):
        return rect_coupling(self.geometry, omega, self.polarization)


def rect_exponential_fit(geometry: DeviceGeometry, lambda1_um, lambda2_um,
                         polarization="TE", wavelength_window_um=(1.2, 2.5)) -> ExponentialCoupling:
    """Exponential κ(λ) through the slab-overlap values at two wavelengths."""
    k1 = rect_coupling(geometry, wavelength_to_omega(lambda1_um), polarization)
    k2 = rect_coupling(geometry, wavelength_to_omega(lambda2_um), polarization)
    return ExponentialCoupling.fit(lambda1_um, k1, lambda2_um, k2, wavelength_window_um)


# --------------------------------------------------------------------------
# coupled-pair dispersion


class SupermodeProvider(DispersionProvider):
    """β of one supermode branch of a guide pair, usable wherever a provider is."""

    def __init__(self, guide_a: DispersionProvider, guide_b: DispersionProvider,
                 coupling: CouplingModel, branch: str):
        if branch not in ("even", "odd"):
            raise ValueError("branch must be 'even' or 'odd'")
        lo = max(guide_a.omega_min, guide_b.omega_min, coupling.omega_min)
        hi = min(guide_a.omega_max, guide_b.omega_max, coupling.omega_max)
        if not lo < hi:
            raise DomainError("guide and coupling domains do not overlap")
        super().__init__(lo, hi)
        self.guide_a, self.guide_b, self.coupling, self.branch = guide_a, guide_b, coupling, branch

    def system(self, omega) -> SupermodeSystem:
        self.check(omega)
        return supermodes(self.guide_a.beta(omega), self.guide_b.beta(omega), self.coupling.kappa(omega))

    def _beta(self, omega):
        return self.system(omega).branch(self.branch)


def mode_power_in_a(guide_a, guide_b, coupling, omega, branch):
    """Fraction of a supermode's power carried by guide A at ``omega``."""
    sm = supermodes(guide_a.beta(omega), guide_b.beta(omega), coupling.kappa(omega))
    return supermode_fields(float(sm.delta_beta), float(sm.kappa)).power_in_a(branch)


__all__ = [
    "C_LIGHT",
    "CouplingModel",
    "ExponentialCoupling",
    "FiberCoupling",
    "RectCoupling",
    "SupermodeFields",
    "SupermodeProvider",
    "SupermodeSystem",
    "TabulatedCoupling",
    "beat_length",
    "constant_coupling",
    "coupled_mode_matrix",
    "coupling_eval",
    "fiber_coupling",
    "field_beat_length",
    "mode_power_in_a",
    "read_coupling_csv",
    "rect_coupling",
    "rect_exponential_fit",
    "separation_for_kappa",
    "supermode_fields",
    "supermodes",
]
