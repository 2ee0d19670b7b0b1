"""Joint spectral amplitude of coupled-guide FWM pairs and Schmidt analysis.

``f(ω_s, ω_i) = α(ω_s + ω_i) φ(Δk(ω_s, ω_i))``

Bandwidth convention: ``sigma_p1_nm`` is the standard deviation of the
Gaussian *amplitude* spectrum of pump 1 in wavelength, converted to angular
frequency at the pump centre, ``σ_ω = 2πc σ_λ / λ²``.  The pump amplitude is
``exp(-(ω - ω_p1)² / (2 σ_ω²))``.

Phase matching: ``φ = ½ ∫₀ᴸ g(z) [e^{i(Δk+κ)z} + e^{i(Δk-κ)z}] dz``; with
``g ≡ 1`` each term is ``L e^{iqL/2} sinc(qL/2)``.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass, replace
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.constants import c as C_LIGHT
from scipy.interpolate import CubicSpline

from .dispersion import omega_to_wavelength, wavelength_to_omega
from .errors import DomainError
from .phasematch import ProcessConfig, _roots_1d, mismatch_omega, phase_mismatch


def sigma_omega(wavelength_um, sigma_nm):
    """Wavelength standard deviation (nm) -> angular-frequency standard deviation (rad/s)."""
    lam = wavelength_um * 1e-6
    return 2 * np.pi * C_LIGHT * (sigma_nm * 1e-9) / lam**2


@dataclass(frozen=True)
class PumpSpec:
    """Pulsed pump 1, CW (default) or pulsed pump 2."""

    lambda_p1_um: float
    sigma_p1_nm: float
    lambda_p2_um: float
    sigma_p2_nm: Optional[float] = None  # None: monochromatic pump 2

    def __post_init__(self):
        if not self.sigma_p1_nm > 0:
            raise ValueError("sigma_p1 must be > 0")
        if self.sigma_p2_nm is not None and not self.sigma_p2_nm > 0:
            raise ValueError("sigma_p2 must be > 0 when given")

    @property
    def sigma1(self):
        return float(sigma_omega(self.lambda_p1_um, self.sigma_p1_nm))

    @property
    def sigma2(self):
        return None if self.sigma_p2_nm is None else float(sigma_omega(self.lambda_p2_um, self.sigma_p2_nm))


def pump_function(spec: PumpSpec, ws, wi):
    """α(ω_s + ω_i), the pump-spectrum convolution.

    With CW pump 2 it is the pump-1 Gaussian in ``ω_s + ω_i - ω_p1 - ω_p2``;
    with two Gaussian pumps the convolution is done in closed form.
    """
    d = np.asarray(ws, float) + np.asarray(wi, float)
    d = d - wavelength_to_omega(spec.lambda_p1_um) - wavelength_to_omega(spec.lambda_p2_um)
    s1 = spec.sigma1
    if spec.sigma_p2_nm is None:
        return np.exp(-(d**2) / (2 * s1**2)).astype(complex)
    s2 = spec.sigma2
    var = s1**2 + s2**2
    amp = math.sqrt(2 * math.pi) * s1 * s2 / math.sqrt(var)
    return (amp * np.exp(-(d**2) / (2 * var))).astype(complex)


def _uniform_term(q, length):
    """∫₀ᴸ e^{iqz} dz = L e^{iqL/2} sinc(qL/2)."""
    x = 0.5 * q * length
    return length * np.exp(1j * x) * np.sinc(x / np.pi)


def pm_function(dk, kappa_p2, length):
    """Two-term phase-matching function of the coupled pair (uniform nonlinearity)."""
    if not length > 0:
        raise ValueError("length must be > 0")
    dk = np.asarray(dk, float)
    return 0.5 * (_uniform_term(dk + kappa_p2, length) + _uniform_term(dk - kappa_p2, length))


def pm_branch(dk_branch, length):
    """Single retained branch ``½ ∫ e^{i Δk± z} dz`` (the other term dropped)."""
    if not length > 0:
        raise ValueError("length must be > 0")
    return 0.5 * _uniform_term(np.asarray(dk_branch, float), length)


# --------------------------------------------------------------------------
# apodisation

_GL_X, _GL_W = leggauss(8)


@dataclass(frozen=True)
class ApodizationProfile:
    """Sampled nonlinearity weight g(z) on [0, L], g ∈ [0, 1]."""

    z_m: np.ndarray
    g: np.ndarray

    def __post_init__(self):
        z = np.asarray(self.z_m, float)
        g = np.asarray(self.g, float)
        if z.ndim != 1 or z.shape != g.shape:
            raise ValueError("z and g must be 1-D arrays of equal length")
        if z.size < 64:
            raise ValueError("apodisation profile needs at least 64 samples")
        if z[0] != 0.0 or np.any(np.diff(z) <= 0):
            raise ValueError("z must start at 0 and increase strictly")
        if np.any(g < 0) or np.any(g > 1):
            raise ValueError("g must lie in [0, 1]")
        object.__setattr__(self, "z_m", z)
        object.__setattr__(self, "g", g)

    @property
    def length(self):
        return float(self.z_m[-1])

    @classmethod
    def uniform(cls, length, n=257):
        z = np.linspace(0.0, length, n)
        return cls(z, np.ones(n))

    @classmethod
    def raised_cosine(cls, length, n=257):
        """Hann profile ``sin²(πz/L)``: smooth on and off at both ends."""
        z = np.linspace(0.0, length, n)
        return cls(z, np.sin(np.pi * z / length) ** 2)

    @classmethod
    def gaussian(cls, length, n=257, width_fraction=0.125):
        """Gaussian centred at L/2 with standard deviation ``width_fraction * L``."""
        z = np.linspace(0.0, length, n)
        s = width_fraction * length
        return cls(z, np.exp(-0.5 * ((z - 0.5 * length) / s) ** 2))

    def max_wavenumber(self):
        """Largest |q| this sampling resolves (phase advance π/4 per sample)."""
        return (np.pi / 4) / float(np.max(np.diff(self.z_m)))

    def _nodes(self):
        z = self.z_m
        spl = CubicSpline(z, self.g)
        h = np.diff(z)
        mid = 0.5 * (z[1:] + z[:-1])
        nodes = (mid[:, None] + 0.5 * h[:, None] * _GL_X[None, :]).ravel()
        weights = (0.5 * h[:, None] * _GL_W[None, :]).ravel()
        return nodes, weights * spl(nodes)


def _apodized_integral(profile: ApodizationProfile, q, chunk=2048):
    q = np.asarray(q, float)
    if q.size and np.max(np.abs(q)) > profile.max_wavenumber():
        raise DomainError(
            "apodisation profile under-resolved: phase advance per sample exceeds π/4 "
            f"(|q| up to {np.max(np.abs(q)):.4g} 1/m, limit {profile.max_wavenumber():.4g} 1/m)"
        )
    nodes, w = profile._nodes()
    flat = q.ravel()
    out = np.empty(flat.shape, complex)
    for i in range(0, flat.size, chunk):
        out[i:i + chunk] = np.exp(1j * np.outer(flat[i:i + chunk], nodes)) @ w
    return out.reshape(q.shape)


def pm_function_apodized(profile: ApodizationProfile, dk, kappa_p2):
    """φ with nonlinearity weight g(z), by cubic-spline × 8-point Gauss-Legendre quadrature."""
    dk = np.asarray(dk, float)
    return 0.5 * (_apodized_integral(profile, dk + kappa_p2) + _apodized_integral(profile, dk - kappa_p2))


def pm_branch_apodized(profile: ApodizationProfile, dk_branch):
    return 0.5 * _apodized_integral(profile, np.asarray(dk_branch, float))


def side_lobe_ratio(dk, phi):
    """Largest local maximum of |φ| outside the main lobe, relative to the peak."""
    a = np.abs(np.asarray(phi))
    k = int(np.argmax(a))
    # walk out of the main lobe on both sides to the first minimum
    lo = k
    while lo > 0 and a[lo - 1] <= a[lo]:
        lo -= 1
    hi = k
    while hi < a.size - 1 and a[hi + 1] <= a[hi]:
        hi += 1
    rest = np.concatenate([a[:lo], a[hi + 1:]])
    return float(rest.max() / a[k]) if rest.size else 0.0


# --------------------------------------------------------------------------
# joint spectrum


@dataclass(frozen=True)
class JsaGrid:
    """Uniform angular-frequency axes (rad/s) for signal and idler."""

    omega_s: np.ndarray
    omega_i: np.ndarray

    @classmethod
    def centered(cls, lambda_s_um, lambda_i_um, half_width_s, half_width_i, n=256):
        ws0 = wavelength_to_omega(lambda_s_um)
        wi0 = wavelength_to_omega(lambda_i_um)
        return cls(np.linspace(ws0 - half_width_s, ws0 + half_width_s, n),
                   np.linspace(wi0 - half_width_i, wi0 + half_width_i, n))

    @property
    def lambda_s_um(self):
        return omega_to_wavelength(self.omega_s)

    @property
    def lambda_i_um(self):
        return omega_to_wavelength(self.omega_i)


@dataclass
class JointSpectrum:
    """f = α·φ on the grid (rows: signal, columns: idler)."""

    grid: JsaGrid
    f: np.ndarray
    alpha: np.ndarray
    phi: np.ndarray
    dk: np.ndarray
    branch: str

    @property
    def lambda_s_um(self):
        return self.grid.lambda_s_um

    @property
    def lambda_i_um(self):
        return self.grid.lambda_i_um

    def normalized(self):
        n = np.linalg.norm(self.f)
        if n == 0:
            raise ValueError("joint spectrum is identically zero")
        return self.f / n

    def intensity(self):
        return np.abs(self.normalized()) ** 2


def phase_matched_signal(process: ProcessConfig, near_um, window_um=0.1, n=2001):
    """Signal wavelength of the configured branch's zero nearest ``near_um`` (None if none)."""
    lo = max(near_um - window_um, process.lambda_p1_um * (1 + 1e-9))
    hi = near_um + window_um
    grid = np.linspace(lo, hi, n)
    try:
        roots, _ = _roots_1d(lambda ls: phase_mismatch(process, ls), grid, 1e-6)
    except DomainError:
        return None
    if roots.size == 0:
        return None
    return float(roots[np.argmin(np.abs(roots - near_um))])


def default_grid(process: ProcessConfig, pump: PumpSpec, length, lambda_s_um, n=256,
                 n_sigma=4.0, n_lobes=5.0, max_half_width=None):
    """Grid centred on (λ_s, λ_i) covering ±``n_sigma`` pump widths along ω_s + ω_i and
    ±``n_lobes`` sinc lobes (2π/L each) of the phase-matching band.

    The band slopes come from a linearisation of Δk around the centre.
    """
    lam_i = 1.0 / (1.0 / process.lambda_p1_um + 1.0 / process.lambda_p2_um - 1.0 / lambda_s_um)
    ws0, wi0 = wavelength_to_omega(lambda_s_um), wavelength_to_omega(lam_i)
    sig = pump.sigma1 if pump.sigma_p2_nm is None else math.hypot(pump.sigma1, pump.sigma2)
    S = n_sigma * sig
    W = n_lobes * 2 * np.pi / length
    h = 1e-4 * S
    d0 = mismatch_omega(process, ws0, wi0)
    a_s = (mismatch_omega(process, ws0 + h, wi0) - d0) / h
    a_i = (mismatch_omega(process, ws0, wi0 + h) - d0) / h
    cap = max_half_width if max_half_width is not None else 10 * S
    if abs(a_s - a_i) < 1e-30:
        hs = hi_ = cap
    else:
        hs = hi_ = 0.0
        for u in (-S, S):
            for v in (-W, W):
                # ν_s + ν_i = u, a_s ν_s + a_i ν_i = v - d0
                ns = ((v - d0) - a_i * u) / (a_s - a_i)
                hs = max(hs, abs(ns))
                hi_ = max(hi_, abs(u - ns))
        hs, hi_ = min(1.1 * hs, cap), min(1.1 * hi_, cap)
    return JsaGrid.centered(lambda_s_um, lam_i, hs, hi_, n)


def build_jsa(process: ProcessConfig, pump: PumpSpec, grid: JsaGrid, length,
              profile: Optional[ApodizationProfile] = None, two_term=False) -> JointSpectrum:
    """Assemble f = α·φ.

    On a coupled branch only that branch's term is kept (the other is far
    from phase matching); ``two_term=True`` keeps both supermode terms.  The
    uncoupled branch ``"none"`` uses the standard single-guide φ = ∫ e^{iΔkz} dz.
    """
    if abs(pump.lambda_p1_um - process.lambda_p1_um) > 1e-12 or abs(pump.lambda_p2_um - process.lambda_p2_um) > 1e-12:
        raise ValueError("pump and process wavelengths disagree")
    if profile is not None and abs(profile.length - length) > 1e-12 * length:
        raise ValueError("apodisation profile length differs from the device length")
    WS, WI = np.meshgrid(grid.omega_s, grid.omega_i, indexing="ij")
    alpha = pump_function(pump, WS, WI)
    if process.branch == "none":
        dk = mismatch_omega(process, WS, WI)
        phi = 2 * (pm_branch(dk, length) if profile is None else pm_branch_apodized(profile, dk))
    elif two_term:
        dk = mismatch_omega(process, WS, WI)
        other = mismatch_omega(replace(process, branch="even" if process.branch == "odd" else "odd"), WS, WI)
        if profile is None:
            phi = pm_branch(dk, length) + pm_branch(other, length)
        else:
            phi = pm_branch_apodized(profile, dk) + pm_branch_apodized(profile, other)
    else:
        dk = mismatch_omega(process, WS, WI)
        phi = pm_branch(dk, length) if profile is None else pm_branch_apodized(profile, dk)
    return JointSpectrum(grid, alpha * phi, alpha, phi, dk, process.branch)


@dataclass(frozen=True)
class SchmidtResult:
    singular_values: np.ndarray
    schmidt_number: float
    purity: float

    def as_dict(self, n_keep=None):
        sv = self.singular_values if n_keep is None else self.singular_values[:n_keep]
        return {
            "singular_values": [float(x) for x in sv],
            "schmidt_number": float(self.schmidt_number),
            "purity": float(self.purity),
        }


def schmidt(js) -> SchmidtResult:
    """Schmidt decomposition of a joint spectrum (or a raw 2-D amplitude array).

    The grid is normalised to unit Frobenius norm; λ_n are its singular
    values, K = 1/Σλ_n⁴ and the heralded purity is Σλ_n⁴.
    """
    f = js.f if isinstance(js, JointSpectrum) else np.asarray(js, dtype=complex)
    if f.ndim != 2:
        raise ValueError("joint spectrum must be a 2-D array")
    norm = np.linalg.norm(f)
    if not np.isfinite(norm) or norm == 0:
        raise ValueError("joint spectrum is zero or non-finite")
    sv = np.linalg.svd(f / norm, compute_uv=False)
    # weights renormalised so Σλ² = 1 holds to rounding of the division only
    p = sv**2 / np.sum(sv**2)
    sv = np.sqrt(p)
    purity = float(np.sum(p**2))
    return SchmidtResult(sv, 1.0 / purity, purity)


def write_jsi_csv(path, js: JointSpectrum):
    """|f|² (normalised) with two header rows: signal axis, then idler axis (µm)."""
    inten = js.intensity()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["lambda_s_um"] + [repr(float(x)) for x in js.lambda_s_um])
        w.writerow(["lambda_i_um"] + [repr(float(x)) for x in js.lambda_i_um])
        for row, ls in zip(inten, js.lambda_s_um):
            w.writerow([repr(float(ls))] + [repr(float(x)) for x in row])


def write_schmidt_json(path, result: SchmidtResult, n_keep=32):
    with open(path, "w") as fh:
        json.dump(result.as_dict(n_keep), fh, indent=2, sort_keys=True)
        fh.write("\n")


__all__ = [
    "ApodizationProfile",
    "JointSpectrum",
    "JsaGrid",
    "PumpSpec",
    "SchmidtResult",
    "build_jsa",
    "default_grid",
    "phase_matched_signal",
    "pm_branch",
    "pm_branch_apodized",
    "pm_function",
    "pm_function_apodized",
    "pump_function",
    "schmidt",
    "side_lobe_ratio",
    "sigma_omega",
    "write_jsi_csv",
    "write_schmidt_json",
]
