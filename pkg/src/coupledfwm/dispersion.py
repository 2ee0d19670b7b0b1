"""Propagation constants of isolated waveguides.

Three kinds of provider are available, all exposing ``beta(omega)`` in 1/m for
angular frequency in rad/s:

* :class:`FiberLP01` -- scalar LP01 mode of a step-index fibre,
* :class:`RectEIM` -- effective-index model of a rectangular silicon wire,
* :class:`Tabulated` -- cubic-spline interpolation of externally solved data.

:class:`Analytic` wraps any closed-form ``beta(omega)`` and is mostly useful in
tests (dispersionless media, polynomial models).
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Sequence

import numpy as np
from scipy.constants import c as C_LIGHT
from scipy.interpolate import CubicSpline
from scipy.special import j0, j1, k0e, k1e

from .errors import DomainError

LP01_CUTOFF_V = 2.404825557695773  # first zero of J0; LP11 cutoff
_BISECT_ITERS = 200


def wavelength_to_omega(wavelength_um):
    """Vacuum wavelength in µm -> angular frequency in rad/s."""
    return 2.0 * np.pi * C_LIGHT / (np.asarray(wavelength_um, dtype=float) * 1e-6)


def omega_to_wavelength(omega):
    """Angular frequency in rad/s -> vacuum wavelength in µm."""
    return 2.0 * np.pi * C_LIGHT / np.asarray(omega, dtype=float) * 1e6


def _bisect(func, lo, hi, iters=_BISECT_ITERS):
    """Vectorised bisection for functions increasing on [lo, hi].

    Stops early once every bracket has collapsed to adjacent floats.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    for _ in range(iters):
        mid = 0.5 * (lo + hi)
        done = (mid == lo) | (mid == hi)
        if np.all(done):
            break
        pos = func(mid) > 0.0
        hi = np.where(pos & ~done, mid, hi)
        lo = np.where(~pos & ~done, mid, lo)
    return 0.5 * (lo + hi)


def _newton_bracketed(func, lo, hi, n_bisect=8, max_iter=40, rtol=1e-14):
    """Vectorised safeguarded Newton for increasing ``func`` on [lo, hi].

    ``func(x)`` returns ``(f, f')``.  A few bisection steps shrink the
    bracket first; Newton steps that leave the bracket are replaced by
    bisection.
    """
    lo = np.array(lo, dtype=float, copy=True)
    hi = np.array(hi, dtype=float, copy=True)
    for _ in range(n_bisect):
        mid = 0.5 * (lo + hi)
        pos = func(mid)[0] > 0.0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    x = 0.5 * (lo + hi)
    for _ in range(max_iter):
        f, df = func(x)
        pos = f > 0.0
        hi = np.where(pos, x, hi)
        lo = np.where(pos, lo, x)
        with np.errstate(divide="ignore", invalid="ignore"):
            xn = x - f / df
        out = ~((xn >= lo) & (xn <= hi))
        xn = np.where(out, 0.5 * (lo + hi), xn)
        if np.all(np.abs(xn - x) <= rtol * np.abs(x)):
            return xn
        x = xn
    return x


# --------------------------------------------------------------------------
# materials


@dataclass(frozen=True)
class MaterialModel:
    """Sellmeier-type refractive index model.

    ``n^2 = 1 + background + sum_i B_i l^2 / (l^2 - C_i) + inverse_square / l^2``
    with ``l`` in µm.  The two extra terms default to zero, which gives the
    plain Sellmeier form; they exist so that the usual crystalline-silicon
    fit can be expressed in the same structure.
    """

    name: str
    sellmeier_coefficients: tuple = ()
    background: float = 0.0
    inverse_square: float = 0.0
    window_um: tuple = (0.2, 5.0)

    def __post_init__(self):
        if self.name not in ("fused-silica", "silicon", "custom"):
            raise ValueError(f"unknown material name {self.name!r}")
        lo, hi = self.window_um
        if not 0 < lo < hi:
            raise ValueError("validity window must satisfy 0 < lo < hi")

    def index(self, wavelength_um):
        return material_index(self, wavelength_um)


# Malitson (1965) fused silica.
FUSED_SILICA = MaterialModel(
    "fused-silica",
    ((0.6961663, 0.0684043**2), (0.4079426, 0.1162414**2), (0.8974794, 9.896161**2)),
    window_um=(0.21, 3.71),
)

# Li (1980) crystalline silicon at 293 K, rewritten in Sellmeier form:
# n^2 = eps + A/l^2 + B l1^2/(l^2 - l1^2) = (eps - B) + A/l^2 + B l^2/(l^2 - l1^2)
_SI_EPS, _SI_A, _SI_B, _SI_L1 = 11.6858, 0.939816, 0.00810461, 1.1071
SILICON = MaterialModel(
    "silicon",
    ((_SI_B, _SI_L1**2),),
    background=_SI_EPS - _SI_B - 1.0,
    inverse_square=_SI_A,
    window_um=(1.2, 14.0),
)


def material_index(model: MaterialModel, wavelength_um):
    """Refractive index of ``model`` at ``wavelength_um``.

    Raises :class:`DomainError` outside the model's validity window.
    """
    lam = np.asarray(wavelength_um, dtype=float)
    lo, hi = model.window_um
    if np.any(~np.isfinite(lam)) or np.any(lam < lo) or np.any(lam > hi):
        raise DomainError(
            f"{model.name}: wavelength outside validity window [{lo}, {hi}] um"
        )
    l2 = lam * lam
    n2 = 1.0 + model.background + model.inverse_square / l2
    for b, cc in model.sellmeier_coefficients:
        n2 = n2 + b * l2 / (l2 - cc)
    return np.sqrt(n2)


# --------------------------------------------------------------------------
# providers


class DispersionProvider:
    """Base class: maps angular frequency to propagation constant.

    Subclasses implement ``_beta``; the public :meth:`beta` checks the domain
    first so that out-of-band queries fail instead of extrapolating.
    """

    kind = "analytic"

    def __init__(self, omega_min, omega_max):
        if not 0 < omega_min < omega_max:
            raise ValueError("provider domain must satisfy 0 < omega_min < omega_max")
        self.omega_min = float(omega_min)
        self.omega_max = float(omega_max)

    @property
    def wavelength_window_um(self):
        return (float(omega_to_wavelength(self.omega_max)),
                float(omega_to_wavelength(self.omega_min)))

    def contains(self, omega):
        om = np.asarray(omega, dtype=float)
        tol = 1e-12 * self.omega_max
        return bool(np.all((om >= self.omega_min - tol) & (om <= self.omega_max + tol)))

    def check(self, omega):
        if not self.contains(omega):
            lo, hi = self.wavelength_window_um
            raise DomainError(
                f"{type(self).__name__}: frequency outside provider domain "
                f"({lo:.4g}-{hi:.4g} um)"
            )

    def beta(self, omega):
        self.check(omega)
        out = self._beta(np.asarray(omega, dtype=float))
        return out if np.ndim(out) else float(out)

    def n_eff(self, wavelength_um):
        om = wavelength_to_omega(wavelength_um)
        return self.beta(om) * C_LIGHT / om

    def _beta(self, omega):
        raise NotImplementedError


class Analytic(DispersionProvider):
    """Closed-form provider around a vectorised callable ``func(omega)``."""

    def __init__(self, func: Callable, omega_min, omega_max):
        super().__init__(omega_min, omega_max)
        self._func = func

    @classmethod
    def dispersionless(cls, n, wavelength_window_um=(0.3, 3.0)):
        lo, hi = wavelength_window_um
        return cls(lambda om: n * om / C_LIGHT, wavelength_to_omega(hi), wavelength_to_omega(lo))

    def _beta(self, omega):
        return self._func(omega)


@dataclass(frozen=True)
class FiberParams:
    """Step-index fibre: core radius in µm and fractional index step above cladding."""

    core_radius_um: float = 4.1
    index_step: float = 0.0036
    cladding: MaterialModel = FUSED_SILICA

    def __post_init__(self):
        if self.core_radius_um <= 0:
            raise ValueError("core_radius_um must be > 0")
        if self.index_step < 0:
            raise ValueError("index_step must be >= 0")

    def indices(self, wavelength_um):
        ncl = material_index(self.cladding, wavelength_um)
        return ncl * (1.0 + self.index_step), ncl

    def v_number(self, wavelength_um):
        nco, ncl = self.indices(wavelength_um)
        return 2 * np.pi / np.asarray(wavelength_um) * self.core_radius_um * np.sqrt(nco**2 - ncl**2)

    def single_mode_cutoff_um(self):
        """Wavelength above which only LP01 is guided."""
        lo, hi = self.cladding.window_um
        from scipy.optimize import brentq

        f = lambda lam: self.v_number(lam) - LP01_CUTOFF_V
        if f(lo) * f(hi) > 0:
            raise DomainError("no single-mode cutoff inside the cladding model window")
        return brentq(f, lo, hi, xtol=1e-12)

    def is_single_mode(self, wavelength_um):
        return bool(self.v_number(wavelength_um) < LP01_CUTOFF_V)


def _lp01_u(v):
    """Transverse core parameter U of the LP01 mode for normalised frequency(ies) v.

    Coarse bisection brackets the root, then Newton with the analytic
    derivative of ``U J1/J0 - W K1/K0`` polishes it.
    """
    v = np.asarray(v, dtype=float)

    def parts(u):
        w = np.sqrt(np.maximum(v * v - u * u, 0.0))
        r_j = j1(u) / j0(u)
        with np.errstate(divide="ignore", invalid="ignore"):
            r_k = np.where(w > 0, k1e(w) / k0e(w), 1.0)
        return w, r_j, r_k

    def f(u):
        w, r_j, r_k = parts(u)
        return u * r_j - w * r_k

    hi = np.minimum(v, LP01_CUTOFF_V) * (1 - 1e-15)
    lo = np.full_like(v, 1e-12)
    for _ in range(8):
        mid = 0.5 * (lo + hi)
        pos = f(mid) > 0.0
        hi = np.where(pos, mid, hi)
        lo = np.where(pos, lo, mid)
    u = 0.5 * (lo + hi)
    # safeguarded Newton: fall back to bisection when a step leaves the bracket
    for _ in range(40):
        w, r_j, r_k = parts(u)
        fu = u * r_j - w * r_k
        pos = fu > 0.0
        hi = np.where(pos, u, hi)
        lo = np.where(pos, lo, u)
        df = u * (1 + r_j * r_j) + u * (r_k * r_k - 1)
        un = u - fu / df
        out = ~((un >= lo) & (un <= hi))
        un = np.where(out, 0.5 * (lo + hi), un)
        if np.all(np.abs(un - u) <= 1e-14 * u):
            return un
        u = un
    return u


class FiberLP01(DispersionProvider):
    """Fundamental LP01 mode of a weakly guiding step-index fibre."""

    def __init__(self, params: FiberParams = FiberParams(), wavelength_window_um=(0.4, 2.0)):
        lo, hi = wavelength_window_um
        clo, chi = params.cladding.window_um
        if lo < clo or hi > chi:
            raise DomainError("fibre window exceeds the cladding material window")
        super().__init__(wavelength_to_omega(hi), wavelength_to_omega(lo))
        self.params = params
        if np.any(self.v_number_at(np.array([self.omega_min])) < 0.5):
            raise DomainError("fibre mode unguided at the long-wavelength end of the window")

    def v_number_at(self, omega):
        return self.params.v_number(omega_to_wavelength(omega))

    def _beta(self, omega):
        lam = omega_to_wavelength(omega)
        nco, ncl = self.params.indices(lam)
        a = self.params.core_radius_um * 1e-6
        k0 = omega / C_LIGHT
        v = k0 * a * np.sqrt(nco**2 - ncl**2)
        if np.any(v < 0.5):
            raise DomainError("LP01 too weakly guided (V < 0.5)")
        u = _lp01_u(v)
        return np.sqrt((k0 * nco) ** 2 - (u / a) ** 2)


def fiber_beta(params: FiberParams, omega, wavelength_window_um=(0.4, 2.0)):
    """β of the LP01 mode; convenience wrapper around :class:`FiberLP01`."""
    return FiberLP01(params, wavelength_window_um).beta(omega)


# ---- slab and effective-index solver


def slab_index(wavelength_um, thickness_um, n_core, n_top, n_bottom, polarization="TE"):
    """Effective index of the fundamental mode of a three-layer slab.

    ``polarization`` refers to the field orientation relative to the layer
    interfaces (TE: electric field parallel to them).  Inputs broadcast.
    """
    lam, d, n1, n2, n3 = np.broadcast_arrays(
        *(np.asarray(x, dtype=float) for x in (wavelength_um, thickness_um, n_core, n_top, n_bottom))
    )
    k0 = 2 * np.pi / lam
    if polarization == "TE":
        r2 = r3 = np.ones_like(n1)
    elif polarization == "TM":
        r2, r3 = (n1 / n2) ** 2, (n1 / n3) ** 2
    else:
        raise ValueError("polarization must be 'TE' or 'TM'")

    def g(n):
        kx = k0 * np.sqrt(np.maximum(n1 * n1 - n * n, 1e-300))
        g2 = k0 * np.sqrt(np.maximum(n * n - n2 * n2, 0.0))
        g3 = k0 * np.sqrt(np.maximum(n * n - n3 * n3, 0.0))
        return kx * d - np.arctan(r2 * g2 / kx) - np.arctan(r3 * g3 / kx)

    def h(n):
        # -g and its derivative; -g increases with n
        kx = k0 * np.sqrt(np.maximum(n1 * n1 - n * n, 1e-300))
        g2 = k0 * np.sqrt(np.maximum(n * n - n2 * n2, 0.0))
        g3 = k0 * np.sqrt(np.maximum(n * n - n3 * n3, 0.0))
        val = kx * d - np.arctan(r2 * g2 / kx) - np.arctan(r3 * g3 / kx)
        dkx = -k0 * k0 * n / kx
        with np.errstate(divide="ignore", invalid="ignore"):
            dg2 = k0 * k0 * n / g2
            dg3 = k0 * k0 * n / g3
            da2 = r2 * (dg2 * kx - g2 * dkx) / (kx * kx + (r2 * g2) ** 2)
            da3 = r3 * (dg3 * kx - g3 * dkx) / (kx * kx + (r3 * g3) ** 2)
        return -val, -(d * dkx - da2 - da3)

    nclad = np.maximum(n2, n3)
    if np.any(g(nclad) <= 0):
        raise DomainError("slab below cutoff: no guided fundamental mode")
    return _newton_bracketed(h, nclad, n1)


@dataclass(frozen=True)
class DeviceGeometry:
    """Two rectangular silicon guides side by side (dimensions in µm).

    ``separation_um`` is centre-to-centre.  The silica pedestal is recorded but
    folded into the substrate by the effective-index model.
    """

    w_a_um: float = 0.32
    h_a_um: float = 0.22
    w_b_um: float = 0.40
    h_b_um: float = 0.42
    separation_um: float = 0.60
    pedestal_height_um: float = 0.02

    def __post_init__(self):
        dims = (self.w_a_um, self.h_a_um, self.w_b_um, self.h_b_um,
                self.separation_um, self.pedestal_height_um)
        if any(not np.isfinite(x) or x <= 0 for x in dims):
            raise DomainError("all geometry dimensions must be finite and > 0")
        if self.separation_um <= 0.5 * (self.w_a_um + self.w_b_um):
            raise DomainError("guides overlap: separation must exceed (w_a + w_b)/2")

    @property
    def gap_um(self):
        return self.separation_um - 0.5 * (self.w_a_um + self.w_b_um)

    def as_tuple(self):
        return (self.w_a_um, self.h_a_um, self.w_b_um, self.h_b_um,
                self.separation_um, self.pedestal_height_um)


class RectEIM(DispersionProvider):
    """Rectangular silicon wire on silica, air-clad, via the effective-index method.

    The vertical slab (core height, air above, silica below) is solved first; its
    effective index then forms the core of a lateral slab of the given width in
    air, solved in the orthogonal polarisation.
    """

    def __init__(self, width_um, height_um, polarization="TE", core=SILICON,
                 substrate=FUSED_SILICA, cover_index=1.0, wavelength_window_um=None):
        if width_um <= 0 or height_um <= 0:
            raise DomainError("guide dimensions must be > 0")
        if polarization not in ("TE", "TM"):
            raise ValueError("polarization must be 'TE' or 'TM'")
        if wavelength_window_um is None:
            lo = max(core.window_um[0], substrate.window_um[0])
            hi = min(core.window_um[1], substrate.window_um[1], 2.5)
        else:
            lo, hi = wavelength_window_um
        super().__init__(wavelength_to_omega(hi), wavelength_to_omega(lo))
        self.width_um = float(width_um)
        self.height_um = float(height_um)
        self.polarization = polarization
        self.core = core
        self.substrate = substrate
        self.cover_index = float(cover_index)

    def slab_and_lateral(self, wavelength_um):
        lam = np.asarray(wavelength_um, dtype=float)
        ncore = material_index(self.core, lam)
        nsub = material_index(self.substrate, lam)
        first, second = ("TE", "TM") if self.polarization == "TE" else ("TM", "TE")
        n_slab = slab_index(lam, self.height_um, ncore, self.cover_index, nsub, first)
        n_eff = slab_index(lam, self.width_um, n_slab, self.cover_index, self.cover_index, second)
        return n_slab, n_eff, nsub

    def _beta(self, omega):
        lam = omega_to_wavelength(omega)
        _, n_eff, nsub = self.slab_and_lateral(lam)
        if np.any(n_eff <= nsub):
            raise DomainError("effective index below the substrate index: mode leaks")
        return n_eff * omega / C_LIGHT


def rect_beta(width_um, height_um, omega, polarization="TE"):
    """β of one silicon wire of the given cross-section (effective-index method)."""
    return RectEIM(width_um, height_um, polarization).beta(omega)


# ---- tabulated


class Tabulated(DispersionProvider):
    """Piecewise-cubic interpolation of β(ω) through tabulated effective indices."""

    kind = "tabulated"
    MIN_ROWS = 8

    def __init__(self, wavelength_um: Sequence[float], n_eff: Sequence[float]):
        lam = np.asarray(wavelength_um, dtype=float)
        n = np.asarray(n_eff, dtype=float)
        if lam.ndim != 1 or lam.shape != n.shape:
            raise ValueError("wavelength and n_eff must be 1-D arrays of equal length")
        if lam.size < self.MIN_ROWS:
            raise ValueError(f"tabulated dispersion needs at least {self.MIN_ROWS} rows")
        d = np.diff(lam)
        if not (np.all(d > 0) or np.all(d < 0)):
            raise ValueError("wavelengths must be strictly monotone (no duplicates)")
        if np.any(~np.isfinite(n)) or np.any(n <= 0):
            raise ValueError("effective indices must be finite and positive")
        om = wavelength_to_omega(lam)
        order = np.argsort(om)
        self.omega_nodes = om[order]
        self.beta_nodes = (n * om / C_LIGHT)[order]
        self.wavelength_nodes_um = lam[order]
        self.n_eff_nodes = n[order]
        super().__init__(self.omega_nodes[0], self.omega_nodes[-1])
        self._scale = 1.0 / self.omega_nodes[-1]
        self._spline = CubicSpline(self.omega_nodes * self._scale, self.beta_nodes)

    def _beta(self, omega):
        return self._spline(omega * self._scale)


def load_tabulated(rows) -> Tabulated:
    """Build a :class:`Tabulated` provider from ``(wavelength_um, n_eff)`` rows."""
    rows = [tuple(map(float, r)) for r in rows]
    if len(rows) < Tabulated.MIN_ROWS:
        raise ValueError(f"tabulated dispersion needs at least {Tabulated.MIN_ROWS} rows")
    lam, n = zip(*rows)
    return Tabulated(lam, n)


def _read_two_column_csv(path_or_text, header):
    """Rows of a two-column CSV with the given header; ``#`` lines are comments."""
    text = Path(path_or_text).read_text()
    lines = [ln for ln in text.splitlines() if ln.strip() and not ln.lstrip().startswith("#")]
    reader = csv.reader(lines)
    got = [h.strip() for h in next(reader)]
    if got != list(header):
        raise ValueError(f"expected header {','.join(header)!r}, got {','.join(got)!r}")
    rows = [(float(a), float(b)) for a, b in reader]
    lam = [r[0] for r in rows]
    if any(b <= a for a, b in zip(lam, lam[1:])):
        raise ValueError("rows must be sorted by ascending wavelength without duplicates")
    return rows


def read_dispersion_csv(path) -> Tabulated:
    """Read a ``wavelength_um,n_eff`` table (``#`` comment lines allowed)."""
    return load_tabulated(_read_two_column_csv(path, ("wavelength_um", "n_eff")))


def write_dispersion_csv(path, wavelength_um, n_eff, comment=None):
    with open(path, "w", newline="") as fh:
        if comment:
            fh.write(f"# {comment}\n")
        fh.write("wavelength_um,n_eff\n")
        for lam, n in zip(wavelength_um, n_eff):
            fh.write(f"{float(lam)!r},{float(n)!r}\n")


def sample_provider(provider: DispersionProvider, wavelengths_um) -> Tabulated:
    """Tabulate a provider at the given wavelengths (e.g. to cache an expensive model)."""
    lam = np.sort(np.asarray(wavelengths_um, dtype=float))
    return Tabulated(lam, provider.n_eff(lam))


# --------------------------------------------------------------------------
# derivatives


def group_index(provider: DispersionProvider, omega, rel_step=1e-4):
    """Group index c·dβ/dω by Richardson-extrapolated central differences.

    Uses steps ``h = rel_step·ω`` and ``h/2``.  The whole stencil must lie in
    the provider domain.
    """
    om = np.asarray(omega, dtype=float)
    h = rel_step * om
    if not provider.contains(om - h) or not provider.contains(om + h):
        raise DomainError("group_index stencil crosses the provider domain edge")
    b = provider.beta
    d1 = (b(om + h) - b(om - h)) / (2 * h)
    d2 = (b(om + h / 2) - b(om - h / 2)) / h
    ng = C_LIGHT * (4 * d2 - d1) / 3
    return ng if np.ndim(ng) else float(ng)


def beta_derivatives(provider: DispersionProvider, omega, rel_step=1e-3):
    """(β, β1, β2) at ``omega`` via a five-point stencil; β1 in s/m, β2 in s²/m."""
    om = float(omega)
    h = rel_step * om
    if not provider.contains(om - 2 * h) or not provider.contains(om + 2 * h):
        raise DomainError("derivative stencil crosses the provider domain edge")
    pts = provider.beta(om + h * np.array([-2.0, -1.0, 0.0, 1.0, 2.0]))
    b1 = (pts[0] - 8 * pts[1] + 8 * pts[3] - pts[4]) / (12 * h)
    b2 = (-pts[0] + 16 * pts[1] - 30 * pts[2] + 16 * pts[3] - pts[4]) / (12 * h * h)
    return float(pts[2]), float(b1), float(b2)
