"""Split-step propagation of dual-pump FWM in a pair of coupled guides.

Four narrowband envelopes (pump 1, pump 2, signal, idler) are carried in
each guide on a common time grid.  Per step (Strang splitting):

* half linear step in the frequency domain: dispersion relative to the
  field's reference wavenumber, in the retarded frame of pump 2, plus the
  exact 2x2 inter-guide coupling rotation;
* full nonlinear step, RK4 on ``da_f/dz = iγ_f(Ψ_f + Φ_f)`` with
  ``Ψ_f = (|a_f|² + 2Σ_{J≠f}|a_J|²) a_f`` and the FWM terms
  ``Φ_p1 = 2 a_p2* a_s a_i``, ``Φ_p2 = 2 a_p1* a_s a_i``,
  ``Φ_s = 2 a_p1 a_p2 a_i*``, ``Φ_i = 2 a_p1 a_p2 a_s*``, local to each guide;
* half linear step.

Reference wavenumbers: signal, idler and pump 2 use their guide-A carrier
β; pump 1 uses ``β_s + β_i - β_p2``.  The linear mismatch Δk then shows up
as a slow rotation of pump 1 and the FWM terms carry no explicit phase
factor, so the step size is not tied to 1/Δk.
"""

from __future__ import annotations

import csv
import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np
from scipy import fft as sfft
from scipy.constants import hbar
from scipy.optimize import curve_fit

from . import kernels
from .coupledmode import supermode_fields
from .dispersion import DispersionProvider, beta_derivatives, wavelength_to_omega
from .errors import NumericalError
from .phasematch import idler_wavelength

FIELDS = ("p1", "p2", "s", "i")
LAUNCHES = ("even", "odd", "mixed")


@dataclass(frozen=True)
class SimulationConfig:
    """Everything needed to run one propagation.

    ``kappa_per_m`` holds the per-field coupling constants (p1, p2, s, i);
    by default only pump 2 couples.  ``odd_fraction`` is the fraction of
    pump-2 power launched in the odd supermode and overrides ``launch``
    (even = 0, odd = 1, mixed = 0.5).  With ``gamma_scaling="frequency"``
    each field's nonlinear coefficient is ``γ ω_f / ω_ref`` (ω_ref the mean
    pump frequency), which makes the Manley-Rowe relations exact.
    """

    guide_a: DispersionProvider
    length_m: float
    dz_m: float
    gamma_per_w_m: float
    lambda_p1_um: float = 0.532
    lambda_p2_um: float = 1.55
    lambda_s_um: Optional[float] = None  # default: degenerate point
    guide_b: Optional[DispersionProvider] = None
    kappa_per_m: tuple = (0.0, 0.0, 0.0, 0.0)
    p1_power_w: float = 1.0
    p2_power_w: float = 1.0
    signal_seed_w: float = 1e-9
    idler_seed_w: float = 0.0
    launch: str = "odd"
    odd_fraction: Optional[float] = None
    pump1_shape: str = "cw"
    pump1_fwhm_ps: float = 1.0
    n_t: int = 256
    t_window_ps: float = 20.0
    noise_seed: Optional[int] = None
    gamma_scaling: str = "frequency"
    nl_phase_warn_rad: float = 0.05

    def __post_init__(self):
        if not (self.length_m > 0 and self.dz_m > 0):
            raise ValueError("length and dz must be positive")
        if self.dz_m > self.length_m:
            raise ValueError("dz must not exceed the length")
        if self.n_t < 256 or self.n_t & (self.n_t - 1):
            raise ValueError("n_t must be a power of two >= 256")
        if len(self.kappa_per_m) != 4 or any(k < 0 for k in self.kappa_per_m):
            raise ValueError("kappa_per_m needs four non-negative entries")
        if self.launch not in LAUNCHES:
            raise ValueError(f"launch must be one of {LAUNCHES}")
        f = self.odd_fraction
        if f is not None and not 0.0 <= f <= 1.0:
            raise ValueError("odd_fraction must lie in [0, 1]")
        if self.pump1_shape not in ("cw", "gaussian"):
            raise ValueError("pump1_shape must be 'cw' or 'gaussian'")
        if self.gamma_scaling not in ("frequency", "constant"):
            raise ValueError("gamma_scaling must be 'frequency' or 'constant'")
        if min(self.p1_power_w, self.p2_power_w, self.signal_seed_w, self.idler_seed_w) < 0:
            raise ValueError("powers must be >= 0")
        if self.gamma_per_w_m < 0:
            raise ValueError("gamma must be >= 0")

    @property
    def signal_um(self):
        if self.lambda_s_um is not None:
            return self.lambda_s_um
        return 2.0 / (1.0 / self.lambda_p1_um + 1.0 / self.lambda_p2_um)

    @property
    def idler_um(self):
        return idler_wavelength(self.lambda_p1_um, self.lambda_p2_um, self.signal_um)

    @property
    def wavelengths_um(self):
        return (self.lambda_p1_um, self.lambda_p2_um, self.signal_um, self.idler_um)

    @property
    def omegas(self):
        return wavelength_to_omega(np.array(self.wavelengths_um))

    @property
    def fraction_odd(self):
        if self.odd_fraction is not None:
            return self.odd_fraction
        return {"even": 0.0, "odd": 1.0, "mixed": 0.5}[self.launch]

    @property
    def n_steps(self):
        return max(1, int(math.ceil(self.length_m / self.dz_m - 1e-9)))

    def field_gammas(self):
        om = self.omegas
        if self.gamma_scaling == "constant":
            return np.full(4, float(self.gamma_per_w_m))
        w_ref = 0.5 * (om[0] + om[1])
        return self.gamma_per_w_m * om / w_ref

    def with_kappa_p2(self, kappa):
        k = list(self.kappa_per_m)
        k[1] = float(kappa)
        return replace(self, kappa_per_m=tuple(k))


@dataclass
class SimulationState:
    """Envelopes ``a[g, f, t]`` (√W) for guide g ∈ {A, B}, field f ∈ {p1, p2, s, i}."""

    z: float
    a: np.ndarray
    t_ps: np.ndarray

    def powers(self):
        """Mean power per guide and field, shape (2, 4), in W."""
        return np.mean(self.a.real**2 + self.a.imag**2, axis=-1)

    def check_finite(self):
        if not np.all(np.isfinite(self.a)):
            raise NumericalError(f"non-finite field at z = {self.z:.6g} m")


@dataclass
class PropagationRecord:
    """Per-record z, powers (n, 2, 4) in W and cumulative photon-flux changes (n, 4) in 1/s."""

    z: np.ndarray
    powers: np.ndarray
    photons: np.ndarray
    final: SimulationState
    omegas: np.ndarray
    warnings: list = field(default_factory=list)

    def total(self, fld):
        j = FIELDS.index(fld)
        return self.powers[:, :, j].sum(axis=1)

    def guide(self, fld, g="A"):
        return self.powers[:, 0 if g == "A" else 1, FIELDS.index(fld)]

    def manley_rowe_residual(self):
        """Largest deviation from the photon-flux relations, relative to the photons exchanged.

        Relations: Δn_s = Δn_i = -Δn_p1 = -Δn_p2.
        """
        d = self.photons[-1]
        scale = max(abs(d[2]), abs(d[3]))
        if scale == 0:
            return 0.0
        dev = max(abs(d[2] - d[3]), abs(d[2] + d[0]), abs(d[2] + d[1]))
        return float(dev / scale)

    def signal_gain_db(self):
        p = self.total("s")
        return float(10 * np.log10(p[-1] / p[0]))


# --------------------------------------------------------------------------
# construction


def _launch_coefficients(config: SimulationConfig, delta_beta, kappa):
    """Guide amplitudes (c_A, c_B) of the pump-2 launch."""
    sf = supermode_fields(delta_beta, kappa)
    e = np.array(sf.even)
    o = np.array(sf.odd)
    if o[0] < 0:  # sign so that the equal even/odd mix lands in guide A
        o = -o
    fo = config.fraction_odd
    return math.sqrt(1.0 - fo) * e + math.sqrt(fo) * o


def build_state(config: SimulationConfig) -> SimulationState:
    """Initial fields: pump 1, signal and idler in guide A; pump 2 per launch."""
    n = config.n_t
    dt = config.t_window_ps / n
    t = (np.arange(n) - n // 2) * dt
    a = np.zeros((2, 4, n), dtype=complex)
    if config.pump1_shape == "cw":
        a[0, 0] = math.sqrt(config.p1_power_w)
    else:
        t0 = config.pump1_fwhm_ps / (2 * math.sqrt(math.log(2)))
        a[0, 0] = math.sqrt(config.p1_power_w) * np.exp(-0.5 * (t / t0) ** 2)
    om = config.omegas
    guide_b = config.guide_b or config.guide_a
    dbeta = 0.5 * float(config.guide_a.beta(om[1]) - guide_b.beta(om[1]))
    c = _launch_coefficients(config, dbeta, config.kappa_per_m[1])
    a[0, 1] = c[0] * math.sqrt(config.p2_power_w)
    a[1, 1] = c[1] * math.sqrt(config.p2_power_w)
    a[0, 2] = math.sqrt(config.signal_seed_w)
    a[0, 3] = math.sqrt(config.idler_seed_w)
    if config.noise_seed is not None:
        rng = np.random.default_rng(config.noise_seed)
        for j in (2, 3):
            # half a photon per temporal mode: <|a|²> = ħω / (2 dt)
            var = hbar * om[j] / (2 * dt * 1e-12)
            a[:, j] += math.sqrt(var / 2) * (rng.standard_normal((2, n)) + 1j * rng.standard_normal((2, n)))
    return SimulationState(0.0, a, t)


@dataclass
class LinearOperator:
    """Per-field, per-bin 2x2 propagators for step sizes h (full) and h/2."""

    full: tuple
    half: tuple

    @staticmethod
    def build(config: SimulationConfig, dz):
        n = config.n_t
        dt = config.t_window_ps * 1e-12 / n
        Om = 2 * np.pi * sfft.fftfreq(n, dt)
        om = config.omegas
        ga = config.guide_a
        gb = config.guide_b or ga
        b_ref = ga.beta(om)
        rho = b_ref.copy()
        rho[0] = b_ref[2] + b_ref[3] - b_ref[1]
        beta1_ref = float(beta_derivatives(ga, om[1])[1])
        ba = np.empty((4, n))
        bb = np.empty((4, n))
        for j in range(4):
            w = om[j] + Om
            ba[j] = ga.beta(w) - rho[j] - Om * beta1_ref
            bb[j] = gb.beta(w) - rho[j] - Om * beta1_ref
        kap = np.asarray(config.kappa_per_m, float)[:, None] * np.ones(n)

        def prop(h):
            bbar = 0.5 * (ba + bb)
            d = 0.5 * (ba - bb)
            psi = np.hypot(d, kap)
            ph = np.exp(1j * bbar * h)
            c = np.cos(psi * h)
            with np.errstate(invalid="ignore", divide="ignore"):
                sinc = np.where(psi > 0, np.sin(psi * h) / np.where(psi > 0, psi, 1.0), h)
            u11 = ph * (c + 1j * sinc * d)
            u22 = ph * (c - 1j * sinc * d)
            u12 = ph * (1j * sinc * kap)
            return (np.ascontiguousarray(u11), np.ascontiguousarray(u12), np.ascontiguousarray(u22))

        return LinearOperator(prop(dz), prop(0.5 * dz))


def _linear(a, ops, apply_linear, workers):
    spec = sfft.fft(a, axis=-1, workers=workers)
    apply_linear(spec, *ops)
    a[...] = sfft.ifft(spec, axis=-1, workers=workers)


def step(state: SimulationState, config: SimulationConfig, dz, backend=None,
         linear: Optional[LinearOperator] = None, workers=1):
    """Advance ``state`` by one Strang step of size ``dz``; returns (state, ΔP per field)."""
    nl, lin = kernels.get_backend(backend)
    op = linear or LinearOperator.build(config, dz)
    _linear(state.a, op.half, lin, workers)
    dp = nl(state.a, config.field_gammas(), float(dz))
    _linear(state.a, op.half, lin, workers)
    state.z += dz
    if not np.all(np.isfinite(dp)):
        raise NumericalError(f"non-finite field at z = {state.z:.6g} m")
    return state, np.asarray(dp)


def propagate(config: SimulationConfig, record_every=1, backend=None, workers=1,
              state: Optional[SimulationState] = None) -> PropagationRecord:
    """Run to z = L, recording every ``record_every`` steps (0: endpoints only).

    Adjacent linear half steps are merged between records.
    """
    n = config.n_steps
    dz = config.length_m / n
    nl, lin = kernels.get_backend(backend)
    op = LinearOperator.build(config, dz)
    st = state if state is not None else build_state(config)
    g = config.field_gammas()
    om = config.omegas
    notes = []
    p_peak = float(np.max(np.sum(np.abs(st.a) ** 2, axis=1)))
    nl_phase = 2 * float(np.max(g)) * p_peak * dz
    if nl_phase > config.nl_phase_warn_rad:
        msg = f"nonlinear phase per step {nl_phase:.3g} rad exceeds {config.nl_phase_warn_rad} rad"
        warnings.warn(msg, RuntimeWarning, stacklevel=2)
        notes.append(msg)

    zs = [st.z]
    pw = [st.powers()]
    ph = [np.zeros(4)]
    acc = np.zeros(4)
    every = record_every if record_every and record_every > 0 else n
    _linear(st.a, op.half, lin, workers)
    for k in range(1, n + 1):
        dp = nl(st.a, g, dz)
        acc += np.asarray(dp)
        if not np.all(np.isfinite(dp)):
            raise NumericalError(f"non-finite field at z = {st.z + dz:.6g} m (step {k})")
        st.z = k * dz
        if k % every == 0 or k == n:
            _linear(st.a, op.half, lin, workers)
            zs.append(st.z)
            pw.append(st.powers())
            ph.append(acc / (hbar * om))
            if k < n:
                _linear(st.a, op.half, lin, workers)
        else:
            _linear(st.a, op.full, lin, workers)
    st.check_finite()
    return PropagationRecord(np.array(zs), np.array(pw), np.array(ph), st, om, notes)


# --------------------------------------------------------------------------
# gain scans


@dataclass
class GainScan:
    kappa_per_m: np.ndarray
    gain_db: np.ndarray

    @property
    def peak_kappa(self):
        return float(self.kappa_per_m[int(np.argmax(self.gain_db))])

    @property
    def peak_gain_db(self):
        return float(np.max(self.gain_db))

    def bandwidth(self, drop_db=3.0):
        """Width in κ of the region within ``drop_db`` of the peak (sample resolution)."""
        ok = self.gain_db >= self.peak_gain_db - drop_db
        k = self.kappa_per_m[ok]
        return float(k.max() - k.min())


def _gain_point(config, kappa, backend):
    rec = propagate(config.with_kappa_p2(kappa), record_every=0, backend=backend)
    return rec.signal_gain_db()


def gain_scan(config: SimulationConfig, kappa_range, n_points, threads=1, backend=None) -> GainScan:
    """Signal gain (dB) after length L versus κ_p2."""
    ks = np.linspace(kappa_range[0], kappa_range[1], int(n_points))
    if threads and threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as ex:
            gains = list(ex.map(lambda k: _gain_point(config, k, backend), ks))
    else:
        gains = [_gain_point(config, k, backend) for k in ks]
    return GainScan(ks, np.array(gains))


# --------------------------------------------------------------------------
# analytic small-signal reference (odd launch, CW pumps)


@dataclass(frozen=True)
class SmallSignalGain:
    """Undepleted-pump solution for the signal/idler pair in guide A.

    ``P_i(z) = P_s(0) (r_i / g)² sinh²(g z)`` with
    ``g = sqrt(r_s r_i - q̄²)``; the SPM/XPM phases of both pumps are included.
    """

    g: float  # exponent (1/m); imaginary part dropped when no gain
    q_bar: float
    r_s: float
    r_i: float

    def idler_power(self, z, p_s0):
        z = np.asarray(z, float)
        return p_s0 * (self.r_i / self.g) ** 2 * np.sinh(self.g * z) ** 2


def linear_mismatch(config: SimulationConfig):
    """β_p1 + β_p2 - β_s - β_i in guide A at the carriers (1/m)."""
    b = config.guide_a.beta(config.omegas)
    return float(b[0] + b[1] - b[2] - b[3])


def small_signal_gain(config: SimulationConfig, kappa=None) -> SmallSignalGain:
    """Closed-form exponent for the odd-launch symmetric pair.

    Pump 2 carries half its power in guide A; its phase rotates at
    ``-κ + γ_2 (P_2A + P_1)`` (supermode average of the guide-local
    nonlinear shifts), pump 1 at ``Δk + γ_1 (P_1 + 2 P_2A)``.
    """
    k = config.kappa_per_m[1] if kappa is None else kappa
    g1, g2, gs, gi = config.field_gammas()
    p1 = config.p1_power_w
    p2a = 0.5 * config.p2_power_w
    theta = linear_mismatch(config) - k + g1 * (p1 + 2 * p2a) + g2 * (p2a + p1)
    qs = 2 * gs * (p1 + p2a) - theta / 2
    qi = 2 * gi * (p1 + p2a) - theta / 2
    rs = 2 * gs * math.sqrt(p1 * p2a)
    ri = 2 * gi * math.sqrt(p1 * p2a)
    qbar = 0.5 * (qs + qi)
    g2sq = rs * ri - qbar**2
    return SmallSignalGain(math.sqrt(g2sq) if g2sq > 0 else 0.0, qbar, rs, ri)


def peak_kappa_analytic(config: SimulationConfig):
    """κ_p2 maximising the odd-launch gain: Δk - [(γ_1 + γ_2) P_1 + γ_2 P_2A]."""
    g1, g2, _, _ = config.field_gammas()
    return linear_mismatch(config) - ((g1 + g2) * config.p1_power_w + g2 * 0.5 * config.p2_power_w)


def effective_gamma_p(config: SimulationConfig):
    """The γP that makes the contour-level mismatch peak coincide with :func:`peak_kappa_analytic`."""
    g1, g2, _, _ = config.field_gammas()
    return (g1 + g2) * config.p1_power_w + g2 * 0.5 * config.p2_power_w


def fit_growth_exponent(z, idler_power):
    """Least-squares fit of ``C sinh²(g z)``; returns (g, C)."""
    z = np.asarray(z, float)
    p = np.asarray(idler_power, float)
    zl = z[-1]
    g0 = max(np.arcsinh(math.sqrt(max(p[-1], 1e-300) / max(p[len(p) // 2], 1e-300))) / zl, 1.0 / zl)
    c0 = p[-1] / np.sinh(g0 * zl) ** 2

    # fit in units of the initial guess so both parameters are O(1)
    def model(zz, gs, cs):
        return cs * np.sinh(g0 * gs * zz) ** 2

    popt, _ = curve_fit(model, z, p / c0, p0=(1.0, 1.0), xtol=1e-14, ftol=1e-14, maxfev=20000)
    return float(popt[0] * g0), float(popt[1] * c0)


def staircase_period(z, idler_power, pump2_a_power):
    """Plateau spacing of the idler growth and the guide-A pump-2 oscillation period.

    Plateaus are local minima of dP_i/dz; the pump period is the spacing of
    the minima of P_p2A.  Both returned as medians over the run (m).
    """
    z = np.asarray(z, float)
    dpi = np.gradient(np.asarray(idler_power, float), z)

    def minima_spacing(y):
        idx = np.nonzero((y[1:-1] < y[:-2]) & (y[1:-1] <= y[2:]))[0] + 1
        if idx.size < 2:
            return math.nan
        # parabolic refinement of each minimum
        zz = []
        for i in idx:
            y0, y1, y2 = y[i - 1], y[i], y[i + 1]
            den = y0 - 2 * y1 + y2
            off = 0.5 * (y0 - y2) / den if den != 0 else 0.0
            zz.append(z[i] + off * (z[i + 1] - z[i]))
        return float(np.median(np.diff(zz)))

    return minima_spacing(dpi), minima_spacing(np.asarray(pump2_a_power, float))


# --------------------------------------------------------------------------
# output


def write_record_csv(path, rec: PropagationRecord):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["z_m", "P_p1A", "P_p2A", "P_sA", "P_iA", "P_p1B", "P_p2B", "P_sB", "P_iB"])
        for z, p in zip(rec.z, rec.powers):
            w.writerow([repr(float(z))] + [repr(float(x)) for x in p.reshape(-1)])


def write_gain_csv(path, scan: GainScan):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["kappa_per_m", "gain_db"])
        for k, g in zip(scan.kappa_per_m, scan.gain_db):
            w.writerow([repr(float(k)), repr(float(g))])


__all__ = [
    "GainScan",
    "LinearOperator",
    "PropagationRecord",
    "SimulationConfig",
    "SimulationState",
    "SmallSignalGain",
    "build_state",
    "effective_gamma_p",
    "fit_growth_exponent",
    "gain_scan",
    "linear_mismatch",
    "peak_kappa_analytic",
    "propagate",
    "small_signal_gain",
    "staircase_period",
    "step",
    "write_gain_csv",
    "write_record_csv",
]
