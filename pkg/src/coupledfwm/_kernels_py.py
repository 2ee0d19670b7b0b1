"""Pure numpy implementations of the split-step hot loops.

Layout of the field array ``a``: shape ``(2, 4, N)`` complex128, axes are
(guide A/B, field p1/p2/s/i, time sample).
"""

import numpy as np


def _rhs(a, g):
    p = a.real**2 + a.imag**2
    tot = p.sum(axis=1, keepdims=True)
    out = (2.0 * tot - p) * a
    p1, p2, s, i = a[:, 0], a[:, 1], a[:, 2], a[:, 3]
    si = s * i
    pp = p1 * p2
    out[:, 0] += 2.0 * np.conj(p2) * si
    out[:, 1] += 2.0 * np.conj(p1) * si
    out[:, 2] += 2.0 * pp * np.conj(i)
    out[:, 3] += 2.0 * pp * np.conj(s)
    out *= 1j * g
    return out


def nonlinear_rk4(a, gamma, h):
    """One RK4 step of ``da_f/dz = iγ_f(Ψ_f + Φ_f)`` in place.

    Returns the power change of each field, summed over guides and averaged
    over time, accumulated from the increment so it does not suffer from
    cancellation against large pump powers.
    """
    g = np.asarray(gamma, dtype=float)[None, :, None]
    k1 = _rhs(a, g)
    k2 = _rhs(a + 0.5 * h * k1, g)
    k3 = _rhs(a + 0.5 * h * k2, g)
    k4 = _rhs(a + h * k3, g)
    da = (h / 6.0) * (k1 + 2.0 * (k2 + k3) + k4)
    dp = 2.0 * (a.real * da.real + a.imag * da.imag) + da.real**2 + da.imag**2
    a += da
    return dp.sum(axis=0).mean(axis=-1)


def apply_linear(spec, u11, u12, u22):
    """Per-bin 2x2 guide coupling: ``[A, B] <- [[u11, u12], [u12, u22]] [A, B]`` in place."""
    a = spec[0].copy()
    spec[0] = u11 * a + u12 * spec[1]
    spec[1] = u12 * a + u22 * spec[1]
