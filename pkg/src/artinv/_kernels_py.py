"""Pure numpy implementations of the hot kernels.

These mirror ``_kernels.pyx`` function for function. They are used when the
compiled extension is unavailable or ``ARTINV_PURE_PYTHON`` is set, and they
serve as the reference the compiled path is tested against.
"""
from __future__ import annotations

import numpy as np

# CGS air/tissue constants for the lossy tube model.
RHO = 1.14e-3  # g/cm^3
MU = 1.86e-4  # viscosity, g/(cm s)
LAMBDA = 5.5e-5  # heat conduction, cal/(cm s K)
CP = 0.24  # specific heat, cal/(g K)
ETA = 1.4  # adiabatic constant
WALL_MASS = 1.5  # g/cm^2
WALL_RES = 1600.0  # g/(s cm^2)
WALL_STIFF = 3.0e5  # g/(s^2 cm^2)

REFINE_TOL = 1e-3  # Hz, final bracket width
MAX_REFINE_ITER = 100
PROMINENCE = 10.0 ** (1.0 / 20.0)  # lossy peaks must rise 1 dB above the preceding valley


def area_function(x, mean, basis, alpha, beta, scale, a_min, l_min):
    """Map articulatory parameters to (areas, lengths) of the tube sections.

    ``mean`` has length 2*G (sagittal distances then section lengths) and
    ``basis`` has shape (7, 2*G).
    """
    x = np.asarray(x, dtype=np.float64)
    shape = mean + x @ basis
    g = alpha.shape[0]
    dist = shape[:g]
    lengths = np.maximum(shape[g:], l_min) * scale
    areas = alpha * np.power(np.maximum(dist, 0.0), beta) * (scale * scale)
    areas = np.maximum(areas, a_min)
    return areas, lengths


def _section_matrices(areas, lengths, freqs, c, lossy):
    omega = 2.0 * np.pi * freqs[None, :]
    A = areas[:, None]
    ell = lengths[:, None]
    if not lossy:
        theta = omega * ell / c
        z0 = RHO * c / A
        cs = np.cos(theta)
        sn = np.sin(theta)
        return cs + 0j, 1j * z0 * sn, 1j * sn / z0, cs + 0j
    perim = 2.0 * np.sqrt(np.pi * A)
    z = (perim / (A * A)) * np.sqrt(omega * RHO * MU / 2.0) + 1j * omega * RHO / A
    zw = WALL_RES + 1j * (omega * WALL_MASS - WALL_STIFF / omega)
    y = (
        perim * (ETA - 1.0) / (RHO * c * c) * np.sqrt(LAMBDA * omega / (2.0 * CP * RHO))
        + 1j * omega * A / (RHO * c * c)
        + perim / zw
    )
    gamma = np.sqrt(z * y)
    zc = np.sqrt(z / y)
    ch = np.cosh(gamma * ell)
    sh = np.sinh(gamma * ell)
    return ch, zc * sh, sh / zc, ch


def _radiation(area_lips, freqs, c):
    omega = 2.0 * np.pi * freqs
    rr = 128.0 * RHO * c / (9.0 * np.pi**2 * area_lips)
    lr = 8.0 * RHO / (3.0 * np.pi * np.sqrt(np.pi * area_lips))
    return 1j * omega * lr * rr / (rr + 1j * omega * lr)


def tract_denominator(areas, lengths, freqs, c, lossy):
    """Return U_glottis / U_lips at each frequency (complex)."""
    freqs = np.asarray(freqs, dtype=np.float64)
    a, b, cc, d = _section_matrices(areas, lengths, freqs, c, lossy)
    ka = np.ones(freqs.shape, dtype=complex)
    kb = np.zeros(freqs.shape, dtype=complex)
    kc = np.zeros(freqs.shape, dtype=complex)
    kd = np.ones(freqs.shape, dtype=complex)
    for i in range(areas.shape[0]):
        ka, kb, kc, kd = (
            ka * a[i] + kb * cc[i],
            ka * b[i] + kb * d[i],
            kc * a[i] + kd * cc[i],
            kc * b[i] + kd * d[i],
        )
    if not lossy:
        return kd
    return kc * _radiation(areas[-1], freqs, c) + kd


def _illinois(areas, lengths, c, lo, hi, flo, fhi):
    side = 0
    for _ in range(MAX_REFINE_ITER):
        if hi - lo <= REFINE_TOL:
            break
        x = (lo * fhi - hi * flo) / (fhi - flo)
        if not (lo < x < hi):
            x = 0.5 * (lo + hi)
        fx = tract_denominator(areas, lengths, np.array([x]), c, False).real[0]
        if fx == 0.0:
            return x
        if np.signbit(fx) == np.signbit(flo):
            lo, flo = x, fx
            if side == -1:
                fhi *= 0.5
            side = -1
        else:
            hi, fhi = x, fx
            if side == 1:
                flo *= 0.5
            side = 1
    return 0.5 * (lo + hi)


def tract_resonances(areas, lengths, c, lossy, step, fmax, nmax):
    """First ``nmax`` resonance frequencies below ``fmax``.

    Lossless: sign changes of the (real) denominator refined by Illinois
    regula falsi.
    Lossy: local minima of |denominator| refined by golden-section search.
    """
    grid = step * np.arange(1, int(fmax / step) + 1)
    den = tract_denominator(areas, lengths, grid, c, lossy)
    if not lossy:
        re = den.real
        idx = np.nonzero(np.signbit(re[:-1]) != np.signbit(re[1:]))[0][:nmax]
        return np.array(
            [_illinois(areas, lengths, c, grid[i], grid[i + 1], re[i], re[i + 1]) for i in idx],
            dtype=np.float64,
        )
    mag = np.abs(den)
    candidates = np.nonzero((mag[1:-1] < mag[:-2]) & (mag[1:-1] <= mag[2:]))[0] + 1
    picked = []
    last = 0
    for j in candidates:
        if mag[last : j + 1].max() >= PROMINENCE * mag[j]:
            picked.append(j)
            last = j
            if len(picked) == nmax:
                break
    interior = np.array(picked, dtype=np.int64)
    lo = grid[interior - 1].copy()
    hi = grid[interior + 1].copy()
    invphi = (np.sqrt(5.0) - 1.0) / 2.0
    x1 = hi - invphi * (hi - lo)
    x2 = lo + invphi * (hi - lo)
    f1 = np.abs(tract_denominator(areas, lengths, x1, c, lossy))
    f2 = np.abs(tract_denominator(areas, lengths, x2, c, lossy))
    while lo.size and np.max(hi - lo) > REFINE_TOL:
        left = f1 < f2
        hi = np.where(left, x2, hi)
        lo = np.where(left, lo, x1)
        nx1 = np.where(left, hi - invphi * (hi - lo), x2)
        nx2 = np.where(left, x1, lo + invphi * (hi - lo))
        x1, x2 = nx1, nx2
        probe = np.where(left, x1, x2)
        fp = np.abs(tract_denominator(areas, lengths, probe, c, lossy))
        nf1 = np.where(left, fp, f2)
        nf2 = np.where(left, f1, fp)
        f1, f2 = nf1, nf2
    return 0.5 * (lo + hi)
