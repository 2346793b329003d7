"""Compiled Monte Carlo kernels: counter-based RNG and log-space path scans.

The random stream is a pure function of (seed, path index, step): a
Philox-4x32-10 block keyed by the 64-bit seed, with the counter words holding
the step-pair index and the path index, feeds a machine-precision rational
inverse normal CDF.  Two normals come out of each block.  Parallel scheduling
therefore cannot change any draw, and any single path can be reproduced in
isolation.  Bridge-correction uniforms live in a second stream (a flipped
counter bit) so enabling the correction does not perturb the underlying paths.

Everything here is private; `simulate` wraps it with validated types.
"""

from __future__ import annotations

import math
import warnings

import numpy as np

# the TBB version probe is noise on systems with an older TBB; numba falls
# back to another threading layer and results are unaffected
warnings.filterwarnings("ignore", message=".*TBB.*")

from numba import njit, prange

# Normals generated per buffer refill (= 2 Philox blocks per pair).
_BUF = 512

_TWO_M53 = 1.0 / 9007199254740992.0

# Rational approximations for the inverse normal CDF (Wichura's PPND16 layout;
# max relative error ~1e-15 over the open unit interval).
_PPND_A = (3.3871328727963666080e0, 1.3314166789178437745e2, 1.9715909503065514427e3,
           1.3731693765509461125e4, 4.5921953931549871457e4, 6.7265770927008700853e4,
           3.3430575583588128105e4, 2.5090809287301226727e3)
_PPND_B = (1.0, 4.2313330701600911252e1, 6.8718700749205790830e2, 5.3941960214247511077e3,
           2.1213794301586595867e4, 3.9307895800092710610e4, 2.8729085735721942674e4,
           5.2264952788528545610e3)
_PPND_C = (1.42343711074968357734e0, 4.63033784615654529590e0, 5.76949722146069140550e0,
           3.64784832476320460504e0, 1.27045825245236838258e0, 2.41780725177450611770e-1,
           2.27238449892691845833e-2, 7.74545014278341407640e-4)
_PPND_D = (1.0, 2.05319162663775882187e0, 1.67638483018380384940e0, 6.89767334985100004550e-1,
           1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
           1.05075007164441684324e-9)
_PPND_E = (6.65790464350110377720e0, 5.46378491116411436990e0, 1.78482653991729133580e0,
           2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
           2.71155556874348757815e-5, 2.01033439929228813265e-7)
_PPND_F = (1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
           7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
           2.04426310338993978564e-15)


@njit(inline="always", cache=True, fastmath=True)
def _poly7(c, x):
    return ((((((c[7] * x + c[6]) * x + c[5]) * x + c[4]) * x + c[3]) * x + c[2]) * x + c[1]) * x + c[0]


@njit(inline="always", cache=True, fastmath=True)
def _inv_norm_cdf(p):
    q = p - 0.5
    if abs(q) <= 0.425:
        r = 0.180625 - q * q
        return q * _poly7(_PPND_A, r) / _poly7(_PPND_B, r)
    r = p if q < 0.0 else 1.0 - p
    r = math.sqrt(-math.log(r))
    if r <= 5.0:
        r -= 1.6
        v = _poly7(_PPND_C, r) / _poly7(_PPND_D, r)
    else:
        r -= 5.0
        v = _poly7(_PPND_E, r) / _poly7(_PPND_F, r)
    return -v if q < 0.0 else v


@njit(inline="always", cache=True, fastmath=True)
def _philox_fill(seed_lo, seed_hi, path_lo, path_hi, blk0, stream, c0, c1, c2, c3):
    """Run Philox-4x32-10 on consecutive counters blk0..blk0+n-1 (SoA for SIMD)."""
    n = c0.shape[0]
    sbit = np.uint32(stream) << np.uint32(31)
    for j in range(n):
        blk = blk0 + j
        c0[j] = np.uint32(blk & 0xFFFFFFFF)
        c1[j] = np.uint32((blk >> 32) & 0x7FFFFFFF) | sbit
        c2[j] = path_lo
        c3[j] = path_hi
    k0 = seed_lo
    k1 = seed_hi
    for _ in range(10):
        for j in range(n):
            p0 = np.uint64(0xD2511F53) * np.uint64(c0[j])
            p1 = np.uint64(0xCD9E8D57) * np.uint64(c2[j])
            hi0 = np.uint32(p0 >> np.uint64(32))
            lo0 = np.uint32(p0 & np.uint64(0xFFFFFFFF))
            hi1 = np.uint32(p1 >> np.uint64(32))
            lo1 = np.uint32(p1 & np.uint64(0xFFFFFFFF))
            c0[j] = hi1 ^ c1[j] ^ k0
            c1[j] = lo1
            c2[j] = hi0 ^ c3[j] ^ k1
            c3[j] = lo0
        k0 = np.uint32(k0 + np.uint32(0x9E3779B9))
        k1 = np.uint32(k1 + np.uint32(0xBB67AE85))


@njit(inline="always", cache=True, fastmath=True)
def _fill_normals(seed_lo, seed_hi, path_lo, path_hi, blk0, c0, c1, c2, c3, out):
    """out[2j], out[2j+1] = normals for steps 2*(blk0+j), 2*(blk0+j)+1."""
    _philox_fill(seed_lo, seed_hi, path_lo, path_hi, blk0, 0, c0, c1, c2, c3)
    n = c0.shape[0]
    for j in range(n):
        u0 = (np.uint64(c0[j]) << np.uint64(32) | np.uint64(c1[j])) >> np.uint64(11)
        u1 = (np.uint64(c2[j]) << np.uint64(32) | np.uint64(c3[j])) >> np.uint64(11)
        out[2 * j] = _inv_norm_cdf((float(u0) + 0.5) * _TWO_M53)
        out[2 * j + 1] = _inv_norm_cdf((float(u1) + 0.5) * _TWO_M53)


@njit(inline="always", cache=True, fastmath=True)
def _fill_uniforms(seed_lo, seed_hi, path_lo, path_hi, blk0, c0, c1, c2, c3, out):
    """Stream-1 uniforms in (0, 1) for the bridge-crossing test."""
    _philox_fill(seed_lo, seed_hi, path_lo, path_hi, blk0, 1, c0, c1, c2, c3)
    n = c0.shape[0]
    for j in range(n):
        u0 = (np.uint64(c0[j]) << np.uint64(32) | np.uint64(c1[j])) >> np.uint64(11)
        u1 = (np.uint64(c2[j]) << np.uint64(32) | np.uint64(c3[j])) >> np.uint64(11)
        out[2 * j] = (float(u0) + 0.5) * _TWO_M53
        out[2 * j + 1] = (float(u1) + 0.5) * _TWO_M53


@njit(cache=True, parallel=True, nogil=True, fastmath=True)
def exit_scan(
    seed,
    path_start,
    n_paths,
    n_steps,
    mdt,
    sdt,
    y0,
    log_lower,
    log_upper,
    has_lower,
    has_upper,
    use_bridge,
    s2dt,
    steps_out,
    sides_out,
):
    """First grid crossing of ln X below log_lower or above log_upper.

    steps_out[i] = 1-based step of first crossing for path path_start+i, or -1
    if censored at n_steps; sides_out[i] in {-1 lower, +1 upper, 0 censored}.
    Absent barriers are passed as large finite sentinels with has_* = False.
    """
    seed_lo = np.uint32(seed & 0xFFFFFFFF)
    seed_hi = np.uint32((seed >> 32) & 0xFFFFFFFF)
    for i in prange(n_paths):
        p = path_start + i
        path_lo = np.uint32(p & 0xFFFFFFFF)
        path_hi = np.uint32((p >> 32) & 0xFFFFFFFF)
        zbuf = np.empty(_BUF, dtype=np.float64)
        ubuf = np.empty(_BUF, dtype=np.float64)
        c0 = np.empty(_BUF // 2, dtype=np.uint32)
        c1 = np.empty(_BUF // 2, dtype=np.uint32)
        c2 = np.empty(_BUF // 2, dtype=np.uint32)
        c3 = np.empty(_BUF // 2, dtype=np.uint32)
        y = y0
        exit_step = np.int64(-1)
        side = np.int8(0)
        done = np.int64(0)
        blk0 = np.int64(0)
        while done < n_steps:
            _fill_normals(seed_lo, seed_hi, path_lo, path_hi, blk0, c0, c1, c2, c3, zbuf)
            if use_bridge:
                _fill_uniforms(seed_lo, seed_hi, path_lo, path_hi, blk0, c0, c1, c2, c3, ubuf)
            blk0 += _BUF // 2
            n_use = _BUF if _BUF <= n_steps - done else n_steps - done
            hit = -1
            for j in range(n_use):
                y_prev = y
                y += mdt + sdt * zbuf[j]
                if has_lower and y <= log_lower:
                    hit = j
                    side = np.int8(-1)
                    break
                if has_upper and y >= log_upper:
                    hit = j
                    side = np.int8(1)
                    break
                if use_bridge:
                    u = ubuf[j]
                    if has_lower:
                        pl = math.exp(-2.0 * (y_prev - log_lower) * (y - log_lower) / s2dt)
                        if u < pl:
                            hit = j
                            side = np.int8(-1)
                            break
                        u -= pl
                    if has_upper:
                        pu = math.exp(-2.0 * (log_upper - y_prev) * (log_upper - y) / s2dt)
                        if u < pu:
                            hit = j
                            side = np.int8(1)
                            break
            if hit >= 0:
                exit_step = done + hit + 1
                break
            done += n_use
        steps_out[i] = exit_step
        sides_out[i] = side


@njit(cache=True, parallel=True, nogil=True, fastmath=True)
def dominance_scan(
    seed,
    n_paths,
    n_steps,
    mdt_plain,
    mdt_shifted,
    sdt,
    min_gap_out,
    max_absgap_out,
):
    """Run the plain and shifted log-wealth on common noise; report the gap range.

    Gap = ln X_shifted - ln X_plain per grid point; min_gap_out[i] is the
    smallest gap seen on path i, max_absgap_out[i] the largest |gap|.
    """
    seed_lo = np.uint32(seed & 0xFFFFFFFF)
    seed_hi = np.uint32((seed >> 32) & 0xFFFFFFFF)
    for i in prange(n_paths):
        path_lo = np.uint32(i & 0xFFFFFFFF)
        path_hi = np.uint32((i >> 32) & 0xFFFFFFFF)
        zbuf = np.empty(_BUF, dtype=np.float64)
        c0 = np.empty(_BUF // 2, dtype=np.uint32)
        c1 = np.empty(_BUF // 2, dtype=np.uint32)
        c2 = np.empty(_BUF // 2, dtype=np.uint32)
        c3 = np.empty(_BUF // 2, dtype=np.uint32)
        y_plain = 0.0
        y_shift = 0.0
        min_gap = 0.0
        max_absgap = 0.0
        done = np.int64(0)
        blk0 = np.int64(0)
        while done < n_steps:
            _fill_normals(seed_lo, seed_hi, path_lo, path_hi, blk0, c0, c1, c2, c3, zbuf)
            blk0 += _BUF // 2
            n_use = _BUF if _BUF <= n_steps - done else n_steps - done
            for j in range(n_use):
                noise = sdt * zbuf[j]
                y_plain += mdt_plain + noise
                y_shift += mdt_shifted + noise
                gap = y_shift - y_plain
                if gap < min_gap:
                    min_gap = gap
                if abs(gap) > max_absgap:
                    max_absgap = abs(gap)
            done += n_use
        min_gap_out[i] = min_gap
        max_absgap_out[i] = max_absgap


@njit(cache=True)
def normals_for_path(seed, path_index, n):
    """First n normals of a path's stream; test hook for the counter contract."""
    seed_lo = np.uint32(seed & 0xFFFFFFFF)
    seed_hi = np.uint32((seed >> 32) & 0xFFFFFFFF)
    path_lo = np.uint32(path_index & 0xFFFFFFFF)
    path_hi = np.uint32((path_index >> 32) & 0xFFFFFFFF)
    n_pairs = (n + 1) // 2
    c0 = np.empty(n_pairs, dtype=np.uint32)
    c1 = np.empty(n_pairs, dtype=np.uint32)
    c2 = np.empty(n_pairs, dtype=np.uint32)
    c3 = np.empty(n_pairs, dtype=np.uint32)
    out = np.empty(2 * n_pairs, dtype=np.float64)
    _fill_normals(seed_lo, seed_hi, path_lo, path_hi, 0, c0, c1, c2, c3, out)
    return out[:n]
