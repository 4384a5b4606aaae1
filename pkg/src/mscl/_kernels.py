"""Numba-compiled inner loops: range coding, block search, warping, resampling.

Everything here operates on plain numpy arrays and scalar ints so the
functions stay nopython-compilable.  Python-facing wrappers with validation
live in the sibling modules; nothing outside the package should import this
directly.

Range coder: byte-oriented binary range coder with carry propagation and
12-bit adaptive probabilities (shift-5 update).  Encoder state vector
``st = int64[5]`` as [low, range, cache, cache_size, pos]; decoder state
``st = int64[3]`` as [range, code, pos].  The first output byte is always
zero (carry headroom) and is checked on decode.
"""

import numpy as np
from numba import njit

RC_TOP = 1 << 24
PROB_INIT = 2048          # 12-bit probability of a zero bin
PROB_BITS = 12
ADAPT_SHIFT = 5
EG_MAX_PREFIX = 24        # corrupt stream guard; bounds decoded magnitudes

# state vector slots
_LOW, _RANGE, _CACHE, _CSIZE, _POS = 0, 1, 2, 3, 4
_DRANGE, _DCODE, _DPOS = 0, 1, 2


@njit(cache=True, nogil=True)
def rc_enc_init(st):
    st[_LOW] = 0
    st[_RANGE] = 0xFFFFFFFF
    st[_CACHE] = 0
    st[_CSIZE] = 1
    st[_POS] = 0


@njit(cache=True, nogil=True, inline="always")
def _rc_shift_low(st, out):
    low = st[_LOW]
    if (low & 0xFFFFFFFF) < 0xFF000000 or low > 0xFFFFFFFF:
        carry = low >> 32
        temp = st[_CACHE]
        while True:
            out[st[_POS]] = (temp + carry) & 0xFF
            st[_POS] += 1
            temp = 0xFF
            st[_CSIZE] -= 1
            if st[_CSIZE] == 0:
                break
        st[_CACHE] = (low >> 24) & 0xFF
    st[_CSIZE] += 1
    st[_LOW] = (low & 0x00FFFFFF) << 8


@njit(cache=True, nogil=True, inline="always")
def rc_enc_bit(st, out, probs, ci, bit):
    p = probs[ci]
    bound = (st[_RANGE] >> PROB_BITS) * p
    if bit == 0:
        st[_RANGE] = bound
        probs[ci] = p + ((4096 - p) >> ADAPT_SHIFT)
    else:
        st[_LOW] += bound
        st[_RANGE] -= bound
        probs[ci] = p - (p >> ADAPT_SHIFT)
    while st[_RANGE] < RC_TOP:
        _rc_shift_low(st, out)
        st[_RANGE] = (st[_RANGE] << 8) & 0xFFFFFFFF


@njit(cache=True, nogil=True)
def rc_enc_flush(st, out):
    for _ in range(5):
        _rc_shift_low(st, out)
    return st[_POS]


@njit(cache=True, nogil=True)
def rc_dec_init(st, data):
    if data.shape[0] < 5:
        raise ValueError("payload shorter than range-coder preamble")
    if data[0] != 0:
        raise ValueError("range-coder preamble byte is nonzero")
    code = 0
    for i in range(1, 5):
        code = (code << 8) | data[i]
    st[_DRANGE] = 0xFFFFFFFF
    st[_DCODE] = code
    st[_DPOS] = 5


@njit(cache=True, nogil=True, inline="always")
def rc_dec_bit(st, data, probs, ci):
    p = probs[ci]
    bound = (st[_DRANGE] >> PROB_BITS) * p
    if st[_DCODE] < bound:
        bit = 0
        st[_DRANGE] = bound
        probs[ci] = p + ((4096 - p) >> ADAPT_SHIFT)
    else:
        bit = 1
        st[_DCODE] -= bound
        st[_DRANGE] -= bound
        probs[ci] = p - (p >> ADAPT_SHIFT)
    while st[_DRANGE] < RC_TOP:
        if st[_DPOS] >= data.shape[0]:
            raise ValueError("payload exhausted mid-decode")
        st[_DCODE] = (st[_DCODE] << 8) | data[st[_DPOS]]
        st[_DPOS] += 1
        st[_DRANGE] = (st[_DRANGE] << 8) & 0xFFFFFFFF
    return bit


# --- Exp-Golomb(k=0) binarization over adaptive contexts -------------------
#
# Unsigned value n >= 0 is coded as a unary "continue" prefix of length
# m = floor(log2(n+1)) followed by the m low bits of n+1 (MSB first).
# Prefix bin i uses prefix_probs[min(i, len-1)], suffix bit i (counting from
# the MSB, i.e. shift amount) uses suffix_probs[min(i, len-1)].

@njit(cache=True, nogil=True, inline="always")
def _enc_ueg0(st, out, prefix_probs, suffix_probs, n):
    np1 = n + 1
    m = 0
    while (np1 >> (m + 1)) != 0:
        m += 1
    npfx = prefix_probs.shape[0] - 1
    nsfx = suffix_probs.shape[0] - 1
    for i in range(m):
        rc_enc_bit(st, out, prefix_probs, min(i, npfx), 1)
    rc_enc_bit(st, out, prefix_probs, min(m, npfx), 0)
    for i in range(m - 1, -1, -1):
        rc_enc_bit(st, out, suffix_probs, min(i, nsfx), (np1 >> i) & 1)


@njit(cache=True, nogil=True, inline="always")
def _dec_ueg0(st, data, prefix_probs, suffix_probs):
    npfx = prefix_probs.shape[0] - 1
    nsfx = suffix_probs.shape[0] - 1
    m = 0
    while rc_dec_bit(st, data, prefix_probs, min(m, npfx)) == 1:
        m += 1
        if m > EG_MAX_PREFIX:
            raise ValueError("Exp-Golomb prefix exceeds sane length")
    np1 = 1
    for i in range(m - 1, -1, -1):
        np1 = (np1 << 1) | rc_dec_bit(st, data, suffix_probs, min(i, nsfx))
    return np1 - 1


@njit(cache=True, nogil=True, inline="always")
def _enc_seg0(st, out, prefix_probs, suffix_probs, v):
    # signed map: 0->0, 1->1, -1->2, 2->3, ...
    if v > 0:
        n = 2 * v - 1
    else:
        n = -2 * v
    _enc_ueg0(st, out, prefix_probs, suffix_probs, n)


@njit(cache=True, nogil=True, inline="always")
def _dec_seg0(st, data, prefix_probs, suffix_probs):
    n = _dec_ueg0(st, data, prefix_probs, suffix_probs)
    if n & 1:
        return (n + 1) >> 1
    return -(n >> 1)


# --- motion-vector grid coding ---------------------------------------------

@njit(cache=True, nogil=True, inline="always")
def _median_pred(mv, x, y, c, gw):
    have_left = x > 0
    have_above = y > 0
    have_ar = y > 0 and x < gw - 1
    n = 0
    a = 0
    b = 0
    d = 0
    if have_left:
        a = mv[y, x - 1, c]
        n += 1
    if have_above:
        if n == 0:
            a = mv[y - 1, x, c]
        else:
            b = mv[y - 1, x, c]
        n += 1
    if have_ar:
        if n == 0:
            a = mv[y - 1, x + 1, c]
        elif n == 1:
            b = mv[y - 1, x + 1, c]
        else:
            d = mv[y - 1, x + 1, c]
        n += 1
    if n == 0:
        return 0
    if n == 1:
        return a
    if n == 2:
        return (a + b) // 2
    lo = min(a, min(b, d))
    hi = max(a, max(b, d))
    return a + b + d - lo - hi


@njit(cache=True, nogil=True)
def encode_motion_grid(mv, pfx, sfx, out, st):
    """Code a quarter-pel MV grid; returns payload length in bytes.

    mv: int32 (gh, gw, 2); pfx/sfx: uint16 (2, nctx) context banks.
    """
    rc_enc_init(st)
    gh, gw = mv.shape[0], mv.shape[1]
    for y in range(gh):
        for x in range(gw):
            for c in range(2):
                r = mv[y, x, c] - _median_pred(mv, x, y, c, gw)
                _enc_seg0(st, out, pfx[c], sfx[c], r)
    return rc_enc_flush(st, out)


@njit(cache=True, nogil=True)
def decode_motion_grid(data, gh, gw, pfx, sfx, st):
    mv = np.zeros((gh, gw, 2), dtype=np.int32)
    rc_dec_init(st, data)
    for y in range(gh):
        for x in range(gw):
            for c in range(2):
                r = _dec_seg0(st, data, pfx[c], sfx[c])
                v = r + _median_pred(mv, x, y, c, gw)
                if v > 32767 or v < -32767:
                    raise ValueError("decoded motion vector out of range")
                mv[y, x, c] = v
    return mv


# --- quantized DCT coefficient coding ---------------------------------------
#
# Per block (zigzag order): one coded-block bin, then per coefficient a
# significance bin, a sign bin, and magnitude-1 as unsigned Exp-Golomb.

@njit(cache=True, nogil=True)
def encode_coeff_blocks(q, cbf, sig, sgn, mpfx, msfx, out, st):
    nblocks = q.shape[0]
    ncoef = q.shape[1]
    nsig = sig.shape[0] - 1
    for b in range(nblocks):
        nz = 0
        for k in range(ncoef):
            if q[b, k] != 0:
                nz = 1
                break
        rc_enc_bit(st, out, cbf, 0, nz)
        if nz == 0:
            continue
        for k in range(ncoef):
            v = q[b, k]
            if v == 0:
                rc_enc_bit(st, out, sig, min(k, nsig), 0)
            else:
                rc_enc_bit(st, out, sig, min(k, nsig), 1)
                if v < 0:
                    rc_enc_bit(st, out, sgn, 0, 1)
                    mag = -v
                else:
                    rc_enc_bit(st, out, sgn, 0, 0)
                    mag = v
                _enc_ueg0(st, out, mpfx, msfx, mag - 1)


@njit(cache=True, nogil=True)
def decode_coeff_blocks(data, nblocks, ncoef, cbf, sig, sgn, mpfx, msfx, st):
    q = np.zeros((nblocks, ncoef), dtype=np.int32)
    nsig = sig.shape[0] - 1
    for b in range(nblocks):
        if rc_dec_bit(st, data, cbf, 0) == 0:
            continue
        for k in range(ncoef):
            if rc_dec_bit(st, data, sig, min(k, nsig)) == 0:
                continue
            neg = rc_dec_bit(st, data, sgn, 0)
            mag = _dec_ueg0(st, data, mpfx, msfx) + 1
            q[b, k] = -mag if neg else mag
    return q


# --- full-search block matching ---------------------------------------------

@njit(cache=True, nogil=True, inline="always")
def _block_sad(cur, ref, x0, y0, sx, sy, bw, bh, cutoff):
    """SAD of one int32 block pair, aborting once a row total exceeds cutoff.

    Full-width rows are unrolled so LLVM emits vector absolute-difference
    code; partial edge blocks take the generic loop."""
    sad = np.int32(0)
    if bw == 8:
        for yy in range(bh):
            c = y0 + yy
            r = sy + yy
            sad += (abs(cur[c, x0] - ref[r, sx])
                    + abs(cur[c, x0 + 1] - ref[r, sx + 1])
                    + abs(cur[c, x0 + 2] - ref[r, sx + 2])
                    + abs(cur[c, x0 + 3] - ref[r, sx + 3])
                    + abs(cur[c, x0 + 4] - ref[r, sx + 4])
                    + abs(cur[c, x0 + 5] - ref[r, sx + 5])
                    + abs(cur[c, x0 + 6] - ref[r, sx + 6])
                    + abs(cur[c, x0 + 7] - ref[r, sx + 7]))
            if sad > cutoff:
                return sad
        return sad
    for yy in range(bh):
        crow = y0 + yy
        rrow = sy + yy
        acc = np.int32(0)
        for xx in range(bw):
            dd = cur[crow, x0 + xx] - ref[rrow, sx + xx]
            acc += dd if dd >= 0 else -dd
        sad += acc
        if sad > cutoff:
            return sad
    return sad


@njit(cache=True, nogil=True)
def block_search(cur, ref, bs, radius, init_u, init_v, out_mv):
    """Per-block SAD full search over a (2R+1)^2 window around an init vector.

    cur/ref: int32 (H, W).  Candidates whose displaced window leaves the
    frame are invalid.  Best = smallest SAD, ties by |(u,v)|^2, then by
    scan order of the window (v ascending, u ascending).  The init vector
    is clamped so its own window is always valid.

    The init vector and already-decided neighbor vectors are probed first;
    their SADs serve purely as abort bounds (a candidate with a larger SAD
    can never win), so the result is identical to the plain full scan.
    """
    H, W = cur.shape
    gh = (H + bs - 1) // bs
    gw = (W + bs - 1) // bs
    big = np.int32(1 << 30)
    for by in range(gh):
        y0 = by * bs
        bh = min(bs, H - y0)
        for bx in range(gw):
            x0 = bx * bs
            bw = min(bs, W - x0)
            u_lo = -x0
            u_hi = W - x0 - bw
            v_lo = -y0
            v_hi = H - y0 - bh
            iu = min(max(init_u[by, bx], u_lo), u_hi)
            iv = min(max(init_v[by, bx], v_lo), v_hi)
            limit = _block_sad(cur, ref, x0, y0, x0 + iu, y0 + iv, bw, bh, big)
            best_sad = big
            best_mag = np.int64(1) << 62
            best_u = iu
            best_v = iv
            for dv in range(-radius, radius + 1):
                v = iv + dv
                if v < v_lo or v > v_hi:
                    continue
                sy = y0 + v
                for du in range(-radius, radius + 1):
                    u = iu + du
                    if u < u_lo or u > u_hi:
                        continue
                    cutoff = best_sad if best_sad < limit else limit
                    sad = _block_sad(cur, ref, x0, y0, x0 + u, sy, bw, bh, cutoff)
                    if sad > cutoff:
                        continue
                    if sad < best_sad:
                        best_sad = sad
                        best_u = u
                        best_v = v
                        best_mag = np.int64(u) * u + np.int64(v) * v
                    elif sad == best_sad:
                        mag = np.int64(u) * u + np.int64(v) * v
                        if mag < best_mag:
                            best_u = u
                            best_v = v
                            best_mag = mag
            out_mv[by, bx, 0] = best_u
            out_mv[by, bx, 1] = best_v


# --- warping and plane resampling -------------------------------------------

@njit(cache=True, nogil=True)
def halfpel_refine(cur, ref, bs, mv_int, out_mv):
    """Probe the eight half-pel neighbors of each block's integer vector.

    SAD against the bilinearly interpolated reference; the integer vector
    is kept unless a neighbor is strictly better (scan order: dv, du
    ascending).  Neighbors whose sampling window leaves the frame are
    skipped.  cur/ref int32, out_mv float64 (gh, gw, 2)."""
    H, W = cur.shape
    gh = mv_int.shape[0]
    gw = mv_int.shape[1]
    for by in range(gh):
        y0 = by * bs
        bh = min(bs, H - y0)
        for bx in range(gw):
            x0 = bx * bs
            bw = min(bs, W - x0)
            iu = mv_int[by, bx, 0]
            iv = mv_int[by, bx, 1]
            best = np.float64(0.0)
            for yy in range(bh):
                for xx in range(bw):
                    dd = cur[y0 + yy, x0 + xx] - ref[y0 + iv + yy, x0 + iu + xx]
                    best += dd if dd >= 0 else -dd
            bu = float(iu)
            bv = float(iv)
            for dv in (-0.5, 0.0, 0.5):
                for du in (-0.5, 0.0, 0.5):
                    if du == 0.0 and dv == 0.0:
                        continue
                    u = iu + du
                    v = iv + dv
                    if x0 + u < 0 or x0 + u + bw - 1 > W - 1:
                        continue
                    if y0 + v < 0 or y0 + v + bh - 1 > H - 1:
                        continue
                    sad = np.float64(0.0)
                    for yy in range(bh):
                        sy = y0 + v + yy
                        iy0 = int(sy)
                        if iy0 > H - 2:
                            iy0 = H - 2
                        fy = sy - iy0
                        for xx in range(bw):
                            sx = x0 + u + xx
                            ix0 = int(sx)
                            if ix0 > W - 2:
                                ix0 = W - 2
                            fx = sx - ix0
                            val = (1.0 - fy) * ((1.0 - fx) * ref[iy0, ix0]
                                                + fx * ref[iy0, ix0 + 1]) + \
                                fy * ((1.0 - fx) * ref[iy0 + 1, ix0]
                                      + fx * ref[iy0 + 1, ix0 + 1])
                            dd = cur[y0 + yy, x0 + xx] - val
                            sad += dd if dd >= 0 else -dd
                        if sad > best:
                            break
                    if sad < best:
                        best = sad
                        bu = u
                        bv = v
            out_mv[by, bx, 0] = bu
            out_mv[by, bx, 1] = bv


@njit(cache=True, nogil=True)
def warp_bilinear_u8(ref, uv, out):
    """out(x,y) = ref sampled at (x+u, y+v), clamped, rounded half-up."""
    H, W = ref.shape
    for y in range(H):
        for x in range(W):
            sx = x + uv[y, x, 0]
            sy = y + uv[y, x, 1]
            if sx < 0.0:
                sx = 0.0
            elif sx > W - 1:
                sx = float(W - 1)
            if sy < 0.0:
                sy = 0.0
            elif sy > H - 1:
                sy = float(H - 1)
            x0 = int(sx)
            y0 = int(sy)
            if x0 > W - 2:
                x0 = W - 2
            if y0 > H - 2:
                y0 = H - 2
            if W == 1:
                x0 = 0
            if H == 1:
                y0 = 0
            fx = sx - x0
            fy = sy - y0
            x1 = x0 + 1 if W > 1 else x0
            y1 = y0 + 1 if H > 1 else y0
            val = (1.0 - fy) * ((1.0 - fx) * ref[y0, x0] + fx * ref[y0, x1]) + \
                fy * ((1.0 - fx) * ref[y1, x0] + fx * ref[y1, x1])
            iv = int(val + 0.5)
            if iv > 255:
                iv = 255
            elif iv < 0:
                iv = 0
            out[y, x] = iv


@njit(cache=True, nogil=True)
def warp_bilinear_sse(ref, uv, cur):
    """Sum of squared errors between cur and the rounded warp of ref.

    Must stay arithmetically identical to warp_bilinear_u8 + diff."""
    H, W = ref.shape
    sse = np.int64(0)
    for y in range(H):
        for x in range(W):
            sx = x + uv[y, x, 0]
            sy = y + uv[y, x, 1]
            if sx < 0.0:
                sx = 0.0
            elif sx > W - 1:
                sx = float(W - 1)
            if sy < 0.0:
                sy = 0.0
            elif sy > H - 1:
                sy = float(H - 1)
            x0 = int(sx)
            y0 = int(sy)
            if x0 > W - 2:
                x0 = W - 2
            if y0 > H - 2:
                y0 = H - 2
            if W == 1:
                x0 = 0
            if H == 1:
                y0 = 0
            fx = sx - x0
            fy = sy - y0
            x1 = x0 + 1 if W > 1 else x0
            y1 = y0 + 1 if H > 1 else y0
            val = (1.0 - fy) * ((1.0 - fx) * ref[y0, x0] + fx * ref[y0, x1]) + \
                fy * ((1.0 - fx) * ref[y1, x0] + fx * ref[y1, x1])
            iv = int(val + 0.5)
            if iv > 255:
                iv = 255
            elif iv < 0:
                iv = 0
            dd = np.int64(cur[y, x]) - iv
            sse += dd * dd
    return sse


@njit(cache=True, nogil=True)
def downsample_to_i32(plane, yi, yw, xi, xw, rows_buf, cols_buf, out):
    """Banded row+column resample of a uint8 plane straight to int32.

    Bit-identical to resample_rows/resample_cols followed by nearest-even
    rounding with a [0, 255] clamp (the uint8 intermediate is lossless)."""
    resample_rows(plane, yi, yw, rows_buf)
    resample_cols(rows_buf, xi, xw, cols_buf)
    H, W = cols_buf.shape
    for y in range(H):
        for x in range(W):
            v = np.rint(cols_buf[y, x])
            if v < 0.0:
                v = 0.0
            elif v > 255.0:
                v = 255.0
            out[y, x] = np.int32(v)


@njit(cache=True, nogil=True)
def warp_grid_scaled_sse(mv, gx0a, gx1a, fxa, gy0a, gy1a, fya,
                         scale, ref, cur):
    """upsample_warp_scaled_sse reading the flow from a block grid.

    The dense small-scale field is block-replicated, so sampling the grid
    through precomputed block indices is bit-identical to sampling the
    expanded field."""
    H, W = ref.shape
    gw = mv.shape[1]
    rowu = np.empty(gw, dtype=np.float64)
    rowv = np.empty(gw, dtype=np.float64)
    sse = np.int64(0)
    for y in range(H):
        gy0 = gy0a[y]
        gy1 = gy1a[y]
        fy = fya[y]
        for g in range(gw):
            rowu[g] = (1.0 - fy) * mv[gy0, g, 0] + fy * mv[gy1, g, 0]
            rowv[g] = (1.0 - fy) * mv[gy0, g, 1] + fy * mv[gy1, g, 1]
        for x in range(W):
            gx0 = gx0a[x]
            gx1 = gx1a[x]
            fx = fxa[x]
            uval = (1.0 - fx) * rowu[gx0] + fx * rowu[gx1]
            vval = (1.0 - fx) * rowv[gx0] + fx * rowv[gx1]
            sx = x + scale * uval
            sy = y + scale * vval
            if sx < 0.0:
                sx = 0.0
            elif sx > W - 1:
                sx = float(W - 1)
            if sy < 0.0:
                sy = 0.0
            elif sy > H - 1:
                sy = float(H - 1)
            rx0 = int(sx)
            ry0 = int(sy)
            if rx0 > W - 2:
                rx0 = W - 2
            if ry0 > H - 2:
                ry0 = H - 2
            if W == 1:
                rx0 = 0
            if H == 1:
                ry0 = 0
            rfx = sx - rx0
            rfy = sy - ry0
            rx1 = rx0 + 1 if W > 1 else rx0
            ry1 = ry0 + 1 if H > 1 else ry0
            val = (1.0 - rfy) * ((1.0 - rfx) * ref[ry0, rx0]
                                 + rfx * ref[ry0, rx1]) + \
                rfy * ((1.0 - rfx) * ref[ry1, rx0] + rfx * ref[ry1, rx1])
            iv = int(val + 0.5)
            if iv > 255:
                iv = 255
            elif iv < 0:
                iv = 0
            dd = np.int64(cur[y, x]) - iv
            sse += dd * dd
    return sse


@njit(cache=True, nogil=True)
def upsample_warp_scaled_sse(small_uv, x0a, fxa, y0a, fya, scale, ref, cur):
    """Fused candidate scoring: bilinear-upsample the small flow field,
    multiply by scale, warp ref, accumulate squared error against cur.

    Every expression matches bilinear_resize_uv followed by warp_scaled_sse,
    so the result is bit-identical to the two-step path."""
    H, W = ref.shape
    SH, SW = small_uv.shape[0], small_uv.shape[1]
    sse = np.int64(0)
    for y in range(H):
        y0 = y0a[y]
        fy = fya[y]
        y1 = y0 + 1 if y0 + 1 < SH else y0
        for x in range(W):
            x0 = x0a[x]
            fx = fxa[x]
            x1 = x0 + 1 if x0 + 1 < SW else x0
            uval = (1.0 - fx) * ((1.0 - fy) * small_uv[y0, x0, 0]
                                 + fy * small_uv[y1, x0, 0]) + \
                fx * ((1.0 - fy) * small_uv[y0, x1, 0] + fy * small_uv[y1, x1, 0])
            vval = (1.0 - fx) * ((1.0 - fy) * small_uv[y0, x0, 1]
                                 + fy * small_uv[y1, x0, 1]) + \
                fx * ((1.0 - fy) * small_uv[y0, x1, 1] + fy * small_uv[y1, x1, 1])
            sx = x + scale * uval
            sy = y + scale * vval
            if sx < 0.0:
                sx = 0.0
            elif sx > W - 1:
                sx = float(W - 1)
            if sy < 0.0:
                sy = 0.0
            elif sy > H - 1:
                sy = float(H - 1)
            rx0 = int(sx)
            ry0 = int(sy)
            if rx0 > W - 2:
                rx0 = W - 2
            if ry0 > H - 2:
                ry0 = H - 2
            if W == 1:
                rx0 = 0
            if H == 1:
                ry0 = 0
            rfx = sx - rx0
            rfy = sy - ry0
            rx1 = rx0 + 1 if W > 1 else rx0
            ry1 = ry0 + 1 if H > 1 else ry0
            val = (1.0 - rfy) * ((1.0 - rfx) * ref[ry0, rx0]
                                 + rfx * ref[ry0, rx1]) + \
                rfy * ((1.0 - rfx) * ref[ry1, rx0] + rfx * ref[ry1, rx1])
            iv = int(val + 0.5)
            if iv > 255:
                iv = 255
            elif iv < 0:
                iv = 0
            dd = np.int64(cur[y, x]) - iv
            sse += dd * dd
    return sse


@njit(cache=True, nogil=True)
def expand_mv_dense(mv, bs, out):
    """Replicate per-block vectors to a dense float64 (H, W, 2) field."""
    H, W = out.shape[0], out.shape[1]
    for y in range(H):
        by = y // bs
        for x in range(W):
            bx = x // bs
            out[y, x, 0] = mv[by, bx, 0]
            out[y, x, 1] = mv[by, bx, 1]


@njit(cache=True, nogil=True)
def plane_to_i32(src, out):
    H, W = src.shape
    for y in range(H):
        for x in range(W):
            out[y, x] = src[y, x]


@njit(cache=True, nogil=True)
def round_clip_u8(src, out):
    """Nearest-even rounding and [0, 255] clamp of a float plane."""
    H, W = src.shape
    for y in range(H):
        for x in range(W):
            v = np.rint(src[y, x])
            if v < 0.0:
                v = 0.0
            elif v > 255.0:
                v = 255.0
            out[y, x] = np.uint8(v)


@njit(cache=True, nogil=True)
def resample_rows(src, idx, w, out):
    """out[r, :] = sum_k w[r, k] * src[idx[r, k], :]  (banded row resample)."""
    n_out = idx.shape[0]
    K = idx.shape[1]
    W = src.shape[1]
    for r in range(n_out):
        for c in range(W):
            out[r, c] = 0.0
        for k in range(K):
            wk = w[r, k]
            if wk == 0.0:
                continue
            srow = idx[r, k]
            for c in range(W):
                out[r, c] += wk * src[srow, c]


@njit(cache=True, nogil=True)
def resample_cols(src, idx, w, out):
    """out[:, c] = sum_k w[c, k] * src[:, idx[c, k]]."""
    n_out = idx.shape[0]
    K = idx.shape[1]
    H = src.shape[0]
    for r in range(H):
        for c in range(n_out):
            acc = 0.0
            for k in range(K):
                wk = w[c, k]
                if wk != 0.0:
                    acc += wk * src[r, idx[c, k]]
            out[r, c] = acc


@njit(cache=True, nogil=True)
def bilinear_resize_uv(src, x0a, fxa, y0a, fya, out):
    """Bilinear resize of a packed (h, w, 2) field with precomputed taps."""
    OH = y0a.shape[0]
    OW = x0a.shape[0]
    H, W = src.shape[0], src.shape[1]
    for r in range(OH):
        y0 = y0a[r]
        fy = fya[r]
        y1 = y0 + 1 if y0 + 1 < H else y0
        for c in range(OW):
            x0 = x0a[c]
            fx = fxa[c]
            x1 = x0 + 1 if x0 + 1 < W else x0
            for k in range(2):
                out[r, c, k] = (1.0 - fx) * ((1.0 - fy) * src[y0, x0, k]
                                             + fy * src[y1, x0, k]) + \
                    fx * ((1.0 - fy) * src[y0, x1, k] + fy * src[y1, x1, k])
