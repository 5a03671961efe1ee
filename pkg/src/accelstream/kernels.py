"""Hot numeric kernels, each in a numba and a pure-numpy variant.

The two variants of every kernel are written with the same arithmetic in
the same evaluation order, so results agree bit-for-bit between
backends.  Dispatch happens per call via :mod:`accelstream.backend`.

Bilinear sampling is edge-clamped everywhere: coordinates outside the
image read the nearest border pixel.  Resizing maps pixel centers, i.e.
source = (dest + 0.5) * scale - 0.5, which is the identity for equal
sizes.

The 3x3 convolution used by the stream classifiers is deliberately a
single im2col + BLAS matmul path (fast and identical under either
backend); the dual-path treatment is reserved for the flow kernels where
a fused loop beats vectorized numpy.
"""

from __future__ import annotations

import math

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from . import backend

# ---------------------------------------------------------------------------
# pure numpy variants


def _gather_bilinear_numpy(img, xs, ys):
    h, w = img.shape
    x0f = np.floor(xs)
    y0f = np.floor(ys)
    fx = xs - x0f
    fy = ys - y0f
    x0 = x0f.astype(np.int64)
    y0 = y0f.astype(np.int64)
    x0c = np.clip(x0, 0, w - 1)
    x1c = np.clip(x0 + 1, 0, w - 1)
    y0c = np.clip(y0, 0, h - 1)
    y1c = np.clip(y0 + 1, 0, h - 1)
    top = img[y0c, x0c] * (1.0 - fx) + img[y0c, x1c] * fx
    bot = img[y1c, x0c] * (1.0 - fx) + img[y1c, x1c] * fx
    return top * (1.0 - fy) + bot * fy


def _resize_bilinear_numpy(src, out_h, out_w):
    h, w = src.shape
    sy = h / out_h
    sx = w / out_w
    xs = (np.arange(out_w, dtype=np.float64) + 0.5) * sx - 0.5
    ys = (np.arange(out_h, dtype=np.float64) + 0.5) * sy - 0.5
    xs2 = np.broadcast_to(xs[None, :], (out_h, out_w))
    ys2 = np.broadcast_to(ys[:, None], (out_h, out_w))
    return _gather_bilinear_numpy(src, xs2, ys2)


def _translate_bilinear_numpy(src, tx, ty, out_h, out_w):
    xs = np.arange(out_w, dtype=np.float64) + tx
    ys = np.arange(out_h, dtype=np.float64) + ty
    xs2 = np.broadcast_to(xs[None, :], (out_h, out_w))
    ys2 = np.broadcast_to(ys[:, None], (out_h, out_w))
    return _gather_bilinear_numpy(src, xs2, ys2)


def _warp_bilinear_numpy(src, u, v):
    h, w = src.shape
    xs = np.arange(w, dtype=np.float64)[None, :] + u
    ys = np.arange(h, dtype=np.float64)[:, None] + v
    return _gather_bilinear_numpy(src, xs, ys)


def _avg4_numpy(a):
    p = np.pad(a, 1, mode="edge")
    return (p[:-2, 1:-1] + p[2:, 1:-1] + p[1:-1, :-2] + p[1:-1, 2:]) * 0.25


def _hs_sweep_numpy(ix, iy, it, u0, v0, u, v, smoothness, iterations):
    den = smoothness + ix * ix + iy * iy
    for _ in range(iterations):
        ubar = _avg4_numpy(u)
        vbar = _avg4_numpy(v)
        r = (ix * (ubar - u0) + iy * (vbar - v0) + it) / den
        u = ubar - ix * r
        v = vbar - iy * r
    return u, v


def _box_sum_edge_numpy(a, rb):
    # inclusive (2rb+1)^2 window sum with edge-replicated borders, exact int64
    p = np.pad(a, rb, mode="edge")
    c = np.zeros((p.shape[0] + 1, p.shape[1] + 1), dtype=np.int64)
    np.cumsum(p, axis=0, out=c[1:, 1:], dtype=np.int64)
    np.cumsum(c[1:, 1:], axis=1, out=c[1:, 1:])
    k = 2 * rb + 1
    h, w = a.shape
    return (
        c[k : k + h, k : k + w]
        - c[0:h, k : k + w]
        - c[k : k + h, 0:w]
        + c[0:h, 0:w]
    )


def _block_match_numpy(prev, nxt, cands, block):
    h, w = prev.shape
    rb = block // 2
    p64 = prev.astype(np.int64)
    n64 = nxt.astype(np.int64)
    ys = np.arange(h, dtype=np.int64)[:, None]
    xs = np.arange(w, dtype=np.int64)[None, :]
    best = np.full((h, w), np.iinfo(np.int64).max, dtype=np.int64)
    bdx = np.zeros((h, w), dtype=np.int32)
    bdy = np.zeros((h, w), dtype=np.int32)
    for ci in range(cands.shape[0]):
        dy = int(cands[ci, 0])
        dx = int(cands[ci, 1])
        sy = np.clip(ys + dy, 0, h - 1)
        sx = np.clip(xs + dx, 0, w - 1)
        diff = np.abs(p64 - n64[sy, sx])
        cost = _box_sum_edge_numpy(diff, rb)
        better = cost < best
        best[better] = cost[better]
        bdx[better] = dx
        bdy[better] = dy
    return bdx, bdy


# ---------------------------------------------------------------------------
# numba variants

if backend.HAVE_NUMBA:
    from numba import njit

    @njit(cache=True)
    def _sample_clamped(img, x, y):
        h, w = img.shape
        x0f = math.floor(x)
        y0f = math.floor(y)
        fx = x - x0f
        fy = y - y0f
        x0 = int(x0f)
        y0 = int(y0f)
        x0c = min(max(x0, 0), w - 1)
        x1c = min(max(x0 + 1, 0), w - 1)
        y0c = min(max(y0, 0), h - 1)
        y1c = min(max(y0 + 1, 0), h - 1)
        top = img[y0c, x0c] * (1.0 - fx) + img[y0c, x1c] * fx
        bot = img[y1c, x0c] * (1.0 - fx) + img[y1c, x1c] * fx
        return top * (1.0 - fy) + bot * fy

    @njit(cache=True)
    def _resize_bilinear_numba(src, out_h, out_w):
        h, w = src.shape
        sy = h / out_h
        sx = w / out_w
        out = np.empty((out_h, out_w), dtype=np.float64)
        for y in range(out_h):
            ys = (y + 0.5) * sy - 0.5
            for x in range(out_w):
                xs = (x + 0.5) * sx - 0.5
                out[y, x] = _sample_clamped(src, xs, ys)
        return out

    @njit(cache=True)
    def _translate_bilinear_numba(src, tx, ty, out_h, out_w):
        out = np.empty((out_h, out_w), dtype=np.float64)
        for y in range(out_h):
            ys = y + ty
            for x in range(out_w):
                out[y, x] = _sample_clamped(src, x + tx, ys)
        return out

    @njit(cache=True)
    def _warp_bilinear_numba(src, u, v):
        h, w = src.shape
        out = np.empty((h, w), dtype=np.float64)
        for y in range(h):
            for x in range(w):
                out[y, x] = _sample_clamped(src, x + u[y, x], y + v[y, x])
        return out

    @njit(cache=True)
    def _hs_sweep_numba(ix, iy, it, u0, v0, u, v, smoothness, iterations):
        h, w = ix.shape
        u = u.copy()
        v = v.copy()
        un = np.empty_like(u)
        vn = np.empty_like(v)
        den = np.empty_like(ix)
        for y in range(h):
            for x in range(w):
                den[y, x] = smoothness + ix[y, x] * ix[y, x] + iy[y, x] * iy[y, x]
        for _ in range(iterations):
            for y in range(h):
                ym = y - 1 if y > 0 else 0
                yp = y + 1 if y < h - 1 else h - 1
                for x in range(w):
                    xm = x - 1 if x > 0 else 0
                    xp = x + 1 if x < w - 1 else w - 1
                    ubar = (u[ym, x] + u[yp, x] + u[y, xm] + u[y, xp]) * 0.25
                    vbar = (v[ym, x] + v[yp, x] + v[y, xm] + v[y, xp]) * 0.25
                    r = (
                        ix[y, x] * (ubar - u0[y, x])
                        + iy[y, x] * (vbar - v0[y, x])
                        + it[y, x]
                    ) / den[y, x]
                    un[y, x] = ubar - ix[y, x] * r
                    vn[y, x] = vbar - iy[y, x] * r
            tmp = u
            u = un
            un = tmp
            tmp = v
            v = vn
            vn = tmp
        return u, v

    @njit(cache=True)
    def _block_match_numba(prev, nxt, cands, block):
        h, w = prev.shape
        rb = block // 2
        n_cands = cands.shape[0]
        bdx = np.zeros((h, w), dtype=np.int32)
        bdy = np.zeros((h, w), dtype=np.int32)
        for y in range(h):
            for x in range(w):
                best = np.int64(2**62)
                bx = 0
                by = 0
                for ci in range(n_cands):
                    dy = cands[ci, 0]
                    dx = cands[ci, 1]
                    cost = np.int64(0)
                    for oy in range(-rb, rb + 1):
                        qy = min(max(y + oy, 0), h - 1)
                        sy = min(max(qy + dy, 0), h - 1)
                        for ox in range(-rb, rb + 1):
                            qx = min(max(x + ox, 0), w - 1)
                            sx = min(max(qx + dx, 0), w - 1)
                            d = np.int64(prev[qy, qx]) - np.int64(nxt[sy, sx])
                            cost += d if d >= 0 else -d
                    if cost < best:
                        best = cost
                        bx = dx
                        by = dy
                bdx[y, x] = bx
                bdy[y, x] = by
        return bdx, bdy


# ---------------------------------------------------------------------------
# dispatchers


def _f64(a):
    return np.ascontiguousarray(np.asarray(a, dtype=np.float64))


def resize_bilinear(src, out_h: int, out_w: int) -> np.ndarray:
    """Resize a 2-D float array with edge-clamped bilinear sampling."""
    src = _f64(src)
    if backend.using_numba():
        return _resize_bilinear_numba(src, out_h, out_w)
    return _resize_bilinear_numpy(src, out_h, out_w)


def translate_bilinear(src, tx: float, ty: float, out_h: int, out_w: int) -> np.ndarray:
    """Sample src at (x + tx, y + ty) for every output pixel."""
    src = _f64(src)
    if backend.using_numba():
        return _translate_bilinear_numba(src, float(tx), float(ty), out_h, out_w)
    return _translate_bilinear_numpy(src, float(tx), float(ty), out_h, out_w)


def warp_bilinear(src, u, v) -> np.ndarray:
    """Sample src at (x + u[y,x], y + v[y,x]); u, v in pixels."""
    src = _f64(src)
    u = _f64(u)
    v = _f64(v)
    if backend.using_numba():
        return _warp_bilinear_numba(src, u, v)
    return _warp_bilinear_numpy(src, u, v)


def hs_sweep(ix, iy, it, u0, v0, u, v, smoothness: float, iterations: int):
    """Run `iterations` Jacobi relaxation steps of the flow solver.

    u0, v0 is the linearization point (flow at the latest warp), u, v the
    current iterate.  Neighbour averages use edge-clamped 4-neighbourhoods,
    so border pixels average their available neighbours plus themselves.
    """
    args = tuple(_f64(a) for a in (ix, iy, it, u0, v0, u, v))
    if backend.using_numba():
        return _hs_sweep_numba(*args, float(smoothness), int(iterations))
    return _hs_sweep_numpy(*args, float(smoothness), int(iterations))


def block_match(prev, nxt, candidates, block: int):
    """Exhaustive SAD block matching over the given displacement candidates.

    `candidates` is an (n, 2) int64 array of (dy, dx) pairs tried in order;
    strict improvement keeps the earliest best, so the order encodes the
    tie-break.  Returns int32 (dx, dy) maps.
    """
    prev = np.ascontiguousarray(prev, dtype=np.uint8)
    nxt = np.ascontiguousarray(nxt, dtype=np.uint8)
    cands = np.ascontiguousarray(candidates, dtype=np.int64)
    if backend.using_numba():
        return _block_match_numba(prev, nxt, cands, int(block))
    return _block_match_numpy(prev, nxt, cands, int(block))


# ---------------------------------------------------------------------------
# shared single-path kernels


def box_downsample2(a) -> np.ndarray:
    """Downsample a 2-D array by 2 with 2x2 box averaging (odd edges dropped)."""
    a = _f64(a)
    h2 = a.shape[0] // 2
    w2 = a.shape[1] // 2
    t = a[: 2 * h2, : 2 * w2].reshape(h2, 2, w2, 2)
    return t.mean(axis=(1, 3))


def box_downsample(a, factor: int) -> np.ndarray:
    """Downsample a 2-D array by an integer factor with box averaging."""
    a = _f64(a)
    h = a.shape[0] // factor
    w = a.shape[1] // factor
    t = a[: h * factor, : w * factor].reshape(h, factor, w, factor)
    return t.mean(axis=(1, 3))


def conv3x3_forward(x, w, b):
    """3x3 stride-1 convolution with edge-clamp padding.

    x: (B, C, H, W), w: (F, C, 3, 3), b: (F,).  Returns (out, cols) where
    cols is the (B, H, W, C*9) im2col matrix reused by the backward pass.
    """
    bsz, c, h, wd = x.shape
    f = w.shape[0]
    xp = np.pad(x, ((0, 0), (0, 0), (1, 1), (1, 1)), mode="edge")
    cols = sliding_window_view(xp, (3, 3), axis=(2, 3))
    cols = np.ascontiguousarray(cols.transpose(0, 2, 3, 1, 4, 5)).reshape(
        bsz, h, wd, c * 9
    )
    out = cols @ w.reshape(f, c * 9).T
    out = out.transpose(0, 3, 1, 2) + b[None, :, None, None]
    return out, cols


def conv3x3_grad_params(cols, dout):
    """Parameter gradients of conv3x3_forward given upstream dout (B, F, H, W)."""
    bsz, f, h, w = dout.shape
    dmat = np.ascontiguousarray(dout.transpose(0, 2, 3, 1)).reshape(-1, f)
    cmat = cols.reshape(-1, cols.shape[-1])
    dw = (dmat.T @ cmat).reshape(f, -1, 3, 3)
    db = dout.sum(axis=(0, 2, 3))
    return dw, db
