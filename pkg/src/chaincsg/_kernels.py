"""Hot numeric kernels.

Each kernel exists twice: a numba ``@njit`` loop version and a vectorised
numpy version with identical semantics.  The active backend is chosen at
import time; set ``CHAINCSG_DISABLE_NUMBA=1`` to force numpy (also used
automatically when numba is not importable).

Kernels
-------
segment_splits
    All pairwise split parameters of a set of 2D segments.
points_in_polygon
    Even-odd classification of 2D points against a segment soup.
ray_crossings
    Parity of a ray against planar polygons embedded in 3D.
"""

import os

import numpy as np

try:
    import numba
    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and os.environ.get("CHAINCSG_DISABLE_NUMBA", "").lower() not in (
    "1", "true", "yes")
BACKEND = "numba" if USE_NUMBA else "numpy"

PARALLEL_TOL = 1e-10


# ---------------------------------------------------------------------------
# segment splits
# ---------------------------------------------------------------------------

def _segment_splits_py(P, R, tol):
    n = P.shape[0]
    cap = 16
    seg = np.empty(cap, dtype=np.int64)
    par = np.empty(cap, dtype=np.float64)
    k = 0
    for i in range(n):
        pix, piy, rix, riy = P[i, 0], P[i, 1], R[i, 0], R[i, 1]
        li = np.sqrt(rix * rix + riy * riy)
        if li == 0.0:
            continue
        ei = tol / li
        for j in range(i + 1, n):
            rjx, rjy = R[j, 0], R[j, 1]
            lj = np.sqrt(rjx * rjx + rjy * rjy)
            if lj == 0.0:
                continue
            ej = tol / lj
            qx, qy = P[j, 0] - pix, P[j, 1] - piy
            # cheap box rejection
            if (min(pix, pix + rix) > max(P[j, 0], P[j, 0] + rjx) + tol
                    or max(pix, pix + rix) < min(P[j, 0], P[j, 0] + rjx) - tol
                    or min(piy, piy + riy) > max(P[j, 1], P[j, 1] + rjy) + tol
                    or max(piy, piy + riy) < min(P[j, 1], P[j, 1] + rjy) - tol):
                continue
            d = rix * rjy - riy * rjx
            if k + 4 > cap:
                cap *= 2
                seg2 = np.empty(cap, dtype=np.int64)
                par2 = np.empty(cap, dtype=np.float64)
                seg2[:k] = seg[:k]
                par2[:k] = par[:k]
                seg, par = seg2, par2
            if abs(d) > PARALLEL_TOL * li * lj:
                t = (qx * rjy - qy * rjx) / d
                u = (qx * riy - qy * rix) / d
                if -ei <= t <= 1.0 + ei and -ej <= u <= 1.0 + ej:
                    seg[k] = i
                    par[k] = min(max(t, 0.0), 1.0)
                    seg[k + 1] = j
                    par[k + 1] = min(max(u, 0.0), 1.0)
                    k += 2
            else:
                if abs(qx * riy - qy * rix) / li > tol:
                    continue
                # collinear: project each endpoint onto the other segment
                for a in range(2):
                    ex = qx + a * rjx
                    ey = qy + a * rjy
                    t = (ex * rix + ey * riy) / (li * li)
                    if -ei <= t <= 1.0 + ei:
                        seg[k] = i
                        par[k] = min(max(t, 0.0), 1.0)
                        k += 1
                for a in range(2):
                    ex = -qx + a * rix
                    ey = -qy + a * riy
                    u = (ex * rjx + ey * rjy) / (lj * lj)
                    if -ej <= u <= 1.0 + ej:
                        seg[k] = j
                        par[k] = min(max(u, 0.0), 1.0)
                        k += 1
    return seg[:k], par[:k]


def segment_splits_numpy(P, R, tol):
    """Vectorised twin of :func:`segment_splits_numba`."""
    P = np.asarray(P, dtype=float)
    R = np.asarray(R, dtype=float)
    n = len(P)
    if n < 2:
        return np.empty(0, np.int64), np.empty(0, float)
    I, J = np.triu_indices(n, 1)
    L = np.sqrt((R ** 2).sum(1))
    li, lj = L[I], L[J]
    ok = (li > 0) & (lj > 0)
    lo = np.minimum(P, P + R)
    hi = np.maximum(P, P + R)
    ok &= np.all(lo[I] <= hi[J] + tol, axis=1) & np.all(hi[I] >= lo[J] - tol, axis=1)
    I, J, li, lj = I[ok], J[ok], li[ok], lj[ok]
    ri, rj = R[I], R[J]
    q = P[J] - P[I]
    ei, ej = tol / li, tol / lj
    d = ri[:, 0] * rj[:, 1] - ri[:, 1] * rj[:, 0]
    cross = np.abs(d) > PARALLEL_TOL * li * lj
    seg_out, par_out, key_out = [], [], []

    # crossing pairs
    c = cross
    dc = np.where(c, d, 1.0)
    t = (q[:, 0] * rj[:, 1] - q[:, 1] * rj[:, 0]) / dc
    u = (q[:, 0] * ri[:, 1] - q[:, 1] * ri[:, 0]) / dc
    hit = c & (t >= -ei) & (t <= 1 + ei) & (u >= -ej) & (u <= 1 + ej)
    pair = np.nonzero(hit)[0]
    # order key reproduces the loop order of the numba kernel
    seg_out += [I[hit], J[hit]]
    par_out += [np.clip(t[hit], 0, 1), np.clip(u[hit], 0, 1)]
    key_out += [pair * 8, pair * 8 + 1]

    # collinear pairs
    col = (~cross) & (np.abs(q[:, 0] * ri[:, 1] - q[:, 1] * ri[:, 0]) / li <= tol)
    for a in range(2):
        e = q + a * rj
        tt = (e * ri).sum(1) / (li * li)
        m = col & (tt >= -ei) & (tt <= 1 + ei)
        seg_out.append(I[m])
        par_out.append(np.clip(tt[m], 0, 1))
        key_out.append(np.nonzero(m)[0] * 8 + 2 + a)
    for a in range(2):
        e = -q + a * ri
        uu = (e * rj).sum(1) / (lj * lj)
        m = col & (uu >= -ej) & (uu <= 1 + ej)
        seg_out.append(J[m])
        par_out.append(np.clip(uu[m], 0, 1))
        key_out.append(np.nonzero(m)[0] * 8 + 4 + a)
    seg = np.concatenate(seg_out).astype(np.int64)
    par = np.concatenate(par_out).astype(float)
    order = np.argsort(np.concatenate(key_out), kind="stable")
    return seg[order], par[order]


# ---------------------------------------------------------------------------
# 2D point classification
# ---------------------------------------------------------------------------

def _points_in_polygon_py(pts, segs, tol):
    out = np.zeros(pts.shape[0], dtype=np.int8)
    for p in range(pts.shape[0]):
        x, y = pts[p, 0], pts[p, 1]
        inside = False
        onb = False
        for s in range(segs.shape[0]):
            x0, y0, x1, y1 = segs[s, 0], segs[s, 1], segs[s, 2], segs[s, 3]
            dx, dy = x1 - x0, y1 - y0
            l2 = dx * dx + dy * dy
            if l2 > 0.0:
                tt = ((x - x0) * dx + (y - y0) * dy) / l2
                tt = min(max(tt, 0.0), 1.0)
                cx, cy = x0 + tt * dx - x, y0 + tt * dy - y
                if cx * cx + cy * cy <= tol * tol:
                    onb = True
                    break
            if (y0 > y) != (y1 > y):
                xc = x0 + (y - y0) * dx / dy
                if xc > x:
                    inside = not inside
        if onb:
            out[p] = -1
        elif inside:
            out[p] = 1
    return out


def points_in_polygon_numpy(pts, segs, tol):
    """Vectorised twin of :func:`points_in_polygon_numba`."""
    pts = np.atleast_2d(np.asarray(pts, dtype=float))
    segs = np.asarray(segs, dtype=float).reshape(-1, 4)
    if len(pts) == 0:
        return np.zeros(0, np.int8)
    x = pts[:, 0:1]
    y = pts[:, 1:2]
    x0, y0, x1, y1 = (segs[:, k][None, :] for k in range(4))
    dx, dy = x1 - x0, y1 - y0
    l2 = dx * dx + dy * dy
    with np.errstate(divide="ignore", invalid="ignore"):
        tt = np.where(l2 > 0, ((x - x0) * dx + (y - y0) * dy) / np.where(l2 > 0, l2, 1), 0)
        tt = np.clip(tt, 0, 1)
        dist2 = (x0 + tt * dx - x) ** 2 + (y0 + tt * dy - y) ** 2
        onb = np.any((dist2 <= tol * tol) & (l2 > 0), axis=1)
        straddle = (y0 > y) != (y1 > y)
        xc = x0 + (y - y0) * dx / np.where(straddle, dy, 1)
        cnt = np.sum(straddle & (xc > x), axis=1)
    out = (cnt % 2).astype(np.int8)
    out[onb] = -1
    return out


# ---------------------------------------------------------------------------
# 3D ray parity
# ---------------------------------------------------------------------------

def _ray_crossings_py(p, d, faces, normals, origins, U, W, ptr, segs, tol):
    """Return crossing count, or -1 when the ray is degenerate."""
    count = 0
    for k in range(faces.shape[0]):
        f = faces[k]
        nx, ny, nz = normals[f, 0], normals[f, 1], normals[f, 2]
        ox, oy, oz = origins[f, 0] - p[0], origins[f, 1] - p[1], origins[f, 2] - p[2]
        dist = nx * ox + ny * oy + nz * oz
        den = nx * d[0] + ny * d[1] + nz * d[2]
        on_plane = abs(dist) <= tol
        if on_plane:
            t = 0.0
        else:
            if abs(den) < 1e-12:
                continue
            t = dist / den
            if t <= 0.0:
                continue
        hx = p[0] + t * d[0] - origins[f, 0]
        hy = p[1] + t * d[1] - origins[f, 1]
        hz = p[2] + t * d[2] - origins[f, 2]
        x = hx * U[f, 0] + hy * U[f, 1] + hz * U[f, 2]
        y = hx * W[f, 0] + hy * W[f, 1] + hz * W[f, 2]
        inside = False
        for s in range(ptr[f], ptr[f + 1]):
            x0, y0, x1, y1 = segs[s, 0], segs[s, 1], segs[s, 2], segs[s, 3]
            dx, dy = x1 - x0, y1 - y0
            l2 = dx * dx + dy * dy
            if l2 > 0.0:
                tt = ((x - x0) * dx + (y - y0) * dy) / l2
                tt = min(max(tt, 0.0), 1.0)
                cx, cy = x0 + tt * dx - x, y0 + tt * dy - y
                if cx * cx + cy * cy <= tol * tol:
                    return -1
            if (y0 > y) != (y1 > y):
                xc = x0 + (y - y0) * dx / dy
                if xc > x:
                    inside = not inside
        if inside:
            if on_plane:
                return -1
            count += 1
    return count


def ray_crossings_numpy(p, d, faces, normals, origins, U, W, ptr, segs, tol):
    """Vectorised twin of :func:`ray_crossings_numba`."""
    faces = np.asarray(faces, dtype=np.int64)
    if len(faces) == 0:
        return 0
    n = normals[faces]
    o = origins[faces] - p
    dist = (n * o).sum(1)
    den = n @ d
    on_plane = np.abs(dist) <= tol
    par = np.abs(den) < 1e-12
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(on_plane, 0.0, np.where(par, -1.0, dist / np.where(par, 1.0, den)))
    keep = on_plane | (t > 0)
    fs = faces[keep]
    if len(fs) == 0:
        return 0
    onp = on_plane[keep]
    h = p + t[keep][:, None] * d - origins[fs]
    x = (h * U[fs]).sum(1)
    y = (h * W[fs]).sum(1)
    lens = ptr[fs + 1] - ptr[fs]
    owner = np.repeat(np.arange(len(fs)), lens)
    idx = np.concatenate([np.arange(ptr[f], ptr[f + 1]) for f in fs])
    sg = segs[idx]
    px, py = x[owner], y[owner]
    x0, y0, x1, y1 = sg[:, 0], sg[:, 1], sg[:, 2], sg[:, 3]
    dx, dy = x1 - x0, y1 - y0
    l2 = dx * dx + dy * dy
    with np.errstate(divide="ignore", invalid="ignore"):
        tt = np.clip(np.where(l2 > 0, ((px - x0) * dx + (py - y0) * dy) / np.where(l2 > 0, l2, 1), 0), 0, 1)
        dist2 = (x0 + tt * dx - px) ** 2 + (y0 + tt * dy - py) ** 2
        if np.any((dist2 <= tol * tol) & (l2 > 0)):
            return -1
        straddle = (y0 > py) != (y1 > py)
        xc = x0 + (py - y0) * dx / np.where(straddle, dy, 1)
    hits = np.bincount(owner, weights=(straddle & (xc > px)).astype(float), minlength=len(fs))
    inside = hits.astype(np.int64) % 2 == 1
    if np.any(inside & onp):
        return -1
    return int(np.sum(inside))


if _HAVE_NUMBA:
    segment_splits_numba = numba.njit(cache=True)(_segment_splits_py)
    points_in_polygon_numba = numba.njit(cache=True)(_points_in_polygon_py)
    ray_crossings_numba = numba.njit(cache=True)(_ray_crossings_py)
else:  # pragma: no cover
    segment_splits_numba = _segment_splits_py
    points_in_polygon_numba = _points_in_polygon_py
    ray_crossings_numba = _ray_crossings_py


def _as2(a, cols):
    return np.ascontiguousarray(np.asarray(a, dtype=np.float64).reshape(-1, cols))


def segment_splits(P, R, tol):
    """Split parameters ``(segment, t)`` produced by every pair of segments.

    Segment ``i`` runs from ``P[i]`` to ``P[i] + R[i]``.  Crossing pairs
    report one parameter on each segment; collinear overlapping pairs
    report the projections of each segment's endpoints onto the other.
    """
    P, R = _as2(P, 2), _as2(R, 2)
    if USE_NUMBA:
        return segment_splits_numba(P, R, float(tol))
    return segment_splits_numpy(P, R, float(tol))


def points_in_polygon(pts, segs, tol):
    """Even-odd test: 1 inside, 0 outside, -1 within ``tol`` of a segment."""
    pts, segs = _as2(pts, 2), _as2(segs, 4)
    if USE_NUMBA:
        return points_in_polygon_numba(pts, segs, float(tol))
    return points_in_polygon_numpy(pts, segs, float(tol))


def ray_crossings(p, d, faces, table, tol):
    """Number of faces of ``table`` crossed by the ray ``p + t d`` (t > 0).

    Returns -1 when the ray grazes an edge or the origin lies on a face
    plane, in which case the caller re-casts.
    """
    p = np.asarray(p, dtype=np.float64)
    d = np.asarray(d, dtype=np.float64)
    faces = np.ascontiguousarray(faces, dtype=np.int64)
    args = (p, d, faces, table.normals, table.origins, table.U, table.W,
            table.ptr, table.segs, float(tol))
    if USE_NUMBA:
        return int(ray_crossings_numba(*args))
    return ray_crossings_numpy(*args)
