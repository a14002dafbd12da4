"""Redistancing: first-order fast marching from a rescaled cut-cell band, or exact
distances to the zero set of a cubic spline interpolant (closest-point projection)."""
from __future__ import annotations

import numba
import numpy as np

from .errors import DegenerateGradient, NoInterface
from .grid import gradient

FAR, TRIAL, KNOWN = 0, 1, 2


def cut_cells(phi):
    """Boolean mask over cells (lower-corner indexed) whose corners straddle the zero level."""
    phi = np.asarray(phi)
    inside = phi < 0
    zero = phi == 0
    any_in = np.zeros(tuple(k - 1 for k in phi.shape), dtype=bool)
    any_out = np.zeros_like(any_in)
    any_zero = np.zeros_like(any_in)
    for corner in np.ndindex(*(2,) * phi.ndim):
        sl = tuple(slice(c, c + k - 1) for c, k in zip(corner, phi.shape))
        any_in |= inside[sl]
        any_out |= ~inside[sl] & ~zero[sl]
        any_zero |= zero[sl]
    return (any_in & any_out) | any_zero


def band_nodes(cells):
    """Nodes belonging to at least one of the given cells."""
    shape = tuple(k + 1 for k in cells.shape)
    nodes = np.zeros(shape, dtype=bool)
    for corner in np.ndindex(*(2,) * cells.ndim):
        sl = tuple(slice(c, c + k) for c, k in zip(corner, cells.shape))
        nodes[sl] |= cells
    return nodes


def init_band(phi, grid):
    """Rescale ``phi`` by ``1/|grad phi|`` on cut-cell nodes.

    Returns ``(values, mask)``: the rescaled field (meaningful where ``mask``) and the
    boolean band mask.
    """
    phi = np.asarray(phi, dtype=float)
    mask = band_nodes(cut_cells(phi))
    norm = np.sqrt(sum(g * g for g in gradient(phi, grid)))
    if mask.any() and float(norm[mask].min()) < 1e-8:
        raise DegenerateGradient("flat level-set function on a cut cell")
    values = np.zeros_like(phi)
    values[mask] = phi[mask] / norm[mask]
    return values, mask


@numba.njit(cache=True)
def _heap_push(keys, ids, size, key, idx):
    i = size
    keys[i] = key
    ids[i] = idx
    while i > 0:
        parent = (i - 1) >> 1
        if keys[parent] < keys[i] or (keys[parent] == keys[i] and ids[parent] <= ids[i]):
            break
        keys[parent], keys[i] = keys[i], keys[parent]
        ids[parent], ids[i] = ids[i], ids[parent]
        i = parent
    return size + 1


@numba.njit(cache=True)
def _heap_pop(keys, ids, size):
    key = keys[0]
    idx = ids[0]
    size -= 1
    keys[0] = keys[size]
    ids[0] = ids[size]
    i = 0
    while True:
        left = 2 * i + 1
        if left >= size:
            break
        best = left
        right = left + 1
        if right < size and (keys[right] < keys[left]
                             or (keys[right] == keys[left] and ids[right] < ids[left])):
            best = right
        if keys[i] < keys[best] or (keys[i] == keys[best] and ids[i] <= ids[best]):
            break
        keys[best], keys[i] = keys[i], keys[best]
        ids[best], ids[i] = ids[i], ids[best]
        i = best
    return key, idx, size


@numba.njit(cache=True)
def _solve_local(u, state, i, j, k, n0, n1, n2, h0, h1, h2):
    """Upwind eikonal update at node (i, j, k) from its known neighbours."""
    a = np.empty(3)
    w = np.empty(3)
    m = 0
    dims = (n0, n1, n2)
    hs = (h0, h1, h2)
    for ax in range(3):
        if dims[ax] == 1:
            continue
        best = np.inf
        for s in (-1, 1):
            ii, jj, kk = i, j, k
            if ax == 0:
                ii += s
            elif ax == 1:
                jj += s
            else:
                kk += s
            if ii < 0 or jj < 0 or kk < 0 or ii >= n0 or jj >= n1 or kk >= n2:
                continue
            if state[ii, jj, kk] == KNOWN and u[ii, jj, kk] < best:
                best = u[ii, jj, kk]
        if best < np.inf:
            a[m] = best
            w[m] = 1.0 / (hs[ax] * hs[ax])
            m += 1
    # insertion sort by neighbour value
    for p in range(1, m):
        q = p
        while q > 0 and a[q - 1] > a[q]:
            a[q - 1], a[q] = a[q], a[q - 1]
            w[q - 1], w[q] = w[q], w[q - 1]
            q -= 1
    result = np.inf
    for used in range(1, m + 1):
        sw = 0.0
        swa = 0.0
        swaa = 0.0
        for p in range(used):
            sw += w[p]
            swa += w[p] * a[p]
            swaa += w[p] * a[p] * a[p]
        disc = swa * swa - sw * (swaa - 1.0)
        if disc < 0.0:
            break
        cand = (swa + np.sqrt(disc)) / sw
        if used < m and cand > a[used]:
            result = cand
            continue
        result = cand
        break
    return result


@numba.njit(cache=True)
def _march(u, state, h0, h1, h2):
    n0, n1, n2 = u.shape
    cap = 8 * u.size + 16
    keys = np.empty(cap)
    ids = np.empty(cap, dtype=np.int64)
    size = 0
    for i in range(n0):
        for j in range(n1):
            for k in range(n2):
                if state[i, j, k] != KNOWN:
                    continue
                for ax in range(3):
                    for s in (-1, 1):
                        ii, jj, kk = i, j, k
                        if ax == 0:
                            ii += s
                        elif ax == 1:
                            jj += s
                        else:
                            kk += s
                        if ii < 0 or jj < 0 or kk < 0 or ii >= n0 or jj >= n1 or kk >= n2:
                            continue
                        if state[ii, jj, kk] == KNOWN:
                            continue
                        val = _solve_local(u, state, ii, jj, kk, n0, n1, n2, h0, h1, h2)
                        if val < u[ii, jj, kk]:
                            u[ii, jj, kk] = val
                            state[ii, jj, kk] = TRIAL
                            size = _heap_push(keys, ids, size, val, (ii * n1 + jj) * n2 + kk)
    while size > 0:
        key, idx, size = _heap_pop(keys, ids, size)
        k = idx % n2
        j = (idx // n2) % n1
        i = idx // (n1 * n2)
        if state[i, j, k] == KNOWN or key > u[i, j, k]:
            continue
        state[i, j, k] = KNOWN
        for ax in range(3):
            for s in (-1, 1):
                ii, jj, kk = i, j, k
                if ax == 0:
                    ii += s
                elif ax == 1:
                    jj += s
                else:
                    kk += s
                if ii < 0 or jj < 0 or kk < 0 or ii >= n0 or jj >= n1 or kk >= n2:
                    continue
                if state[ii, jj, kk] == KNOWN:
                    continue
                val = _solve_local(u, state, ii, jj, kk, n0, n1, n2, h0, h1, h2)
                if val < u[ii, jj, kk]:
                    u[ii, jj, kk] = val
                    state[ii, jj, kk] = TRIAL
                    if size >= cap:
                        # compact stale entries
                        live = 0
                        for p in range(size):
                            q = ids[p]
                            qk = q % n2
                            qj = (q // n2) % n1
                            qi = q // (n1 * n2)
                            if state[qi, qj, qk] == TRIAL and keys[p] == u[qi, qj, qk]:
                                keys[live] = keys[p]
                                ids[live] = ids[p]
                                live += 1
                        size = 0
                        for p in range(live):
                            size = _heap_push(keys, ids, size, keys[p], ids[p])
                    size = _heap_push(keys, ids, size, val, (ii * n1 + jj) * n2 + kk)
    return u


METHODS = ("fmm", "closest_point")


def redistance(phi, grid, method="fmm"):
    """Signed distance function sharing the zero level-set of ``phi``.

    ``method="fmm"``: cut-cell nodes keep ``phi/|grad phi|``; every other node is
    reached by first-order upwind fast marching in increasing ``|d|`` and inherits
    the sign of ``phi``.  ``method="closest_point"``: see
    :func:`redistance_closest_point`.
    """
    if method == "closest_point":
        return redistance_closest_point(phi, grid)
    if method != "fmm":
        raise ValueError(f"unknown redistance method {method!r}")
    phi = np.asarray(phi, dtype=float)
    if not ((phi < 0).any() and (phi >= 0).any()) and not (phi == 0).any():
        raise NoInterface("level-set function has no sign change")
    band, mask = init_band(phi, grid)
    if not mask.any():
        raise NoInterface("no cut cell found")
    u = np.where(mask, np.abs(band), np.inf)
    state = np.where(mask, KNOWN, FAR).astype(np.int8)
    shape3 = tuple(grid.shape) + (1,) * (3 - grid.dim)
    h3 = tuple(grid.h) + (1.0,) * (3 - grid.dim)
    u3 = np.ascontiguousarray(u.reshape(shape3))
    s3 = np.ascontiguousarray(state.reshape(shape3))
    _march(u3, s3, *h3)
    dist = u3.reshape(grid.shape)
    d = np.where(phi < 0, -dist, dist)
    d[mask] = band[mask]
    return d


# --- closest-point redistancing -------------------------------------------------------
#
# Distances are measured exactly to the zero set of the cubic B-spline interpolant of
# ``phi``.  Seeds on that zero set come from Newton-projecting cut-cell centres; every
# node starts from its nearest seed and is refined by Newton's method on the
# closest-point conditions.  Far more accurate than fast marching (spline error is
# O(h^4)), which the flow needs: its per-step signal is O(dt^2).


@numba.njit(cache=True, inline="always")
def _mirror(i, n):
    if n == 1:
        return 0
    period = 2 * (n - 1)
    i = i % period
    if i < 0:
        i += period
    if i > n - 1:
        i = period - i
    return i


@numba.njit(cache=True, inline="always")
def _basis(t, b, db):
    s = 1.0 - t
    b[0] = s * s * s / 6.0
    b[1] = (3.0 * t * t * t - 6.0 * t * t + 4.0) / 6.0
    b[2] = (-3.0 * t * t * t + 3.0 * t * t + 3.0 * t + 1.0) / 6.0
    b[3] = t * t * t / 6.0
    db[0] = -0.5 * s * s
    db[1] = 1.5 * t * t - 2.0 * t
    db[2] = -1.5 * t * t + t + 0.5
    db[3] = 0.5 * t * t


@numba.njit(cache=True)
def _spline_eval(coef, origin, h, p, grad, work):
    """Value and gradient of the cubic B-spline with coefficients ``coef`` (3D array) at ``p``.

    ``work`` is a (6, 4) scratch array for the basis weights.
    """
    n0, n1, n2 = coef.shape
    bx = work[0]; dbx = work[1]
    by = work[2]; dby = work[3]
    bz = work[4]; dbz = work[5]
    u0 = (p[0] - origin[0]) / h[0]
    u1 = (p[1] - origin[1]) / h[1]
    i0 = int(np.floor(u0)); i1 = int(np.floor(u1))
    _basis(u0 - i0, bx, dbx)
    _basis(u1 - i1, by, dby)
    if n2 == 1:
        val = 0.0
        g0 = 0.0; g1 = 0.0
        for a in range(4):
            ia = _mirror(i0 + a - 1, n0)
            for b in range(4):
                w = coef[ia, _mirror(i1 + b - 1, n1), 0]
                val += w * bx[a] * by[b]
                g0 += w * dbx[a] * by[b]
                g1 += w * bx[a] * dby[b]
        grad[0] = g0 / h[0]
        grad[1] = g1 / h[1]
        grad[2] = 0.0
        return val
    u2 = (p[2] - origin[2]) / h[2]
    i2 = int(np.floor(u2))
    _basis(u2 - i2, bz, dbz)
    val = 0.0
    g0 = 0.0; g1 = 0.0; g2 = 0.0
    for a in range(4):
        ia = _mirror(i0 + a - 1, n0)
        for b in range(4):
            ib = _mirror(i1 + b - 1, n1)
            xy = bx[a] * by[b]
            dxy = dbx[a] * by[b]
            xdy = bx[a] * dby[b]
            for c in range(4):
                w = coef[ia, ib, _mirror(i2 + c - 1, n2)]
                val += w * xy * bz[c]
                g0 += w * dxy * bz[c]
                g1 += w * xdy * bz[c]
                g2 += w * xy * dbz[c]
    grad[0] = g0 / h[0]
    grad[1] = g1 / h[1]
    grad[2] = g2 / h[2]
    return val


@numba.njit(cache=True)
def _project(coef, origin, h, points, max_iter, tol):
    """Newton-project points onto the zero set; returns a mask of converged points."""
    ok = np.zeros(points.shape[0], dtype=np.bool_)
    g = np.empty(3)
    work = np.empty((6, 4))
    for k in range(points.shape[0]):
        p = points[k]
        for _ in range(max_iter):
            v = _spline_eval(coef, origin, h, p, g, work)
            gg = g[0] * g[0] + g[1] * g[1] + g[2] * g[2]
            if gg < 1e-20:
                break
            for a in range(3):
                p[a] -= v * g[a] / gg
            if abs(v) < tol * np.sqrt(gg):
                ok[k] = True
                break
    return ok


@numba.njit(cache=True, inline="always")
def _basis2(t, ddb):
    ddb[0] = 1.0 - t
    ddb[1] = 3.0 * t - 2.0
    ddb[2] = 1.0 - 3.0 * t
    ddb[3] = t


@numba.njit(cache=True)
def _spline_eval2(coef, origin, h, p, grad, hess, work):
    """Value, gradient and Hessian of the spline at ``p``; ``work`` is a (9, 4) scratch array."""
    n0, n1, n2 = coef.shape
    b = work[0:3]
    db = work[3:6]
    ddb = work[6:9]
    nd = 2 if n2 == 1 else 3
    i0 = 0
    i1 = 0
    i2 = 0
    for ax in range(3):
        for q in range(3):
            hess[ax, q] = 0.0
        grad[ax] = 0.0
    for ax in range(nd):
        u = (p[ax] - origin[ax]) / h[ax]
        i = int(np.floor(u))
        if ax == 0:
            i0 = i
        elif ax == 1:
            i1 = i
        else:
            i2 = i
        _basis(u - i, b[ax], db[ax])
        _basis2(u - i, ddb[ax])
    val = 0.0
    if nd == 2:
        for a in range(4):
            ia = _mirror(i0 + a - 1, n0)
            for c in range(4):
                w = coef[ia, _mirror(i1 + c - 1, n1), 0]
                val += w * b[0, a] * b[1, c]
                grad[0] += w * db[0, a] * b[1, c]
                grad[1] += w * b[0, a] * db[1, c]
                hess[0, 0] += w * ddb[0, a] * b[1, c]
                hess[1, 1] += w * b[0, a] * ddb[1, c]
                hess[0, 1] += w * db[0, a] * db[1, c]
    else:
        for a in range(4):
            ia = _mirror(i0 + a - 1, n0)
            for c in range(4):
                ib = _mirror(i1 + c - 1, n1)
                for e in range(4):
                    w = coef[ia, ib, _mirror(i2 + e - 1, n2)]
                    x0, x1, x2 = b[0, a], b[1, c], b[2, e]
                    d0, d1, d2 = db[0, a], db[1, c], db[2, e]
                    val += w * x0 * x1 * x2
                    grad[0] += w * d0 * x1 * x2
                    grad[1] += w * x0 * d1 * x2
                    grad[2] += w * x0 * x1 * d2
                    hess[0, 0] += w * ddb[0, a] * x1 * x2
                    hess[1, 1] += w * x0 * ddb[1, c] * x2
                    hess[2, 2] += w * x0 * x1 * ddb[2, e]
                    hess[0, 1] += w * d0 * d1 * x2
                    hess[0, 2] += w * d0 * x1 * d2
                    hess[1, 2] += w * x0 * d1 * d2
    for ax in range(nd):
        grad[ax] /= h[ax]
        for q in range(ax, nd):
            hess[ax, q] /= h[ax] * h[q]
            hess[q, ax] = hess[ax, q]
    return val


@numba.njit(cache=True)
def _solve_small(A, r, m):
    """In-place Gaussian elimination with partial pivoting on the leading m x m block."""
    for col in range(m):
        piv = col
        for row in range(col + 1, m):
            if abs(A[row, col]) > abs(A[piv, col]):
                piv = row
        if abs(A[piv, col]) < 1e-300:
            return False
        if piv != col:
            for q in range(m):
                A[col, q], A[piv, q] = A[piv, q], A[col, q]
            r[col], r[piv] = r[piv], r[col]
        for row in range(col + 1, m):
            f = A[row, col] / A[col, col]
            for q in range(col, m):
                A[row, q] -= f * A[col, q]
            r[row] -= f * r[col]
    for row in range(m - 1, -1, -1):
        acc = r[row]
        for q in range(row + 1, m):
            acc -= A[row, q] * r[q]
        r[row] = acc / A[row, row]
    return True


@numba.njit(cache=True)
def _closest(coef, origin, h, nodes, start, self_start, max_iter, tol, max_step):
    """Distance from each node to the spline zero set, and a per-node success flag.

    Newton iteration on ``p - x + lam grad(p) = 0``, ``phi(p) = 0``.  With
    ``self_start`` the iteration starts at the node's own projection
    ``x - phi grad / |grad|^2`` and succeeds only when the result agrees with the local
    estimate ``|phi| / |grad|``; otherwise it starts at ``start`` and fails when it
    ends farther away than that start point (which lies on the surface).
    """
    n = nodes.shape[0]
    out = np.empty(n)
    ok = np.zeros(n, dtype=np.bool_)
    nd = 2 if coef.shape[2] == 1 else 3
    m = nd + 1
    g = np.empty(3)
    H = np.empty((3, 3))
    A = np.empty((4, 4))
    r = np.empty(4)
    p = np.empty(3)
    work = np.empty((9, 4))
    for k in range(n):
        x = nodes[k]
        estimate = 0.0
        if self_start:
            for ax in range(3):
                p[ax] = x[ax]
            v = _spline_eval2(coef, origin, h, p, g, H, work)
            gg = 0.0
            for ax in range(nd):
                gg += g[ax] * g[ax]
            if abs(gg - 1.0) > 0.2:
                # not distance-like here (kinks, box corners): the local estimate is useless
                out[k] = 0.0
                continue
            for ax in range(nd):
                p[ax] -= v * g[ax] / gg
            estimate = abs(v) / np.sqrt(gg)
        else:
            for ax in range(3):
                p[ax] = start[k, ax]
        v = _spline_eval2(coef, origin, h, p, g, H, work)
        gg = 0.0
        lam = 0.0
        for ax in range(nd):
            gg += g[ax] * g[ax]
            lam += (x[ax] - p[ax]) * g[ax]
        lam = lam / gg if gg > 0.0 else 0.0
        converged = False
        for _ in range(max_iter):
            for i in range(nd):
                r[i] = -(p[i] - x[i] + lam * g[i])
                for j in range(nd):
                    A[i, j] = lam * H[i, j] + (1.0 if i == j else 0.0)
                A[i, nd] = g[i]
                A[nd, i] = g[i]
            A[nd, nd] = 0.0
            r[nd] = -v
            if not _solve_small(A, r, m):
                break
            step = 0.0
            for i in range(nd):
                step += r[i] * r[i]
            step = np.sqrt(step)
            scale = 1.0 if step <= max_step else max_step / step
            for i in range(nd):
                p[i] += scale * r[i]
            lam += scale * r[nd]
            v = _spline_eval2(coef, origin, h, p, g, H, work)
            if step < tol:
                converged = True
                break
        dist = 0.0
        gg = 0.0
        for ax in range(nd):
            dist += (x[ax] - p[ax]) ** 2
            gg += g[ax] * g[ax]
        dist = np.sqrt(dist)
        on_surface = abs(v) < 1e-6 * np.sqrt(gg) * max_step
        n_ax = coef.shape
        for ax in range(nd):
            # mirrored coefficients carry image interfaces outside the box
            lo = origin[ax] - 1e-9 * h[ax]
            hi = origin[ax] + (n_ax[ax] - 1 + 1e-9) * h[ax]
            if p[ax] < lo or p[ax] > hi:
                on_surface = False
        if self_start:
            ok[k] = converged and on_surface and abs(dist - estimate) <= 0.02 * dist + max_step
            out[k] = dist
        else:
            dist0 = 0.0
            for ax in range(nd):
                dist0 += (x[ax] - start[k, ax]) ** 2
            dist0 = np.sqrt(dist0)
            ok[k] = converged and on_surface and dist <= dist0
            out[k] = dist if ok[k] else dist0
    return out, ok


_NODE_CACHE = {}


def _node_coordinates(grid):
    """Node coordinates as an (N, 3) array, cached per grid."""
    nodes = _NODE_CACHE.get(grid)
    if nodes is None:
        nodes = np.zeros((int(np.prod(grid.shape)), 3))
        for ax, x in enumerate(grid.coords):
            nodes[:, ax] = np.broadcast_to(x, grid.shape).ravel()
        if len(_NODE_CACHE) > 8:
            _NODE_CACHE.clear()
        _NODE_CACHE[grid] = nodes
    return nodes


def _as3(grid, values):
    shape3 = tuple(grid.shape) + (1,) * (3 - grid.dim)
    return np.ascontiguousarray(np.asarray(values, float).reshape(shape3))


def interface_points(phi, grid, coef=None):
    """Points on the zero set of the cubic spline interpolant, one per cut cell."""
    from scipy import ndimage

    if coef is None:
        coef = _as3(grid, ndimage.spline_filter(np.asarray(phi, float), order=3, mode="mirror"))
    cells = cut_cells(phi)
    idx = np.argwhere(cells).astype(float)
    origin = np.array(tuple(grid.origin) + (0.0,) * (3 - grid.dim))
    h = np.array(tuple(grid.h) + (1.0,) * (3 - grid.dim))
    pts = np.zeros((len(idx), 3))
    pts[:, :grid.dim] = (idx + 0.5) * h[:grid.dim] + origin[:grid.dim]
    start = pts.copy()
    ok = _project(coef, origin, h, pts, 20, 1e-12)
    hmax = max(grid.h)
    ok &= np.linalg.norm(pts - start, axis=1) < 2.0 * hmax
    return pts[ok], coef, origin, h


def redistance_closest_point(phi, grid, tol=1e-6, band=None):
    """Signed distance to the zero set of the cubic spline interpolant of ``phi``.

    Newton iterations stop once the step is below ``tol * h``; convergence is
    quadratic so the remaining error is far smaller.  With ``band``, only nodes with
    ``|phi| < band`` are recomputed and the others keep ``phi``.
    """
    from scipy.spatial import cKDTree

    phi = np.asarray(phi, dtype=float)
    if not ((phi < 0).any() and (phi > 0).any()):
        raise NoInterface("level-set function has no sign change")
    seeds, coef, origin, h = interface_points(phi, grid)
    if len(seeds) == 0:
        raise NoInterface("no interface point found")
    nodes = _node_coordinates(grid)
    if band is not None:
        sel = np.flatnonzero(np.abs(phi).ravel() < band)
        nodes = np.ascontiguousarray(nodes[sel])
    hmax = max(grid.h)
    dist, ok = _closest(coef, origin, h, nodes, nodes, True, 30, tol * hmax, hmax)
    bad = np.flatnonzero(~ok)
    if bad.size:
        _, nearest = cKDTree(seeds[:, :grid.dim]).query(nodes[bad, :grid.dim])
        dist[bad], _ = _closest(coef, origin, h, np.ascontiguousarray(nodes[bad]),
                                np.ascontiguousarray(seeds[nearest]), False, 30,
                                tol * hmax, hmax)
    if band is not None:
        full = np.abs(phi).ravel().copy()
        full[sel] = dist
        dist = full
    dist = dist.reshape(grid.shape)
    return np.where(phi < 0, -dist, dist)
