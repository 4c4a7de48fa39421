# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernel implementations (hot inner loops).

Semantics must stay bit-identical to pyfallback.py: same expressions, same
operation order, no fused multiply-add (built with -ffp-contract=off).
"""

from libc.math cimport sqrt, fabs, floor, ceil

import numpy as np

DEF BIG = 1e18


def render_quads(quads, int height, int width):
    """Max-composite soft scores of (n, 4, 2) quads onto a float64 canvas."""
    cdef double[:, :, ::1] q = np.ascontiguousarray(quads, dtype=np.float64)
    out_arr = np.zeros((height, width), dtype=np.float64)
    cdef double[:, ::1] out = out_arr
    cdef int n = q.shape[0]
    cdef int qi, i, px, py, x0, x1, y0, y1
    cdef double ax0, ay0, ax1, ay1, ax2, ay2, ax3, ay3
    cdef double ex0, ey0, ex1, ey1, ex2, ey2, ex3, ey3
    cdef double len0, len1, len2, len3
    cdef double minx, maxx, miny, maxy
    cdef double cx, cy, xc, d0, d1, d2, d3
    cdef double dl, dr, dt, db, span_w, span_h, dw, dh, val
    cdef bint long02, inside

    for qi in range(n):
        ax0 = q[qi, 0, 0]; ay0 = q[qi, 0, 1]
        ax1 = q[qi, 1, 0]; ay1 = q[qi, 1, 1]
        ax2 = q[qi, 2, 0]; ay2 = q[qi, 2, 1]
        ax3 = q[qi, 3, 0]; ay3 = q[qi, 3, 1]
        ex0 = ax1 - ax0; ey0 = ay1 - ay0
        ex1 = ax2 - ax1; ey1 = ay2 - ay1
        ex2 = ax3 - ax2; ey2 = ay3 - ay2
        ex3 = ax0 - ax3; ey3 = ay0 - ay3
        len0 = sqrt(ex0 * ex0 + ey0 * ey0)
        len1 = sqrt(ex1 * ex1 + ey1 * ey1)
        len2 = sqrt(ex2 * ex2 + ey2 * ey2)
        len3 = sqrt(ex3 * ex3 + ey3 * ey3)
        long02 = len0 + len2 >= len1 + len3

        minx = ax0
        if ax1 < minx: minx = ax1
        if ax2 < minx: minx = ax2
        if ax3 < minx: minx = ax3
        maxx = ax0
        if ax1 > maxx: maxx = ax1
        if ax2 > maxx: maxx = ax2
        if ax3 > maxx: maxx = ax3
        miny = ay0
        if ay1 < miny: miny = ay1
        if ay2 < miny: miny = ay2
        if ay3 < miny: miny = ay3
        maxy = ay0
        if ay1 > maxy: maxy = ay1
        if ay2 > maxy: maxy = ay2
        if ay3 > maxy: maxy = ay3

        x0 = <int>floor(minx) - 1
        if x0 < 0: x0 = 0
        x1 = <int>ceil(maxx) + 1
        if x1 > width - 1: x1 = width - 1
        y0 = <int>floor(miny) - 1
        if y0 < 0: y0 = 0
        y1 = <int>ceil(maxy) + 1
        if y1 > height - 1: y1 = height - 1

        for py in range(y0, y1 + 1):
            cy = py + 0.5
            for px in range(x0, x1 + 1):
                cx = px + 0.5

                inside = False
                if ay0 != ay1 and ((ay0 > cy) != (ay1 > cy)):
                    xc = ax0 + (cy - ay0) * (ax1 - ax0) / (ay1 - ay0)
                    if cx < xc: inside = not inside
                if ay1 != ay2 and ((ay1 > cy) != (ay2 > cy)):
                    xc = ax1 + (cy - ay1) * (ax2 - ax1) / (ay2 - ay1)
                    if cx < xc: inside = not inside
                if ay2 != ay3 and ((ay2 > cy) != (ay3 > cy)):
                    xc = ax2 + (cy - ay2) * (ax3 - ax2) / (ay3 - ay2)
                    if cx < xc: inside = not inside
                if ay3 != ay0 and ((ay3 > cy) != (ay0 > cy)):
                    xc = ax3 + (cy - ay3) * (ax0 - ax3) / (ay0 - ay3)
                    if cx < xc: inside = not inside
                if not inside:
                    continue

                d0 = fabs(ex0 * (cy - ay0) - ey0 * (cx - ax0)) / len0
                d1 = fabs(ex1 * (cy - ay1) - ey1 * (cx - ax1)) / len1
                d2 = fabs(ex2 * (cy - ay2) - ey2 * (cx - ax2)) / len2
                d3 = fabs(ex3 * (cy - ay3) - ey3 * (cx - ax3)) / len3
                if long02:
                    dl = d3; dr = d1; dt = d0; db = d2
                else:
                    dl = d0; dr = d2; dt = d1; db = d3
                span_w = dl + dr
                span_h = dt + db
                dw = 1.0 - fabs(dr - dl) / span_w if span_w > 0.0 else 0.0
                dh = 1.0 - fabs(db - dt) / span_h if span_h > 0.0 else 0.0
                val = 0.5 * (dw + dh)
                if val > out[py, px]:
                    out[py, px] = val
    return out_arr


def label_components(mask, int connectivity=8):
    """Two-pass union-find labeling; labels in row-major first-encounter order."""
    cdef unsigned char[:, ::1] m = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef int height = m.shape[0]
    cdef int width = m.shape[1]
    labels_arr = np.zeros((height, width), dtype=np.int32)
    cdef int[:, ::1] labels = labels_arr
    parent_arr = np.zeros((height * width) // 2 + 2, dtype=np.int32)
    cdef int[::1] parent = parent_arr
    cdef int next_label = 1
    cdef int y, x, lab, r, count
    cdef int n0, n1, n2, n3

    for y in range(height):
        for x in range(width):
            if m[y, x] == 0:
                continue
            n0 = labels[y, x - 1] if x > 0 else 0
            n1 = labels[y - 1, x] if y > 0 else 0
            if connectivity == 8:
                n2 = labels[y - 1, x - 1] if (y > 0 and x > 0) else 0
                n3 = labels[y - 1, x + 1] if (y > 0 and x + 1 < width) else 0
            else:
                n2 = 0
                n3 = 0

            lab = 0
            if n0 != 0 and (lab == 0 or n0 < lab): lab = n0
            if n1 != 0 and (lab == 0 or n1 < lab): lab = n1
            if n2 != 0 and (lab == 0 or n2 < lab): lab = n2
            if n3 != 0 and (lab == 0 or n3 < lab): lab = n3
            if lab == 0:
                parent[next_label] = next_label
                labels[y, x] = next_label
                next_label += 1
                continue
            labels[y, x] = lab
            r = _find(parent, lab)
            if n0 != 0: r = _union_into(parent, n0, r)
            if n1 != 0: r = _union_into(parent, n1, r)
            if n2 != 0: r = _union_into(parent, n2, r)
            if n3 != 0: r = _union_into(parent, n3, r)

    # second pass: roots -> consecutive ids in first-encounter order
    final_arr = np.zeros(next_label, dtype=np.int32)
    cdef int[::1] final = final_arr
    count = 0
    for y in range(height):
        for x in range(width):
            lab = labels[y, x]
            if lab == 0:
                continue
            r = _find(parent, lab)
            if final[r] == 0:
                count += 1
                final[r] = count
            labels[y, x] = final[r]
    return labels_arr, count


cdef inline int _union_into(int[::1] parent, int cand, int r):
    """Union cand's set into root r; returns the (possibly smaller) new root."""
    cdef int r2 = _find(parent, cand)
    if r2 == r:
        return r
    if r2 < r:
        parent[r] = r2
        return r2
    parent[r2] = r
    return r


cdef inline int _find(int[::1] parent, int i):
    cdef int root = i
    while parent[root] != root:
        root = parent[root]
    cdef int cur = i
    cdef int nxt
    while parent[cur] != root:
        nxt = parent[cur]
        parent[cur] = root
        cur = nxt
    return root


cdef void _edt_1d(double[::1] f, double[::1] d, int[::1] v, double[::1] z,
                  int n) noexcept:
    """Squared-distance transform of a 1-d sampled function (lower envelope)."""
    cdef int k = 0
    cdef int q
    cdef double s
    v[0] = 0
    z[0] = -BIG
    z[1] = BIG
    for q in range(1, n):
        while True:
            s = ((f[q] + <double>(q * q)) - (f[v[k]] + <double>(v[k] * v[k]))) \
                / <double>(2 * q - 2 * v[k])
            if s <= z[k]:
                k -= 1
            else:
                break
        k += 1
        v[k] = q
        z[k] = s
        z[k + 1] = BIG
    k = 0
    for q in range(n):
        while z[k + 1] < q:
            k += 1
        d[q] = <double>((q - v[k]) * (q - v[k])) + f[v[k]]


def partition_nearest_seed(omask, seed_window, seed_ids):
    """Assign masked pixels to the nearest seed id (ties: earliest id)."""
    cdef unsigned char[:, ::1] om = np.ascontiguousarray(omask, dtype=np.uint8)
    cdef int[:, ::1] sw = np.ascontiguousarray(seed_window, dtype=np.int32)
    cdef int[::1] ids = np.ascontiguousarray(seed_ids, dtype=np.int32)
    cdef int height = om.shape[0]
    cdef int width = om.shape[1]
    cdef int k = ids.shape[0]
    assign_arr = np.full((height, width), -1, dtype=np.int32)
    cdef int[:, ::1] assign = assign_arr
    best_arr = np.full((height, width), BIG, dtype=np.float64)
    cdef double[:, ::1] best = best_arr
    dist_arr = np.empty((height, width), dtype=np.float64)
    cdef double[:, ::1] dist = dist_arr

    cdef int nmax = height if height > width else width
    f_arr = np.empty(nmax, dtype=np.float64)
    d_arr = np.empty(nmax, dtype=np.float64)
    v_arr = np.empty(nmax, dtype=np.int32)
    z_arr = np.empty(nmax + 1, dtype=np.float64)
    cdef double[::1] f = f_arr
    cdef double[::1] d = d_arr
    cdef int[::1] v = v_arr
    cdef double[::1] z = z_arr

    cdef int j, y, x, sid
    for j in range(k):
        sid = ids[j]
        # vertical pass: binary indicator -> squared distance along columns
        for x in range(width):
            for y in range(height):
                f[y] = 0.0 if sw[y, x] == sid else BIG
            _edt_1d(f, d, v, z, height)
            for y in range(height):
                dist[y, x] = d[y]
        # horizontal pass over the column result
        for y in range(height):
            for x in range(width):
                f[x] = dist[y, x]
            _edt_1d(f, d, v, z, width)
            for x in range(width):
                dist[y, x] = d[x]
        for y in range(height):
            for x in range(width):
                if om[y, x] != 0 and dist[y, x] < best[y, x]:
                    best[y, x] = dist[y, x]
                    assign[y, x] = j
    return assign_arr
