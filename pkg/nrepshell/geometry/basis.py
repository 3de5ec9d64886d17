'''
Uniform bicubic B-spline basis on structured grids
==================================================

Every element of an `nx` x `ny` grid is the image of the reference
square [0, 1]^2 and carries the 16 tensor-product cubic B-splines
of the columns `i-1 .. i+2` and rows `j-1 .. j+2` around it. These
are called *slots* here, numbered `4 * sy + sx`.

Slots that fall outside the grid or into an opening are ghosts.
A ghost is replaced by the linear extrapolation of the two
vertices next to it, inward::

    x[-1] = 2 * x[0] - x[1]

so the boundary curve interpolates the boundary vertices, the
second derivative across the boundary vanishes, and partition of
unity and linear reproduction survive. The slot to vertex map of
an element is stored as an extraction matrix `E` (16 x S), basis
values at a point are then `E.T @ slot_values`.

Derivatives are taken w.r.t. the normalised parametric coordinates
`eta` in [0, 1]^2, not w.r.t. the reference coordinates.
'''
import numpy as np

from nrepshell.exceptions import MeshError


def cubic_segment(t):
    '''
    Values, first and second derivatives of the four uniform cubic
    B-spline pieces over the unit interval, shape (..., 4) each.
    '''
    t = np.asarray(t, dtype=float)
    s = 1.0 - t
    t2 = t * t
    t3 = t2 * t
    b = np.stack((s * s * s / 6.0,
                  (3.0 * t3 - 6.0 * t2 + 4.0) / 6.0,
                  (-3.0 * t3 + 3.0 * t2 + 3.0 * t + 1.0) / 6.0,
                  t3 / 6.0), axis=-1)
    db = np.stack((-s * s / 2.0,
                   (3.0 * t2 - 4.0 * t) / 2.0,
                   (-3.0 * t2 + 2.0 * t + 1.0) / 2.0,
                   t2 / 2.0), axis=-1)
    ddb = np.stack((s,
                    3.0 * t - 2.0,
                    1.0 - 3.0 * t,
                    t), axis=-1)
    return b, db, ddb


def slot_basis(points, nx, ny):
    '''
    Tensor-product slot functions at reference points (G, 2).

    Returns values (G, 16), d1 (G, 16, 2) and d2 (G, 16, 3), the
    latter with components ordered (11, 22, 12).
    '''
    points = np.atleast_2d(np.asarray(points, dtype=float))
    bx, dbx, ddbx = cubic_segment(points[:, 0])
    by, dby, ddby = cubic_segment(points[:, 1])

    def outer(fy, fx):
        return (fy[:, :, None] * fx[:, None, :]).reshape(len(points), 16)

    values = outer(by, bx)
    d1 = np.stack((nx * outer(by, dbx),
                   ny * outer(dby, bx)), axis=-1)
    d2 = np.stack((nx * nx * outer(by, ddbx),
                   ny * ny * outer(ddby, bx),
                   nx * ny * outer(dby, dbx)), axis=-1)
    return values, d1, d2


def _ghost(index, last):
    # 1D slot resolution at the outer boundary
    if index < 0:
        depth = -index
        return {0: 1.0 + depth, 1: -float(depth)}
    if index > last:
        depth = index - last
        return {last: 1.0 + depth, last - 1: -float(depth)}
    return {index: 1.0}


def _mirror(cell, grid, hole):
    '''
    Replace the grid vertex `grid` lying inside `hole` by the
    extrapolation from the hole edge that faces element `cell`.
    '''
    i, j = cell
    c, r = grid
    i0, j0, i1, j1 = hole
    if i < i0:
        d = c - i0
        return {(i0, r): 1.0 + d, (i0 - 1, r): -float(d)}
    if i >= i1:
        d = i1 - c
        return {(i1, r): 1.0 + d, (i1 + 1, r): -float(d)}
    if j < j0:
        d = r - j0
        return {(c, j0): 1.0 + d, (c, j0 - 1): -float(d)}
    d = j1 - r
    return {(c, j1): 1.0 + d, (c, j1 + 1): -float(d)}


def _inside(grid, hole):
    c, r = grid
    i0, j0, i1, j1 = hole
    return i0 < c < i1 and j0 < r < j1


def build_extraction(nx, ny, holes, cells, vertex_id):
    '''
    Build per-element supports and extraction matrices.

    `cells` is the (ne, 2) array of element grid positions and
    `vertex_id` the (ny + 1, nx + 1) map from grid positions to
    vertex indices, -1 for removed vertices.

    Returns `support` (ne, S), `extraction` (ne, 16, S) and the real
    support size of every element; short supports are padded with
    their first vertex and zero columns.
    '''
    rows = []
    for i, j in cells:
        slots = []
        for sy in range(4):
            ry = _ghost(j - 1 + sy, ny)
            for sx in range(4):
                rx = _ghost(i - 1 + sx, nx)
                combo = {}
                for r, wy in ry.items():
                    for c, wx in rx.items():
                        combo[(c, r)] = combo.get((c, r), 0.0) + wx * wy
                resolved = {}
                for grid, w in combo.items():
                    hole = None
                    for h in holes:
                        if _inside(grid, h):
                            hole = h
                            break
                    if hole is None:
                        parts = {grid: 1.0}
                    else:
                        parts = _mirror((i, j), grid, hole)
                    for g, v in parts.items():
                        resolved[g] = resolved.get(g, 0.0) + w * v
                slot = {}
                for (c, r), w in resolved.items():
                    vid = vertex_id[r, c]
                    if vid < 0:
                        raise MeshError('element (%i, %i) references removed '
                                        'vertex (%i, %i)' % (i, j, c, r))
                    slot[vid] = slot.get(vid, 0.0) + w
                slots.append(dict((k, w) for k, w in slot.items()
                                  if w != 0.0))
        rows.append(slots)

    width = max(len(set().union(*slots)) for slots in rows)
    ne = len(rows)
    support = np.zeros((ne, width), dtype=np.int64)
    extraction = np.zeros((ne, 16, width))
    count = np.zeros(ne, dtype=np.int64)
    for e, slots in enumerate(rows):
        local = sorted(set().union(*slots))
        count[e] = len(local)
        support[e, :len(local)] = local
        support[e, len(local):] = local[0]
        column = dict((v, k) for k, v in enumerate(local))
        for k, slot in enumerate(slots):
            for vid, w in slot.items():
                extraction[e, k, column[vid]] += w
    return support, extraction, count
