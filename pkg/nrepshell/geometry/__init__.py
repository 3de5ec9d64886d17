'''
Structured parametric meshes
============================

A `ParametricMesh` is an `nx` x `ny` grid of quadrilateral elements
over the unit parametric square, optionally with rectangular
openings. Openings are given in element index ranges, half-open::

    (i0, j0, i1, j1)  # elements i0 <= i < i1, j0 <= j < j1 removed

An opening must stay strictly inside the grid and at least one
element away from any other opening.

Vertices are numbered row by row, the column index runs fastest,
skipping the vertices removed with the openings. Elements are
numbered the same way and listed counter-clockwise::

    from nrepshell.geometry import build_structured_grid
    from nrepshell.geometry import element_basis

    mesh = build_structured_grid(8, 8, holes=[(3, 3, 5, 5)])
    basis = element_basis(mesh, 0, (0.5, 0.5))
    basis.values.sum()  # -> 1.0

Basis functions are uniform bicubic B-splines, see
`nrepshell.geometry.basis`.
'''
import logging
from collections import namedtuple

import numpy as np

from nrepshell import config
from nrepshell.exceptions import MeshError
from nrepshell.geometry.basis import build_extraction
from nrepshell.geometry.basis import slot_basis
from nrepshell.geometry.quadrature import QuadratureRule
from nrepshell.geometry.quadrature import quadrature

log = logging.getLogger(__name__)

BasisEvaluation = namedtuple('BasisEvaluation',
                             ('values', 'd1', 'd2', 'support'))

BasisTable = namedtuple('BasisTable',
                        ('values', 'd1', 'd2', 'weights', 'rule'))


def _check_holes(nx, ny, holes):
    ret = []
    for hole in holes:
        try:
            i0, j0, i1, j1 = [int(x) for x in hole]
        except (TypeError, ValueError):
            raise MeshError('opening must be (i0, j0, i1, j1), got %r'
                            % (hole, ))
        if i0 >= i1 or j0 >= j1:
            raise MeshError('empty opening %r' % (hole, ))
        if i0 < 1 or j0 < 1 or i1 > nx - 1 or j1 > ny - 1:
            raise MeshError('opening %r touches the outer boundary of the '
                            '%ix%i grid' % (hole, nx, ny))
        for other in ret:
            k0, l0, k1, l1 = other
            if i1 < k0 or k1 < i0 or j1 < l0 or l1 < j0:
                continue
            raise MeshError('opening %r overlaps or touches opening %r'
                            % (hole, other))
        ret.append((i0, j0, i1, j1))
    return tuple(ret)


class ParametricMesh(object):
    '''
    Structured quad mesh over [0, 1]^2.

    Attributes:

    * `vertices` -- (nv, 2) parametric coordinates
    * `elements` -- (ne, 4) vertex indices, counter-clockwise
    * `cells` -- (ne, 2) grid position (i, j) of every element
    * `boundary` -- (nv, ) bool mask, outer and opening boundaries
    * `vertex_id` -- (ny + 1, nx + 1) grid to vertex map, -1 if removed
    * `cell_id` -- (ny, nx) grid to element map, -1 inside openings
    * `support`, `extraction` -- see `basis.build_extraction()`

    Instances are read-only once built; use `build_structured_grid()`.
    '''

    def __init__(self, nx, ny, holes=()):
        if int(nx) < 1 or int(ny) < 1:
            raise MeshError('grid needs nx, ny >= 1, got %s x %s' % (nx, ny))
        self.nx = nx = int(nx)
        self.ny = ny = int(ny)
        self.holes = holes = _check_holes(nx, ny, holes)

        removed_vertex = np.zeros((ny + 1, nx + 1), dtype=bool)
        removed_cell = np.zeros((ny, nx), dtype=bool)
        for i0, j0, i1, j1 in holes:
            removed_vertex[j0 + 1:j1, i0 + 1:i1] = True
            removed_cell[j0:j1, i0:i1] = True

        self.vertex_id = np.full((ny + 1, nx + 1), -1, dtype=np.int64)
        keep = ~removed_vertex
        self.vertex_id[keep] = np.arange(keep.sum())
        rows, cols = np.nonzero(keep)
        self.grid = np.stack((cols, rows), axis=-1)
        self.vertices = np.stack((cols / float(nx), rows / float(ny)),
                                 axis=-1)

        self.cell_id = np.full((ny, nx), -1, dtype=np.int64)
        alive = ~removed_cell
        self.cell_id[alive] = np.arange(alive.sum())
        rows, cols = np.nonzero(alive)
        self.cells = np.stack((cols, rows), axis=-1)
        vid = self.vertex_id
        self.elements = np.stack((vid[rows, cols],
                                  vid[rows, cols + 1],
                                  vid[rows + 1, cols + 1],
                                  vid[rows + 1, cols]), axis=-1)

        boundary = np.zeros((ny + 1, nx + 1), dtype=bool)
        boundary[0, :] = boundary[-1, :] = True
        boundary[:, 0] = boundary[:, -1] = True
        for i0, j0, i1, j1 in holes:
            boundary[j0:j1 + 1, i0:i1 + 1] = True
        boundary &= keep
        self.boundary = boundary[keep]

        (self.support,
         self.extraction,
         self.support_count) = build_extraction(nx, ny, holes,
                                                self.cells,
                                                self.vertex_id)
        for name in ('vertices', 'elements', 'cells', 'boundary',
                     'vertex_id', 'cell_id', 'support', 'extraction',
                     'grid', 'support_count'):
            getattr(self, name).setflags(write=False)
        self._tables = {}
        log.debug('mesh %ix%i, %i openings: %i vertices, %i elements, '
                  'support width %i', nx, ny, len(holes),
                  len(self.vertices), len(self.elements),
                  self.support.shape[1])

    def __repr__(self):
        return '<ParametricMesh %ix%i holes=%r nv=%i ne=%i>' % \
            (self.nx, self.ny, self.holes, self.nvertices, self.nelements)

    @property
    def nvertices(self):
        return len(self.vertices)

    @property
    def nelements(self):
        return len(self.elements)

    @property
    def grid_dims(self):
        return (self.nx, self.ny)

    @property
    def hole_descriptors(self):
        return list(self.holes)

    @property
    def boundary_vertices(self):
        return np.nonzero(self.boundary)[0]

    @property
    def element_area(self):
        # parametric area of one element
        return 1.0 / (self.nx * self.ny)

    def basis_table(self, rule=None):
        '''
        Basis values and derivatives at the points of `rule` for all
        elements at once, shapes (ne, G, S), (ne, G, S, 2), (ne, G, S, 3).
        Cached per rule order.
        '''
        if rule is None:
            rule = quadrature(config.quadrature_order)
        if rule.order in self._tables:
            return self._tables[rule.order]
        values, d1, d2 = slot_basis(rule.points, self.nx, self.ny)
        E = self.extraction
        table = BasisTable(np.einsum('gk,eks->egs', values, E),
                           np.einsum('gka,eks->egsa', d1, E),
                           np.einsum('gka,eks->egsa', d2, E),
                           np.asarray(rule.weights) * self.element_area,
                           rule)
        for item in table[:4]:
            item.setflags(write=False)
        self._tables[rule.order] = table
        return table


def build_structured_grid(nx, ny, holes=()):
    '''
    Build a `ParametricMesh` of `nx` x `ny` elements with rectangular
    openings `holes`, raises `MeshError` on invalid layouts.
    '''
    return ParametricMesh(nx, ny, holes)


def element_basis(mesh, element, point):
    '''
    Evaluate the basis of `element` at the reference `point` in
    [0, 1]^2. Only the vertices really supporting the element are
    returned.
    '''
    element = int(element)
    if not 0 <= element < mesh.nelements:
        raise MeshError('no element %i in %r' % (element, mesh))
    point = np.asarray(point, dtype=float).reshape(1, 2)
    if np.any(point < 0.0) or np.any(point > 1.0):
        raise MeshError('reference point %s outside [0, 1]^2'
                        % (point[0], ))
    values, d1, d2 = slot_basis(point, mesh.nx, mesh.ny)
    count = mesh.support_count[element]
    E = mesh.extraction[element, :, :count]
    return BasisEvaluation(values[0].dot(E),
                           np.einsum('ka,ks->sa', d1[0], E),
                           np.einsum('ka,ks->sa', d2[0], E),
                           np.array(mesh.support[element, :count]))


def locate(mesh, eta):
    '''
    Find elements and reference coordinates of parametric points.

    `eta` is one point (2, ) or a batch (n, 2); returns element
    indices and reference points of the matching shape. Points on
    the edge between two elements go to the upper one, except on the
    outer boundary.
    '''
    eta = np.asarray(eta, dtype=float)
    single = eta.ndim == 1
    eta = np.atleast_2d(eta)
    if eta.shape[-1] != 2:
        raise MeshError('parametric points must have 2 coordinates')
    tol = 1e-12
    if np.any(eta < -tol) or np.any(eta > 1.0 + tol):
        raise MeshError('parametric point outside [0, 1]^2')
    scaled = np.clip(eta, 0.0, 1.0) * (mesh.nx, mesh.ny)
    cell = np.minimum(np.floor(scaled).astype(np.int64),
                      (mesh.nx - 1, mesh.ny - 1))
    point = scaled - cell
    element = mesh.cell_id[cell[:, 1], cell[:, 0]]
    if np.any(element < 0):
        # a point on an opening edge may still belong to a neighbour
        for k in np.nonzero(element < 0)[0]:
            element[k], point[k] = _neighbour(mesh, scaled[k])
    if single:
        return element[0], point[0]
    return element, point


def _neighbour(mesh, scaled):
    for di in (0, -1):
        for dj in (0, -1):
            i = int(np.floor(scaled[0])) + di
            j = int(np.floor(scaled[1])) + dj
            if not (0 <= i < mesh.nx and 0 <= j < mesh.ny):
                continue
            p = scaled - (i, j)
            if mesh.cell_id[j, i] >= 0 and np.all(p <= 1.0 + 1e-12):
                return mesh.cell_id[j, i], np.clip(p, 0.0, 1.0)
    raise MeshError('parametric point %s lies inside an opening'
                    % (scaled / (mesh.nx, mesh.ny), ))


def evaluate_surface(mesh, coords, eta):
    '''
    Surface points sum_i B_i(eta) x_i for parametric points `eta`.
    '''
    coords = np.asarray(coords, dtype=float)
    if coords.shape[0] != mesh.nvertices:
        raise MeshError('expected %i vertex coordinates, got %i'
                        % (mesh.nvertices, coords.shape[0]))
    eta = np.asarray(eta, dtype=float)
    single = eta.ndim == 1
    element, point = locate(mesh, np.atleast_2d(eta))
    values = slot_basis(point, mesh.nx, mesh.ny)[0]
    weights = np.einsum('nk,nks->ns', values, mesh.extraction[element])
    ret = np.einsum('ns,ns...->n...', weights, coords[mesh.support[element]])
    return ret[0] if single else ret


__all__ = ['ParametricMesh',
           'BasisEvaluation',
           'BasisTable',
           'QuadratureRule',
           'build_structured_grid',
           'element_basis',
           'quadrature',
           'locate',
           'evaluate_surface']
