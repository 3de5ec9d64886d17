'''
Shell model data: geometry, material, load and supports.
'''
import logging

import numpy as np

from nrepshell import config
from nrepshell.exceptions import ModelError
from nrepshell.geometry import quadrature

log = logging.getLogger(__name__)

SUPPORT_KINDS = ('edges', 'short-edges', 'corners', 'mid-edges')


class Load(object):
    '''
    Surface load per unit projected area.

    * `magnitude` -- load intensity, force / length^2
    * `direction` -- unit vector, default global -z
    * `regions` -- parametric rectangles (eta1_lo, eta2_lo, eta1_hi,
      eta2_hi) the load acts on, `None` for the whole domain
    * `point_forces` -- {vertex: (fx, fy, fz)} extra nodal forces

    The load does not follow the geometry: the projected measure is
    the parametric one scaled by the model extents.
    '''

    def __init__(self, magnitude=0.0, direction=(0.0, 0.0, -1.0),
                 regions=None, point_forces=None):
        direction = np.asarray(direction, dtype=float)
        norm = np.linalg.norm(direction)
        if direction.shape != (3, ) or norm == 0.0:
            raise ModelError('load direction must be a nonzero 3-vector')
        self.magnitude = float(magnitude)
        self.direction = direction / norm
        self.regions = None
        if regions is not None:
            self.regions = []
            for rect in regions:
                rect = tuple(float(x) for x in rect)
                if len(rect) != 4 or \
                        not 0.0 <= rect[0] < rect[2] <= 1.0 or \
                        not 0.0 <= rect[1] < rect[3] <= 1.0:
                    raise ModelError('load region %r must be a rectangle '
                                     'inside [0, 1]^2' % (rect, ))
                self.regions.append(rect)
        self.point_forces = dict(point_forces or {})

    def __repr__(self):
        return '<Load %g along %s regions=%r>' % (self.magnitude,
                                                   self.direction.tolist(),
                                                   self.regions)

    def scaled(self, factor):
        return Load(self.magnitude * factor,
                    self.direction,
                    self.regions,
                    dict((k, np.asarray(v, dtype=float) * factor)
                         for k, v in self.point_forces.items()))

    def inside(self, eta):
        '''
        Mask of parametric points (..., 2) covered by the load.
        '''
        eta = np.asarray(eta)
        if self.regions is None:
            return np.ones(eta.shape[:-1], dtype=bool)
        mask = np.zeros(eta.shape[:-1], dtype=bool)
        for lo1, lo2, hi1, hi2 in self.regions:
            mask |= (eta[..., 0] >= lo1) & (eta[..., 0] <= hi1) & \
                (eta[..., 1] >= lo2) & (eta[..., 1] <= hi2)
        return mask


def support_mask(mesh, kind):
    '''
    Pinned vertices for a support preset, (nv, 3) bool.

    * `edges` -- every vertex on the outer boundary
    * `short-edges` -- the edges eta1 = 0 and eta1 = 1
    * `corners` -- the four corner vertices
    * `mid-edges` -- the vertices closest to the four edge midpoints
    '''
    eta = mesh.vertices
    mask = np.zeros(mesh.nvertices, dtype=bool)
    if kind == 'edges':
        mask = (eta[:, 0] == 0.0) | (eta[:, 0] == 1.0) | \
            (eta[:, 1] == 0.0) | (eta[:, 1] == 1.0)
    elif kind == 'short-edges':
        mask = (eta[:, 0] == 0.0) | (eta[:, 0] == 1.0)
    elif kind in ('corners', 'mid-edges'):
        if kind == 'corners':
            targets = ((0, 0), (1, 0), (1, 1), (0, 1))
        else:
            targets = ((0.5, 0), (1, 0.5), (0.5, 1), (0, 0.5))
        for target in targets:
            d = np.abs(eta - target).sum(axis=1)
            mask[np.argmin(d)] = True
    else:
        raise ModelError('unknown support kind %r, expected one of %s'
                         % (kind, ', '.join(SUPPORT_KINDS)))
    return np.repeat(mask[:, None], 3, axis=1)


class ShellModel(object):
    '''
    Everything the analysis needs about one shell::

        model = ShellModel(mesh, coords,
                           thickness=0.1,
                           youngs_modulus=7e7,
                           poisson=0.35,
                           load=Load(10.0),
                           supports=support_mask(mesh, 'mid-edges'),
                           extents=(20.0, 20.0))

    `coords` are the physical vertex positions (nv, 3), `supports`
    the fixed translations (nv, 3) bool, `extents` the projected
    size of the parametric domain used to measure the load.
    '''

    def __init__(self, mesh, coords, thickness, youngs_modulus, poisson,
                 load=None, supports=None, extents=(1.0, 1.0)):
        coords = np.array(coords, dtype=float)
        if coords.shape != (mesh.nvertices, 3):
            raise ModelError('coords must be (%i, 3), got %s'
                             % (mesh.nvertices, coords.shape))
        if not np.all(np.isfinite(coords)):
            raise ModelError('non-finite vertex coordinates')
        if not thickness > 0:
            raise ModelError('thickness must be > 0, got %r' % thickness)
        if not youngs_modulus > 0:
            raise ModelError('Young\'s modulus must be > 0, got %r'
                             % youngs_modulus)
        if not 0.0 <= poisson < 0.5:
            raise ModelError('Poisson ratio must be in [0, 0.5), got %r'
                             % poisson)
        extents = tuple(float(x) for x in extents)
        if len(extents) != 2 or min(extents) <= 0:
            raise ModelError('extents must be two positive lengths')
        if supports is None:
            supports = np.zeros((mesh.nvertices, 3), dtype=bool)
        supports = np.array(supports, dtype=bool)
        if supports.shape != (mesh.nvertices, 3):
            raise ModelError('supports must be (%i, 3) flags'
                             % mesh.nvertices)
        coords.setflags(write=False)
        supports.setflags(write=False)
        self.mesh = mesh
        self.coords = coords
        self.thickness = float(thickness)
        self.youngs_modulus = float(youngs_modulus)
        self.poisson = float(poisson)
        self.load = load if load is not None else Load()
        self.supports = supports
        self.extents = extents

    def __repr__(self):
        return '<ShellModel %r t=%g E=%g nu=%g>' % (self.mesh,
                                                   self.thickness,
                                                   self.youngs_modulus,
                                                   self.poisson)

    @property
    def ndof(self):
        return self.mesh.nvertices * 3

    def with_coords(self, coords):
        return ShellModel(self.mesh, coords,
                          self.thickness,
                          self.youngs_modulus,
                          self.poisson,
                          self.load,
                          self.supports,
                          self.extents)

    def with_load(self, load):
        return ShellModel(self.mesh, self.coords,
                          self.thickness,
                          self.youngs_modulus,
                          self.poisson,
                          load,
                          self.supports,
                          self.extents)

    def with_material(self, youngs_modulus=None, thickness=None):
        return ShellModel(self.mesh, self.coords,
                          thickness or self.thickness,
                          youngs_modulus or self.youngs_modulus,
                          self.poisson,
                          self.load,
                          self.supports,
                          self.extents)

    def force_vector(self, rule=None):
        '''
        Consistent nodal forces (nv, 3): f_i = int B_i q dA over the
        loaded part of the projected domain.
        '''
        mesh = self.mesh
        if rule is None:
            rule = quadrature(config.quadrature_order)
        table = mesh.basis_table(rule)
        cells = mesh.cells[:, None, :] + rule.points[None, :, :]
        eta = cells / (mesh.nx, mesh.ny)
        inside = self.load.inside(eta)
        scale = self.load.magnitude * self.extents[0] * self.extents[1]
        nodal = np.einsum('egs,g,eg->es', table.values, table.weights,
                          inside.astype(float)) * scale
        force = np.zeros((mesh.nvertices, 3))
        np.add.at(force, mesh.support.ravel(),
                  nodal.ravel()[:, None] * self.load.direction)
        for vertex, f in self.load.point_forces.items():
            force[int(vertex)] += np.asarray(f, dtype=float)
        return force
