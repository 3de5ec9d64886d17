'''
Lattice-skin geometry
=====================

A shell is offset vertically to get a second skin, the slab between
the skins is filled with body-centred cubic (BCC) strut cells::

    upper = offset_shell(model, 1.0)
    net, mse = build_map3d_net(model, 1.0)
    lattice = generate_bcc_lattice(4, 4, 2)
    geometry = map_lattice(lattice, net, model, model.with_coords(upper))

Lattice nodes live in the parametric unit cube. Nodes on the bottom
and top faces are coupled to the lower and the upper skin and sit
exactly on the spline surface of their skin; all the other nodes
are mapped by a 3 -> 3 network fitted to the slab.
'''
import logging
import math
from collections import namedtuple

import numpy as np

from nrepshell.exceptions import LatticeError
from nrepshell.exceptions import MeshError
from nrepshell.geometry import evaluate_surface
from nrepshell.geometry import locate
from nrepshell.nrep import ActivationSpec
from nrepshell.nrep import MLPNetwork
from nrepshell.nrep import TrainingConfig
from nrepshell.nrep import fit
from nrepshell.nrep import forward
from nrepshell.nrep import init_params

log = logging.getLogger(__name__)

LOWER = 'lower'
UPPER = 'upper'
STRUT_DIAMETER = 0.04
INTERIOR_LEVELS = 5

Coupling = namedtuple('Coupling', ('node', 'shell', 'element', 'point',
                                   'eta'))


class BCCLattice(object):
    '''
    Parametric BCC lattice of `nx` x `ny` x `layers` cells.

    Corner nodes come first, node `(k * (ny + 1) + j) * (nx + 1) + i`
    sits at `(i / nx, j / ny, k / layers)`; body centres follow in
    the same cell order. `coupled` maps the bottom face corner nodes
    to the lower skin and the top face ones to the upper skin.
    '''

    def __init__(self, nx, ny, layers, points, struts, coupled, extents):
        self.nx = nx
        self.ny = ny
        self.layers = layers
        self.points = points
        self.struts = struts
        self.coupled = coupled
        self.extents = extents

    def __repr__(self):
        return '<BCCLattice %ix%ix%i nodes=%i struts=%i>' % \
            (self.nx, self.ny, self.layers, len(self.points),
             len(self.struts))

    @property
    def ncorners(self):
        return (self.nx + 1) * (self.ny + 1) * (self.layers + 1)

    def physical_preview(self, height=1.0):
        '''
        Nodes scaled affinely to the box `extents` x `height`.
        '''
        return self.points * (self.extents[0], self.extents[1], height)


def generate_bcc_lattice(nx, ny, layers, extents=(1.0, 1.0),
                         corner_edges=False):
    '''
    Build the parametric lattice. Every cell gets the 8 struts from
    its body centre to its corners; `corner_edges` adds the 12 cube
    edges, shared edges once.
    '''
    nx, ny, layers = int(nx), int(ny), int(layers)
    if min(nx, ny, layers) < 1:
        raise LatticeError('lattice needs nx, ny, layers >= 1, got %i, %i, '
                           '%i' % (nx, ny, layers))
    i, j, k = np.meshgrid(np.arange(nx + 1), np.arange(ny + 1),
                          np.arange(layers + 1), indexing='ij')
    order = (k * (ny + 1) + j) * (nx + 1) + i
    corners = np.zeros(((nx + 1) * (ny + 1) * (layers + 1), 3))
    corners[order.ravel()] = np.stack((i.ravel() / float(nx),
                                       j.ravel() / float(ny),
                                       k.ravel() / float(layers)), axis=-1)

    ci, cj, ck = np.meshgrid(np.arange(nx), np.arange(ny),
                             np.arange(layers), indexing='ij')
    cell = ((ck * ny + cj) * nx + ci).ravel()
    ci, cj, ck = ci.ravel()[np.argsort(cell)], \
        cj.ravel()[np.argsort(cell)], ck.ravel()[np.argsort(cell)]
    centres = np.stack(((ci + 0.5) / nx, (cj + 0.5) / ny,
                        (ck + 0.5) / layers), axis=-1)
    ncorner = len(corners)
    centre_id = ncorner + np.arange(len(centres))

    def corner(di, dj, dk):
        return ((ck + dk) * (ny + 1) + cj + dj) * (nx + 1) + ci + di

    offsets = [(di, dj, dk) for dk in (0, 1) for dj in (0, 1)
               for di in (0, 1)]
    struts = [np.stack((centre_id, corner(*o)), axis=-1) for o in offsets]
    struts = np.stack(struts, axis=1).reshape(-1, 2)
    if corner_edges:
        edges = []
        for axis in range(3):
            for o in offsets:
                if o[axis] == 1:
                    continue
                p = list(o)
                p[axis] = 1
                edges.append(np.stack((corner(*o), corner(*p)), axis=-1))
        edges = np.sort(np.concatenate(edges), axis=1)
        edges = np.unique(edges, axis=0)
        struts = np.concatenate((struts, edges))

    bottom = order[:, :, 0].ravel()
    top = order[:, :, layers].ravel()
    coupled = dict([(int(x), LOWER) for x in np.sort(bottom)] +
                   [(int(x), UPPER) for x in np.sort(top)])
    points = np.concatenate((corners, centres))
    log.debug('BCC lattice %ix%ix%i: %i nodes, %i struts', nx, ny, layers,
              len(points), len(struts))
    return BCCLattice(nx, ny, layers, points, struts, coupled,
                      tuple(float(x) for x in extents))


def offset_shell(model, h):
    '''
    Vertex coordinates of `model` translated by `h` along +z.
    '''
    h = float(h)
    if h == 0.0 or not math.isfinite(h):
        raise LatticeError('offset must be finite and nonzero, got %r' % h)
    return model.coords + (0.0, 0.0, h)


class LatticeSkinGeometry(object):
    '''
    Two skins and the lattice between them.

    * `lower_shell`, `upper_shell` -- `ShellModel`
    * `nodes` -- (n, 3) physical node positions
    * `struts` -- (m, 2) node pairs, `diameters` -- (m, )
    * `couplings` -- list of `Coupling` records
    '''

    def __init__(self, lower_shell, upper_shell, nodes, struts, diameters,
                 couplings):
        self.lower_shell = lower_shell
        self.upper_shell = upper_shell
        self.nodes = nodes
        self.struts = struts
        self.diameters = diameters
        self.couplings = couplings

    def __repr__(self):
        return '<LatticeSkinGeometry nodes=%i struts=%i couplings=%i>' % \
            (len(self.nodes), len(self.struts), len(self.couplings))

    def shell(self, name):
        return self.lower_shell if name == LOWER else self.upper_shell

    def coupling_residual(self):
        '''
        Largest distance between a coupled node and the surface point
        of its skin at the coupling location.
        '''
        ret = 0.0
        for name in (LOWER, UPPER):
            group = [c for c in self.couplings if c.shell == name]
            if not group:
                continue
            shell = self.shell(name)
            eta = np.array([c.eta for c in group])
            x = evaluate_surface(shell.mesh, shell.coords, eta)
            d = np.abs(self.nodes[[c.node for c in group]] - x).max()
            ret = max(ret, float(d))
        return ret


def map_lattice(lattice, net, lower_shell, upper_shell,
                diameter=STRUT_DIAMETER):
    '''
    Physical lattice: coupled nodes are the surface points
    `sum_i B_i(eta_c) x_i` of their skin, the other nodes
    `net(parametric node)`.
    '''
    if net.output_mode != 'map3d':
        raise LatticeError('lattice nodes need a map3d network, got %r'
                           % net)
    lo, up = lower_shell.mesh, upper_shell.mesh
    if lo is not up and (lo.grid_dims != up.grid_dims or
                         lo.holes != up.holes):
        raise LatticeError('skins must share their parametric mesh, got '
                           '%r and %r' % (lo, up))
    if not np.allclose(lower_shell.extents, upper_shell.extents):
        raise LatticeError('skins must share their extents, got %r and %r'
                           % (lower_shell.extents, upper_shell.extents))
    points = lattice.points
    nodes = np.array(forward(net, points))
    couplings = []
    for name, shell in ((LOWER, lower_shell), (UPPER, upper_shell)):
        ids = np.array([n for n, s in sorted(lattice.coupled.items())
                        if s == name], dtype=np.int64)
        if not len(ids):
            continue
        eta = points[ids, :2]
        try:
            element, point = locate(shell.mesh, eta)
            nodes[ids] = evaluate_surface(shell.mesh, shell.coords, eta)
        except MeshError as e:
            raise LatticeError('coupling on the %s skin failed: %s'
                               % (name, e))
        for n, e, p, c in zip(ids, element, point, eta):
            couplings.append(Coupling(int(n), name, int(e), tuple(p),
                                      tuple(c)))
    diameters = np.full(len(lattice.struts), float(diameter))
    geometry = LatticeSkinGeometry(lower_shell, upper_shell, nodes,
                                   lattice.struts.copy(), diameters,
                                   couplings)
    log.info('mapped %r, %i coupled nodes', lattice, len(couplings))
    return geometry


def slab_samples(model, h, levels=INTERIOR_LEVELS):
    '''
    Training pairs for the slab map: every mesh vertex on the lower
    skin (zeta = 0), on the upper skin (zeta = 1) and on `levels`
    equispaced interior levels, linearly interpolated.
    '''
    lower = model.coords
    upper = offset_shell(model, h)
    eta = model.mesh.vertices
    inputs = []
    targets = []
    for zeta in np.linspace(0.0, 1.0, levels + 2):
        inputs.append(np.hstack((eta, np.full((len(eta), 1), zeta))))
        targets.append((1.0 - zeta) * lower + zeta * upper)
    return np.concatenate(inputs), np.concatenate(targets)


def build_map3d_net(model, h, training=None, layers=(3, 20, 20, 3),
                    activation=None, levels=INTERIOR_LEVELS):
    '''
    Fit a map3d network taking parametric (eta1, eta2, zeta) to the
    slab between `model` and its offset by `h`. Returns the network
    and its fit MSE.
    '''
    training = training or TrainingConfig(2000, 0.01, 0, polish=True)
    if activation is None:
        activation = ActivationSpec('sinusoidal', 1.0, math.pi / 4)
    net = MLPNetwork(layers, activation, 'map3d', model.extents)
    net = init_params(net, training.seed)
    inputs, targets = slab_samples(model, h, levels)
    return fit(net, inputs, targets, training)


def write_lattice(path, geometry):
    '''
    ASCII edge list: `v x y z` per node, then `e i j d` per strut,
    0-based indices.
    '''
    with open(path, 'w') as f:
        f.write('# nrepshell lattice\n')
        for row in geometry.nodes:
            f.write('v %s\n' % ' '.join('%.17g' % x for x in row))
        for (i, j), d in zip(geometry.struts, geometry.diameters):
            f.write('e %i %i %.17g\n' % (i, j, d))
    log.debug('wrote %s', path)


def load_lattice(path):
    '''
    Read an edge list back, returns nodes (n, 3), struts (m, 2) and
    diameters (m, ).
    '''
    nodes = []
    struts = []
    diameters = []
    with open(path, 'r') as f:
        for line in f:
            items = line.split()
            if not items or items[0].startswith('#'):
                continue
            try:
                if len(items) != 4:
                    raise ValueError(line)
                if items[0] == 'v':
                    nodes.append([float(x) for x in items[1:4]])
                elif items[0] == 'e':
                    struts.append([int(items[1]), int(items[2])])
                    diameters.append(float(items[3]))
                else:
                    raise LatticeError('unknown lattice record %r'
                                       % items[0])
            except (ValueError, IndexError):
                raise LatticeError('malformed lattice record %r'
                                   % line.strip())
    struts = np.array(struts, dtype=np.int64).reshape(-1, 2)
    if len(struts) and (struts.min() < 0 or struts.max() >= len(nodes)):
        raise LatticeError('strut references a missing node')
    return (np.array(nodes).reshape(-1, 3), struts, np.array(diameters))


__all__ = ['BCCLattice',
           'Coupling',
           'LatticeSkinGeometry',
           'generate_bcc_lattice',
           'offset_shell',
           'map_lattice',
           'build_map3d_net',
           'slab_samples',
           'write_lattice',
           'load_lattice']
