'''
Global assembly and the static solve.

Element work is split into chunks of `config.chunk_size` elements.
With `config.threads > 1` chunks run on a thread pool; numpy
releases the GIL inside the heavy einsum calls. Results come back
in element order when `config.deterministic` is set, in completion
order otherwise.
'''
import logging
from concurrent.futures import ThreadPoolExecutor
from concurrent.futures import as_completed

import numpy as np
from scipy import sparse
from scipy.sparse.linalg import splu

from nrepshell import config
from nrepshell.exceptions import ModelError
from nrepshell.exceptions import SingularSystemError
from nrepshell.geometry import quadrature
from nrepshell.shell import kernel

try:
    from sksparse.cholmod import cholesky
except ImportError:
    cholesky = None

log = logging.getLogger(__name__)


def chunks(count, size=None):
    size = size or config.chunk_size
    return [np.arange(i, min(i + size, count))
            for i in range(0, count, size)]


def map_chunks(model, func, rule=None):
    '''
    Run `func(elements, xs, table)` over chunks of elements, where
    `xs` are the support coordinates (C, S, 3) and `table` the
    basis table restricted to the chunk. Returns a list of
    `(elements, result)` pairs.
    '''
    if rule is None:
        rule = quadrature(config.quadrature_order)
    mesh = model.mesh
    table = mesh.basis_table(rule)

    def work(elements):
        xs = model.coords[mesh.support[elements]]
        part = table._replace(values=table.values[elements],
                              d1=table.d1[elements],
                              d2=table.d2[elements])
        return elements, func(elements, xs, part)

    jobs = chunks(mesh.nelements)
    if config.threads <= 1 or len(jobs) == 1:
        return [work(x) for x in jobs]
    with ThreadPoolExecutor(max_workers=config.threads) as pool:
        futures = [pool.submit(work, x) for x in jobs]
        if config.deterministic:
            return [f.result() for f in futures]
        return [f.result() for f in as_completed(futures)]


def dof_map(mesh, elements=None):
    '''
    Global dof indices (C, S * 3) of the element supports, dof of
    vertex `v` along axis `i` is `3 * v + i`.
    '''
    support = mesh.support if elements is None else mesh.support[elements]
    return (support[:, :, None] * 3 + np.arange(3)).reshape(len(support), -1)


def assemble(model, rule=None):
    '''
    Global stiffness matrix, CSR, ndof x ndof.
    '''
    mesh = model.mesh

    def func(elements, xs, table):
        return kernel.stiffness(xs, table.d1, table.d2, table.weights,
                                model.thickness,
                                model.youngs_modulus,
                                model.poisson)

    rows = []
    cols = []
    data = []
    for elements, K in map_chunks(model, func, rule):
        dofs = dof_map(mesh, elements)
        n = dofs.shape[1]
        rows.append(np.repeat(dofs, n, axis=1).ravel())
        cols.append(np.tile(dofs, (1, n)).ravel())
        data.append(K.ravel())
    K = sparse.coo_matrix((np.concatenate(data),
                           (np.concatenate(rows), np.concatenate(cols))),
                          shape=(model.ndof, model.ndof))
    return K.tocsr()


def rigid_modes(coords):
    '''
    Rigid body displacement fields (ndof, 6): three translations and
    three rotations about the centroid.
    '''
    coords = np.asarray(coords, dtype=float)
    r = coords - coords.mean(axis=0)
    nv = len(coords)
    modes = np.zeros((nv, 3, 6))
    for i in range(3):
        modes[:, i, i] = 1.0
        axis = np.zeros(3)
        axis[i] = 1.0
        modes[:, :, 3 + i] = np.cross(axis, r)
    return modes.reshape(nv * 3, 6)


def free_modes(model):
    '''
    Number of rigid body modes the supports leave unconstrained.
    '''
    fixed = model.supports.ravel()
    if not fixed.any():
        return 6
    restricted = rigid_modes(model.coords)[fixed]
    scale = np.abs(restricted).max() or 1.0
    return 6 - np.linalg.matrix_rank(restricted / scale, tol=1e-10)


class GlobalSystem(object):
    '''
    Solved linear system `K u = f`.

    * `stiffness` -- full global matrix before the supports are applied
    * `force`, `displacement` -- ndof vectors, zero displacement on
      the fixed dofs
    * `free` -- ndof mask of the unknowns
    * `residual` -- relative residual of the reduced solve
    '''

    def __init__(self, stiffness, force, displacement, free, residual):
        self.stiffness = stiffness
        self.force = force
        self.displacement = displacement
        self.free = free
        self.residual = residual
        for x in (force, displacement, free):
            x.setflags(write=False)

    def __repr__(self):
        return '<GlobalSystem ndof=%i free=%i residual=%.3g>' % \
            (len(self.force), self.free.sum(), self.residual)

    @property
    def displacements(self):
        return self.displacement.reshape(-1, 3)


def _factorize(K):
    if cholesky is not None:
        try:
            factor = cholesky(K.tocsc())
        except Exception as e:
            raise SingularSystemError('Cholesky factorisation failed: %s'
                                      % e)
        return factor
    try:
        lu = splu(K.tocsc())
    except RuntimeError as e:
        raise SingularSystemError('LU factorisation failed: %s' % e)
    return lu.solve


def assemble_and_solve(model, rule=None):
    '''
    Assemble and solve the static problem of `model`, fixed dofs
    are eliminated. Raises `SingularSystemError` if the supports
    leave rigid body modes, or the reduced matrix is singular.
    '''
    if not model.supports.any():
        raise ModelError('no supports set on %r' % (model, ))
    modes = free_modes(model)
    if modes > 0:
        raise SingularSystemError('supports leave %i rigid body modes '
                                  'unconstrained' % modes, modes=modes)
    K = assemble(model, rule)
    f = model.force_vector(rule).ravel()
    free = ~model.supports.ravel()
    Kff = K[free][:, free]
    u = np.zeros(model.ndof)
    ff = f[free]
    norm = np.linalg.norm(ff)
    if norm > 0:
        solve = _factorize(Kff)
        uf = np.asarray(solve(ff)).ravel()
        if not np.all(np.isfinite(uf)):
            raise SingularSystemError('non-finite displacements')
        u[free] = uf
        residual = np.linalg.norm(Kff.dot(uf) - ff) / norm
    else:
        residual = 0.0
    if residual > config.residual_tolerance:
        log.warning('solve residual %.3g above %.3g', residual,
                    config.residual_tolerance)
    log.debug('solved %i dofs, %i free, residual %.3g',
              model.ndof, free.sum(), residual)
    return GlobalSystem(K, f, u, free, residual)


def compliance(system):
    '''
    `J = f.u`, equal to `u.K.u` at equilibrium.
    '''
    return float(np.dot(system.force, system.displacement))


def area_and_volume(model, rule=None):
    '''
    Mid-surface area and shell volume `A * t`.
    '''
    def func(elements, xs, table):
        return kernel.area(xs, table.d1, table.d2, table.weights)

    A = 0.0
    parts = map_chunks(model, func, rule)
    for elements, a in sorted(parts, key=lambda x: x[0][0]):
        A += a.sum()
    return A, A * model.thickness
