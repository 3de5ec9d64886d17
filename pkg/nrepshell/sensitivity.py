'''
Shape sensitivities
===================

Compliance `J = f.u` with a load independent of the geometry is
self-adjoint::

    dJ/dx_i = -sum_e u_e.T (dK_e/dx_i) u_e

and the volume of a shell of constant thickness is `V = t A`.
Derivatives w.r.t. the vertex coordinates come from forward-mode
dual numbers pushed through the shell kernel; the chain to the
network parameters multiplies them with the network Jacobian.

`ShapeEvaluator` wraps the whole pipeline for the optimiser::

    evaluate = ShapeEvaluator(net, model)
    J, dJ, V, dV = evaluate(net.theta)
'''
import logging
from collections import namedtuple

import numpy as np

from nrepshell import config
from nrepshell.exceptions import DimensionError
from nrepshell.exceptions import EvaluationError
from nrepshell.exceptions import MeshError
from nrepshell.geometry import quadrature
from nrepshell.nrep import forward
from nrepshell.nrep import jacobian_wrt_params
from nrepshell.shell import area_and_volume
from nrepshell.shell import assemble_and_solve
from nrepshell.shell import compliance
from nrepshell.shell import kernel
from nrepshell.shell.dual import seed_direction
from nrepshell.shell.dual import seed_local
from nrepshell.shell.solver import map_chunks

log = logging.getLogger(__name__)

SensitivityBundle = namedtuple('SensitivityBundle', ('dJ_dx',
                                                     'dA_dx',
                                                     'dJ_dtheta',
                                                     'dV_dtheta'))


def element_stiffness_derivative(model, element, vertex_dof, rule=None):
    '''
    dK_e/dx for the global coordinate dof `vertex_dof` (3 * vertex +
    axis), same layout as `shell.element_stiffness()`. Zero if the
    vertex does not support the element.
    '''
    mesh = model.mesh
    element = int(element)
    if not 0 <= element < mesh.nelements:
        raise MeshError('no element %i in %r' % (element, mesh))
    if rule is None:
        rule = quadrature(config.quadrature_order)
    vertex, axis = divmod(int(vertex_dof), 3)
    count = mesh.support_count[element]
    support = mesh.support[element, :count]
    direction = np.zeros((1, count, 3))
    direction[0, support == vertex, axis] = 1.0
    if not direction.any():
        return np.zeros((count * 3, count * 3))
    table = mesh.basis_table(rule)
    sl = slice(element, element + 1)
    xs = seed_direction(model.coords[support][None], direction)
    K = kernel.stiffness(xs,
                         table.d1[sl, :, :count],
                         table.d2[sl, :, :count],
                         table.weights,
                         model.thickness,
                         model.youngs_modulus,
                         model.poisson)
    return K.tangent[0, 0]


def _scatter(mesh, parts):
    grad = np.zeros((mesh.nvertices, 3))
    for elements, tangent in parts:
        # tangent: (S * 3, C) -> (C, S, 3)
        S = mesh.support.shape[1]
        values = tangent.reshape(S, 3, -1).transpose(2, 0, 1)
        np.add.at(grad, mesh.support[elements].ravel(),
                  values.reshape(-1, 3))
    return grad


def compliance_gradient_x(model, system, rule=None):
    '''
    dJ/dx (nv, 3) of a solved system.
    '''
    u = system.displacements

    def func(elements, xs, table):
        ue = u[model.mesh.support[elements]]
        W = kernel.energy(seed_local(xs), table.d1, table.d2,
                          table.weights, ue,
                          model.thickness,
                          model.youngs_modulus,
                          model.poisson)
        return -W.tangent

    return _scatter(model.mesh, map_chunks(model, func, rule))


def area_gradient_x(model, rule=None):
    '''
    dA/dx (nv, 3) of the quadrature area.
    '''
    def func(elements, xs, table):
        return kernel.area(seed_local(xs), table.d1, table.d2,
                           table.weights).tangent

    return _scatter(model.mesh, map_chunks(model, func, rule))


def chain_to_theta(dJ_dx, dA_dx, thickness, jacobian):
    '''
    Chain coordinate gradients (nv, 3) to the parameters.

    `jacobian` has either 3 * nv rows, vertex-major, or nv rows of
    z derivatives for heightfield networks; then only the z
    components of the gradients take part.
    '''
    dJ_dx = np.asarray(dJ_dx, dtype=float)
    dA_dx = np.asarray(dA_dx, dtype=float)
    jacobian = np.asarray(jacobian, dtype=float)
    if dJ_dx.shape != dA_dx.shape or dJ_dx.ndim != 2 or \
            dJ_dx.shape[1] != 3:
        raise DimensionError('coordinate gradients must be (nv, 3), got %s '
                             'and %s' % (dJ_dx.shape, dA_dx.shape))
    nv = len(dJ_dx)
    if jacobian.ndim != 2:
        raise DimensionError('jacobian must be a matrix')
    if jacobian.shape[0] == 3 * nv:
        gJ = dJ_dx.ravel()
        gA = dA_dx.ravel()
    elif jacobian.shape[0] == nv:
        gJ = dJ_dx[:, 2].copy()
        gA = dA_dx[:, 2].copy()
    else:
        raise DimensionError('jacobian has %i rows, expected %i or %i'
                             % (jacobian.shape[0], nv, 3 * nv))
    dJ = gJ.dot(jacobian)
    dV = thickness * gA.dot(jacobian)
    return SensitivityBundle(gJ, gA, dJ, dV)


class ShapeEvaluator(object):
    '''
    theta -> (J, dJ/dtheta, V, dV/dtheta) for a network and a template
    model; the network outputs at the parametric points `eta` (the
    mesh vertices by default) become the model coordinates.

    Any failure of a design, a degenerate metric, a singular system
    or non-finite coordinates, is raised as `EvaluationError`.
    '''

    def __init__(self, net, model, eta=None):
        self.net = net
        self.model = model
        self.eta = model.mesh.vertices if eta is None else eta
        self.count = 0
        self.last = None

    def geometry(self, theta):
        net = self.net.with_params(theta)
        coords = forward(net, self.eta)
        if not np.all(np.isfinite(coords)):
            raise EvaluationError('non-finite coordinates')
        if coords.shape[1] != 3:
            raise DimensionError('%r does not produce surface points' % net)
        return net, self.model.with_coords(coords)

    def values(self, theta):
        '''
        Compliance and volume only.
        '''
        net, model = self.geometry(theta)
        J = compliance(assemble_and_solve(model))
        return J, area_and_volume(model)[1]

    def __call__(self, theta):
        self.count += 1
        net, model = self.geometry(theta)
        system = assemble_and_solve(model)
        J = compliance(system)
        A, V = area_and_volume(model)
        bundle = chain_to_theta(compliance_gradient_x(model, system),
                                area_gradient_x(model),
                                model.thickness,
                                jacobian_wrt_params(net, self.eta))
        self.last = (model, system, bundle)
        log.debug('evaluation %i: J %.9g V %.9g', self.count, J, V)
        return J, bundle.dJ_dtheta, V, bundle.dV_dtheta


GradientCheck = namedtuple('GradientCheck', ('direction',
                                             'analytic',
                                             'finite_difference',
                                             'relative_error'))


def _directional(func, theta, d, h):
    return (func(theta + h * d) - func(theta - h * d)) / (2.0 * h)


def directional_check(func, grad, theta, directions=8, step=1e-4, seed=0):
    '''
    Compare `grad . d` with Richardson-extrapolated central
    differences of `func` along random unit directions `d`::

        D(h) = (f(x + h d) - f(x - h d)) / 2h
        R = (4 D(h / 2) - D(h)) / 3

    `directions` is a count or an explicit (k, P) array. Returns
    one `GradientCheck` per direction.
    '''
    theta = np.asarray(theta, dtype=float)
    grad = np.asarray(grad, dtype=float)
    if grad.shape != theta.shape:
        raise DimensionError('gradient %s does not match parameters %s'
                             % (grad.shape, theta.shape))
    if np.ndim(directions) == 0:
        rng = np.random.default_rng(seed)
        directions = rng.standard_normal((int(directions), theta.size))
    directions = np.atleast_2d(np.asarray(directions, dtype=float))
    directions = directions / np.linalg.norm(directions, axis=1)[:, None]
    ret = []
    for k, d in enumerate(directions):
        analytic = float(grad.dot(d))
        fd = (4.0 * _directional(func, theta, d, step / 2.0) -
              _directional(func, theta, d, step)) / 3.0
        scale = max(abs(analytic), abs(fd), 1e-300)
        ret.append(GradientCheck(k, analytic, float(fd),
                                 abs(analytic - fd) / scale))
        log.debug('direction %i: analytic %.12g fd %.12g', k, analytic, fd)
    return ret
