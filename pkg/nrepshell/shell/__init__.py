'''
Linear Kirchhoff-Love thin shells
=================================

Analysis of a shell given by its mesh and physical vertex
positions::

    from nrepshell.geometry import build_structured_grid
    from nrepshell.shell import ShellModel, Load, support_mask
    from nrepshell.shell import assemble_and_solve, compliance

    mesh = build_structured_grid(8, 8)
    coords = ...   # (nv, 3)
    model = ShellModel(mesh, coords, 0.1, 7e7, 0.35,
                       load=Load(10.0),
                       supports=support_mask(mesh, 'mid-edges'),
                       extents=(20.0, 20.0))
    system = assemble_and_solve(model)
    compliance(system)

The functions below working on one element and one point are the
reference API and used in the tests; the analysis itself goes
through the vectorised kernel in `nrepshell.shell.kernel`.
'''
from collections import namedtuple

import numpy as np

from nrepshell import config
from nrepshell.exceptions import MeshError
from nrepshell.geometry import element_basis
from nrepshell.geometry import quadrature
from nrepshell.shell import kernel
from nrepshell.shell.kernel import SurfaceMetrics
from nrepshell.shell.model import Load
from nrepshell.shell.model import ShellModel
from nrepshell.shell.model import support_mask
from nrepshell.shell.model import SUPPORT_KINDS
from nrepshell.shell.solver import GlobalSystem
from nrepshell.shell.solver import assemble
from nrepshell.shell.solver import assemble_and_solve
from nrepshell.shell.solver import area_and_volume
from nrepshell.shell.solver import compliance
from nrepshell.shell.solver import dof_map

ElementStiffness = namedtuple('ElementStiffness', ('matrix', 'dof_map'))


def _chunked(m):
    return SurfaceMetrics(*[np.asarray(x)[None, None] for x in m])


def surface_metrics(model, element, point):
    '''
    Metrics of `model` at reference `point` of `element`.
    '''
    basis = element_basis(model.mesh, element, point)
    xs = model.coords[basis.support][None]
    m = kernel.metrics(xs, basis.d1[None, None], basis.d2[None, None])
    return SurfaceMetrics(*[np.asarray(x)[0, 0] for x in m])


def membrane_strain_operator(metrics, basis):
    '''
    (3, 3 * S) matrix from the element dofs to the membrane strains
    (11, 22, 2 * 12).
    '''
    return kernel.membrane_operator(_chunked(metrics),
                                    basis.d1[None, None],
                                    basis.d2[None, None])[0, 0]


def bending_strain_operator(metrics, basis):
    '''
    (3, 3 * S) matrix from the element dofs to the bending strains
    (11, 22, 2 * 12).
    '''
    return kernel.bending_operator(_chunked(metrics),
                                   basis.d1[None, None],
                                   basis.d2[None, None])[0, 0]


def element_stiffness(model, element, rule=None):
    '''
    Stiffness matrix of one element with its global dof map.
    '''
    mesh = model.mesh
    element = int(element)
    if not 0 <= element < mesh.nelements:
        raise MeshError('no element %i in %r' % (element, mesh))
    if rule is None:
        rule = quadrature(config.quadrature_order)
    table = mesh.basis_table(rule)
    count = mesh.support_count[element]
    sl = slice(element, element + 1)
    xs = model.coords[mesh.support[sl, :count]]
    K = kernel.stiffness(xs,
                         table.d1[sl, :, :count],
                         table.d2[sl, :, :count],
                         table.weights,
                         model.thickness,
                         model.youngs_modulus,
                         model.poisson)[0]
    dofs = dof_map(mesh, [element])[0, :count * 3]
    return ElementStiffness(K, dofs)


__all__ = ['ShellModel',
           'Load',
           'SurfaceMetrics',
           'ElementStiffness',
           'GlobalSystem',
           'SUPPORT_KINDS',
           'support_mask',
           'surface_metrics',
           'membrane_strain_operator',
           'bending_strain_operator',
           'element_stiffness',
           'assemble',
           'assemble_and_solve',
           'compliance',
           'area_and_volume']
