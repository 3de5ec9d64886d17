'''
Kirchhoff-Love shell kernel
===========================

Vectorised over a chunk of C elements with G quadrature points and
S supporting vertices each. Geometry comes in as vertex coordinates
`xs` (C, S, 3) and basis derivatives `d1` (C, G, S, 2), `d2`
(C, G, S, 3); second derivative components are ordered (11, 22, 12).

Strains are covariant, the shear components are engineering ones
(doubled), so the energy density is `e.T @ D @ e` with `D` from
`constitutive()`.

Every function accepts `nrepshell.shell.dual.Dual` coordinates, that
is how stiffness, energy and area derivatives are computed.
'''
from collections import namedtuple

import numpy as np

from nrepshell.exceptions import SingularGeometryError
from nrepshell.shell.dual import cross
from nrepshell.shell.dual import dot
from nrepshell.shell.dual import einsum
from nrepshell.shell.dual import sqrt
from nrepshell.shell.dual import stack
from nrepshell.shell.dual import value_of

SurfaceMetrics = namedtuple('SurfaceMetrics', ('a1',
                                               'a2',
                                               'a3',
                                               'sqrt_a',
                                               'a1_con',
                                               'a2_con',
                                               'a_alpha_beta_2nd',
                                               'metric_con'))

# degenerate metric threshold relative to |a1| |a2|
DEGENERATE = 1e-12


def metrics(xs, d1, d2):
    '''
    Covariant and contravariant bases at all points of a chunk.
    Raises `SingularGeometryError` on a degenerate metric.
    '''
    cov = einsum('cgsa,csi->cgai', d1, xs)
    aab = einsum('cgsk,csi->cgki', d2, xs)
    a1 = cov[:, :, 0]
    a2 = cov[:, :, 1]
    n = cross(a1, a2)
    sqrt_a = sqrt(dot(n, n))

    v1 = value_of(a1)
    v2 = value_of(a2)
    scale = np.sqrt((v1 * v1).sum(-1) * (v2 * v2).sum(-1))
    bad = ~(value_of(sqrt_a) > DEGENERATE * scale)
    if np.any(bad):
        raise SingularGeometryError('degenerate surface metric at %i of %i '
                                    'quadrature points'
                                    % (bad.sum(), bad.size),
                                    count=int(bad.sum()))

    a3 = n / sqrt_a[..., None]
    g11 = dot(a1, a1)
    g22 = dot(a2, a2)
    g12 = dot(a1, a2)
    det = sqrt_a * sqrt_a
    h11 = g22 / det
    h22 = g11 / det
    h12 = -g12 / det
    a1_con = h11[..., None] * a1 + h12[..., None] * a2
    a2_con = h12[..., None] * a1 + h22[..., None] * a2
    return SurfaceMetrics(a1, a2, a3, sqrt_a, a1_con, a2_con, aab,
                          stack((h11, h22, h12), -1))


def expand(m, count):
    '''
    Insert `count` axes after the (C, G) core of every metric field.
    '''
    key = (slice(None), slice(None)) + (None, ) * count + (Ellipsis, )
    return SurfaceMetrics(*[x[key] for x in m])


def membrane_strain(m, du):
    '''
    Covariant membrane strains (11, 22, 2 * 12) of displacement
    derivatives `du` (..., 2, 3).
    '''
    u1 = du[..., 0, :]
    u2 = du[..., 1, :]
    return stack((dot(m.a1, u1),
                  dot(m.a2, u2),
                  dot(m.a1, u2) + dot(m.a2, u1)), -1)


def bending_strain(m, du, ddu):
    '''
    Linearised covariant bending strains (11, 22, 2 * 12) of
    displacement derivatives `du` (..., 2, 3) and `ddu` (..., 3, 3).
    '''
    u1 = du[..., 0, :]
    u2 = du[..., 1, :]
    rotation = dot(u1, cross(m.a2, m.a3)) + dot(u2, cross(m.a3, m.a1))
    ret = []
    for k in range(3):
        akb = m.a_alpha_beta_2nd[..., k, :]
        beta = (dot(u1, cross(akb, m.a2)) +
                dot(u2, cross(m.a1, akb)) +
                dot(m.a3, akb) * rotation) / m.sqrt_a - \
            dot(ddu[..., k, :], m.a3)
        ret.append(beta)
    ret[2] = ret[2] * 2.0
    return stack(ret, -1)


def _unit_fields(d1, d2):
    # derivatives of the unit displacements of every dof, (C, G, S, 3, ...)
    eye = np.eye(3)
    du = d1[:, :, :, None, :, None] * eye[:, None, :]
    ddu = d2[:, :, :, None, :, None] * eye[:, None, :]
    return du, ddu


def _to_operator(strain):
    # (C, G, S, 3, k) -> (C, G, k, S * 3)
    C, G, S = strain.shape[:3]
    return einsum('cgsjk->cgksj', strain).reshape(C, G, 3, S * 3)


def membrane_operator(m, d1, d2):
    du, _ = _unit_fields(d1, d2)
    return _to_operator(membrane_strain(expand(m, 2), du))


def bending_operator(m, d1, d2):
    du, ddu = _unit_fields(d1, d2)
    return _to_operator(bending_strain(expand(m, 2), du, ddu))


def constitutive(h, nu):
    '''
    Isotropic plane stress law in contravariant components, per
    unit E / (1 - nu^2), for contravariant metrics `h` (..., 3)
    ordered (11, 22, 12).
    '''
    h11 = h[..., 0]
    h22 = h[..., 1]
    h12 = h[..., 2]
    c12 = nu * h11 * h22 + (1.0 - nu) * h12 * h12
    c13 = h11 * h12
    c23 = h22 * h12
    c33 = ((1.0 - nu) * h11 * h22 + (1.0 + nu) * h12 * h12) * 0.5
    return stack((stack((h11 * h11, c12, c13), -1),
                  stack((c12, h22 * h22, c23), -1),
                  stack((c13, c23, c33), -1)), -2)


def rigidities(thickness, youngs_modulus, poisson):
    '''
    Membrane and bending rigidity factors.
    '''
    c = youngs_modulus / (1.0 - poisson * poisson)
    return c * thickness, c * thickness ** 3 / 12.0


def stiffness(xs, d1, d2, weights, thickness, youngs_modulus, poisson):
    '''
    Element stiffness matrices of a chunk, (C, S * 3, S * 3), dofs
    ordered vertex-major.
    '''
    m = metrics(xs, d1, d2)
    Bm = membrane_operator(m, d1, d2)
    Bb = bending_operator(m, d1, d2)
    H = constitutive(m.metric_con, poisson)
    dm, db = rigidities(thickness, youngs_modulus, poisson)
    wa = m.sqrt_a * weights
    return einsum('cg,cgks,cgkl,cglt->cst', wa, Bm, H, Bm) * dm + \
        einsum('cg,cgks,cgkl,cglt->cst', wa, Bb, H, Bb) * db


def energy(xs, d1, d2, weights, ue, thickness, youngs_modulus, poisson):
    '''
    `u_e.T @ K_e @ u_e` for element displacements `ue` (C, S, 3),
    computed from the strains without forming `K_e`.
    '''
    m = metrics(xs, d1, d2)
    du = np.einsum('cgsa,csi->cgai', d1, ue)
    ddu = np.einsum('cgsk,csi->cgki', d2, ue)
    em = membrane_strain(m, du)
    eb = bending_strain(m, du, ddu)
    H = constitutive(m.metric_con, poisson)
    dm, db = rigidities(thickness, youngs_modulus, poisson)
    wa = m.sqrt_a * weights
    return einsum('cg,cgk,cgkl,cgl->c', wa, em, H, em) * dm + \
        einsum('cg,cgk,cgkl,cgl->c', wa, eb, H, eb) * db


def area(xs, d1, d2, weights):
    '''
    Mid-surface area of every element of a chunk, (C, ).
    '''
    m = metrics(xs, d1, d2)
    return (m.sqrt_a * weights).sum(-1)
