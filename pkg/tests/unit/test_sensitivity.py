import numpy as np
import pytest
from numpy.testing import assert_allclose

from nrepshell.exceptions import DimensionError
from nrepshell.exceptions import EvaluationError
from nrepshell.geometry import build_structured_grid
from nrepshell.nrep import ActivationSpec
from nrepshell.nrep import MLPNetwork
from nrepshell.nrep import TrainingConfig
from nrepshell.nrep import fit
from nrepshell.nrep import init_params
from nrepshell.sensitivity import ShapeEvaluator
from nrepshell.sensitivity import area_gradient_x
from nrepshell.sensitivity import chain_to_theta
from nrepshell.sensitivity import compliance_gradient_x
from nrepshell.sensitivity import directional_check
from nrepshell.sensitivity import element_stiffness_derivative
from nrepshell.shell import Load
from nrepshell.shell import ShellModel
from nrepshell.shell import area_and_volume
from nrepshell.shell import assemble_and_solve
from nrepshell.shell import compliance
from nrepshell.shell import element_stiffness
from nrepshell.shell import support_mask

H = 1e-5
# a sample of coordinate dofs: corner, edge, interior, all three axes
DOFS = [0, 5, 3 * 6 + 2, 3 * 7, 3 * 12 + 1, 3 * 12 + 2, 3 * 18 + 2, 3 * 24]


def make_model(nx=4, ny=4):
    mesh = build_structured_grid(nx, ny)
    eta = mesh.vertices
    coords = np.stack((20.0 * eta[:, 0],
                       20.0 * eta[:, 1],
                       2.0 * np.sin(np.pi * eta[:, 0]) *
                       np.sin(np.pi * eta[:, 1]) + 0.3 * eta[:, 0]),
                      axis=-1)
    return ShellModel(mesh, coords, 0.1, 7e7, 0.35, Load(10.0),
                      support_mask(mesh, 'edges'), (20.0, 20.0))


def perturbed(model, dof, h):
    coords = model.coords.copy()
    coords.ravel()[dof] += h
    return model.with_coords(coords)


def central(func, model, dof):
    return (func(perturbed(model, dof, H)) -
            func(perturbed(model, dof, -H))) / (2.0 * H)


class TestCoordinateGradients(object):

    def test_compliance(self):
        model = make_model()
        grad = compliance_gradient_x(model, assemble_and_solve(model))
        assert grad.shape == (model.mesh.nvertices, 3)
        scale = np.abs(grad).max()
        for dof in DOFS:
            fd = central(lambda m: compliance(assemble_and_solve(m)),
                         model, dof)
            assert abs(grad.ravel()[dof] - fd) < 1e-4 * scale

    def test_area(self):
        model = make_model()
        grad = area_gradient_x(model)
        scale = np.abs(grad).max()
        for dof in DOFS:
            fd = central(lambda m: area_and_volume(m)[0], model, dof)
            assert abs(grad.ravel()[dof] - fd) < 1e-6 * scale

    def test_flat_area_stationary_in_z(self):
        model = make_model()
        coords = model.coords.copy()
        coords[:, 2] = 0.0
        grad = area_gradient_x(model.with_coords(coords))
        assert_allclose(grad[:, 2], 0.0, atol=1e-10)

    def test_area_scaling(self):
        # A(s x) = s^2 A
        model = make_model()
        grad = area_gradient_x(model)
        x = model.coords - model.coords.mean(axis=0)
        assert_allclose((grad * x).sum(), 2.0 * area_and_volume(model)[0],
                        rtol=1e-8)

    def test_translation(self):
        model = make_model()
        grad = compliance_gradient_x(model, assemble_and_solve(model))
        limit = 1e-8 * np.abs(grad).sum()
        for t in ((1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.3, -0.7, 0.0)):
            assert abs(grad.dot(t).sum()) <= limit


class TestElementDerivative(object):

    def test_finite_difference(self):
        model = make_model()
        element = 5
        dofs = element_stiffness(model, element).dof_map
        support = dofs[::3] // 3
        scale = np.abs(element_stiffness(model, element).matrix).max()
        for vertex, axis in ((support[0], 2), (support[5], 0),
                             (support[-1], 1)):
            dof = 3 * vertex + axis
            dK = element_stiffness_derivative(model, element, dof)
            fd = central(lambda m: element_stiffness(m, element).matrix,
                         model, dof)
            assert dK.shape == fd.shape
            assert np.abs(dK - fd).max() < 1e-5 * scale

    def test_outside_support(self):
        model = make_model(8, 8)
        element = 0
        support = element_stiffness(model, element).dof_map[::3] // 3
        far = model.mesh.nvertices - 1
        assert far not in support
        dK = element_stiffness_derivative(model, element, 3 * far + 2)
        assert not dK.any()


class TestChain(object):

    def test_dimensions(self):
        g = np.zeros((9, 3))
        with pytest.raises(DimensionError):
            chain_to_theta(g, np.zeros((8, 3)), 0.1, np.zeros((27, 4)))
        with pytest.raises(DimensionError):
            chain_to_theta(g, g, 0.1, np.zeros((10, 4)))
        with pytest.raises(DimensionError):
            chain_to_theta(g, g, 0.1, np.zeros(27))

    def test_z_rows(self):
        rng = np.random.default_rng(1)
        dJ = rng.standard_normal((9, 3))
        dA = rng.standard_normal((9, 3))
        jacobian = rng.standard_normal((9, 4))
        bundle = chain_to_theta(dJ, dA, 0.5, jacobian)
        assert_allclose(bundle.dJ_dtheta, dJ[:, 2].dot(jacobian))
        assert_allclose(bundle.dV_dtheta, 0.5 * dA[:, 2].dot(jacobian))
        full = np.zeros((27, 4))
        full[2::3] = jacobian
        other = chain_to_theta(dJ, dA, 0.5, full)
        assert_allclose(other.dJ_dtheta, bundle.dJ_dtheta)


class TestShapeEvaluator(object):

    def setup_method(self):
        template = make_model()
        net = MLPNetwork((2, 3, 1), ActivationSpec('sinusoidal', 1.0,
                                                   np.pi / 4),
                         'heightfield', (20.0, 20.0))
        net = init_params(net, 0)
        eta = template.mesh.vertices
        heights = 2.0 * np.sin(np.pi * eta[:, 0]) * np.sin(np.pi * eta[:, 1])
        self.net = fit(net, eta, heights, TrainingConfig(200, 0.01,
                                                         polish=True))[0]
        self.evaluate = ShapeEvaluator(self.net, template)

    def test_values(self):
        J, dJ, V, dV = self.evaluate(self.net.theta)
        assert dJ.shape == dV.shape == (self.net.nparams, )
        assert_allclose((J, V), self.evaluate.values(self.net.theta),
                        rtol=1e-12)
        assert self.evaluate.count == 1

    def test_directional(self):
        theta = self.net.theta
        J, dJ, V, dV = self.evaluate(theta)
        for func, grad in ((lambda x: self.evaluate.values(x)[0], dJ),
                           (lambda x: self.evaluate.values(x)[1], dV)):
            checks = directional_check(func, grad, theta, directions=4)
            assert len(checks) == 4
            assert max(x.relative_error for x in checks) < 1e-4

    def test_non_finite(self):
        theta = self.net.theta.copy()
        theta[-1] = np.inf
        with pytest.raises(EvaluationError):
            self.evaluate(theta)


class TestDirectionalCheck(object):

    def test_quadratic(self):
        A = np.diag([1.0, 2.0, 3.0])
        theta = np.array([0.5, -1.0, 2.0])
        checks = directional_check(lambda x: 0.5 * x.dot(A).dot(x),
                                   A.dot(theta), theta, directions=3)
        assert max(x.relative_error for x in checks) < 1e-8

    def test_wrong_gradient(self):
        theta = np.ones(2)
        checks = directional_check(lambda x: x.dot(x), np.zeros(2), theta,
                                   directions=[(1.0, 0.0)])
        assert checks[0].relative_error == 1.0
        assert_allclose(checks[0].finite_difference, 2.0)

    def test_shape(self):
        with pytest.raises(DimensionError):
            directional_check(np.sum, np.zeros(3), np.zeros(2))
