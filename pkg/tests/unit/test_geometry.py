import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from nrepshell.exceptions import MeshError
from nrepshell.geometry import build_structured_grid
from nrepshell.geometry import element_basis
from nrepshell.geometry import evaluate_surface
from nrepshell.geometry import locate
from nrepshell.geometry import quadrature
from nrepshell.geometry.basis import cubic_segment
from nrepshell.geometry.export import read_obj
from nrepshell.geometry.export import write_obj
from nrepshell.geometry.export import write_vtk

POINTS = [(0.0, 0.0), (1.0, 1.0), (0.5, 0.5), (0.2, 0.9), (1.0, 0.0),
          (0.73, 0.11)]


def flat(mesh, extents=(20.0, 20.0)):
    eta = mesh.vertices
    return np.stack((eta[:, 0] * extents[0],
                     eta[:, 1] * extents[1],
                     np.zeros(len(eta))), axis=-1)


class TestQuadrature(object):

    def test_weights(self):
        rule = quadrature(5)
        assert len(rule.points) == 9
        assert_allclose(rule.weights.sum(), 1.0, rtol=1e-14)

    def test_exact(self):
        rule = quadrature(5)
        t1, t2 = rule.points[:, 0], rule.points[:, 1]
        value = np.dot(rule.weights, t1 ** 4 * t2 ** 5)
        assert_allclose(value, 1.0 / 30.0, rtol=1e-13)

    def test_t1_fastest(self):
        rule = quadrature(3)
        assert rule.points[0, 1] == rule.points[1, 1]
        assert rule.points[0, 0] < rule.points[1, 0]

    def test_invalid(self):
        with pytest.raises(MeshError):
            quadrature(0)


class TestCubicSegment(object):

    def test_partition(self):
        b, db, ddb = cubic_segment(np.linspace(0, 1, 11))
        assert_allclose(b.sum(axis=-1), 1.0, rtol=1e-14)
        assert_allclose(db.sum(axis=-1), 0.0, atol=1e-14)
        assert_allclose(ddb.sum(axis=-1), 0.0, atol=1e-14)

    def test_derivative(self):
        t = np.array([0.3])
        h = 1e-6
        b1 = cubic_segment(t + h)[0]
        b0 = cubic_segment(t - h)[0]
        assert_allclose((b1 - b0) / (2 * h), cubic_segment(t)[1],
                        atol=1e-8)


class TestMesh(object):

    def test_counts(self):
        mesh = build_structured_grid(4, 3)
        assert mesh.nvertices == 20
        assert mesh.nelements == 12
        assert mesh.grid_dims == (4, 3)
        assert len(mesh.boundary_vertices) == 20 - 6

    def test_counts_with_opening(self):
        mesh = build_structured_grid(6, 6, [(2, 2, 4, 4)])
        assert mesh.nvertices == 49 - 1
        assert mesh.nelements == 36 - 4
        assert mesh.hole_descriptors == [(2, 2, 4, 4)]
        assert mesh.cell_id[2, 2] == -1
        assert mesh.vertex_id[3, 3] == -1

    def test_ccw(self):
        mesh = build_structured_grid(3, 2)
        eta = mesh.vertices[mesh.elements]
        a = eta[:, 1] - eta[:, 0]
        b = eta[:, 2] - eta[:, 0]
        assert np.all(a[:, 0] * b[:, 1] - a[:, 1] * b[:, 0] > 0)

    def test_invalid(self):
        with pytest.raises(MeshError):
            build_structured_grid(0, 4)
        with pytest.raises(MeshError):
            build_structured_grid(6, 6, [(0, 2, 3, 4)])
        with pytest.raises(MeshError):
            build_structured_grid(6, 6, [(2, 2, 2, 4)])
        with pytest.raises(MeshError):
            build_structured_grid(6, 6, [(1, 1, 2, 2), (2, 1, 3, 2)])

    def test_separated_openings(self):
        mesh = build_structured_grid(6, 6, [(1, 1, 2, 2), (3, 1, 4, 2)])
        assert mesh.nelements == 34

    def test_read_only(self):
        mesh = build_structured_grid(2, 2)
        with pytest.raises(ValueError):
            mesh.vertices[0, 0] = 1.0


class TestBasis(object):

    @pytest.mark.parametrize('holes', [(), ((1, 1, 4, 3), )])
    def test_partition_and_linear_reproduction(self, holes):
        mesh = build_structured_grid(6, 5, holes)
        for element in range(mesh.nelements):
            i, j = mesh.cells[element]
            for point in POINTS:
                basis = element_basis(mesh, element, point)
                eta = mesh.vertices[basis.support]
                assert_allclose(basis.values.sum(), 1.0, rtol=1e-13)
                expected = ((i + point[0]) / 6.0, (j + point[1]) / 5.0)
                assert_allclose(basis.values.dot(eta), expected,
                                atol=1e-13)
                assert_allclose(np.einsum('sa,sk->ak', basis.d1, eta),
                                np.eye(2), atol=1e-11)
                assert_allclose(np.einsum('sa,sk->ak', basis.d2, eta),
                                np.zeros((3, 2)), atol=1e-9)

    def test_support_unique(self):
        mesh = build_structured_grid(4, 4, [(1, 1, 3, 3)])
        for element in range(mesh.nelements):
            count = mesh.support_count[element]
            support = mesh.support[element, :count]
            assert len(set(support.tolist())) == count
            assert np.all(mesh.extraction[element, :, count:] == 0)

    def test_corner_interpolation(self):
        mesh = build_structured_grid(3, 3)
        basis = element_basis(mesh, 0, (0.0, 0.0))
        weights = dict(zip(basis.support.tolist(), basis.values))
        assert_allclose(weights[0], 1.0, rtol=1e-14)
        assert_allclose(sum(abs(v) for k, v in weights.items() if k != 0),
                        0.0, atol=1e-14)

    def test_outer_boundary(self):
        # the edge curve depends on the boundary row only and the
        # second derivative across the edge vanishes
        mesh = build_structured_grid(5, 4)
        coords = np.random.default_rng(2).random((mesh.nvertices, 3))
        row = coords[mesh.vertex_id[0]]
        padded = np.vstack((2 * row[0] - row[1], row,
                            2 * row[-1] - row[-2]))
        for i in range(mesh.nx):
            element = mesh.cell_id[0, i]
            for t in (0.0, 0.3, 1.0):
                basis = element_basis(mesh, element, (t, 0.0))
                x = coords[basis.support]
                expected = cubic_segment(t)[0].dot(padded[i:i + 4])
                assert_allclose(basis.values.dot(x), expected, atol=1e-13)
                assert_allclose(basis.d2[:, 1].dot(x), 0.0, atol=1e-10)
        for j in range(mesh.ny):
            basis = element_basis(mesh, mesh.cell_id[j, 0], (0.0, 0.4))
            assert_allclose(basis.d2[:, 0].dot(coords[basis.support]), 0.0,
                            atol=1e-10)

    def test_opening_edge(self):
        mesh = build_structured_grid(6, 6, [(2, 1, 4, 5)])
        coords = np.random.default_rng(3).random((mesh.nvertices, 3))
        vid = mesh.vertex_id
        # element left of the opening, point on the opening edge where
        # every row in reach is extrapolated from the edge column
        basis = element_basis(mesh, mesh.cell_id[3, 1], (1.0, 0.0))
        x = coords[basis.support]
        edge = (coords[vid[2, 2]] + 4 * coords[vid[3, 2]] +
                coords[vid[4, 2]]) / 6.0
        assert_allclose(basis.values.dot(x), edge, atol=1e-13)
        assert_allclose(basis.d2[:, 0].dot(x), 0.0, atol=1e-10)

    @pytest.mark.parametrize('cell', [(0, 0), (2, 0), (1, 1), (1, 2)])
    def test_second_derivatives(self, cell):
        # corner, edge, interior and next to the opening
        mesh = build_structured_grid(5, 5, [(2, 2, 4, 4)])
        element = mesh.cell_id[cell[1], cell[0]]
        h = 1e-5
        rng = np.random.default_rng(4)
        for point in rng.uniform(h, 1.0 - h, (100, 2)):
            d2 = element_basis(mesh, element, point).d2
            fd = []
            for axis in (0, 1):
                step = np.zeros(2)
                step[axis] = h
                plus = element_basis(mesh, element, point + step).d1
                minus = element_basis(mesh, element, point - step).d1
                fd.append((plus - minus) / (2.0 * h / 5.0))
            scale = np.abs(d2).max()
            assert_allclose(fd[0][:, 0], d2[:, 0], rtol=1e-5,
                            atol=1e-6 * scale)
            assert_allclose(fd[1][:, 1], d2[:, 1], rtol=1e-5,
                            atol=1e-6 * scale)
            assert_allclose(fd[1][:, 0], d2[:, 2], rtol=1e-5,
                            atol=1e-6 * scale)

    def test_invalid_point(self):
        mesh = build_structured_grid(2, 2)
        with pytest.raises(MeshError):
            element_basis(mesh, 0, (1.5, 0.0))
        with pytest.raises(MeshError):
            element_basis(mesh, 4, (0.5, 0.5))

    def test_table_weights(self):
        mesh = build_structured_grid(4, 2)
        table = mesh.basis_table()
        assert_allclose(table.weights.sum() * mesh.nelements, 1.0,
                        rtol=1e-13)
        assert table.values.shape[:2] == (8, 9)


class TestLocate(object):

    def test_inside(self):
        mesh = build_structured_grid(4, 4)
        element, point = locate(mesh, (0.3125, 0.8125))
        assert element == 13
        assert_allclose(point, (0.25, 0.25))

    def test_batch_and_boundary(self):
        mesh = build_structured_grid(4, 4)
        element, point = locate(mesh, [(1.0, 1.0), (0.0, 0.0)])
        assert element.tolist() == [15, 0]
        assert_allclose(point, [(1.0, 1.0), (0.0, 0.0)])

    def test_opening(self):
        mesh = build_structured_grid(6, 6, [(2, 2, 4, 4)])
        with pytest.raises(MeshError):
            locate(mesh, (0.5, 0.5))
        with pytest.raises(MeshError):
            locate(mesh, (1.2, 0.5))

    def test_evaluate_flat(self):
        mesh = build_structured_grid(4, 3, [(1, 1, 3, 2)])
        coords = flat(mesh, (20.0, 10.0))
        eta = np.array(list(itertools.product((0.0, 0.1, 0.9, 1.0),
                                              (0.0, 0.05, 1.0))))
        x = evaluate_surface(mesh, coords, eta)
        assert_allclose(x[:, 0], 20.0 * eta[:, 0], atol=1e-12)
        assert_allclose(x[:, 1], 10.0 * eta[:, 1], atol=1e-12)
        assert_allclose(x[:, 2], 0.0, atol=1e-12)


class TestExport(object):

    def test_obj(self, tmpdir):
        mesh = build_structured_grid(3, 2)
        coords = flat(mesh)
        coords[:, 2] = np.random.default_rng(1).random(mesh.nvertices) / 3
        path = str(tmpdir.join('shape.obj'))
        write_obj(path, mesh, coords, 'test')
        vertices, faces = read_obj(path)
        assert (vertices == coords).all()
        assert (faces == mesh.elements).all()

    def test_vtk(self, tmpdir):
        mesh = build_structured_grid(2, 2)
        coords = flat(mesh)
        path = str(tmpdir.join('shape.vtk'))
        write_vtk(path, mesh, coords, np.ones_like(coords))
        with open(path) as f:
            text = f.read()
        assert 'POINTS 9 double' in text
        assert 'POLYGONS 4 20' in text
        assert 'VECTORS displacement double' in text

    def test_shape_mismatch(self, tmpdir):
        mesh = build_structured_grid(2, 2)
        with pytest.raises(MeshError):
            write_obj(str(tmpdir.join('x.obj')), mesh, np.zeros((3, 3)))
