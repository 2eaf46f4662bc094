import os
from dataclasses import replace

import numpy as np
import pytest

from lwfr.basis import gll_basis
from lwfr.errors import ConfigurationError
from lwfr.errors import GeometryError
from lwfr.mesh import BOTTOM
from lwfr.mesh import LEFT
from lwfr.mesh import RIGHT
from lwfr.mesh import TOP
from lwfr.mesh import compute_metrics
from lwfr.mesh import element_areas
from lwfr.mesh import face_traces
from lwfr.mesh import gather_outer
from lwfr.mesh import make_cartesian_mesh
from lwfr.mesh import make_mapped_mesh
from lwfr.mesh import make_warped_mesh
from lwfr.mesh import metric_identity_residual
from lwfr.mesh import write_field


def test_cartesian_metrics():
    basis = gll_basis(2)
    mesh = make_cartesian_mesh(2, 3, (0.0, 2.0, 0.0, 3.0), basis)
    geometry = compute_metrics(mesh, basis)

    np.testing.assert_allclose(geometry.J, 0.25, rtol=1e-13)
    np.testing.assert_allclose(geometry.normals[:, LEFT], np.broadcast_to([-1.0, 0.0], (6, 3, 2)), atol=1e-14)
    np.testing.assert_allclose(geometry.normals[:, TOP], np.broadcast_to([0.0, 1.0], (6, 3, 2)), atol=1e-14)
    np.testing.assert_allclose(geometry.scaling[:, LEFT], 0.5, rtol=1e-13)
    np.testing.assert_allclose(geometry.scaling[:, BOTTOM], 0.5, rtol=1e-13)
    assert abs(np.sum(element_areas(geometry, basis)) - 6.0) < 1e-12
    assert metric_identity_residual(geometry, basis) < 1e-13


def test_periodic_connectivity():
    basis = gll_basis(1)
    mesh = make_cartesian_mesh(3, 2, (-1.0, 1.0, -1.0, 1.0), basis)
    assert mesh.n_elements == 6
    assert mesh.neighbors[0, LEFT] == 2
    assert mesh.neighbors[0, RIGHT] == 1
    assert mesh.neighbors[0, BOTTOM] == 3
    assert mesh.neighbors[0, TOP] == 3
    assert mesh.boundary_faces() == {}


def test_boundary_faces_of_bounded_mesh():
    basis = gll_basis(1)
    mesh = make_cartesian_mesh(3, 2, (-1.0, 1.0, -1.0, 1.0), basis, periodic=(True, False))
    faces = mesh.boundary_faces()
    assert sorted(faces) == ["bottom", "top"]
    np.testing.assert_array_equal(faces["bottom"], [0, 1, 2])
    np.testing.assert_array_equal(faces["top"], [3, 4, 5])
    face = mesh.face(4, TOP)
    assert face.index == TOP
    assert face.reference_normal == (0.0, 1.0)


@pytest.mark.parametrize("N", [1, 2, 3, 4])
def test_warped_metric_identities(N):
    basis = gll_basis(N)
    mesh = make_warped_mesh(4, 4, 0.1, basis)
    geometry = compute_metrics(mesh, basis)
    assert metric_identity_residual(geometry, basis) < 1e-12
    assert np.min(geometry.J) > 0.0
    # straight outer edges: the warped square keeps its area
    assert abs(np.sum(element_areas(geometry, basis)) - 4.0) < 1e-10


def test_shared_face_points_are_identical():
    basis = gll_basis(3)
    mesh = make_warped_mesh(3, 3, 0.1, basis, periodic=(False, False))
    x, y = face_traces(mesh.x), face_traces(mesh.y)
    interior = mesh.neighbors >= 0
    np.testing.assert_array_equal(gather_outer(mesh, x)[interior], x[interior])
    np.testing.assert_array_equal(gather_outer(mesh, y)[interior], y[interior])


def test_folded_map_rejected():
    # continuous Jacobian is 1 + a pi sin(pi (x + y)), negative for a > 1/pi
    basis = gll_basis(2)
    with pytest.raises(GeometryError) as info:
        make_warped_mesh(4, 4, 0.5, basis)
    assert info.value.element is not None


def test_rotated_element_metrics():
    basis = gll_basis(2)
    mesh = make_mapped_mesh(1, 1, basis, mapping=lambda X, Y: (-Y, X))
    geometry = compute_metrics(mesh, basis)
    np.testing.assert_allclose(geometry.J, 1.0, atol=1e-14)
    np.testing.assert_allclose(geometry.ja1, np.broadcast_to([0.0, 1.0], geometry.ja1.shape), atol=1e-14)
    np.testing.assert_allclose(geometry.ja2, np.broadcast_to([-1.0, 0.0], geometry.ja2.shape), atol=1e-14)


@pytest.mark.parametrize("nx", [0, -2, 1.5])
def test_bad_element_counts(nx):
    with pytest.raises(ConfigurationError):
        make_cartesian_mesh(nx, 2, (-1.0, 1.0, -1.0, 1.0), gll_basis(1))


def test_empty_domain():
    with pytest.raises(ConfigurationError):
        make_cartesian_mesh(2, 2, (1.0, 1.0, -1.0, 1.0), gll_basis(1))


def test_write_field(tmp_path):
    basis = gll_basis(1)
    mesh = make_cartesian_mesh(2, 1, (0.0, 2.0, 0.0, 1.0), basis)
    geometry = compute_metrics(mesh, basis)
    field = np.stack([geometry.x, 2.0 * geometry.y], axis=-1)
    path = os.path.join(str(tmp_path), "field_0.txt")
    write_field(path, geometry, field, ("a", "b"))

    with open(path) as fd:
        assert fd.readline().strip() == "# e i j x y a b"
    table = np.loadtxt(path)
    assert table.shape == (8, 7)
    np.testing.assert_array_equal(table[:, 0], [0, 0, 0, 0, 1, 1, 1, 1])
    np.testing.assert_allclose(table[:, 5], table[:, 3])
    np.testing.assert_allclose(table[:, 6], 2.0 * table[:, 4])


@pytest.mark.parametrize("N", [2, 4])
def test_interior_normals_are_antiparallel(N):
    basis = gll_basis(N)
    mesh = make_warped_mesh(4, 4, 0.1, basis)
    geometry = compute_metrics(mesh, basis)
    outer_normals = gather_outer(mesh, geometry.normals)
    np.testing.assert_allclose(geometry.normals + outer_normals, 0.0, atol=1e-12)
    np.testing.assert_allclose(gather_outer(mesh, geometry.scaling), geometry.scaling, atol=1e-12, rtol=0.0)


def test_corrupted_metric_is_detected():
    basis = gll_basis(3)
    mesh = make_warped_mesh(3, 3, 0.1, basis)
    geometry = compute_metrics(mesh, basis)
    delta = 1e-6
    ja1 = geometry.ja1.copy()
    ja1[4, 1, 2, 0] += delta
    corrupted = replace(geometry, ja1=ja1)
    # the xi derivative spreads the bump along row j = 2 through column 1 of D
    assert metric_identity_residual(corrupted, basis) >= 0.5 * delta * np.max(np.abs(basis.D[:, 1]))
    assert metric_identity_residual(geometry, basis) < 1e-12
