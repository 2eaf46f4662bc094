import math
import unittest

import numpy as np
import pytest
from numpy.polynomial import legendre as leg
from scipy.integrate import solve_ivp

from lwfr.basis import gll_basis
from lwfr.boundary import make_tag
from lwfr.core import Scheme
from lwfr.core import TimeAveragedData
from lwfr.core import approximate_lw_expansion
from lwfr.core import central_viscous_flux
from lwfr.core import lwfr_update
from lwfr.core import outward_normal_traces
from lwfr.core import rusanov_timeavg_flux
from lwfr.core import stencil_weights
from lwfr.core import take_step
from lwfr.core import transform_to_contravariant
from lwfr.equations import EquationSet
from lwfr.equations import primitive_to_conservative
from lwfr.errors import ConfigurationError
from lwfr.errors import StateError
from lwfr.gradient import physical_gradient
from lwfr.mesh import compute_metrics
from lwfr.mesh import element_areas
from lwfr.mesh import face_traces
from lwfr.mesh import gather_outer
from lwfr.mesh import make_cartesian_mesh
from lwfr.mesh import make_warped_mesh
from lwfr.mesh import reference_divergence
from lwfr.mesh import reference_gradient
from lwfr.problems import make_problem


def _scheme(eqset, mesh, basis, **kwargs):
    return Scheme(mesh, compute_metrics(mesh, basis), basis, eqset, **kwargs)


def _mass(scheme, u):
    w2 = np.outer(scheme.basis.weights, scheme.basis.weights)
    return np.einsum("ij,eij,eijv->v", w2, scheme.geometry.J, u)


def test_stencil_weights():
    W = stencil_weights(1)
    np.testing.assert_allclose(W, [[0.0, 1.0, 0.0], [-0.5, 0.0, 0.5], [1.0, -2.0, 1.0]], atol=1e-14)
    offsets = np.arange(-2, 3, dtype=float)
    for k in range(5):
        # exact on monomials: sum_m W[k, m] m^k / k! = 1
        np.testing.assert_allclose(stencil_weights(2)[k] @ (offsets ** k), math.factorial(k), rtol=1e-12)


def test_transform_to_contravariant():
    flux = np.zeros((1, 1, 1, 2, 2))
    flux[..., 0, :] = [1.0, 0.0]
    flux[..., 1, :] = [2.0, 3.0]
    ja1 = np.array([0.0, 1.0]).reshape(1, 1, 1, 2)
    ja2 = np.array([-1.0, 0.0]).reshape(1, 1, 1, 2)
    result = transform_to_contravariant(flux, ja1, ja2)
    np.testing.assert_allclose(result[0, 0, 0, 0], [0.0, -1.0])
    np.testing.assert_allclose(result[0, 0, 0, 1], [3.0, -2.0])
    np.testing.assert_array_equal(transform_to_contravariant(np.zeros_like(flux), ja1, ja2), 0.0)


def test_rusanov_flux():
    a = 2.0
    UL, UR = np.array([[1.0]]), np.array([[3.0]])
    np.testing.assert_allclose(rusanov_timeavg_flux(a * UL, a * UR, UL, UR, np.array([a])), a * UL)
    np.testing.assert_allclose(rusanov_timeavg_flux(a * UL, a * UL, UL, UL, np.array([a])), a * UL)
    np.testing.assert_allclose(rusanov_timeavg_flux(a * UL, a * UR, UL, UR, np.array([0.0])), 0.5 * a * (UL + UR))


def test_central_viscous_flux():
    assert central_viscous_flux(0.0, 2.0) == 1.0
    np.testing.assert_array_equal(central_viscous_flux(np.array([1.5, -2.0]), np.array([-1.5, 2.0])), 0.0)


def test_time_average_coefficients():
    ones = [np.ones((1, 1))] * 4
    tav = TimeAveragedData(dt=0.5, flux_adv=ones, flux_visc=ones, solution=ones)
    assert tav.degree == 3
    np.testing.assert_allclose(tav.averages().adv, 1.0 + 1.0 / 2 + 1.0 / 6 + 1.0 / 24)
    np.testing.assert_allclose(tav.averages(truncate=True).solution, 1.0 + 1.0 / 2 + 1.0 / 6)
    assert tav.averages().source is None
    np.testing.assert_allclose(tav.time_derivative(2), 4.0)


class LinearExpansionTestCase(unittest.TestCase):

    def setUp(self):
        self.basis = gll_basis(2)
        mesh = make_warped_mesh(2, 2, 0.05, self.basis)
        self.geometry = compute_metrics(mesh, self.basis)
        self.eqset = EquationSet(system="advection_diffusion", velocity=(1.5, 1.0), nu=0.05)
        self.u = (1.0 + 0.5 * np.sin(np.pi * (mesh.x + mesh.y)))[..., None]

    def _local_rate(self, v):
        # element-local -(1/J) div of the contravariant flux of v
        D = self.basis.D
        v_xi, v_eta = reference_gradient(D, v)
        grad = physical_gradient(v_xi, v_eta, self.geometry)
        total = self.eqset.advective_flux(v) - self.eqset.viscous_flux(v, grad)
        F = transform_to_contravariant(total, self.geometry.ja1, self.geometry.ja2)
        return -reference_divergence(D, F[..., 0], F[..., 1]) / self.geometry.J[..., None]

    def test_ladder_is_exact_for_linear_fluxes(self):
        dt = 1e-2
        q = physical_gradient(*reference_gradient(self.basis.D, self.u), self.geometry)
        tav = approximate_lw_expansion(self.u, q, self.geometry, self.basis, self.eqset, dt)
        u1 = dt * self._local_rate(self.u)
        u2 = dt * self._local_rate(u1)
        np.testing.assert_allclose(tav.solution[1], u1, atol=1e-12)
        np.testing.assert_allclose(tav.solution[2], u2, atol=1e-12)

    def test_zero_step_is_identity(self):
        q = np.zeros(self.u.shape + (2,))
        tav = approximate_lw_expansion(self.u, q, self.geometry, self.basis, self.eqset, 0.0)
        avg = tav.averages()
        np.testing.assert_array_equal(avg.solution, self.u)
        np.testing.assert_array_equal(tav.solution[1], 0.0)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_time_average_order_for_nonlinear_flux(N):
    # inviscid Euler flux on one element against an accurate integration of
    # the element-local problem du/dt = -(1/J) div f(u)
    basis = gll_basis(N)
    mesh = make_cartesian_mesh(1, 1, (0.0, 0.2, 0.0, 0.2), basis)
    geometry = compute_metrics(mesh, basis)
    eqset = EquationSet(system="navier_stokes", mu=0.0)
    x, y = mesh.x, mesh.y
    w = np.stack([1.0 + 0.2 * np.sin(10.0 * x + 5.0 * y), 0.5 + 0.1 * np.cos(5.0 * x), 0.3 * np.sin(5.0 * y),
                  1.0 + 2.5 * x * y], -1)
    u0 = primitive_to_conservative(w, 1.4)
    q = np.zeros(u0.shape + (2,))

    def contravariant(u):
        return transform_to_contravariant(eqset.advective_flux(u), geometry.ja1, geometry.ja2)

    def rhs(_, flat):
        F = contravariant(flat.reshape(u0.shape))
        return (-reference_divergence(basis.D, F[..., 0], F[..., 1]) / geometry.J[..., None]).ravel()

    nodes, weights = leg.leggauss(8)
    errors = []
    steps = [1e-2, 5e-3, 2.5e-3, 1.25e-3]
    for dt in steps:
        solution = solve_ivp(rhs, (0.0, dt), u0.ravel(), method="DOP853", rtol=1e-13, atol=1e-14,
                             dense_output=True)
        reference = sum(0.5 * wq * contravariant(solution.sol(0.5 * dt * (s + 1.0)).reshape(u0.shape))
                        for s, wq in zip(nodes, weights))
        tav = approximate_lw_expansion(u0, q, geometry, basis, eqset, dt)
        errors.append(np.max(np.abs(tav.averages().adv - reference)))

    order = np.polyfit(np.log(steps), np.log(errors), 1)[0]
    assert order >= N + 0.9


def test_single_element_degree_one_update():
    # periodic constant advection a = (a, 0); u varies in xi only
    a, dt = 0.8, 0.1
    basis = gll_basis(1)
    mesh = make_cartesian_mesh(1, 1, (-1.0, 1.0, -1.0, 1.0), basis)
    eqset = EquationSet(system="advection_diffusion", velocity=(a, 0.0), nu=0.0)
    scheme = _scheme(eqset, mesh, basis)

    u0, u1 = 1.0, 2.0
    u = np.array([[[[u0], [u0]], [[u1], [u1]]]])
    result = scheme.take_step(u, 0.0, dt)

    expected = np.array([[[[u0 + 1.5 * a * dt * (u1 - u0)]] * 2, [[u1 - 1.5 * a * dt * (u1 - u0)]] * 2]])
    np.testing.assert_allclose(result.high, expected.reshape(u.shape), rtol=1e-14)


def test_update_with_consistent_interface_flux():
    # interface flux equal to the own traces removes every correction, so a
    # constant state with a constant flux does not move
    basis = gll_basis(3)
    mesh = make_warped_mesh(2, 2, 0.05, basis)
    geometry = compute_metrics(mesh, basis)
    eqset = EquationSet(system="advection_diffusion", velocity=(1.5, 1.0), nu=0.05)
    u = np.full(mesh.x.shape + (1,), 2.0)
    q = np.zeros(u.shape + (2,))
    tav = approximate_lw_expansion(u, q, geometry, basis, eqset, 1e-2)
    avg = tav.averages()
    flux = outward_normal_traces(avg.adv - avg.visc)
    np.testing.assert_allclose(lwfr_update(u, tav, flux, geometry, basis, 1e-2), u, atol=1e-12)
    # extra outflow on every face drains mass
    drained = lwfr_update(u, tav, flux + 1.0, geometry, basis, 1e-2, truncate=True)
    w2 = np.outer(basis.weights, basis.weights)
    assert np.einsum("ij,eij,eijv->", w2, geometry.J, drained) < np.einsum("ij,eij,eijv->", w2, geometry.J, u)

def test_d2_flux_is_upwind_for_constant_advection():
    rng = np.random.default_rng(3)
    basis = gll_basis(3)
    mesh = make_warped_mesh(3, 3, 0.1, basis)
    eqset = EquationSet(system="advection_diffusion", velocity=(1.5, -0.7), nu=0.0)
    scheme = _scheme(eqset, mesh, basis)
    g = scheme.geometry
    u = rng.uniform(0.5, 1.5, mesh.x.shape + (1,))
    q = np.zeros(u.shape + (2,))

    tav = scheme.expansion(u, q, 0.0, 1e-2)
    traces, outer = scheme.solution_interface_values(u, 0.0)
    flux = scheme.interface_fluxes(tav, traces, outer, 0.0)

    velocity = np.broadcast_to(np.array([1.5, -0.7]), u.shape + (2,))
    vn = outward_normal_traces(transform_to_contravariant(velocity, g.ja1, g.ja2))
    U = face_traces(tav.averages().solution)
    expected = np.where(vn > 0.0, vn * U, vn * gather_outer(mesh, U))
    np.testing.assert_allclose(flux, expected, atol=1e-14, rtol=0.0)


@pytest.mark.parametrize("N", [1, 2, 3])
def test_one_step_richardson_order(N):
    # inviscid advection of a smooth wave; one step of dt against two of dt / 2
    basis = gll_basis(N)
    mesh = make_cartesian_mesh(8, 8, (-1.0, 1.0, -1.0, 1.0), basis)
    eqset = EquationSet(system="advection_diffusion", velocity=(1.5, 1.0), nu=0.0)
    scheme = _scheme(eqset, mesh, basis)
    u = make_problem("wave", eqset).initial(mesh.x, mesh.y)

    steps = [1e-3, 5e-4, 2.5e-4]
    differences = []
    for dt in steps:
        half = scheme.take_step(scheme.take_step(u, 0.0, 0.5 * dt).high, 0.5 * dt, 0.5 * dt).high
        differences.append(np.max(np.abs(scheme.take_step(u, 0.0, dt).high - half)))

    order = np.log(differences[-2] / differences[-1]) / np.log(2.0)
    assert order > min(N + 2, 3) - 0.2


class DissipationTestCase(unittest.TestCase):

    def setUp(self):
        self.basis = gll_basis(2)
        self.mesh = make_warped_mesh(4, 4, 0.05, self.basis)
        self.eqset = EquationSet(system="advection_diffusion", velocity=(1.5, 1.0), nu=0.05)
        self.u = make_problem("wave", self.eqset).initial(self.mesh.x, self.mesh.y)

    def test_d1_conserves(self):
        scheme = _scheme(self.eqset, self.mesh, self.basis, dissipation="d1")
        result = scheme.take_step(self.u, 0.0, 5e-3)
        np.testing.assert_allclose(_mass(scheme, result.high), _mass(scheme, self.u), rtol=1e-12)

    def test_d1_preserves_navier_stokes_free_stream(self):
        ns = EquationSet(system="navier_stokes", mu=1e-2)
        scheme = _scheme(ns, self.mesh, self.basis, dissipation="d1")
        u = make_problem("free_stream", ns).initial(self.mesh.x, self.mesh.y)
        np.testing.assert_allclose(scheme.take_step(u, 0.0, 1e-2).high, u, atol=1e-12, rtol=0.0)

    def test_d1_and_d2_differ_at_second_order(self):
        # the two dissipation terms differ by dt / 2 times the jump of u_t
        d1 = _scheme(self.eqset, self.mesh, self.basis, dissipation="d1")
        d2 = _scheme(self.eqset, self.mesh, self.basis, dissipation="d2")
        gaps = [np.max(np.abs(d1.take_step(self.u, 0.0, dt).high - d2.take_step(self.u, 0.0, dt).high))
                for dt in (2e-3, 1e-3)]
        assert gaps[0] > 0.0
        assert np.log2(gaps[0] / gaps[1]) > 1.8



class SchemeTestCase(unittest.TestCase):

    def setUp(self):
        self.basis = gll_basis(3)
        self.mesh = make_warped_mesh(3, 3, 0.1, self.basis)
        self.ns = EquationSet(system="navier_stokes", mu=1e-2)

    def test_free_stream_preserved_on_warped_mesh(self):
        scheme = _scheme(self.ns, self.mesh, self.basis)
        problem = make_problem("free_stream", self.ns)
        u = problem.initial(self.mesh.x, self.mesh.y)
        v = u
        for _ in range(5):
            v = take_step(scheme, v, 0.0, 0.01).high
        np.testing.assert_allclose(v, u, atol=1e-12, rtol=0.0)

    def test_constant_state_with_dirichlet_sides(self):
        eqset = EquationSet(system="advection_diffusion", velocity=(1.5, 1.0), nu=0.05)
        mesh = make_warped_mesh(3, 3, 0.1, self.basis, periodic=(False, True))
        problem = make_problem("free_stream", eqset, constant=2.0)
        tag = make_tag("dirichlet_exact", profile=problem.exact)
        scheme = _scheme(eqset, mesh, self.basis, boundaries={"left": tag, "right": tag})
        u = problem.initial(mesh.x, mesh.y)
        np.testing.assert_allclose(scheme.take_step(u, 0.0, 0.01).high, u, atol=1e-12, rtol=0.0)

    def test_conservation_on_periodic_warped_mesh(self):
        eqset = EquationSet(system="advection_diffusion", velocity=(1.5, 1.0), nu=0.05)
        scheme = _scheme(eqset, self.mesh, self.basis)
        u = make_problem("wave", eqset).initial(self.mesh.x, self.mesh.y)
        before = _mass(scheme, u)
        result = scheme.take_step(u, 0.0, 5e-3)
        np.testing.assert_allclose(_mass(scheme, result.high), before, rtol=1e-12)
        np.testing.assert_allclose(_mass(scheme, result.low), before, rtol=1e-12)
        assert np.sum(element_areas(scheme.geometry, self.basis)) > 0.0

    def test_navier_stokes_conservation(self):
        problem = make_problem("manufactured", self.ns)
        scheme = _scheme(self.ns, self.mesh, self.basis)
        u = problem.initial(self.mesh.x, self.mesh.y)
        before = _mass(scheme, u)
        after = _mass(scheme, scheme.take_step(u, 0.0, 2e-3).high)
        np.testing.assert_allclose(after, before, rtol=1e-12, atol=1e-12)

    def test_zero_step_returns_copies(self):
        scheme = _scheme(self.ns, self.mesh, self.basis)
        u = make_problem("free_stream", self.ns).initial(self.mesh.x, self.mesh.y)
        result = scheme.take_step(u, 0.0, 0.0)
        np.testing.assert_array_equal(result.high, u)
        self.assertIsNot(result.high, u)

    def test_nan_input_leaves_state_intact(self):
        scheme = _scheme(self.ns, self.mesh, self.basis)
        u = make_problem("free_stream", self.ns).initial(self.mesh.x, self.mesh.y)
        u[2, 1, 1, 0] = np.nan
        saved = u.copy()
        with self.assertRaises(StateError):
            scheme.take_step(u, 0.0, 1e-3)
        np.testing.assert_array_equal(u, saved)

    def test_threads_do_not_change_results(self):
        eqset = EquationSet(system="advection_diffusion", velocity=(1.5, 1.0), nu=0.05)
        u = make_problem("wave", eqset).initial(self.mesh.x, self.mesh.y)
        serial = _scheme(eqset, self.mesh, self.basis).take_step(u, 0.0, 1e-2)
        threaded = _scheme(eqset, self.mesh, self.basis, threads=4).take_step(u, 0.0, 1e-2)
        np.testing.assert_allclose(threaded.high, serial.high, atol=1e-13, rtol=0.0)

    def test_missing_boundary_tag(self):
        mesh = make_warped_mesh(2, 2, 0.0, self.basis, periodic=(True, False))
        with self.assertRaises(ConfigurationError):
            _scheme(self.ns, mesh, self.basis, boundaries={"bottom": make_tag("noslip_adiabatic")})

    def test_unknown_dissipation(self):
        with self.assertRaises(ConfigurationError):
            _scheme(self.ns, self.mesh, self.basis, dissipation="d3")
