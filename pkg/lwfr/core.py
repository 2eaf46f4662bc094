# Single-stage Lax-Wendroff flux reconstruction: time-averaged fluxes from
# the approximate Lax-Wendroff procedure, Rusanov/central interface fluxes
# and the corrected update.
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from dataclasses import replace
from functools import lru_cache
from math import factorial
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Tuple

import numpy as np

from .basis import Basis1D
from .boundary import BoundaryKind
from .boundary import BoundaryTag
from .boundary import boundary_flux_traces
from .boundary import boundary_solution_trace
from .errors import ConfigurationError
from .gradient import compute_auxiliary_gradient
from .gradient import correct_reference_gradient
from .gradient import interface_solution_average
from .gradient import physical_gradient
from .mesh import SIDES
from .mesh import CurvilinearMesh
from .mesh import ElementGeometry
from .mesh import d_eta
from .mesh import d_xi
from .mesh import face_traces
from .mesh import gather_outer
from .mesh import reference_divergence
from .mesh import reference_gradient

logger = logging.getLogger(__name__)

# contravariant orientation relative to the outward normal, per side
SIDE_SIGNS = np.array([-1.0, 1.0, -1.0, 1.0])

DISSIPATION = ("d2", "d1")


@lru_cache(maxsize=None)
def stencil_weights(half_width):
    # type: (int) -> np.ndarray
    """Central finite-difference weights W[k, m] on offsets -M..M such that
    sum_m W[k, m] g(m h) approximates h^k g^(k)(0).
    """
    offsets = np.arange(-half_width, half_width + 1, dtype=float)
    V = np.array([offsets ** j / factorial(j) for j in range(len(offsets))])
    W = np.linalg.solve(V, np.eye(len(offsets))).T
    W.setflags(write=False)
    return W


def transform_to_contravariant(flux_physical, ja1, ja2):
    # type: (np.ndarray, np.ndarray, np.ndarray) -> np.ndarray
    f1 = np.einsum("...vd,...d->...v", flux_physical, ja1)
    f2 = np.einsum("...vd,...d->...v", flux_physical, ja2)
    return np.stack([f1, f2], axis=-1)


def outward_normal_traces(flux):
    # type: (np.ndarray) -> np.ndarray
    """Contravariant flux traces projected on the outward reference normal,
    shape (ne, 4, n, nvar).
    """
    return np.stack([-flux[:, 0, :, :, 0], flux[:, -1, :, :, 0], -flux[:, :, 0, :, 1], flux[:, :, -1, :, 1]], axis=1)


@dataclass(frozen=True)
class Averages:
    adv: np.ndarray
    visc: np.ndarray
    solution: np.ndarray
    source: Optional[np.ndarray]
    heat: Optional[np.ndarray]


@dataclass
class TimeAveragedData:
    """Temporal ladders scaled by powers of the step: entry k holds
    dt^k d_t^k of the contravariant advective / viscous flux, of u and of
    the source, for k = 0..N.
    """

    dt: float
    flux_adv: List[np.ndarray]
    flux_visc: List[np.ndarray]
    solution: List[np.ndarray]
    source: Optional[List[np.ndarray]] = None
    heat: Optional[List[np.ndarray]] = None

    @property
    def degree(self):
        # type: () -> int
        return len(self.solution) - 1

    def time_derivative(self, k):
        # type: (int) -> np.ndarray
        if k == 0:
            return self.solution[0]
        return self.solution[k] / self.dt ** k

    def averages(self, truncate=False):
        # type: (bool) -> Averages
        """F = sum_k dt^k/(k+1)! d_t^k f; the embedded solution stops at N-1."""
        terms = self.degree + (0 if truncate else 1)
        coefficients = [1.0 / factorial(k + 1) for k in range(terms)]

        def combine(ladder):
            if ladder is None:
                return None
            total = coefficients[0] * ladder[0]
            for c, entry in zip(coefficients[1:], ladder[1:terms]):
                total = total + c * entry
            return total

        return Averages(adv=combine(self.flux_adv), visc=combine(self.flux_visc), solution=combine(self.solution),
                        source=combine(self.source), heat=combine(self.heat))

    @staticmethod
    def concatenate(parts):
        # type: (List[TimeAveragedData]) -> TimeAveragedData
        def join(name):
            ladders = [getattr(p, name) for p in parts]
            if ladders[0] is None:
                return None
            return [np.concatenate(level, axis=0) for level in zip(*ladders)]

        return TimeAveragedData(dt=parts[0].dt, flux_adv=join("flux_adv"), flux_visc=join("flux_visc"),
                                solution=join("solution"), source=join("source"), heat=join("heat"))


def approximate_lw_expansion(fields,  # type: np.ndarray
                             q,  # type: np.ndarray
                             geometry,  # type: ElementGeometry
                             basis,  # type: Basis1D
                             eqset,
                             dt,  # type: float
                             source=None,  # type: Optional[Callable]
                             t=0.0,  # type: float
                             with_heat=False):  # type: bool
    # type: (...) -> TimeAveragedData
    """Time-averaged contravariant fluxes and solution over one step.

    Temporal derivatives come from central differences in time of fluxes
    evaluated at Taylor states u(t + m dt) ~ sum_j (m dt)^j/j! d_t^j u.
    d_t^(k+1) u = -(1/J) div_xi(d_t^k f) + d_t^k S is element local, and
    gradient derivatives follow (1/J) M grad_xi d_t^k u. The derivative
    ladder is refined N-1 times before the final flux differences so the
    time average is accurate to O(dt^(N+1)).
    """
    N = basis.degree
    half_width = (N + 1) // 2
    W = stencil_weights(half_width)
    offsets = range(-half_width, half_width + 1)
    D = basis.D
    inv_J = 1.0 / geometry.J[..., None]

    def contravariant(flux):
        return transform_to_contravariant(flux, geometry.ja1, geometry.ja2)

    def rate(adv, visc):
        total = adv - visc
        return -inv_J * reference_divergence(D, total[..., 0], total[..., 1])

    def local_gradient(values):
        v_xi, v_eta = reference_gradient(D, values)
        return physical_gradient(v_xi, v_eta, geometry)

    def difference(samples, k):
        total = W[k, 0] * samples[0]
        for w, sample in zip(W[k, 1:], samples[1:]):
            total = total + w * sample
        return total

    sources = None  # type: Optional[List[np.ndarray]]
    if source is not None:
        sources = [source(geometry.x, geometry.y, t + m * dt) for m in offsets]

    adv0 = contravariant(eqset.advective_flux(fields))
    visc0 = contravariant(eqset.viscous_flux(fields, q))
    heat0 = None
    if with_heat:
        heat = eqset.heat_flux(fields, q)
        heat0 = contravariant(heat) if heat is not None else None

    u_ladder = [fields] + [np.zeros_like(fields) for _ in range(N)]
    g_ladder = [q] + [np.zeros_like(q) for _ in range(N)]
    u_ladder[1] = dt * rate(adv0, visc0)
    if sources is not None:
        u_ladder[1] = u_ladder[1] + dt * sources[half_width]
    g_ladder[1] = local_gradient(u_ladder[1])

    def stencil_fluxes(top):
        adv_samples, visc_samples, heat_samples = [], [], []
        for m in offsets:
            if m == 0:
                adv_samples.append(adv0)
                visc_samples.append(visc0)
                heat_samples.append(heat0)
                continue
            state = u_ladder[0]
            grad = g_ladder[0]
            for j in range(1, N + 1):
                c = float(m) ** j / factorial(j)
                state = state + c * u_ladder[j]
                grad = grad + c * g_ladder[j]
            eqset.check_state(state)
            adv_samples.append(contravariant(eqset.advective_flux(state)))
            visc_samples.append(contravariant(eqset.viscous_flux(state, grad)))
            if heat0 is not None:
                heat_samples.append(contravariant(eqset.heat_flux(state, grad)))
        adv = [difference(adv_samples, k) for k in range(top + 1)]
        visc = [difference(visc_samples, k) for k in range(top + 1)]
        heat = [difference(heat_samples, k) for k in range(top + 1)] if heat0 is not None else None
        return adv, visc, heat

    for _ in range(N - 1):
        adv, visc, _ = stencil_fluxes(N - 1)
        updates = []
        for k in range(1, N):
            du = dt * rate(adv[k], visc[k])
            if sources is not None:
                du = du + dt * difference(sources, k)
            updates.append(du)
        for k, du in enumerate(updates, start=2):
            u_ladder[k] = du
            g_ladder[k] = local_gradient(du)

    adv, visc, heat = stencil_fluxes(N)
    source_ladder = [difference(sources, k) for k in range(N + 1)] if sources is not None else None
    return TimeAveragedData(dt=dt, flux_adv=adv, flux_visc=visc, solution=u_ladder, source=source_ladder, heat=heat)


def rusanov_timeavg_flux(Fn_L, Fn_R, U_L, U_R, lam):
    # type: (np.ndarray, np.ndarray, np.ndarray, np.ndarray, np.ndarray) -> np.ndarray
    """Rusanov flux with dissipation on the time-averaged solution (D2)."""
    lam = np.asarray(lam, dtype=float)[..., None]
    return 0.5 * (np.asarray(Fn_L) + np.asarray(Fn_R)) - 0.5 * lam * (np.asarray(U_R) - np.asarray(U_L))


def central_viscous_flux(Fv_L, Fv_R):
    # type: (np.ndarray, np.ndarray) -> np.ndarray
    return 0.5 * (np.asarray(Fv_L) + np.asarray(Fv_R))


def lwfr_update(fields, tav, interface_flux, geometry, basis, dt, truncate=False):
    # type: (np.ndarray, TimeAveragedData, np.ndarray, ElementGeometry, Basis1D, float, bool) -> np.ndarray
    """u - (dt/J) [div_xi F + sum of (F* - F) g' corrections] (+ dt S).

    ``interface_flux`` is the numerical flux along the outward normal,
    scaled by the face scaling, shape (ne, 4, n, nvar).
    """
    avg = tav.averages(truncate)
    total = avg.adv - avg.visc
    jumps = (interface_flux - outward_normal_traces(total)) * SIDE_SIGNS[None, :, None, None]
    f_xi, f_eta = correct_reference_gradient(d_xi(basis.D, total[..., 0]), d_eta(basis.D, total[..., 1]), jumps,
                                             basis)
    updated = fields - (dt / geometry.J[..., None]) * (f_xi + f_eta)
    if avg.source is not None:
        updated = updated + dt * avg.source
    return updated


@dataclass(frozen=True)
class StepResult:
    high: np.ndarray
    low: np.ndarray
    data: Optional[TimeAveragedData] = None


def _geometry_block(geometry, block):
    # type: (ElementGeometry, slice) -> ElementGeometry
    return replace(geometry, J=geometry.J[block], ja1=geometry.ja1[block], ja2=geometry.ja2[block],
                   normals=geometry.normals[block], scaling=geometry.scaling[block], x=geometry.x[block],
                   y=geometry.y[block])


class Scheme:
    """LWFR semi-discretization bound to a mesh, an equation set and the
    boundary tags of the exterior sides.
    """

    def __init__(self,
                 mesh,  # type: CurvilinearMesh
                 geometry,  # type: ElementGeometry
                 basis,  # type: Basis1D
                 eqset,
                 boundaries=None,  # type: Optional[Dict[str, BoundaryTag]]
                 source=None,  # type: Optional[Callable]
                 dissipation="d2",  # type: str
                 threads=1):  # type: int
        if dissipation not in DISSIPATION:
            raise ConfigurationError("Unknown dissipation", dissipation)
        if threads < 1:
            raise ConfigurationError("Thread count must be positive", str(threads))

        self.mesh = mesh
        self.geometry = geometry
        self.basis = basis
        self.eqset = eqset
        self.source = source
        self.dissipation = dissipation
        self.threads = threads
        self.boundaries = dict(boundaries or {})

        self._faces = []  # type: List[Tuple[int, np.ndarray, BoundaryTag]]
        for name, elements in mesh.boundary_faces().items():
            tag = self.boundaries.get(name)
            if tag is None:
                raise ConfigurationError("Missing boundary tag", f"side {name}")
            if tag.kind == BoundaryKind.periodic:
                raise ConfigurationError("Periodic side is not connected by the mesh", f"side {name}")
            self._faces.append((SIDES.index(name), elements, tag))

        self._with_heat = any(tag.kind == BoundaryKind.noslip_adiabatic for _, _, tag in self._faces)
        self._face_x = face_traces(geometry.x)
        self._face_y = face_traces(geometry.y)
        self._face_scaling = 0.5 * (geometry.scaling + gather_outer(mesh, geometry.scaling))

    def solution_interface_values(self, fields, t):
        # type: (np.ndarray, float) -> Tuple[np.ndarray, np.ndarray]
        """Own and outer level-n solution traces on every face."""
        traces = face_traces(fields)
        outer = gather_outer(self.mesh, traces)
        for side, elements, tag in self._faces:
            outer[elements, side] = boundary_solution_trace(tag, traces[elements, side], self._face_x[elements, side],
                                                            self._face_y[elements, side], t, self.eqset)
        return traces, outer

    def expansion(self, fields, q, t, dt):
        # type: (np.ndarray, np.ndarray, float, float) -> TimeAveragedData
        def run(block):
            return approximate_lw_expansion(fields[block], q[block], _geometry_block(self.geometry, block), self.basis,
                                            self.eqset, dt, source=self.source, t=t, with_heat=self._with_heat)

        ne = self.mesh.n_elements
        if self.threads == 1 or ne < 2:
            return run(slice(0, ne))

        bounds = np.linspace(0, ne, min(self.threads, ne) + 1).astype(int)
        blocks = [slice(lo, hi) for lo, hi in zip(bounds[:-1], bounds[1:]) if hi > lo]
        with ThreadPoolExecutor(max_workers=len(blocks)) as pool:
            parts = list(pool.map(run, blocks))
        return TimeAveragedData.concatenate(parts)

    def interface_fluxes(self, tav, traces, outer, t, truncate=False):
        # type: (TimeAveragedData, np.ndarray, np.ndarray, float, bool) -> np.ndarray
        """Numerical total flux (advective minus viscous) on every face."""
        avg = tav.averages(truncate)
        adv = outward_normal_traces(avg.adv)
        visc = outward_normal_traces(avg.visc)
        U = face_traces(avg.solution)
        heat = outward_normal_traces(avg.heat) if avg.heat is not None else None

        outer_adv = -gather_outer(self.mesh, adv)
        outer_visc = -gather_outer(self.mesh, visc)
        outer_U = gather_outer(self.mesh, U)

        g = self.geometry
        for side, elements, tag in self._faces:
            fa, fv, fU = boundary_flux_traces(tag, adv[elements, side], visc[elements, side], U[elements, side],
                                              self._face_x[elements, side], self._face_y[elements, side], t, tav.dt,
                                              g.normals[elements, side], g.scaling[elements, side], self.eqset,
                                              inner_heat=None if heat is None else heat[elements, side])
            outer_adv[elements, side] = fa
            outer_visc[elements, side] = fv
            outer_U[elements, side] = fU

        lam = self.eqset.wave_speed(traces, outer, g.normals) * self._face_scaling
        if self.dissipation == "d2":
            advective = rusanov_timeavg_flux(adv, outer_adv, U, outer_U, lam)
        else:
            advective = rusanov_timeavg_flux(adv, outer_adv, traces, outer, lam)
        return advective - central_viscous_flux(visc, outer_visc)

    def take_step(self, fields, t, dt):
        # type: (np.ndarray, float, float) -> StepResult
        """Full-order update and its embedded lower-order companion.

        Inputs are never modified; a StateError leaves the caller's state
        intact.
        """
        self.eqset.check_state(fields)
        if dt == 0.0:
            return StepResult(high=fields.copy(), low=fields.copy())

        traces, outer = self.solution_interface_values(fields, t)
        q = compute_auxiliary_gradient(fields, self.geometry, self.basis, interface_solution_average(traces, outer))
        tav = self.expansion(fields, q, t, dt)

        high = lwfr_update(fields, tav, self.interface_fluxes(tav, traces, outer, t), self.geometry, self.basis, dt)
        low = lwfr_update(fields, tav, self.interface_fluxes(tav, traces, outer, t, truncate=True), self.geometry,
                          self.basis, dt, truncate=True)
        self.eqset.check_state(high)
        return StepResult(high=high, low=low, data=tav)


def take_step(scheme, fields, t, dt):
    # type: (Scheme, np.ndarray, float, float) -> StepResult
    return scheme.take_step(fields, t, dt)
