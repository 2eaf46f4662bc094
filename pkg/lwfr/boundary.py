# Outer-side trace data on exterior faces. Arrays here are face-point
# stacks with the variable axis last: states (nf, n, nvar), normals (nf, n, 2).
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Callable
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np
from numpy.polynomial import legendre as leg

from .equations import System
from .equations import conservative_to_primitive
from .equations import primitive_to_conservative
from .errors import ConfigurationError

logger = logging.getLogger(__name__)

TIME_QUADRATURE_POINTS = 5


class BoundaryKind(Enum):
    periodic = 1
    dirichlet_exact = 2
    inflow_profile = 3
    noslip_isothermal = 4
    noslip_adiabatic = 5
    moving_wall_isothermal = 6


WALLS = (BoundaryKind.noslip_isothermal, BoundaryKind.noslip_adiabatic, BoundaryKind.moving_wall_isothermal)
ISOTHERMAL = (BoundaryKind.noslip_isothermal, BoundaryKind.moving_wall_isothermal)


@dataclass(frozen=True)
class BoundaryTag:
    """Boundary treatment of one side of the domain.

    ``profile`` maps (x, y, t) to the prescribed state; for inflow profiles
    it is evaluated at t = 0 only.
    """

    kind: BoundaryKind
    velocity: Tuple[float, float] = (0.0, 0.0)
    temperature: Optional[float] = None
    profile: Optional[Callable[[np.ndarray, np.ndarray, float], np.ndarray]] = None

    @property
    def is_wall(self):
        # type: () -> bool
        return self.kind in WALLS

    @property
    def is_isothermal(self):
        # type: () -> bool
        return self.kind in ISOTHERMAL


def make_tag(kind, velocity=None, temperature=None, profile=None):
    # type: (object, Optional[Sequence[float]], Optional[float], Optional[Callable]) -> BoundaryTag
    if isinstance(kind, str):
        try:
            kind = BoundaryKind[kind]
        except KeyError:
            raise ConfigurationError("Unknown boundary tag", kind)
    if not isinstance(kind, BoundaryKind):
        raise ConfigurationError("Unknown boundary tag", repr(kind))

    if kind in (BoundaryKind.dirichlet_exact, BoundaryKind.inflow_profile) and profile is None:
        raise ConfigurationError("Prescribed boundary needs a state profile", kind.name)
    if kind in ISOTHERMAL and temperature is None:
        raise ConfigurationError("Isothermal wall needs a temperature", kind.name)
    if kind == BoundaryKind.moving_wall_isothermal and velocity is None:
        raise ConfigurationError("Moving wall needs a velocity", kind.name)

    wall_velocity = (0.0, 0.0)
    if velocity is not None and kind == BoundaryKind.moving_wall_isothermal:
        wall_velocity = (float(velocity[0]), float(velocity[1]))
    return BoundaryTag(kind=kind, velocity=wall_velocity,
                       temperature=None if temperature is None else float(temperature), profile=profile)


def mirror_state(u, velocity, temperature, gamma):
    # type: (np.ndarray, Sequence[float], Optional[float], float) -> np.ndarray
    """Ghost state whose average with ``u`` has the wall velocity (and, for
    isothermal walls, the wall temperature T = p / rho). Density is copied.
    """
    w = conservative_to_primitive(u, gamma)
    ghost = w.copy()
    ghost[..., 1] = 2.0 * velocity[0] - w[..., 1]
    ghost[..., 2] = 2.0 * velocity[1] - w[..., 2]
    if temperature is not None:
        T = w[..., 3] / w[..., 0]
        ghost[..., 3] = w[..., 0] * (2.0 * temperature - T)
    return primitive_to_conservative(ghost, gamma)


def _require_system(tag, eqset):
    if tag.kind == BoundaryKind.periodic:
        raise ConfigurationError("Periodic faces are connected by the mesh", "no boundary treatment applies")
    if tag.is_wall and eqset.system != System.navier_stokes:
        raise ConfigurationError("Wall boundaries need the Navier-Stokes system", tag.kind.name)


def _wall_ghost(tag, u, eqset):
    temperature = tag.temperature if tag.is_isothermal else None
    return mirror_state(u, tag.velocity, temperature, eqset.params.gamma)


def _prescribed(tag, x, y, t):
    if tag.kind == BoundaryKind.inflow_profile:
        return tag.profile(x, y, 0.0)
    return tag.profile(x, y, t)


def time_average(fn, t, dt, points=TIME_QUADRATURE_POINTS):
    # type: (Callable[[float], np.ndarray], float, float, int) -> np.ndarray
    """Mean of fn over [t, t + dt] by Gauss-Legendre quadrature."""
    if dt == 0.0:
        return fn(t)
    nodes, weights = leg.leggauss(points)
    total = None
    for s, w in zip(nodes, weights):
        value = 0.5 * w * fn(t + 0.5 * dt * (s + 1.0))
        total = value if total is None else total + value
    return total


def boundary_solution_trace(tag, inner, x, y, t, eqset):
    # type: (BoundaryTag, np.ndarray, np.ndarray, np.ndarray, float, object) -> np.ndarray
    """Outer solution trace whose average with ``inner`` is the boundary
    value used in the gradient solve.
    """
    _require_system(tag, eqset)
    if tag.is_wall:
        return _wall_ghost(tag, inner, eqset)
    g = _prescribed(tag, x, y, t)
    return 2.0 * g - inner


def _normal_flux(eqset, state, normals, scaling):
    flux = eqset.advective_flux(state)
    return scaling[..., None] * np.einsum("...vd,...d->...v", flux, normals)


def boundary_flux_traces(tag,  # type: BoundaryTag
                         inner_adv,  # type: np.ndarray
                         inner_visc,  # type: np.ndarray
                         inner_U,  # type: np.ndarray
                         x,  # type: np.ndarray
                         y,  # type: np.ndarray
                         t,  # type: float
                         dt,  # type: float
                         normals,  # type: np.ndarray
                         scaling,  # type: np.ndarray
                         eqset,
                         inner_heat=None):  # type: Optional[np.ndarray]
    # type: (...) -> Tuple[np.ndarray, np.ndarray, np.ndarray]
    """Outer time-averaged normal fluxes and solution, oriented along the
    inner outward normal and scaled by the face scaling like the inner ones.
    """
    _require_system(tag, eqset)

    if tag.is_wall:
        outer_U = _wall_ghost(tag, inner_U, eqset)
        outer_adv = _normal_flux(eqset, outer_U, normals, scaling)
        outer_visc = inner_visc.copy()
        if not tag.is_isothermal and inner_heat is not None:
            # central average of the heat flux vanishes on adiabatic walls
            outer_visc = outer_visc - 2.0 * inner_heat
        return outer_adv, outer_visc, outer_U

    if tag.kind == BoundaryKind.inflow_profile:
        g = tag.profile(x, y, 0.0)
        return _normal_flux(eqset, g, normals, scaling), inner_visc.copy(), g

    outer_U = time_average(lambda s: tag.profile(x, y, s), t, dt)
    outer_adv = time_average(lambda s: _normal_flux(eqset, tag.profile(x, y, s), normals, scaling), t, dt)
    return outer_adv, inner_visc.copy(), outer_U
