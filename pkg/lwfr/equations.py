# Conservative systems u_t + div(f^a(u) - f^v(u, grad u)) = 0
# States carry the variable axis last; fluxes append a direction axis of 2.
import functools
import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np

from .errors import ConfigurationError
from .errors import StateError

logger = logging.getLogger(__name__)


class System(Enum):
    advection_diffusion = 1
    navier_stokes = 2


def guarded(method):
    """Turn floating point traps inside a flux evaluation into StateError."""

    @functools.wraps(method)
    def wrapper(*args, **kwargs):
        try:
            with np.errstate(invalid="raise", divide="raise", over="raise"):
                return method(*args, **kwargs)
        except FloatingPointError as err:
            raise StateError("Flux evaluation failed", err)

    return wrapper


def _locate(mask):
    # type: (np.ndarray) -> Tuple[bool, Optional[int], Optional[Tuple[int, ...]]]
    mask = np.asarray(mask)
    if not mask.any():
        return False, None, None
    if mask.ndim == 0:
        return True, None, None
    first = tuple(int(k) for k in np.argwhere(mask)[0])
    return True, first[0], first[1:]


@dataclass(frozen=True)
class AdvDiffParams:
    velocity: Tuple[float, float] = (1.5, 1.0)
    nu: float = 5.0e-2

    def __post_init__(self):
        if self.nu < 0.0:
            raise ConfigurationError("Diffusion coefficient must be non-negative", f"nu = {self.nu}")


@dataclass(frozen=True)
class NavierStokesParams:
    gamma: float = 1.4
    mu: float = 1.0e-3
    prandtl: float = 0.7

    def __post_init__(self):
        if self.gamma <= 1.0:
            raise ConfigurationError("Ratio of specific heats must exceed one", f"gamma = {self.gamma}")
        if self.mu < 0.0:
            raise ConfigurationError("Viscosity must be non-negative", f"mu = {self.mu}")
        if self.prandtl <= 0.0:
            raise ConfigurationError("Prandtl number must be positive", f"prandtl = {self.prandtl}")

    @property
    def kappa(self):
        # type: () -> float
        # heat conductivity for T = p / rho
        return self.mu * self.gamma / (self.prandtl * (self.gamma - 1.0))


def advdiff_fluxes(u, grad, params):
    # type: (np.ndarray, np.ndarray, AdvDiffParams) -> Tuple[np.ndarray, np.ndarray]
    u = np.asarray(u, dtype=float)
    a = np.asarray(params.velocity, dtype=float)
    f_adv = u[..., None] * a
    f_visc = params.nu * np.asarray(grad, dtype=float)
    return f_adv, f_visc


def advdiff_exact(x, y, t, params):
    # type: (np.ndarray, np.ndarray, float, AdvDiffParams) -> np.ndarray
    a1, a2 = params.velocity
    decay = np.exp(-2.0 * params.nu * np.pi ** 2 * t)
    return 1.0 + 0.5 * decay * np.sin(np.pi * (x - a1 * t + y - a2 * t))


def conservative_to_primitive(u, gamma):
    # type: (np.ndarray, float) -> np.ndarray
    rho = u[..., 0]
    vx = u[..., 1] / rho
    vy = u[..., 2] / rho
    p = (gamma - 1.0) * (u[..., 3] - 0.5 * rho * (vx ** 2 + vy ** 2))
    return np.stack([rho, vx, vy, p], axis=-1)


def primitive_to_conservative(w, gamma):
    # type: (np.ndarray, float) -> np.ndarray
    rho, vx, vy, p = w[..., 0], w[..., 1], w[..., 2], w[..., 3]
    energy = p / (gamma - 1.0) + 0.5 * rho * (vx ** 2 + vy ** 2)
    return np.stack([rho, rho * vx, rho * vy, energy], axis=-1)


def euler_flux(u, gamma):
    # type: (np.ndarray, float) -> np.ndarray
    rho, vx, vy, p = np.moveaxis(conservative_to_primitive(u, gamma), -1, 0)
    energy = u[..., 3]
    fx = np.stack([rho * vx, rho * vx * vx + p, rho * vx * vy, (energy + p) * vx], axis=-1)
    fy = np.stack([rho * vy, rho * vx * vy, rho * vy * vy + p, (energy + p) * vy], axis=-1)
    return np.stack([fx, fy], axis=-1)


def _primitive_gradients(u, grad, gamma):
    # chain rule from conservative gradients; grad has shape (..., 4, 2)
    rho = u[..., 0]
    v = u[..., 1:3] / rho[..., None]
    g_rho = grad[..., 0, :]
    g_mom = grad[..., 1:3, :]
    g_energy = grad[..., 3, :]

    grad_v = (g_mom - v[..., :, None] * g_rho[..., None, :]) / rho[..., None, None]
    kinetic = 0.5 * np.sum(v ** 2, axis=-1)
    g_p = (gamma - 1.0) * (g_energy - np.einsum("...a,...ad->...d", v, g_mom) + kinetic[..., None] * g_rho)
    p = (gamma - 1.0) * (u[..., 3] - rho * kinetic)
    T = p / rho
    grad_T = (g_p - T[..., None] * g_rho) / rho[..., None]
    return v, grad_v, grad_T


def viscous_stress(grad_v, mu):
    # type: (np.ndarray, float) -> np.ndarray
    div_v = grad_v[..., 0, 0] + grad_v[..., 1, 1]
    eye = np.eye(2)
    return mu * (grad_v + np.swapaxes(grad_v, -1, -2) - (2.0 / 3.0) * div_v[..., None, None] * eye)


def navier_stokes_fluxes(u, grad, params):
    # type: (np.ndarray, np.ndarray, NavierStokesParams) -> Tuple[np.ndarray, np.ndarray]
    u = np.asarray(u, dtype=float)
    grad = np.asarray(grad, dtype=float)
    f_adv = euler_flux(u, params.gamma)

    v, grad_v, grad_T = _primitive_gradients(u, grad, params.gamma)
    tau = viscous_stress(grad_v, params.mu)
    work = np.einsum("...a,...ad->...d", v, tau)
    f_visc = np.zeros_like(f_adv)
    f_visc[..., 1:3, :] = tau
    f_visc[..., 3, :] = work + params.kappa * grad_T
    return f_adv, f_visc


def sound_speed(u, gamma):
    # type: (np.ndarray, float) -> np.ndarray
    w = conservative_to_primitive(u, gamma)
    return np.sqrt(gamma * w[..., 3] / w[..., 0])


class _AdvectionDiffusion:
    system = System.advection_diffusion
    nvar = 1
    names = ("u",)

    def __init__(self, params):
        # type: (AdvDiffParams) -> None
        self.params = params

    @guarded
    def advective_flux(self, u):
        return u[..., None] * np.asarray(self.params.velocity, dtype=float)

    @guarded
    def viscous_flux(self, u, grad):
        return advdiff_fluxes(u, grad, self.params)[1]

    def heat_flux(self, u, grad):
        return None

    def wave_speed(self, u_left, u_right, n):
        a = np.asarray(self.params.velocity, dtype=float)
        return np.abs(n @ a)

    def max_wave_speed(self, u):
        return np.full(u.shape[:-1], float(np.hypot(*self.params.velocity)))

    def diffusion_scale(self, u):
        return np.full(u.shape[:-1], float(self.params.nu))

    def check_state(self, u):
        found, element, point = _locate(~np.isfinite(u).all(axis=-1))
        if found:
            raise StateError("Non-finite state", f"element {element}, point {point}", element=element, point=point)


class _NavierStokes:
    system = System.navier_stokes
    nvar = 4
    names = ("rho", "rho_vx", "rho_vy", "energy")

    def __init__(self, params):
        # type: (NavierStokesParams) -> None
        self.params = params

    @guarded
    def advective_flux(self, u):
        return euler_flux(u, self.params.gamma)

    @guarded
    def viscous_flux(self, u, grad):
        return navier_stokes_fluxes(u, grad, self.params)[1]

    @guarded
    def heat_flux(self, u, grad):
        _, _, grad_T = _primitive_gradients(u, grad, self.params.gamma)
        heat = np.zeros(u.shape + (2,))
        heat[..., 3, :] = self.params.kappa * grad_T
        return heat

    @guarded
    def wave_speed(self, u_left, u_right, n):
        gamma = self.params.gamma
        speeds = []
        for u in (u_left, u_right):
            vn = np.sum(u[..., 1:3] * n, axis=-1) / u[..., 0]
            speeds.append(np.abs(vn) + sound_speed(u, gamma))
        return np.maximum(*speeds)

    @guarded
    def max_wave_speed(self, u):
        speed = np.linalg.norm(u[..., 1:3], axis=-1) / u[..., 0]
        return speed + sound_speed(u, self.params.gamma)

    def diffusion_scale(self, u):
        p = self.params
        return p.mu * max(4.0 / 3.0, p.gamma / p.prandtl) / u[..., 0]

    def check_state(self, u):
        gamma = self.params.gamma
        with np.errstate(invalid="ignore", divide="ignore", over="ignore"):
            rho = u[..., 0]
            p = (gamma - 1.0) * (u[..., 3] - 0.5 * (u[..., 1] ** 2 + u[..., 2] ** 2) / rho)
            bad = ~np.isfinite(u).all(axis=-1) | ~(rho > 0.0) | ~(p > 0.0)
        found, element, point = _locate(bad)
        if found:
            raise StateError("Non-physical state", f"element {element}, point {point}", element=element, point=point)


def EquationSet(system=System.advection_diffusion,
                velocity=(1.5, 1.0),  # type: Sequence[float]
                nu=5.0e-2,  # type: float
                gamma=1.4,  # type: float
                mu=1.0e-3,  # type: float
                prandtl=0.7):  # type: float
    if isinstance(system, str):
        try:
            system = System[system]
        except KeyError:
            raise ConfigurationError("Unknown equation system", system)

    if system == System.advection_diffusion:
        return _AdvectionDiffusion(AdvDiffParams(velocity=(float(velocity[0]), float(velocity[1])), nu=float(nu)))

    elif system == System.navier_stokes:
        return _NavierStokes(NavierStokesParams(gamma=float(gamma), mu=float(mu), prandtl=float(prandtl)))

    raise ConfigurationError("Unknown equation system", repr(system))


def wave_speed(state_left, state_right, n, eqset):
    # type: (np.ndarray, np.ndarray, np.ndarray, object) -> np.ndarray
    eqset.check_state(np.asarray(state_left))
    eqset.check_state(np.asarray(state_right))
    return eqset.wave_speed(np.asarray(state_left, dtype=float), np.asarray(state_right, dtype=float),
                            np.asarray(n, dtype=float))
