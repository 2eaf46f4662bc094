# Initial data, exact solutions and manufactured sources for the shipped cases
import logging
from dataclasses import dataclass
from typing import Callable
from typing import Optional
from typing import Sequence

import numpy as np

from .equations import AdvDiffParams
from .equations import System
from .equations import advdiff_exact
from .equations import primitive_to_conservative
from .errors import ConfigurationError

logger = logging.getLogger(__name__)

StateFunction = Callable[[np.ndarray, np.ndarray, float], np.ndarray]

FD_STEP = 1.0e-3


@dataclass(frozen=True)
class Problem:
    """A named case: ``exact``/``source`` map (x, y, t) to states with the
    variable axis last. ``initial`` is ``exact`` at t = 0 when there is one.
    """

    name: str
    initial: StateFunction
    exact: Optional[StateFunction] = None
    source: Optional[StateFunction] = None
    wall_temperature: Optional[float] = None


def _central(g, h):
    # fourth order central difference of a callable of one real argument
    return (g(-2.0 * h) - 8.0 * g(-h) + 8.0 * g(h) - g(2.0 * h)) / (12.0 * h)


def residual_source(eqset, exact, h=FD_STEP):
    # type: (object, StateFunction, float) -> StateFunction
    """PDE residual of ``exact``: u_t + div f^a(u) - div f^v(u, grad u).

    All derivatives are fourth order central differences with step h,
    nested once for the viscous divergence.
    """

    def grad(x, y, t):
        gx = _central(lambda s: exact(x + s, y, t), h)
        gy = _central(lambda s: exact(x, y + s, t), h)
        return np.stack([gx, gy], axis=-1)

    def viscous(x, y, t):
        return eqset.viscous_flux(exact(x, y, t), grad(x, y, t))

    def source(x, y, t):
        u_t = _central(lambda s: exact(x, y, t + s), h)
        div_adv = _central(lambda s: eqset.advective_flux(exact(x + s, y, t))[..., 0], h)
        div_adv = div_adv + _central(lambda s: eqset.advective_flux(exact(x, y + s, t))[..., 1], h)
        div_visc = _central(lambda s: viscous(x + s, y, t)[..., 0], h)
        div_visc = div_visc + _central(lambda s: viscous(x, y + s, t)[..., 1], h)
        return u_t + div_adv - div_visc

    return source


def advdiff_wave(eqset):
    # type: (object) -> Problem
    params = eqset.params  # type: AdvDiffParams

    def exact(x, y, t):
        return advdiff_exact(x, y, t, params)[..., None]

    return Problem(name="wave", initial=lambda x, y, t=0.0: exact(x, y, 0.0), exact=exact)


def eriksson_johnson(eqset, decay=4.0):
    # type: (object, float) -> Problem
    """Boundary layer flow of u_t + u_x = nu lap u on (-1, 0) x (-0.5, 0.5).

    A decaying transient exp(-decay t) plus a steady layer that steepens
    towards x = 0 as nu shrinks; needs velocity (1, 0) and
    4 nu decay <= 1.
    """
    params = eqset.params  # type: AdvDiffParams
    eps = params.nu
    if tuple(params.velocity) != (1.0, 0.0):
        raise ConfigurationError("Boundary layer case needs velocity (1, 0)", repr(params.velocity))
    if not 0.0 < 4.0 * eps * decay <= 1.0:
        raise ConfigurationError("Boundary layer case needs 0 < 4 nu decay <= 1", f"nu = {eps}, decay = {decay}")

    root = np.sqrt(1.0 - 4.0 * eps * decay)
    lam_slow, lam_fast = (1.0 - root) / (2.0 * eps), (1.0 + root) / (2.0 * eps)
    disc = np.sqrt(1.0 + 4.0 * np.pi ** 2 * eps ** 2)
    r, s = (1.0 + disc) / (2.0 * eps), (1.0 - disc) / (2.0 * eps)
    norm = np.exp(-s) - np.exp(-r)

    def exact(x, y, t):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        transient = np.exp(-decay * t) * (np.exp(lam_slow * x) - np.exp(lam_fast * x))
        layer = np.cos(np.pi * y) * (np.exp(s * x) - np.exp(r * x)) / norm
        return (transient + layer)[..., None]

    return Problem(name="eriksson_johnson", initial=lambda x, y, t=0.0: exact(x, y, 0.0), exact=exact)


def free_stream(eqset, constant=1.0, density=1.0, flow_velocity=(0.3, 0.2), pressure=None):
    # type: (object, float, float, Sequence[float], Optional[float]) -> Problem
    if eqset.system == System.advection_diffusion:
        state = np.array([float(constant)])
        temperature = None
    else:
        gamma = eqset.params.gamma
        p = 1.0 / gamma if pressure is None else float(pressure)
        state = primitive_to_conservative(np.array([density, flow_velocity[0], flow_velocity[1], p]), gamma)
        temperature = p / density

    def exact(x, y, t):
        return np.broadcast_to(state, np.shape(x) + state.shape).copy()

    return Problem(name="free_stream", initial=lambda x, y, t=0.0: exact(x, y, 0.0), exact=exact,
                   wall_temperature=temperature)


def ns_manufactured(eqset, c=2.0, amplitude=0.1):
    # type: (object, float, float) -> Problem
    """Smooth manufactured flow on [-1, 1]^2 with p = rho^2.

    Velocity vanishes on y = -1 (log factor) and y = +1 (exponential factor)
    and d(rho)/dy vanishes there, so no-slip adiabatic walls are exact.
    """
    gamma = eqset.params.gamma

    def exact(x, y, t):
        x, y = np.broadcast_arrays(np.asarray(x, dtype=float), np.asarray(y, dtype=float))
        rho = c + amplitude * np.sin(np.pi * x) * np.cos(np.pi * y) * np.cos(np.pi * t)
        v = np.sin(np.pi * x) * np.log(y + 2.0) * (1.0 - np.exp(-amplitude * (y - 1.0))) * np.cos(np.pi * t)
        return primitive_to_conservative(np.stack([rho, v, v, rho ** 2], axis=-1), gamma)

    return Problem(name="manufactured", initial=lambda x, y, t=0.0: exact(x, y, 0.0), exact=exact,
                   source=residual_source(eqset, exact))


def lid_driven_cavity(eqset, mach=0.1):
    # type: (object, float) -> Problem
    gamma = eqset.params.gamma
    pressure = 1.0 / (mach ** 2 * gamma)
    state = primitive_to_conservative(np.array([1.0, 0.0, 0.0, pressure]), gamma)

    def initial(x, y, t=0.0):
        return np.broadcast_to(state, np.shape(x) + state.shape).copy()

    return Problem(name="cavity", initial=initial, wall_temperature=pressure)


def make_problem(case, eqset, **params):
    # type: (str, object, object) -> Problem
    if case == "wave":
        if eqset.system != System.advection_diffusion:
            raise ConfigurationError("Case needs the advection-diffusion system", case)
        return advdiff_wave(eqset)

    elif case == "eriksson_johnson":
        if eqset.system != System.advection_diffusion:
            raise ConfigurationError("Case needs the advection-diffusion system", case)
        return eriksson_johnson(eqset, **params)

    elif case == "free_stream":
        return free_stream(eqset, **params)

    elif case == "manufactured":
        if eqset.system != System.navier_stokes:
            raise ConfigurationError("Case needs the Navier-Stokes system", case)
        return ns_manufactured(eqset, **params)

    elif case == "cavity":
        if eqset.system != System.navier_stokes:
            raise ConfigurationError("Case needs the Navier-Stokes system", case)
        return lid_driven_cavity(eqset, **params)

    raise ConfigurationError("Unknown case", case)
