# Error-based step size control from the embedded lower-order update and
# the fixed-CFL step used for convergence studies.
import logging
import math
from dataclasses import dataclass
from typing import Optional
from typing import Tuple

import numpy as np

from .basis import Basis1D
from .errors import ConfigurationError
from .mesh import ElementGeometry

logger = logging.getLogger(__name__)

ERROR_FLOOR = 1.0e-12
DEFAULT_GAINS = (0.6, -0.2, 0.0)
DEFAULT_MAX_REJECTIONS = 10
INITIAL_SAFETY = 0.5
REJECTION_FACTOR = 0.9


@dataclass
class ControllerState:
    """Mutable controller memory. ``history`` is (eps_n, eps_{n-1}) and only
    advances on accepted steps. A rejection shrinks the step by at least
    ``rejection_factor``; proposals never exceed ``dt_max``.
    """

    atol: float
    rtol: float
    dt: float
    order: int
    gains: Tuple[float, float, float] = DEFAULT_GAINS
    history: Tuple[float, float] = (1.0, 1.0)
    limiter: bool = True
    accepted: int = 0
    rejected: int = 0
    consecutive_rejections: int = 0
    rejection_factor: float = REJECTION_FACTOR
    dt_max: float = math.inf

    def __post_init__(self):
        if self.atol <= 0.0 or self.rtol <= 0.0:
            raise ConfigurationError("Tolerances must be positive", f"atol = {self.atol}, rtol = {self.rtol}")
        if not self.dt > 0.0:
            raise ConfigurationError("Time step must be positive", str(self.dt))
        if self.order < 1:
            raise ConfigurationError("Controller order must be positive", str(self.order))
        if not 0.0 < self.rejection_factor < 1.0:
            raise ConfigurationError("Rejection factor must lie in (0, 1)", str(self.rejection_factor))
        self.dt = min(self.dt, self.dt_max)
        self.gains = tuple(float(g) for g in self.gains)  # type: ignore


def limiter(x):
    # type: (float) -> float
    return 1.0 + float(np.arctan(x - 1.0))


def embedded_error_estimate(u_high, u_low, u_prev, geometry, basis, atol, rtol):
    # type: (np.ndarray, np.ndarray, np.ndarray, ElementGeometry, Basis1D, float, float) -> float
    """Quadrature-weighted RMS of (u_high - u_low) / (atol + rtol max(|u_prev|, |u_high|)),
    averaged over the conserved components.
    """
    scale = atol + rtol * np.maximum(np.abs(u_prev), np.abs(u_high))
    ratio = ((u_high - u_low) / scale) ** 2
    wJ = np.outer(basis.weights, basis.weights)[None, :, :] * geometry.J
    weighted = np.einsum("eij,eijv->v", wJ, ratio)
    return float(np.sqrt(np.mean(weighted) / np.sum(wJ)))


def propose_step(ctrl, e, step=None):
    # type: (ControllerState, float, Optional[float]) -> Tuple[bool, float]
    """Accept iff e <= 1 and return the next step size; updates ``ctrl``.

    ``step`` is the step that produced e when it differs from ``ctrl.dt``
    (a step clipped to the final time). A non-finite e (unphysical
    candidate state) is a rejection with the strongest limited shrink.
    """
    if step is not None:
        ctrl.dt = float(step)
    e = max(float(e), ERROR_FLOOR)
    b1, b2, b3 = ctrl.gains
    k = float(ctrl.order)
    eps_n, eps_nm1 = ctrl.history
    raw = (1.0 / e) ** (b1 / k) * (1.0 / eps_n) ** (b2 / k) * (1.0 / eps_nm1) ** (b3 / k)
    factor = limiter(raw) if ctrl.limiter else raw
    if not np.isfinite(e):
        factor = limiter(0.0)

    accept = e <= 1.0
    if accept:
        ctrl.history = (e, eps_n)
        ctrl.accepted += 1
        ctrl.consecutive_rejections = 0
    else:
        factor = min(factor, ctrl.rejection_factor)
        ctrl.rejected += 1
        ctrl.consecutive_rejections += 1
        logger.debug("rejected step dt=%.6e e=%.6e", ctrl.dt, e)

    ctrl.dt = min(ctrl.dt * factor, ctrl.dt_max)
    return accept, ctrl.dt


def _step_limits(fields, geometry, eqset, cfl_a, cfl_v):
    # type: (np.ndarray, ElementGeometry, object, float, float) -> Tuple[float, float]
    if cfl_a <= 0.0 or cfl_v <= 0.0:
        raise ConfigurationError("CFL factors must be positive", f"cfl_a = {cfl_a}, cfl_v = {cfl_v}")
    h = np.sqrt(geometry.J)
    p = 2 * (fields.shape[1] - 1) + 1
    lam = np.asarray(eqset.max_wave_speed(fields), dtype=float)
    nu = np.asarray(eqset.diffusion_scale(fields), dtype=float)

    with np.errstate(divide="ignore"):
        advective = np.where(lam > 0.0, cfl_a * h / (p * lam), np.inf)
        viscous = np.where(nu > 0.0, cfl_v * h ** 2 / (p ** 2 * nu), np.inf)
    return float(np.min(advective)), float(np.min(viscous))


def fixed_cfl_step(fields, geometry, eqset, cfl_a, cfl_v):
    # type: (np.ndarray, ElementGeometry, object, float, float) -> float
    """min of cfl_a h / ((2N+1) lam) and cfl_v h^2 / ((2N+1)^2 nu), h = sqrt(J)."""
    dt = min(_step_limits(fields, geometry, eqset, cfl_a, cfl_v))
    if not np.isfinite(dt):
        raise ConfigurationError("No wave speed or diffusion to bound the time step")
    return dt


def advective_step_limit(fields, geometry, eqset, cfl):
    # type: (np.ndarray, ElementGeometry, object, float) -> float
    """cfl h / ((2N+1) lam); infinite when nothing is transported."""
    return _step_limits(fields, geometry, eqset, cfl, 1.0)[0]


def initial_step(fields, geometry, eqset, safety=INITIAL_SAFETY):
    # type: (np.ndarray, ElementGeometry, object, float) -> float
    return fixed_cfl_step(fields, geometry, eqset, safety, safety)
