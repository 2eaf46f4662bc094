# Batch driver: assembles a run from a RunConfig, advances it in time and
# produces error norms, convergence tables, step logs and field dumps.
import csv
import logging
import math
import os
import sys
from dataclasses import dataclass
from dataclasses import field
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Sequence
from typing import Union

import numpy as np

from .basis import Basis1D
from .basis import gll_basis
from .boundary import BoundaryKind
from .boundary import BoundaryTag
from .boundary import make_tag
from .config import RunConfig
from .core import Scheme
from .equations import EquationSet
from .equations import System
from .errors import ConfigurationError
from .errors import LwfrError
from .errors import SolverError
from .errors import StateError
from .mesh import CurvilinearMesh
from .mesh import ElementGeometry
from .mesh import compute_metrics
from .mesh import element_areas
from .mesh import make_cartesian_mesh
from .mesh import make_warped_mesh
from .mesh import metric_identity_residual
from .mesh import write_field
from .problems import Problem
from .problems import make_problem
from .time_control import ControllerState
from .time_control import advective_step_limit
from .time_control import embedded_error_estimate
from .time_control import fixed_cfl_step
from .time_control import initial_step
from .time_control import propose_step

logger = logging.getLogger(__name__)
step_logger = logging.getLogger("lwfr.steps")

EOC_FILE = "eoc.csv"
STEPS_FILE = "steps.log"
EOC_COLUMNS = ("degree", "nx", "l2_error", "eoc")


@dataclass
class Setup:
    basis: Basis1D
    mesh: CurvilinearMesh
    geometry: ElementGeometry
    eqset: object
    problem: Problem
    scheme: Scheme


@dataclass
class StepStatistics:
    accepted: int = 0
    rejected: int = 0
    final_time: float = 0.0
    min_dt: float = math.inf
    max_dt: float = 0.0
    first_rate: Optional[float] = None
    last_rate: Optional[float] = None
    max_error: float = 0.0


@dataclass
class SimulationResult:
    fields: np.ndarray
    time: float
    statistics: StepStatistics
    setup: Setup


def _problem_params(cfg):
    # type: (RunConfig) -> Dict[str, object]
    eq = cfg.equation
    if eq.case == "free_stream":
        return dict(constant=eq.constant, density=eq.density, flow_velocity=eq.flow_velocity, pressure=eq.pressure)
    elif eq.case == "manufactured":
        return dict(c=eq.manufactured_c, amplitude=eq.manufactured_a)
    elif eq.case == "cavity":
        return dict(mach=eq.mach)
    return {}


def _boundary_tags(cfg, mesh, problem):
    # type: (RunConfig, CurvilinearMesh, Problem) -> Dict[str, BoundaryTag]
    tags = {}
    for side in mesh.boundary_faces():
        spec = cfg.boundary.sides()[side]
        kind = BoundaryKind[spec.kind]
        profile = None  # type: Optional[Callable]
        if kind == BoundaryKind.dirichlet_exact:
            if problem.exact is None:
                raise ConfigurationError("Case has no exact solution for dirichlet_exact", f"side {side}")
            profile = problem.exact
        elif kind == BoundaryKind.inflow_profile:
            profile = problem.initial
        temperature = spec.temperature if spec.temperature is not None else problem.wall_temperature
        tags[side] = make_tag(kind, velocity=spec.velocity, temperature=temperature, profile=profile)
    return tags


def build_mesh(cfg, basis):
    # type: (RunConfig, Basis1D) -> CurvilinearMesh
    m = cfg.mesh
    if m.kind == "warped":
        return make_warped_mesh(m.nx, m.ny, m.amplitude, basis, m.domain, cfg.boundary.periodic)
    return make_cartesian_mesh(m.nx, m.ny, m.domain, basis, cfg.boundary.periodic)


def build_setup(cfg, threads=1):
    # type: (RunConfig, int) -> Setup
    eq = cfg.equation
    basis = gll_basis(cfg.degree)
    mesh = build_mesh(cfg, basis)
    geometry = compute_metrics(mesh, basis)
    eqset = EquationSet(system=eq.system, velocity=eq.velocity, nu=eq.nu, gamma=eq.gamma, mu=eq.mu,
                        prandtl=eq.prandtl)
    problem = make_problem(eq.case, eqset, **_problem_params(cfg))
    scheme = Scheme(mesh, geometry, basis, eqset, _boundary_tags(cfg, mesh, problem), source=problem.source,
                    dissipation=eq.dissipation, threads=threads)
    return Setup(basis=basis, mesh=mesh, geometry=geometry, eqset=eqset, problem=problem, scheme=scheme)


def _quadrature_weights(geometry, basis):
    # type: (ElementGeometry, Basis1D) -> np.ndarray
    return np.outer(basis.weights, basis.weights)[None, :, :] * geometry.J


def compute_error_norm(fields, exact, geometry, basis, t=0.0, component=0):
    # type: (np.ndarray, Union[np.ndarray, Callable], ElementGeometry, Basis1D, float, Optional[int]) -> object
    """Domain-normalized discrete L2 error at the solution points.

    ``exact`` is a nodal array or a callable (x, y, t). Returns the error of
    ``component`` (density for Navier-Stokes), or every component when
    ``component`` is None.
    """
    if callable(exact):
        exact = exact(geometry.x, geometry.y, t)
    wJ = _quadrature_weights(geometry, basis)
    squared = np.einsum("eij,eijv->v", wJ, (fields - exact) ** 2) / np.sum(wJ)
    errors = np.sqrt(squared)
    if component is None:
        return errors
    return float(errors[component])


def _rms_rate(new, old, dt, geometry, basis, components):
    # type: (np.ndarray, np.ndarray, float, ElementGeometry, Basis1D, slice) -> float
    wJ = _quadrature_weights(geometry, basis)
    rate = ((new[..., components] - old[..., components]) / dt) ** 2
    return float(np.sqrt(np.einsum("eij,eijv->", wJ, rate) / (np.sum(wJ) * rate.shape[-1])))


def _attach_step_handlers(out_dir, log_steps):
    # type: (Optional[str], bool) -> List[logging.Handler]
    handlers = []  # type: List[logging.Handler]
    if out_dir is not None:
        handlers.append(logging.FileHandler(os.path.join(out_dir, STEPS_FILE), mode="w"))
    if log_steps:
        handlers.append(logging.StreamHandler(sys.stderr))
    for handler in handlers:
        handler.setFormatter(logging.Formatter("%(message)s"))
        step_logger.addHandler(handler)
    if handlers:
        step_logger.setLevel(logging.INFO)
        step_logger.propagate = False
    return handlers


def _detach_step_handlers(handlers):
    # type: (List[logging.Handler]) -> None
    for handler in handlers:
        step_logger.removeHandler(handler)
        handler.close()


def _dump(out_dir, step, setup, fields):
    # type: (Optional[str], int, Setup, np.ndarray) -> None
    if out_dir is not None:
        write_field(os.path.join(out_dir, f"field_{step}.txt"), setup.geometry, fields, setup.eqset.names)


def run_simulation(cfg, out_dir=None, threads=1, log_steps=False, setup=None):
    # type: (RunConfig, Optional[str], int, bool, Optional[Setup]) -> SimulationResult
    """Advance from t = 0 to the final time, clipping the last step.

    Adaptive runs retry rejected steps with the controller's proposal and
    abort with SolverError after too many consecutive rejections; fixed
    runs abort on the first unphysical state.
    """
    setup = setup or build_setup(cfg, threads)
    out_dir = out_dir if out_dir is not None else cfg.output.directory
    log_steps = log_steps or cfg.output.log_steps
    tc = cfg.time
    geometry, basis, eqset = setup.geometry, setup.basis, setup.eqset
    momentum = slice(1, 3) if eqset.system == System.navier_stokes else slice(0, 1)

    u = setup.problem.initial(geometry.x, geometry.y, 0.0)
    eqset.check_state(u)
    t = 0.0
    stats = StepStatistics()

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
    handlers = _attach_step_handlers(out_dir, log_steps)
    try:
        _dump(out_dir, 0, setup, u)
        if tc.final_time == 0.0:
            return SimulationResult(fields=u, time=0.0, statistics=stats, setup=setup)

        adaptive = tc.mode == "adaptive"
        if adaptive:
            ctrl = ControllerState(atol=tc.atol, rtol=tc.rtol, dt=initial_step(u, geometry, eqset, tc.initial_safety),
                                   order=cfg.degree + 1, gains=tc.gains, limiter=tc.limiter,
                                   dt_max=advective_step_limit(u, geometry, eqset, tc.max_cfl))
            dt = ctrl.dt
        else:
            dt = fixed_cfl_step(u, geometry, eqset, tc.cfl_a, tc.cfl_v)
        logger.info("starting %s run: %d elements, N = %d, dt0 = %.3e", cfg.equation.case, setup.mesh.n_elements,
                    cfg.degree, dt)

        attempts = 0
        while t < tc.final_time:
            attempts += 1
            if tc.max_steps is not None and attempts > tc.max_steps:
                raise SolverError("Step limit reached", f"{tc.max_steps} attempts", time=t)

            remaining = tc.final_time - t
            step = min(dt, remaining)
            last = step >= remaining

            try:
                result = setup.scheme.take_step(u, t, step)
                e = embedded_error_estimate(result.high, result.low, u, geometry, basis, tc.atol, tc.rtol)
            except StateError as err:
                if not adaptive:
                    raise SolverError("Unphysical state", str(err), time=t) from err
                logger.debug("unphysical candidate at t=%.6e: %s", t, err)
                result, e = None, math.inf

            if adaptive:
                accepted, dt = propose_step(ctrl, e, step)
                if ctrl.consecutive_rejections > tc.max_rejections:
                    raise SolverError("Too many consecutive rejections", f"dt = {dt:.3e}", time=t)
            else:
                accepted = True

            step_logger.info("step %d %.16e %.16e %.6e %d", stats.accepted + 1, t, step, e, int(accepted))
            if not accepted:
                stats.rejected += 1
                continue

            rate = _rms_rate(result.high, u, step, geometry, basis, momentum)
            if stats.first_rate is None:
                stats.first_rate = rate
            stats.last_rate = rate
            stats.accepted += 1
            stats.min_dt = min(stats.min_dt, step)
            stats.max_dt = max(stats.max_dt, step)
            stats.max_error = max(stats.max_error, e)

            u = result.high
            t = tc.final_time if last else t + step
            if adaptive and not last:
                ctrl.dt_max = advective_step_limit(u, geometry, eqset, tc.max_cfl)
                dt = ctrl.dt = min(dt, ctrl.dt_max)
            if cfg.output.dump_every and stats.accepted % cfg.output.dump_every == 0 and not last:
                _dump(out_dir, stats.accepted, setup, u)

        _dump(out_dir, stats.accepted, setup, u)
    finally:
        _detach_step_handlers(handlers)

    stats.final_time = t
    logger.info("finished at t = %.6e after %d accepted / %d rejected steps", t, stats.accepted, stats.rejected)
    return SimulationResult(fields=u, time=t, statistics=stats, setup=setup)


def eoc(errors, resolutions):
    # type: (Sequence[float], Sequence[int]) -> List[Optional[float]]
    """Experimental orders of convergence against the element count; the
    first entry (and any entry next to a failed run) is None.
    """
    orders = [None]  # type: List[Optional[float]]
    for k in range(1, len(errors)):
        previous, current = errors[k - 1], errors[k]
        if not (np.isfinite(previous) and np.isfinite(current)) or previous <= 0.0 or current <= 0.0:
            orders.append(None)
            continue
        orders.append(math.log(previous / current) / math.log(resolutions[k] / resolutions[k - 1]))
    return orders


@dataclass(frozen=True)
class ConvergenceRow:
    degree: int
    nx: int
    l2_error: float
    eoc: Optional[float] = None
    failure: Optional[str] = None


@dataclass
class ConvergenceReport:
    rows: List[ConvergenceRow] = field(default_factory=list)

    def write_csv(self, path):
        # type: (str) -> None
        with open(path, "w", newline="", encoding="utf-8") as fd:
            writer = csv.writer(fd, lineterminator="\n")
            writer.writerow(EOC_COLUMNS)
            for row in self.rows:
                writer.writerow([row.degree, row.nx, f"{row.l2_error:.16e}",
                                 "" if row.eoc is None else f"{row.eoc:.6f}"])
        logger.info("wrote %s", path)


def convergence_study(cfg, resolutions, degrees, out_dir=None, threads=1):
    # type: (RunConfig, Sequence[int], Sequence[int], Optional[str], int) -> ConvergenceReport
    """Run every (degree, nx) pair; failures are recorded and the study goes on."""
    report = ConvergenceReport()
    for degree in degrees:
        errors = []  # type: List[float]
        failures = []  # type: List[Optional[str]]
        for nx in resolutions:
            run_cfg = cfg.with_resolution(nx, degree)
            try:
                result = run_simulation(run_cfg, threads=threads)
                exact = result.setup.problem.exact
                if exact is None:
                    raise ConfigurationError("Case has no exact solution", cfg.equation.case)
                errors.append(compute_error_norm(result.fields, exact, result.setup.geometry, result.setup.basis,
                                                 t=result.time))
                failures.append(None)
            except ConfigurationError:
                raise
            except LwfrError as err:
                logger.warning("run N = %d, nx = %d failed: %s", degree, nx, err)
                errors.append(math.nan)
                failures.append(str(err))
        for nx, error, order, failure in zip(resolutions, errors, eoc(errors, resolutions), failures):
            report.rows.append(ConvergenceRow(degree=degree, nx=nx, l2_error=error, eoc=order, failure=failure))

    if out_dir is not None:
        os.makedirs(out_dir, exist_ok=True)
        report.write_csv(os.path.join(out_dir, EOC_FILE))
    return report


@dataclass(frozen=True)
class MeshReport:
    n_elements: int
    metric_residual: float
    min_jacobian: float
    area: float


def check_mesh(cfg):
    # type: (RunConfig) -> MeshReport
    basis = gll_basis(cfg.degree)
    mesh = build_mesh(cfg, basis)
    geometry = compute_metrics(mesh, basis)
    return MeshReport(n_elements=mesh.n_elements, metric_residual=metric_identity_residual(geometry, basis),
                      min_jacobian=float(np.min(geometry.J)), area=float(np.sum(element_areas(geometry, basis))))
