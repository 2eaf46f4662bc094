# Structured curvilinear quadrilateral meshes built from analytic maps,
# their metric terms and the face bookkeeping shared by the solver.
import logging
from dataclasses import dataclass
from typing import Callable
from typing import Dict
from typing import Optional
from typing import Sequence
from typing import Tuple

import numpy as np

from .basis import Basis1D
from .errors import ConfigurationError
from .errors import GeometryError

logger = logging.getLogger(__name__)

LEFT, RIGHT, BOTTOM, TOP = 0, 1, 2, 3
SIDES = ("left", "right", "bottom", "top")
OPPOSITE = np.array([RIGHT, LEFT, TOP, BOTTOM])

Domain = Tuple[float, float, float, float]
Mapping = Callable[[np.ndarray, np.ndarray], Tuple[np.ndarray, np.ndarray]]


@dataclass(frozen=True)
class FaceId:
    element: int
    direction: int  # 1 (xi) or 2 (eta)
    side: str  # "L" or "R"

    @property
    def index(self):
        # type: () -> int
        return 2 * (self.direction - 1) + (1 if self.side == "R" else 0)

    @property
    def reference_normal(self):
        # type: () -> Tuple[float, float]
        sign = 1.0 if self.side == "R" else -1.0
        return (sign, 0.0) if self.direction == 1 else (0.0, sign)


@dataclass(frozen=True)
class CurvilinearMesh:
    """Nodal coordinates of every element at the tensor GLL points plus
    structured face connectivity.

    Elements are numbered ``e = ix + nx * iy``; ``x[e, i, j]`` is the node at
    reference coordinates (xi_i, eta_j). ``neighbors[e, s]`` is the element
    across side s, or -1 on the domain boundary. Exterior faces on domain
    side ``SIDES[s]`` are always element side s.
    """

    nx: int
    ny: int
    degree: int
    domain: Domain
    periodic: Tuple[bool, bool]
    x: np.ndarray
    y: np.ndarray
    neighbors: np.ndarray

    @property
    def n_elements(self):
        # type: () -> int
        return self.nx * self.ny

    def boundary_elements(self, side):
        # type: (int) -> np.ndarray
        return np.nonzero(self.neighbors[:, side] < 0)[0]

    def boundary_faces(self):
        # type: () -> Dict[str, np.ndarray]
        faces = {}
        for s, name in enumerate(SIDES):
            elements = self.boundary_elements(s)
            if len(elements):
                faces[name] = elements
        return faces

    def face(self, element, side):
        # type: (int, int) -> FaceId
        return FaceId(element=element, direction=1 + side // 2, side="R" if side % 2 else "L")


@dataclass(frozen=True)
class ElementGeometry:
    """Jacobian, contravariant metric terms and face data per element.

    ``ja1``/``ja2`` have shape (ne, n, n, 2). Face arrays are indexed
    ``[e, side, k]`` with k the tangential node index; normals are the
    outward unit normals and ``scaling`` is |Ja^i| at the face points.
    """

    J: np.ndarray
    ja1: np.ndarray
    ja2: np.ndarray
    normals: np.ndarray
    scaling: np.ndarray
    x: np.ndarray
    y: np.ndarray

    @property
    def n_elements(self):
        # type: () -> int
        return self.J.shape[0]


def _check_counts(nx, ny):
    # type: (int, int) -> None
    for name, value in (("nx", nx), ("ny", ny)):
        if not isinstance(value, (int, np.integer)) or isinstance(value, bool) or value < 1:
            raise ConfigurationError("Element count must be a positive integer", f"{name} = {value!r}")


def _check_domain(domain):
    # type: (Sequence[float]) -> Domain
    if len(domain) != 4:
        raise ConfigurationError("Domain needs four bounds", repr(domain))
    xmin, xmax, ymin, ymax = (float(v) for v in domain)
    if not (xmin < xmax and ymin < ymax):
        raise ConfigurationError("Empty domain", repr(domain))
    return xmin, xmax, ymin, ymax


def _connectivity(nx, ny, periodic):
    # type: (int, int, Tuple[bool, bool]) -> np.ndarray
    neighbors = -np.ones((nx * ny, 4), dtype=int)
    for iy in range(ny):
        for ix in range(nx):
            e = ix + nx * iy
            if ix > 0 or periodic[0]:
                neighbors[e, LEFT] = (ix - 1) % nx + nx * iy
            if ix < nx - 1 or periodic[0]:
                neighbors[e, RIGHT] = (ix + 1) % nx + nx * iy
            if iy > 0 or periodic[1]:
                neighbors[e, BOTTOM] = ix + nx * ((iy - 1) % ny)
            if iy < ny - 1 or periodic[1]:
                neighbors[e, TOP] = ix + nx * ((iy + 1) % ny)
    return neighbors


def _global_lines(lo, hi, n_cells, nodes):
    # type: (float, float, int, np.ndarray) -> np.ndarray
    # shared interface points are stored once so both sides read identical bits
    N = len(nodes) - 1
    h = (hi - lo) / n_cells
    line = np.empty(n_cells * N + 1)
    for c in range(n_cells):
        line[c * N:(c + 1) * N + 1] = lo + h * (c + 0.5 * (nodes + 1.0))
    line[-1] = hi
    return line


def make_mapped_mesh(nx, ny, basis, mapping=None, domain=(-1.0, 1.0, -1.0, 1.0), periodic=(True, True)):
    # type: (int, int, Basis1D, Optional[Mapping], Sequence[float], Tuple[bool, bool]) -> CurvilinearMesh
    """Tensor mesh of ``domain`` pushed through ``mapping`` at the GLL points."""
    _check_counts(nx, ny)
    dom = _check_domain(domain)
    N = basis.degree

    xs = _global_lines(dom[0], dom[1], nx, basis.nodes)
    ys = _global_lines(dom[2], dom[3], ny, basis.nodes)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    if mapping is not None:
        X, Y = mapping(X, Y)

    x = np.empty((nx * ny, N + 1, N + 1))
    y = np.empty_like(x)
    for iy in range(ny):
        for ix in range(nx):
            e = ix + nx * iy
            x[e] = X[ix * N:ix * N + N + 1, iy * N:iy * N + N + 1]
            y[e] = Y[ix * N:ix * N + N + 1, iy * N:iy * N + N + 1]

    return CurvilinearMesh(nx=nx, ny=ny, degree=N, domain=dom, periodic=(bool(periodic[0]), bool(periodic[1])),
                           x=x, y=y, neighbors=_connectivity(nx, ny, periodic))


def make_cartesian_mesh(nx, ny, domain, basis, periodic=(True, True)):
    # type: (int, int, Sequence[float], Basis1D, Tuple[bool, bool]) -> CurvilinearMesh
    return make_mapped_mesh(nx, ny, basis, None, domain, periodic)


def sinusoidal_warp(amplitude):
    # type: (float) -> Mapping
    def warp(x, y):
        bump = amplitude * np.sin(np.pi * x) * np.sin(np.pi * y)
        return x + bump, y + bump

    return warp


def make_warped_mesh(nx, ny, amplitude, basis, domain=(-1.0, 1.0, -1.0, 1.0), periodic=(True, True)):
    # type: (int, int, float, Basis1D, Sequence[float], Tuple[bool, bool]) -> CurvilinearMesh
    """Cartesian mesh perturbed by x -> x + a sin(pi x) sin(pi y) in both
    coordinates. Raises GeometryError when the map folds.
    """
    mesh = make_mapped_mesh(nx, ny, basis, sinusoidal_warp(float(amplitude)), domain, periodic)
    compute_metrics(mesh, basis)
    return mesh


def d_xi(D, values):
    # type: (np.ndarray, np.ndarray) -> np.ndarray
    return np.einsum("ik,ek...->ei...", D, values)


def d_eta(D, values):
    # type: (np.ndarray, np.ndarray) -> np.ndarray
    return np.einsum("jk,eik...->eij...", D, values)


def reference_divergence(D, flux1, flux2):
    # type: (np.ndarray, np.ndarray, np.ndarray) -> np.ndarray
    """d/dxi of the first contravariant component plus d/deta of the second."""
    return d_xi(D, flux1) + d_eta(D, flux2)


def reference_gradient(D, values):
    # type: (np.ndarray, np.ndarray) -> Tuple[np.ndarray, np.ndarray]
    return d_xi(D, values), d_eta(D, values)


def face_traces(field):
    # type: (np.ndarray) -> np.ndarray
    """Nodal values on the four sides, shape (ne, 4, n, ...)."""
    return np.stack([field[:, 0], field[:, -1], field[:, :, 0], field[:, :, -1]], axis=1)


def gather_outer(mesh, traces):
    # type: (CurvilinearMesh, np.ndarray) -> np.ndarray
    """Traces seen from across each face; boundary slots copy the inner
    trace and are expected to be overwritten by the boundary treatment.
    """
    nb = mesh.neighbors
    interior = nb >= 0
    elements = np.where(interior, nb, np.arange(mesh.n_elements)[:, None])
    sides = np.where(interior, OPPOSITE[None, :], np.arange(4)[None, :])
    return traces[elements, sides]


def compute_metrics(mesh, basis):
    # type: (CurvilinearMesh, Basis1D) -> ElementGeometry
    D = basis.D
    x_xi, x_eta = reference_gradient(D, mesh.x)
    y_xi, y_eta = reference_gradient(D, mesh.y)

    J = x_xi * y_eta - x_eta * y_xi
    bad = np.argwhere(J <= 0.0)
    if len(bad):
        e = int(bad[0][0])
        raise GeometryError("Non-positive Jacobian", f"element {e}, min J = {J[e].min():.3e}", element=e)

    ja1 = np.stack([y_eta, -x_eta], axis=-1)
    ja2 = np.stack([-y_xi, x_xi], axis=-1)

    face_vectors = np.stack([-ja1[:, 0], ja1[:, -1], -ja2[:, :, 0], ja2[:, :, -1]], axis=1)
    scaling = np.linalg.norm(face_vectors, axis=-1)
    normals = face_vectors / scaling[..., None]

    return ElementGeometry(J=J, ja1=ja1, ja2=ja2, normals=normals, scaling=scaling, x=mesh.x, y=mesh.y)


def metric_identity_residual(geometry, basis):
    # type: (ElementGeometry, Basis1D) -> float
    residual = reference_divergence(basis.D, geometry.ja1, geometry.ja2)
    return float(np.max(np.abs(residual)))


def element_areas(geometry, basis):
    # type: (ElementGeometry, Basis1D) -> np.ndarray
    w2 = np.outer(basis.weights, basis.weights)
    return np.einsum("ij,eij->e", w2, geometry.J)


def write_field(path, geometry, field, names):
    # type: (str, ElementGeometry, np.ndarray, Sequence[str]) -> None
    """Plain-text dump, one row ``e i j x y <state...>`` per solution point."""
    ne, n = field.shape[0], field.shape[1]
    e, i, j = np.meshgrid(np.arange(ne), np.arange(n), np.arange(n), indexing="ij")
    columns = [e.ravel(), i.ravel(), j.ravel(), geometry.x.ravel(), geometry.y.ravel()]
    columns += [field[..., v].ravel() for v in range(field.shape[-1])]
    table = np.column_stack(columns)
    fmt = ["%d", "%d", "%d"] + ["%.16e"] * (table.shape[1] - 3)
    np.savetxt(path, table, fmt=fmt, header=" ".join(["e", "i", "j", "x", "y"] + list(names)))
    logger.debug("wrote field dump %s", path)
