# BR1 auxiliary gradient: q = (1/J) M grad_xi(u corrected by central
# interface values), returned in physical space with shape (ne, n, n, nvar, 2)
from typing import Tuple

import numpy as np

from .basis import Basis1D
from .mesh import BOTTOM
from .mesh import ElementGeometry
from .mesh import LEFT
from .mesh import RIGHT
from .mesh import TOP
from .mesh import face_traces
from .mesh import reference_gradient


def interface_solution_average(trace_left, trace_right):
    # type: (np.ndarray, np.ndarray) -> np.ndarray
    return 0.5 * (trace_left + trace_right)


def physical_gradient(u_xi, u_eta, geometry):
    # type: (np.ndarray, np.ndarray, ElementGeometry) -> np.ndarray
    """Map reference derivatives to the physical gradient at every node."""
    grad = geometry.ja1[..., None, :] * u_xi[..., None] + geometry.ja2[..., None, :] * u_eta[..., None]
    return grad / geometry.J[..., None, None]


def correct_reference_gradient(u_xi, u_eta, jumps, basis):
    # type: (np.ndarray, np.ndarray, np.ndarray, Basis1D) -> Tuple[np.ndarray, np.ndarray]
    """Add the correction-function derivatives weighted by face jumps.

    ``jumps`` holds (interface value - own trace) per side, shape
    (ne, 4, n, nvar).
    """
    dgL, dgR = basis.dgL, basis.dgR
    u_xi = u_xi + jumps[:, LEFT][:, None] * dgL[None, :, None, None]
    u_xi = u_xi + jumps[:, RIGHT][:, None] * dgR[None, :, None, None]
    u_eta = u_eta + jumps[:, BOTTOM][:, :, None] * dgL[None, None, :, None]
    u_eta = u_eta + jumps[:, TOP][:, :, None] * dgR[None, None, :, None]
    return u_xi, u_eta


def compute_auxiliary_gradient(fields, geometry, basis, u_star):
    # type: (np.ndarray, ElementGeometry, Basis1D, np.ndarray) -> np.ndarray
    u_xi, u_eta = reference_gradient(basis.D, fields)
    u_xi, u_eta = correct_reference_gradient(u_xi, u_eta, u_star - face_traces(fields), basis)
    return physical_gradient(u_xi, u_eta, geometry)
