# LWFR
# Single-stage Lax-Wendroff flux reconstruction for advection-diffusion
# and compressible Navier-Stokes on curvilinear quadrilateral meshes
from .basis import gll_basis  # noqa: F401
from .boundary import BoundaryKind  # noqa: F401
from .boundary import BoundaryTag  # noqa: F401
from .config import RunConfig  # noqa: F401
from .config import parse_config  # noqa: F401
from .config import read_config  # noqa: F401
from .core import Scheme  # noqa: F401
from .core import take_step  # noqa: F401
from .driver import check_mesh  # noqa: F401
from .driver import compute_error_norm  # noqa: F401
from .driver import convergence_study  # noqa: F401
from .driver import run_simulation  # noqa: F401
from .equations import EquationSet  # noqa: F401
from .equations import System  # noqa: F401
from .errors import LwfrError  # noqa: F401
from .version import __version__  # noqa: F401

__all__ = ["basis", "mesh", "equations", "problems", "gradient", "core", "time_control", "boundary", "config",
           "driver"]

__title__ = "LWFR Solver"
