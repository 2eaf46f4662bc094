# Command line entry point: solve, eoc and check-mesh.
import argparse
import logging
import sys
from typing import List
from typing import Optional

from .config import read_config
from .driver import check_mesh
from .driver import compute_error_norm
from .driver import convergence_study
from .driver import run_simulation
from .errors import ConfigurationError
from .errors import GeometryError
from .errors import LwfrError
from .version import __version__

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3


def _int_list(value):
    # type: (str) -> List[int]
    try:
        items = [int(v) for v in value.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma separated integers, got {value!r}")
    if not items:
        raise argparse.ArgumentTypeError("empty list")
    return items


def build_parser():
    # type: () -> argparse.ArgumentParser
    parser = argparse.ArgumentParser(prog="lwfr", description="Lax-Wendroff flux reconstruction solver")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="run one simulation")
    solve.add_argument("config")
    solve.add_argument("--out", default=None, help="output directory (steps.log, field dumps)")
    solve.add_argument("--threads", type=int, default=1)
    solve.add_argument("--log-steps", action="store_true", help="echo the step log to stderr")

    study = commands.add_parser("eoc", help="convergence study")
    study.add_argument("config")
    study.add_argument("--nx", type=_int_list, default=[8, 16, 32, 64])
    study.add_argument("--degrees", type=_int_list, default=[1, 2, 3, 4])
    study.add_argument("--out", default=".", help="directory for eoc.csv")
    study.add_argument("--threads", type=int, default=1)

    mesh = commands.add_parser("check-mesh", help="print metric identity residual and min J")
    mesh.add_argument("config")
    return parser


def _solve(args):
    cfg = read_config(args.config)
    result = run_simulation(cfg, out_dir=args.out, threads=args.threads, log_steps=args.log_steps)
    stats = result.statistics
    print(f"t = {result.time:.16e}  accepted = {stats.accepted}  rejected = {stats.rejected}")
    if stats.last_rate is not None:
        print(f"rms rate first = {stats.first_rate:.6e}  last = {stats.last_rate:.6e}")
    exact = result.setup.problem.exact
    if exact is not None:
        error = compute_error_norm(result.fields, exact, result.setup.geometry, result.setup.basis, t=result.time)
        print(f"l2 error = {error:.6e}")


def _eoc(args):
    cfg = read_config(args.config)
    report = convergence_study(cfg, args.nx, args.degrees, out_dir=args.out, threads=args.threads)
    for row in report.rows:
        order = "" if row.eoc is None else f"{row.eoc:.3f}"
        print(f"{row.degree} {row.nx} {row.l2_error:.6e} {order}")


def _check_mesh(args):
    report = check_mesh(read_config(args.config))
    print(f"elements = {report.n_elements}")
    print(f"metric identity residual = {report.metric_residual:.6e}")
    print(f"min J = {report.min_jacobian:.6e}")
    print(f"area = {report.area:.16e}")


COMMANDS = {"solve": _solve, "eoc": _eoc, "check-mesh": _check_mesh}


def main(argv=None):
    # type: (Optional[List[str]]) -> int
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.INFO,
                        format="%(asctime)s %(levelname)s %(name)s: %(message)s")
    try:
        COMMANDS[args.command](args)
    except (ConfigurationError, GeometryError) as e:
        problems = getattr(e, "problems", [])
        if problems:
            logger.error("invalid configuration %s", args.config)
            for problem in problems:
                print(problem, file=sys.stderr)
        else:
            logger.error("%s", e)
        return EXIT_CONFIG
    except LwfrError as e:
        logger.error("%s", e)
        return EXIT_SOLVER
    return EXIT_OK
