# Run configuration: a line based ``key = value`` grammar with [section]
# headers, validated against one schema table into frozen dataclasses.
import logging
from dataclasses import dataclass
from dataclasses import field
from dataclasses import replace
from typing import Any
from typing import Callable
from typing import Dict
from typing import List
from typing import Optional
from typing import Tuple

from .basis import MAX_DEGREE
from .basis import MIN_DEGREE
from .boundary import BoundaryKind
from .errors import ConfigurationError
from .mesh import SIDES

logger = logging.getLogger(__name__)

COMMENT_CHARS = ("#", ";")


@dataclass(frozen=True)
class EquationConfig:
    system: str
    case: str = "wave"
    velocity: Tuple[float, float] = (1.5, 1.0)
    nu: float = 5.0e-2
    gamma: float = 1.4
    mu: float = 1.0e-3
    prandtl: float = 0.7
    mach: float = 0.1
    constant: float = 1.0
    density: float = 1.0
    flow_velocity: Tuple[float, float] = (0.3, 0.2)
    pressure: Optional[float] = None
    manufactured_c: float = 2.0
    manufactured_a: float = 0.1
    dissipation: str = "d2"


@dataclass(frozen=True)
class MeshConfig:
    nx: int
    ny: int
    degree: int
    kind: str = "cartesian"
    domain: Tuple[float, float, float, float] = (-1.0, 1.0, -1.0, 1.0)
    amplitude: float = 0.05


@dataclass(frozen=True)
class TimeConfig:
    final_time: float
    mode: str = "adaptive"
    atol: float = 1.0e-8
    rtol: float = 1.0e-8
    gains: Tuple[float, float, float] = (0.6, -0.2, 0.0)
    limiter: bool = True
    max_rejections: int = 10
    cfl_a: float = 0.1
    cfl_v: float = 0.1
    initial_safety: float = 0.5
    max_cfl: float = 0.5
    max_steps: Optional[int] = None


@dataclass(frozen=True)
class BoundarySpec:
    kind: str = "periodic"
    velocity: Optional[Tuple[float, float]] = None
    temperature: Optional[float] = None


@dataclass(frozen=True)
class BoundaryConfig:
    left: BoundarySpec = field(default_factory=BoundarySpec)
    right: BoundarySpec = field(default_factory=BoundarySpec)
    bottom: BoundarySpec = field(default_factory=BoundarySpec)
    top: BoundarySpec = field(default_factory=BoundarySpec)

    def sides(self):
        # type: () -> Dict[str, BoundarySpec]
        return {name: getattr(self, name) for name in SIDES}

    @property
    def periodic(self):
        # type: () -> Tuple[bool, bool]
        return self.left.kind == "periodic", self.bottom.kind == "periodic"


@dataclass(frozen=True)
class OutputConfig:
    directory: Optional[str] = None
    dump_every: int = 0
    log_steps: bool = False


@dataclass(frozen=True)
class RunConfig:
    equation: EquationConfig
    mesh: MeshConfig
    time: TimeConfig
    boundary: BoundaryConfig = field(default_factory=BoundaryConfig)
    output: OutputConfig = field(default_factory=OutputConfig)

    @property
    def degree(self):
        # type: () -> int
        return self.mesh.degree

    def with_resolution(self, nx, degree=None):
        # type: (int, Optional[int]) -> RunConfig
        """Same run on an nx x nx mesh (optionally at another degree)."""
        mesh = replace(self.mesh, nx=nx, ny=nx, degree=self.mesh.degree if degree is None else degree)
        return replace(self, mesh=mesh)


# value converters; each raises ValueError with a readable message


def _text(value):
    # type: (str) -> str
    if not value:
        raise ValueError("empty value")
    return value


def _int(value):
    # type: (str) -> int
    try:
        return int(value)
    except ValueError:
        raise ValueError(f"expected an integer, got {value!r}")


def _float(value):
    # type: (str) -> float
    try:
        return float(value)
    except ValueError:
        raise ValueError(f"expected a number, got {value!r}")


def _floats(count):
    # type: (int) -> Callable[[str], Tuple[float, ...]]
    def convert(value):
        parts = [p for p in value.replace(",", " ").split() if p]
        if len(parts) != count:
            raise ValueError(f"expected {count} numbers, got {value!r}")
        return tuple(_float(p) for p in parts)

    return convert


def _bool(value):
    # type: (str) -> bool
    lowered = value.lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off"):
        return False
    raise ValueError(f"expected on/off, got {value!r}")


def _choice(*options):
    # type: (str) -> Callable[[str], str]
    def convert(value):
        if value not in options:
            raise ValueError(f"expected one of {', '.join(options)}, got {value!r}")
        return value

    return convert


def _positive(convert):
    def check(value):
        result = convert(value)
        if not result > 0:
            raise ValueError(f"must be positive, got {value!r}")
        return result

    return check


def _non_negative(convert):
    def check(value):
        result = convert(value)
        if result < 0:
            raise ValueError(f"must not be negative, got {value!r}")
        return result

    return check


def _degree(value):
    # type: (str) -> int
    degree = _int(value)
    if not MIN_DEGREE <= degree <= MAX_DEGREE:
        raise ValueError(f"degree must be between {MIN_DEGREE} and {MAX_DEGREE}, got {degree}")
    return degree


_BOUNDARY_KINDS = tuple(kind.name for kind in BoundaryKind)

REQUIRED = object()

# section -> key -> (converter, default or REQUIRED)
SCHEMA = {
    "equation": {
        "system": (_choice("advection_diffusion", "navier_stokes"), REQUIRED),
        "case": (_choice("wave", "eriksson_johnson", "free_stream", "manufactured", "cavity"), "wave"),
        "velocity": (_floats(2), (1.5, 1.0)),
        "nu": (_non_negative(_float), 5.0e-2),
        "gamma": (_positive(_float), 1.4),
        "mu": (_non_negative(_float), 1.0e-3),
        "prandtl": (_positive(_float), 0.7),
        "mach": (_positive(_float), 0.1),
        "constant": (_float, 1.0),
        "density": (_positive(_float), 1.0),
        "flow_velocity": (_floats(2), (0.3, 0.2)),
        "pressure": (_positive(_float), None),
        "manufactured_c": (_positive(_float), 2.0),
        "manufactured_a": (_float, 0.1),
        "dissipation": (_choice("d2", "d1"), "d2"),
    },
    "mesh": {
        "kind": (_choice("cartesian", "warped"), "cartesian"),
        "nx": (_positive(_int), REQUIRED),
        "ny": (_positive(_int), REQUIRED),
        "degree": (_degree, REQUIRED),
        "domain": (_floats(4), (-1.0, 1.0, -1.0, 1.0)),
        "amplitude": (_float, 0.05),
    },
    "time": {
        "final_time": (_non_negative(_float), REQUIRED),
        "mode": (_choice("adaptive", "fixed"), "adaptive"),
        "atol": (_positive(_float), 1.0e-8),
        "rtol": (_positive(_float), 1.0e-8),
        "gains": (_floats(3), (0.6, -0.2, 0.0)),
        "limiter": (_bool, True),
        "max_rejections": (_positive(_int), 10),
        "cfl_a": (_positive(_float), 0.1),
        "cfl_v": (_positive(_float), 0.1),
        "initial_safety": (_positive(_float), 0.5),
        "max_cfl": (_positive(_float), 0.5),
        "max_steps": (_positive(_int), None),
    },
    "boundary": dict(
        [(side, (_choice(*_BOUNDARY_KINDS), "periodic")) for side in SIDES]
        + [(f"{side}_velocity", (_floats(2), None)) for side in SIDES]
        + [(f"{side}_temperature", (_positive(_float), None)) for side in SIDES]
    ),
    "output": {
        "directory": (_text, None),
        "dump_every": (_non_negative(_int), 0),
        "log_steps": (_bool, False),
    },
}  # type: Dict[str, Dict[str, Tuple[Callable[[str], Any], Any]]]

REQUIRED_SECTIONS = ("equation", "mesh", "time")


def _strip_comment(line):
    # type: (str) -> str
    for char in COMMENT_CHARS:
        position = line.find(char)
        if position >= 0:
            line = line[:position]
    return line.strip()


def _read_sections(text, problems):
    # type: (str, List[str]) -> Tuple[Dict[str, Dict[str, Tuple[int, str]]], Dict[str, int]]
    """Raw ``key -> (line, value)`` per section plus the header line of each section."""
    sections = {}  # type: Dict[str, Dict[str, Tuple[int, str]]]
    headers = {}  # type: Dict[str, int]
    current = None  # type: Optional[str]
    skipping = False

    for number, raw in enumerate(text.splitlines(), start=1):
        line = _strip_comment(raw)
        if not line:
            continue

        if line.startswith("["):
            if not line.endswith("]"):
                problems.append(f"line {number}: malformed section header {line!r}")
                current = None
                skipping = True
                continue
            name = line[1:-1].strip()
            if name not in SCHEMA:
                problems.append(f"line {number}: unknown section [{name}]")
                current = None
                skipping = True
            elif name in sections:
                problems.append(f"line {number}: duplicate section [{name}] (first on line {headers[name]})")
                current = None
                skipping = True
            else:
                sections[name] = {}
                headers[name] = number
                current = name
                skipping = False
            continue

        if "=" not in line:
            problems.append(f"line {number}: expected 'key = value', got {line!r}")
            continue
        if current is None:
            if not skipping:
                problems.append(f"line {number}: key outside of a section")
            continue

        key, value = (part.strip() for part in line.split("=", 1))
        if key not in SCHEMA[current]:
            problems.append(f"line {number}: unknown key {key!r} in [{current}]")
        elif key in sections[current]:
            problems.append(f"line {number}: duplicate key {key!r} in [{current}]")
        else:
            sections[current][key] = (number, value)

    return sections, headers


def _convert_section(name, raw, header, problems):
    # type: (str, Dict[str, Tuple[int, str]], Optional[int], List[str]) -> Dict[str, Any]
    values = {}  # type: Dict[str, Any]
    for key, (convert, default) in SCHEMA[name].items():
        if key in raw:
            number, text = raw[key]
            try:
                values[key] = convert(text)
            except ValueError as e:
                problems.append(f"line {number}: [{name}] {key}: {e}")
        elif default is REQUIRED:
            where = f"line {header}" if header is not None else "end of input"
            problems.append(f"{where}: [{name}] missing required key {key!r}")
        else:
            values[key] = default
    return values


def _boundary_config(values, problems):
    # type: (Dict[str, Any], List[str]) -> BoundaryConfig
    specs = {}
    for side in SIDES:
        specs[side] = BoundarySpec(kind=values.get(side, "periodic"), velocity=values.get(f"{side}_velocity"),
                                   temperature=values.get(f"{side}_temperature"))
    for first, second in (("left", "right"), ("bottom", "top")):
        if (specs[first].kind == "periodic") != (specs[second].kind == "periodic"):
            problems.append(f"[boundary] {first} and {second} must both be periodic or both non-periodic")
    for side, spec in specs.items():
        if spec.kind == BoundaryKind.moving_wall_isothermal.name and spec.velocity is None:
            problems.append(f"[boundary] {side}: moving wall needs {side}_velocity")
    return BoundaryConfig(**specs)


def parse_config(text):
    # type: (str) -> RunConfig
    """Parse and validate a run configuration.

    Every problem found is collected; a ConfigurationError carries the full
    list in ``problems``.
    """
    problems = []  # type: List[str]
    sections, headers = _read_sections(text, problems)

    for name in REQUIRED_SECTIONS:
        if name not in sections:
            problems.append(f"end of input: missing section [{name}]")

    values = {name: _convert_section(name, sections.get(name, {}), headers.get(name), problems)
              for name in SCHEMA if name in sections or name not in REQUIRED_SECTIONS}

    boundary = _boundary_config(values.get("boundary", {}), problems)
    equation = values.get("equation", {})
    if equation.get("system") == "advection_diffusion":
        for side, spec in boundary.sides().items():
            if spec.kind not in ("periodic", "dirichlet_exact", "inflow_profile"):
                problems.append(f"[boundary] {side}: {spec.kind} needs the navier_stokes system")

    if problems:
        raise ConfigurationError("Invalid configuration", problems=problems)

    return RunConfig(equation=EquationConfig(**values["equation"]), mesh=MeshConfig(**values["mesh"]),
                     time=TimeConfig(**values["time"]), boundary=boundary, output=OutputConfig(**values["output"]))


def read_config(path):
    # type: (str) -> RunConfig
    try:
        with open(path, "r", encoding="utf-8") as fd:
            text = fd.read()
    except OSError as e:
        raise ConfigurationError("Cannot read configuration", str(e))
    logger.debug("read configuration %s", path)
    return parse_config(text)
