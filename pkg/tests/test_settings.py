# Shared run configurations for the test modules
import os

__location__ = os.path.realpath(os.path.join(os.getcwd(), os.path.dirname(__file__)))

ADVDIFF_WAVE = """
[equation]
system = advection_diffusion
case = wave
velocity = 1.5, 1.0
nu = 5e-2

[mesh]
kind = cartesian
nx = 4
ny = 4
degree = 2

[time]
final_time = 0.05
mode = fixed
cfl_a = 0.1
cfl_v = 0.1
"""

NS_FREE_STREAM = """
[equation]
system = navier_stokes
case = free_stream
mu = 1e-3

[mesh]
kind = warped
nx = 3
ny = 3
degree = 3
amplitude = 0.05

[time]
final_time = 0.02
mode = fixed
"""

NS_CAVITY = """
[equation]
system = navier_stokes
case = cavity
mu = 1e-3
prandtl = 0.7
mach = 0.1

[mesh]
nx = 4
ny = 4
degree = 2
domain = 0 1 0 1

[time]
final_time = 0.02
mode = adaptive

[boundary]
left = noslip_isothermal
right = noslip_isothermal
bottom = noslip_isothermal
top = moving_wall_isothermal
top_velocity = 1, 0
"""

NS_MANUFACTURED = """
[equation]
system = navier_stokes
case = manufactured
mu = 1e-3

[mesh]
nx = 4
ny = 4
degree = 2

[time]
final_time = 0.1
mode = fixed
cfl_a = 0.1
cfl_v = 0.1

[boundary]
bottom = noslip_adiabatic
top = noslip_adiabatic
"""

ADVDIFF_BOUNDARY_LAYER = """
[equation]
system = advection_diffusion
case = eriksson_johnson
velocity = 1, 0
nu = 5e-2

[mesh]
nx = 4
ny = 4
degree = 3
domain = -1 0 -0.5 0.5

[time]
final_time = 0.02
mode = fixed

[boundary]
left = dirichlet_exact
right = dirichlet_exact
bottom = dirichlet_exact
top = dirichlet_exact
"""


def data_path(name):
    return os.path.join(__location__, "data", name)


def config_path(name):
    return os.path.join(__location__, os.pardir, "configs", name)


def with_values(text, **overrides):
    """Replace ``key = value`` lines of a settings text."""
    lines = []
    for line in text.splitlines():
        key = line.split("=")[0].strip()
        lines.append(f"{key} = {overrides[key]}" if key in overrides else line)
    return "\n".join(lines) + "\n"
