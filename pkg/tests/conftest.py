import numpy as np
import pytest

from cosserat_cre.section import Material, rect_section


@pytest.fixture(scope="session")
def section():
    """10 mm x 5 mm rectangle, E = 2.08e8 Pa, rho = 3000 kg/m^3."""
    return rect_section(0.01, 0.005, Material(2.08e8, 3000.0))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def pytest_terminal_summary(terminalreporter):
    lines = []
    for key in ("passed", "failed"):
        for rep in terminalreporter.stats.get(key, []):
            if getattr(rep, "when", None) == "call":
                lines += [v for k, v in rep.user_properties if k == "acceptance"]
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
