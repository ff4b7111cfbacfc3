import pytest

from avagent.cli import bundled_examples
from avagent.grid import load_scenario
from avagent.psl import parse_property

BUNDLED = bundled_examples()
SCENARIOS = sorted(name for name in BUNDLED if name.endswith(".scn"))
PROPERTIES = sorted(name for name in BUNDLED if name.endswith(".psl"))


def scenario(name):
    return load_scenario(BUNDLED[name].read_text())


def prop(name):
    return parse_property(BUNDLED[name].read_text())


@pytest.fixture(scope="session")
def table1():
    return scenario("table1.scn")


@pytest.fixture(scope="session")
def damage_property():
    return prop("damage.psl")


# -- acceptance summary -------------------------------------------------------

ACCEPTANCE: dict[int, tuple[bool, str]] = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for k in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[k]
        terminalreporter.write_line(f"criterion {k}: {'PASS' if ok else 'FAIL'} - {detail}")
