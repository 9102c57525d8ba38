import pytest
from hypothesis import settings

from flipsim.arch import ArchConfig
from flipsim.graph import Graph
from flipsim.mapper import Mapping

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def place(g: Graph, locs, cfg: ArchConfig, num_slices: int = 1) -> Mapping:
    """Mapping from explicit (x, y[, slice]) locations, slots in vertex order."""
    full = [loc if len(loc) == 3 else (loc[0], loc[1], 0) for loc in locs]
    m = Mapping.from_locations(full, num_slices, cfg)
    m.validate(g, cfg)
    return m


@pytest.fixture
def fan_graph() -> Graph:
    """Five vertices: 0 fans out to all others, with a few back and cross arcs."""
    arcs = [(0, 1), (0, 2), (0, 3), (0, 4), (1, 0), (2, 1), (2, 3), (3, 4), (4, 0)]
    return Graph.from_edges(True, 5, [(u, v, 1) for u, v in arcs])


@pytest.fixture
def small_cfg() -> ArchConfig:
    return ArchConfig(array_width=2, array_height=2)


ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda s: int(s.split()[1])):
            terminalreporter.write_line(line)
