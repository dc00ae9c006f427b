"""One pass/fail line per acceptance criterion, at the tolerances pinned in
:mod:`hgelfand.checks`.  The lines are repeated in the terminal summary."""

import pytest

from conftest import ACCEPTANCE_LINES
from hgelfand.checks import SUITES, SUPPLEMENTARY

# criterion -> (tolerance, time budget in seconds); the checks must report these values
PINNED = {
    "integrality": (1, 0.0, 10.0),
    "sublaplacian": (2, 0.0, 1.0),
    "spherical": (3, 1.0, 30.0),
    "eigenfunction": (4, 1.0, 30.0),
    "roundtrip": (5, 1e-6, 120.0),
    "multiplier": (6, 1.0, 180.0),
    "development": (7, 1e-5, 120.0),
    "interpolation": (8, 1e-6, 60.0),
    "extension": (9, 1.0, 300.0),
    "quotient": (10, 1e-8, 60.0),
    "generators": (11, 0.0, 30.0),
    "roundtrip_adequate": (5, 1e-6, 120.0),
}


@pytest.mark.slow
@pytest.mark.parametrize("name", list(SUITES) + list(SUPPLEMENTARY))
def test_criterion(name):
    result = {**SUITES, **SUPPLEMENTARY}[name]()
    line = result.line()
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert (result.criterion, result.tolerance, result.budget) == PINNED[name]
    assert result.passed, f"{line}\n{result.detail}"
