import pytest

from sdfem.harness import run_single
from sdfem.stabilization import DeltaVariant

_CASE_CACHE = {}


@pytest.fixture(scope="session")
def case_runner():
    """Memoized assemble/solve/analyze runner shared across test modules."""

    def run(N, eps, variant=DeltaVariant.STANDARD, c_star=0.5):
        key = (N, eps, variant, c_star)
        if key not in _CASE_CACHE:
            _CASE_CACHE[key] = run_single("paper-benchmark", N, eps, variant, c_star)
        return _CASE_CACHE[key]

    return run
