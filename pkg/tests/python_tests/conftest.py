import pytest
from fractions import Fraction
from hypothesis import strategies as st

from lattice_round import make_distribution
from .config import TestConfig

def pytest_addoption(parser):
    """Register the --run-perf command line option."""
    parser.addoption(
        "--run-perf", action="store_true", default=False, help="run performance benchmark tests"
    )

def pytest_configure(config):
    """Register custom markers."""
    config.addinivalue_line("markers", "benchmark: mark test as a performance benchmark")

def pytest_collection_modifyitems(config, items):
    """
    Skip tests marked with @pytest.mark.benchmark unless --run-perf is provided.
    """
    if config.getoption("--run-perf"):
        # If the flag is present, run everything (including benchmarks)
        return

    skip_benchmark = pytest.mark.skip(reason="need --run-perf option to run")
    for item in items:
        if "benchmark" in item.keywords:
            item.add_marker(skip_benchmark)


@st.composite
def lattice_distributions(draw, q=None, max_q=TestConfig.FUZZ_MAX_Q):
    """Random distribution on (1/q)Z: distinct k in [-50, 50], positive integer weights normalized exactly."""
    if q is None:
        q = draw(st.integers(min_value=1, max_value=max_q))
    ks = draw(st.lists(
        st.integers(min_value=-TestConfig.FUZZ_MAX_ABS_K, max_value=TestConfig.FUZZ_MAX_ABS_K),
        min_size=1,
        max_size=TestConfig.FUZZ_MAX_SUPPORT,
        unique=True,
    ))
    weights = draw(st.lists(
        st.integers(min_value=1, max_value=TestConfig.FUZZ_MAX_WEIGHT),
        min_size=len(ks),
        max_size=len(ks),
    ))
    total = sum(weights)
    return make_distribution(q, [(k, Fraction(w, total)) for k, w in zip(ks, weights)])
