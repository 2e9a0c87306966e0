"""
High Priority Test Suite: Core Correctness, Oracle Equivalence, & Isolation.
"""

import pytest
import pickle
import numpy as np
from concurrent.futures import ThreadPoolExecutor, as_completed
from fractions import Fraction
from hypothesis import given, settings, strategies as st

from lattice_round import (
    RoundingMode,
    Tolerances,
    charfun_rounded,
    convolve,
    hh_q,
    make_distribution,
    mean_rounded,
    moment_rounded,
    negate,
    round_distribution,
    second_moment_rounded,
)
from lattice_round.charfun import charfun_rounded_oracle, charfun_rounded_shifted
from lattice_round.config import SweepConfig, VerifyConfig, get_active_tolerances
from lattice_round.lattice import exact_moment, refine, translate
from lattice_round.moments import moment_rounded_shifted, variance_rounded
from lattice_round.sheppard import sweep
from lattice_round.testing import run_all, summarize
from lattice_round.testing.assertions import charfun_grid, duality_residuals
from lattice_round.trigpoly import from_distribution, multiply
from .config import TestConfig
from .conftest import lattice_distributions

MODES = list(RoundingMode)

# --- Helpers ---

def scaled(report):
    return report.residual / max(1.0, abs(float(report.oracle_value)))

# --- 1. Property-Based Oracle Equivalence (Hypothesis) ---

@given(d=lattice_distributions())
@settings(max_examples=TestConfig.FUZZ_EXAMPLES, deadline=None)
def test_mean_matches_oracle_hypothesis(d):
    """Property: the closed-form mean equals E[M(X)] computed by brute force, all four modes."""
    for mode in MODES:
        report = mean_rounded(d, mode)
        assert scaled(report) <= TestConfig.MEAN_TOLERANCE, f"{mode.value}: {report}"


@given(d=lattice_distributions())
@settings(max_examples=TestConfig.FUZZ_EXAMPLES, deadline=None)
def test_second_moment_matches_oracle_hypothesis(d):
    for mode in MODES:
        report = second_moment_rounded(d, mode)
        assert scaled(report) <= TestConfig.MOMENT_TOLERANCE, f"{mode.value}: {report}"
        var = variance_rounded(d, mode)
        assert var.passed()


@given(d=lattice_distributions())
@settings(max_examples=TestConfig.FUZZ_EXAMPLES, deadline=None)
def test_general_moments_match_oracle_and_closed_form(d):
    """
    Property: derivative-of-trig-polynomial moments agree with the oracle for r = 1..4
    and with the closed-form path for r = 1, 2.
    """
    for mode in MODES:
        closed = {1: mean_rounded(d, mode), 2: second_moment_rounded(d, mode)}
        for r in range(1, 5):
            report = moment_rounded(d, mode, r)
            assert scaled(report) <= TestConfig.MOMENT_TOLERANCE, f"{mode.value} r={r}"
            if r in closed:
                gap = abs(report.formula_value - closed[r].formula_value)
                assert gap <= TestConfig.PATH_AGREEMENT_TOLERANCE * max(1.0, abs(float(report.oracle_value)))


@given(d=lattice_distributions(), m=st.sampled_from([-3, 1, 7]), r=st.integers(min_value=1, max_value=3))
@settings(max_examples=30, deadline=None)
def test_moment_shift_invariance_hypothesis(d, m, r):
    """Any full residue system of j gives the same moment."""
    for mode in MODES:
        base = moment_rounded(d, mode, r)
        shifted = moment_rounded_shifted(d, mode, r, m)
        assert abs(base.formula_value - shifted.formula_value) <= 1e-9 * max(1.0, abs(base.formula_value))


@given(d=lattice_distributions())
@settings(max_examples=TestConfig.FUZZ_EXAMPLES, deadline=None)
def test_charfun_matches_oracle_hypothesis(d):
    t = charfun_grid(d.q, TestConfig.CHARFUN_GRID_POINTS)
    for mode in MODES:
        formula = charfun_rounded(d, mode, t)
        oracle = charfun_rounded_oracle(d, mode, t)
        assert np.max(np.abs(formula - oracle)) <= TestConfig.CHARFUN_TOLERANCE
        for m in (-3, 1, d.q):
            shifted = charfun_rounded_shifted(d, mode, t, m)
            assert np.max(np.abs(shifted - formula)) <= TestConfig.CHARFUN_TOLERANCE


@given(d=lattice_distributions())
@settings(max_examples=TestConfig.FUZZ_EXAMPLES, deadline=None)
def test_ceil_charfun_is_reflected_floor_charfun(d):
    """φ of ceil(X) at t equals φ of floor(-X) at -t, with no conjugation."""
    t = charfun_grid(d.q, 32)
    ceil_values = charfun_rounded(d, RoundingMode.CEIL, t)
    mirrored = charfun_rounded(negate(d), RoundingMode.FLOOR, -t)
    assert np.max(np.abs(ceil_values - mirrored)) <= TestConfig.CHARFUN_TOLERANCE


@given(d=lattice_distributions())
@settings(max_examples=TestConfig.FUZZ_EXAMPLES, deadline=None)
def test_duality_laws_are_exact_hypothesis(d):
    """Rounding relations hold as exact distribution equalities (zero total variation)."""
    for name, tv in duality_residuals(d):
        assert tv == 0, name
    assert round_distribution(d, RoundingMode.NEAREST_UP) == round_distribution(
        translate(refine(d, 2), d.q), RoundingMode.FLOOR
    )


@given(d=lattice_distributions(), shift=st.integers(min_value=-5, max_value=5))
@settings(max_examples=30, deadline=None)
def test_integer_shift_commutes_with_rounding(d, shift):
    """M(X + n) = M(X) + n for integers n, in every mode."""
    shifted = translate(d, shift * d.q)
    for mode in MODES:
        expected = exact_moment(round_distribution(d, mode), 1) + shift
        assert exact_moment(round_distribution(shifted, mode), 1) == expected


# --- 2. Trig Polynomial & Charfun Structure (Hypothesis) ---

def assert_poly_close(a, b, tol=1e-12):
    da, db = a.as_dict(), b.as_dict()
    assert a.base_q == b.base_q
    for n in set(da) | set(db):
        assert abs(da.get(n, 0j) - db.get(n, 0j)) <= tol, f"frequency {n}"


fine_lattice = st.integers(min_value=10, max_value=TestConfig.FUZZ_MAX_Q).flatmap(lambda q: lattice_distributions(q=q))
same_lattice_triples = st.integers(min_value=1, max_value=6).flatmap(
    lambda q: st.tuples(lattice_distributions(q=q), lattice_distributions(q=q), lattice_distributions(q=q))
)
t_values = st.floats(min_value=-10.0, max_value=10.0, allow_nan=False)


@given(d=fine_lattice, t=t_values)
@settings(max_examples=TestConfig.FUZZ_EXAMPLES, deadline=None)
def test_trig_derivative_matches_central_difference(d, t):
    """Frequencies stay within 5 here, so the O(h²) difference error is far below the bound."""
    phi = from_distribution(d)
    h = 1e-5
    numeric = (phi.evaluate(t + h) - phi.evaluate(t - h)) / (2 * h)
    assert abs(phi.differentiate(1).evaluate(t) - numeric) <= 1e-6


@given(triple=same_lattice_triples)
@settings(max_examples=TestConfig.FUZZ_EXAMPLES, deadline=None)
def test_trig_multiply_is_commutative_and_associative(triple):
    a, b, c = (from_distribution(d) for d in triple)
    assert_poly_close(multiply(a, b), multiply(b, a))
    assert_poly_close(multiply(multiply(a, b), c), multiply(a, multiply(b, c)))


@given(triple=same_lattice_triples)
@settings(max_examples=TestConfig.FUZZ_EXAMPLES, deadline=None)
def test_trig_product_is_charfun_of_convolution(triple):
    a, b, _ = triple
    assert_poly_close(multiply(from_distribution(a), from_distribution(b)), from_distribution(convolve(a, b)))


@given(d=lattice_distributions(), t=t_values)
@settings(max_examples=TestConfig.FUZZ_EXAMPLES, deadline=None)
def test_trig_reflection_and_period(d, t):
    phi = from_distribution(d)
    assert from_distribution(negate(d)).as_dict() == phi.reflect().as_dict()
    assert abs(phi.evaluate(t + 2 * np.pi * d.q) - phi.evaluate(t)) <= 1e-9


@given(d=lattice_distributions())
@settings(max_examples=TestConfig.FUZZ_EXAMPLES, deadline=None)
def test_rounded_charfun_is_hermitian_periodic_and_bounded(d):
    t = charfun_grid(d.q, 32)
    for mode in MODES:
        values = charfun_rounded(d, mode, t)
        assert np.max(np.abs(charfun_rounded(d, mode, -t) - np.conj(values))) <= TestConfig.CHARFUN_TOLERANCE
        assert np.max(np.abs(charfun_rounded(d, mode, t + 2 * np.pi) - values)) <= TestConfig.CHARFUN_TOLERANCE
        assert np.max(np.abs(values)) <= 1 + 1e-12


@given(q=st.integers(min_value=0, max_value=25).map(lambda n: 2 * n + 1), t=t_values)
@settings(max_examples=TestConfig.FUZZ_EXAMPLES, deadline=None)
def test_centered_kernel_is_real_and_even_for_odd_q(q, t):
    value = hh_q(q, t)
    assert abs(value.imag) <= 1e-12
    assert abs(hh_q(q, -t) - value) <= 1e-12


@given(d=lattice_distributions())
@settings(max_examples=TestConfig.FUZZ_EXAMPLES, deadline=None)
def test_mean_is_bracketed_by_floor_and_ceil(d):
    """E floor(X) <= E X <= E ceil(X), exactly."""
    floor_mean = exact_moment(round_distribution(d, RoundingMode.FLOOR), 1)
    ceil_mean = exact_moment(round_distribution(d, RoundingMode.CEIL), 1)
    assert floor_mean <= exact_moment(d, 1) <= ceil_mean
    assert ceil_mean - floor_mean <= 1


# --- 3. Concurrency & Isolation Tests ---

def _moment_under_tolerance(tol: float) -> float:
    with Tolerances(moment=tol):
        d = make_distribution(3, [(0, "1/3"), (1, "1/3"), (5, "1/3")])
        report = moment_rounded(d, RoundingMode.FLOOR, 2)
        assert report.passed()
        return get_active_tolerances().moment

def test_thread_isolation_contextvars():
    """Verifies each thread sees only its own active Tolerances."""
    workers = 10
    inputs = [10.0 ** -(i + 1) for i in range(workers)]

    with ThreadPoolExecutor(max_workers=workers) as executor:
        future_to_input = {executor.submit(_moment_under_tolerance, t): t for t in inputs}
        results = []
        for future in as_completed(future_to_input):
            assert future.result() == future_to_input[future], "Thread isolation failed."
            results.append(future.result())

    assert sorted(results) == sorted(inputs)
    assert get_active_tolerances() == Tolerances()


def test_parallel_sweep_matches_serial():
    """A process-pool sweep yields the same reports in the same order as the in-process one."""
    serial = SweepConfig(q_values=(3, 5, 7), n_values=(2,), s_max=3, chunk_size=4)
    parallel = SweepConfig(q_values=(3, 5, 7), n_values=(2,), s_max=3, chunk_size=4, workers=2)
    a = list(sweep(serial))
    b = list(sweep(parallel))
    assert [(r.q, r.s) for r in a] == [(r.q, r.s) for r in b]
    assert [r.exact_error for r in a] == [r.exact_error for r in b]


# --- 4. Serialization & Exactness ---

def test_distribution_pickle_round_trip():
    d = make_distribution(6, [(-7, "1/10"), (0, "3/5"), (11, "3/10")])
    loaded = pickle.loads(pickle.dumps(d))
    assert loaded == d
    assert hash(loaded) == hash(d)
    assert loaded.pmf[0] == Fraction(3, 5)


def test_oracle_is_exact_rational():
    d = make_distribution(3, [(7, "1")])
    report = moment_rounded(d, RoundingMode.FLOOR, 3)
    assert report.oracle_value == Fraction(8)
    assert isinstance(report.oracle_value, Fraction)


# --- 5. Full Suite ---

def test_run_all_default_config_passes():
    results = run_all(VerifyConfig())
    summary = summarize(results)
    failures = [r.label for r in results if not r.passed]
    assert summary.all_passed, f"Failed checks: {failures[:10]}"
    assert summary.total == len(results) > 0


def test_run_all_is_deterministic():
    config = VerifyConfig(
        samples=5, identity_q_max=10, e0_q_max=3, kernel_q_max=3,
        sheppard=SweepConfig(q_values=(3, 5), s_max=2, samples=4),
    )
    first = run_all(config)
    second = run_all(config)
    assert [(r.label, r.residual, r.detail) for r in first] == [(r.label, r.residual, r.detail) for r in second]
    assert [r.sort_key for r in first] == sorted(r.sort_key for r in first)


@pytest.mark.benchmark
def test_acceptance_size_verify_run():
    """1000 seeded distributions through every moment check, at least 300 through the charfun checks, full Sheppard grid."""
    config = VerifyConfig(
        seed=TestConfig.SEED,
        samples=TestConfig.ACCEPTANCE_MOMENT_SAMPLES,
        sheppard=SweepConfig(),
    )
    results = run_all(config)
    failures = [r.label for r in results if not r.passed]
    assert not failures, f"Failed checks: {failures[:10]}"

    counts = {}
    for result in results:
        counts[result.name] = counts.get(result.name, 0) + 1
    assert counts["moment_paths"] == TestConfig.ACCEPTANCE_MOMENT_SAMPLES
    assert counts["duality"] == TestConfig.ACCEPTANCE_MOMENT_SAMPLES
    assert counts["charfun_oracle"] >= TestConfig.ACCEPTANCE_CHARFUN_SAMPLES
    assert counts["example_q2"] >= TestConfig.ACCEPTANCE_CHARFUN_SAMPLES
    assert counts["sheppard_bound"] == 15 * (6 ** 2 + 6 ** 3)
