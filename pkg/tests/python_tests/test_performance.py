"""
Performance Regression Suite.

To run: pytest tests/python_tests/test_performance.py --run-perf
"""
import pytest
import math
import os
import statistics
import time
import warnings

import psutil

from lattice_round.config import SweepConfig
from lattice_round.sheppard import sweep, sweep_grid
from .config import TestConfig

@pytest.mark.benchmark
def test_sheppard_sweep_throughput():
    """
    Measures the full Sheppard sweep (every grid point, exact bound check).

    Behavior:
    - ALWAYS PASSES unless a bound is violated.
    - WARNS with throughput and resident memory.
    """

    iterations = TestConfig.PERF_ITERATIONS
    threshold = TestConfig.PERF_THRESHOLD_POINTS_PER_SEC
    config = SweepConfig(chunk_size=256)
    points = len(sweep_grid(config))
    process = psutil.Process(os.getpid())

    throughputs = []
    peak_rss = 0

    print(f"\nRunning {iterations} iterations of the full sweep ({points} points)...")

    for _ in range(iterations):
        start = time.perf_counter()
        violations = 0
        for report in sweep(config):
            if report.bound_holds is False:
                violations += 1
        elapsed = time.perf_counter() - start
        peak_rss = max(peak_rss, process.memory_info().rss)
        assert violations == 0, f"{violations} bound violations in the full sweep"

        if elapsed > 0:
            throughputs.append(points / elapsed)

    if not throughputs:
        warnings.warn("Benchmark failed to produce valid timing data.", UserWarning)
        return

    mean_throughput = statistics.mean(throughputs)
    margin_of_error = (
        1.96 * statistics.stdev(throughputs) / math.sqrt(iterations) if len(throughputs) > 1 else 0.0
    )
    rss_mb = peak_rss / 2 ** 20

    # Report results to stdout (visible with pytest -s)
    print(f"\n--- Benchmark Results (N={iterations}) ---")
    print(f"Throughput: {mean_throughput:.1f} ± {margin_of_error:.1f} points/sec")
    print(f"Threshold:  {threshold:.1f} points/sec")
    print(f"Peak RSS:   {rss_mb:.1f} MiB")

    # Always warn
    warnings.warn(
        f"\nPERFORMANCE RESULTS (n={iterations}):\n"
        f"Current: {mean_throughput:.1f} ± {margin_of_error:.1f} points/sec\n"
        f"Target:  {threshold:.1f} points/sec\n"
        f"Peak RSS: {rss_mb:.1f} MiB",
        UserWarning
    )
