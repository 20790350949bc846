"""Acceptance checks at their stated tolerances, one pass/fail line per check."""

import time

import pytest

from bubble_reduce.acceptance import CRITERIA, DEFAULT_SEED, run_criterion
from bubble_reduce.cli import main

# Wall-clock budgets in seconds, where one is stated.
RUNTIME_LIMITS = {1: 5, 3: 10, 4: 60, 5: 120, 6: 30, 7: 60, 11: 1800}


def report_line(capsys, number, name, passed, seconds):
    with capsys.disabled():
        print(f"\ncriterion {number:2d}: {'PASS' if passed else 'FAIL'}  {name}  ({seconds:.2f} s)")


@pytest.mark.parametrize("number", sorted(CRITERIA))
def test_criterion(number, capsys):
    start = time.perf_counter()
    result = run_criterion(number, DEFAULT_SEED)
    elapsed = time.perf_counter() - start
    within_budget = elapsed < RUNTIME_LIMITS.get(number, float("inf"))
    report_line(capsys, number, result.name, result.passed and within_budget, elapsed)
    assert within_budget, f"took {elapsed:.1f} s"
    assert result.passed, result.details


def test_criterion_12_verify_all_is_byte_identical(tmp_path, capsys):
    start = time.perf_counter()
    paths = [tmp_path / f"verify{i}.json" for i in range(2)]
    for path in paths:
        main(["verify-all", "--seed", str(DEFAULT_SEED), "--out", str(path)])
    identical = paths[0].read_bytes() == paths[1].read_bytes()
    report_line(capsys, 12, "verify-all reports are byte-identical", identical, time.perf_counter() - start)
    assert identical
