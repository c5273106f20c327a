"""Acceptance gate: every advertised guarantee, one verdict line each.

The twelve checks live in :mod:`dqwalk.acceptance`; here each one is a
parametrized test that prints the check's verdict line (so the pytest
report shows the measured value next to its budget) and asserts it passed.
"""

import pytest

from dqwalk import acceptance


@pytest.fixture(scope="module")
def verdicts():
    return {r.number: r for r in acceptance.run_all()}


@pytest.mark.parametrize("number", sorted(acceptance.criterion_names()))
def test_criterion_passes(verdicts, number):
    result = verdicts[number]
    print(result.line())
    assert result.passed, result.line()


def test_rejects_unknown_check_number():
    with pytest.raises(ValueError, match="no acceptance check"):
        acceptance.run_criterion(0)


def test_fast_mode_skips_only_long_horizon_checks():
    results = {
        r.number: r for r in acceptance.run_all(fast=True, numbers=(3, 5, 6, 11))
    }
    assert not results[3].skipped
    assert results[5].skipped and results[6].skipped and results[11].skipped
    assert all(r.passed for r in results.values())
    assert "t <= 100" in results[3].measured


def test_verdict_lines_show_outcome():
    template = dict(
        number=7, name="demo", measured="x", tolerance="y", seconds=0.5
    )
    assert "PASS" in acceptance.CheckResult(passed=True, **template).line()
    assert "FAIL" in acceptance.CheckResult(passed=False, **template).line()
    skipped = acceptance.CheckResult(passed=True, skipped=True, **template)
    assert "SKIP" in skipped.line()
