"""Acceptance criteria 1-13, each printed as a PASS/FAIL line.

Criterion 3 asks for a strictly decreasing sequence that the exact counts do
not produce; it is expected to fail (the detail line shows the values).
"""
import pytest

from forbcount import acceptance, estimator

_results: dict[int, acceptance.CriterionResult] = {}


def _report(capsys, res):
    with capsys.disabled():
        print("\n" + res.line() + f" ({res.elapsed:.1f}s)")


def _result(number):
    if number not in _results:
        _results[number] = acceptance.run_criterion(number)
    return _results[number]


@pytest.fixture(scope="module", autouse=True)
def cold_cache():
    estimator.clear_cache()
    yield


@pytest.mark.parametrize("number", sorted(acceptance.CRITERIA))
def test_criterion(number, capsys):
    res = _result(number)
    _report(capsys, res)
    assert res.passed, res.detail


def test_criterion_13_determinism(capsys):
    numbers = sorted(acceptance.CRITERIA)
    estimator.clear_cache()
    first = [_result(i) for i in numbers]
    res = acceptance.determinism_check(first, numbers)
    _report(capsys, res)
    assert res.passed, res.detail
