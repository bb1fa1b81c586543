#!/usr/bin/env python3
"""
Tests for the acceptance runner: failure capture, skipped criteria and the branch check
"""

import sys

from acceptance import AcceptanceContext, acceptance_record, check_branch, check_linear_decay, run_acceptance
from config import VerifyConfig
from errors import NoConvergence
from test_runner import run_tests


def _passes(ctx):
    return True, "fine"


def _raises_value_error(ctx):
    raise ValueError("dominant_frequency needs uniformly sampled data")


def _raises_lab_error(ctx):
    raise NoConvergence("residual 1e-3 at K=4")


def test_raising_check_is_recorded_as_failed():
    criteria = [(1, "value error", _raises_value_error), (2, "fine", _passes), (3, "lab error", _raises_lab_error)]
    results = run_acceptance(VerifyConfig(), criteria=criteria)
    assert [r.number for r in results] == [1, 2, 3]
    assert results[0].passed is False and results[0].message.startswith("ValueError:")
    assert results[1].passed is True
    assert results[2].passed is False and "NoConvergence" in results[2].message

    record = acceptance_record(results)
    assert record["complete"] is True and record["passed"] is False


def test_skipped_criteria_do_not_pass():
    # 8 is a slow criterion
    criteria = [(1, "fine", _passes), (8, "slow one", _passes)]
    results = run_acceptance(VerifyConfig(slow=False), criteria=criteria)
    assert results[1].passed is None
    record = acceptance_record(results)
    assert record["complete"] is False and record["passed"] is False

    record = acceptance_record(run_acceptance(VerifyConfig(slow=True), criteria=criteria))
    assert record["complete"] is True and record["passed"] is True


def test_selected_subset():
    criteria = [(1, "fine", _passes), (2, "value error", _raises_value_error)]
    results = run_acceptance(VerifyConfig(criteria=[1]), criteria=criteria)
    assert [r.number for r in results] == [1]
    assert acceptance_record(results)["passed"] is True


def test_branch_check_reads_limit_from_tracked_branch():
    passed, message = check_branch(AcceptanceContext(verify=VerifyConfig()))
    assert passed, message
    assert "ends on principal sheet" in message


def test_linear_decay_check():
    passed, message = check_linear_decay(AcceptanceContext(verify=VerifyConfig()))
    assert passed, message


def main():
    tests = [
        test_raising_check_is_recorded_as_failed,
        test_skipped_criteria_do_not_pass,
        test_selected_subset,
        test_branch_check_reads_limit_from_tracked_branch,
        test_linear_decay_check,
    ]
    return run_tests("Acceptance runner", tests)


if __name__ == "__main__":
    success = main()
    sys.exit(0 if success else 1)
