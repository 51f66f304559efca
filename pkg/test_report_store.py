#!/usr/bin/env python3
"""
Test the verify-run ledger against a throwaway SQLite database
"""

import sys
import os
sys.path.append(os.path.dirname(os.path.abspath(__file__)))

import math

from report_store import CheckRecord, RunOutcome, VerifyRun, add_run, get_run_history, make_session_factory
from verify_suites import CheckResult, SuiteResult


def suite_result(name="conservation", seed=1, passed=True):
    checks = [
        CheckResult(
            name="deficit", measured=3e-14 if passed else 1e-3, tolerance=1e-10, passed=passed,
            at_most=True, samples=40, skipped=2, worst_seed=seed, worst_trial=7, worst_k=1.25,
        ),
        CheckResult(
            name="generalized_pt_defect", measured=0.4, tolerance=math.inf, passed=True,
            at_most=True, samples=40, skipped=0, worst_seed=seed, worst_trial=3, worst_k=None,
        ),
    ]
    return SuiteResult(name=name, seed=seed, trials=4, checks=checks, wall_time=0.25)


def test_add_run_and_history(tmp_path):
    session_factory = make_session_factory(f"sqlite:///{tmp_path / 'runs.db'}")
    first = add_run(session_factory, "verify --trials 4 --seed 1", "a" * 64, suite_result())
    second = add_run(session_factory, "verify --trials 4 --seed 2", "b" * 64, suite_result(seed=2, passed=False))
    assert second > first

    history = get_run_history(session_factory)
    assert [h["run_id"] for h in history] == [second, first]
    assert history[0]["outcome"] == "Failed"
    assert history[1]["outcome"] == "Passed"
    assert history[1]["input_digest"] == "a" * 64
    assert history[1]["created_at"] is not None

    checks = history[1]["checks"]
    assert [c["name"] for c in checks] == ["deficit", "generalized_pt_defect"]
    assert checks[0]["worst_trial"] == 7
    assert checks[0]["worst_k"] == 1.25
    assert checks[1]["worst_k"] is None


def test_history_limit(tmp_path):
    session_factory = make_session_factory(f"sqlite:///{tmp_path / 'runs.db'}")
    for seed in range(5):
        add_run(session_factory, "verify", "c" * 64, suite_result(seed=seed))
    history = get_run_history(session_factory, limit=2)
    assert [h["seed"] for h in history] == [4, 3]


def test_rows_are_stored(tmp_path):
    session_factory = make_session_factory(f"sqlite:///{tmp_path / 'runs.db'}")
    run_id = add_run(session_factory, "verify", "d" * 64, suite_result(passed=False))
    session = session_factory()
    try:
        run = session.get(VerifyRun, run_id)
        assert run.outcome is RunOutcome.Failed
        assert run.suite == "conservation"
        assert session.query(CheckRecord).filter_by(run_id=run_id).count() == 2
        reported = session.query(CheckRecord).filter_by(name="generalized_pt_defect").one()
        assert math.isinf(reported.tolerance)
    finally:
        session.close()


def test_empty_history(tmp_path):
    session_factory = make_session_factory(f"sqlite:///{tmp_path / 'runs.db'}")
    assert get_run_history(session_factory) == []
