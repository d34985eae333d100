from __future__ import annotations

from finsler.verification import CriterionResult, SuiteConfig, run_suite


def test_result_bookkeeping():
    r = CriterionResult(99, "demo", {"a": (1e-9, 1e-6, "<"), "b": (0.5, 1e-3, ">"), "c": (2.0, 1.0, "<")}, 0.1)
    assert not r.passed
    assert r.failures() == ["c"]
    assert r.line().startswith("[FAIL] 99 demo")
    assert r.as_dict()["checks"]["b"]["relation"] == ">"


def test_quick_config_caps_samples():
    assert SuiteConfig(quick=True).n(50) == 10
    assert SuiteConfig().n(50) == 50
    a = SuiteConfig().rng(3).normal(size=3)
    b = SuiteConfig().rng(3).normal(size=3)
    assert (a == b).all()


def test_injected_bug_is_caught_by_named_criteria():
    results = run_suite(SuiteConfig(quick=True, inject_bug=True), only={1, 2, 3, 12})
    assert [r.passed for r in results] == [False, False, False, False]
    assert "kills_y" in results[3].failures()


def test_injected_bug_leaves_other_criteria_alone():
    results = run_suite(SuiteConfig(quick=True, inject_bug=True), only={7, 8, 11})
    assert all(r.passed for r in results)
