import pytest

from roughhopf import verify


@pytest.mark.parametrize("name", ["gl-example", "ordered-deshuffle", "exp-log", "chen", "level2", "pushforward"])
def test_fast_suites_pass(name):
    rows = verify.run_suite(name, seed=3)
    assert rows and all(r.passed for r in rows), [r.line() for r in rows if not r.passed]
    assert all(r.suite == name for r in rows)


def test_hopf_suite_small_grade():
    rows = verify.suite_hopf_axioms(max_grade=2)
    assert len(rows) == 24 and all(r.passed for r in rows)


def test_unknown_suite():
    with pytest.raises(ValueError):
        verify.run_suite("everything")


def test_failures_are_recorded_not_raised(monkeypatch):
    def broken(*args):
        raise RuntimeError("boom")

    monkeypatch.setattr(verify, "gl_star", broken)
    rows = verify.run_suite("gl-example")
    assert not rows[0].passed and "boom" in rows[0].detail
    text = verify.format_matrix(rows)
    assert text.startswith("FAIL") and text.endswith("0/1 checks passed\n")
