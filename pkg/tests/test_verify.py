import pytest

from dualavg import optimizers, verify


@pytest.mark.parametrize("name", list(verify.SUITES))
def test_quick_suites_pass(name):
    checks = verify.run_suites([name])
    assert checks
    for c in checks:
        assert c.passed, c.row()


def test_resolve_aliases():
    assert verify.resolve("lemma2") == ["argmin"]
    assert verify.resolve("bounds") == ["theorem1", "theorem2"]
    assert verify.resolve("all") == list(verify.SUITES)
    assert verify.resolve("lemma3,lemma3,replay") == ["lemma3", "replay"]
    with pytest.raises(KeyError):
        verify.resolve("lemma9")


def test_fault_breaks_bound_and_reduction():
    with optimizers.inject_fault(optimizers.FAULT_GDA_SIGN):
        bound = verify.suite_theorem1(iters=500, backend="python")
        reduction = verify.suite_reduction(steps=20, problems=1)
    assert not bound[0].passed
    assert not reduction[0].passed


def test_check_row_format():
    row = verify._check("s", "thing", 2.0, 1.0).row()
    assert row.startswith("FAIL") and "thing" in row
