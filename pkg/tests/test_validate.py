import pytest

from nlsbif import validate
from nlsbif.config import Tolerances, override_tolerances, tolerances
from nlsbif.errors import IntegrationFailure


def test_override_is_scoped():
    base = tolerances().rtol
    with override_tolerances(rtol=1e-8) as t:
        assert t.rtol == 1e-8 == tolerances().rtol
    assert tolerances().rtol == base
    with pytest.raises(ValueError):
        Tolerances(rtol=-1.0)


@pytest.mark.slow
def test_all_checks_pass():
    checks = validate.run_checks()
    assert {c.group for c in checks} == set(validate.GROUPS)
    failed = [c.row() for c in checks if not c.passed]
    assert not failed, "\n".join(failed)


def test_unknown_group():
    with pytest.raises(KeyError):
        validate.run_checks(["delta", "nope"])


def test_group_error_becomes_failed_check(monkeypatch):
    def broken():
        raise IntegrationFailure("boom")

    monkeypatch.setitem(validate.GROUPS, "delta", broken)
    (check,) = validate.run_checks(["delta"])
    assert not check.passed and check.observed == "IntegrationFailure"
    assert check.row().startswith("FAIL")
