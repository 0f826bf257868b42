import json

import pytest

from statgeo.cli import dumps
from statgeo.verify import SUITES, run_all, run_suite


@pytest.mark.parametrize("name", sorted(SUITES))
def test_suite_passes(name):
    rep = run_suite(name, seed=11, samples=2000)
    failed = [c["check"] for c in rep["checks"] if not c["pass"]]
    assert rep["pass"], failed


def test_reports_are_deterministic():
    a = dumps(run_suite("prop2", seed=5, samples=500))
    b = dumps(run_suite("prop2", seed=5, samples=500))
    assert a == b
    assert json.loads(a)["suite"] == "prop2"


def test_seed_changes_samples():
    a = run_suite("prop2", seed=1, samples=500)
    b = run_suite("prop2", seed=2, samples=500)
    assert dumps(a) != dumps(b)


def test_unknown_suite():
    with pytest.raises(KeyError):
        run_suite("prop9")


def test_run_all_structure():
    rep = run_all(seed=7, samples=500)
    assert rep["pass"] and list(rep["suites"]) == list(SUITES)
