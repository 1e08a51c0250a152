import json

import pytest

from lindstruct import serialize
from lindstruct.corpus import load, run_all
from lindstruct.dynamics import asymptotic_state, trajectory
from lindstruct.generator import validate
from lindstruct.perturbation import expand
from lindstruct.spectral import decompose
from lindstruct.structure import analyze


def roundtrip(obj):
    return json.loads(json.dumps(obj, allow_nan=False))


def test_every_report_kind_round_trips():
    g = load("undamped-oscillation").generator
    rep = analyze(g)
    reports = {
        "validation": serialize.validation_report(validate(g)),
        "spectrum": serialize.spectrum_report(decompose(g)),
        "structure": serialize.structure_report(rep),
        "trajectory": serialize.trajectory_report(trajectory(g, _e11(g.dim), 1.0, 2)),
        "asymptotics": serialize.asymptotics_report(asymptotic_state(g, _e11(g.dim), rep)),
        "series": serialize.series_report(expand(load("perturb-unique").system, order=4)),
        "corpus": serialize.corpus_report(run_all(names=["dissipation"])),
    }
    assert set(reports) == set(serialize.SCHEMAS)
    for kind, obj in reports.items():
        assert serialize.check_report(roundtrip(obj)) == kind


def _e11(d):
    import numpy as np

    m = np.zeros((d, d), dtype=complex)
    m[0, 0] = 1
    return m


@pytest.mark.parametrize("obj", [
    None, [], {"schema": 3}, {"schema": "other.spectrum/1"}, {"schema": "lindstruct.nothing/1"},
    {"schema": "lindstruct.corpus/2", "passed": True, "fixtures": []},
    {"schema": "lindstruct.corpus/1", "passed": True},
    {"schema": "lindstruct.corpus/1", "passed": 1, "fixtures": []},
])
def test_malformed_reports_are_rejected(obj):
    with pytest.raises(ValueError):
        serialize.check_report(obj)


def test_infinite_radius_becomes_null():
    from lindstruct.perturbation import PerturbedGenerator

    g = load("dissipation").generator
    obj = roundtrip(serialize.series_report(expand(PerturbedGenerator(g), order=2)))
    assert obj["radius_estimate"] is None


def test_schema_id():
    assert serialize.schema_id("structure") == "lindstruct.structure/1"
