import json

import pytest
from hypothesis import given, strategies as st

from properclock import units
from properclock.scenario import ScenarioError, load_scenario, scenario_from_dict
from properclock.states import MomentumSuperposition

BASE = {
    "units": "natural",
    "sigma": 2.0,
    "clock_a": {"pbar": 0.1, "delta": 0.01},
    "clock_b": {"pbar": 0.0, "delta": 0.01},
}


@given(p=st.floats(1e-35, 1e-20), t=st.floats(1e-20, 1e3))
def test_round_trips(p, t):
    m = units.RB87_MASS_KG
    assert units.momentum_to_si(units.momentum_to_natural(p, m), m) == pytest.approx(p, rel=1e-12)
    assert units.time_to_si(units.time_to_natural(t, m), m) == pytest.approx(t, rel=1e-12)


def test_rb87_natural_values():
    m = units.RB87_MASS_KG
    p = units.momentum_to_natural(units.momentum_from_velocity(5.0, m), m)
    assert p == pytest.approx(5.0 / units.C, rel=1e-15)
    d = units.momentum_to_natural(units.momentum_spread_from_radius(units.RB87_RADIUS_M), m)
    assert d == pytest.approx(1.0050494e-8, rel=1e-6)
    with pytest.raises(ValueError):
        units.time_to_natural(1.0, -1.0)


def test_natural_scenario_loads():
    sc = scenario_from_dict(BASE)
    assert sc.sigma == 2.0 and sc.mass == 1.0
    assert sc.h_a == pytest.approx(0.01 / 2 + 1e-4 / 4)


def test_superposition_and_vector_momenta():
    doc = dict(BASE, clock_a={"pbar": [0.01, 0, 0], "pbar_prime": 0.05, "delta": 0.01, "theta": 0.4, "phi": 0.0})
    sc = scenario_from_dict(doc)
    assert isinstance(sc.cm_a, MomentumSuperposition)
    assert sc.cm_a.second.pbar == (0.05, 0.0, 0.0)


def test_si_scenario_converts_at_load(tmp_path):
    m = units.RB87_MASS_KG
    doc = {
        "units": "si",
        "mass_kg": m,
        "sigma": 1e-14,
        "clock_a": {"pbar": m * 5.0, "delta": units.HBAR / 2.5e-10},
        "clock_b": {"pbar": 0.0, "delta": units.HBAR / 2.5e-10},
    }
    path = tmp_path / "si.json"
    path.write_text(json.dumps(doc), encoding="utf-8")
    sc = load_scenario(path)
    assert sc.cm_a.pbar[0] == pytest.approx(5.0 / units.C, rel=1e-14)
    assert sc.sigma == pytest.approx(1e-14 * m * units.C**2 / units.HBAR, rel=1e-14)
    assert sc.mass_kg == m


@pytest.mark.parametrize(
    "patch",
    [
        {"extra": 1},
        {"units": "imperial"},
        {"sigma": -1.0},
        {"clock_b": {"pbar": 0.0}},
        {"clock_a": {"pbar": 0.0, "delta": 0.01, "theta": 0.3}},
        {"mass_kg": 1.0},
        {"units": "si"},
        {"clock_a": {"pbar": [0.1, 0.0], "delta": 0.01}},
    ],
)
def test_schema_rejections(patch):
    with pytest.raises(ScenarioError):
        scenario_from_dict(dict(BASE, **patch))


def test_physical_invariants_enforced_on_load():
    doc = dict(BASE, clock_a={"pbar": 0.0, "pbar_prime": 0.1, "delta": 0.01, "theta": 4.0, "phi": 0.0})
    with pytest.raises(ScenarioError):
        scenario_from_dict(doc)


def test_invalid_json_file(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ScenarioError):
        load_scenario(path)
