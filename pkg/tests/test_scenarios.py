import json

import numpy as np
import pytest

from sdreflect.consistency import rel_residual
from sdreflect.dyncore import PoleError
from sdreflect.parametrize import auto_dress
from sdreflect.sampling import RetryCapError, sample_points
from sdreflect.scenarios import (
    Scenario,
    ScenarioError,
    builtin_names,
    builtin_scenario,
    compile_matrix_spec,
    load_scenario,
    scenario_from_dict,
)
from sdreflect import WeightScheme

SCH = WeightScheme(2, 1.0)


def test_builtin_catalog_names():
    names = builtin_names()
    assert names == sorted(names)
    for expected in ("trivial_yangian", "diagonal_dressed", "projector_b",
                     "constant_g", "spectral_shift_g", "nonsimilar_detwist"):
        assert expected in names


def test_unknown_builtin_lists_catalog():
    with pytest.raises(ScenarioError) as err:
        builtin_scenario("nope")
    assert "trivial_yangian" in str(err.value)


def test_catalog_twist_consistency():
    # q = (g b g^-1) k must hold exactly in every catalog entry
    for name in builtin_names():
        sc = builtin_scenario(name)
        pts = sc.sample(count=3)
        beta = auto_dress(sc.b_mat(), sc.g_auto())
        k = sc.k_mat()
        q = sc.q_mat()
        for lam, u in pts:
            uu = {1: u.get(1, 0.3)}
            lhs = beta.eval(lam, uu) @ k.eval(lam, uu)
            assert rel_residual(lhs, q.eval(lam, uu)) < 1e-12


def test_rank_override_dimensions():
    sc = builtin_scenario("diagonal_dressed", {"rank": 3})
    assert sc.rank == 3
    assert sc.b_mat().eval(np.zeros(3)).shape == (3, 3)
    assert sc.R0_mat().eval(np.zeros(3), {1: 1.0, 2: -1.0}).shape == (9, 9)


def test_scenario_file_roundtrip(tmp_path):
    sc = builtin_scenario("diagonal_dressed")
    path = tmp_path / "scen.json"
    sc.save(path)
    sc2 = load_scenario(path)
    assert sc.to_dict() == sc2.to_dict()


def test_zero_gamma_rejected():
    data = builtin_scenario("trivial_yangian").to_dict()
    data["gamma"] = [0.0, 0.0]
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict(data)
    assert "gamma" in str(err.value)


def test_unknown_automorphism_kind_names_field():
    data = builtin_scenario("trivial_yangian").to_dict()
    data["g"] = {"kind": "mystery"}
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict(data)
    assert "g.kind" in str(err.value)


def test_unknown_field_rejected():
    data = builtin_scenario("trivial_yangian").to_dict()
    data["surprise"] = 1
    with pytest.raises(ScenarioError):
        scenario_from_dict(data)


def test_missing_field_rejected():
    data = builtin_scenario("trivial_yangian").to_dict()
    del data["R0"]
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict(data)
    assert "R0" in str(err.value)


def test_bad_expression_carries_path():
    data = builtin_scenario("diagonal_dressed").to_dict()
    data["b"] = {"kind": "diagonal", "entries": ["lambda1 +", "1"]}
    with pytest.raises(ScenarioError) as err:
        scenario_from_dict(data)
    assert "b.entries[0]" in str(err.value)


def test_malformed_json_reported(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ScenarioError):
        load_scenario(path)


def test_sampler_determinism_and_separation():
    sc = builtin_scenario("diagonal_dressed")
    a = sc.sample(count=10, seed=5)
    b = sc.sample(count=10, seed=5)
    for (la, ua), (lb, ub) in zip(a, b):
        np.testing.assert_array_equal(la, lb)
        assert ua == ub
    for lam, u in a:
        assert abs(lam[0] - lam[1]) >= 0.1
        vals = [u[k] for k in sorted(u)]
        for i in range(len(vals)):
            for j in range(i + 1, len(vals)):
                assert abs(vals[i] - vals[j]) >= 0.1


def test_sampler_retry_cap():
    with pytest.raises(RetryCapError):
        sample_points(SCH, (), count=5, seed=0, box=0.01, min_sep=0.5, retry_cap=200)


def test_expression_matrix_pole_surfaces():
    spec = {"kind": "diagonal", "entries": ["1/(lambda1-lambda2)", "1"]}
    m = compile_matrix_spec(spec, SCH, (1,), "b")
    with pytest.raises(PoleError):
        m.eval(np.array([0.5, 0.5]))


def test_quantum_values_presets():
    sc = builtin_scenario("trivial_yangian")
    vals = sc.quantum_values(2)
    assert set(vals) == {1, 2, 3, 4}
    sc.quantum_spectral = "locality"
    loc = sc.quantum_values(1, u_ref=0.0)
    assert loc == {2: 1.0, 1: 2.0}
    sc.quantum_spectral = [[0.1, 0.0], [0.2, 0.0]]
    assert sc.quantum_values(1) == {1: 0.1, 2: 0.2}


def test_spectral_entry_binding():
    spec = {"kind": "diagonal", "entries": ["exp(0.2*u1)", "1"]}
    m = compile_matrix_spec(spec, SCH, (1,), "b")
    assert m.spectral_legs == frozenset({1})
    v = m.eval(np.zeros(2), {1: 2.0})
    assert np.isclose(v[0, 0], np.exp(0.4))
