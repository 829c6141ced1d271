import numpy as np
import pytest

from ivfunctional import basis, scenario
from ivfunctional.scenario import ConfigError


def test_builtin_scenarios_parse():
    for name in scenario.BUILTIN:
        sc = scenario.builtin(name)
        assert sc.name == name
        assert sc.master_seed is not None


def test_round_trip_text():
    for name in scenario.BUILTIN:
        sc = scenario.builtin(name)
        again = scenario.parse_lines(sc.to_text().splitlines())
        assert again == sc
        assert again.to_text() == sc.to_text()


def test_overrides_and_comments():
    lines = ["# comment", "", "p = 2  # trailing", "master_seed = 5", "n_grid = 10, 20"]
    sc = scenario.parse_lines(lines, overrides=["p=3", "sigma=0"])
    assert sc.weights.p == 3.0 and sc.sigma == 0.0 and sc.n_grid == (10, 20)


@pytest.mark.parametrize("lines,where", [
    (["master_seed = 1", "p 2"], "<config>:2"),
    (["master_seed = 1", "", "bogus = 3"], "<config>:3"),
    (["master_seed = 1", "reps = many"], "<config>:2"),
    (["master_seed = 1", "master_seed = 2"], "<config>:2"),
    (["master_seed = 1", "sigma = nan"], "<config>:2"),
])
def test_line_precise_errors(lines, where):
    with pytest.raises(ConfigError) as exc:
        scenario.parse_lines(lines)
    assert exc.value.where == where
    assert str(exc.value).startswith(where)


def test_override_errors():
    with pytest.raises(ConfigError) as exc:
        scenario.parse_lines(["master_seed = 1"], overrides=["noequals"])
    assert exc.value.where == "--set #1"


@pytest.mark.parametrize("extra", [
    [], ["sigma = -1"], ["reps = 0"], ["n_grid = 20,10"], ["threshold = loose"], ["a = 0"],
    ["representer = indicator:0.5,0.2"], ["structural = wiggly"], ["margin = 1"],
    ["dimension_rule = guess"], ["d = 2"],
])
def test_semantic_errors(extra):
    lines = ([] if extra == [] else ["master_seed = 1"]) + extra
    with pytest.raises(ConfigError):
        scenario.parse_lines(lines)


def test_missing_file():
    with pytest.raises(ConfigError) as exc:
        scenario.load("/nonexistent/x.cfg")
    assert exc.value.where == "/nonexistent/x.cfg"
    with pytest.raises(ConfigError):
        scenario.load("builtin:nope")


def test_coef_specs():
    f = scenario.parse_coef_spec
    np.testing.assert_array_equal(f("coefs:1,2", "x", 1, 1, 4), [1, 2, 0, 0])
    np.testing.assert_allclose(f("smooth:2,1", "x", 1, 1, 3), [1, 0.25, 1 / 9])
    np.testing.assert_allclose(f("indicator:0,0.5", "x", 1, 1, 3),
                               basis.indicator_representer(0, 0.5, 3))
    sm = f("smooth", "x", 2.0, 1.0, 64)
    assert sm[0] == pytest.approx(basis.calibrated_scale(3.0, 2.0, 1.0))
    assert basis.weighted_norm_sq(sm, "b", basis.WeightConfig(p=2)) <= 1.0


def test_typed_echo():
    sc = scenario.builtin("polynomial")
    d = sc.as_dict()
    assert d["p"] == 2.0 and d["J"] == 25 and d["n_grid"] == [1000, 2000, 4000, 8000, 16000]
    assert [k for k, _ in sc.items()] == list(d)
