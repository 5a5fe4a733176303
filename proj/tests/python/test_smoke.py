"""End-to-end smoke tests for the python bindings."""

import json
import math
import os

import pytest

import filippov as fp

SIGN_PROBLEM = {
    "dims": {"m": 1, "n": 1},
    "domain": {"lower": [-2.0], "upper": [2.0]},
    "switches": ["x1"],
    "branches": {"+": ["-1"], "-": ["1"]},
    "overrides": [{"set": {"points": [[0.0]]}, "value": [5.0]}],
    "ideal": {"kind": "lebesgue"},
    "ivp": {"x0": [1.0], "horizon": 2.0},
    "queries": [{"name": "range", "kind": "ess-range"}],
    "seed": 42,
}


def test_expr_parse_evaluate_gradient():
    e = fp.Expr.parse("x1^2 + 3*x2", 2)
    assert e.evaluate([1.0, 1.0]) == pytest.approx(4.0)
    assert e.gradient([1.0, 1.0]) == pytest.approx([2.0, 3.0])
    with pytest.raises(ValueError):
        fp.Expr.parse("x3", 2)
    with pytest.raises(ArithmeticError):
        fp.Expr.parse("1/x1", 1).evaluate([0.0])


def test_convex_hull():
    hull = fp.convex_hull([[0, 0], [1, 0], [0, 1], [0.25, 0.25]], 2)
    assert len(hull.vertices) == 3
    assert hull.membership([0.25, 0.25], 1e-9)
    assert not hull.membership([2.0, 0.0], 1e-9)
    assert fp.distance_to_hull([2.0, 0.5], [[0, 0], [1, 0], [1, 1], [0, 1]]) == pytest.approx(1.0)


def test_problem_workflow():
    p = fp.Problem.from_json(json.dumps(SIGN_PROBLEM))
    assert len(p.config_hash) == 16

    report = json.loads(p.ess_range("range"))
    assert report["exact"]
    assert [v[0] for v in report["values"]] == [-1.0, 1.0]

    hull = p.filippov_set(0.0, [0.0])
    assert [v[0] for v in hull.vertices] == [-1.0, 1.0]

    singleton, value = p.singleton_check(0.0, [0.5])
    assert singleton and value[0] == -1.0

    tr = p.solve()
    assert tr.end_time() == pytest.approx(2.0)
    assert abs(tr.state_at(2.0)[0]) <= 1e-8
    assert abs(tr.state_at(0.5)[0] - 0.5) <= 1e-8

    res = p.verify(tr)
    assert res.passed
    assert res.max_violation <= 1e-6


def test_trajectory_round_trip():
    p = fp.Problem.from_json(json.dumps(SIGN_PROBLEM))
    tr = p.solve()
    back = fp.Trajectory.from_json(tr.to_json())
    assert back.num_nodes == tr.num_nodes
    for t in [0.0, 0.3, 0.99, 1.5, 2.0]:
        assert back.state_at(t) == tr.state_at(t)


def test_black_box_classification():
    import _filippov

    p = fp.Problem.from_json(json.dumps(SIGN_PROBLEM))
    verdict = _filippov.classify_value_sampled(
        lambda x, t: [1.0 if x[0] > 0 else -1.0], p, [1.0]
    )
    assert verdict["verdict"] == "good"
    assert not verdict["low_confidence"]
    assert verdict["measure_lcb"] > 0.5


def test_problem_load_from_file():
    problems = os.environ.get("FILIPPOV_PROBLEMS")
    if not problems:
        pytest.skip("FILIPPOV_PROBLEMS not set")
    p = fp.Problem.load(os.path.join(problems, "relay.json"))
    tr = p.solve()
    s = tr.state_at(8.0)
    energy = 0.5 * s[1] ** 2 + abs(s[0])
    assert energy == pytest.approx(1.0, abs=1e-6)
    assert math.isfinite(tr.end_time())
