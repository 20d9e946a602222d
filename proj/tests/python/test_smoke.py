import math
import os

import pytest

import diraccbd as cbd

MODELS = os.environ.get("DIRACCBD_MODELS_DIR", os.path.join(os.path.dirname(__file__), "..", "..", "models"))
BALL = os.path.join(MODELS, "bouncing_ball.cbd")
G = 9.81


def test_sample_algebra():
    a = cbd.StepSample(1.0, 2.0, {0: 3.0})
    b = cbd.StepSample(4.0, 8.0, {0: -3.0, 1: 1.0})
    s = cbd.add_samples(a, b)
    assert (s.left, s.right, s.impulses) == (5.0, 10.0, {1: 1.0})
    assert cbd.negate_sample(cbd.negate_sample(a)) == a


def test_leibniz_product():
    t = 1.44
    p = cbd.leibniz_product([-G * t, -G, 0.0], {2: 20.0})
    assert p[2] == pytest.approx(-28.8 * G, rel=1e-12)
    assert p[1] == pytest.approx(40 * G, rel=1e-12)
    with pytest.raises(cbd.CbdError) as info:
        cbd.leibniz_product([1.0], {2: 1.0})
    assert info.value.code == "InsufficientDerivatives"


def test_model_diagnostics():
    assert cbd.check_model(open(BALL).read()) == []
    diags = cbd.check_model("cbd M(out y) { block n = Negator(); n -> y; }")
    assert [d["code"] for d in diags] == ["UnconnectedInput"]
    assert cbd.check_model("cbd M(")[0]["code"] == "SyntaxError"
    with pytest.raises(cbd.CbdError):
        cbd.load_model("cbd M(")


def test_bouncing_ball_both_modes():
    model = cbd.load_model_file(BALL)
    assert model.definitions == ["Ball", "CollisionDetector", "ImpulseCalculator", "Main"]
    sym = cbd.simulate(model, "Main", step=1e-3, end=2.0)
    num = cbd.simulate(model, "Main", mode="numerical", step=1e-3, end=2.0)
    assert sym.signals == ["y", "v", "force"]
    assert len(sym.impulses) == 1
    t, signal, order, coefficient = sym.impulses[0]
    assert (signal, order) == ("force", 0)
    k = sym.times.index(t)
    v = sym.samples("v")[k]
    assert coefficient == pytest.approx(-2 * v.left, rel=1e-9)
    assert v.right == pytest.approx(-v.left, rel=1e-9)
    assert num.impulses == []
    report = cbd.compare(sym, num, 1e-12)
    assert report["pass"]
    assert len(report["impulses"]) == 1
    assert sym.to_csv().startswith("time,signal,left,right\n")


def test_simulate_errors():
    model = cbd.load_model_file(BALL)
    with pytest.raises(cbd.CbdError) as info:
        cbd.simulate(model, "Nope")
    assert info.value.code == "UnknownDefinition"
    with pytest.raises(cbd.CbdError) as info:
        cbd.simulate(model, "Main", step=0.0)
    assert info.value.code == "InvalidConfig"


def test_analysis():
    rows = cbd.finite_difference_table(3, 1.0)
    assert [r[3] for r in rows] == [0.0, 1.0, -2.0, 1.0, 0.0]
    value, risk = cbd.max_magnitude(5, 0.1)
    assert value == pytest.approx(6e5, rel=1e-12)
    assert not risk
    assert cbd.printed_max_magnitude(4, 0.1) == pytest.approx(100.0)
    ball = cbd.analytic_bouncing_ball(10.0, 0.0, G, 1.0, 2.0)
    assert ball["bounces"][0] == pytest.approx(math.sqrt(20 / G), rel=1e-14)
