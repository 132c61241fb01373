import pytest

from oblique.schemas.problem import EmdenFowlerCoeff, IvpSpec, Nonlinearity
from oblique.schemas.reports import SamplingGrid
from oblique.services.hypothesis_service import HypothesisService
from oblique.services.problem_service import ProblemService


def by_name(verdicts):
    return {v.name: v for v in verdicts}


def test_theorem1_holds_for_the_demo(demo_nl, demo_ivp):
    verdicts = by_name(HypothesisService.check_theorem1(demo_nl, demo_ivp))
    assert [v.status for v in verdicts.values()] == ["holds"] * 6
    assert verdicts["K_finite"].computed["K"] == pytest.approx(0.01, abs=1e-10)
    threshold = verdicts["threshold"]
    assert threshold.computed["c"] == 1.0
    assert threshold.computed["lhs"] == pytest.approx(0.0404, abs=1e-10)
    assert threshold.computed["rhs"] == pytest.approx(2.0 / 9.0, abs=1e-8)
    assert threshold.computed["margin"] > 0.0


def test_threshold_fails_for_the_quadratic_solution():
    ef = EmdenFowlerCoeff(n=2, A=lambda t: -2.0 * t**-6)
    nl = ProblemService.to_nonlinearity(ef)
    ivp = IvpSpec(t0=1.0, x0=1.0, xp0=2.0)
    threshold = HypothesisService.threshold_10(nl, ivp)
    assert threshold.status == "fails"
    assert threshold.computed["lhs"] == pytest.approx(14.0, abs=1e-8)
    assert threshold.computed["rhs"] == pytest.approx(0.125, abs=1e-8)
    assert threshold.witness is not None


def test_wrong_sign_is_witnessed():
    nl = ProblemService.to_nonlinearity(EmdenFowlerCoeff(n=2, A=lambda t: t**-6))
    verdicts = by_name(HypothesisService.check_theorem1(nl, IvpSpec(t0=100.0, x0=50.0, xp0=0.0)))
    sign = verdicts["sign_vf"]
    assert sign.status == "fails"
    assert sign.witness.t >= 100.0
    assert sign.witness.values["vf"] > 0.0
    assert verdicts["sign_dfdv"].status == "fails"


def test_missing_envelope_is_inconclusive(free_motion):
    verdicts = by_name(HypothesisService.check_theorem1(free_motion, IvpSpec(t0=1.0, x0=1.0, xp0=2.0)))
    assert verdicts["sign_vf"].status == "holds"
    for name in ("envelope", "K_finite", "g_tail", "threshold"):
        assert verdicts[name].status == "inconclusive"
        assert verdicts[name].note


def test_envelope_rejects_decreasing_g():
    nl = Nonlinearity(
        f=lambda t, v: 0.0,
        envelope_a=lambda t: t**-3,
        envelope_g=lambda xi: 1.0 / (1.0 + xi),
    )
    verdicts = by_name(HypothesisService.check_theorem1(nl, IvpSpec(t0=1.0, x0=1.0, xp0=1.0)))
    assert verdicts["envelope"].status == "fails"
    assert verdicts["envelope"].note == "g must be nondecreasing"


def test_vanishing_envelope_fails_instead_of_dividing():
    nl = Nonlinearity(
        f=lambda t, v: 0.0,
        envelope_a=lambda t: t**-3,
        envelope_g=lambda xi: xi - 1.0,
    )
    ivp = IvpSpec(t0=1.0, x0=1.0, xp0=1.0)
    verdicts = by_name(HypothesisService.check_theorem1(nl, ivp))
    assert verdicts["envelope"].status == "fails"
    for name in ("g_tail", "threshold"):
        assert verdicts[name].status == "fails"
        assert verdicts[name].witness.v == 1.0
        assert verdicts[name].witness.values == {"g": 0.0}
    assert HypothesisService.threshold_10(nl, ivp).status == "fails"


def test_emden_fowler_threshold(demo_ef, demo_ivp):
    verdicts = by_name(HypothesisService.check_ef_negative(demo_ef, demo_ivp))
    assert verdicts["A_nonpositive"].status == "holds"
    t15 = verdicts["threshold_15"]
    assert t15.status == "holds"
    assert t15.computed["lhs"] == pytest.approx(0.0404, abs=1e-10)
    assert t15.computed["rhs"] == pytest.approx(1.0 / (4.0 * 1.5**4), abs=1e-12)


def test_caligo_holds_and_reports_the_envelope_constant(caligo_ef):
    grid = SamplingGrid(t_range=(1.0, 1e6))
    verdicts = by_name(HypothesisService.check_caligo(caligo_ef, grid))
    assert {v.status for v in verdicts.values()} == {"holds"}
    assert verdicts["caligo_envelope"].computed["c"] == 1.0


@pytest.mark.parametrize(
    "n,A,dA",
    [
        (1, lambda t: t**-4, lambda t: -4.0 * t**-5),
        (1, lambda t: t**-4.5, lambda t: -4.5 * t**-5.5),
        (2, lambda t: t**-7, lambda t: -7.0 * t**-8),
    ],
)
def test_caligo_implies_the_comparison_conditions(n, A, dA):
    ef = EmdenFowlerCoeff(n=n, A=A, dA_dt=dA)
    grid = SamplingGrid(t_range=(1.0, 1e6))
    assert {v.status for v in HypothesisService.check_caligo(ef, grid)} == {"holds"}
    assert {v.status for v in HypothesisService.check_comparisons(ef, 1.0, grid=grid)} == {"holds"}


def test_caligo_fails_for_slow_decay():
    ef = EmdenFowlerCoeff(n=1, A=lambda t: t**-3, dA_dt=lambda t: -3.0 * t**-4)
    verdicts = by_name(HypothesisService.check_caligo(ef, SamplingGrid(t_range=(1.0, 1e6))))
    assert verdicts["caligo_16"].status == "fails"
    assert verdicts["caligo_16"].witness.v is None
    assert verdicts["caligo_envelope"].status == "fails"


def test_theorem2_for_the_caligo_instance(caligo_ef):
    nl = ProblemService.to_nonlinearity(caligo_ef)
    verdicts = HypothesisService.check_theorem2(nl, SamplingGrid(t_range=(1.0, 1e6)))
    assert [v.status for v in verdicts] == ["holds", "holds"]


def test_comparisons(caligo_ef):
    ok = by_name(HypothesisService.check_comparisons(caligo_ef, 1.0))
    assert {v.status for v in ok.values()} == {"holds"}
    assert ok["waltman"].computed["integral"] == pytest.approx(1.0, abs=1e-8)

    slow = EmdenFowlerCoeff(n=1, A=lambda t: t**-2, dA_dt=lambda t: -2.0 * t**-3)
    verdicts = by_name(HypothesisService.check_comparisons(slow, 1.0))
    assert verdicts["waltman"].status == "fails"
    assert verdicts["star"].status == "fails"
    assert verdicts["potter"].status == "holds"


def test_grid_points():
    grid = SamplingGrid(t_range=(2.0, 200.0), t_count=16, v_max=3.0, v_count=16, t_spacing="linear")
    ts, vs = HypothesisService.grid_points(grid)
    assert ts[0] == 2.0 and ts[-1] == 200.0 and len(ts) == 16
    assert vs[0] == -3.0 and vs[-1] == 3.0 and len(vs) == 16
    with pytest.raises(ValueError):
        SamplingGrid(t_range=(0.5, 2.0))


@pytest.mark.parametrize(
    "values,expected",
    [([1.0, -1.0, 0.0, -2.0, 3.0], 2), ([0.0, 0.0], 0), ([1.0, 2.0, 3.0], 0), ([-1.0, 0.0, 1.0], 1)],
)
def test_sign_changes(values, expected):
    assert HypothesisService.sign_changes(values) == expected


def test_threshold_never_recovers_as_v0_grows(demo_nl):
    # u0 = 0 throughout, so only the lower limit of the right-hand integral moves
    verdicts = [
        HypothesisService.threshold_10(demo_nl, IvpSpec(t0=100.0, x0=100.0 * v0, xp0=v0))
        for v0 in (0.5, 1.0, 2.0, 3.0, 4.0, 8.0)
    ]
    lhs = [v.computed["lhs"] for v in verdicts]
    rhs = [v.computed["rhs"] for v in verdicts]
    assert lhs == pytest.approx([0.0404] * len(lhs), abs=1e-10)
    assert all(b < a for a, b in zip(rhs, rhs[1:]))
    statuses = [v.status for v in verdicts]
    assert statuses[0] == "holds" and statuses[-1] == "fails"
    assert statuses == sorted(statuses, key=lambda s: s == "fails")

    mirrored = HypothesisService.threshold_10(demo_nl, IvpSpec(t0=100.0, x0=-200.0, xp0=-2.0))
    assert mirrored.computed["rhs"] == verdicts[2].computed["rhs"]
