import numpy as np
import pytest

from ecsbell.errors import OutOfRange, UnknownScenario
from ecsbell.scenarios import (
    ETA_COLUMNS,
    SCENARIOS,
    Anchor,
    ScenarioSpec,
    order_equivalence_check,
    oracle_suite,
    run_inefficiency_grid,
    run_scenario,
)
from ecsbell.states import ChannelParams, EcsParams, Parity

FIGURE_IDS = [
    "fig1a", "fig1b", "fig2", "fig3a", "fig3b", "fig4", "fig6a", "fig6b", "fig7a", "fig7b",
    "fig8a", "fig8b", "fig9a", "fig9b", "fig11a", "fig11b", "fig11c", "fig11d",
]


def test_every_figure_is_registered():
    assert set(FIGURE_IDS) | {"appendixB"} == set(SCENARIOS)


def test_unknown_scenario():
    with pytest.raises(UnknownScenario):
        run_scenario(ScenarioSpec("fig5"))


@pytest.mark.parametrize(
    "relation,computed,ok",
    [("approx", 2.005, True), ("approx", 2.02, False), ("at_most", 2.0, True),
     ("at_most", 2.2, False), ("at_least", 2.2, True), ("at_least", 1.9, False)],
)
def test_anchor_relations(relation, computed, ok):
    a = Anchor("x", 2.0 if relation != "approx" else 2.0, computed, 0.01, relation)
    assert a.passed is ok
    assert a.line().startswith("PASS" if ok else "FAIL")


def test_nan_anchor_fails():
    assert not Anchor("x", 1.0, float("nan"), 10.0).passed


def test_small_amplitude_grid_scenario(tmp_path):
    out = tmp_path / "fig4.csv"
    report = run_scenario(ScenarioSpec("fig4", points=3, range=(0.3, 0.9), starts=4, out=str(out)))
    text = out.read_text()
    assert text.splitlines()[0].startswith("alpha1,alpha2,bell_max,xi1_re")
    assert len(text.splitlines()) == 1 + 9
    assert text == report.to_csv()
    names = [a.name for a in report.anchors]
    assert len(names) == len(set(names))


def test_scenario_csv_is_byte_stable(tmp_path):
    spec = dict(points=3, range=(0.4, 1.2), starts=4)
    a = run_scenario(ScenarioSpec("fig7b", out=str(tmp_path / "a.csv"), **spec))
    b = run_scenario(ScenarioSpec("fig7b", out=str(tmp_path / "b.csv"), **spec))
    assert (tmp_path / "a.csv").read_bytes() == (tmp_path / "b.csv").read_bytes()
    assert a.summary == b.summary


def test_fig9b_anchors():
    report = run_scenario(ScenarioSpec("fig9b", points=2, range=(0.4, 2.0), starts=16))
    assert report.passed, report.describe()


def test_inefficiency_grid_columns():
    report = run_inefficiency_grid("onoff", "odd", "symmetric_free", [0.9], [0.8, 1.0], starts=4)
    assert report.columns == ETA_COLUMNS
    assert report.columns[:5] == ["eta1", "eta2", "bell_max", "alpha1", "alpha2"]
    assert [row[:2] for row in report.rows] == [[0.9, 0.8], [0.9, 1.0]]
    with pytest.raises(OutOfRange):
        run_inefficiency_grid("onoff", "odd", "symmetric_free", [1.2], [1.0])


def test_order_check_lossless_is_exact():
    rng = np.random.default_rng(3)
    sample = [tuple(rng.uniform(-1, 1, 2) @ [1, 1j] for _ in range(2)) for _ in range(10)]
    rep = order_equivalence_check(EcsParams(1.0, 0.6, Parity.ODD), ChannelParams(), sample)
    assert rep.max_deviation < 1e-12


def test_order_check_lossy():
    rng = np.random.default_rng(4)
    sample = [tuple(rng.uniform(-1, 1, 2) @ [1, 1j] for _ in range(2)) for _ in range(50)]
    rep = order_equivalence_check(
        EcsParams(1.0, 0.6, Parity.ODD), ChannelParams(0.8, 0.9), sample, optimize="onoff", starts=8
    )
    assert rep.max_deviation < 1e-8
    assert len(rep.deviations) == 100
    assert rep.optimized_gap < 1e-6


def test_order_check_needs_transmission():
    with pytest.raises(OutOfRange):
        order_equivalence_check(EcsParams(1.0, 0.6), ChannelParams(0.0, 1.0), [(0.1, 0.1)])


def test_oracle_suite_small():
    res = oracle_suite(n=10, refine=2)
    assert res["max_deviation"] < 1e-8
    assert res["max_refinement_change"] < 1e-9
