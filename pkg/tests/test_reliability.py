from __future__ import annotations

import numpy as np
import pytest
import scipy.stats

from pairboard.errors import PairboardError, UndefinedCorrelationError
from pairboard.ranking import bootstrap_cis
from pairboard.reliability import (
    ReliabilityCurve,
    ReliabilityPoint,
    _RATER_CI_TAG,
    find_threshold,
    fractional_ranks,
    rater_subsample_curve,
    sentence_subsample_curve,
    spearman_rho,
    stratified_sentence_sample,
)
from pairboard.simulate import WorldSpec, run_simulation


# ---------------------------------------------------------------------------
# spearman
# ---------------------------------------------------------------------------

def test_identical_rankings_rho_one():
    assert spearman_rho([3.0, 1.0, 2.0], [30.0, 10.0, 20.0]) == pytest.approx(1.0)


def test_reversed_rankings_rho_minus_one():
    assert spearman_rho([1, 2, 3, 4], [4, 3, 2, 1]) == pytest.approx(-1.0)


def test_hand_computed_example():
    assert spearman_rho([1, 2, 3, 4], [1, 2, 4, 3]) == pytest.approx(0.8)


def test_symmetry_and_monotone_invariance():
    rng = np.random.default_rng(0)
    a = rng.normal(size=8)
    b = rng.normal(size=8)
    assert spearman_rho(a, b) == pytest.approx(spearman_rho(b, a))
    # common strictly monotone transform of both score sources
    assert spearman_rho(np.exp(a), np.exp(b)) == pytest.approx(spearman_rho(a, b))


def test_matches_scipy_including_ties():
    rng = np.random.default_rng(1)
    for _ in range(25):
        a = rng.integers(0, 5, size=10).astype(float)  # ties likely
        b = rng.integers(0, 5, size=10).astype(float)
        if len(set(a)) < 2 or len(set(b)) < 2:
            continue
        expected = scipy.stats.spearmanr(a, b).statistic
        assert spearman_rho(a, b) == pytest.approx(expected, abs=1e-12)


def test_errors():
    with pytest.raises(PairboardError):
        spearman_rho([1, 2, 3], [1, 2])
    with pytest.raises(PairboardError):
        spearman_rho([1.0], [2.0])
    with pytest.raises(UndefinedCorrelationError):
        spearman_rho([2.0, 2.0, 2.0], [1.0, 2.0, 3.0])


def test_fractional_ranks_tie_averaging():
    assert np.array_equal(
        fractional_ranks([10.0, 20.0, 20.0, 30.0]), [1.0, 2.5, 2.5, 4.0]
    )
    expected = scipy.stats.rankdata([5, 1, 1, 3, 3, 3])
    assert np.array_equal(fractional_ranks([5, 1, 1, 3, 3, 3]), expected)


# ---------------------------------------------------------------------------
# threshold rule
# ---------------------------------------------------------------------------

def _curve(points):
    grid = [
        ReliabilityPoint(
            axis_value=n, n_systems=5, mean_rho=rho, mean_ci_width=width,
            trials=20, rho_std=0.0, bootstrap_replicates=100,
        )
        for n, rho, width in points
    ]
    return ReliabilityCurve(mode="raters", grid=grid, reference_leaderboard={})


def test_find_threshold_basic():
    curve = _curve([(100, 0.93, 25.0), (200, 0.96, 17.36)])
    result = find_threshold(curve)
    assert result.axis_value == 200
    assert result.mean_ci_width == pytest.approx(17.36)


def test_find_threshold_not_reached():
    curve = _curve([(100, 0.80, 30.0), (200, 0.90, 20.0)])
    assert find_threshold(curve) is None


def test_find_threshold_matches_scan_oracle():
    rng = np.random.default_rng(2)
    for _ in range(30):
        rhos = np.sort(rng.uniform(0.5, 1.0, size=6))
        points = [(25 * (i + 1), float(r), float(50 - i)) for i, r in enumerate(rhos)]
        curve = _curve(points)
        target = float(rng.uniform(0.6, 0.99))
        result = find_threshold(curve, target)
        scan = next((p for p in curve.grid if p.mean_rho >= target), None)
        if scan is None:
            assert result is None
        else:
            assert result.axis_value == scan.axis_value


def test_paper_reference_threshold_semantics():
    # Fig-5 style reference values: format and threshold semantics only
    five_systems = _curve([(100, 0.91, 24.0), (200, 0.955, 17.36), (400, 0.99, 12.0)])
    seven_systems = _curve([(100, 0.96, 21.47), (200, 0.99, 15.0)])
    assert find_threshold(five_systems).axis_value == 200
    assert find_threshold(five_systems).mean_ci_width == pytest.approx(17.36)
    assert find_threshold(seven_systems).axis_value == 100
    assert find_threshold(seven_systems).mean_ci_width == pytest.approx(21.47)
    # sentence-mode counterparts: ~1000 sentences for 5- and 7-system
    # setups, ~500 for 3 systems
    def sentence_curve(points, n_systems):
        grid = [
            ReliabilityPoint(axis_value=n, n_systems=n_systems, mean_rho=rho,
                             mean_ci_width=w, trials=20, rho_std=0.0,
                             bootstrap_replicates=100)
            for n, rho, w in points
        ]
        return ReliabilityCurve(mode="sentences", grid=grid,
                                reference_leaderboard={}, fixed_raters=200)

    five = sentence_curve([(500, 0.93, 22.0), (1000, 0.96, 16.0)], 5)
    three = sentence_curve([(250, 0.94, 20.0), (500, 0.97, 15.0)], 3)
    assert find_threshold(five).axis_value == 1000
    assert find_threshold(three).axis_value == 500


# ---------------------------------------------------------------------------
# stratified sentence sampling
# ---------------------------------------------------------------------------

def test_stratification_equal_quotas():
    rng = np.random.default_rng(3)
    pools = {f"l{i}": np.arange(i * 100, i * 100 + 40) for i in range(10)}
    chosen = stratified_sentence_sample(rng, pools, 100)
    assert len(chosen) == 100
    per_lang = {lang: np.isin(chosen, pool).sum() for lang, pool in pools.items()}
    assert all(v == 10 for v in per_lang.values())


def test_stratification_remainder_round_robin():
    rng = np.random.default_rng(4)
    pools = {f"l{i}": np.arange(i * 100, i * 100 + 40) for i in range(3)}
    chosen = stratified_sentence_sample(rng, pools, 11)
    per_lang = sorted(np.isin(chosen, pool).sum() for pool in pools.values())
    assert per_lang == [3, 4, 4]


# ---------------------------------------------------------------------------
# subsample curves on a simulated world
# ---------------------------------------------------------------------------

@pytest.fixture(scope="module")
def world():
    spec = WorldSpec(
        n_systems=4,
        n_raters=40,
        n_sentences=48,
        languages=("hin", "tam"),
        rater_noise=25.0,
        tie_rate=0.1,
        seed=99,
    )
    return run_simulation(spec)


def test_rater_curve_identity_subsample(world):
    curve = rater_subsample_curve(
        world.log, grid=[40], trials=1, bootstrap_replicates=40, seed=5
    )
    point = curve.grid[0]
    assert point.mean_rho == pytest.approx(1.0)
    assert point.rho_std == pytest.approx(0.0)
    # same derived bootstrap seed reproduces the full-data CI width
    boot = bootstrap_cis(world.log, replicates=40, seed=(5, _RATER_CI_TAG, 0, 0))
    assert point.mean_ci_width == pytest.approx(boot.mean_width())


def test_rater_curve_shape_on_simulated_world(world):
    curve = rater_subsample_curve(
        world.log, grid=(5, 10, 20, 40), trials=6, bootstrap_replicates=50, seed=7
    )
    rhos = [p.mean_rho for p in curve.grid]
    widths = [p.mean_ci_width for p in curve.grid]
    for a, b in zip(rhos, rhos[1:]):
        assert b >= a - 0.02  # non-decreasing within noise
    for a, b in zip(widths, widths[1:]):
        assert b < a  # strictly decreasing
    assert [p.axis_value for p in curve.grid] == [5, 10, 20, 40]
    assert all(p.bootstrap_replicates == 50 for p in curve.grid)
    assert all(p.trials == 6 for p in curve.grid)


def test_rater_curve_deterministic(world):
    kwargs = dict(grid=(5, 20), trials=3, bootstrap_replicates=30, seed=11)
    c1 = rater_subsample_curve(world.log, **kwargs)
    c2 = rater_subsample_curve(world.log, **kwargs)
    assert c1.to_dicts() == c2.to_dicts()


def test_rater_curve_grid_exceeding_raters_rejected(world):
    with pytest.raises(PairboardError, match="exceeds"):
        rater_subsample_curve(world.log, grid=[41], trials=2, seed=1)


def test_sentence_curve_identity_subsample(world):
    n_sentences = 96  # 48 per language x 2 languages
    curve = sentence_subsample_curve(
        world.log, grid=[n_sentences], fixed_raters=20, trials=2,
        bootstrap_replicates=30, seed=13,
    )
    assert curve.grid[0].mean_rho == pytest.approx(1.0)
    assert curve.fixed_raters == 20
    assert curve.mode == "sentences"


def test_sentence_curve_shape(world):
    curve = sentence_subsample_curve(
        world.log, grid=(12, 30, 60, 96), fixed_raters=20, trials=5,
        bootstrap_replicates=40, seed=17,
    )
    widths = [p.mean_ci_width for p in curve.grid]
    for a, b in zip(widths, widths[1:]):
        assert b < a
    rhos = [p.mean_rho for p in curve.grid]
    for a, b in zip(rhos, rhos[1:]):
        assert b >= a - 0.05
    assert rhos[-1] == pytest.approx(1.0)


def test_system_subset_restricts_curve(world):
    subset = ("sys01", "sys02", "sys03")
    curve = rater_subsample_curve(
        world.log, system_subset=subset, grid=[10], trials=2,
        bootstrap_replicates=30, seed=19,
    )
    assert curve.grid[0].n_systems == 3
    assert set(curve.reference_leaderboard) == set(subset)


def test_curve_csv_export(world):
    curve = rater_subsample_curve(
        world.log, grid=[10], trials=2, bootstrap_replicates=20, seed=23
    )
    text = curve.to_csv()
    header = text.splitlines()[0]
    assert header.split(",") == [
        "axis_value", "n_systems", "mean_rho", "rho_std",
        "mean_ci_width", "trials", "bootstrap_replicates",
    ]
    assert len(text.strip().splitlines()) == 2
