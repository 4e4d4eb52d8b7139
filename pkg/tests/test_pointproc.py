import math
import warnings

import numpy as np
import pytest
from scipy import stats

from sinrlab.geometry import Window
from sinrlab.measures import DirectingMeasureSpec, build_directing_measure
from sinrlab.pointproc import (
    MarkedConfiguration,
    NonequidistanceWarning,
    PowerDistribution,
    _check_degeneracies,
    empirical_intensity,
    mark_powers,
    min_relative_distance_gap,
    sample_cox,
    sample_ppp,
    thin_by_power,
)
from sinrlab.rng import substream

WINDOW = Window(side=5.0, margin=0.0)


def test_power_distribution_validation():
    with pytest.raises(ValueError):
        PowerDistribution.dirac(0.0)
    with pytest.raises(ValueError):
        PowerDistribution.exponential(-1.0)
    with pytest.raises(ValueError):
        PowerDistribution.pareto(0.0, 1.0)
    with pytest.raises(ValueError):
        PowerDistribution.uniform(2.0, 1.0)
    with pytest.raises(ValueError):
        PowerDistribution(kind="nope")


def test_power_distribution_moments_and_survival():
    assert PowerDistribution.dirac(2.0).expectation() == 2.0
    assert PowerDistribution.exponential(1.5).expectation() == 1.5
    assert PowerDistribution.pareto(3.0, 1.0).expectation() == pytest.approx(1.5)
    assert PowerDistribution.pareto(1.0, 1.0).expectation() == math.inf
    assert PowerDistribution.uniform(1.0, 3.0).expectation() == 2.0

    assert PowerDistribution.dirac(1.0).survival(1.0) == 1.0
    assert PowerDistribution.dirac(1.0).survival(1.1) == 0.0
    assert PowerDistribution.exponential(1.0).survival(2.0) == pytest.approx(
        math.exp(-2.0)
    )
    assert PowerDistribution.pareto(2.0, 1.0).survival(0.5) == 1.0
    assert PowerDistribution.pareto(2.0, 1.0).survival(4.0) == pytest.approx(1.0 / 16.0)
    u = PowerDistribution.uniform(1.0, 3.0)
    assert u.survival(0.5) == 1.0
    assert u.survival(2.0) == 0.5
    assert u.survival(3.5) == 0.0


def test_heavy_tail_flag():
    assert PowerDistribution.pareto(2.0, 1.0).heavy_tail
    assert not PowerDistribution.exponential(1.0).heavy_tail
    cfg = mark_powers(
        sample_ppp(1.0, WINDOW, seed=0), PowerDistribution.pareto(2.0, 1.0), seed=1
    )
    assert cfg.heavy_tail


def test_sample_ranges():
    rng = np.random.default_rng(0)
    assert np.all(PowerDistribution.pareto(2.0, 1.5).sample(rng, 1000) >= 1.5)
    u = PowerDistribution.uniform(1.0, 3.0).sample(rng, 1000)
    assert np.all((u >= 1.0) & (u <= 3.0))
    np.testing.assert_array_equal(PowerDistribution.dirac(2.0).sample(rng, 5), 2.0)


def test_ppp_empty_and_errors():
    assert sample_ppp(0.0, WINDOW, seed=1).size == 0
    with pytest.raises(ValueError):
        sample_ppp(-1.0, WINDOW, seed=1)


def test_ppp_determinism():
    a = sample_ppp(2.0, WINDOW, seed=42)
    b = sample_ppp(2.0, WINDOW, seed=42)
    np.testing.assert_array_equal(a.points, b.points)


def test_ppp_count_moments():
    """Poisson count: empirical mean within 3 standard errors."""
    intensity, seeds = 2.0, 400
    window = Window(side=5.0, margin=0.0)
    counts = np.array(
        [sample_ppp(intensity, window, substream(9, "ppp", k)).size for k in range(seeds)]
    )
    mean = intensity * window.buffered_volume
    se = math.sqrt(mean / seeds)
    assert abs(counts.mean() - mean) <= 3.0 * se
    # and positions are uniform: left-half fraction near one half
    cfg = sample_ppp(200.0, window, seed=3)
    frac = np.mean(cfg.points[:, 0] < 0)
    assert abs(frac - 0.5) <= 3.0 * math.sqrt(0.25 / cfg.size)


def test_cox_lebesgue_matches_ppp_distribution():
    """Count laws agree at the 1% level between the flat Cox and the PPP."""
    spec = DirectingMeasureSpec.lebesgue()
    window = Window(side=4.0, margin=0.0)
    n = 500
    cox_counts = np.empty(n)
    ppp_counts = np.empty(n)
    for k in range(n):
        real = build_directing_measure(spec, window, substream(5, "cox", k))
        cox_counts[k] = sample_cox(real, 2.0, substream(5, "coxpts", k)).size
        ppp_counts[k] = sample_ppp(2.0, window, substream(5, "ppp", k)).size
    assert stats.ks_2samp(cox_counts, ppp_counts).pvalue > 0.01


def test_cox_zero_intensity_and_errors():
    real = build_directing_measure(DirectingMeasureSpec.lebesgue(), WINDOW, seed=1)
    assert sample_cox(real, 0.0, seed=2).size == 0
    with pytest.raises(ValueError):
        sample_cox(real, -1.0, seed=2)


def test_cox_skeleton_points_lie_on_segments():
    spec = DirectingMeasureSpec.voronoi_edge(1.0)
    window = Window(side=6.0, margin=1.0)
    real = build_directing_measure(spec, window, seed=17)
    cfg = sample_cox(real, 4.0, seed=18)
    assert cfg.size > 0
    a = real.segments[:, 0]
    b = real.segments[:, 1]
    ab = b - a
    denom = np.maximum(np.sum(ab * ab, axis=1), 1e-300)
    for x in cfg.points:
        t = np.clip(np.sum((x - a) * ab, axis=1) / denom, 0.0, 1.0)
        proj = a + t[:, None] * ab
        assert np.min(np.linalg.norm(proj - x, axis=1)) < 1e-9


def test_cox_modulated_concentrates_in_covered_region():
    spec = DirectingMeasureSpec.modulated(8.0, 0.25, 1.0, 1.0)
    window = Window(side=8.0, margin=1.0)
    real = build_directing_measure(spec, window, seed=23)
    cfg = sample_cox(real, 4.0, seed=24)
    dens = real.density_at(cfg.points) * spec.normalization
    # most points should land where the density is high
    assert np.mean(dens > 1.0) > 0.5


def test_mark_powers():
    cfg = sample_ppp(2.0, WINDOW, seed=7)
    marked = mark_powers(cfg, PowerDistribution.dirac(1.0), seed=8)
    np.testing.assert_array_equal(marked.powers, 1.0)
    with pytest.raises(ValueError):
        mark_powers(marked, PowerDistribution.dirac(1.0), seed=9)


def test_mark_powers_law_of_large_numbers():
    window = Window(side=200.0, margin=0.0)
    cfg = sample_ppp(2.5, window, seed=10)
    assert cfg.size > 90_000
    marked = mark_powers(cfg, PowerDistribution.exponential(1.0), seed=11)
    se = 1.0 / math.sqrt(marked.size)
    assert abs(marked.powers.mean() - 1.0) <= 3.0 * se


def test_thin_by_power_dirac_cases():
    cfg = mark_powers(
        sample_ppp(2.0, WINDOW, seed=12), PowerDistribution.dirac(1.0), seed=13
    )
    assert thin_by_power(cfg, 0.5).size == cfg.size
    assert thin_by_power(cfg, 2.0).size == 0
    with pytest.raises(ValueError):
        thin_by_power(sample_ppp(2.0, WINDOW, seed=14), 1.0)


def test_thin_by_power_exponential_retention():
    window = Window(side=200.0, margin=0.0)
    cfg = mark_powers(
        sample_ppp(2.5, window, seed=15), PowerDistribution.exponential(1.0), seed=16
    )
    t = 0.7
    kept = thin_by_power(cfg, t)
    p = math.exp(-t)
    se = math.sqrt(p * (1 - p) / cfg.size)
    assert abs(kept.size / cfg.size - p) <= 3.0 * se
    assert np.all(kept.powers >= t)


def test_thinning_independent_of_position():
    """Retention rate is homogeneous across the four quadrants."""
    window = Window(side=100.0, margin=0.0)
    cfg = mark_powers(
        sample_ppp(2.0, window, seed=19), PowerDistribution.exponential(1.0), seed=20
    )
    kept_mask = cfg.powers >= 0.7
    quadrant = (cfg.points[:, 0] > 0).astype(int) * 2 + (cfg.points[:, 1] > 0).astype(int)
    totals = np.bincount(quadrant, minlength=4)
    kept = np.bincount(quadrant[kept_mask], minlength=4)
    rate = kept_mask.mean()
    chi2 = stats.chisquare(kept, totals * rate).pvalue
    assert chi2 > 0.01


def test_empirical_intensity():
    window = Window(side=10.0, margin=2.0)
    empty = MarkedConfiguration(points=np.zeros((0, 2)), window=window)
    region = Window(side=4.0, dimension=2)
    assert empirical_intensity(empty, region) == 0.0
    seeds = 200
    vals = [
        empirical_intensity(sample_ppp(3.0, window, substream(2, "ei", k)), region)
        for k in range(seeds)
    ]
    se = math.sqrt(3.0 / region.volume / seeds)
    assert abs(np.mean(vals) - 3.0) <= 3.0 * se
    with pytest.raises(ValueError):
        empirical_intensity(empty, Window(side=100.0))  # outside the buffered window


def test_thinned_intensity_follows_survival():
    """Independent thinning scales the intensity by the survival probability."""
    window = Window(side=30.0, margin=0.0)
    region = Window(side=20.0)
    t, lam, seeds = 0.9, 3.0, 80
    p = math.exp(-t)
    vals = []
    for k in range(seeds):
        cfg = mark_powers(
            sample_ppp(lam, window, substream(31, "thin", k)),
            PowerDistribution.exponential(1.0),
            substream(31, "pw", k),
        )
        vals.append(empirical_intensity(thin_by_power(cfg, t), region))
    se = math.sqrt(lam * p / region.volume / seeds)
    assert abs(np.mean(vals) - lam * p) <= 3.0 * se


def test_min_relative_distance_gap():
    assert min_relative_distance_gap(np.zeros((1, 2))) == math.inf
    assert min_relative_distance_gap(np.array([[0.0, 0.0], [1.0, 0.0]])) == math.inf
    equidistant = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]])
    assert min_relative_distance_gap(equidistant) == 0.0
    generic = np.array([[0.0, 0.0], [1.0, 0.0], [2.5, 0.3]])
    assert min_relative_distance_gap(generic) > 1e-3


def test_degenerate_configurations_are_flagged():
    window = Window(side=10.0, margin=0.0)
    bad = MarkedConfiguration(
        points=np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]), window=window
    )
    with pytest.warns(NonequidistanceWarning):
        _check_degeneracies(bad)
    rng = np.random.default_rng(0)
    many = rng.uniform(-5, 5, size=(600, 2))
    many[599] = many[0]  # exact duplicate beyond the pairwise-check size
    with pytest.raises(ValueError):
        _check_degeneracies(MarkedConfiguration(points=many, window=window))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        _check_degeneracies(sample_ppp(2.0, window, seed=33))


def test_configuration_immutability_and_subset():
    cfg = mark_powers(
        sample_ppp(2.0, WINDOW, seed=25), PowerDistribution.exponential(1.0), seed=26
    )
    with pytest.raises(ValueError):
        cfg.points[0, 0] = 99.0
    sub = cfg.subset(np.array([0, 2]))
    assert sub.size == 2
    np.testing.assert_array_equal(sub.points, cfg.points[[0, 2]])
    np.testing.assert_array_equal(sub.powers, cfg.powers[[0, 2]])


def test_configuration_validation():
    with pytest.raises(ValueError):
        MarkedConfiguration(points=np.zeros((3, 3)), window=WINDOW)
    with pytest.raises(ValueError):
        MarkedConfiguration(
            points=np.zeros((2, 2)), window=WINDOW, powers=np.array([1.0])
        )
    with pytest.raises(ValueError):
        MarkedConfiguration(
            points=np.zeros((2, 2)), window=WINDOW, powers=np.array([1.0, -1.0])
        )
