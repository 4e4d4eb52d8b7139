import math

import numpy as np
import pytest

from sinrlab.geometry import Window
from sinrlab.pathloss import PathLossModel, gilbert_radius, pathloss_eval
from sinrlab.pointproc import MarkedConfiguration, PowerDistribution, mark_powers, sample_ppp
from sinrlab.rng import substream
from sinrlab.sinr import (
    SinrParams,
    build_gilbert_graph,
    build_minus_graph,
    build_sinr_graph,
    interference_at,
    minus_pair_table,
    sinr_pair_table,
    sinr_value,
    total_receiver_power,
)

PL = PathLossModel.power_law(d_o=1.0, alpha=4.0)
CONE = PathLossModel.cone(d_o=0.5, rho=4.0)


def three_point_config() -> MarkedConfiguration:
    window = Window(side=8.0, margin=0.0)
    return MarkedConfiguration(
        points=np.array([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]]),
        window=window,
        powers=np.ones(3),
    )


def random_marked(seed: int, side=6.0, margin=3.0, intensity=1.5, mean=1.0):
    window = Window(side=side, margin=margin)
    cfg = sample_ppp(intensity, window, substream(seed, "pts"))
    return mark_powers(cfg, PowerDistribution.exponential(mean), substream(seed, "pw"))


def brute_force_edges(config, params, model):
    """All-pairs two-directional threshold test between observation points."""
    obs = np.flatnonzero(config.observation_mask())
    edges = []
    for a in range(len(obs)):
        for b in range(a + 1, len(obs)):
            i, j = int(obs[a]), int(obs[b])
            if (
                sinr_value(config, i, j, params, model) > params.tau
                and sinr_value(config, j, i, params, model) > params.tau
            ):
                edges.append((a, b))
    return set(edges)


def edge_set(graph) -> set:
    return {tuple(e) for e in graph.edges.tolist()}


def test_sinr_hand_values():
    cfg = three_point_config()
    params = SinrParams(tau=0.5, noise=0.1, gamma=0.1)
    assert sinr_value(cfg, 0, 1, params, PL) == pytest.approx(
        9.411764705882351, rel=1e-14
    )
    assert sinr_value(cfg, 1, 0, params, PL) == pytest.approx(
        9.878048780487804, rel=1e-14
    )
    assert sinr_value(cfg, 1, 2, params, PL) == pytest.approx(
        0.6173780487804877, rel=1e-14
    )
    assert sinr_value(cfg, 2, 1, params, PL) == pytest.approx(0.3125, rel=1e-14)
    with pytest.raises(ValueError):
        sinr_value(cfg, 1, 1, params, PL)


def test_three_point_edges():
    cfg = three_point_config()
    graph = build_sinr_graph(cfg, SinrParams(tau=0.5, noise=0.1, gamma=0.1), PL)
    assert edge_set(graph) == {(0, 1)}


def test_interference_hand_sum():
    window = Window(side=8.0, margin=0.0)
    cfg = MarkedConfiguration(
        points=np.array([[1.0, 0.0], [3.0, 0.0]]), window=window, powers=np.ones(2)
    )
    val = interference_at(cfg, np.zeros(2), exclude=(), model=PL)
    assert val == pytest.approx(1.0 + 1.0 / 81.0, rel=1e-14)
    empty = MarkedConfiguration(points=np.zeros((0, 2)), window=window, powers=np.zeros(0))
    assert interference_at(empty, np.zeros(2), model=PL) == 0.0
    assert interference_at(cfg, np.zeros(2), exclude=(0,), model=PL) == pytest.approx(
        1.0 / 81.0, rel=1e-14
    )


def test_shifted_interference_dominates_pointwise():
    """The shifted bound at a cube center covers the true field on the cube."""
    rng = np.random.default_rng(5)
    for seed in range(20):
        cfg = random_marked(seed)
        a = 2.0
        z = rng.uniform(-1.0, 1.0, size=2)
        x = z + rng.uniform(-a / 2.0, a / 2.0, size=2)
        direct = interference_at(cfg, x, model=PL)
        bound = interference_at(cfg, z, model=PL, shift=a)
        assert direct <= bound * (1.0 + 1e-12)


def test_zero_denominator_sentinel():
    cfg = three_point_config()
    zero = SinrParams(tau=0.5, noise=0.0, gamma=0.0)
    assert sinr_value(cfg, 0, 1, zero, PL) == math.inf
    # beyond the cone support the signal itself vanishes
    short = PathLossModel.cone(d_o=0.5, rho=2.0)
    assert sinr_value(cfg, 0, 2, zero, short) == 0.0


def test_gamma_zero_equals_gilbert_min_rule():
    params = SinrParams(tau=0.5, noise=0.1, gamma=0.0)
    for seed in range(20):
        cfg = random_marked(seed)
        sinr_graph = build_sinr_graph(cfg, params, PL)
        radii = gilbert_radius(PL, params.tau, params.noise, cfg.powers)
        gilbert = build_gilbert_graph(cfg, radii, rule="min")
        assert edge_set(sinr_graph) == edge_set(gilbert)


def test_edges_match_brute_force_across_gammas():
    """Pair-table edges equal the all-pairs definition at several factors."""
    for seed in range(12):
        cfg = random_marked(seed, side=5.0, margin=2.0)
        for gamma in (0.0, 0.02, 0.1, 0.5, 2.0):
            params = SinrParams(tau=0.5, noise=0.1, gamma=gamma)
            graph = build_sinr_graph(cfg, params, PL)
            assert edge_set(graph) == brute_force_edges(cfg, params, PL)


def test_cone_edges_match_brute_force():
    params = SinrParams(tau=0.4, noise=0.2, gamma=0.05)
    for seed in range(6):
        cfg = random_marked(seed, side=5.0, margin=2.0)
        graph = build_sinr_graph(cfg, params, CONE)
        assert edge_set(graph) == brute_force_edges(cfg, params, CONE)


def test_gamma_monotone_edge_containment():
    for seed in range(10):
        cfg = random_marked(seed)
        table = sinr_pair_table(cfg, PL, tau=0.5, noise=0.1)
        for lo, hi in ((0.0, 0.05), (0.05, 0.2), (0.2, 1.0)):
            a = {tuple(e) for e in table.edges_at(hi).tolist()}
            b = {tuple(e) for e in table.edges_at(lo).tolist()}
            assert a <= b


def test_pair_table_criticals_are_positive():
    cfg = random_marked(3)
    table = sinr_pair_table(cfg, PL, tau=0.5, noise=0.1)
    assert len(table.gamma_crit) > 0
    assert np.all(table.gamma_crit > 0)


def test_minus_graph_is_subgraph():
    params = SinrParams(tau=0.5, noise=0.1, gamma=0.05)
    r_o = 2.0
    for seed in range(20):
        cfg = random_marked(seed)
        full = build_sinr_graph(cfg, params, PL)
        minus = build_minus_graph(cfg, params, PL, r_o=r_o)
        full_pairs = {
            tuple(sorted((full.source_indices[a], full.source_indices[b])))
            for a, b in full.edges
        }
        minus_pairs = {
            tuple(sorted((minus.source_indices[a], minus.source_indices[b])))
            for a, b in minus.edges
        }
        assert minus_pairs <= full_pairs


def test_minus_graph_matches_direct_definition():
    """Floored numerator, true-power interference, thinned vertex set."""
    params = SinrParams(tau=0.5, noise=0.1, gamma=0.08)
    r_o = 2.0
    floor = params.tau * params.noise / pathloss_eval(PL, r_o)
    for seed in range(6):
        cfg = random_marked(seed, side=5.0, margin=2.0)
        table = minus_pair_table(cfg, PL, params.tau, params.noise, r_o)
        keep = np.flatnonzero((cfg.powers >= floor) & cfg.observation_mask())
        np.testing.assert_array_equal(table.vertex_indices, keep)
        got = {tuple(e) for e in table.edges_at(params.gamma).tolist()}
        expected = set()
        for a in range(len(keep)):
            for b in range(a + 1, len(keep)):
                i, j = int(keep[a]), int(keep[b])
                d = float(np.linalg.norm(cfg.points[i] - cfg.points[j]))
                ell = pathloss_eval(PL, d)
                i_at_j = interference_at(cfg, cfg.points[j], exclude=(i, j), model=PL)
                i_at_i = interference_at(cfg, cfg.points[i], exclude=(i, j), model=PL)
                ok_ij = floor * ell > params.tau * (
                    params.noise + params.gamma * i_at_j
                )
                ok_ji = floor * ell > params.tau * (
                    params.noise + params.gamma * i_at_i
                )
                if ok_ij and ok_ji:
                    expected.add((a, b))
        assert got == expected


def test_minus_graph_dirac_keeps_all_vertices():
    window = Window(side=6.0, margin=2.0)
    cfg = mark_powers(
        sample_ppp(1.0, window, seed=2), PowerDistribution.dirac(1.0), seed=3
    )
    params = SinrParams(tau=0.5, noise=0.1, gamma=0.0)
    minus = build_minus_graph(cfg, params, PL, r_o=2.0)
    assert minus.n_vertices == int(cfg.observation_mask().sum())
    # at gamma 0 the thinned graph is the constant-radius distance graph
    gilbert = build_gilbert_graph(cfg, 2.0, rule="min")
    assert edge_set(minus) == edge_set(gilbert)


def test_minus_graph_parameter_errors():
    cfg = random_marked(0)
    params = SinrParams(tau=0.5, noise=0.1, gamma=0.0)
    with pytest.raises(ValueError):
        build_minus_graph(cfg, params, PL, r_o=0.5)  # inside the plateau
    with pytest.raises(ValueError):
        build_minus_graph(cfg, params, CONE, r_o=5.0)  # beyond the support


def test_power_scaling_invariance():
    """Scaling all powers and the noise together preserves the edge set."""
    c = 7.3
    for seed in range(8):
        window = Window(side=6.0, margin=3.0)
        base = mark_powers(
            sample_ppp(1.5, window, substream(seed, "p")),
            PowerDistribution.dirac(1.0),
            substream(seed, "m"),
        )
        scaled = MarkedConfiguration(
            points=base.points, window=window, powers=base.powers * c
        )
        params = SinrParams(tau=0.5, noise=0.1, gamma=0.1)
        params_scaled = SinrParams(tau=0.5, noise=0.1 * c, gamma=0.1)
        g1 = build_sinr_graph(base, params, PL)
        g2 = build_sinr_graph(scaled, params_scaled, PL)
        assert edge_set(g1) == edge_set(g2)


def test_deletion_stability():
    """Removing vertices only ever helps the surviving edges."""
    params = SinrParams(tau=0.5, noise=0.1, gamma=0.1)
    rng = np.random.default_rng(11)
    for seed in range(8):
        cfg = random_marked(seed)
        graph = build_sinr_graph(cfg, params, PL)
        keep = np.flatnonzero(rng.random(cfg.size) < 0.7)
        sub = cfg.subset(keep)
        sub_graph = build_sinr_graph(sub, params, PL)
        kept_src = set(keep[:].tolist())
        before = {
            tuple(sorted((graph.source_indices[a], graph.source_indices[b])))
            for a, b in graph.edges
        }
        after_src = {
            tuple(
                sorted(
                    (keep[sub_graph.source_indices[a]], keep[sub_graph.source_indices[b]])
                )
            )
            for a, b in sub_graph.edges
        }
        survivors = {e for e in before if e[0] in kept_src and e[1] in kept_src}
        assert survivors <= after_src


def test_degree_bound_at_half_tau_gamma():
    for seed in range(15):
        cfg = random_marked(seed)
        graph = build_sinr_graph(cfg, SinrParams(tau=0.5, noise=0.1, gamma=1.0), PL)
        assert graph.degrees().max(initial=0) <= 2


def test_graph_edges_are_canonical():
    cfg = random_marked(1)
    graph = build_sinr_graph(cfg, SinrParams(tau=0.5, noise=0.1, gamma=0.01), PL)
    if graph.n_edges:
        assert np.all(graph.edges[:, 0] < graph.edges[:, 1])
        assert len(np.unique(graph.edges, axis=0)) == graph.n_edges


def test_total_receiver_power_matches_numpy():
    """The compiled kernel agrees with a plain vectorized evaluation."""
    for model in (PL, PathLossModel.power_law(1.0, 3.5), CONE):
        for seed in range(5):
            cfg = random_marked(seed, side=5.0, margin=2.0)
            targets = np.random.default_rng(seed).uniform(-4, 4, size=(20, 2))
            got = total_receiver_power(cfg, targets, model)
            dist = np.linalg.norm(targets[:, None, :] - cfg.points[None, :, :], axis=2)
            expected = np.sum(cfg.powers[None, :] * pathloss_eval(model, dist), axis=1)
            np.testing.assert_allclose(got, expected, rtol=1e-12)


def test_gilbert_graph_rules():
    window = Window(side=10.0, margin=0.0)
    pts = np.array([[0.0, 0.0], [1.0, 0.0]])
    assert build_gilbert_graph(pts, 2.0, window=window).n_edges == 1
    assert build_gilbert_graph(pts, 0.5, window=window).n_edges == 0
    # min rule needs both radii above the distance, sum rule their total
    radii = np.array([3.0, 0.6])
    assert build_gilbert_graph(pts, radii, rule="min", window=window).n_edges == 0
    assert build_gilbert_graph(pts, radii, rule="sum", window=window).n_edges == 1
    with pytest.raises(ValueError):
        build_gilbert_graph(pts, 2.0, rule="nope", window=window)
    with pytest.raises(ValueError):
        build_gilbert_graph(pts, 2.0)  # raw points need a window
    with pytest.raises(ValueError):
        build_gilbert_graph(pts, -1.0, window=window)


def test_zero_noise_dense_path_guard():
    window = Window(side=80.0, margin=0.0)
    big = mark_powers(
        sample_ppp(1.0, window, seed=4), PowerDistribution.dirac(1.0), seed=5
    )
    assert big.size > 4000
    with pytest.raises(ValueError):
        build_sinr_graph(big, SinrParams(tau=0.5, noise=0.0, gamma=0.1), PL)


def test_zero_noise_small_config_works():
    window = Window(side=4.0, margin=0.0)
    cfg = mark_powers(
        sample_ppp(1.0, window, seed=6), PowerDistribution.dirac(1.0), seed=7
    )
    params = SinrParams(tau=0.5, noise=0.0, gamma=0.05)
    graph = build_sinr_graph(cfg, params, PL)
    assert edge_set(graph) == brute_force_edges(cfg, params, PL)


def test_observation_window_vertices_only():
    cfg = random_marked(9, side=4.0, margin=3.0)
    graph = build_sinr_graph(cfg, SinrParams(tau=0.5, noise=0.1, gamma=0.0), PL)
    assert graph.n_vertices == int(cfg.observation_mask().sum())
    assert np.all(cfg.window.contains(graph.positions))
