from collections import deque

import numpy as np
import pytest

from sinrlab.geometry import Window
from sinrlab.graphs import (
    GraphResult,
    classify_degree2_components,
    crossing_exists,
    degree_stats,
    label_clusters,
    largest_cluster_size,
    signal_weighted_neighbors,
)
from sinrlab.pathloss import PathLossModel
from sinrlab.pointproc import MarkedConfiguration, PowerDistribution, mark_powers, sample_ppp
from sinrlab.rng import substream

PL = PathLossModel.power_law(d_o=1.0, alpha=4.0)
WIN = Window(side=10.0, margin=0.0)


def make_graph(n, edges, positions=None, **kw):
    if positions is None:
        positions = np.stack([np.linspace(-4, 4, max(n, 1))[:n], np.zeros(n)], axis=1)
    return GraphResult(
        positions=positions, edges=np.asarray(edges, dtype=np.int64).reshape(-1, 2),
        window=WIN, **kw,
    )


def bfs_components(n, edges):
    """Reference partition: plain queue-based component labeling."""
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    labels = [-1] * n
    current = 0
    for start in range(n):
        if labels[start] >= 0:
            continue
        queue = deque([start])
        labels[start] = current
        while queue:
            v = queue.popleft()
            for w in adj[v]:
                if labels[w] < 0:
                    labels[w] = current
                    queue.append(w)
        current += 1
    return labels


def partitions_equal(a, b) -> bool:
    groups_a = {}
    for idx, lab in enumerate(a):
        groups_a.setdefault(lab, set()).add(idx)
    groups_b = {}
    for idx, lab in enumerate(b):
        groups_b.setdefault(lab, set()).add(idx)
    return set(map(frozenset, groups_a.values())) == set(map(frozenset, groups_b.values()))


def test_graph_result_validation():
    g = make_graph(3, [[2, 0], [0, 2], [1, 2]])
    # canonical order, duplicates collapsed
    np.testing.assert_array_equal(g.edges, [[0, 2], [1, 2]])
    with pytest.raises(ValueError):
        make_graph(3, [[1, 1]])
    with pytest.raises(ValueError):
        make_graph(3, [[0, 3]])


def test_degrees_and_stats():
    g = make_graph(4, [])
    assert degree_stats(g).max_degree == 0
    np.testing.assert_array_equal(degree_stats(g).histogram, [4])
    tri = make_graph(4, [[0, 1], [1, 2], [0, 2]])
    stats = degree_stats(tri)
    assert stats.max_degree == 2
    np.testing.assert_array_equal(stats.histogram, [1, 0, 3])
    np.testing.assert_array_equal(tri.degrees(), [2, 2, 2, 0])


def test_label_clusters_simple():
    empty = label_clusters(make_graph(0, []))
    assert empty.labels.shape == (0,)
    iso = label_clusters(make_graph(3, []))
    assert len(set(iso.labels.tolist())) == 3
    path = label_clusters(make_graph(4, [[0, 1], [1, 2], [2, 3]]))
    assert len(set(path.labels.tolist())) == 1
    assert largest_cluster_size(path) == 4


def test_label_clusters_against_bfs():
    rng = np.random.default_rng(17)
    for _ in range(100):
        n = int(rng.integers(1, 61))
        m = int(rng.integers(0, 2 * n))
        raw = rng.integers(0, n, size=(m, 2))
        raw = raw[raw[:, 0] != raw[:, 1]]
        pos = rng.uniform(-5, 5, size=(n, 2))
        g = label_clusters(make_graph(n, raw.reshape(-1, 2), positions=pos))
        ref = bfs_components(n, g.edges.tolist())
        assert partitions_equal(g.labels.tolist(), ref)
        assert largest_cluster_size(g) == max(
            np.bincount(np.asarray(ref)).max(), 1
        )


def test_crossing_requires_labels_and_touch():
    g = make_graph(2, [[0, 1]])
    with pytest.raises(ValueError):
        crossing_exists(g)
    labeled = label_clusters(g)
    with pytest.raises(ValueError):
        crossing_exists(labeled)  # no touch scale anywhere
    assert crossing_exists(labeled, touch=10.0)


def test_crossing_spanning_chain():
    # chain across the x-extent of the window connects both faces
    xs = np.linspace(-5.0, 5.0, 9)
    pos = np.stack([xs, np.zeros_like(xs)], axis=1)
    edges = [[i, i + 1] for i in range(8)]
    g = label_clusters(make_graph(9, edges, positions=pos, touch_scale=0.5))
    assert crossing_exists(g)
    assert not crossing_exists(g, axis=1)  # flat chain never spans vertically
    # removing one link splits the chain and kills the crossing
    broken = label_clusters(make_graph(9, edges[:4] + edges[5:], positions=pos, touch_scale=0.5))
    assert not crossing_exists(broken)


def test_crossing_touch_band():
    pos = np.array([[-4.8, 0.0], [4.8, 0.0]])
    g = label_clusters(make_graph(2, [[0, 1]], positions=pos, touch_scale=0.1))
    assert not crossing_exists(g)  # endpoints sit 0.2 away from the faces
    assert crossing_exists(g, touch=0.3)


def test_crossing_single_vertex_touching_both_faces():
    pos = np.array([[0.0, 0.0]])
    g = label_clusters(make_graph(1, [], positions=pos, touch_scale=6.0))
    assert crossing_exists(g)


def test_crossing_empty_graph():
    g = label_clusters(make_graph(0, []))
    assert not crossing_exists(g, touch=1.0)


def test_crossing_monotone_under_edge_addition():
    rng = np.random.default_rng(23)
    for _ in range(30):
        n = int(rng.integers(2, 30))
        pos = rng.uniform(-5, 5, size=(n, 2))
        all_pairs = [(a, b) for a in range(n) for b in range(a + 1, n)]
        rng.shuffle(all_pairs)
        crossed = False
        for m in range(0, len(all_pairs), max(1, len(all_pairs) // 6)):
            g = label_clusters(
                make_graph(n, np.asarray(all_pairs[:m]).reshape(-1, 2), positions=pos)
            )
            now = crossing_exists(g, touch=1.0)
            assert now >= crossed
            crossed = now


def test_classify_degree2():
    tri = label_clusters(make_graph(3, [[0, 1], [1, 2], [0, 2]]))
    kinds = classify_degree2_components(tri)
    assert list(kinds.values()) == ["cycle"]
    path = label_clusters(make_graph(4, [[0, 1], [1, 2], [2, 3]]))
    assert list(classify_degree2_components(path).values()) == ["path"]
    iso = label_clusters(make_graph(1, []))
    assert list(classify_degree2_components(iso).values()) == ["path"]
    star = label_clusters(make_graph(4, [[0, 1], [0, 2], [0, 3]]))
    with pytest.raises(ValueError):
        classify_degree2_components(star)
    with pytest.raises(ValueError):
        classify_degree2_components(make_graph(3, [[0, 1]]))  # unlabeled


def test_classify_cycle_iff_edge_count():
    """Random degree-at-most-2 graphs: cycle exactly when edges == vertices."""
    rng = np.random.default_rng(31)
    for _ in range(40):
        n = int(rng.integers(3, 40))
        perm = rng.permutation(n)
        edges = []
        # chop the permutation into chains, closing some into cycles
        start = 0
        while start < n:
            length = int(rng.integers(1, 8))
            chunk = perm[start : start + length]
            for a, b in zip(chunk[:-1], chunk[1:]):
                edges.append((int(a), int(b)))
            if len(chunk) >= 3 and rng.random() < 0.5:
                edges.append((int(chunk[-1]), int(chunk[0])))
            start += length
        g = label_clusters(make_graph(n, np.asarray(edges).reshape(-1, 2)))
        kinds = classify_degree2_components(g)
        vert_count = np.bincount(g.labels)
        edge_count = np.zeros_like(vert_count)
        for a, _ in g.edges:
            edge_count[g.labels[a]] += 1
        for label, kind in kinds.items():
            expected = "cycle" if edge_count[label] == vert_count[label] else "path"
            assert kind == expected


def test_signal_weighted_order_prefers_strong_far_transmitter():
    window = Window(side=20.0, margin=0.0)
    cfg = MarkedConfiguration(
        points=np.array([[0.0, 0.0], [1.0, 0.0], [3.0, 0.0]]),
        window=window,
        powers=np.array([1.0, 1.0, 100.0]),
    )
    # received powers at vertex 0: 1.0 from (1,0), 100/81 from (3,0)
    order = signal_weighted_neighbors(cfg, 0, 2, PL)
    np.testing.assert_array_equal(order, [2, 1])


def test_signal_weighted_tiebreak_prefers_closer():
    window = Window(side=20.0, margin=0.0)
    cfg = MarkedConfiguration(
        points=np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]]),
        window=window,
        powers=np.array([1.0, 1.0, 16.0]),
    )
    # both candidates deliver exactly 1.0; distance decides
    order = signal_weighted_neighbors(cfg, 0, 2, PL)
    np.testing.assert_array_equal(order, [1, 2])


def test_signal_weighted_dirac_matches_nearest_neighbor():
    for seed in range(10):
        window = Window(side=8.0, margin=0.0)
        cfg = mark_powers(
            sample_ppp(1.0, window, substream(seed, "p")),
            PowerDistribution.dirac(2.0),
            substream(seed, "m"),
        )
        if cfg.size < 3:
            continue
        target = np.zeros(2)
        order = signal_weighted_neighbors(cfg, target, cfg.size, PL)
        dist = np.linalg.norm(cfg.points - target, axis=1)
        np.testing.assert_array_equal(dist[order], np.sort(dist))


def test_signal_weighted_unresolved_tie():
    window = Window(side=10.0, margin=0.0)
    cfg = MarkedConfiguration(
        points=np.array([[1.0, 0.0], [-1.0, 0.0]]),
        window=window,
        powers=np.ones(2),
    )
    with pytest.raises(ValueError):
        signal_weighted_neighbors(cfg, np.zeros(2), 2, PL)


def test_signal_weighted_argument_errors():
    window = Window(side=10.0, margin=0.0)
    cfg = MarkedConfiguration(
        points=np.array([[1.0, 0.0], [-1.0, 2.0]]),
        window=window,
        powers=np.ones(2),
    )
    with pytest.raises(ValueError):
        signal_weighted_neighbors(cfg, np.zeros(2), 3, PL)
    with pytest.raises(ValueError):
        signal_weighted_neighbors(cfg, 0, 2, PL)  # only one other point
    bare = MarkedConfiguration(points=cfg.points, window=window)
    with pytest.raises(ValueError):
        signal_weighted_neighbors(bare, np.zeros(2), 1, PL)


def test_signal_weighted_excludes_receiver_vertex():
    window = Window(side=10.0, margin=0.0)
    cfg = MarkedConfiguration(
        points=np.array([[0.0, 0.0], [1.0, 0.0], [0.0, 2.0]]),
        window=window,
        powers=np.ones(3),
    )
    order = signal_weighted_neighbors(cfg, 0, 2, PL)
    assert 0 not in order.tolist()
    np.testing.assert_array_equal(order, [1, 2])
