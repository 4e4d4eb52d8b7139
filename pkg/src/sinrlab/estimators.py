"""Percolation estimators and laboratory-scale experiments.

Crossing probabilities are estimated on finite windows with Wilson
intervals. Sweeps share randomness across grid points: a distance-graph
intensity sweep thins one maximal-intensity configuration per replica, and
an interference sweep evaluates one critical-value table per replica, so
per-seed monotonicity is exact where the model guarantees it.

Each replica is reduced on the fly to its critical parameter value (the
interference factor, or the thinning level, at which a crossing appears),
so estimates at every grid or bisection point come from one pass over the
replicas.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .geometry import Window
from .graphs import (
    classify_degree2_components,
    crossing_exists,
    degree_stats,
    label_clusters,
    largest_cluster_size,
)
from .measures import DirectingMeasureSpec, build_directing_measure
from .pathloss import PathLossModel, default_margin, gilbert_radius
from .pointproc import (
    MarkedConfiguration,
    PowerDistribution,
    mark_powers,
    sample_cox,
    sample_ppp,
    thin_by_power,
)
from .rng import substream
from .renorm import RenormParams, good_site, power_floor, tame_site
from .sinr import PairTable, interference_at, sinr_pair_table

__all__ = [
    "ModelConfig",
    "Estimate",
    "wilson_interval",
    "BracketError",
    "crossing_probability",
    "crossing_sweep",
    "degree_sweep",
    "LambdaCResult",
    "estimate_lambda_c_gilbert",
    "GammaStarResult",
    "estimate_gamma_star",
    "Theorem1Report",
    "theorem1_experiment",
    "Theorem2Report",
    "theorem2_experiment",
    "Theorem3Report",
    "theorem3_experiment",
]

_BISECTION_MAX_ITER = 20
_BISECTION_RTOL = 1e-3
_CROSSING_AXIS = 0


class BracketError(RuntimeError):
    """A bisection could not bracket the 0.5 crossing level."""


@dataclass(frozen=True)
class ModelConfig:
    """Everything needed to realize one marked configuration."""

    measure: DirectingMeasureSpec
    powers: PowerDistribution
    pathloss: PathLossModel
    tau: float
    noise: float
    margin: float | None = None  # None: derived from the margin rule

    def __post_init__(self) -> None:
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.noise < 0:
            raise ValueError("noise must be nonnegative")
        if self.measure.dimension != self.pathloss.dimension:
            raise ValueError("measure and path-loss dimensions differ")

    @property
    def dimension(self) -> int:
        return self.pathloss.dimension

    def margin_for(self, intensity: float) -> float:
        if self.margin is not None:
            return self.margin
        return default_margin(
            self.pathloss, intensity, self.powers.expectation(), self.tau, self.noise
        )

    def window_for(self, side: float, intensity: float) -> Window:
        return Window(
            side=side, margin=self.margin_for(intensity), dimension=self.dimension
        )

    def sample(
        self, intensity: float, side: float, rng: np.random.Generator
    ) -> MarkedConfiguration:
        window = self.window_for(side, intensity)
        if self.measure.kind == "lebesgue":
            config = sample_ppp(intensity / self.measure.normalization, window, rng)
        else:
            measure = build_directing_measure(self.measure, window, rng)
            config = sample_cox(measure, intensity, rng)
        return mark_powers(config, self.powers, rng)


@dataclass(frozen=True)
class Estimate:
    value: float
    ci_lo: float
    ci_hi: float
    replicas: int


def wilson_interval(successes: int, n: int, z: float = 1.96) -> tuple[float, float]:
    """Wilson score interval for a binomial proportion."""
    if n <= 0:
        return 0.0, 1.0
    phat = successes / n
    z2 = z * z
    denom = 1.0 + z2 / n
    center = (phat + z2 / (2 * n)) / denom
    half = z * math.sqrt(phat * (1 - phat) / n + z2 / (4 * n * n)) / denom
    return max(0.0, center - half), min(1.0, center + half)


def _estimate(successes: int, n: int) -> Estimate:
    lo, hi = wilson_interval(successes, n)
    return Estimate(value=successes / n if n else 0.0, ci_lo=lo, ci_hi=hi, replicas=n)


class _UnionFind:
    """Union-find over vertices carrying face-touch bits per root."""

    __slots__ = ("parent", "rank", "mask")

    def __init__(self, n: int, mask: np.ndarray):
        self.parent = list(range(n))
        self.rank = [0] * n
        self.mask = bytearray(mask.tolist())

    def find(self, a: int) -> int:
        parent = self.parent
        while parent[a] != a:
            parent[a] = parent[parent[a]]
            a = parent[a]
        return a

    def union(self, a: int, b: int) -> int:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return ra
        if self.rank[ra] < self.rank[rb]:
            ra, rb = rb, ra
        self.parent[rb] = ra
        if self.rank[ra] == self.rank[rb]:
            self.rank[ra] += 1
        self.mask[ra] |= self.mask[rb]
        return ra


def _touch_bits(positions: np.ndarray, window: Window, touch: float, axis: int) -> np.ndarray:
    coord = positions[:, axis]
    lo = coord <= window.lo()[axis] + touch
    hi = coord >= window.hi()[axis] - touch
    return (lo.astype(np.uint8) | (hi.astype(np.uint8) << 1)).astype(np.uint8)


def _crossing_critical_gamma(table: PairTable, axis: int = _CROSSING_AXIS) -> float:
    """Largest gamma with a face crossing; -inf when none exists at any gamma."""
    if table.n_vertices == 0:
        return -math.inf
    bits = _touch_bits(table.positions, table.window, table.touch_scale, axis)
    if np.any(bits == 3):
        return math.inf
    if len(table.pairs) == 0:
        return -math.inf
    uf = _UnionFind(table.n_vertices, bits)
    order = np.argsort(-table.gamma_crit, kind="stable")
    pairs = table.pairs
    crit = table.gamma_crit
    for e in order:
        root = uf.union(int(pairs[e, 0]), int(pairs[e, 1]))
        if uf.mask[root] == 3:
            return float(crit[e])
    return -math.inf


def _replica_stats(table: PairTable, gamma: float) -> dict:
    """Graph statistics of one replica at a fixed cancellation factor."""
    graph = label_clusters(table.graph_at(gamma))
    deg = degree_stats(graph)
    tags = classify_degree2_components(graph) if deg.max_degree <= 2 else {}
    return {
        "max_degree": deg.max_degree,
        "largest": largest_cluster_size(graph),
        "paths": sum(1 for t in tags.values() if t == "path"),
        "cycles": sum(1 for t in tags.values() if t == "cycle"),
        "crossing": crossing_exists(graph, axis=_CROSSING_AXIS),
    }


def _ens_task(args) -> tuple[int, float, dict | None]:
    mc, intensity, side, seed, rep, stats_gamma = args
    rng = substream(seed, "ens", repr(side), rep)
    config = mc.sample(intensity, side, rng)
    table = sinr_pair_table(config, mc.pathloss, mc.tau, mc.noise)
    crit = _crossing_critical_gamma(table)
    stats = _replica_stats(table, stats_gamma) if stats_gamma is not None else None
    return rep, crit, stats


def _gamma_critical_ensemble(
    mc: ModelConfig,
    intensity: float,
    side: float,
    replicas: int,
    seed: int,
    stats_gamma: float | None = None,
    workers: int = 1,
) -> tuple[np.ndarray, list[dict | None]]:
    """Per-replica critical gamma for a window crossing.

    Replicas are seeded individually and reassembled by index, so the
    result is identical for any worker count. When stats_gamma is given,
    each replica also reports graph statistics at that fixed factor.
    """
    tasks = [(mc, intensity, side, seed, rep, stats_gamma) for rep in range(replicas)]
    crits = np.empty(replicas)
    stats: list[dict | None] = [None] * replicas
    for rep, crit, extra in _run_tasks(_ens_task, tasks, workers):
        crits[rep] = crit
        stats[rep] = extra
    return crits, stats


def _run_tasks(fn, tasks: list, workers: int):
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    import multiprocessing

    ctx = multiprocessing.get_context("fork")
    with ctx.Pool(processes=workers) as pool:
        return pool.map(fn, tasks)


def crossing_probability(
    mc: ModelConfig,
    intensity: float,
    gamma: float,
    side: float,
    replicas: int,
    seed: int,
    workers: int = 1,
) -> Estimate:
    """Crossing probability of the interference graph on one window."""
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    crits, _ = _gamma_critical_ensemble(
        mc, intensity, side, replicas, seed, workers=workers
    )
    return _estimate(int(np.sum(crits > gamma)), replicas)


def crossing_sweep(
    mc: ModelConfig,
    intensities: tuple[float, ...],
    gammas: tuple[float, ...],
    windows: tuple[float, ...],
    replicas: int,
    seed: int,
    workers: int = 1,
) -> list[dict]:
    """Crossing probability on a grid of intensity, gamma and window side.

    All gamma values at one (intensity, side) share the same replicas, so
    the estimates are nonincreasing in gamma exactly, not just on average.
    """
    records: list[dict] = []
    for side in sorted(windows):
        for intensity in intensities:
            crits, _ = _gamma_critical_ensemble(
                mc, intensity, side, replicas, seed, workers=workers
            )
            for gamma in gammas:
                if gamma < 0:
                    raise ValueError("gamma must be nonnegative")
                est = _estimate(int(np.sum(crits > gamma)), replicas)
                records.append(
                    {
                        "intensity": intensity,
                        "gamma": gamma,
                        "side": side,
                        "estimate": est,
                    }
                )
    return records


def _deg_task(args) -> tuple[int, list[tuple[int, float, int, int]]]:
    mc, intensity, side, seed, rep, gammas = args
    rng = substream(seed, "ens", repr(side), rep)
    config = mc.sample(intensity, side, rng)
    table = sinr_pair_table(config, mc.pathloss, mc.tau, mc.noise)
    rows = []
    for gamma in gammas:
        graph = table.graph_at(gamma)
        deg = graph.degrees()
        mean = float(deg.mean()) if len(deg) else 0.0
        rows.append((int(deg.max()) if len(deg) else 0, mean, graph.n_vertices, graph.n_edges))
    return rep, rows


def degree_sweep(
    mc: ModelConfig,
    intensity: float,
    gammas: tuple[float, ...],
    side: float,
    replicas: int,
    seed: int,
    workers: int = 1,
) -> list[dict]:
    """Degree statistics of the interference graph along a gamma grid."""
    tasks = [(mc, intensity, side, seed, rep, tuple(gammas)) for rep in range(replicas)]
    per_rep: list[list[tuple[int, float, int, int]] | None] = [None] * replicas
    for rep, rows in _run_tasks(_deg_task, tasks, workers):
        per_rep[rep] = rows
    records: list[dict] = []
    for k, gamma in enumerate(gammas):
        max_deg = max(per_rep[rep][k][0] for rep in range(replicas))
        mean_deg = float(np.mean([per_rep[rep][k][1] for rep in range(replicas)]))
        mean_edges = float(np.mean([per_rep[rep][k][3] for rep in range(replicas)]))
        bound = 1.0 + 1.0 / (mc.tau * gamma) if gamma > 0 else math.inf
        records.append(
            {
                "intensity": intensity,
                "gamma": gamma,
                "side": side,
                "max_degree": max_deg,
                "mean_degree": mean_deg,
                "mean_edges": mean_edges,
                "degree_bound": bound,
                "replicas": replicas,
            }
        )
    return records


def _bisect(
    prob, lo: float, hi: float, target: float = 0.5
) -> tuple[float, float, float]:
    """Bisection on a nonincreasing probability curve; returns (est, lo, hi)."""
    for _ in range(_BISECTION_MAX_ITER):
        mid = 0.5 * (lo + hi)
        if hi - lo <= _BISECTION_RTOL * max(abs(mid), 1e-12):
            break
        if prob(mid) >= target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi), lo, hi


@dataclass(frozen=True)
class GammaStarResult:
    value: float
    per_window: dict[float, float]
    spread: float
    below_threshold: bool
    replicas: int
    diagnostics: dict[float, list[tuple[float, float]]]  # side -> (gamma, p) ladder


def estimate_gamma_star(
    intensity: float,
    mc: ModelConfig,
    windows: tuple[float, ...],
    replicas: int,
    seed: int,
    workers: int = 1,
) -> GammaStarResult:
    """Bisection for the gamma at which the crossing probability is one half.

    Reports 0 when the intensity does not cross at gamma 0. The attached
    ladder of shared-seed estimates is nonincreasing in gamma by exact
    coupling.
    """
    if not windows:
        raise ValueError("need at least one window side")
    sides = sorted(windows)
    per_window: dict[float, float] = {}
    diagnostics: dict[float, list[tuple[float, float]]] = {}
    below = False
    for side in sides:
        crits, _ = _gamma_critical_ensemble(
            mc, intensity, side, replicas, seed, workers=workers
        )

        def prob(g: float) -> float:
            return float(np.sum(crits > g)) / replicas

        if prob(0.0) < 0.5:
            per_window[side] = 0.0
            below = side == sides[-1]
            diagnostics[side] = [(0.0, prob(0.0))]
            continue
        hi = 0.5 / mc.tau
        rounds = 0
        while prob(hi) >= 0.5 and rounds < 6:
            hi *= 2.0
            rounds += 1
        if prob(hi) >= 0.5:
            raise BracketError("crossing persists beyond the searched gamma range")
        est, _, _ = _bisect(prob, 0.0, hi)
        per_window[side] = est
        ladder = [0.0, 0.5 * est, est, 2.0 * est, hi] if est > 0 else [0.0, hi]
        diagnostics[side] = [(g, prob(g)) for g in ladder]
    values = list(per_window.values())
    return GammaStarResult(
        value=per_window[sides[-1]],
        per_window=per_window,
        spread=max(values) - min(values) if len(values) > 1 else 0.0,
        below_threshold=below,
        replicas=replicas,
        diagnostics=diagnostics,
    )


# ---------------------------------------------------------------------------
# distance-graph intensity estimation with coupled thinning


def _lambda_critical_once(
    r: float,
    side: float,
    lam_cap: float,
    dimension: int,
    rng: np.random.Generator,
    axis: int = _CROSSING_AXIS,
) -> float:
    """Critical intensity for one coupled replica, via activation order.

    Points of a maximal-intensity sample activate at independent uniform
    levels; a point is present at intensity lam when its level is at most
    lam / lam_cap. Vertices and edges are replayed in activation order
    until a crossing appears.
    """
    window = Window(side=side, dimension=dimension)
    count = rng.poisson(lam_cap * window.volume)
    lo = np.asarray(window.center) - side / 2.0
    pts = lo + side * rng.random((count, dimension))
    levels = rng.random(count)
    if count == 0:
        return math.inf
    bits = _touch_bits(pts, window, r, axis)
    pairs = cKDTree(pts).query_pairs(r, output_type="ndarray")
    if len(pairs):
        d = np.linalg.norm(pts[pairs[:, 0]] - pts[pairs[:, 1]], axis=1)
        pairs = pairs[d < r]
    edge_level = np.maximum(levels[pairs[:, 0]], levels[pairs[:, 1]]) if len(pairs) else np.zeros(0)
    n_v = count
    events = np.concatenate([levels, edge_level])
    order = np.argsort(events, kind="stable")
    uf = _UnionFind(n_v, np.zeros(n_v, dtype=np.uint8))
    for ev in order:
        if ev < n_v:
            root = uf.find(int(ev))
            uf.mask[root] |= int(bits[ev])
        else:
            e = ev - n_v
            root = uf.union(int(pairs[e, 0]), int(pairs[e, 1]))
        if uf.mask[root] == 3:
            return float(events[ev]) * lam_cap
    return math.inf


def _gil_task(args) -> tuple[int, float, None]:
    r, side, lam_cap, dimension, seed, round_key, rep = args
    rng = substream(seed, "gil", repr(side), round_key, rep)
    return rep, _lambda_critical_once(r, side, lam_cap, dimension, rng), None


def _lambda_critical_ensemble(
    r: float,
    side: float,
    lam_cap: float,
    dimension: int,
    replicas: int,
    seed: int,
    round_key: int,
    workers: int = 1,
) -> np.ndarray:
    tasks = [
        (r, side, lam_cap, dimension, seed, round_key, rep) for rep in range(replicas)
    ]
    crits = np.empty(replicas)
    for rep, crit, _ in _run_tasks(_gil_task, tasks, workers):
        crits[rep] = crit
    return crits


@dataclass(frozen=True)
class LambdaCResult:
    value: float
    per_window: dict[float, float]
    spread: float
    replicas: int
    criticals: dict[float, np.ndarray] = field(repr=False, default_factory=dict)

    def crossing_estimate(self, side: float, intensity: float) -> Estimate:
        crits = self.criticals[side]
        return _estimate(int(np.sum(crits <= intensity)), len(crits))


def estimate_lambda_c_gilbert(
    r: float,
    windows: tuple[float, ...],
    replicas: int,
    seed: int,
    dimension: int = 2,
    lam_hint: float | None = None,
    workers: int = 1,
) -> LambdaCResult:
    """Critical intensity of the constant-radius distance graph.

    Bisection targets crossing probability 0.5 on each window size; the
    reported value comes from the largest window, with the spread across
    windows as a finite-size error indicator.
    """
    if dimension < 2:
        raise ValueError("percolation estimation needs dimension at least 2")
    if r <= 0 or not math.isfinite(r):
        raise ValueError("connection radius must be positive and finite")
    guess = lam_hint if lam_hint is not None else 1.44 / r**dimension
    per_window: dict[float, float] = {}
    criticals: dict[float, np.ndarray] = {}
    for side in sorted(windows):
        lo, hi = guess / 2.0, 2.0 * guess
        for round_key in range(8):
            lam_cap = 2.0 * hi
            crits = _lambda_critical_ensemble(
                r, side, lam_cap, dimension, replicas, seed, round_key, workers
            )

            def prob(lam: float) -> float:
                return float(np.sum(crits <= lam)) / replicas

            if prob(lo) >= 0.5:
                lo /= 2.0
                continue
            if prob(hi) < 0.5:
                hi *= 2.0
                continue
            break
        else:
            raise BracketError(
                f"no intensity bracket around crossing level 0.5 in [{lo}, {hi}]"
            )

        def prob_cross(lam: float) -> float:
            return float(np.sum(crits <= lam)) / replicas

        # crossing probability increases with intensity; flip the sense
        est, _, _ = _bisect(lambda lam: 1.0 - prob_cross(lam), lo, hi, target=0.5)
        per_window[side] = est
        criticals[side] = crits
    sides = sorted(windows)
    values = [per_window[s] for s in sides]
    return LambdaCResult(
        value=per_window[sides[-1]],
        per_window=per_window,
        spread=max(values) - min(values) if len(values) > 1 else 0.0,
        replicas=replicas,
        criticals=criticals,
    )


# ---------------------------------------------------------------------------
# theorem-scale experiments


@dataclass(frozen=True)
class Theorem2Report:
    gamma: float
    grid: list[dict]
    degree_violations: int
    crossing_monotone_in_window: bool
    largest_cluster_sublinear: bool


def theorem2_experiment(
    intensities: tuple[float, ...],
    mc: ModelConfig,
    windows: tuple[float, ...],
    replicas: int,
    seed: int,
    workers: int = 1,
) -> Theorem2Report:
    """Degree census at the cancellation factor 1 / (2 tau).

    Every realization must respect the degree bound (at most 2); crossing
    probability must not grow with the window; the mean largest cluster
    must grow slower than the window side.
    """
    gamma = 0.5 / mc.tau
    bound = 1.0 + 1.0 / (mc.tau * gamma)
    sides = sorted(windows)
    grid: list[dict] = []
    violations = 0
    for intensity in intensities:
        for side in sides:
            crits, stats = _gamma_critical_ensemble(
                mc, intensity, side, replicas, seed, stats_gamma=gamma, workers=workers
            )
            crossings = 0
            max_degree = 0
            largest = []
            paths = cycles = 0
            for rep, entry in enumerate(stats):
                max_degree = max(max_degree, entry["max_degree"])
                if not entry["max_degree"] < bound:
                    violations += 1
                paths += entry["paths"]
                cycles += entry["cycles"]
                largest.append(entry["largest"])
                if entry["crossing"]:
                    crossings += 1
                if entry["crossing"] != bool(crits[rep] > gamma):
                    raise AssertionError("crossing flag disagrees with critical value")
            grid.append(
                {
                    "intensity": intensity,
                    "side": side,
                    "crossing": _estimate(crossings, replicas),
                    "mean_largest": float(np.mean(largest)),
                    "max_degree": max_degree,
                    "paths": paths,
                    "cycles": cycles,
                }
            )
    monotone = True
    sublinear = True
    for intensity in intensities:
        rows = {g["side"]: g for g in grid if g["intensity"] == intensity}
        small, large = rows[sides[0]], rows[sides[-1]]
        se = math.sqrt(
            _half_width(small["crossing"]) ** 2 + _half_width(large["crossing"]) ** 2
        )
        if large["crossing"].value > small["crossing"].value + 2.0 * se:
            monotone = False
        ratio_clusters = large["mean_largest"] / max(small["mean_largest"], 1e-12)
        if ratio_clusters >= sides[-1] / sides[0]:
            sublinear = False
    return Theorem2Report(
        gamma=gamma,
        grid=grid,
        degree_violations=violations,
        crossing_monotone_in_window=monotone,
        largest_cluster_sublinear=sublinear,
    )


def _half_width(est: Estimate) -> float:
    return 0.5 * (est.ci_hi - est.ci_lo)


@dataclass(frozen=True)
class Theorem3Report:
    r_b: float
    lambda_c: LambdaCResult
    stability: float
    witnesses: list[dict]
    subcritical: dict
    bracket: tuple[float, float] | None
    bracket_deviation: float | None


def theorem3_experiment(
    mc: ModelConfig,
    windows: tuple[float, ...],
    replicas: int,
    seed: int,
    multipliers: tuple[float, ...] = (1.05, 1.2, 1.5),
    subcritical_factor: float = 0.8,
    workers: int = 1,
) -> Theorem3Report:
    """Continuity of the percolation threshold at vanishing cancellation.

    Estimates the distance-graph critical intensity at the connection
    radius of the constant power, then exhibits positive-cancellation
    crossings just above it and the absence of crossings just below.
    """
    if mc.powers.kind != "dirac":
        raise ValueError("the threshold-continuity experiment uses constant powers")
    if mc.measure.kind != "lebesgue":
        raise ValueError("the threshold-continuity experiment uses the flat measure")
    r_b = gilbert_radius(mc.pathloss, mc.tau, mc.noise, mc.powers.p)
    if not (math.isfinite(r_b) and r_b > 0):
        raise ValueError("constant power admits no finite positive connection radius")
    lam = estimate_lambda_c_gilbert(
        r_b, windows, replicas, seed, dimension=mc.dimension, workers=workers
    )
    sides = sorted(windows)
    values = [lam.per_window[s] for s in sides]
    stability = (max(values) - min(values)) / lam.value
    witnesses: list[dict] = []
    largest = sides[-1]
    for mult in multipliers:
        intensity = mult * lam.value
        crits, _ = _gamma_critical_ensemble(
            mc, intensity, largest, replicas, seed, workers=workers
        )
        p0 = float(np.sum(crits > 0.0)) / replicas

        def prob(g: float) -> float:
            return float(np.sum(crits > g)) / replicas

        witness = None
        if p0 > 0.5:
            hi = 0.5 / mc.tau
            rounds = 0
            while prob(hi) >= 0.5 and rounds < 6:
                hi *= 2.0
                rounds += 1
            gamma_w, _, _ = _bisect(prob, 0.0, hi)
            while gamma_w > 0 and prob(gamma_w) <= 0.5:
                gamma_w /= 2.0
            if gamma_w > 0 and prob(gamma_w) > 0.5:
                successes = int(np.sum(crits > gamma_w))
                witness = {
                    "gamma": gamma_w,
                    "crossing": _estimate(successes, replicas),
                }
        witnesses.append(
            {
                "multiplier": mult,
                "intensity": intensity,
                "p_zero_gamma": p0,
                "witness": witness,
            }
        )
    sub_intensity = subcritical_factor * lam.value
    sub_est = lam.crossing_estimate(largest, sub_intensity)
    subcritical = {
        "multiplier": subcritical_factor,
        "intensity": sub_intensity,
        "crossing": sub_est,
    }
    bracket = None
    deviation = None
    upper_candidates = [w["intensity"] for w in witnesses if w["witness"] is not None]
    if upper_candidates and sub_est.value < 0.5:
        bracket = (sub_intensity, min(upper_candidates))
        midpoint = 0.5 * (bracket[0] + bracket[1])
        deviation = abs(midpoint - lam.value) / lam.value
    return Theorem3Report(
        r_b=r_b,
        lambda_c=lam,
        stability=stability,
        witnesses=witnesses,
        subcritical=subcritical,
        bracket=bracket,
        bracket_deviation=deviation,
    )


@dataclass(frozen=True)
class Theorem1Report:
    route: str
    assumption_violations: list[str]
    trace: list[dict]
    witness: dict | None
    renorm_diagnostics: dict | None


def theorem1_experiment(
    mc: ModelConfig,
    seed: int,
    windows: tuple[float, ...] = (32.0, 64.0),
    replicas: int = 150,
    intensities: tuple[float, ...] | None = None,
    attach_renorm: bool = True,
    workers: int = 1,
) -> Theorem1Report:
    """Search for a supercritical pair (intensity, gamma > 0).

    The route records which set of sufficient conditions the model
    plausibly falls under; violated moment assumptions are flagged and, if
    the mean power diverges without an explicit margin, the search is
    skipped rather than asserted.
    """
    route = _theorem1_route(mc)
    violations = _assumption_violations(mc)
    if not math.isfinite(mc.powers.expectation()) and mc.margin is None:
        return Theorem1Report(
            route=route,
            assumption_violations=violations + ["mean power diverges; no margin rule"],
            trace=[],
            witness=None,
            renorm_diagnostics=None,
        )
    largest = sorted(windows)[-1]
    if intensities is None:
        r_guess = gilbert_radius(
            mc.pathloss, mc.tau, mc.noise, mc.powers.expectation()
        )
        if not (math.isfinite(r_guess) and r_guess > 0):
            r_guess = mc.pathloss.d_o
        base = 1.44 / r_guess**mc.dimension
        intensities = (base, 2.0 * base, 4.0 * base)
    trace: list[dict] = []
    witness = None
    for intensity in intensities:
        crits, _ = _gamma_critical_ensemble(
            mc, intensity, largest, replicas, seed, workers=workers
        )
        p0 = float(np.sum(crits > 0.0)) / replicas
        entry = {"intensity": intensity, "p_zero_gamma": p0}
        if p0 > 0.5:

            def prob(g: float) -> float:
                return float(np.sum(crits > g)) / replicas

            hi = 0.5 / mc.tau
            rounds = 0
            while prob(hi) >= 0.5 and rounds < 6:
                hi *= 2.0
                rounds += 1
            gamma_w, _, _ = _bisect(prob, 0.0, hi)
            while gamma_w > 0 and prob(gamma_w) <= 0.5:
                gamma_w /= 2.0
            if gamma_w > 0 and prob(gamma_w) > 0.5:
                successes = int(np.sum(crits > gamma_w))
                entry["gamma"] = gamma_w
                witness = {
                    "intensity": intensity,
                    "gamma": gamma_w,
                    "crossing": _estimate(successes, replicas),
                }
        trace.append(entry)
        if witness is not None:
            break
    diagnostics = None
    if witness is not None and attach_renorm:
        diagnostics = _renorm_frequencies(mc, witness["intensity"], seed)
    return Theorem1Report(
        route=route,
        assumption_violations=violations,
        trace=trace,
        witness=witness,
        renorm_diagnostics=diagnostics,
    )


def _theorem1_route(mc: ModelConfig) -> str:
    if not mc.pathloss.bounded_support:
        if mc.measure.dependence_range is not None:
            return "unbounded-loss-finite-dependence"
        return "unsupported"
    if mc.measure.connected_support:
        return "bounded-loss-connected-support"
    return "bounded-loss-large-support"


def _assumption_violations(mc: ModelConfig) -> list[str]:
    out: list[str] = []
    if mc.powers.heavy_tail:
        out.append("power marks lack exponential moments")
        if mc.powers.kind == "pareto" and mc.powers.shape <= mc.dimension:
            out.append("pareto shape at most the dimension: moment assumptions fail")
    return out


def _renorm_frequencies(
    mc: ModelConfig, intensity: float, seed: int, replicas: int = 20
) -> dict:
    """Good and tame site frequencies at an automatically chosen block scale."""
    r_guess = gilbert_radius(mc.pathloss, mc.tau, mc.noise, mc.powers.expectation())
    if not (math.isfinite(r_guess) and r_guess > 0):
        return {"skipped": "no finite connection radius"}
    r = 0.8 * r_guess
    r_o = min(1.25 * r, 0.99 * mc.pathloss.support_sup)
    if r_o <= r:
        return {"skipped": "no admissible companion radius"}
    side = 8.0 * r * 1.0 + 2.0  # a handful of blocks
    window_side = max(side, 6.0 * r + 2.0)
    good_count = 0
    tame_count = 0
    sites = 0
    cap = None
    for rep in range(replicas):
        rng = substream(seed, "renorm-diag", rep)
        config = mc.sample(intensity, window_side, rng)
        floor = power_floor(mc.pathloss, mc.tau, mc.noise, r_o)
        thinned = thin_by_power(config, floor)
        if cap is None:
            probe = interference_at(
                config, np.zeros(mc.dimension), exclude=(), model=mc.pathloss, shift=6.0 * r
            )
            cap = 2.0 * max(probe, mc.noise)
        params = RenormParams(n=1, r=r, r_o=r_o, cap=cap, intensity=intensity)
        half = config.window.buffered_side / 2.0
        z_max = int(math.floor((half - 3.0 * r) / r))
        if z_max < 0:
            continue
        for z0 in range(-z_max, z_max + 1):
            z = (z0,) + (0,) * (mc.dimension - 1)
            sites += 1
            if good_site(z, params, thinned, mc.measure):
                good_count += 1
            if tame_site(z, params, config, mc.pathloss):
                tame_count += 1
    if sites == 0:
        return {"skipped": "window too small for blocks"}
    return {
        "r": r,
        "r_o": r_o,
        "cap": cap,
        "sites": sites,
        "good_frequency": good_count / sites,
        "tame_frequency": tame_count / sites,
    }
