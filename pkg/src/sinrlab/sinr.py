"""SINR values and graph construction.

An edge of the interference graph requires the signal-to-interference-and-
noise ratio to clear the threshold tau in both directions. For fixed
positions and powers every pair has a critical interference-cancellation
value: the edge is present exactly for gamma below it. Builders therefore
tabulate per-pair critical values once; sweeps in gamma reuse the table.

Interference is always evaluated against every point of the buffered
window, while reported vertices are the points of the observation box.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from . import _kernels
from .geometry import Window
from .graphs import GraphResult
from .pathloss import (
    BOUNDED_CONE,
    PathLossModel,
    gilbert_radius,
    pathloss_eval,
    shifted_pathloss,
)
from .pointproc import MarkedConfiguration

__all__ = [
    "SinrParams",
    "interference_at",
    "sinr_value",
    "total_receiver_power",
    "PairTable",
    "sinr_pair_table",
    "minus_pair_table",
    "build_sinr_graph",
    "build_minus_graph",
    "build_gilbert_graph",
]

# Vertex budget for parameter corners without a finite connection radius
# (zero noise with unbounded-support path loss needs all-pairs evaluation).
_DENSE_PAIR_LIMIT = 4000


@dataclass(frozen=True)
class SinrParams:
    """Threshold tau, noise power, and interference-cancellation factor."""

    tau: float
    noise: float
    gamma: float

    def __post_init__(self) -> None:
        if self.tau <= 0:
            raise ValueError("tau must be positive")
        if self.noise < 0:
            raise ValueError("noise must be nonnegative")
        if self.gamma < 0:
            raise ValueError("gamma must be nonnegative")


def interference_at(
    config: MarkedConfiguration,
    target,
    exclude=(),
    model: PathLossModel | None = None,
    shift: float = 0.0,
) -> float:
    """Shot-noise sum of received powers at a target location.

    Excluded indices are left out of the sum; a positive shift evaluates
    the shifted path loss instead of the plain one.
    """
    if model is None:
        raise ValueError("a path-loss model is required")
    if not config.is_marked:
        raise ValueError("configuration has no power marks")
    target = np.asarray(target, dtype=float)
    mask = np.ones(config.size, dtype=bool)
    excl = np.asarray(list(exclude) if not isinstance(exclude, np.ndarray) else exclude)
    if excl.size:
        mask[excl.astype(np.int64)] = False
    pts = config.points[mask]
    if len(pts) == 0:
        return 0.0
    dist = np.linalg.norm(pts - target, axis=1)
    ell = np.asarray(shifted_pathloss(model, shift, dist))
    return float(np.dot(config.powers[mask], ell))


def sinr_value(
    config: MarkedConfiguration,
    i: int,
    j: int,
    params: SinrParams,
    model: PathLossModel,
) -> float:
    """SINR of transmitter i at receiver j, interference from all others.

    A zero denominator (no noise, gamma 0, or nothing else transmitting)
    returns infinity when the signal is positive, else 0.
    """
    if i == j:
        raise ValueError("transmitter and receiver must differ")
    d = float(np.linalg.norm(config.points[i] - config.points[j]))
    num = config.powers[i] * pathloss_eval(model, d)
    den = params.noise + params.gamma * interference_at(
        config, config.points[j], exclude=(i, j), model=model
    )
    if den == 0.0:
        return math.inf if num > 0 else 0.0
    return float(num / den)


def total_receiver_power(
    config: MarkedConfiguration, receivers: np.ndarray, model: PathLossModel
) -> np.ndarray:
    """Sum of received powers at each receiver from every config point."""
    if not config.is_marked:
        raise ValueError("configuration has no power marks")
    rx = np.ascontiguousarray(np.atleast_2d(receivers), dtype=float)
    tx = np.ascontiguousarray(config.points, dtype=float)
    powers = np.ascontiguousarray(config.powers, dtype=float)
    kind = _kernels.KIND_POWER_LAW if model.kind != BOUNDED_CONE else _kernels.KIND_CONE
    return _kernels.receiver_power(
        rx,
        tx,
        powers,
        kind,
        float(model.d_o),
        float(model.alpha),
        float(model.rho),
        float(model.ell0),
    )


@dataclass(frozen=True)
class PairTable:
    """Candidate pairs with their critical gamma values.

    An edge is present at a given gamma exactly when its critical value is
    larger. Vertices index into positions; vertex_indices maps them back to
    the source configuration.
    """

    vertex_indices: np.ndarray
    positions: np.ndarray
    pairs: np.ndarray
    gamma_crit: np.ndarray
    window: Window
    touch_scale: float

    @property
    def n_vertices(self) -> int:
        return len(self.positions)

    def edges_at(self, gamma: float) -> np.ndarray:
        return self.pairs[self.gamma_crit > gamma]

    def graph_at(self, gamma: float) -> GraphResult:
        return GraphResult(
            positions=self.positions,
            edges=self.edges_at(gamma),
            window=self.window,
            touch_scale=self.touch_scale,
            source_indices=self.vertex_indices,
        )


def _candidate_pairs(positions: np.ndarray, radii: np.ndarray) -> np.ndarray:
    """Index pairs within the larger of the two connection radii."""
    m = len(positions)
    if m < 2:
        return np.zeros((0, 2), dtype=np.int64)
    r_max = float(np.max(radii)) if len(radii) else 0.0
    if r_max == 0.0:
        return np.zeros((0, 2), dtype=np.int64)
    if not math.isfinite(r_max):
        if m > _DENSE_PAIR_LIMIT:
            raise ValueError(
                "no finite connection radius (zero noise with unbounded support); "
                f"dense pair evaluation is capped at {_DENSE_PAIR_LIMIT} vertices"
            )
        iu = np.triu_indices(m, k=1)
        return np.stack(iu, axis=1).astype(np.int64)
    pairs = cKDTree(positions).query_pairs(r_max, output_type="ndarray")
    return pairs.astype(np.int64)


def _gamma_crit(
    num_i: np.ndarray, num_j: np.ndarray, i_at_j: np.ndarray, i_at_i: np.ndarray, tau: float
) -> np.ndarray:
    """Critical gamma per pair from directional margins and interference."""

    def directional(margin: np.ndarray, interference: np.ndarray) -> np.ndarray:
        out = np.full(len(margin), -math.inf)
        pos = margin > 0
        with np.errstate(divide="ignore"):
            out[pos] = margin[pos] / (tau * interference[pos])
        # a positive margin with zero interference connects at every gamma
        out[pos & (interference == 0)] = math.inf
        return out

    return np.minimum(directional(num_i, i_at_j), directional(num_j, i_at_i))


def _pair_table(
    config: MarkedConfiguration,
    model: PathLossModel,
    tau: float,
    noise: float,
    vertex_indices: np.ndarray,
    numerator_powers: np.ndarray | None,
    candidate_radii: np.ndarray,
    touch_scale: float,
) -> PairTable:
    positions = config.points[vertex_indices]
    pairs = _candidate_pairs(positions, candidate_radii)
    window = config.window
    if len(pairs) == 0:
        return PairTable(
            vertex_indices=vertex_indices,
            positions=positions,
            pairs=pairs,
            gamma_crit=np.zeros(0),
            window=window,
            touch_scale=touch_scale,
        )
    true_powers = config.powers[vertex_indices]
    num_powers = true_powers if numerator_powers is None else numerator_powers
    d = np.linalg.norm(positions[pairs[:, 0]] - positions[pairs[:, 1]], axis=1)
    ell_d = np.asarray(pathloss_eval(model, d))
    num_i = num_powers[pairs[:, 0]] * ell_d - tau * noise
    num_j = num_powers[pairs[:, 1]] * ell_d - tau * noise
    feasible = (num_i > 0) & (num_j > 0)
    pairs, d, ell_d = pairs[feasible], d[feasible], ell_d[feasible]
    num_i, num_j = num_i[feasible], num_j[feasible]
    if len(pairs) == 0:
        return PairTable(
            vertex_indices=vertex_indices,
            positions=positions,
            pairs=pairs,
            gamma_crit=np.zeros(0),
            window=window,
            touch_scale=touch_scale,
        )
    used = np.unique(pairs)
    total = np.zeros(len(positions))
    total[used] = total_receiver_power(config, positions[used], model)
    ell0 = model.ell_zero
    p_i = true_powers[pairs[:, 0]]
    p_j = true_powers[pairs[:, 1]]
    i_at_j = np.maximum(total[pairs[:, 1]] - p_i * ell_d - p_j * ell0, 0.0)
    i_at_i = np.maximum(total[pairs[:, 0]] - p_j * ell_d - p_i * ell0, 0.0)
    gamma_crit = _gamma_crit(num_i, num_j, i_at_j, i_at_i, tau)
    return PairTable(
        vertex_indices=vertex_indices,
        positions=positions,
        pairs=pairs,
        gamma_crit=gamma_crit,
        window=window,
        touch_scale=touch_scale,
    )


def _median_touch(radii: np.ndarray) -> float:
    if len(radii) == 0:
        return 0.0
    return float(np.median(radii))


def sinr_pair_table(
    config: MarkedConfiguration,
    model: PathLossModel,
    tau: float,
    noise: float,
) -> PairTable:
    """Critical-gamma table between observation-window points."""
    if not config.is_marked:
        raise ValueError("configuration has no power marks")
    obs_idx = np.flatnonzero(config.observation_mask())
    radii = np.asarray(gilbert_radius(model, tau, noise, config.powers[obs_idx]))
    return _pair_table(
        config,
        model,
        tau,
        noise,
        obs_idx,
        None,
        radii,
        _median_touch(radii),
    )


def minus_pair_table(
    config: MarkedConfiguration,
    model: PathLossModel,
    tau: float,
    noise: float,
    r_o: float,
) -> PairTable:
    """Critical-gamma table of the power-floored thinned construction.

    Vertices are the points with power at least tau * noise / ell(r_o); the
    numerator uses that floor for every vertex while interference keeps the
    true powers of the whole configuration.
    """
    if not config.is_marked:
        raise ValueError("configuration has no power marks")
    if not r_o > model.d_o:
        raise ValueError("r_o must exceed the plateau radius d_o")
    ell_ro = float(pathloss_eval(model, r_o))
    if ell_ro <= 0:
        raise ValueError("r_o lies outside the path-loss support")
    floor = tau * noise / ell_ro
    keep = config.powers >= floor
    idx = np.flatnonzero(keep & config.observation_mask())
    radii = np.full(len(idx), r_o)
    floors = np.full(len(idx), floor)
    return _pair_table(config, model, tau, noise, idx, floors, radii, r_o)


def build_sinr_graph(
    config: MarkedConfiguration, params: SinrParams, model: PathLossModel
) -> GraphResult:
    """Interference graph at the given parameters."""
    table = sinr_pair_table(config, model, params.tau, params.noise)
    return table.graph_at(params.gamma)


def build_minus_graph(
    config: MarkedConfiguration,
    params: SinrParams,
    model: PathLossModel,
    r_o: float,
) -> GraphResult:
    """Thinned graph with floored signal powers; a subgraph of the full one."""
    table = minus_pair_table(config, model, params.tau, params.noise, r_o)
    return table.graph_at(params.gamma)


def build_gilbert_graph(
    points,
    radii,
    rule: str = "min",
    window: Window | None = None,
) -> GraphResult:
    """Distance graph with per-point connection radii.

    Under the min rule two points connect when their distance is strictly
    below both radii; under the sum rule, below the sum of the radii. A
    MarkedConfiguration restricts vertices to its observation box, in which
    case radii of the full configuration are subset accordingly.
    """
    if rule not in ("min", "sum"):
        raise ValueError("rule must be 'min' or 'sum'")
    source_indices = None
    if isinstance(points, MarkedConfiguration):
        config = points
        idx = np.flatnonzero(config.observation_mask())
        positions = config.points[idx]
        source_indices = idx
        window = config.window
        radii_arr = np.asarray(radii, dtype=float)
        if radii_arr.ndim == 0:
            radii_arr = np.full(len(positions), float(radii_arr))
        elif len(radii_arr) == config.size:
            radii_arr = radii_arr[idx]
        elif len(radii_arr) != len(positions):
            raise ValueError("radii must match the configuration or its window subset")
    else:
        positions = np.atleast_2d(np.asarray(points, dtype=float))
        if window is None:
            raise ValueError("a window is required with raw points")
        radii_arr = np.asarray(radii, dtype=float)
        if radii_arr.ndim == 0:
            radii_arr = np.full(len(positions), float(radii_arr))
        elif len(radii_arr) != len(positions):
            raise ValueError("radii must match the point count")
    if np.any(radii_arr < 0):
        raise ValueError("radii must be nonnegative")
    m = len(positions)
    if m < 2:
        pairs = np.zeros((0, 2), dtype=np.int64)
    else:
        r_reach = radii_arr if rule == "min" else 2.0 * radii_arr
        r_max = float(np.max(r_reach)) if m else 0.0
        if r_max == 0.0:
            pairs = np.zeros((0, 2), dtype=np.int64)
        elif not math.isfinite(r_max):
            if m > _DENSE_PAIR_LIMIT:
                raise ValueError("infinite radius needs the dense path; too many points")
            iu = np.triu_indices(m, k=1)
            pairs = np.stack(iu, axis=1).astype(np.int64)
        else:
            pairs = cKDTree(positions).query_pairs(r_max, output_type="ndarray")
            pairs = pairs.astype(np.int64)
    if len(pairs):
        d = np.linalg.norm(positions[pairs[:, 0]] - positions[pairs[:, 1]], axis=1)
        if rule == "min":
            keep = d < np.minimum(radii_arr[pairs[:, 0]], radii_arr[pairs[:, 1]])
        else:
            keep = d < radii_arr[pairs[:, 0]] + radii_arr[pairs[:, 1]]
        pairs = pairs[keep]
    return GraphResult(
        positions=positions,
        edges=pairs,
        window=window,
        touch_scale=_median_touch(radii_arr),
        source_indices=source_indices,
    )
