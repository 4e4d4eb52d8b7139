"""Block-scale diagnostics behind the percolation arguments.

The continuum model is coarse-grained onto an integer lattice of blocks.
A block is good when the thinned configuration fills and connects it at
the connection scale, tame when the shifted-loss interference bound at its
center is below a cap, and nice when both hold. Nice blocks provably keep
their short edges for small interference-cancellation factors; the scan
here measures how often that happens at laboratory scale, and the Boolean
variant applies the analogous notions to the Gilbert graph alone.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .geometry import Window, points_in_box
from .graphs import GraphResult, label_clusters
from .measures import DirectingMeasureSpec
from .pathloss import PathLossModel, pathloss_eval, pathloss_inverse
from .pointproc import MarkedConfiguration, PowerDistribution, thin_by_power
from .sinr import (
    SinrParams,
    build_gilbert_graph,
    interference_at,
    total_receiver_power,
)

__all__ = [
    "RenormParams",
    "CoupledParameters",
    "coupled_parameters",
    "power_floor",
    "good_site",
    "tame_site",
    "interference_split",
    "gamma_prime",
    "SiteLattice",
    "ScanReport",
    "nice_site_scan",
    "lattice_crossing",
    "boolean_good_site",
]


@dataclass(frozen=True)
class RenormParams:
    """Block-scan parameters: lattice scale n, radii r < r_o, cap M."""

    n: int
    r: float
    r_o: float
    cap: float
    intensity: float

    def __post_init__(self) -> None:
        if self.n < 1:
            raise ValueError("block scale n must be at least 1")
        if not 0 < self.r < self.r_o:
            raise ValueError("radii must satisfy 0 < r < r_o")
        if self.cap <= 0:
            raise ValueError("interference cap must be positive")
        if self.intensity <= 0:
            raise ValueError("intensity must be positive")


def power_floor(model: PathLossModel, tau: float, noise: float, r_o: float) -> float:
    """Smallest admissible power at connection radius r_o: tau*noise/ell(r_o)."""
    ell = float(pathloss_eval(model, r_o))
    if ell <= 0:
        raise ValueError("r_o lies outside the path-loss support")
    return tau * noise / ell


@dataclass(frozen=True)
class CoupledParameters:
    """Connection radius r, its companions, and the coupled intensity."""

    r: float
    r_o: float
    floor: float
    survival: float
    intensity: float


def coupled_parameters(
    rho: float,
    r: float,
    model: PathLossModel,
    tau: float,
    noise: float,
    powers: PowerDistribution,
    rho_prime: float | None = None,
) -> CoupledParameters:
    """Derived scan parameters for a target block occupation density.

    Given a density budget rho and its retained share rho_prime (default
    0.8 * rho), the companion radius is r * (rho / rho_prime) ** (1/d), the
    admissible-power floor is taken at that radius, and the intensity is
    rho_prime * r**-d divided by the survival probability of the floor.
    """
    if rho_prime is None:
        rho_prime = 0.8 * rho
    if not 0 < rho_prime < rho:
        raise ValueError("need 0 < rho_prime < rho")
    d = model.dimension
    r_o = r * (rho / rho_prime) ** (1.0 / d)
    if r_o >= model.support_sup:
        raise ValueError("companion radius exceeds the path-loss support")
    floor = power_floor(model, tau, noise, r_o)
    survival = powers.survival(floor)
    if survival <= 0:
        raise ValueError("no point survives the power floor")
    intensity = rho_prime * r ** (-d) / survival
    return CoupledParameters(
        r=r, r_o=r_o, floor=floor, survival=survival, intensity=intensity
    )


def _require_block(window: Window, center: np.ndarray, side: float) -> None:
    lo = center - side / 2.0
    hi = center + side / 2.0
    if np.any(lo < window.lo(buffered=True)) or np.any(hi > window.hi(buffered=True)):
        raise ValueError("block extends beyond the buffered window")


def good_site(
    z,
    params: RenormParams,
    thinned: MarkedConfiguration,
    measure: DirectingMeasureSpec | None = None,
) -> bool:
    """Whether lattice site z is good for the thinned configuration.

    Conditions: the measure's dependence range (when one is known) is below
    half the block scale; the central block contains a thinned point; and
    all thinned points of the 3-block neighborhood are connected inside the
    6-block neighborhood at connection radius r. A measure without a known
    dependence range skips the first condition.
    """
    z = np.asarray(z, dtype=float)
    rn = params.r * params.n
    center = rn * z
    _require_block(thinned.window, center, 6.0 * rn)
    if measure is not None and measure.dependence_range is not None:
        if not measure.dependence_range < rn / 2.0:
            return False
    pts = thinned.points
    if not np.any(points_in_box(pts, center, rn)):
        return False
    in_six = points_in_box(pts, center, 6.0 * rn)
    local = pts[in_six]
    in_three_local = points_in_box(local, center, 3.0 * rn)
    count_three = int(np.count_nonzero(in_three_local))
    if count_three <= 1:
        return True
    box_window = Window(side=6.0 * rn, dimension=thinned.dimension, center=tuple(center))
    graph = label_clusters(
        build_gilbert_graph(local, params.r, rule="min", window=box_window)
    )
    labels_three = graph.labels[in_three_local]
    return bool(np.all(labels_three == labels_three[0]))


def tame_site(
    z,
    params: RenormParams,
    config: MarkedConfiguration,
    model: PathLossModel,
    variant: str = "six",
) -> bool:
    """Whether the shifted-loss interference bound at the site is below the cap.

    The "six" variant evaluates the bound at r*n*z with shift 6*r*n; the
    "seven" variant at n*z with shift 7*n, matching the Gilbert-based
    analysis where no connection radius enters the site geometry.
    """
    z = np.asarray(z, dtype=float)
    if variant == "six":
        center = params.r * params.n * z
        shift = 6.0 * params.r * params.n
    elif variant == "seven":
        center = float(params.n) * z
        shift = 7.0 * params.n
    else:
        raise ValueError("variant must be 'six' or 'seven'")
    bound = interference_at(config, center, exclude=(), model=model, shift=shift)
    return bound <= params.cap


def interference_split(
    config: MarkedConfiguration,
    x,
    model: PathLossModel,
    rn: float,
) -> tuple[float, float]:
    """Near and far parts of the shifted interference bound at x.

    The near part sums shifted-loss contributions from points of the cube
    of side 12 * rn * sqrt(d) around x, the far part from the complement;
    they add up to the full shifted bound with shift 6 * rn.
    """
    if rn <= 0:
        raise ValueError("rn must be positive")
    x = np.asarray(x, dtype=float)
    shift = 6.0 * rn
    side = 12.0 * rn * math.sqrt(config.dimension)
    near_mask = points_in_box(config.points, x, side)
    near_idx = np.flatnonzero(near_mask)
    far_idx = np.flatnonzero(~near_mask)
    i_near = interference_at(config, x, exclude=far_idx, model=model, shift=shift)
    i_far = interference_at(config, x, exclude=near_idx, model=model, shift=shift)
    return i_near, i_far


def gamma_prime(
    r: float,
    r_o: float,
    cap: float,
    params: SinrParams,
    model: PathLossModel,
) -> float:
    """Largest cancellation factor protected by the block argument.

    With the admissible-power floor p at r_o, the value satisfies
    p * ell(r) / (noise + gamma' * p * cap) = tau exactly.
    """
    if not r < r_o:
        raise ValueError("need r < r_o")
    if cap <= 0:
        raise ValueError("interference cap must be positive")
    ell_r = float(pathloss_eval(model, r))
    ell_ro = float(pathloss_eval(model, r_o))
    if ell_ro <= 0:
        raise ValueError("r_o lies outside the path-loss support")
    if ell_r <= ell_ro:
        raise ValueError("path loss must strictly separate r and r_o")
    return (ell_ro / (params.tau * cap)) * (ell_r / ell_ro - 1.0)


@dataclass(frozen=True)
class SiteLattice:
    """Per-site flags on the block lattice."""

    sites: np.ndarray  # (S, d) integer coordinates
    shape: tuple[int, ...]
    good: np.ndarray
    tame: np.ndarray
    stabilization_evaluated: bool

    @property
    def nice(self) -> np.ndarray:
        return self.good & self.tame

    def grid(self, flags: np.ndarray) -> np.ndarray:
        out = np.zeros(self.shape, dtype=bool)
        offsets = self.sites - self.sites.min(axis=0)
        out[tuple(offsets.T)] = flags
        return out


@dataclass(frozen=True)
class ScanReport:
    lattice: SiteLattice
    crossing: bool
    checked_pairs: int
    violations: int

    @property
    def preservation_ok(self) -> bool:
        return self.violations == 0


def nice_site_scan(
    params: RenormParams,
    config: MarkedConfiguration,
    gamma: float,
    model: PathLossModel,
    sinr: SinrParams,
    measure: DirectingMeasureSpec | None = None,
) -> ScanReport:
    """Classify every block the buffered window contains and verify edges.

    Thinning uses the admissible-power floor at r_o. For each nice block,
    every thinned pair inside the 6-block cube at distance below r must be
    an edge of the interference graph at the given gamma; violations are
    counted, not raised.
    """
    if gamma < 0:
        raise ValueError("gamma must be nonnegative")
    protected = gamma_prime(params.r, params.r_o, params.cap, sinr, model)
    if gamma > protected:
        raise ValueError(f"gamma {gamma} exceeds the protected value {protected}")
    floor = power_floor(model, sinr.tau, sinr.noise, params.r_o)
    thinned = thin_by_power(config, floor)
    rn = params.r * params.n
    d = config.dimension
    half = config.window.buffered_side / 2.0
    z_max = int(math.floor((half - 3.0 * rn) / rn))
    if z_max < 0:
        raise ValueError("window too small for a single block")
    axis = np.arange(-z_max, z_max + 1)
    sites = np.array(list(itertools.product(axis, repeat=d)), dtype=np.int64)
    center = np.asarray(config.window.center, dtype=float)
    if np.any(center != 0.0):
        raise ValueError("block scans assume a window centered at the origin")
    stab_known = measure is not None and measure.dependence_range is not None
    good = np.zeros(len(sites), dtype=bool)
    tame = np.zeros(len(sites), dtype=bool)
    for s, z in enumerate(sites):
        good[s] = good_site(z, params, thinned, measure)
        tame[s] = tame_site(z, params, config, model, variant="six")
    lattice = SiteLattice(
        sites=sites,
        shape=(len(axis),) * d,
        good=good,
        tame=tame,
        stabilization_evaluated=stab_known,
    )
    crossing = lattice_crossing(lattice.grid(lattice.nice), axis=0)
    checked, violations = _verify_block_edges(
        params, config, gamma, model, sinr, sites[lattice.nice], floor
    )
    return ScanReport(
        lattice=lattice, crossing=crossing, checked_pairs=checked, violations=violations
    )


def _verify_block_edges(
    params: RenormParams,
    config: MarkedConfiguration,
    gamma: float,
    model: PathLossModel,
    sinr: SinrParams,
    nice_sites: np.ndarray,
    floor: float,
) -> tuple[int, int]:
    """Count short thinned pairs near nice sites that fail the edge test."""
    if len(nice_sites) == 0:
        return 0, 0
    rn = params.r * params.n
    thin_idx = np.flatnonzero(config.powers >= floor)
    pts = config.points[thin_idx]
    if len(pts) < 2:
        return 0, 0
    pairs = cKDTree(pts).query_pairs(params.r, output_type="ndarray")
    if len(pairs):
        d = np.linalg.norm(pts[pairs[:, 0]] - pts[pairs[:, 1]], axis=1)
        pairs, d = pairs[d < params.r], d[d < params.r]
    if len(pairs) == 0:
        return 0, 0
    near = np.zeros(len(pairs), dtype=bool)
    for z in nice_sites:
        center = rn * np.asarray(z, dtype=float)
        in_box = points_in_box(pts, center, 6.0 * rn)
        near |= in_box[pairs[:, 0]] & in_box[pairs[:, 1]]
    pairs, d = pairs[near], d[near]
    if len(pairs) == 0:
        return 0, 0
    # same arithmetic as the two-way SINR test, vectorized over the pairs
    src = thin_idx[pairs]
    used = np.unique(src)
    total = np.zeros(config.size)
    total[used] = total_receiver_power(config, config.points[used], model)
    ell_d = np.asarray(pathloss_eval(model, d))
    ell0 = model.ell_zero
    p_i = config.powers[src[:, 0]]
    p_j = config.powers[src[:, 1]]
    i_at_j = np.maximum(total[src[:, 1]] - p_i * ell_d - p_j * ell0, 0.0)
    i_at_i = np.maximum(total[src[:, 0]] - p_j * ell_d - p_i * ell0, 0.0)
    ok = (p_i * ell_d > sinr.tau * (sinr.noise + gamma * i_at_j)) & (
        p_j * ell_d > sinr.tau * (sinr.noise + gamma * i_at_i)
    )
    return len(pairs), int(np.count_nonzero(~ok))


def lattice_crossing(grid: np.ndarray, axis: int = 0) -> bool:
    """Nearest-neighbor occupied crossing between opposite grid faces."""
    if grid.size == 0 or not np.any(grid):
        return False
    structure = ndimage.generate_binary_structure(grid.ndim, 1)
    labels, _ = ndimage.label(grid, structure=structure)
    lo_face = np.take(labels, 0, axis=axis).reshape(-1)
    hi_face = np.take(labels, labels.shape[axis] - 1, axis=axis).reshape(-1)
    lo = set(lo_face[lo_face > 0].tolist())
    hi = set(hi_face[hi_face > 0].tolist())
    return bool(lo & hi)


def boolean_good_site(
    z,
    n: int,
    config: MarkedConfiguration,
    r: float,
) -> bool:
    """Good site in the Gilbert-graph sense, no power marks involved.

    Inside the central block, components of the radius-r distance graph
    with diameter at least n / 3 form the relevant set; the site is good
    when that set is nonempty and every such component, paired with any
    such component of a neighboring block, merges inside the 6-block cube.
    Component diameter is measured on vertex positions, which undershoots
    the ball-union diameter by at most r.
    """
    if n < 1:
        raise ValueError("block scale n must be at least 1")
    if r <= 0:
        raise ValueError("radius must be positive")
    z = np.asarray(z, dtype=float)
    center = float(n) * z
    _require_block(config.window, center, 6.0 * n)
    reps_center = _large_component_reps(config, center, n, r)
    if not reps_center:
        return False
    big_idx = np.flatnonzero(points_in_box(config.points, center, 6.0 * n))
    if len(big_idx) == 0:
        return False
    big_window = Window(side=6.0 * n, dimension=config.dimension, center=tuple(center))
    big_graph = label_clusters(
        build_gilbert_graph(config.points[big_idx], r, rule="min", window=big_window)
    )
    slot = {int(i): k for k, i in enumerate(big_idx)}
    center_labels = {big_graph.labels[slot[rep]] for rep in reps_center}
    if len(center_labels) > 1:
        return False
    d = config.dimension
    for offset in itertools.product((-1, 0, 1), repeat=d):
        if all(o == 0 for o in offset):
            continue
        nb_center = center + float(n) * np.asarray(offset, dtype=float)
        try:
            _require_block(config.window, nb_center, float(n))
        except ValueError:
            continue
        for rep in _large_component_reps(config, nb_center, n, r):
            if rep not in slot:
                return False
            if big_graph.labels[slot[rep]] not in center_labels:
                return False
    return True


def _large_component_reps(
    config: MarkedConfiguration, center: np.ndarray, n: int, r: float
) -> list[int]:
    """One config index per large in-block component of the distance graph."""
    idx = np.flatnonzero(points_in_box(config.points, center, float(n)))
    if len(idx) == 0:
        return []
    pts = config.points[idx]
    block_window = Window(side=float(n), dimension=config.dimension, center=tuple(center))
    graph = label_clusters(build_gilbert_graph(pts, r, rule="min", window=block_window))
    reps: list[int] = []
    for label in np.unique(graph.labels):
        members = np.flatnonzero(graph.labels == label)
        if len(members) == 1:
            diameter = 0.0
        else:
            sub = pts[members]
            diffs = sub[:, None, :] - sub[None, :, :]
            diameter = float(np.sqrt(np.max(np.sum(diffs * diffs, axis=2))))
        if diameter >= n / 3.0:
            reps.append(int(idx[members[0]]))
    return reps
