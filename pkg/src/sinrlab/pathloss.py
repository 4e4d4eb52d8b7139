"""Path-loss models.

A path-loss function maps distance to signal attenuation. The models here
are well behaved in the sense required by the graph constructions: they are
continuous, constant on an initial plateau [0, d_o], strictly decreasing
past the plateau wherever they are positive, and have a finite radial
integral of r**(d-1) * ell(r).

Two families are provided:

* truncated power law: ell(r) = min(1, (r / d_o) ** -alpha), which has
  unbounded support and needs alpha > dimension for integrability;
* bounded cone: constant ell0 on [0, d_o], linear down to 0 at rho, and
  identically 0 beyond rho.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

__all__ = [
    "PathLossModel",
    "pathloss_eval",
    "pathloss_inverse",
    "shifted_pathloss",
    "gilbert_radius",
    "default_margin",
]

POWER_LAW = "truncated-power-law"
BOUNDED_CONE = "bounded-cone"


@dataclass(frozen=True)
class PathLossModel:
    kind: str
    d_o: float
    dimension: int = 2
    alpha: float = math.nan  # power law only
    rho: float = math.nan  # cone only: support supremum
    ell0: float = 1.0  # cone only: plateau height

    def __post_init__(self) -> None:
        if self.dimension < 1:
            raise ValueError("dimension must be at least 1")
        if self.kind == POWER_LAW:
            if self.d_o <= 0:
                raise ValueError("plateau radius d_o must be positive")
            if not self.alpha > self.dimension:
                raise ValueError(
                    "power-law exponent must exceed the dimension for a finite radial integral"
                )
        elif self.kind == BOUNDED_CONE:
            if self.d_o < 0:
                raise ValueError("plateau radius d_o must be nonnegative")
            if not self.rho > self.d_o:
                raise ValueError("support supremum rho must exceed the plateau radius")
            if self.ell0 <= 0:
                raise ValueError("plateau height ell0 must be positive")
        else:
            raise ValueError(f"unknown path-loss kind: {self.kind!r}")

    @classmethod
    def power_law(cls, d_o: float, alpha: float, dimension: int = 2) -> "PathLossModel":
        return cls(kind=POWER_LAW, d_o=d_o, alpha=alpha, dimension=dimension)

    @classmethod
    def cone(
        cls, d_o: float, rho: float, ell0: float = 1.0, dimension: int = 2
    ) -> "PathLossModel":
        return cls(kind=BOUNDED_CONE, d_o=d_o, rho=rho, ell0=ell0, dimension=dimension)

    @property
    def bounded_support(self) -> bool:
        return self.kind == BOUNDED_CONE

    @property
    def support_sup(self) -> float:
        return self.rho if self.bounded_support else math.inf

    @property
    def ell_zero(self) -> float:
        """Value on the plateau, ell(0)."""
        return 1.0 if self.kind == POWER_LAW else self.ell0

    def __call__(self, r) -> np.ndarray | float:
        return pathloss_eval(self, r)

    def inverse(self, y: float) -> float:
        return pathloss_inverse(self, y)

    def radial_tail_integral(self, m: float) -> float:
        """Integral of r**(d-1) * ell(r) over r > m, in closed form."""
        d = self.dimension
        if m < 0:
            raise ValueError("lower limit must be nonnegative")
        if self.kind == POWER_LAW:
            a, d_o = self.alpha, self.d_o
            tail_from_plateau = d_o**d / (a - d)
            if m <= d_o:
                return (d_o**d - m**d) / d + tail_from_plateau
            return d_o**a * m ** (d - a) / (a - d)
        # cone: plateau part plus the linear ramp down to rho
        d_o, rho, ell0 = self.d_o, self.rho, self.ell0

        def ramp(lo: float, hi: float) -> float:
            # integral of r**(d-1) * ell0 * (rho - r) / (rho - d_o)
            anti_hi = rho * hi**d / d - hi ** (d + 1) / (d + 1)
            anti_lo = rho * lo**d / d - lo ** (d + 1) / (d + 1)
            return ell0 * (anti_hi - anti_lo) / (rho - d_o)

        if m >= rho:
            return 0.0
        if m >= d_o:
            return ramp(m, rho)
        return ell0 * (d_o**d - m**d) / d + ramp(d_o, rho)


def pathloss_eval(model: PathLossModel, r) -> np.ndarray | float:
    """Evaluate ell at distances r. Errors on negative input."""
    rr = np.asarray(r, dtype=float)
    if np.any(rr < 0):
        raise ValueError("distances must be nonnegative")
    if model.kind == POWER_LAW:
        # the discarded plateau branch may divide by or overflow on tiny r
        with np.errstate(divide="ignore", over="ignore"):
            out = np.where(rr <= model.d_o, 1.0, (rr / model.d_o) ** -model.alpha)
    else:
        ramp = model.ell0 * (model.rho - rr) / (model.rho - model.d_o)
        out = np.where(rr <= model.d_o, model.ell0, np.where(rr < model.rho, ramp, 0.0))
    if np.isscalar(r):
        return float(out)
    return out


def pathloss_inverse(model: PathLossModel, y: float) -> float:
    """Largest radius r with ell(r) >= y.

    On the plateau value ell(0) the plateau end d_o is returned. For a
    bounded-support model y = 0 maps to the support supremum rho. Values
    above ell(0), negative values, and y = 0 with unbounded support are
    errors.
    """
    ell0 = model.ell_zero
    if y < 0:
        raise ValueError("path loss values are nonnegative")
    if y > ell0:
        raise ValueError(f"value {y} exceeds the plateau level {ell0}")
    if y == 0:
        if model.bounded_support:
            return model.rho
        raise ValueError("unbounded-support path loss never reaches 0")
    if y == ell0:
        return model.d_o
    if model.kind == POWER_LAW:
        return model.d_o * y ** (-1.0 / model.alpha)
    return model.rho - y * (model.rho - model.d_o) / model.ell0


def shifted_pathloss(model: PathLossModel, a: float, r) -> np.ndarray | float:
    """Shifted path loss ell_a: plateau of half-diagonal width, then ell shifted.

    ell_a(r) = ell(0) for r < a * sqrt(d) / 2 and ell(r - a * sqrt(d) / 2)
    otherwise; a = 0 recovers ell. Dominates ell at any point of the cube
    Q_a(z) when evaluated from the cube center z.
    """
    if a < 0:
        raise ValueError("shift must be nonnegative")
    if a == 0:
        return pathloss_eval(model, r)
    half_diag = a * math.sqrt(model.dimension) / 2.0
    rr = np.asarray(r, dtype=float)
    if np.any(rr < 0):
        raise ValueError("distances must be nonnegative")
    shifted = np.maximum(rr - half_diag, 0.0)
    out = np.asarray(pathloss_eval(model, shifted))
    if np.isscalar(r):
        return float(out)
    return out


def gilbert_radius(
    model: PathLossModel, tau: float, noise: float, power
) -> np.ndarray | float:
    """Connection radius of the zero-interference graph.

    Returns the radius r_B with {r : power * ell(r) > tau * noise} = [0, r_B).
    The set is empty (radius 0) when the required attenuation exceeds the
    plateau level, and equals the support supremum when tau * noise = 0.
    """
    p = np.asarray(power, dtype=float)
    if np.any(p <= 0):
        raise ValueError("powers must be positive")
    target = tau * noise / p
    ell0 = model.ell_zero
    with np.errstate(divide="ignore", over="ignore", invalid="ignore"):
        if model.kind == POWER_LAW:
            interior = model.d_o * target ** (-1.0 / model.alpha)
        else:
            interior = model.rho - target * (model.rho - model.d_o) / model.ell0
    out = np.where(target >= ell0, 0.0, np.where(target <= 0, model.support_sup, interior))
    if np.isscalar(power):
        return float(out)
    return out


def default_margin(
    model: PathLossModel,
    intensity: float,
    mean_power: float,
    tau: float,
    noise: float,
) -> float:
    """Default evaluation margin for a given model and intensity.

    Bounded support: the support radius or five connection radii, whichever
    is larger. Unbounded support: the smallest m with
    intensity * mean_power * integral_{r>m} r**(d-1) ell(r) dr < 1e-3 * noise,
    which keeps the truncated interference small against the noise floor.
    """
    if intensity <= 0 or mean_power <= 0:
        raise ValueError("intensity and mean power must be positive")
    if not math.isfinite(mean_power):
        raise ValueError("mean power is infinite; pass an explicit margin")
    if model.bounded_support:
        r_b = gilbert_radius(model, tau, noise, mean_power)
        return max(model.rho, 5.0 * r_b)
    if noise <= 0:
        raise ValueError("zero noise admits no default margin; pass one explicitly")
    a, d, d_o = model.alpha, model.dimension, model.d_o
    budget = 1e-3 * noise
    # solve intensity * mean_power * d_o**a * m**(d-a) / (a-d) = budget
    m = (intensity * mean_power * d_o**a / ((a - d) * budget)) ** (1.0 / (a - d))
    return max(m, d_o)
