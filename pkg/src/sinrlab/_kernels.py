"""Compiled inner loops.

The receiver-power accumulation is quadratic in the point count and
dominates graph construction, so it runs under numba and works on squared
distances: the power law becomes one pow on the squared ratio (or a few
multiplications when the exponent is an even integer, the common case),
and the cone only pays a square root inside its ramp. The kernel stays
single-threaded on purpose: sums accumulate in a fixed order, so results
are bitwise reproducible, and a threaded kernel would also pull in an
OpenMP runtime whose fork handlers break the process pools that provide
the actual replica-level parallelism.
"""
from __future__ import annotations

import numpy as np
from numba import njit

KIND_POWER_LAW = 0
KIND_CONE = 1


@njit(cache=True, inline="always")
def _ell_sq(
    kind: int,
    d_o_sq: float,
    neg_alpha_half: float,
    even_exp: int,
    rho: float,
    rho_sq: float,
    d_o: float,
    ell0: float,
    rr: float,
) -> float:
    if kind == KIND_POWER_LAW:
        if rr <= d_o_sq:
            return 1.0
        q = rr / d_o_sq
        if even_exp > 0:
            acc = q
            for _ in range(even_exp - 1):
                acc *= q
            return 1.0 / acc
        return q**neg_alpha_half
    if rr >= rho_sq:
        return 0.0
    if rr <= d_o_sq:
        return ell0
    return ell0 * (rho - np.sqrt(rr)) / (rho - d_o)


@njit(cache=True)
def receiver_power(
    rx: np.ndarray,
    tx: np.ndarray,
    powers: np.ndarray,
    kind: int,
    d_o: float,
    alpha: float,
    rho: float,
    ell0: float,
) -> np.ndarray:
    """Total received power at each receiver from every transmitter."""
    m = rx.shape[0]
    n = tx.shape[0]
    dim = rx.shape[1]
    d_o_sq = d_o * d_o
    rho_sq = rho * rho
    alpha_half = 0.5 * alpha
    even_exp = int(alpha_half)
    if float(even_exp) != alpha_half or even_exp < 1:
        even_exp = 0
    out = np.empty(m)
    for j in range(m):
        acc = 0.0
        for k in range(n):
            s = 0.0
            for t in range(dim):
                diff = tx[k, t] - rx[j, t]
                s += diff * diff
            acc += powers[k] * _ell_sq(
                kind, d_o_sq, -alpha_half, even_exp, rho, rho_sq, d_o, ell0, s
            )
        out[j] = acc
    return out
