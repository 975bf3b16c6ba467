"""Small numeric search routines shared by the bound calculators."""

import logging
import math
from collections.abc import Callable

import numpy as np

logger = logging.getLogger(__name__)

INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0
DEFAULT_GRID_POINTS = 2001


def golden_section_max(
    func: Callable[[float], float],
    lo: float,
    hi: float,
    tolerance: float = 1e-12,
    max_iter: int = 200,
) -> tuple[float, float]:
    """Maximize a unimodal function on ``[lo, hi]``.

    Returns:
        ``(x, func(x))`` at the best point found
    """
    a, b = lo, hi
    c = b - INV_PHI * (b - a)
    d = a + INV_PHI * (b - a)
    fc, fd = func(c), func(d)
    for _ in range(max_iter):
        if abs(b - a) <= tolerance * max(1.0, abs(a), abs(b)):
            break
        if fc >= fd:
            b, d, fd = d, c, fc
            c = b - INV_PHI * (b - a)
            fc = func(c)
        else:
            a, c, fc = c, d, fd
            d = a + INV_PHI * (b - a)
            fd = func(d)
    return (c, fc) if fc >= fd else (d, fd)


def maximize_log_grid(
    func: Callable[[np.ndarray], np.ndarray],
    lo: float,
    hi: float,
    points: int = DEFAULT_GRID_POINTS,
) -> tuple[float, float]:
    """Maximize a unimodal positive-argument function over ``[lo, hi]``.

    A geometric grid locates the peak; golden-section search in log space then
    refines it between the neighbouring grid points. ``func`` must accept numpy
    arrays; overflow to infinity is tolerated.

    Returns:
        ``(x, func(x))`` at the best point found
    """
    grid = np.geomspace(lo, hi, points)
    with np.errstate(over="ignore", invalid="ignore"):
        values = np.nan_to_num(func(grid), nan=-np.inf)
    best = int(np.argmax(values))
    left = math.log(grid[max(best - 1, 0)])
    right = math.log(grid[min(best + 1, points - 1)])

    def in_log(z: float) -> float:
        with np.errstate(over="ignore", invalid="ignore"):
            value = float(func(np.array([math.exp(z)]))[0])
        return value if math.isfinite(value) else -math.inf

    z, value = golden_section_max(in_log, left, right)
    if value < values[best]:
        return float(grid[best]), float(values[best])
    return math.exp(z), value
