"""The constraint set K (nonnegative density of unit mass) and projection onto it."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .grid import Array, GridSpec, StatePair, check_state, mass

DEFAULT_TOL = 1e-10
# inputs this close to K are returned untouched, which makes projection idempotent
_EXACT_TOL = 1e-12


@dataclass(frozen=True)
class FeasibilityReport:
    min_density: float
    mass_error: float
    feasible: bool


def is_feasible(z: StatePair, g: GridSpec, tol: float = DEFAULT_TOL) -> FeasibilityReport:
    check_state(z, g)
    lo = float(np.min(z.m))
    err = mass(z.m, g) - 1.0
    return FeasibilityReport(lo, err, lo >= -tol and abs(err) <= tol)


def simplex_threshold(y: Array, total: float) -> float:
    """Return ``t`` with ``sum(max(y - t, 0)) == total`` (sort-based, ``total > 0``)."""
    s = np.sort(y.ravel())[::-1]
    css = np.cumsum(s) - total
    k = np.arange(1, s.size + 1)
    # largest k with s[k-1] > (css[k-1]) / k
    active = np.nonzero(s * k > css)[0][-1]
    return float(css[active] / (active + 1))


def project_density(m: Array, g: GridSpec) -> tuple[Array, float]:
    """L2 projection of ``m`` onto ``{m >= 0, mass(m) = 1}``; also returns the threshold."""
    m = np.asarray(m, dtype=float)
    if m.min() >= 0 and abs(mass(m, g) - 1.0) <= _EXACT_TOL:
        return m.copy(), 0.0
    t = simplex_threshold(m, 1.0 / g.cell_volume)
    return np.maximum(m - t, 0.0), t


def project_K(z: StatePair, g: GridSpec) -> StatePair:
    """Euclidean projection onto K; ``u`` is not constrained and passes through."""
    check_state(z, g)
    if not (np.all(np.isfinite(z.m)) and np.all(np.isfinite(z.u))):
        raise ValueError("cannot project a state with non-finite entries")
    m, _ = project_density(z.m, g)
    return StatePair(m, np.array(z.u, dtype=float))
