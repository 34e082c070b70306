"""Self-checks run by ``torusmfg check``: sampled assumptions on H and exact discrete identities."""

from __future__ import annotations

import itertools
from typing import Callable

import numpy as np

from . import grid as tg
from .feasible import project_K
from .grid import GridSpec, StatePair
from .hamiltonian import (
    CheckReport,
    HamiltonianModel,
    Sampler,
    check_convexity_monotonicity,
    check_grad_p,
    check_growth,
    check_legendre_defect,
    check_monotonicity_inequality,
)
from .operator import ProblemSpec, apply_A, apply_B, monotonicity_integral, pair


def project_bruteforce(y: np.ndarray, cell_volume: float) -> np.ndarray:
    """Projection onto ``{x >= 0, cell_volume * sum(x) = 1}`` by enumerating supports.

    For each support S the KKT system gives ``x_S = y_S - t`` with a common
    shift t; a support is admissible when ``x_S >= 0`` and ``y_i <= t`` off S.
    """
    y = np.asarray(y, dtype=float).ravel()
    total = 1.0 / cell_volume
    best, best_dist = None, np.inf
    for r in range(1, y.size + 1):
        for S in itertools.combinations(range(y.size), r):
            S = list(S)
            t = (y[S].sum() - total) / len(S)
            x = np.zeros_like(y)
            x[S] = y[S] - t
            off = np.setdiff1d(np.arange(y.size), S)
            if x[S].min() < -1e-14 or (off.size and y[off].max() > t + 1e-14):
                continue
            x = np.maximum(x, 0.0)
            dist = np.sum((x - y) ** 2)
            if dist < best_dist:
                best, best_dist = x, dist
    return best


def random_state(g: GridSpec, rng: np.random.Generator, density: str = "any") -> StatePair:
    """Random state with nonnegative density; ``density='unit'`` normalizes the mass."""
    m = rng.exponential(1.0, size=g.shape)
    if density == "unit":
        m = m / (g.cell_volume * m.sum())
    return StatePair(m, rng.normal(size=g.shape))


def check_summation_by_parts(
    rng: np.random.Generator, trials: int = 100, divergence: Callable = tg.div
) -> CheckReport:
    worst = 0.0
    for dim, n in ((1, 16), (2, 16), (3, 6)):
        g = GridSpec(dim, n)
        for _ in range(trials):
            u = rng.normal(size=g.shape)
            q = rng.normal(size=g.vshape)
            lhs = tg.inner_l2_vec(tg.grad(u, g), q, g) + tg.inner_l2(u, divergence(q, g), g)
            scale = np.sqrt(tg.inner_l2(u, u, g) * tg.inner_l2_vec(q, q, g))
            worst = max(worst, abs(lhs) / scale)
    return CheckReport("summation by parts", worst <= 1e-12, worst, "relative, d=1,2,3")


def check_monotonicity_identity(
    model: HamiltonianModel, rng: np.random.Generator, dim: int = 2, n: int = 16, trials: int = 100
) -> CheckReport:
    g = GridSpec(dim, n)
    prob = ProblemSpec(g, model, rng.normal(size=g.shape))
    worst, lowest = 0.0, np.inf
    for _ in range(trials):
        z1, z2 = random_state(g, rng), random_state(g, rng)
        lhs = pair(apply_A(z1, prob) - apply_A(z2, prob), z1 - z2, g)
        rhs = monotonicity_integral(z1, z2, prob)
        worst = max(worst, abs(lhs - rhs) / max(abs(rhs), 1e-300))
        lowest = min(lowest, lhs)
    ok = worst <= 1e-10 and lowest >= 0
    return CheckReport("monotonicity pairing identity", ok, worst, f"min pairing={lowest:.3e}")


def check_b_norm_identity(rng: np.random.Generator, dim: int = 2, n: int = 16, trials: int = 100) -> CheckReport:
    g = GridSpec(dim, n)
    worst = 0.0
    for _ in range(trials):
        z1, z2 = random_state(g, rng), random_state(g, rng)
        dz = z1 - z2
        lhs = pair(apply_B(z1, g) - apply_B(z2, g), dz, g)
        rhs = tg.x_norm_sq(dz, g)
        worst = max(worst, abs(lhs - rhs) / rhs)
    return CheckReport("B pairing = X norm squared", worst <= 1e-12, worst)


def check_projection_oracle(rng: np.random.Generator, trials: int = 200) -> CheckReport:
    shapes = [(1, 2), (1, 3), (1, 4), (1, 5), (1, 6), (2, 2)]
    worst = 0.0
    for i in range(trials):
        g = GridSpec(*shapes[i % len(shapes)])
        m = rng.normal(loc=1.0, scale=2.0, size=g.shape)
        got = project_K(StatePair(m, g.zeros()), g).m
        ref = project_bruteforce(m, g.cell_volume).reshape(g.shape)
        worst = max(worst, float(np.max(np.abs(got - ref))))
    return CheckReport("projection matches KKT enumeration", worst <= 1e-12, worst)


def run_all(
    model: HamiltonianModel, dim: int, seed: int = 0, divergence: Callable = tg.div
) -> list[CheckReport]:
    rng = np.random.default_rng(seed)
    n_samples = 10_000
    return [
        check_convexity_monotonicity(model, Sampler(dim, seed), n_samples),
        check_monotonicity_inequality(model, Sampler(dim, seed + 1), n_samples),
        check_growth(model, Sampler(dim, seed + 2), n_samples),
        check_grad_p(model, Sampler(dim, seed + 3), 1000),
        check_legendre_defect(model, Sampler(dim, seed + 4), n_samples),
        check_summation_by_parts(rng, divergence=divergence),
        check_monotonicity_identity(model, rng),
        check_b_norm_identity(rng),
        check_projection_oracle(rng),
    ]


def broken_div(q: np.ndarray, g: GridSpec) -> np.ndarray:
    """Forward-difference divergence; not the adjoint of the gradient (negative control)."""
    out = np.zeros(g.shape)
    for k in range(g.dim):
        out += (np.roll(q[k], -1, axis=k) - q[k]) / g.h
    return out
