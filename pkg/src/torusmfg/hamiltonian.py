"""Hamiltonian models H(p, m) and sampled checks of the structural assumptions.

All model methods are vectorized: ``p`` carries the gradient components on
its first axis (shape ``(d, ...)``) and ``m`` has the trailing shape.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

Array = NDArray[np.float64]


def _check_density(m: ArrayLike) -> Array:
    m = np.asarray(m, dtype=float)
    if np.any(m < 0):
        raise ValueError(f"H is defined for m >= 0 only; got min(m) = {m.min():.6g}")
    return m


class HamiltonianModel(ABC):
    """Interface for a Hamiltonian ``H(p, m)`` with its p-gradient."""

    name: str = "abstract"
    #: constant C in |H| + |D_pH|^2 <= C (1 + |p|^2 + m^2)
    growth_constant: float = 1.0

    @abstractmethod
    def _eval(self, p: Array, m: Array) -> Array: ...

    @abstractmethod
    def _grad_p(self, p: Array, m: Array) -> Array: ...

    def eval(self, p: ArrayLike, m: ArrayLike) -> Array:
        return self._eval(np.asarray(p, dtype=float), _check_density(m))

    def grad_p(self, p: ArrayLike, m: ArrayLike) -> Array:
        return self._grad_p(np.asarray(p, dtype=float), _check_density(m))

    def monotonicity_quantity(self, p1, m1, p2, m2) -> Array:
        """The integrand of the monotonicity pairing.

        ``(-H(p1,m1) + H(p2,m2))(m1 - m2) + (m1 D_pH(p1,m1) - m2 D_pH(p2,m2)).(p1 - p2)``
        """
        p1, p2 = np.asarray(p1, dtype=float), np.asarray(p2, dtype=float)
        m1, m2 = _check_density(m1), _check_density(m2)
        dh = -self._eval(p1, m1) + self._eval(p2, m2)
        flux = m1 * self._grad_p(p1, m1) - m2 * self._grad_p(p2, m2)
        return dh * (m1 - m2) + np.sum(flux * (p1 - p2), axis=0)

    def legendre_defect(self, p, m) -> Array:
        """``-m H(p, m) + m D_pH(p, m).p``, i.e. ``m H*(D_pH(p, m), m)``."""
        p = np.asarray(p, dtype=float)
        m = _check_density(m)
        return -m * self._eval(p, m) + m * np.sum(self._grad_p(p, m) * p, axis=0)


class QuadraticHamiltonian(HamiltonianModel):
    """``H(p, m) = |p|^2 - m``."""

    name = "quadratic"

    def __init__(self, growth_constant: float = 5.0):
        self.growth_constant = growth_constant

    def _eval(self, p, m):
        return np.sum(p * p, axis=0) - m

    def _grad_p(self, p, m):
        return 2.0 * p * np.ones_like(m)

    def monotonicity_closed_form(self, p1, m1, p2, m2) -> Array:
        """``(m1 - m2)^2 + (m1 + m2) |p1 - p2|^2``."""
        dp = np.asarray(p1, dtype=float) - np.asarray(p2, dtype=float)
        m1, m2 = _check_density(m1), _check_density(m2)
        return (m1 - m2) ** 2 + (m1 + m2) * np.sum(dp * dp, axis=0)


MODELS = {"quadratic": QuadraticHamiltonian}


def make_model(name: str) -> HamiltonianModel:
    try:
        return MODELS[name]()
    except KeyError:
        raise ValueError(f"unknown model {name!r}; known: {sorted(MODELS)}") from None


# ---------------------------------------------------------------------------
# sampled assumption checks


@dataclass
class CheckReport:
    name: str
    passed: bool
    worst: float
    detail: str = ""
    extra: dict = field(default_factory=dict)

    def line(self) -> str:
        verdict = "PASS" if self.passed else "FAIL"
        return f"{verdict}  {self.name:<34s} worst={self.worst:.3e}  {self.detail}"


@dataclass
class Sampler:
    """Uniform samples ``p in [-p_max, p_max]^dim``, ``m in [0, m_max]``."""

    dim: int
    seed: int = 0
    p_max: float = 10.0
    m_max: float = 10.0

    def __post_init__(self):
        self.rng = np.random.default_rng(self.seed)

    def p(self, n: int) -> Array:
        return self.rng.uniform(-self.p_max, self.p_max, size=(self.dim, n))

    def m(self, n: int) -> Array:
        return self.rng.uniform(0.0, self.m_max, size=n)


def check_convexity_monotonicity(
    model: HamiltonianModel, sampler: Sampler, n_samples: int, tol: float = 1e-10
) -> CheckReport:
    """Sampled (H1): convexity in p (random chords) and m-nonincreasing."""
    p1, p2 = sampler.p(n_samples), sampler.p(n_samples)
    m = sampler.m(n_samples)
    theta = sampler.rng.uniform(0.0, 1.0, size=n_samples)
    # include the midpoint exactly
    theta[0] = 0.5
    lhs = model.eval(theta * p1 + (1 - theta) * p2, m)
    rhs = theta * model.eval(p1, m) + (1 - theta) * model.eval(p2, m)
    convex_viol = float(np.max(lhs - rhs))

    ma, mb = sampler.m(n_samples), sampler.m(n_samples)
    lo, hi = np.minimum(ma, mb), np.maximum(ma, mb)
    p = sampler.p(n_samples)
    mono_viol = float(np.max(model.eval(p, hi) - model.eval(p, lo)))

    worst = max(convex_viol, mono_viol, 0.0)
    return CheckReport(
        "H1 convex in p, nonincreasing in m",
        worst <= tol,
        worst,
        f"convexity={convex_viol:.3e} m-monotonicity={mono_viol:.3e}",
    )


def check_monotonicity_inequality(
    model: HamiltonianModel, sampler: Sampler, n_samples: int, tol: float = 1e-10
) -> CheckReport:
    """Sampled (H2): the monotonicity quantity is nonnegative."""
    q = model.monotonicity_quantity(
        sampler.p(n_samples), sampler.m(n_samples), sampler.p(n_samples), sampler.m(n_samples)
    )
    worst = float(max(-q.min(), 0.0))
    return CheckReport("H2 monotonicity inequality", worst <= tol, worst, f"min Q={q.min():.3e}")


def check_growth(model: HamiltonianModel, sampler: Sampler, n_samples: int) -> CheckReport:
    """Sampled (H3): ``|H| + |D_pH|^2 <= C (1 + |p|^2 + m^2)``."""
    p, m = sampler.p(n_samples), sampler.m(n_samples)
    # probe the origin and the unit vector as well
    p[:, 0] = 0.0
    m[0] = 0.0
    p[:, 1] = 0.0
    p[0, 1] = 1.0
    m[1] = 0.0
    lhs = np.abs(model.eval(p, m)) + np.sum(model.grad_p(p, m) ** 2, axis=0)
    ratio = lhs / (model.growth_constant * (1.0 + np.sum(p * p, axis=0) + m * m))
    worst = float(ratio.max())
    return CheckReport(
        "H3 quadratic growth", worst <= 1.0, worst, f"C={model.growth_constant:g} (worst ratio)"
    )


def check_grad_p(
    model: HamiltonianModel, sampler: Sampler, n_samples: int, rtol: float = 1e-6
) -> CheckReport:
    """Central finite differences of ``eval`` against ``grad_p``."""
    p, m = sampler.p(n_samples), sampler.m(n_samples)
    g = model.grad_p(p, m)
    fd = np.empty_like(p)
    for k in range(p.shape[0]):
        step = 1e-5 * np.maximum(1.0, np.abs(p[k]))
        e = np.zeros_like(p)
        e[k] = step
        fd[k] = (model.eval(p + e, m) - model.eval(p - e, m)) / (2 * step)
    scale = np.maximum(1.0, np.linalg.norm(g, axis=0))
    worst = float(np.max(np.linalg.norm(fd - g, axis=0) / scale))
    return CheckReport("D_pH matches finite differences", worst <= rtol, worst)


def check_legendre_defect(
    model: HamiltonianModel, sampler: Sampler, n_samples: int
) -> CheckReport:
    d = model.legendre_defect(sampler.p(n_samples), sampler.m(n_samples))
    worst = float(max(-d.min(), 0.0))
    return CheckReport("Legendre defect >= 0", worst == 0.0, worst, f"min={d.min():.3e}")
