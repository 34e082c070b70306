"""The monotone operator A of the MFG system, the coercive operator B and their pairing.

Elements of the dual space are stored by their L2 representers, so pairing
with a state ``(mu, v)`` is ``<dual_m, mu> + <dual_u, v>``.  The ``Dv`` test
term of A is folded into ``dual_u`` through ``-div``, which is exact on the
grid by summation by parts.
"""

from __future__ import annotations

from dataclasses import dataclass
import numpy as np

from .grid import Array, GridSpec, StatePair, check_scalar, check_state, div, grad, inner_l2
from .hamiltonian import HamiltonianModel


@dataclass(frozen=True)
class DualVector:
    dual_m: Array
    dual_u: Array

    def __add__(self, other: DualVector) -> DualVector:
        return DualVector(self.dual_m + other.dual_m, self.dual_u + other.dual_u)

    def __sub__(self, other: DualVector) -> DualVector:
        return DualVector(self.dual_m - other.dual_m, self.dual_u - other.dual_u)

    def scaled(self, s: float) -> DualVector:
        return DualVector(s * self.dual_m, s * self.dual_u)


@dataclass(frozen=True)
class ProblemSpec:
    grid: GridSpec
    model: HamiltonianModel
    V: Array

    def __post_init__(self):
        V = check_scalar(self.V, self.grid, "V")
        if not np.all(np.isfinite(V)):
            raise ValueError("potential V must be finite")
        object.__setattr__(self, "V", V)


def _require_density(m: Array) -> None:
    if np.any(m < 0):
        idx = np.unravel_index(np.argmin(m), m.shape)
        raise ValueError(f"negative density {m[idx]:.6g} at node {tuple(int(i) for i in idx)}")


def apply_A(z: StatePair, prob: ProblemSpec) -> DualVector:
    """``dual_m = -u - H(Du, m) - V``; ``dual_u = -div(m D_pH(Du, m)) + m - 1``."""
    g = prob.grid
    check_state(z, g)
    _require_density(z.m)
    p = grad(z.u, g)
    dual_m = -z.u - prob.model.eval(p, z.m) - prob.V
    dual_u = -div(z.m * prob.model.grad_p(p, z.m), g) + (z.m - 1.0)
    return DualVector(dual_m, dual_u)


def apply_B(z: StatePair, g: GridSpec) -> DualVector:
    """``dual_m = m``; ``dual_u = u - Laplacian(u)``."""
    check_state(z, g)
    return DualVector(np.array(z.m, dtype=float), z.u - div(grad(z.u, g), g))


def apply_A_eps(z: StatePair, eps: float, prob: ProblemSpec) -> DualVector:
    if eps < 0:
        raise ValueError(f"eps must be >= 0, got {eps}")
    a = apply_A(z, prob)
    if eps == 0:
        return a
    return a + apply_B(z, prob.grid).scaled(eps)


def pair(dv: DualVector, w: StatePair, g: GridSpec) -> float:
    return inner_l2(dv.dual_m, w.m, g) + inner_l2(dv.dual_u, w.u, g)


def residual_strong(z: StatePair, prob: ProblemSpec) -> tuple[Array, Array]:
    """Pointwise residuals of the HJ equation and of the transport equation.

    The transport flux is ``m D_pH(Du, m)``, the same flux that appears in A,
    so both residuals vanish exactly when A does.
    """
    g = prob.grid
    check_state(z, g)
    _require_density(z.m)
    p = grad(z.u, g)
    hj = -z.u - prob.model.eval(p, z.m) - prob.V
    fp = z.m - div(z.m * prob.model.grad_p(p, z.m), g) - 1.0
    return hj, fp


def monotonicity_integral(z1: StatePair, z2: StatePair, prob: ProblemSpec) -> float:
    """``h^d * sum_x Q(Du1, m1, Du2, m2)``, the closed form of the monotonicity pairing."""
    g = prob.grid
    q = prob.model.monotonicity_quantity(grad(z1.u, g), z1.m, grad(z2.u, g), z2.m)
    return g.cell_volume * float(q.sum())
