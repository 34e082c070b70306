"""Discrete flat torus: periodic finite differences, L2 pairings and the X norm.

Fields are numpy arrays of shape ``(n,) * dim``; flattening in C order gives
the row-major node order used for all I/O.  Vector fields carry the component
axis first, shape ``(dim,) + (n,) * dim``.

The gradient is a forward difference and the divergence a backward
difference, both with periodic wraparound, so that ``div = -grad^T`` holds
exactly with respect to :func:`inner_l2`.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

Array = NDArray[np.float64]


@dataclass(frozen=True)
class GridSpec:
    """Uniform grid on the unit torus ``[0, 1)^dim``.

    Attributes:
        dim: Spatial dimension, 1 to 3.
        n: Nodes per axis.
    """

    dim: int
    n: int

    def __post_init__(self):
        if self.dim not in (1, 2, 3):
            raise ValueError(f"dim must be 1, 2 or 3, got {self.dim}")
        if self.n < 2:
            raise ValueError(f"n must be >= 2, got {self.n}")

    @property
    def h(self) -> float:
        return 1.0 / self.n

    @property
    def shape(self) -> tuple[int, ...]:
        return (self.n,) * self.dim

    @property
    def vshape(self) -> tuple[int, ...]:
        return (self.dim,) + self.shape

    @property
    def size(self) -> int:
        return self.n**self.dim

    @property
    def cell_volume(self) -> float:
        return self.h**self.dim

    def coordinates(self) -> Array:
        """Node coordinates, shape ``(dim,) + shape``; node ``i`` sits at ``i*h``."""
        axis = np.arange(self.n) * self.h
        return np.stack(np.meshgrid(*([axis] * self.dim), indexing="ij"))

    def zeros(self) -> Array:
        return np.zeros(self.shape)

    def constant(self, c: float) -> Array:
        return np.full(self.shape, float(c))


@dataclass(frozen=True)
class StatePair:
    """The unknown ``z = (m, u)``: density and value function."""

    m: Array
    u: Array

    def __add__(self, other: StatePair) -> StatePair:
        return StatePair(self.m + other.m, self.u + other.u)

    def __sub__(self, other: StatePair) -> StatePair:
        return StatePair(self.m - other.m, self.u - other.u)

    def scaled(self, s: float) -> StatePair:
        return StatePair(s * self.m, s * self.u)


def check_scalar(f: Array, g: GridSpec, name: str = "field") -> Array:
    f = np.asarray(f, dtype=float)
    if f.shape != g.shape:
        raise ValueError(f"{name} has shape {f.shape}, expected {g.shape}")
    return f


def check_vector(q: Array, g: GridSpec, name: str = "vector field") -> Array:
    q = np.asarray(q, dtype=float)
    if q.shape != g.vshape:
        raise ValueError(f"{name} has shape {q.shape}, expected {g.vshape}")
    return q


def check_state(z: StatePair, g: GridSpec) -> None:
    check_scalar(z.m, g, "m")
    check_scalar(z.u, g, "u")


def grad(u: Array, g: GridSpec) -> Array:
    """Forward-difference gradient, ``(u(x + h e_k) - u(x)) / h``."""
    u = check_scalar(u, g, "u")
    return np.stack([(np.roll(u, -1, axis=k) - u) / g.h for k in range(g.dim)])


def div(q: Array, g: GridSpec) -> Array:
    """Backward-difference divergence, the negative adjoint of :func:`grad`."""
    q = check_vector(q, g, "q")
    out = np.zeros(g.shape)
    for k in range(g.dim):
        out += (q[k] - np.roll(q[k], 1, axis=k)) / g.h
    return out


def laplacian(u: Array, g: GridSpec) -> Array:
    return div(grad(u, g), g)


def inner_l2(a: Array, b: Array, g: GridSpec) -> float:
    a = check_scalar(a, g, "a")
    b = check_scalar(b, g, "b")
    return g.cell_volume * float(np.dot(a.ravel(), b.ravel()))


def inner_l2_vec(p: Array, q: Array, g: GridSpec) -> float:
    p = check_vector(p, g, "p")
    q = check_vector(q, g, "q")
    return g.cell_volume * float(np.dot(p.ravel(), q.ravel()))


def mass(m: Array, g: GridSpec) -> float:
    m = check_scalar(m, g, "m")
    return g.cell_volume * float(m.sum())


def x_norm_sq(z: StatePair, g: GridSpec) -> float:
    """``||m||^2 + ||u||^2 + ||Du||^2`` in discrete L2."""
    check_state(z, g)
    du = grad(z.u, g)
    return inner_l2(z.m, z.m, g) + inner_l2(z.u, z.u, g) + inner_l2_vec(du, du, g)


def x_norm(z: StatePair, g: GridSpec) -> float:
    return float(np.sqrt(x_norm_sq(z, g)))
