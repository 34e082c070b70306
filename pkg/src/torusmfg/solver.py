"""Regularized projected iteration and epsilon-continuation for the MFG system.

For fixed ``eps`` the state is advanced by

    m <- P_K(m - tau * F_m)
    u <- u - tau * (R F_u - mean(R F_u)) - t

where ``F = (A + eps B)[z]``, ``R`` is the Riesz map of ``(I - Laplacian)``
(or the identity) and ``t`` is the threshold found by the mass projection.
On K the mean of ``F_u`` is always ``eps * mean(u)``, so that component carries
no information; instead the constant mode of ``u`` absorbs the multiplier of
the mass constraint.  A fixed point therefore solves the m-equation without a
Lagrange multiplier, and the continuation limit is a zero of A rather than a
zero shifted by a constant.
"""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field, fields
from typing import Callable

import numpy as np

from .feasible import is_feasible, project_density, project_K
from .grid import Array, GridSpec, StatePair, x_norm
from .operator import ProblemSpec, apply_A, apply_A_eps, pair, residual_strong

log = logging.getLogger(__name__)

STEP_POLICIES = ("adaptive", "fixed")
PRECONDITIONERS = ("laplace", "identity")
INITIALIZATIONS = ("uniform", "random")


class InvalidSetting(ValueError):
    """A solver setting outside its admissible range; ``key`` names the setting."""

    def __init__(self, key: str, message: str):
        super().__init__(message)
        self.key = key


@dataclass
class SolverConfig:
    eps0: float = 1.0
    gamma: float = 0.3
    eps_min: float = 1e-6
    tol_inner: float = 1e-9
    tol_outer: float = 1e-6
    max_inner_iters: int = 5000
    max_outer_stages: int = 40
    step_policy: str = "adaptive"
    tau: float = 0.5
    preconditioner: str = "laplace"
    init: str = "uniform"
    limit_stage: bool = True
    seed: int = 0

    def __post_init__(self):
        self.validate()

    def validate(self) -> None:
        checks = [
            ("eps0", self.eps0 > 0, "eps0 must be > 0"),
            ("gamma", 0 < self.gamma < 1, "gamma must lie in (0,1)"),
            ("eps_min", 0 < self.eps_min <= self.eps0, "eps_min must lie in (0, eps0]"),
            ("tol_inner", self.tol_inner > 0, "tol_inner must be > 0"),
            ("tol_outer", self.tol_outer > 0, "tol_outer must be > 0"),
            ("max_inner_iters", self.max_inner_iters >= 1, "max_inner_iters must be >= 1"),
            ("max_outer_stages", self.max_outer_stages >= 1, "max_outer_stages must be >= 1"),
            ("tau", 0 < self.tau <= 1, "tau must lie in (0,1]"),
            ("step_policy", self.step_policy in STEP_POLICIES,
             f"step_policy must be one of {', '.join(STEP_POLICIES)}"),
            ("preconditioner", self.preconditioner in PRECONDITIONERS,
             f"preconditioner must be one of {', '.join(PRECONDITIONERS)}"),
            ("init", self.init in INITIALIZATIONS,
             f"init must be one of {', '.join(INITIALIZATIONS)}"),
        ]
        for name, ok, msg in checks:
            if not ok:
                raise InvalidSetting(name, msg)

    @classmethod
    def field_names(cls) -> list[str]:
        return [f.name for f in fields(cls)]


@dataclass
class StageRecord:
    eps: float
    iterations: int
    inner_residual: float
    converged: bool
    tau: float
    x_norm: float
    hj_residual: float
    fp_residual: float
    mass: float
    min_density: float


@dataclass
class ContinuationReport:
    stages: list[StageRecord] = field(default_factory=list)
    status: str = "running"

    @property
    def success(self) -> bool:
        return self.status == "converged"

    def as_dict(self) -> dict:
        return {"status": self.status, "stages": [asdict(s) for s in self.stages]}


class SolverError(RuntimeError):
    pass


def _check_finite(z: StatePair, what: str) -> None:
    for name in ("m", "u"):
        a = getattr(z, name)
        if not np.all(np.isfinite(a)):
            raise SolverError(f"non-finite values in {name} ({what})")


def _laplace_symbol(g: GridSpec) -> Array:
    """Eigenvalues of ``I - Laplacian`` for the forward/backward difference pair."""
    j = np.arange(g.n)
    lam1 = (4.0 / g.h**2) * np.sin(np.pi * j / g.n) ** 2
    sym = np.ones(g.shape)
    for k in range(g.dim):
        shape = [1] * g.dim
        shape[k] = g.n
        sym = sym + lam1.reshape(shape)
    return sym


class _Preconditioner:
    def __init__(self, kind: str, g: GridSpec):
        self.kind = kind
        self.symbol = _laplace_symbol(g) if kind == "laplace" else None

    def __call__(self, f: Array) -> Array:
        if self.symbol is None:
            return f
        return np.real(np.fft.ifftn(np.fft.fftn(f) / self.symbol))


def riesz_solve(f: Array, g: GridSpec) -> Array:
    """Solve ``(I - Laplacian) r = f`` on the torus (exact, by FFT)."""
    return _Preconditioner("laplace", g)(np.asarray(f, dtype=float))


class _Stepper:
    """The projected fixed-point map for one value of eps."""

    def __init__(self, prob: ProblemSpec, eps: float, precond: _Preconditioner):
        self.prob = prob
        self.eps = eps
        self.precond = precond

    def __call__(self, z: StatePair, tau: float) -> StatePair:
        g = self.prob.grid
        F = apply_A_eps(z, self.eps, self.prob)
        m_new, t = project_density(z.m - tau * F.dual_m, g)
        r = self.precond(F.dual_u)
        r -= r.mean()
        return StatePair(m_new, z.u - tau * r - t)

    def residual(self, z: StatePair, tz: StatePair, tau: float) -> float:
        return x_norm(z - tz, self.prob.grid) / tau


def solve_regularized(
    z0: StatePair,
    eps: float,
    prob: ProblemSpec,
    cfg: SolverConfig,
    callback: Callable[[int, float, float], None] | None = None,
) -> tuple[StatePair, StageRecord]:
    """Solve the eps-regularized problem over K, warm-started from ``z0``.

    Stops when ``||z - T_tau(z)||_X / tau <= tol_inner``.  With the adaptive
    policy the step starts at ``cfg.tau`` and is halved whenever a step fails
    to decrease the fixed-point residual.  ``callback(iteration, residual, tau)``
    is called after every accepted step.
    """
    if eps < 0:
        raise ValueError("eps must be >= 0")
    g = prob.grid
    _check_finite(z0, "initial state")
    z = project_K(z0, g)
    step = _Stepper(prob, eps, _Preconditioner(cfg.preconditioner, g))
    tau = cfg.tau
    tz = step(z, tau)
    _check_finite(tz, f"eps={eps:g}, first step")
    res = step.residual(z, tz, tau)
    best = (res, z)
    it = 0
    while res > cfg.tol_inner and it < cfg.max_inner_iters:
        it += 1
        ttz = step(tz, tau)
        _check_finite(ttz, f"eps={eps:g}, iteration {it}")
        new_res = step.residual(tz, ttz, tau)
        if cfg.step_policy == "adaptive" and not new_res < res:
            tau *= 0.5
            if tau < 1e-10:
                log.warning("eps=%g: step size underflow at iteration %d", eps, it)
                break
            tz = step(z, tau)
            res = step.residual(z, tz, tau)
            continue
        z, tz, res = tz, ttz, new_res
        if callback is not None:
            callback(it, res, tau)
        if res < best[0]:
            best = (res, z)
    converged = res <= cfg.tol_inner
    if not converged:
        res, z = best
        log.warning("eps=%g: inner solve stopped at residual %.3e", eps, res)
    log.debug("eps=%g: %d iterations, residual %.3e, tau %g", eps, it, res, tau)
    return z, _stage_record(z, eps, it, res, converged, tau, prob)


def _stage_record(z, eps, it, res, converged, tau, prob) -> StageRecord:
    hj, fp = residual_strong(z, prob)
    feas = is_feasible(z, prob.grid)
    return StageRecord(
        eps=float(eps),
        iterations=it,
        inner_residual=float(res),
        converged=bool(converged),
        tau=float(tau),
        x_norm=x_norm(z, prob.grid),
        hj_residual=float(np.max(np.abs(hj))),
        fp_residual=float(np.max(np.abs(fp))),
        mass=1.0 + feas.mass_error,
        min_density=feas.min_density,
    )


def smooth_random_field(g: GridSpec, rng: np.random.Generator, kmax: int = 2) -> Array:
    """Random trigonometric polynomial with wavenumbers ``|k|_inf <= kmax``, unit max-norm."""
    x = g.coordinates()
    f = g.zeros()
    for k in np.ndindex(*(2 * kmax + 1,) * g.dim):
        kv = np.array(k) - kmax
        if not kv.any():
            continue
        phase = 2 * np.pi * np.tensordot(kv, x, axes=1)
        f += rng.normal() * np.cos(phase + rng.uniform(0, 2 * np.pi)) / np.dot(kv, kv)
    return f / np.max(np.abs(f))


def initial_state(prob: ProblemSpec, cfg: SolverConfig) -> StatePair:
    """``(1, 0)``, or a seeded smooth random state projected onto K.

    Random states are smooth on purpose: white-noise values of u give
    gradients of order 1/h, and the forward iteration cannot recover once
    the first projection has concentrated all the mass on a few nodes.
    """
    g = prob.grid
    if cfg.init == "uniform":
        return StatePair(g.constant(1.0), g.zeros())
    rng = np.random.default_rng(cfg.seed)
    m = 1.0 + rng.uniform(0.2, 0.9) * smooth_random_field(g, rng)
    u = rng.uniform(-1.0, 1.0) + rng.uniform(0.1, 1.0) * smooth_random_field(g, rng)
    return project_K(StatePair(m, u), g)


def eps_schedule(cfg: SolverConfig) -> list[float]:
    """``eps0 * gamma^k`` down to ``eps_min``, then 0 if the limit stage is on."""
    out = []
    eps = cfg.eps0
    while eps >= cfg.eps_min and len(out) < cfg.max_outer_stages:
        out.append(eps)
        eps *= cfg.gamma
    if cfg.limit_stage and len(out) < cfg.max_outer_stages:
        out.append(0.0)
    return out


def solve_mfg(
    prob: ProblemSpec, cfg: SolverConfig, z0: StatePair | None = None
) -> tuple[StatePair, ContinuationReport]:
    """Epsilon-continuation with warm starts until the strong residuals meet ``tol_outer``."""
    z = initial_state(prob, cfg) if z0 is None else z0
    report = ContinuationReport()
    best_outer = math.inf
    stalled = 0
    for eps in eps_schedule(cfg):
        z, rec = solve_regularized(z, eps, prob, cfg)
        report.stages.append(rec)
        outer = max(rec.hj_residual, rec.fp_residual)
        log.info(
            "eps=%-9.3g iters=%-5d inner=%.2e outer=%.2e |z|_X=%.6f",
            eps, rec.iterations, rec.inner_residual, outer, rec.x_norm,
        )
        if outer <= cfg.tol_outer and rec.converged:
            report.status = "converged"
            return z, report
        if outer < best_outer:
            best_outer, stalled = outer, 0
        else:
            stalled += 1
            if stalled >= 3:
                report.status = "stagnated"
                return z, report
    report.status = "not_converged"
    return z, report


def random_feasible(g: GridSpec, rng: np.random.Generator, scale: float = 1.0) -> StatePair:
    m = rng.exponential(1.0, size=g.shape)
    m /= g.cell_volume * m.sum()
    u = scale * rng.normal(size=g.shape)
    return StatePair(m, u)


def verify_minty(z: StatePair, prob: ProblemSpec, n_samples: int = 50, seed: int = 0) -> float:
    """Smallest ``<A[w], w - z>`` over random feasible ``w``, normalized by
    ``(1 + |w|_X)(1 + |z|_X)``.

    Even-numbered samples are drawn globally, odd ones as projected
    smooth perturbations of ``z`` at log-uniform scales, which is where a non-solution
    shows a negative value.  A shift of u by a constant cannot be detected:
    against unit-mass competitors it pairs to zero.
    """
    g = prob.grid
    rng = np.random.default_rng(seed)
    nz = x_norm(z, g)
    worst = math.inf
    for i in range(n_samples):
        if i % 2 == 0:
            w = random_feasible(g, rng, scale=rng.uniform(0.0, 2.0))
        else:
            delta = 10.0 ** rng.uniform(-6, 0)
            w = project_K(StatePair(z.m + delta * smooth_random_field(g, rng),
                                    z.u + delta * smooth_random_field(g, rng)), g)
        val = pair(apply_A(w, prob), w - z, g) / ((1 + x_norm(w, g)) * (1 + nz))
        worst = min(worst, val)
    return worst


@dataclass
class EnergyCheck:
    passed: bool
    max_ratio: float


def energy_trace(report: ContinuationReport, factor: float = 10.0) -> EnergyCheck:
    """Check that the X norm of every stage stays below ``factor`` times stage one."""
    if not report.stages:
        return EnergyCheck(True, 1.0)
    first = report.stages[0].x_norm
    ratio = max(s.x_norm for s in report.stages) / first if first > 0 else 1.0
    return EnergyCheck(ratio <= factor, ratio)
