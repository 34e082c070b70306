"""Line-oriented ``key = value`` run configuration.

Example::

    grid.dim = 2
    grid.n = 32
    model = quadratic
    potential.kind = cosine
    potential.term = 0.1; 1 0; 0.0      # amplitude; wavevector; phase
    solver.gamma = 0.3

``#`` starts a comment.  ``potential.term`` may repeat; every other key may
appear once.  Cosine terms contribute ``a * cos(2 pi k.x + phase)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, fields
from pathlib import Path

import numpy as np

from .grid import Array, GridSpec
from .hamiltonian import MODELS, make_model
from .operator import ProblemSpec
from .solver import InvalidSetting, SolverConfig

POTENTIAL_KINDS = ("constant", "cosine", "file")


class ConfigError(ValueError):
    def __init__(self, message: str, line: int | None = None):
        self.line = line
        super().__init__(f"line {line}: {message}" if line is not None else message)


@dataclass(frozen=True)
class CosineTerm:
    amplitude: float
    wavevector: tuple[int, ...]
    phase: float = 0.0


@dataclass
class PotentialSpec:
    kind: str = "constant"
    value: float = 0.0
    terms: list[CosineTerm] = field(default_factory=list)
    file: str | None = None

    def field(self, g: GridSpec, base_dir: Path | None = None) -> Array:
        if self.kind == "constant":
            return g.constant(self.value)
        if self.kind == "cosine":
            x = g.coordinates()
            V = g.zeros()
            for t in self.terms:
                if len(t.wavevector) != g.dim:
                    raise ConfigError(f"wavevector {t.wavevector} does not match dim={g.dim}")
                phase = 2 * np.pi * np.tensordot(np.array(t.wavevector, dtype=float), x, axes=1)
                V += t.amplitude * np.cos(phase + t.phase)
            return V
        from .io import read_field

        path = Path(self.file)
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        return read_field(path, g)


@dataclass
class RunConfig:
    dim: int = 1
    n: int = 32
    model: str = "quadratic"
    potential: PotentialSpec = field(default_factory=PotentialSpec)
    solver: SolverConfig = field(default_factory=SolverConfig)
    base_dir: Path | None = field(default=None, compare=False)

    @property
    def grid(self) -> GridSpec:
        return GridSpec(self.dim, self.n)

    def problem(self, n: int | None = None) -> ProblemSpec:
        g = GridSpec(self.dim, self.n if n is None else n)
        return ProblemSpec(g, make_model(self.model), self.potential.field(g, self.base_dir))


def _parse_float(text: str, key: str, line: int) -> float:
    try:
        v = float(text)
    except ValueError:
        raise ConfigError(f"{key}: expected a number, got {text!r}", line) from None
    if not math.isfinite(v):
        raise ConfigError(f"{key}: value must be finite", line)
    return v


def _parse_int(text: str, key: str, line: int) -> int:
    try:
        return int(text)
    except ValueError:
        raise ConfigError(f"{key}: expected an integer, got {text!r}", line) from None


def _parse_bool(text: str, key: str, line: int) -> bool:
    low = text.lower()
    if low in ("true", "yes", "1"):
        return True
    if low in ("false", "no", "0"):
        return False
    raise ConfigError(f"{key}: expected true/false, got {text!r}", line)


def _parse_term(text: str, line: int) -> CosineTerm:
    parts = [p.strip() for p in text.split(";")]
    if len(parts) not in (2, 3):
        raise ConfigError("potential.term must be 'amplitude; k1 [k2 [k3]]; [phase]'", line)
    amp = _parse_float(parts[0], "potential.term amplitude", line)
    k = []
    for tok in parts[1].replace(",", " ").split():
        try:
            kf = float(tok)
        except ValueError:
            raise ConfigError(f"potential.term: bad wavevector entry {tok!r}", line) from None
        if not kf.is_integer():
            raise ConfigError(
                f"potential.term: wavevector entries must be integers (got {tok}) "
                "so that the potential is periodic",
                line,
            )
        k.append(int(kf))
    if not k:
        raise ConfigError("potential.term: empty wavevector", line)
    phase = _parse_float(parts[2], "potential.term phase", line) if len(parts) == 3 and parts[2] else 0.0
    return CosineTerm(amp, tuple(k), phase)


_SOLVER_TYPES = {f.name: f.type for f in fields(SolverConfig)}


def parse_config(text: str, base_dir: Path | str | None = None) -> RunConfig:
    """Parse and validate a run configuration; errors carry the line number."""
    cfg = RunConfig(base_dir=Path(base_dir) if base_dir is not None else None)
    solver_kw: dict = {}
    solver_lines: dict[str, int] = {}
    seen: dict[str, int] = {}
    lines: dict[str, int] = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {raw.strip()!r}", lineno)
        key, value = (s.strip() for s in line.split("=", 1))
        if key in seen and key != "potential.term":
            raise ConfigError(f"duplicate key {key!r} (first on line {seen[key]})", lineno)
        seen[key] = lineno
        lines[key] = lineno
        if key == "grid.dim":
            cfg.dim = _parse_int(value, key, lineno)
            if cfg.dim not in (1, 2, 3):
                raise ConfigError("grid.dim must be 1, 2 or 3", lineno)
        elif key == "grid.n":
            cfg.n = _parse_int(value, key, lineno)
            if cfg.n < 2:
                raise ConfigError("grid.n must be >= 2", lineno)
        elif key == "model":
            if value not in MODELS:
                raise ConfigError(f"unknown model {value!r}; known: {', '.join(MODELS)}", lineno)
            cfg.model = value
        elif key == "potential.kind":
            if value not in POTENTIAL_KINDS:
                raise ConfigError(f"potential.kind must be one of {', '.join(POTENTIAL_KINDS)}", lineno)
            cfg.potential.kind = value
        elif key == "potential.value":
            cfg.potential.value = _parse_float(value, key, lineno)
        elif key == "potential.term":
            cfg.potential.terms.append(_parse_term(value, lineno))
        elif key == "potential.file":
            cfg.potential.file = value
        elif key.startswith("solver.") and key[7:] in _SOLVER_TYPES:
            name = key[7:]
            kind = _SOLVER_TYPES[name]
            if kind == "float":
                solver_kw[name] = _parse_float(value, key, lineno)
            elif kind == "int":
                solver_kw[name] = _parse_int(value, key, lineno)
            elif kind == "bool":
                solver_kw[name] = _parse_bool(value, key, lineno)
            else:
                solver_kw[name] = value
            solver_lines[name] = lineno
        else:
            raise ConfigError(f"unknown key {key!r}", lineno)

    try:
        cfg.solver = SolverConfig(**solver_kw)
    except InvalidSetting as exc:
        raise ConfigError(str(exc), solver_lines.get(exc.key)) from None

    pot = cfg.potential
    if pot.kind == "cosine":
        if not pot.terms:
            raise ConfigError("potential.kind = cosine needs at least one potential.term", lines.get("potential.kind"))
        for t in pot.terms:
            if len(t.wavevector) != cfg.dim:
                raise ConfigError(
                    f"wavevector {t.wavevector} has {len(t.wavevector)} entries, grid.dim = {cfg.dim}",
                    lines.get("potential.term"),
                )
    if pot.kind == "file":
        if pot.file is None:
            raise ConfigError("potential.kind = file needs potential.file", lines.get("potential.kind"))
        path = Path(pot.file)
        if cfg.base_dir is not None and not path.is_absolute():
            path = cfg.base_dir / path
        if not path.is_file():
            raise ConfigError(f"potential file not found: {path}", lines.get("potential.file"))
        try:
            pot.field(cfg.grid, cfg.base_dir)
        except ValueError as exc:
            raise ConfigError(f"potential file: {exc}", lines.get("potential.file")) from None
    return cfg


def load_config(path: Path | str) -> RunConfig:
    path = Path(path)
    return parse_config(path.read_text(), base_dir=path.parent)


def emit_config(cfg: RunConfig) -> str:
    """Serialize ``cfg`` so that ``parse_config(emit_config(cfg)) == cfg``."""
    out = [f"grid.dim = {cfg.dim}", f"grid.n = {cfg.n}", f"model = {cfg.model}"]
    pot = cfg.potential
    out.append(f"potential.kind = {pot.kind}")
    if pot.kind == "constant" or pot.value != 0.0:
        out.append(f"potential.value = {pot.value!r}")
    for t in pot.terms:
        k = " ".join(str(v) for v in t.wavevector)
        out.append(f"potential.term = {t.amplitude!r}; {k}; {t.phase!r}")
    if pot.file is not None:
        out.append(f"potential.file = {pot.file}")
    for f in fields(SolverConfig):
        v = getattr(cfg.solver, f.name)
        if isinstance(v, bool):
            v = "true" if v else "false"
        elif isinstance(v, float):
            v = repr(v)
        out.append(f"solver.{f.name} = {v}")
    return "\n".join(out) + "\n"
