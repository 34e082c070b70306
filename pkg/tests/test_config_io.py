import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from torusmfg.config import ConfigError, CosineTerm, PotentialSpec, RunConfig, emit_config, parse_config
from torusmfg.grid import GridSpec
from torusmfg.io import format_field, read_field, write_field
from torusmfg.solver import SolverConfig

MINIMAL = """\
grid.dim = 1
grid.n = 32
potential.kind = constant
potential.value = 0
model = quadratic
"""


def test_minimal_config_defaults():
    cfg = parse_config(MINIMAL)
    assert cfg.dim == 1 and cfg.n == 32 and cfg.model == "quadratic"
    assert cfg.solver == SolverConfig()
    assert cfg.solver.eps0 == 1.0
    prob = cfg.problem()
    np.testing.assert_array_equal(prob.V, 0.0)


def test_comments_and_blank_lines():
    cfg = parse_config("# header\n\n" + MINIMAL + "solver.gamma = 0.5  # slower decay\n")
    assert cfg.solver.gamma == 0.5


@pytest.mark.parametrize(
    "line,message",
    [
        ("solver.gamma = 1.5", r"gamma must lie in \(0,1\)"),
        ("solver.colour = red", "unknown key"),
        ("potential.kind = gaussian", "potential.kind must be one of"),
        ("grid.dim = 4", "grid.dim must be"),
        ("solver.eps0 = nan", "finite"),
        ("solver.max_inner_iters = 1.5", "integer"),
        ("just words", "expected 'key = value'"),
        ("model = cubic", "unknown model"),
    ],
)
def test_invalid_lines_report_line_number(line, message):
    with pytest.raises(ConfigError, match=message) as exc:
        parse_config("# run\ngrid.n = 32\n" + line + "\n")
    assert exc.value.line == 3


def test_duplicate_key_rejected():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config(MINIMAL + "grid.n = 16\n")


def test_cosine_potential():
    cfg = parse_config(
        "grid.dim = 2\ngrid.n = 8\npotential.kind = cosine\n"
        "potential.term = 0.1; 1 0; 0\npotential.term = -0.2; 0, 2; 0.5\n"
    )
    g = cfg.grid
    x = g.coordinates()
    expected = 0.1 * np.cos(2 * np.pi * x[0]) - 0.2 * np.cos(2 * np.pi * 2 * x[1] + 0.5)
    np.testing.assert_allclose(cfg.problem().V, expected, atol=1e-15)


def test_non_integer_wavevector_rejected():
    with pytest.raises(ConfigError, match="integers") as exc:
        parse_config("grid.dim = 1\npotential.kind = cosine\npotential.term = 0.1; 1.5; 0\n")
    assert exc.value.line == 3


def test_wavevector_dimension_mismatch():
    with pytest.raises(ConfigError, match="grid.dim"):
        parse_config("grid.dim = 2\npotential.kind = cosine\npotential.term = 0.1; 1; 0\n")


def test_missing_grid_file(tmp_path):
    with pytest.raises(ConfigError, match="not found") as exc:
        parse_config("grid.n = 4\npotential.kind = file\npotential.file = nope.csv\n", base_dir=tmp_path)
    assert exc.value.line == 3


def test_file_potential(tmp_path):
    g = GridSpec(2, 4)
    V = np.arange(16.0).reshape(4, 4) / 7
    write_field(tmp_path / "V.csv", V, g)
    cfg = parse_config("grid.dim = 2\ngrid.n = 4\npotential.kind = file\npotential.file = V.csv\n", base_dir=tmp_path)
    np.testing.assert_array_equal(cfg.problem().V, V)
    with pytest.raises(ConfigError, match="potential file"):
        parse_config("grid.dim = 2\ngrid.n = 8\npotential.kind = file\npotential.file = V.csv\n", base_dir=tmp_path)


def test_round_trip_defaults():
    cfg = parse_config(MINIMAL)
    assert parse_config(emit_config(cfg)) == cfg


@settings(max_examples=60)
@given(
    dim=st.integers(1, 3),
    n=st.integers(2, 64),
    gamma=st.floats(0.01, 0.99),
    eps0=st.floats(1e-3, 10),
    amps=st.lists(st.floats(-5, 5), min_size=1, max_size=3),
    phase=st.floats(-3, 3),
    seed=st.integers(0, 2**31),
    limit=st.booleans(),
    policy=st.sampled_from(["adaptive", "fixed"]),
)
def test_round_trip(dim, n, gamma, eps0, amps, phase, seed, limit, policy):
    terms = [CosineTerm(a, tuple(range(1, dim + 1)), phase) for a in amps]
    cfg = RunConfig(
        dim=dim,
        n=n,
        potential=PotentialSpec(kind="cosine", terms=terms),
        solver=SolverConfig(eps0=eps0, gamma=gamma, eps_min=eps0 * 1e-6, seed=seed, limit_stage=limit, step_policy=policy),
    )
    assert parse_config(emit_config(cfg)) == cfg


def test_field_csv_format():
    g = GridSpec(2, 2)
    text = format_field(np.array([[1.0, 2.0], [3.0, 0.1]]), g)
    assert text.splitlines() == ["x1,x2,value", "0,0,1", "0,0.5,2", "0.5,0,3", "0.5,0.5,0.10000000000000001"]


@pytest.mark.parametrize("dim,n", [(1, 7), (2, 5), (3, 3)])
def test_field_round_trip_bit_exact(dim, n, rng, tmp_path):
    g = GridSpec(dim, n)
    f = rng.normal(size=g.shape) * 10.0 ** rng.integers(-8, 8, size=g.shape)
    write_field(tmp_path / "f.csv", f, g)
    back = read_field(tmp_path / "f.csv", g)
    assert np.array_equal(back, f)
    write_field(tmp_path / "g.csv", back, g)
    assert (tmp_path / "f.csv").read_bytes() == (tmp_path / "g.csv").read_bytes()


def test_read_field_rejects_wrong_grid(tmp_path):
    g = GridSpec(1, 4)
    write_field(tmp_path / "f.csv", np.ones(4), g)
    with pytest.raises(ValueError):
        read_field(tmp_path / "f.csv", GridSpec(1, 5))
    with pytest.raises(ValueError, match="header"):
        read_field(tmp_path / "f.csv", GridSpec(2, 2))
