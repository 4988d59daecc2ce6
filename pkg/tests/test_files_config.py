import numpy as np
import pytest

from flist import files
from flist.config import RunConfig, dump_config, load_config, parse_config
from flist.forward import PhysParams
from flist.grids import ConfigurationError, Field, RealGrid
from flist.profiles import from_config, gaussian, sech
from flist.rh import JumpData, solve_columns
from flist.validation import ValidationReport


def test_field_roundtrip_is_exact(tmp_path, small_x):
    f = Field.from_values(small_x, (0.2 + 0.1j) * np.exp(-small_x.nodes**2))
    path = tmp_path / "u.csv"
    files.write_field(path, f, {"t": 0.5})
    back = files.read_field(path)
    assert np.array_equal(back.values, f.values)
    assert back.grid == f.grid
    assert files.read_meta(path)["t"] == "0.5"


def test_scattering_roundtrip_is_exact(tmp_path, data_small):
    path = tmp_path / "s.csv"
    files.write_scattering(path, data_small, PhysParams(), extra={"t": 0.0})
    data, params, meta = files.read_scattering(path)
    assert np.array_equal(data.r2.values, data_small.r2.values)
    assert np.array_equal(data.a.values, data_small.a.values)
    assert data.c == data_small.c and params == PhysParams()
    assert data.report["small_norm_value"] == data_small.report["small_norm_value"]
    assert float(meta["t"]) == 0.0


def test_wrong_header_is_a_schema_error(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x,u\n0,1\n")
    with pytest.raises(files.SchemaError, match="expected header"):
        files.read_field(path)


@pytest.mark.parametrize("body", ["0,1\n", "0,1,nan\n", "0,1,abc\n", ""])
def test_malformed_rows_are_schema_errors(tmp_path, body):
    path = tmp_path / "bad.csv"
    path.write_text(files.FIELD_HEADER + "\n" + body)
    with pytest.raises(files.SchemaError):
        files.read_field(path)


def test_missing_sidecar_is_a_schema_error(tmp_path, data_small):
    path = tmp_path / "s.csv"
    files.write_scattering(path, data_small, PhysParams())
    (tmp_path / "s.csv.meta").unlink()
    with pytest.raises(files.SchemaError, match="sidecar"):
        files.read_scattering(path)


def test_mismatched_z_column(tmp_path, data_small):
    path = tmp_path / "s.csv"
    files.write_scattering(path, data_small, PhysParams())
    meta = files.read_meta(path)
    meta["z_cut"] = "17"
    files.write_meta(path, meta)
    with pytest.raises(files.SchemaError, match="z column"):
        files.read_scattering(path)


def test_rh_dump_and_report(tmp_path, data_small):
    sol = solve_columns(JumpData(data_small.r1, data_small.r2, 0.0))
    files.write_rh_solution(tmp_path / "m.csv", sol)
    table = files.read_rh_table(tmp_path / "m.csv")
    assert table.shape == (data_small.grid.n, 9)
    rep = ValidationReport()
    rep.add("a", 0.5, 1.0)
    files.write_report(tmp_path / "r.csv", rep)
    assert files.read_report(tmp_path / "r.csv") == {"a": (0.5, 1.0, True)}


def test_config_parse_and_dump_roundtrip():
    cfg = parse_config("alpha = 2\n# comment\ntimes = 0, 0.5 1\ntaper=off\nn_x=256  # inline\n")
    assert cfg.alpha == 2.0 and cfg.times == (0.0, 0.5, 1.0) and cfg.taper is False and cfg.n_x == 256
    assert parse_config(dump_config(cfg)) == cfg


@pytest.mark.parametrize("text,match", [
    ("gamma=1", "unknown key"),
    ("n_x=1000", "power of two"),
    ("alpha", "key=value"),
    ("alpha=fast", "bad value"),
    ("times=1 0", "ascending"),
    ("profile=box", "profile"),
    ("profile=from-file", "path"),
    ("alpha=-1", "positive"),
])
def test_config_errors(text, match):
    with pytest.raises(ConfigurationError, match=match):
        parse_config(text)


def test_load_config_and_overrides(tmp_path):
    p = tmp_path / "run.cfg"
    p.write_text("amplitude=0.1\n")
    cfg = load_config(p)
    assert cfg.amplitude == 0.1
    assert cfg.with_overrides(z_cut=16.0, n_z=256).spectral_grid().n == 256


def test_profiles(tmp_path):
    g = RealGrid(-20, 20, 256)
    assert gaussian(g, 0.3).values.max() == pytest.approx(0.3, rel=1e-2)
    with pytest.warns(UserWarning, match="does not decay"):
        peak = sech(g, 0.3, center=1.0).values[g.index_of(1.0)]
    assert peak == pytest.approx(0.3, rel=1e-2)
    path = tmp_path / "u.csv"
    files.write_field(path, gaussian(g, 0.2))
    cfg = RunConfig(profile="from-file", path=str(path), x_min=-20, x_max=20, n_x=256)
    assert np.array_equal(from_config(cfg).values, gaussian(g, 0.2).values)
    with pytest.raises(ValueError, match="grid differs"):
        from_config(cfg.with_overrides(n_x=512))
