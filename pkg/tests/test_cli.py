import csv
import io
import json
import subprocess
import sys

import pytest

from elasticnp.cli import DEFAULTS, ConfigError, build_parser, load_config, main


def _run(tmp_path, *argv):
    return main(list(argv) + ["--out-dir", str(tmp_path)])


def test_sphere_exact_json(tmp_path):
    assert _run(tmp_path, "sphere-exact", "--kmax", "3") == 0
    data = json.loads((tmp_path / "sphere_exact.json").read_text())
    assert data["provenance"]["command"] == "sphere-exact"
    assert "code_version" in data["provenance"]


def test_spectrum_outputs_and_determinism(tmp_path):
    argv = ["spectrum", "--geometry", "sphere", "--n-polar", "8"]
    assert _run(tmp_path / "a", *argv) == 0
    assert _run(tmp_path / "b", *argv) == 0
    for name in ("spectrum.csv",):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
    text = (tmp_path / "a" / "spectrum.csv").read_text()
    rows = list(csv.reader(io.StringIO("\n".join(l for l in text.splitlines()
                                                 if not l.startswith("#")))))
    assert rows[0] == ["index", "eigenvalue", "cluster", "residual", "nearest_exact"]
    assert {r[2] for r in rows[1:]} <= {"-k0", "0", "+k0", "outlier"}


@pytest.mark.parametrize("argv", [
    ["spectrum", "--geometry", "circle", "--N", "7"],
    ["spectrum", "--geometry", "sphere", "--n-polar", "30"],
    ["spectrum", "--geometry", "blob"],
    ["spectrum", "--mu", "-1"],
    ["spectrum", "--tol", "0"],
    ["dilate2d", "--geometry", "sphere"],
    ["dilate2d", "--geometry", "kite", "--radii", "4,-1"],
    ["spectrum", "--shape-params", "a,b"],
])
def test_config_errors_exit_2(tmp_path, argv, capsys):
    assert _run(tmp_path, *argv) == 2
    assert "config error" in capsys.readouterr().err


def test_unknown_command_is_usage_error(tmp_path):
    assert main(["transmogrify"]) == 2


def test_numerical_failure_exit_3(tmp_path, capsys):
    assert _run(tmp_path, "bvp", "--geometry", "kite", "--N", "64") == 3
    assert "positive definite" in capsys.readouterr().err


def test_config_file_with_flag_override(tmp_path):
    cfg_file = tmp_path / "c.json"
    cfg_file.write_text(json.dumps({"geometry": {"kind": "ellipse", "params": [2, 1], "N": 64},
                                    "material": {"lambda": 2.0, "mu": 1.0}}))
    args = build_parser().parse_args(["spectrum", "--config", str(cfg_file), "--mu", "3"])
    cfg = load_config(args)
    assert cfg["geometry"]["kind"] == "ellipse" and cfg["geometry"]["N"] == 64
    assert cfg["material"] == {"lambda": 2.0, "mu": 3.0}
    assert DEFAULTS["material"]["mu"] == 1.0            # defaults untouched


def test_bad_config_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ConfigError) as e:
        load_config(build_parser().parse_args(["spectrum", "--config", str(bad)]))
    assert e.value.field == "config"


def test_verify_planar(tmp_path):
    assert _run(tmp_path, "verify", "--geometry", "ellipse", "--shape-params", "2,1",
                "--N", "256") == 0
    data = json.loads((tmp_path / "verify.json").read_text())
    assert data["all_pass"] is True
    assert all(c["value"] <= c["tol"] for c in data["checks"])


def test_dilate2d_and_decompose(tmp_path):
    assert _run(tmp_path, "dilate2d", "--geometry", "kite", "--N", "64", "--radii", "1,16") == 0
    rows = [l for l in (tmp_path / "dilation.csv").read_text().splitlines() if not l.startswith("#")]
    assert rows[0] == "r,spd,min_eig,mean_mode_min_eig"
    assert [r.split(",")[1] for r in rows[1:]] == ["false", "true"]
    assert _run(tmp_path, "decompose", "--geometry", "circle", "--N", "64",
                "--field", "gradient") == 0
    assert (tmp_path / "decomposition.csv").exists()


def test_module_entry_point(tmp_path):
    r = subprocess.run([sys.executable, "-m", "elasticnp", "sphere-exact", "--kmax", "1",
                        "--out-dir", str(tmp_path)], capture_output=True, text=True)
    assert r.returncode == 0 and "ok" in r.stdout
