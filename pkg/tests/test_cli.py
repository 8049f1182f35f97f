import json
import math

import numpy as np
import pytest

from atomloc.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, EXIT_VERIFY, main
from atomloc.config import RunConfig, env_overrides, load_config, read_ini
from atomloc.errors import InvalidConfig
from atomloc.output import read_csv
from atomloc.presets import PRESETS

SMALL = ["--grid", "128", "--contour-grid", "64", "--delta-points", "5"]


def run(tmp_path, *args):
    return main([*args, "--out", str(tmp_path)])


def test_config_round_trip(tmp_path):
    cfg = RunConfig(omega1=12.5, phi=0.3, deltas=(1.0, -2.5), grid=256, format="json",
                    seed=7, samples=200, preset="fig4")
    path = tmp_path / "run.ini"
    path.write_text(cfg.to_ini())
    assert load_config(path, environ={}) == cfg


def test_precedence_cli_over_env_over_file(tmp_path):
    path = tmp_path / "run.ini"
    path.write_text("[model]\nomega1 = 11  # comment\nomega2 = 12\n[scan]\ndeltas = 1, 2\n")
    env = {"ATOMLOC_MODEL_OMEGA2": "13", "ATOMLOC_MODEL_OMEGA3": "14"}
    cfg = load_config(path, {"omega3": 15.0, "grid": None}, environ=env)
    assert (cfg.omega1, cfg.omega2, cfg.omega3) == (11.0, 13.0, 15.0)
    assert cfg.deltas == (1.0, 2.0) and cfg.grid == 4001
    assert env_overrides({"ATOMLOC_OUTPUT_DIR": "x"}) == {"out": "x"}


@pytest.mark.parametrize("text", ["[model]\nomega9 = 1\n", "[model]\nomega1 = abc\n",
                                  "omega1 = 1\n"])
def test_bad_config_files(tmp_path, text):
    path = tmp_path / "bad.ini"
    path.write_text(text)
    with pytest.raises(InvalidConfig):
        load_config(path, environ={})
    assert main(["roots", "--config", str(path), "--out", str(tmp_path)]) == EXIT_CONFIG


def test_config_validation():
    for bad in ({"grid": 10}, {"samples": 10}, {"format": "xml"}, {"omega1": -1.0},
                {"delta_min": 5.0, "delta_max": 1.0}, {"deltas": (math.nan,)}):
        with pytest.raises(InvalidConfig):
            RunConfig(**bad).validate()
    with pytest.raises(InvalidConfig):
        read_ini("[model\n")


def test_chi_scan_needs_detuning(tmp_path, capsys):
    assert run(tmp_path, "chi-scan", *SMALL) == EXIT_CONFIG
    assert "detuning" in capsys.readouterr().err


def test_verify_sample_floor(tmp_path):
    assert run(tmp_path, "verify", "--samples", "10") == EXIT_CONFIG


def test_io_error_exit_code(tmp_path, capsys):
    blocker = tmp_path / "file"
    blocker.write_text("x")
    assert main(["roots", "--grid", "64", "--out", str(blocker / "sub")]) == EXIT_IO
    assert str(blocker) in capsys.readouterr().err


def test_chi_scan_files_and_determinism(tmp_path):
    a = tmp_path / "a"
    args = ("chi-scan", "--delta", "5", "--delta", "0", *SMALL)
    assert run(a, *args) == EXIT_OK
    names = sorted(p.name for p in a.iterdir())
    assert names == ["chi2d_scan.csv", "chi_scan.meta.json", "chi_scan_delta-0.csv",
                     "chi_scan_delta-5.csv"]
    first = {n: (a / n).read_bytes() for n in names}
    # the sidecar records the output directory, so rerun into the same one
    assert run(a, *args) == EXIT_OK
    assert {n: (a / n).read_bytes() for n in names} == first
    cols, data, meta = read_csv(a / "chi_scan_delta-0.csv")
    assert cols == ["kx", "chi_im", "chi_re"] and data.shape == (128, 3)
    assert "units" in meta
    cols, data, _ = read_csv(a / "chi2d_scan.csv")
    assert cols == ["delta", "kx", "chi_im"] and data.shape == (5 * 64, 3)


def test_nan_markers_and_sidecar(tmp_path):
    args = ["--omega1", "0", "--omega2", "0", "--omega3", "0", "--delta", "0", *SMALL]
    assert run(tmp_path, "chi-scan", *args) == EXIT_OK
    text = (tmp_path / "chi_scan_delta-0.csv").read_text()
    assert "NaN" in text
    side = json.loads((tmp_path / "chi_scan.meta.json").read_text())
    assert side["files"]["chi_scan_delta-0.csv"]["nan_count"] == 2 * 128
    assert side["files"]["chi2d_scan.csv"]["nan_count"] == 64
    assert run(tmp_path / "j", "chi-scan", *args, "--format", "json") == EXIT_OK
    doc = json.loads((tmp_path / "j" / "chi_scan.json").read_text())
    assert doc["metadata"]["tool"] == "atomloc"
    tab = doc["tables"][0]
    assert tab["data"]["chi_im"][0] is None and tab["nan_count"] == 2 * 128


def test_fig3_phi0_delta0_peaks_at_nodes(tmp_path):
    assert run(tmp_path, "chi-scan", "--preset", "fig3", "--delta", "0", *SMALL) == EXIT_OK
    _, data, _ = read_csv(tmp_path / "chi_fig3_phi-0_g2-0_delta-0.csv")
    kx, im = data[:, 0], data[:, 1]
    top = kx[np.isclose(im, im.max(), rtol=1e-12)]
    assert set(np.round(np.abs(top), 12)) <= {0.0, round(math.pi, 12)}


def test_preset_headers_match_parameters(tmp_path):
    assert run(tmp_path, "roots", "--preset", "fig6", "--grid", "64") == EXIT_OK
    side = json.loads((tmp_path / "roots.meta.json").read_text())
    assert side["preset"] == PRESETS["fig6"].header()
    assert side["preset"]["omega1"] == 20 and side["preset"]["omega3"] == 25
    assert "omega1" not in side["config"]
    fig3 = PRESETS["fig3"]
    assert (fig3.omega1, fig3.omega2, fig3.omega3, fig3.gamma1) == (30, 20, 20, 1)
    assert fig3.gamma2_list == (0, 1, 10) and PRESETS["fig5"].gamma2_list == (10, 1e3, 1e4)
    assert PRESETS["fig4"].omega3 == 10
    assert fig3.deltas[0.0] == (0, 5, 13) and fig3.deltas[math.pi / 2] == (0, 12, 16)


def test_roots_column_identities(tmp_path):
    assert run(tmp_path, "roots", "--preset", "fig3", "--grid", "256") == EXIT_OK
    cols, d, _ = read_csv(tmp_path / "roots_fig3_phi-0.csv")
    c = {n: d[:, i] for i, n in enumerate(cols)}
    assert np.allclose(c["delta3"], c["delta1"], atol=1e-10)
    assert np.max(np.abs(c["delta3"] + c["delta4"] + c["delta5"])) < 1e-9
    cols, d, _ = read_csv(tmp_path / "roots_fig3_phi-pi_2.csv")
    assert np.max(np.abs(d[:, cols.index("delta3")])) < 1e-12
    _, m, _ = read_csv(tmp_path / "markers_fig3_phi-pi_2.csv")
    assert m[:, 0].tolist() == [0, 12, 16]


def test_dressed_matches_roots(tmp_path):
    assert run(tmp_path, "roots", "--preset", "fig6", "--grid", "256") == EXIT_OK
    assert run(tmp_path, "dressed", "--preset", "fig6", "--grid", "256") == EXIT_OK
    for tag in ("0", "pi_2", "pi"):
        rc, rd, _ = read_csv(tmp_path / f"roots_fig6_phi-{tag}.csv")
        dc, dd, _ = read_csv(tmp_path / f"dressed_fig6_phi-{tag}_g2-1.csv")
        for b in (3, 4, 5):
            assert np.max(np.abs(rd[:, rc.index(f"delta{b}")] - dd[:, dc.index(f"lambda{b}")])) < 1e-10
    dc, dd, _ = read_csv(tmp_path / "dressed_fig6_phi-0_g2-1.csv")
    i = int(np.argmin(np.abs(dd[:, 0] - math.pi / 2)))
    assert dd[i, dc.index("gamma3")] < dd[i, dc.index("gamma4")]
    # node column: energies 0 and +-half the drive norm
    j = int(np.argmin(np.abs(dd[:, 0])))
    assert dd[j, 0] == 0.0
    half = 0.5 * math.hypot(22, 25)
    assert np.allclose(sorted(dd[j, 1:4]), [-half, 0, half], atol=1e-10)


def test_dressed_delta3_decay_constant_in_gamma2(tmp_path):
    assert run(tmp_path, "dressed", "--preset", "fig3", "--grid", "128") == EXIT_OK
    cols = None
    g3 = []
    for g2 in ("0", "1", "10"):
        cols, d, _ = read_csv(tmp_path / f"dressed_fig3_phi-0_g2-{g2}.csv")
        g3.append(d[:, cols.index("gamma3")])
    assert np.allclose(g3[0], g3[1], atol=1e-10) and np.allclose(g3[0], g3[2], atol=1e-10)


def test_preset_command_writes_everything(tmp_path):
    assert run(tmp_path, "preset", "fig6", *SMALL) == EXIT_OK
    for stem in ("chi_scan", "roots", "dressed"):
        assert (tmp_path / f"{stem}.meta.json").exists()
    assert (tmp_path / "chi2d_fig6_phi-0_g2-1.csv").exists()


def test_verify_and_corrupt_hook(tmp_path, capsys):
    assert run(tmp_path / "ok", "verify", "--samples", "100", "--seed", "3") == EXIT_OK
    assert "FAIL" not in (tmp_path / "ok" / "verify_report.txt").read_text()
    code = run(tmp_path / "bad", "verify", "--samples", "100", "--seed", "3",
               "--corrupt-a-sign", "--format", "json")
    assert code == EXIT_VERIFY
    report = (tmp_path / "bad" / "verify_report.txt").read_text()
    assert any(line.startswith("factored-form") and "FAIL" in line
               for line in report.splitlines())
    doc = json.loads((tmp_path / "bad" / "verify_report.json").read_text())
    assert 0.0 in doc["tables"][0]["data"]["passed"]
    capsys.readouterr()
