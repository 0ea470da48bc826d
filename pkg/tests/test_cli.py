import csv
import json
import math

import numpy as np
import pytest
from click.testing import CliRunner

from sfmask.cli import main
from sfmask.image import Image
from sfmask.imio import load_image, save_image
from sfmask.mask import MaskSpec
from sfmask.sfm import apply_sfm
from sfmask.transform import dct2_forward

from test_pipeline import CONFIG, tree_hashes, write_images


@pytest.fixture
def runner():
    return CliRunner()


def read_csv(path):
    with open(path, newline="") as f:
        return list(csv.DictReader(f))


def test_dct_dump(runner, tmp_path):
    data = np.arange(12.0).reshape(3, 4)
    save_image(Image(data, "byte"), tmp_path / "a.pgm", "pgm")
    res = runner.invoke(main, ["dct", "--in", str(tmp_path / "a.pgm"), "--out", str(tmp_path / "c.csv")])
    assert res.exit_code == 0, res.output
    rows = read_csv(tmp_path / "c.csv")
    assert len(rows) == 12
    coeffs = dct2_forward(Image(data, "byte")).coeffs
    for r in rows:
        assert float(r["value"]) == coeffs[int(r["row"]), int(r["col"]), int(r["channel"])]


def test_mask_stats_central(runner, tmp_path):
    out = tmp_path / "m.csv"
    res = runner.invoke(main, ["mask-stats", "--mode", "central", "--dims", "64x64", "--n", "20000",
                               "--seed", "1", "--out", str(out)])
    assert res.exit_code == 0, res.output
    rows = read_csv(out)
    assert len(rows) == 20
    assert max(abs(float(r["empirical"]) - float(r["expected"])) for r in rows) < 0.03


def test_mask_stats_targeted(runner, tmp_path):
    out = tmp_path / "m.csv"
    res = runner.invoke(main, ["mask-stats", "--mode", "targeted", "--dims", "32x48", "--n", "5000",
                               "--seed", "1", "--out", str(out)])
    assert res.exit_code == 0, res.output
    p = [float(r["empirical"]) for r in read_csv(out)]
    assert p.index(max(p)) in (16, 17)


def test_mask_stats_bad_dims(runner, tmp_path):
    res = runner.invoke(main, ["mask-stats", "--dims", "64by64", "--seed", "1", "--out", str(tmp_path / "m.csv")])
    assert res.exit_code == 2


def test_sfm_command_writes_sidecars(runner, tmp_path):
    write_images(tmp_path / "in", 3)
    res = runner.invoke(main, ["sfm", "--in", str(tmp_path / "in"), "--mode", "targeted", "--rate", "1",
                               "--seed", "5", "--format", "npy", "--out", str(tmp_path / "out")])
    assert res.exit_code == 0, res.output
    for i in range(3):
        side = json.loads((tmp_path / "out" / f"img{i:04d}.json").read_text())
        assert side["applied"] and side["mask_spec"]["mode"] == "targeted"
        src = load_image(tmp_path / "in" / f"img{i:04d}.png")
        expected, _ = apply_sfm(src, MaskSpec.from_dict(side["mask_spec"]))
        out = load_image(tmp_path / "out" / f"img{i:04d}.npy")
        np.testing.assert_allclose(out.data, expected.data, atol=1e-12)


def test_sfm_single_file_and_bad_option(runner, tmp_path):
    write_images(tmp_path / "in", 1)
    src = str(tmp_path / "in" / "img0000.png")
    res = runner.invoke(main, ["sfm", "--in", src, "--seed", "1", "--out", str(tmp_path / "o")])
    assert res.exit_code == 0 and (tmp_path / "o" / "img0000.png").exists()
    res = runner.invoke(main, ["sfm", "--in", src, "--rc", "0.5", "--seed", "1", "--out", str(tmp_path / "o")])
    assert res.exit_code == 2


def test_degrade_command(runner, tmp_path):
    write_images(tmp_path / "in", 2, shape=(40, 36, 3))
    res = runner.invoke(main, ["degrade", "--in", str(tmp_path / "in"), "--kernel", "gaussian:2.3", "--scale", "4",
                               "--noise", "awgn-blind:0,55", "--seed", "3", "--out", str(tmp_path / "out")])
    assert res.exit_code == 0, res.output
    assert load_image(tmp_path / "out" / "img0001.png").dims == (10, 9)
    res = runner.invoke(main, ["degrade", "--in", str(tmp_path / "in"), "--noise", "pink", "--seed", "3",
                               "--out", str(tmp_path / "out")])
    assert res.exit_code == 2


def test_psd_command(runner, tmp_path):
    rng = np.random.default_rng(0)
    (tmp_path / "in").mkdir()
    for i in range(4):
        np.save(tmp_path / "in" / f"n{i}.npy", rng.standard_normal((64, 64)))
    res = runner.invoke(main, ["psd", "--in", str(tmp_path / "in"), "--bins", "16", "--fit", "0.05", "0.9",
                               "--out", str(tmp_path / "p.csv")])
    assert res.exit_code == 0, res.output
    assert "alpha=" in res.output
    vals = [float(r["psd"]) for r in read_csv(tmp_path / "p.csv")]
    assert len(vals) == 16 and 0.7 < np.mean(vals) < 1.3


def test_snr_command(runner, tmp_path):
    res = runner.invoke(main, ["snr", "--alpha", "2", "--sigma2", "3", "--sigma2", "10", "--out", str(tmp_path / "s.csv")])
    assert res.exit_code == 0, res.output
    rows = read_csv(tmp_path / "s.csv")
    ratio = [float(r["snr_sigma2_3"]) / float(r["snr_sigma2_10"]) for r in rows]
    assert all(math.isclose(x, 10 / 3) for x in ratio)


def test_pipeline_run_and_verify(runner, tmp_path):
    write_images(tmp_path / "in", 6, shape=(32, 32, 3))
    cfg = tmp_path / "c.toml"
    cfg.write_text(CONFIG.format(inp=tmp_path / "in", out=tmp_path / "unused"))
    outs = []
    for workers in ("1", "2"):
        out = tmp_path / f"out{workers}"
        res = runner.invoke(main, ["pipeline", "run", "--config", str(cfg), "--out", str(out), "--workers", workers])
        assert res.exit_code == 0, res.output
        outs.append(out)
    assert tree_hashes(outs[0]) == tree_hashes(outs[1])
    res = runner.invoke(main, ["pipeline", "verify", "--manifest", str(outs[0] / "manifest.json")])
    assert res.exit_code == 0 and "verify: OK" in res.output


def test_pipeline_exit_codes(runner, tmp_path):
    write_images(tmp_path / "in", 2, shape=(32, 32, 3))
    cfg = tmp_path / "c.toml"
    cfg.write_text(CONFIG.format(inp=tmp_path / "in", out=tmp_path / "out").replace("seed = 42", ""))
    res = runner.invoke(main, ["pipeline", "run", "--config", str(cfg)])
    assert res.exit_code == 2
    res = runner.invoke(main, ["pipeline", "run", "--config", str(cfg), "--seed", "9"])
    assert res.exit_code == 0, res.output
    (tmp_path / "in" / "zz.png").write_bytes(b"broken")
    res = runner.invoke(main, ["pipeline", "run", "--config", str(cfg), "--seed", "9"])
    assert res.exit_code == 1
    res = runner.invoke(main, ["pipeline", "run", "--config", str(tmp_path / "missing.toml"), "--seed", "9"])
    assert res.exit_code == 2
