import json

import numpy as np
import pytest

from gglr import bench, netpbm, synthetic
from gglr.cli import main
from gglr.metrics import psnr, random_mask


@pytest.fixture
def corpus(tmp_path):
    d = tmp_path / "corpus"
    d.mkdir()
    for name in ("disc", "ramp", "two_plane", "wedge", "smooth"):
        netpbm.write_pgm(d / (name + ".pgm"), synthetic.GALLERY[name](24, 28))
    return d


# -- netpbm ------------------------------------------------------------------------

def test_pgm_round_trip(tmp_path):
    img = np.random.default_rng(0).integers(0, 256, (7, 9)) / 255.0
    netpbm.write_pgm(tmp_path / "a.pgm", img)
    np.testing.assert_array_equal(netpbm.read_pgm(tmp_path / "a.pgm"), img)
    assert (tmp_path / "a.pgm").read_bytes().startswith(b"P5\n9 7\n255\n")


def test_pgm_ascii_and_comments(tmp_path):
    (tmp_path / "b.pgm").write_bytes(b"P2\n# comment\n3 2\n# another\n4\n0 1 2\n3 4 0\n")
    np.testing.assert_array_equal(netpbm.read_pgm(tmp_path / "b.pgm"), np.array([[0, 1, 2], [3, 4, 0]]) / 4)


def test_pgm_16bit(tmp_path):
    px = np.array([[0, 1000], [65535, 7]], dtype=">u2")
    (tmp_path / "c.pgm").write_bytes(b"P5 2 2 65535\n" + px.tobytes())
    np.testing.assert_array_equal(netpbm.read_pgm(tmp_path / "c.pgm"), px.astype(float) / 65535)


@pytest.mark.parametrize("shape", [(5, 5), (3, 8), (4, 13), (1, 1)])
def test_pbm_round_trip(tmp_path, shape):
    mask = np.random.default_rng(1).random(shape) > 0.5
    netpbm.write_pbm(tmp_path / "m.pbm", mask)
    np.testing.assert_array_equal(netpbm.read_pbm(tmp_path / "m.pbm"), mask)


def test_pbm_bit_one_means_missing(tmp_path):
    (tmp_path / "m.pbm").write_bytes(b"P4\n3 1\n" + bytes([0b10100000]))
    np.testing.assert_array_equal(netpbm.read_pbm(tmp_path / "m.pbm"), [[False, True, False]])
    (tmp_path / "p1.pbm").write_bytes(b"P1\n3 1\n101\n")
    np.testing.assert_array_equal(netpbm.read_pbm(tmp_path / "p1.pbm"), [[False, True, False]])


@pytest.mark.parametrize("data", [b"", b"JUNK", b"P5\n3 3\n255\n\x00", b"P6\n1 1\n255\n\x00\x00\x00", b"P5\n0 3\n255\n"])
def test_malformed_files(tmp_path, data):
    (tmp_path / "x.pgm").write_bytes(data)
    with pytest.raises(netpbm.NetpbmError):
        netpbm.read_pgm(tmp_path / "x.pgm")


# -- CLI -------------------------------------------------------------------------------

def test_degrade_interpolate_eval(tmp_path, capsys):
    img = synthetic.two_plane(32, 32)
    netpbm.write_pgm(tmp_path / "img.pgm", img)
    assert main(["degrade", "--in", str(tmp_path / "img.pgm"), "--fraction", "0.7", "--seed", "3",
                 "--out-mask", str(tmp_path / "m.pbm"), "--out-img", str(tmp_path / "d.pgm")]) == 0
    mask = netpbm.read_pbm(tmp_path / "m.pbm")
    assert int((~mask).sum()) == round(0.7 * 1024)
    np.testing.assert_array_equal(mask, random_mask(32, 32, 0.7, 3))
    deg = netpbm.read_pgm(tmp_path / "d.pgm")
    assert np.all(deg[~mask] == 0)

    assert main(["interpolate", "--in", str(tmp_path / "d.pgm"), "--mask", str(tmp_path / "m.pbm"),
                 "--out", str(tmp_path / "r.pgm"), "--report", str(tmp_path / "r.json")]) == 0
    report = json.loads((tmp_path / "r.json").read_text())
    assert report["config"]["sigma"] == 0.68 and report["config"]["window"] == 5 and report["config"]["mu"] == 0.01
    assert report["outer_iterations"] >= 1

    capsys.readouterr()
    assert main(["eval", "--ref", str(tmp_path / "img.pgm"), "--test", str(tmp_path / "r.pgm"), "--json"]) == 0
    scores = json.loads(capsys.readouterr().out)
    ref = netpbm.read_pgm(tmp_path / "img.pgm")
    assert scores["psnr_db"] == pytest.approx(psnr(ref, netpbm.read_pgm(tmp_path / "r.pgm")))
    assert scores["psnr_db"] > psnr(ref, deg) + 5


def test_interpolate_glr_method(tmp_path):
    img = synthetic.disc(20, 20)
    mask = random_mask(20, 20, 0.5, 1)
    netpbm.write_pgm(tmp_path / "d.pgm", img * mask)
    netpbm.write_pbm(tmp_path / "m.pbm", mask)
    assert main(["interpolate", "--in", str(tmp_path / "d.pgm"), "--mask", str(tmp_path / "m.pbm"),
                 "--out", str(tmp_path / "r.pgm"), "--method", "glr", "--mu", "0.05"]) == 0


def test_eval_self_is_perfect(corpus, capsys):
    for p in sorted(corpus.iterdir()):
        capsys.readouterr()
        assert main(["eval", "--ref", str(p), "--test", str(p), "--json"]) == 0
        out = json.loads(capsys.readouterr().out)
        assert out["psnr_db"] == "inf" and out["ssim"] == pytest.approx(1.0)


def test_mu_select_command(tmp_path, capsys):
    img = synthetic.wedge(16, 16)
    mask = random_mask(16, 16, 0.5, 2)
    netpbm.write_pgm(tmp_path / "d.pgm", img * mask)
    netpbm.write_pbm(tmp_path / "m.pbm", mask)
    capsys.readouterr()
    assert main(["mu-select", "--lap-from", str(tmp_path / "d.pgm"), "--mask", str(tmp_path / "m.pbm"),
                 "--sigma-p", "0.05", "--sigma-o", "0.02", "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert 1e-6 <= out["mu"] <= 1e3 and out["sigma_p2"] == pytest.approx(0.0025)
    assert main(["mu-select", "--lap-from", str(tmp_path / "d.pgm"), "--mask", str(tmp_path / "m.pbm")]) == 0
    assert float(capsys.readouterr().out) > 0


def test_interpolate_auto_mu(tmp_path):
    img = synthetic.wedge(16, 16)
    mask = random_mask(16, 16, 0.5, 2)
    netpbm.write_pgm(tmp_path / "d.pgm", img * mask)
    netpbm.write_pbm(tmp_path / "m.pbm", mask)
    assert main(["interpolate", "--in", str(tmp_path / "d.pgm"), "--mask", str(tmp_path / "m.pbm"),
                 "--out", str(tmp_path / "r.pgm"), "--mu", "auto", "--report", str(tmp_path / "r.json")]) == 0
    assert json.loads((tmp_path / "r.json").read_text())["mu"] > 0


def test_env_override(tmp_path, monkeypatch):
    monkeypatch.setenv("GGLR_SIGMA", "0.5")
    img = synthetic.plane(12, 12)
    mask = random_mask(12, 12, 0.5, 0)
    netpbm.write_pgm(tmp_path / "d.pgm", img * mask)
    netpbm.write_pbm(tmp_path / "m.pbm", mask)
    args = ["interpolate", "--in", str(tmp_path / "d.pgm"), "--mask", str(tmp_path / "m.pbm"),
            "--out", str(tmp_path / "r.pgm"), "--report", str(tmp_path / "r.json")]
    assert main(args) == 0
    assert json.loads((tmp_path / "r.json").read_text())["config"]["sigma"] == 0.5
    assert main(args + ["--sigma", "0.9"]) == 0
    assert json.loads((tmp_path / "r.json").read_text())["config"]["sigma"] == 0.9


def test_errors_exit_nonzero(tmp_path, capsys):
    (tmp_path / "bad.pgm").write_bytes(b"nope")
    assert main(["eval", "--ref", str(tmp_path / "bad.pgm"), "--test", str(tmp_path / "bad.pgm")]) == 1
    assert "error" in capsys.readouterr().err
    assert main(["interpolate", "--in", "x.pgm"]) == 2
    assert main(["eval", "--ref", str(tmp_path / "missing.pgm"), "--test", str(tmp_path / "missing.pgm")]) == 1


def test_mask_shape_mismatch(tmp_path, capsys):
    netpbm.write_pgm(tmp_path / "d.pgm", np.zeros((5, 5)))
    netpbm.write_pbm(tmp_path / "m.pbm", np.ones((4, 5), bool))
    assert main(["interpolate", "--in", str(tmp_path / "d.pgm"), "--mask", str(tmp_path / "m.pbm"),
                 "--out", str(tmp_path / "r.pgm")]) == 1
    assert "mask" in capsys.readouterr().err


# -- bench ---------------------------------------------------------------------------------

def test_bench_defaults():
    parser_defaults = bench.DEFAULT_FRACTIONS
    assert parser_defaults == (0.90, 0.95, 0.98, 0.99)
    assert bench.METHODS == ("gglr2", "gglr4", "glr")


def test_bench_csv(corpus, tmp_path):
    out = tmp_path / "res.csv"
    assert main(["bench", "--dir", str(corpus), "--fractions", "0.5,0.9", "--methods", "gglr4,glr",
                 "--seed", "1", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "image,fraction,method,psnr_db,ssim,runtime_s"
    rows = [line.split(",") for line in lines[1:]]
    assert len(rows) == 5 * 2 * 2
    assert [r[0] for r in rows] == sorted(r[0] for r in rows)
    assert all(r[5] == "" for r in rows)
    for r in rows:
        assert -1 <= float(r[4]) <= 1


def test_bench_timing_column(corpus, tmp_path):
    recs = bench.run_bench(corpus, [0.5], ["gglr4"], seed=0)
    text = bench.records_to_csv(recs, timing=True)
    assert all(float(line.split(",")[5]) > 0 for line in text.splitlines()[1:])


def test_bench_workers_same_output(corpus):
    a = bench.records_to_csv(bench.run_bench(corpus, [0.9], ["gglr2", "glr"], seed=4))
    b = bench.records_to_csv(bench.run_bench(corpus, [0.9], ["gglr2", "glr"], seed=4, workers=2))
    assert a == b


def test_bench_same_mask_across_methods(corpus):
    s1 = bench.mask_seed(3, "disc", 0.9)
    assert s1 == bench.mask_seed(3, "disc", 0.9)
    assert s1 != bench.mask_seed(3, "disc", 0.95) and s1 != bench.mask_seed(4, "disc", 0.9)


def test_bench_bad_input(tmp_path):
    with pytest.raises(FileNotFoundError):
        bench.run_bench(tmp_path, [0.9], ["glr"])
    assert main(["bench", "--dir", str(tmp_path), "--methods", "tgv"]) != 0
