import csv

import numpy as np
import pytest

from tubal.cli import main
from tubal.io import read_msk, read_t3b, write_t3b
from tubal.metrics import rse
from tubal.talgebra import t_product


@pytest.fixture
def volume(tmp_path):
    path = tmp_path / "vol.t3b"
    assert main(["synth", "--dims", "24,24,64", "--rank", "2", "--seed", "0", "--out", str(path)]) == 0
    return path


def test_synth(volume, capsys):
    vol, dt = read_t3b(volume)
    assert vol.shape == (24, 24, 64) and dt == 0.001


def test_sample_and_complete(tmp_path, volume, capsys):
    obs = tmp_path / "obs.t3b"
    msk = tmp_path / "obs.msk"
    assert main(["sample", "--in", str(volume), "--rate", "0.8", "--seed", "3",
                 "--out-mask", str(msk), "--out", str(obs)]) == 0
    mask, k = read_msk(msk)
    assert mask.count == 461 and k == 64
    rec = tmp_path / "rec.t3b"
    rep = tmp_path / "rep.csv"
    code = main(["complete", "--algo", "altmin", "--in", str(obs), "--mask", str(msk), "--rank", "2",
                 "--tol", "1e-8", "--max-iters", "100", "--truth", str(volume), "--out", str(rec),
                 "--report", str(rep)])
    assert code == 0
    assert rse(read_t3b(rec)[0], read_t3b(volume)[0]) < 1e-6
    with open(rep) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["iter", "objective_rse", "truth_rse", "elapsed_s"]
    assert len(rows) > 1
    capsys.readouterr()
    assert main(["rse", "--a", str(rec), "--b", str(volume)]) == 0
    assert float(capsys.readouterr().out) < 1e-6


def test_complete_tnn_and_max_iters(tmp_path, volume):
    obs, msk = tmp_path / "obs.t3b", tmp_path / "obs.msk"
    main(["sample", "--in", str(volume), "--rate", "0.5", "--seed", "1", "--out-mask", str(msk), "--out", str(obs)])
    code = main(["complete", "--algo", "tnn", "--in", str(obs), "--mask", str(msk), "--max-iters", "2",
                 "--out", str(tmp_path / "rec.t3b")])
    assert code == 4


def test_tsvd(tmp_path, volume, capsys):
    cdf = tmp_path / "cdf.csv"
    assert main(["tsvd", "--in", str(volume), "--cdf", str(cdf)]) == 0
    out = capsys.readouterr().out
    assert "tubal_rank 2" in out
    with open(cdf) as fh:
        rows = list(csv.reader(fh))
    assert rows[0] == ["tube_index", "norm", "cum_fraction"] and len(rows) == 25
    assert float(rows[-1][2]) == 1.0


def test_bench_deterministic(tmp_path, volume):
    outs = []
    for name in ("a.csv", "b.csv"):
        path = tmp_path / name
        assert main(["bench", "--in", str(volume), "--rates", "0.5,1.0", "--trials", "2",
                     "--algos", "altmin", "--rank", "2", "--seed", "7", "--out", str(path), "--aggregate"]) == 0
        with open(path) as fh:
            rows = list(csv.DictReader(fh))
        for row in rows:
            row.pop("wall_time_s")
        outs.append(rows)
    assert outs[0] == outs[1]
    assert len(outs[0]) == 4 + 2


def test_usage_errors(tmp_path, volume, capsys):
    assert main(["sample", "--in", str(volume), "--rate", "1.5", "--seed", "0",
                 "--out-mask", str(tmp_path / "m"), "--out", str(tmp_path / "o")]) == 2
    assert main(["sample", "--in", str(volume), "--rate", "0.5", "--seed", "0",
                 "--out-mask", str(tmp_path / "m"), "--out", str(volume)]) == 2
    assert main(["bench", "--in", str(volume), "--algos", "foo", "--seed", "0", "--out", str(tmp_path / "x")]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--dims", "1,2", "--out", str(tmp_path / "x")])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2


def test_complete_needs_rank(tmp_path, volume):
    msk = tmp_path / "m.msk"
    obs = tmp_path / "o.t3b"
    main(["sample", "--in", str(volume), "--rate", "0.5", "--seed", "0", "--out-mask", str(msk), "--out", str(obs)])
    assert main(["complete", "--in", str(obs), "--mask", str(msk), "--out", str(tmp_path / "r.t3b")]) == 2


def test_io_errors(tmp_path, capsys):
    bad = tmp_path / "bad.t3b"
    bad.write_bytes(b"nope")
    assert main(["tsvd", "--in", str(bad)]) == 3
    assert main(["tsvd", "--in", str(tmp_path / "missing.t3b")]) == 3
    assert "I/O error" in capsys.readouterr().err


def test_rse_dim_mismatch(tmp_path):
    write_t3b(tmp_path / "a", np.ones((2, 2, 2)))
    write_t3b(tmp_path / "b", np.ones((2, 2, 3)))
    assert main(["rse", "--a", str(tmp_path / "a"), "--b", str(tmp_path / "b")]) == 2
