import json

import numpy as np
import pytest

from ldpclab import bp, cli, codes, tanner
from ldpclab.bp import WeightSet


@pytest.fixture(scope="module")
def reg64_alist(tmp_path_factory):
    path = tmp_path_factory.mktemp("data") / "reg64.alist"
    path.write_text(tanner.to_alist(codes.reg64_3_6()))
    return str(path)


@pytest.fixture(scope="module")
def toy_alist(tmp_path_factory):
    h = np.array([[1, 1, 0, 1], [0, 1, 1, 1]], dtype=np.uint8)
    path = tmp_path_factory.mktemp("data") / "toy.alist"
    path.write_text(tanner.to_alist(tanner.from_matrix(h)))
    return str(path)


def test_graph_info(reg64_alist, capsys):
    assert cli.main(["graph-info", "--alist", reg64_alist]) == 0
    out = capsys.readouterr().out
    assert "64,32,192,6," in out


def test_as_enum_with_verify(toy_alist, tmp_path, capsys):
    dump = tmp_path / "sets.txt"
    rc = cli.main(["as-enum", "--alist", toy_alist, "--nu", "2",
                   "--dump", str(dump), "--brute-force-verify"])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.startswith("nu,et,count,is_codeword_support")


def test_train_select_simulate_pipeline(reg64_alist, tmp_path, capsys):
    w1 = tmp_path / "w1.txt"
    rc = cli.main(["train", "--alist", reg64_alist,
                   "--class", "3-(3,3,(3,3))", "--snr-db", "4",
                   "--i-train", "3", "--epochs", "1", "--batch-size", "64",
                   "--n-batches", "4", "--seed", "3",
                   "--out", str(w1), "--loss-csv", str(tmp_path / "loss.csv")])
    assert rc == 0
    assert (tmp_path / "loss.csv").read_text().startswith("epoch,batch,loss")

    w2 = tmp_path / "w2.txt"
    rc = cli.main(["train", "--alist", reg64_alist,
                   "--class", "unspecialized", "--snr-db", "4",
                   "--i-train", "3", "--epochs", "1", "--batch-size", "64",
                   "--n-batches", "4", "--seed", "4", "--out", str(w2)])
    assert rc == 0

    manifest = tmp_path / "pool.json"
    manifest.write_text(json.dumps([
        {"id": 0, "class": "3-(3,3,(3,3))", "weights": "w1.txt",
         "snr_db": 4.0},
        {"id": 1, "class": "unspecialized", "weights": "w2.txt",
         "snr_db": 4.0},
    ]))
    order = tmp_path / "order.json"
    rc = cli.main(["select", "--alist", reg64_alist, "--pool", str(manifest),
                   "--test-words", "2000", "--snr-db", "4", "--seed", "1",
                   "--out", str(order)])
    assert rc == 0
    sel = json.loads(order.read_text())
    assert sorted(sel["order"]) == [0, 1]
    assert len(sel["failure_rates"]) == 2

    out_csv = tmp_path / "fer.csv"
    rc = cli.main(["simulate", "--alist", reg64_alist,
                   "--decoder", "diversity-serial", "--pool", str(manifest),
                   "--snr-db", "3", "--min-frame-errors", "5",
                   "--max-frames", "3000", "--batch-size", "512",
                   "--seed", "9", "--out", str(out_csv)])
    assert rc == 0
    lines = out_csv.read_text().splitlines()
    assert lines[0].startswith("snr_db,decoder,osd_mode")
    assert "diversity-serial" in lines[1]


def test_simulate_bp_with_osd(reg64_alist, tmp_path):
    out_csv = tmp_path / "fer.csv"
    rc = cli.main(["simulate", "--alist", reg64_alist, "--decoder", "bp",
                   "--snr-db", "2", "--osd-mode", "postprocess",
                   "--osd-order", "1", "--min-frame-errors", "5",
                   "--max-frames", "2000", "--batch-size", "512",
                   "--out", str(out_csv)])
    assert rc == 0
    row = out_csv.read_text().splitlines()[1].split(",")
    assert int(row[13 - 1]) >= 0  # osd_invocations column


def test_dump_profile(reg64_alist, tmp_path, capsys):
    g = codes.reg64_3_6()
    wpath = tmp_path / "w.txt"
    bp.save_weights(wpath, g, WeightSet.ones(g))
    rc = cli.main(["dump-profile", "--alist", reg64_alist,
                   "--weights", str(wpath)])
    assert rc == 0
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "w_data,w_apost"
    assert out.splitlines()[1] == "1,1"


def test_dump_cdf(reg64_alist, tmp_path):
    out = tmp_path / "cdf.csv"
    rc = cli.main(["dump-cdf", "--alist", reg64_alist, "--snr-db", "1",
                   "--n-failures", "5", "--out", str(out)])
    assert rc == 0
    assert out.read_text().startswith("llr,cdf")


def test_config_file_supplies_values(reg64_alist, tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text(f"# comment line\nnu = 3\nalist = {reg64_alist}\n")
    rc = cli.main(["as-enum", "--config", str(conf)])
    assert rc == 0
    assert "3,3-(3,3,(3,3))" in capsys.readouterr().out


def test_config_file_explicit_flag_wins(reg64_alist, tmp_path, capsys):
    conf = tmp_path / "run.conf"
    conf.write_text("nu = 2\n")
    rc = cli.main(["as-enum", "--alist", reg64_alist, "--nu", "3",
                   "--config", str(conf)])
    assert rc == 0
    assert "3-(3,3,(3,3))" in capsys.readouterr().out


def test_config_file_unknown_key(reg64_alist, tmp_path):
    conf = tmp_path / "run.conf"
    conf.write_text("bogus = 1\n")
    with pytest.raises(SystemExit, match="unknown config keys"):
        cli.main(["as-enum", "--alist", reg64_alist, "--nu", "2",
                  "--config", str(conf)])
