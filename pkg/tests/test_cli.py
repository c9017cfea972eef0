import json

import numpy as np
import pytest

from mcle.cli import main
from mcle.data import load_dataset
from mcle.svm import load_snapshot


@pytest.fixture(scope="module")
def data_dir(tmp_path_factory):
    d = tmp_path_factory.mktemp("ds") / "d"
    rc = main(["synth", "--classes", "2", "--per-class", "10", "--dim", "4",
               "--prior-noise", "0.1", "--seed", "3", "--out", str(d)])
    assert rc == 0
    return d


def test_synth_writes_bundle(data_dir, capsys):
    bundle = load_dataset(data_dir)
    assert bundle.pool.n_samples == 20
    assert bundle.pool.dim == 4


def test_synth_deterministic(tmp_path, data_dir):
    other = tmp_path / "d2"
    main(["synth", "--classes", "2", "--per-class", "10", "--dim", "4",
          "--prior-noise", "0.1", "--seed", "3", "--out", str(other)])
    for name in ("features.bin", "labels.csv", "split.csv", "sources.bin",
                 "sources.txt", "relations.csv"):
        assert (other / name).read_bytes() == (data_dir / name).read_bytes()


def test_synth_usage_errors(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--classes", "2", "--per-class", "10", "--dim", "4",
              "--prior-noise", "-1", "--out", str(tmp_path / "x")])
    assert exc.value.code == 2
    with pytest.raises(SystemExit) as exc:
        main(["synth", "--classes", "0", "--per-class", "10", "--dim", "4",
              "--out", str(tmp_path / "x")])
    assert exc.value.code == 2


def test_run_happy_path(data_dir, tmp_path, capsys):
    out = tmp_path / "r.json"
    csv_out = tmp_path / "curve.csv"
    rc = main(["run", "--data", str(data_dir), "--class", "c0",
               "--strategy", "mcle", "--prior", "constant", "--iters", "5",
               "--seed", "1", "--out", str(out), "--curve-csv", str(csv_out)])
    assert rc == 0
    result = json.loads(out.read_text())
    assert len(result["iterations"]) == 6  # iters + 1 curve points
    assert result["config"]["class"] == "c0"
    assert csv_out.read_text().splitlines()[0] == "t,c0,mean"
    model_path = out.parent / result["final_model_path"]
    model, labels = load_snapshot(model_path, n_train=10)
    assert len(labels) == 5
    assert "final test AP" in capsys.readouterr().out


def test_run_iters_zero(data_dir, tmp_path):
    out = tmp_path / "r0.json"
    rc = main(["run", "--data", str(data_dir), "--class", "c0", "--iters", "0",
               "--out", str(out)])
    assert rc == 0
    assert len(json.loads(out.read_text())["iterations"]) == 1


def test_run_requires_class(data_dir, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["run", "--data", str(data_dir), "--out", str(tmp_path / "r.json")])
    assert exc.value.code == 2


def test_run_missing_dataset(tmp_path, capsys):
    rc = main(["run", "--data", str(tmp_path / "nope"), "--class", "c0",
               "--out", str(tmp_path / "r.json")])
    assert rc == 1
    assert "error:" in capsys.readouterr().err


def test_run_config_override(data_dir, tmp_path):
    cfg = tmp_path / "cfg.json"
    cfg.write_text(json.dumps({"strategy": "random", "iters": 3, "seed": 9}))
    out = tmp_path / "rc.json"
    rc = main(["run", "--data", str(data_dir), "--class", "c1",
               "--out", str(out), "--config", str(cfg)])
    assert rc == 0
    result = json.loads(out.read_text())
    assert result["config"]["strategy"]["kind"] == "random"
    assert len(result["iterations"]) == 4


def test_run_all_unknown(tmp_path, capsys):
    d = tmp_path / "d4"
    main(["synth", "--classes", "4", "--per-class", "6", "--dim", "3",
          "--seed", "1", "--out", str(d)])
    rc = main(["run", "--data", str(d), "--all-unknown",
               "--split-seed", "0", "--iters", "2",
               "--out", str(tmp_path / "au.json")])
    assert rc == 0
    # 4 classes at a 75/25 split leaves exactly one unknown class
    outs = list(tmp_path.glob("au*.json"))
    assert len(outs) == 1


def test_run_determinism(data_dir, tmp_path):
    texts = []
    for sub in ("a", "b"):
        out = tmp_path / sub / "r.json"
        main(["run", "--data", str(data_dir), "--class", "c0",
              "--strategy", "random", "--iters", "4", "--seed", "2",
              "--out", str(out)])
        texts.append(out.read_text())
    assert texts[0] == texts[1]


def test_sweep(data_dir, tmp_path, capsys):
    out_dir = tmp_path / "sweep"
    rc = main(["sweep", "--data", str(data_dir), "--strategies", "mcle,random",
               "--classes", "all", "--seeds", "2", "--iters", "6",
               "--out-dir", str(out_dir)])
    assert rc == 0
    runs = (out_dir / "runs.csv").read_text().splitlines()
    assert len(runs) == 1 + 2 * 2 * 2  # header + strategies x classes x seeds
    summary = (out_dir / "summary.csv").read_text().splitlines()
    assert summary[0].startswith("strategy,mean_ap@0")
    assert len(summary) == 3
    win = (out_dir / "winrate.csv").read_text().splitlines()
    assert win[0] == "comparison,t,win_rate"
    assert win[1].startswith("mcle_vs_random,")
    rate = float(win[1].split(",")[2])
    assert 0.0 <= rate <= 1.0


def test_sweep_unknown_strategy(data_dir, tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["sweep", "--data", str(data_dir), "--strategies", "bogus",
              "--out-dir", str(tmp_path / "s")])
    assert exc.value.code == 2


def test_serve_requires_data(monkeypatch):
    monkeypatch.delenv("MCLE_DATA_DIR", raising=False)
    with pytest.raises(SystemExit) as exc:
        main(["serve"])
    assert exc.value.code == 2


def test_no_command():
    with pytest.raises(SystemExit) as exc:
        main([])
    assert exc.value.code == 2
