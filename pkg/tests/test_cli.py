import json

import pytest

from hawkesnet.cli import EXIT_SPEC_ERROR, main
from hawkesnet.model import params_to_json, sample_random_instance
from hawkesnet.sweep import SweepSpec, read_results_csv


@pytest.fixture
def model_file(tmp_path):
    params = sample_random_instance(
        d=5, k=1, alpha=0.3, w_minus=1.0, w_plus=1.0,
        mu_minus=1.0, mu_plus=1.0, beta=1.0, seed=3,
    )
    path = tmp_path / "model.json"
    path.write_text(params_to_json(params))
    return str(path)


def test_simulate_then_recover_pipeline(tmp_path, model_file):
    events = str(tmp_path / "events.csv")
    net = str(tmp_path / "net.json")
    assert main(["simulate", "--model", model_file, "--T", "200",
                 "--seed", "7", "--method", "cluster", "--out", events]) == 0
    assert (tmp_path / "events.meta.json").exists()
    assert main(["recover", "--events", events, "--beta", "1.0", "--auto",
                 "--alpha", "0.3", "--w-minus", "1.0", "--k", "1",
                 "--out", net]) == 0
    doc = json.loads((tmp_path / "net.json").read_text())
    assert doc["d"] == 5
    assert len(doc["rows"]) == 5


def test_pipeline_repeat_is_byte_identical(tmp_path, model_file):
    outs = []
    for tag in ("a", "b"):
        events = str(tmp_path / f"ev_{tag}.csv")
        net = str(tmp_path / f"net_{tag}.json")
        main(["simulate", "--model", model_file, "--T", "100",
              "--seed", "11", "--out", events])
        main(["recover", "--events", events, "--beta", "1.0",
              "--h", "0.09", "--R", "4", "--m", "2", "--tau", "0.0135",
              "--out", net])
        outs.append(open(net, "rb").read())
    assert outs[0] == outs[1]


def test_recover_explicit_mode_requires_all_flags(tmp_path, model_file):
    events = str(tmp_path / "e.csv")
    main(["simulate", "--model", model_file, "--T", "50", "--seed", "1",
          "--out", events])
    rc = main(["recover", "--events", events, "--beta", "1.0",
               "--h", "0.1", "--out", str(tmp_path / "n.json")])
    assert rc == EXIT_SPEC_ERROR


def test_oracle_output(capsys, model_file):
    assert main(["oracle", "--model", model_file]) == 0
    doc = json.loads(capsys.readouterr().out)
    assert len(doc["m"]) == 5
    assert len(doc["sigma"]) == 5 and len(doc["sigma"][0]) == 5
    assert len(doc["gaps"]) == 5


def test_fano_point_and_curve(tmp_path, capsys):
    common = ["--d", "101", "--k", "1", "--beta", "1", "--mu-bar", "1",
              "--mu-bar-star", "1", "--theta-minus", "0.5"]
    assert main(["fano", *common, "--T", "0"]) == 0
    floor = float(capsys.readouterr().out.split()[0])
    assert floor == pytest.approx(1 - 0.6931471805599453 / 4.605170185988092)

    out = str(tmp_path / "curve.csv")
    assert main(["fano", *common, "--curve", "0:10:5", "--out", out]) == 0
    lines = open(out).read().strip().splitlines()
    assert lines[0] == "T,error_floor"
    assert len(lines) == 6
    first = float(lines[1].split(",")[1])
    assert first == pytest.approx(floor)


def test_fano_invalid_dimension_exits_2(capsys):
    rc = main(["fano", "--d", "2", "--k", "1", "--beta", "1", "--mu-bar", "1",
               "--mu-bar-star", "1", "--theta-minus", "0.5"])
    assert rc == EXIT_SPEC_ERROR


def test_bad_model_file_exits_2(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text('{"d": 2, "beta": -1}')
    rc = main(["simulate", "--model", str(bad), "--T", "10", "--seed", "0",
               "--out", str(tmp_path / "e.csv")])
    assert rc == EXIT_SPEC_ERROR


def test_sweep_grid_mode(tmp_path):
    spec = SweepSpec(
        d_values=(4,), trials=3, k=1, alpha=0.3, w_minus=1.0, w_plus=1.0,
        mu_minus=1.0, mu_plus=1.0, beta=1.0, base_seed=5,
        T_values=(20.0, 40.0),
    )
    spec_path = tmp_path / "spec.json"
    spec_path.write_text(spec.to_json())
    out = str(tmp_path / "results.csv")
    assert main(["sweep", "--spec", str(spec_path), "--out", out]) == 0
    cells = read_results_csv(out)
    assert [(c.d, c.T) for c in cells] == [(4, 20.0), (4, 40.0)]


def test_sweep_bad_spec_exits_2(tmp_path):
    spec_path = tmp_path / "spec.json"
    spec_path.write_text('{"d_values": [4], "trials": 0}')
    rc = main(["sweep", "--spec", str(spec_path),
               "--out", str(tmp_path / "r.csv")])
    assert rc == EXIT_SPEC_ERROR
