import csv
import io
import json

import numpy as np
import pytest
from click.testing import CliRunner

from su11lab import harness
from su11lab.cli import cli
from su11lab.harness import ConfigError, MCEstimate, RunConfig, determinism_hash, rng_stream, run_suite


def test_config_defaults_and_env_seed(monkeypatch):
    monkeypatch.setenv("SU11LAB_SEED", "77")
    cfg = RunConfig()
    assert cfg.seed == 77
    assert cfg.suites == list(harness.SUITES)


@pytest.mark.parametrize("bad,field", [
    ({"replicas": 50}, "replicas"),
    ({"eps_num": 0.0}, "eps_num"),
    ({"se_mult": -1.0}, "se_mult"),
    ({"alpha": ["1/2", "-1"]}, "alpha"),
    ({"s": "3/2"}, "s"),
    ({"suites": ["nope"]}, "suites"),
    ({"colour": 3}, "colour"),
    ({"M": 3}, "M"),
])
def test_config_validation_names_field(bad, field):
    with pytest.raises(ConfigError) as exc:
        RunConfig.from_mapping(bad)
    assert exc.value.field == field
    assert field in str(exc.value)


def test_small_replicas_allowed_without_mc():
    assert RunConfig.from_mapping({"suites": ["crp"], "replicas": 5}).replicas == 5


def test_config_file_yaml_and_json(tmp_path):
    y = tmp_path / "c.yaml"
    y.write_text("suites: [crp]\nalpha: [1, 1/3, 2]\nseed: 5\n")
    cfg = RunConfig.load(str(y))
    assert cfg.S == 3 and cfg.alpha == ["1", "1/3", "2"] and cfg.seed == 5
    j = tmp_path / "c.json"
    j.write_text(json.dumps({"suites": [], "seed": 9}))
    assert RunConfig.load(str(j), seed=11).seed == 11


def test_rng_streams_are_keyed():
    a = rng_stream(1, "x", 0).random(4)
    assert np.array_equal(a, rng_stream(1, "x", 0).random(4))
    assert not np.array_equal(a, rng_stream(1, "y", 0).random(4))
    assert not np.array_equal(a, rng_stream(1, "x", 1).random(4))
    assert not np.array_equal(a, rng_stream(2, "x", 0).random(4))


def test_mc_estimate():
    est = MCEstimate.from_samples(np.array([1.0, 2.0, 3.0, 4.0]), seed=3)
    assert est.mean == 2.5 and est.R == 4
    assert est.stderr == pytest.approx(np.std([1, 2, 3, 4], ddof=1) / 2)
    assert est.agrees(2.6, 3) and not est.agrees(10.0, 3)


def test_empty_suite_list():
    cfg = RunConfig.from_mapping({"suites": []})
    assert run_suite(cfg) == []


def test_unitary_suite_flags_small_truncation():
    cfg = RunConfig.from_mapping({"suites": ["unitary-bch"], "M": 8})
    recs = {r.id: r for r in run_suite(cfg)}
    assert recs["unitary-bch/exponential-vector-action"].status == "fail"
    assert recs["unitary-bch/bch-factorization"].status == "fail"


def test_records_sorted_and_anchored():
    recs = run_suite(RunConfig.from_mapping({"suites": ["crp", "univariate"]}))
    ids = [r.id for r in recs]
    assert ids == sorted(ids)
    assert all(r.anchor for r in recs)
    assert all(r.status in ("exact-pass", "tol-pass") for r in recs)


def test_determinism_hash_ignores_runtime():
    cfg = RunConfig.from_mapping({"suites": ["crp"]})
    a, b = run_suite(cfg), run_suite(cfg)
    for r in b:
        r.runtime += 1.0
    assert determinism_hash(cfg, a) == determinism_hash(cfg, b)
    b[0].residual += 1e-3
    assert determinism_hash(cfg, a) != determinism_hash(cfg, b)


def test_convergence_study_rows():
    rows = harness.convergence_study("thm33", [10, 20, 30])
    assert [r["M"] for r in rows] == [10, 20, 30]
    res = [r["residual"] for r in rows]
    assert all(b <= a + 1e-12 for a, b in zip(res, res[1:]))
    assert len(harness.convergence_study("vacuum-corollary", [12])) == 1
    zero = harness.convergence_study("bch", [10, 20], xi=[0, 0])
    assert all(r["residual"] == 0 for r in zero)
    with pytest.raises(ValueError):
        harness.convergence_study("thm33", [20, 10])
    buf = io.StringIO()
    harness.write_convergence_csv(buf, rows)
    assert buf.getvalue().splitlines()[0] == "M,residual,truncation_loss,wall_time_ms"


def test_cli_verify(tmp_path):
    out = tmp_path / "r.json"
    res = CliRunner().invoke(cli, ["verify", "--suite", "crp", "--seed", "4", "--out", str(out)])
    assert res.exit_code == 0, res.output
    doc = json.loads(out.read_text())
    assert set(doc) == {"config", "records", "summary", "determinism_hash"}
    assert doc["config"]["seed"] == 4 and doc["summary"]["failed"] == 0


def test_cli_verify_failure_exit_code(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("suites: [unitary-bch]\nM: 8\n")
    res = CliRunner().invoke(cli, ["verify", "--config", str(cfg)])
    assert res.exit_code == 1


def test_cli_verify_bad_config(tmp_path):
    cfg = tmp_path / "c.yaml"
    cfg.write_text("suites: [mc-crosschecks]\nreplicas: 10\n")
    res = CliRunner().invoke(cli, ["verify", "--config", str(cfg)])
    assert res.exit_code == 2 and "replicas" in res.output


def test_cli_converge():
    res = CliRunner().invoke(cli, ["converge", "--target", "vacuum-corollary", "--m-list", "10,20"])
    assert res.exit_code == 0
    rows = list(csv.DictReader(io.StringIO(res.output)))
    assert [r["M"] for r in rows] == ["10", "20"]


@pytest.mark.parametrize("model,header", [("gamma", "m1"), ("pascal", "n1"), ("bd", "x_T"), ("cir", "x_T")])
def test_cli_sample(model, header):
    args = ["sample", "--model", model, "--replicas", "20", "--seed", "3"]
    a = CliRunner().invoke(cli, args)
    b = CliRunner().invoke(cli, args)
    assert a.exit_code == 0 and a.output == b.output
    lines = a.output.splitlines()
    assert header in lines[0] and len(lines) == 21
