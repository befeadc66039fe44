import hashlib
import json
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner

from gwi.cli import main, parse_config, write_csv


@pytest.fixture()
def runner():
    return CliRunner()


def _run(runner, *args):
    result = runner.invoke(main, list(args), catch_exceptions=False)
    assert result.exit_code == 0, result.output
    return result


class TestConfig:
    def test_defaults(self):
        cfg = parse_config(None)
        assert cfg["alpha"] == 1.5 and cfg["n"] == 1000

    def test_file_and_comments(self, tmp_path):
        p = tmp_path / "run.cfg"
        p.write_text("# heavy-tail run\nalpha = 1.3\nn=50  # short\n\n")
        cfg = parse_config(str(p))
        assert cfg["alpha"] == 1.3
        assert cfg["n"] == 50
        assert cfg["c"] == 0.3  # untouched default

    def test_bad_line(self, tmp_path):
        p = tmp_path / "bad.cfg"
        p.write_text("alpha 1.3\n")
        with pytest.raises(Exception):
            parse_config(str(p))

    def test_write_csv_format(self, tmp_path):
        p = tmp_path / "t.csv"
        write_csv(p, ["a", "b"], [(1, 0.5), (2, 1 / 3)])
        lines = p.read_text().splitlines()
        assert lines[0] == "a,b"
        assert lines[1] == "1,0.5"
        assert float(lines[2].split(",")[1]) == pytest.approx(1 / 3, abs=1e-16)


class TestSimulate:
    def test_trajectory_and_sidecar(self, runner, tmp_path):
        out = tmp_path / "sim"
        _run(runner, "simulate", "--seed", "5", "--out", str(out))
        rows = (out / "trajectory.csv").read_text().splitlines()
        assert rows[0] == "i,x,m"
        assert len(rows) == 1002  # header + X_0..X_1000
        meta = json.loads((out / "trajectory_meta.json").read_text())
        mu_A, mu_B = meta["mu_A"], meta["mu_B"]
        # the residual column must reconstruct exactly from the x column
        xs = [int(r.split(",")[1]) for r in rows[1:]]
        for i, row in enumerate(rows[2:], start=1):
            m = float(row.split(",")[2])
            assert m == pytest.approx(xs[i] - mu_A * xs[i - 1] - mu_B,
                                      abs=1e-12)
        assert xs[0] == meta["init"]

    def test_manifest_checksums(self, runner, tmp_path):
        out = tmp_path / "sim"
        _run(runner, "simulate", "--seed", "5", "--out", str(out))
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["experiment"] == "simulate"
        assert manifest["seed_table"] == [5]
        for name, digest in manifest["outputs"].items():
            got = hashlib.sha256((out / name).read_bytes()).hexdigest()
            assert got == digest


class TestEstimate:
    def test_rerun_byte_identical(self, runner, tmp_path):
        cfg = tmp_path / "est.cfg"
        cfg.write_text("n=100\nreps=40\n")
        outs = []
        for name in ("a", "b"):
            out = tmp_path / name
            _run(runner, "estimate", "--config", str(cfg),
                 "--seed", "11", "--out", str(out))
            outs.append((out / "replications.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_worker_invariant_output(self, runner, tmp_path):
        cfg = tmp_path / "est.cfg"
        cfg.write_text("n=60\nreps=600\n")  # 600 reps span three seed blocks
        outs = []
        for name, workers in (("w1", "1"), ("w3", "3")):
            out = tmp_path / name
            _run(runner, "estimate", "--config", str(cfg), "--seed", "2",
                 "--out", str(out), "--workers", workers)
            outs.append((out / "replications.csv").read_bytes())
        assert outs[0] == outs[1]

    def test_columns(self, runner, tmp_path):
        out = tmp_path / "est"
        cfg = tmp_path / "est.cfg"
        cfg.write_text("n=100\nreps=25\n")
        _run(runner, "estimate", "--config", str(cfg), "--out", str(out))
        rows = (out / "replications.csv").read_text().splitlines()
        assert rows[0] == "rep,n,a_n,mu_hat,defined,v1,v2,scaled_error"
        assert len(rows) == 26


class TestTables:
    def test_cdf_table_monotone(self, runner, tmp_path):
        out = tmp_path / "cdf"
        cfg = tmp_path / "cdf.cfg"
        cfg.write_text("x_min=-1\nx_max=1\nx_points=9\n")
        _run(runner, "cdf-table", "--config", str(cfg), "--out", str(out))
        rows = (out / "cdf.csv").read_text().splitlines()[1:]
        vals = [float(r.split(",")[1]) for r in rows]
        assert len(vals) == 9
        assert all(b >= a - 1e-6 for a, b in zip(vals, vals[1:]))
        assert vals[4] == pytest.approx(0.5, abs=1e-3)  # x = 0

    def test_cf_table(self, runner, tmp_path):
        out = tmp_path / "cf"
        cfg = tmp_path / "cf.cfg"
        cfg.write_text("s_values=0,1\nt_values=0\n")
        _run(runner, "cf-table", "--config", str(cfg), "--out", str(out))
        rows = (out / "cf.csv").read_text().splitlines()
        assert rows[0] == "s,t,re,im"
        table = {tuple(map(float, r.split(",")[:2])):
                 tuple(map(float, r.split(",")[2:])) for r in rows[1:]}
        assert table[(0.0, 0.0)] == pytest.approx((1.0, 0.0), abs=1e-9)
        re, im = table[(1.0, 0.0)]
        assert re**2 + im**2 < 1.0

    def test_karamata(self, runner, tmp_path):
        out = tmp_path / "kar"
        _run(runner, "karamata", "--out", str(out))
        rec = json.loads((out / "karamata.json").read_text())
        assert rec["empirical"] == pytest.approx(rec["analytic"], rel=0.01)


class TestLimitSample:
    def test_output_and_manifest(self, runner, tmp_path):
        out = tmp_path / "lim"
        cfg = tmp_path / "lim.cfg"
        cfg.write_text("eps=0.05\nreps=300\ncompensate=true\n")
        _run(runner, "limit-sample", "--config", str(cfg), "--seed", "4",
             "--out", str(out))
        rows = (out / "limit_samples.csv").read_text().splitlines()
        assert rows[0] == "v1,v2,terms_used"
        assert len(rows) == 301
        v1 = np.array([float(r.split(",")[0]) for r in rows[1:]])
        assert np.all(v1 > 0)


class TestCompare:
    def test_identical_samples(self, runner, tmp_path):
        rng = np.random.default_rng(1)
        data = rng.normal(size=800)
        p = tmp_path / "a.csv"
        np.savetxt(p, data, fmt="%.10g")
        res = _run(runner, "compare", str(p), str(p))
        rec = json.loads(res.output)
        assert rec["distance"] == 0.0
        assert rec["n_a"] == 800

    def test_disjoint_samples(self, runner, tmp_path):
        a = tmp_path / "a.csv"
        b = tmp_path / "b.csv"
        np.savetxt(a, np.arange(600, dtype=float), fmt="%.10g")
        np.savetxt(b, np.arange(600, dtype=float) + 10**6, fmt="%.10g")
        rec = json.loads(_run(runner, "compare", str(a), str(b)).output)
        assert rec["distance"] == pytest.approx(1.0)
        assert rec["p_value"] < 1e-10

    def test_short_sample_rejected(self, runner, tmp_path):
        p = tmp_path / "short.csv"
        np.savetxt(p, np.arange(10, dtype=float), fmt="%.10g")
        result = runner.invoke(main, ["compare", str(p), str(p)])
        assert result.exit_code != 0

    def test_header_skipped(self, runner, tmp_path):
        p = tmp_path / "h.csv"
        p.write_text("v1\n" + "\n".join(str(float(i)) for i in range(600))
                     + "\n")
        rec = json.loads(_run(runner, "compare", str(p), str(p)).output)
        assert rec["n_a"] == 600
