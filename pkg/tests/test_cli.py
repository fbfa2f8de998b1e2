import json

import pytest

from genmeans import specfile
from genmeans.cli import main
from genmeans.errors import SpecError


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def write_spec(path, doc):
    path.write_text(json.dumps(doc), encoding="utf-8")
    return str(path)


SMALL = {
    "schema_version": 1,
    "suite": "experiments",
    "experiments": [
        {
            "name": "b_small",
            "mode": "clt",
            "kind": {"tag": "exp-cauchy"},
            "dist": {"family": "ExpLog", "lam": 2.0},
            "n_grid": [50, 200],
            "replicates": 40,
        }
    ],
}


class TestMean:
    @pytest.mark.parametrize(
        "argv, expected",
        [
            (["--kind", "exp-cauchy", "2", "6"], "3"),
            (["--kind", "gini", "--r", "1", "--s", "0", "1", "2", "3"], "2"),
            (["--kind", "arithmetic", "1", "2", "3"], "2"),
        ],
    )
    def test_values(self, capsys, argv, expected):
        code, out, _ = run(capsys, "mean", *argv)
        assert code == 0 and out.strip() == expected

    def test_mult_cauchy_prints_full_precision(self, capsys):
        code, out, _ = run(capsys, "mean", "--kind", "mult-cauchy", "2.718281828459045", "7.3890560989306495")
        assert code == 0 and len(out.strip()) >= 17
        assert float(out) == pytest.approx(3.9647537652660305, rel=1e-15)

    def test_domain_error_exit(self, capsys):
        code, _, err = run(capsys, "mean", "--kind", "log-cauchy", "0.5", "2")
        assert code == 2 and "0.5" in err and "(1, inf)" in err

    def test_missing_params(self, capsys):
        assert run(capsys, "mean", "--kind", "holder", "1", "2")[0] == 2

    def test_file_input(self, capsys, tmp_path):
        f = tmp_path / "v.csv"
        f.write_text("value\n2\n6\n")
        code, out, _ = run(capsys, "mean", "--kind", "harmonic", "--file", str(f))
        assert code == 0 and float(out) == pytest.approx(3.0)


class TestTheory:
    def test_prints_params(self, capsys):
        code, out, _ = run(capsys, "theory", "--kind", "exp-cauchy", "--dist", "explog:lam=2")
        doc = json.loads(out)
        assert code == 0
        assert doc["theory"]["limit"] == pytest.approx(1.6487212707001282)
        assert doc["moments"]["provenance"]["mean_xi"] == "analytic"

    def test_unavailable_moment_is_an_error(self, capsys):
        code, _, err = run(capsys, "theory", "--kind", "exp-cauchy", "--dist", "explog:lam=1")
        assert code == 2 and "mean_xi" in err


class TestVerify:
    def test_bisym_suite(self, capsys, tmp_path):
        code, out, _ = run(capsys, "verify", str(specfile.bundled_spec_path("bisym_L_n2.json")), "--out", str(tmp_path))
        assert code == 0
        doc = json.loads((tmp_path / "bisym.json").read_text())
        r = doc["counterexamples_L"][0]
        assert 2797.4 < r["lhs"] < 2798.4 and 2808.3 < r["rhs"] < 2809.3
        assert "LHS=2797.868" in out

    def test_bundled_spec_by_bare_name(self, capsys, tmp_path, monkeypatch):
        monkeypatch.chdir(tmp_path)
        code, out, _ = run(capsys, "verify", "bisym_L_n2.json", "--out", "o")
        assert code == 0 and (tmp_path / "o" / "bisym.json").exists()

    def test_experiments_and_outputs(self, capsys, tmp_path):
        spec = write_spec(tmp_path / "s.json", SMALL)
        code, out, _ = run(capsys, "verify", spec, "--out", str(tmp_path / "o"), "--seed", "5",
                           "--tolerance", "clt_mean=10,clt_var_lo=0,clt_var_hi=10,clt_ks=1")
        assert code == 0 and "seed=5" in out
        assert (tmp_path / "o" / "b_small.csv").exists()
        assert json.loads((tmp_path / "o" / "b_small.json").read_text())["seed"] == 5

    def test_failure_exit(self, capsys, tmp_path):
        spec = write_spec(tmp_path / "s.json", SMALL)
        code, out, _ = run(capsys, "verify", spec, "--out", str(tmp_path), "--tolerance", "clt_ks=0.0001")
        assert code == 3 and out.startswith("FAIL")

    def test_thread_counts_agree(self, capsys, tmp_path):
        spec = write_spec(tmp_path / "s.json", SMALL)
        reports = []
        for threads in ("1", "8"):
            out = tmp_path / threads
            run(capsys, "verify", spec, "--out", str(out), "--threads", threads)
            doc = json.loads((out / "b_small.json").read_text())
            doc.pop("wall_clock_s")
            reports.append(doc)
            reports.append((out / "b_small.csv").read_bytes())
        assert reports[0] == reports[2] and reports[1] == reports[3]

    def test_spec_seed_and_default(self, capsys, tmp_path):
        doc = dict(SMALL, seed=99)
        spec = write_spec(tmp_path / "s.json", doc)
        _, out, _ = run(capsys, "verify", spec, "--out", str(tmp_path), "--tolerance", "clt_ks=1")
        assert "seed=99" in out
        spec = write_spec(tmp_path / "t.json", SMALL)
        _, out, _ = run(capsys, "verify", spec, "--out", str(tmp_path), "--tolerance", "clt_ks=1")
        assert f"seed={specfile.DEFAULT_SEED}" in out

    @pytest.mark.parametrize(
        "content",
        ["{not json", json.dumps({"schema_version": 9, "suite": "bisym"}),
         json.dumps({"schema_version": 1, "suite": "experiments", "experiments": []}),
         json.dumps({"schema_version": 1, "experiments": [dict(SMALL["experiments"][0], kind={"tag": "median"})]}),
         json.dumps({"schema_version": 1, "experiments": [dict(SMALL["experiments"][0], replicates=1.5)]})],
    )
    def test_bad_specs_exit_2(self, capsys, tmp_path, content):
        p = tmp_path / "bad.json"
        p.write_text(content)
        assert run(capsys, "verify", str(p), "--out", str(tmp_path))[0] == 2

    def test_missing_file_and_bad_tolerance(self, capsys, tmp_path):
        assert run(capsys, "verify", str(tmp_path / "none.json"))[0] == 2
        spec = write_spec(tmp_path / "s.json", SMALL)
        assert run(capsys, "verify", spec, "--out", str(tmp_path), "--tolerance", "nope=1")[0] == 2
        assert run(capsys, "verify")[0] == 2

    def test_bad_seed_is_a_usage_error(self, capsys):
        with pytest.raises(SystemExit) as exc:
            main(["verify", "--suite", "bisym", "--seed", "-1"])
        assert exc.value.code == 2


class TestApportion:
    def test_prints_allocation(self, capsys, tmp_path):
        census = tmp_path / "c.csv"
        census.write_text("name,population\nA,600\nB,300\nC,100\n")
        code, out, _ = run(capsys, "apportion", str(census), "--house", "10", "--out", str(tmp_path / "o"))
        assert code == 0
        assert out.splitlines() == ["name,population,seats", "A,600,6", "B,300,3", "C,100,1"]
        assert json.loads((tmp_path / "o" / "audit.json").read_text())["total_seats"] == 10

    def test_oversubscription_exit(self, capsys, tmp_path):
        census = tmp_path / "c.csv"
        census.write_text("name,population\nA,980\nB,10\nC,10\n")
        code, _, err = run(capsys, "apportion", str(census), "--house", "10")
        assert code == 2 and "oversubscribes" in err
        code, out, _ = run(capsys, "apportion", str(census), "--house", "10", "--mode", "iterative")
        assert code == 0

    def test_methods(self, capsys, tmp_path):
        census = tmp_path / "c.csv"
        census.write_text("name,population\nA,6000\nB,3100\nC,900\n")
        a = run(capsys, "apportion", str(census), "--house", "20", "--method", "exp-cauchy", "--mode", "iterative")[1]
        b = run(capsys, "apportion", str(census), "--house", "20", "--method", "reciprocal", "--mode", "iterative")[1]
        assert a == b
        code, _, _ = run(capsys, "apportion", str(census), "--house", "20", "--method", "identity", "--weight", "power:-1")
        assert code == 0


class TestSpecfile:
    def test_bundled_specs_parse(self):
        names = specfile.bundled_specs()
        assert "thm22_explog2.json" in names and "bisym_L_n2.json" in names
        for name in names:
            spec = specfile.load_spec(specfile.bundled_spec_path(name))
            for item in spec.experiments:
                specfile.build_experiment(item, 0)

    def test_unknown_bundled(self):
        with pytest.raises(SpecError):
            specfile.bundled_spec_path("nope.json")
