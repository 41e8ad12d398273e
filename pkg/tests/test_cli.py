import json

import pytest

from stablekm.cli import main

SPEC = {"kind": "separated_clusters", "n_points": 9, "n_centres": 7, "k": 3, "seed": 11}


@pytest.fixture
def inst_file(tmp_path):
    path = tmp_path / "inst.json"
    assert main(["generate", json.dumps(SPEC), "-o", str(path)]) == 0
    return path


def test_generate_round_trip_and_determinism(tmp_path, inst_file):
    again = tmp_path / "again.json"
    main(["generate", json.dumps(SPEC), "-o", str(again)])
    assert inst_file.read_bytes() == again.read_bytes()
    obj = json.loads(inst_file.read_text())
    assert obj["config"]["spec"]["seed"] == 11 and obj["instance"]["k"] == 3


def test_generate_invalid(capsys):
    bad = dict(SPEC, k=20)
    assert main(["generate", json.dumps(bad)]) == 3
    assert "n_points" in capsys.readouterr().err


def test_solve_matches_optimum(tmp_path, inst_file):
    out, trace, csvp = tmp_path / "s.json", tmp_path / "t.json", tmp_path / "t.csv"
    assert main(["solve", str(inst_file), "--truncate", "--compare-optimum", "-o", str(out),
                 "--trace", str(trace), "--csv", str(csvp)]) == 0
    s = json.loads(out.read_text())
    assert s["found_optimum"] and s["iterations"] <= s["iteration_bound"]
    t = json.loads(trace.read_text())
    assert t["config"]["rho"] == 2 and t["trace"][0]["iteration"] == 0
    assert csvp.read_text().startswith("iteration,cost\n")
    assert (tmp_path / "t.csv.config.json").exists()


def test_solve_cap_and_rho(tmp_path, inst_file, capsys):
    out = tmp_path / "s.json"
    main(["solve", str(inst_file), "--cap", "0", "-o", str(out)])
    s = json.loads(out.read_text())
    assert s["iterations"] == 0 and s["iteration_cap_hit"]
    assert main(["solve", str(inst_file), "--rho", "4"]) == 3
    assert "rho" in capsys.readouterr().err


def test_threads_byte_identical(tmp_path, inst_file):
    a, b, c = (tmp_path / f"{x}.json" for x in "abc")
    for path, threads in ((a, "4"), (b, "4"), (c, "1")):
        main(["solve", str(inst_file), "--rho", "2", "--trace", str(path), "--threads", threads,
              "-o", str(tmp_path / "x.json")])
    assert a.read_bytes() == b.read_bytes()
    assert json.loads(a.read_text())["trace"] == json.loads(c.read_text())["trace"]


def test_certify(tmp_path, inst_file):
    out = tmp_path / "c.json"
    assert main(["certify", str(inst_file), "--alpha", "1.05", "-o", str(out)]) == 0
    rep = json.loads(out.read_text())["report"]
    assert rep["alpha"] == "21/20" and rep["stable"]
    assert main(["certify", str(inst_file), "--alpha", "1"]) == 3


def test_certify_symmetric(tmp_path):
    spec = {"kind": "colinear_tie", "n_points": 6, "n_centres": 6, "k": 3, "seed": 2}
    inst = tmp_path / "tie.json"
    main(["generate", json.dumps(spec), "-o", str(inst)])
    out = tmp_path / "c.json"
    main(["certify", str(inst), "-o", str(out)])
    rep = json.loads(out.read_text())["report"]
    assert not rep["stable"] and rep["unique_optimum"] is None


def test_reduce(tmp_path):
    cnf = tmp_path / "x.cnf"
    cnf.write_text("p cnf 1 1\n1 0\n")
    assert main(["reduce", str(cnf), "--k-override", "4", "--out-dir", str(tmp_path / "o")]) == 0
    inst = json.loads((tmp_path / "o" / "kmeans.json").read_text())["instance"]
    assert inst["k"] == 29 * 7 and len(inst["sqdist"][0]) == 3 * 29 * 7
    header = (tmp_path / "o" / "cbt.txt").read_text().splitlines()[0]
    assert header == f"p 3dm {87 * 7} {63 * 7}"

    wide = tmp_path / "w.cnf"
    wide.write_text("p cnf 4 1\n1 -2 3 4 0\n")
    assert main(["reduce", str(wide), "--stage", "e3sat", "--out-dir", str(tmp_path / "w")]) == 0
    e3 = (tmp_path / "w" / "e3sat.cnf").read_text().splitlines()[0]
    assert e3 == "p cnf 10 21"  # 2*4 + C(4,2) + 7 clauses, 4 + 6 variables

    assert main(["reduce", str(cnf), "--input-stage", "e3sat", "--stage", "3dm",
                 "--out-dir", str(tmp_path / "z")]) == 3


def test_verify_chain_exit_codes(tmp_path):
    yes, no = tmp_path / "y.cnf", tmp_path / "n.cnf"
    yes.write_text("p cnf 1 1\n1 0\n")
    no.write_text("p cnf 1 2\n1 0\n-1 0\n")
    out = tmp_path / "r.json"
    assert main(["verify-chain", str(yes), "-o", str(out)]) == 0
    first = out.read_bytes()
    main(["verify-chain", str(yes), "-o", str(out)])
    assert out.read_bytes() == first
    assert json.loads(first)["report"]["verdict"] == "pass"
    assert main(["verify-chain", str(no), "-o", str(out)]) == 0
    assert main(["verify-chain", str(yes), "--matching-nodes", "0", "--sat-budget", "0",
                 "--model-nodes", "0", "-o", str(out)]) == 2


def test_bench(tmp_path):
    suite = tmp_path / "suite.json"
    rows = [dict(SPEC, seed=s, name=f"s{s}") for s in range(3)]
    rows.append({"kind": "uniform_random", "n_points": 1, "n_centres": 3, "k": 2, "name": "bad"})
    suite.write_text(json.dumps({"instances": rows}))
    out = tmp_path / "b.csv"
    assert main(["bench", str(suite), "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "instance,n,k,delta,iterations,bound,opt_found,cost,opt_cost,stable,error"
    assert len(lines) == 5 and "SpecInvalid" in lines[-1]
    for line in lines[1:4]:
        f = line.split(",")
        assert int(f[4]) <= int(f[5])
    again = tmp_path / "b2.csv"
    main(["bench", str(suite), "-o", str(again)])
    assert out.read_bytes() == again.read_bytes()
    empty = tmp_path / "e.json"
    empty.write_text("[]")
    main(["bench", str(empty), "-o", str(tmp_path / "e.csv")])
    assert len((tmp_path / "e.csv").read_text().splitlines()) == 1


def test_demo_appendix_d(tmp_path):
    out = tmp_path / "d.csv"
    assert main(["demo-appendix-d", "--n-max", "4", "-o", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert len(lines) == 5
    assert all(",True," in l for l in lines[2:])
    main(["demo-appendix-d", "--n-max", "1", "-o", str(out)])
    assert len(out.read_text().splitlines()) == 2


def test_usage_errors():
    with pytest.raises(SystemExit) as exc:
        main(["nonsense"])
    assert exc.value.code == 3
    with pytest.raises(SystemExit) as exc:
        main(["solve"])
    assert exc.value.code == 3
