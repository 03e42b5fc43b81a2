import json
import subprocess
import sys
from fractions import Fraction

import pytest

from stochknap.cli import main, pick_scheme
from stochknap.distributions import Finite, Gaussian, Laplace
from stochknap.generators import generate
from stochknap.instance import Instance, Item, dump_json


def write(path, inst):
    path.write_text(dump_json(inst.to_json()), encoding="utf-8")
    return str(path)


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_auto_dispatch_rule():
    assert pick_scheme(generate("bernoulli", 4, seed=0)) == "bernoulli"
    assert pick_scheme(generate("ksupport", 4, seed=0, k=3)) == "ksupport"
    assert pick_scheme(generate("hyper", 4, seed=0)) == "hyper"
    wide = Instance(tuple(Item(Finite(tuple(range(6)), (Fraction(1, 6),) * 6), Fraction(1)) for _ in range(2)), 3, 0)
    assert pick_scheme(wide, k_cap=4) == "hyper"


def test_solve_auto_on_bernoulli_file(tmp_path, capsys):
    path = write(tmp_path / "b.json", generate("bernoulli", 8, seed=2))
    code, out, _ = run(capsys, "solve", "--instance", path, "--scheme", "auto")
    assert code == 0 and out.endswith("\n")
    sol = json.loads(out)
    assert sol["scheme"] == "bernoulli"
    assert set(sol) >= {"selected", "total_profit", "overflow", "scheme", "epsilon", "seed", "wall_time_ms"}


def test_bernoulli_scheme_on_gaussian_item_exits_1(tmp_path, capsys):
    inst = Instance((Item(Gaussian(1.0, 1.0), Fraction(1)),), 2, Fraction(1, 10))
    code, out, err = run(capsys, "solve", "--instance", write(tmp_path / "g.json", inst), "--scheme", "bernoulli")
    assert code == 1 and out == ""
    assert "item 0" in err


def test_fixed_seed_is_byte_identical(tmp_path, capsys):
    path = write(tmp_path / "h.json", generate("hyper", 5, seed=4))
    outs = []
    for _ in range(2):
        code, out, _ = run(capsys, "solve", "--instance", path, "--seed", "11", "--no-time")
        assert code == 0
        outs.append(out)
    assert outs[0] == outs[1]
    assert "wall_time_ms" not in json.loads(outs[0])


def test_profit_equals_selected_sum(tmp_path, capsys):
    inst = generate("ksupport", 7, seed=5)
    code, out, _ = run(capsys, "solve", "--instance", write(tmp_path / "k.json", inst))
    sol = json.loads(out)
    assert len(set(sol["selected"])) == len(sol["selected"])
    assert all(0 <= i < inst.n for i in sol["selected"])
    assert Fraction(sol["total_profit"]) == inst.subset_profit(sol["selected"])


@pytest.mark.parametrize("cap,expected", [("0", 0.0), ("-1", 1.0)])
def test_estimate_empty_subset(tmp_path, capsys, cap, expected):
    obj = generate("bernoulli", 3, seed=0).to_json()
    obj["capacity"] = cap
    path = tmp_path / "e.json"
    path.write_text(json.dumps(obj))
    code, out, _ = run(capsys, "estimate", "--instance", str(path), "--subset", "")
    assert code == 0 and json.loads(out)["estimate"] == expected


def test_estimate_bad_subset(tmp_path, capsys):
    path = write(tmp_path / "b.json", generate("bernoulli", 3, seed=0))
    assert run(capsys, "estimate", "--instance", path, "--subset", "0,9")[0] == 1
    assert run(capsys, "estimate", "--instance", path, "--subset", "a")[0] == 1


def test_solve_then_estimate_agree(tmp_path, capsys):
    path = write(tmp_path / "h.json", generate("hyper", 6, seed=8))
    sol = json.loads(run(capsys, "solve", "--instance", path)[1])
    subset = ",".join(map(str, sol["selected"]))
    est = json.loads(run(capsys, "estimate", "--instance", path, "--subset", subset, "--seed", "99")[1])
    assert abs(est["estimate"] - sol["overflow"]["estimate"]) <= est["half_width"] + sol["overflow"]["half_width"]


def test_estimate_exact_flag(tmp_path, capsys):
    path = write(tmp_path / "b.json", generate("bernoulli", 4, seed=3))
    est = json.loads(run(capsys, "estimate", "--instance", path, "--subset", "0,1,2,3", "--exact")[1])
    assert est["half_width"] == 0.0 and "exact" in est


def test_check_hyper_laplace(tmp_path, capsys):
    inst = Instance((Item(Laplace(2.0, 0.5), Fraction(1)),), 3, Fraction(1, 10))
    rep = json.loads(run(capsys, "check-hyper", "--instance", write(tmp_path / "l.json", inst))[1])
    assert rep["items"][0]["kurtosis"] == pytest.approx(6.0, abs=1e-9)
    assert rep["c4"] == pytest.approx(6.0, abs=1e-9)


def test_gen_twice_identical(tmp_path, capsys):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for p in (a, b):
        assert run(capsys, "gen", "--family", "bernoulli", "--n", "10", "--seed", "7", "--output", str(p))[0] == 0
    assert a.read_bytes() == b.read_bytes()
    assert a.read_text().endswith("\n")


def test_brute_and_cap_exit_code(tmp_path, capsys):
    path = write(tmp_path / "d.json", generate("deterministic", 6, seed=1))
    code, out, _ = run(capsys, "brute", "--instance", path)
    assert code == 0 and json.loads(out)["feasible"]
    code, _, err = run(capsys, "brute", "--instance", path, "--brute-cap", "3")
    assert code == 2 and "capped" in err


def test_type_budget_exit_code(tmp_path, capsys):
    path = write(tmp_path / "h.json", generate("hyper", 8, seed=1))
    code, _, err = run(capsys, "solve", "--instance", path, "--scheme", "hyper", "--type-budget", "5")
    assert code == 2 and "type budget" in err


def test_missing_file_exits_1(tmp_path, capsys):
    code, _, err = run(capsys, "solve", "--instance", str(tmp_path / "nope.json"))
    assert code == 1 and "cannot read" in err


def test_output_flag_writes_file(tmp_path, capsys):
    path = write(tmp_path / "b.json", generate("bernoulli", 5, seed=0))
    out = tmp_path / "sol.json"
    code, stdout, _ = run(capsys, "solve", "--instance", path, "--output", str(out))
    assert code == 0 and stdout == ""
    assert json.loads(out.read_text())["scheme"] == "bernoulli"


def test_selftest(capsys):
    code, out, _ = run(capsys, "selftest")
    assert code == 0 and json.loads(out)["ok"]


def test_module_entry_point(tmp_path):
    res = subprocess.run([sys.executable, "-m", "stochknap", "gen", "--family", "poisson", "--n", "3", "--seed", "1"],
                         capture_output=True, text=True, check=True)
    assert json.loads(res.stdout)["items"][0]["dist"]["type"] == "poisson"
