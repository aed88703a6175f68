import hashlib
import json

from cclab.cli import main
from cclab import write_bfn
from cclab.rectangles import Rectangle, write_rect

from oracles import random_sign


def run(argv):
    return main(argv)


def sha(path):
    with open(path, "rb") as fh:
        return hashlib.sha256(fh.read()).hexdigest()


# ----------------------------------------------------------- gen

def test_gen_eq4_content(tmp_path):
    out = tmp_path / "eq4.bfn"
    assert run(["gen", "--family", "eq", "--m", "4", "--out", str(out)]) == 0
    lines = out.read_text().splitlines()
    assert lines[0] == "4 4"
    assert lines[1:5] == ["1000", "0100", "0010", "0001"]


def test_gen_random_deterministic(tmp_path):
    a, b = tmp_path / "a.bfn", tmp_path / "b.bfn"
    for out in (a, b):
        assert run(["gen", "--family", "random", "--m", "6", "--seed", "7",
                    "--out", str(out)]) == 0
    assert sha(a) == sha(b)


def test_gen_requires_one_source(tmp_path, capsys):
    assert run(["gen", "--out", str(tmp_path / "x.bfn")]) == 1
    assert "input source" in capsys.readouterr().err


# ----------------------------------------------------------- measure

def test_measure_xor2(capsys):
    code = run(["measure", "--family", "xor", "--m", "2"])
    out = capsys.readouterr().out
    assert code == 0
    assert "rank: 1" in out
    assert "D_lo: 2" in out and "D_hi: 2" in out
    assert "C_lo: 4" in out


def test_measure_const(capsys):
    code = run(["measure", "--family", "const", "--m", "3", "--value", "0"])
    out = capsys.readouterr().out
    assert code == 0
    assert "D_lo: 0" in out and "C_lo: 1" in out


def test_measure_eq4_csv(tmp_path):
    src = tmp_path / "eq4.bfn"
    run(["gen", "--family", "eq", "--m", "4", "--out", str(src)])
    out = tmp_path / "row.csv"
    code = run(["measure", "--in", str(src), "--format", "csv",
                "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0].startswith("#v1 name,rows,cols,rank,")
    row = lines[1].split(",")
    assert row[0] == "eq4" and row[3] == "4"  # rank
    assert row[6] == "3" and row[7] == "3"    # D_lo, D_hi


def test_measure_ip8_rank(capsys):
    code = run(["measure", "--family", "ip", "--m", "8", "--limits",
                "node=200000"])
    out = capsys.readouterr().out
    assert "rank: 8" in out
    assert code in (0, 2)


def test_measure_inconclusive_exit_2(tmp_path, capsys):
    f = random_sign(6, 6, 99)
    src = tmp_path / "r.bfn"
    write_bfn(src, f)
    code = run(["measure", "--in", str(src), "--limits", "node=3"])
    out = capsys.readouterr().out
    assert code == 2
    assert "interval" in out or "bounds" in out


def test_measure_parse_error_names_position(tmp_path, capsys):
    bad = tmp_path / "bad.bfn"
    bad.write_text("2 2\n0x\n00\n")
    assert run(["measure", "--in", str(bad)]) == 1
    err = capsys.readouterr().err
    assert "line 2" in err and "col 2" in err


# ----------------------------------------------------------- extract

def test_extract_identity_n1(tmp_path, capsys):
    src = tmp_path / "eq3.bfn"
    run(["gen", "--family", "eq", "--m", "3", "--out", str(src)])
    rect = tmp_path / "r.rect"
    write_rect(rect, Rectangle((0, 1), (2,)))
    code = run(["extract", "--in", str(src), "--n", "1", "--rect", str(rect)])
    out = capsys.readouterr().out
    assert code == 0
    assert "T_size: 2" in out and "R_size: 2" in out


def test_extract_guarantee_line_k6_n2(tmp_path, capsys):
    src = tmp_path / "c8.bfn"
    run(["gen", "--family", "const", "--m", "8", "--value", "0",
         "--out", str(src)])
    rect = tmp_path / "r.rect"
    write_rect(rect, Rectangle(range(8), range(8)))
    code = run(["extract", "--in", str(src), "--n", "2", "--rect", str(rect)])
    out = capsys.readouterr().out
    assert code == 0
    assert "|T| >= 2^(k/n - 2) = 2" in out


def test_extract_eq2_n2_json(tmp_path, capsys):
    src = tmp_path / "eq2.bfn"
    run(["gen", "--family", "eq", "--m", "2", "--out", str(src)])
    rect = tmp_path / "r.rect"
    write_rect(rect, Rectangle((0, 3), (0, 3)))
    code = run(["extract", "--in", str(src), "--n", "2", "--rect", str(rect),
                "--format", "json"])
    assert code == 0
    record = json.loads(capsys.readouterr().out)
    assert record["R_size"] == 4 and "pass" in record["check"]


def test_extract_rejects_non_monochromatic(tmp_path, capsys):
    src = tmp_path / "eq2.bfn"
    run(["gen", "--family", "eq", "--m", "2", "--out", str(src)])
    rect = tmp_path / "r.rect"
    write_rect(rect, Rectangle((0, 1), (0, 1)))
    code = run(["extract", "--in", str(src), "--n", "2", "--rect", str(rect)])
    assert code == 1
    assert "cell (" in capsys.readouterr().err


# ----------------------------------------------------------- build chain

def test_build_balance_verify_pipeline(tmp_path, capsys):
    src = tmp_path / "eq4.bfn"
    run(["gen", "--family", "eq", "--m", "4", "--out", str(src)])
    proto = tmp_path / "eq4.proto.json"
    assert run(["build", "--in", str(src), "--n", "1", "--mode", "exact",
                "--out", str(proto)]) == 0
    trace = json.loads((tmp_path / "eq4.proto.json.trace.json").read_text())
    assert trace["budgets_ok"] is True
    bal = tmp_path / "eq4.bal.json"
    assert run(["balance", "--in", str(proto), "--out", str(bal)]) == 0
    assert run(["verify", "--in", str(bal), "--matrix", str(src)]) == 0
    capsys.readouterr()


def test_build_constant_one_leaf(tmp_path):
    src = tmp_path / "c.bfn"
    run(["gen", "--family", "const", "--m", "3", "--value", "1",
         "--out", str(src)])
    proto = tmp_path / "c.proto.json"
    assert run(["build", "--in", str(src), "--out", str(proto),
                "--mode", "exact"]) == 0
    obj = json.loads(proto.read_text())
    assert obj["tree"] == {"output": 1}


def test_verify_mismatch_exit_1(tmp_path, capsys):
    src = tmp_path / "eq4.bfn"
    run(["gen", "--family", "eq", "--m", "4", "--out", str(src)])
    other = tmp_path / "gt4.bfn"
    run(["gen", "--family", "gt", "--m", "4", "--out", str(other)])
    proto = tmp_path / "p.json"
    run(["build", "--in", str(src), "--out", str(proto)])
    assert run(["verify", "--in", str(proto), "--matrix", str(other)]) == 1
    assert "mismatch at (" in capsys.readouterr().err


# ----------------------------------------------------------- report

def test_report_sweep_csv(tmp_path):
    out = tmp_path / "sweep.csv"
    code = run(["report", "--family", "eq", "--m", "2,3", "--n", "2",
                "--format", "csv", "--out", str(out)])
    assert code == 0
    lines = out.read_text().splitlines()
    assert lines[0] == ("#v1 name,rows,cols,rank,D_lo,D_hi,n,C_lo,C_hi,"
                        "logC,rho,degenerate,leaves,balanced_depth")
    assert len(lines) == 3
    assert lines[1].startswith("eq2,2,2,1,2,2,2,")


def test_report_xor_degenerate(tmp_path):
    out = tmp_path / "xor.csv"
    assert run(["report", "--family", "xor", "--m", "2", "--n", "1",
                "--format", "csv", "--out", str(out)]) == 0
    assert ",true," in out.read_text().splitlines()[1]


def test_report_rerun_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    args = ["report", "--family", "random", "--m", "4,5", "--seed", "11",
            "--n", "1", "--format", "csv"]
    assert run(args + ["--out", str(a)]) == 0
    assert run(args + ["--out", str(b)]) == 0
    assert sha(a) == sha(b)


# ----------------------------------------------------------- limits

def test_limits_env_and_flag(tmp_path, monkeypatch, capsys):
    f = random_sign(6, 6, 99)
    src = tmp_path / "r.bfn"
    write_bfn(src, f)
    monkeypatch.setenv("CCLAB_LIMITS", "node=3")
    assert run(["measure", "--in", str(src)]) == 2
    capsys.readouterr()
    # flag overrides env
    assert run(["measure", "--in", str(src), "--limits", "node=400000"]) in (0, 2)
    out = capsys.readouterr().out
    assert "D_status: exact" in out


def test_bad_limits_flag(capsys):
    assert run(["measure", "--family", "xor", "--m", "2",
                "--limits", "bogus=3"]) == 1
    assert "limit" in capsys.readouterr().err


def test_unknown_flag_is_user_error(capsys):
    assert run(["measure", "--family", "xor", "--m", "2", "--zap"]) == 1
