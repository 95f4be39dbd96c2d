import json
import math
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given, strategies as st

from trifree import cli, harness as H
from trifree import process as P
from trifree.process import RunConfig, new_state
from trifree.trajectory import RunRecord

NINE = st.floats(allow_nan=True, allow_infinity=True, width=64).map(
    lambda x: x if not math.isfinite(x) else float("%.9g" % x))
INTS = st.integers(0, 2**40)


@st.composite
def records(draw, floats=NINE):
    kw = {}
    for name in RunRecord.field_names():
        kw[name] = draw(INTS) if name in ("m", "q", "max_deg", "sample_size") else draw(floats)
    return RunRecord(**kw)


def same(a: RunRecord, b: RunRecord) -> bool:
    for name in RunRecord.field_names():
        x, y = getattr(a, name), getattr(b, name)
        if not (x == y or (isinstance(x, float) and math.isnan(x) and math.isnan(y))):
            return False
    return True


@given(st.integers(0, 2**31), st.lists(records(), max_size=5))
def test_csv_round_trip(run_id, recs):
    ids, back = H.parse_rows(H.emit_rows(run_id, recs))
    assert ids == [run_id] * len(recs)
    assert all(same(a, b) for a, b in zip(recs, back))


@given(st.lists(records(st.floats(allow_nan=True, allow_infinity=True)), max_size=4))
def test_csv_emit_is_a_fixed_point(recs):
    text = H.emit_rows(1, recs)
    assert H.emit_rows(1, H.parse_rows(text)[1]) == text


def test_csv_header_is_schema():
    text = H.emit_rows(3, [])
    assert text.strip() == ",".join(H.CSV_COLUMNS)
    with pytest.raises(H.CsvSchemaError):
        H.parse_rows(text.replace("lambda", "lam"))
    with pytest.raises(H.CsvSchemaError):
        H.parse_rows(text + "1,2\n")


def test_config_validation():
    with pytest.raises(ValueError):
        H.ExperimentConfig(n=10, seeds=(1, 1))
    with pytest.raises(ValueError):
        H.ExperimentConfig(n=10, jobs=0)


def test_simulate_outputs(tmp_path):
    cfg = H.ExperimentConfig(n=256, seeds=(7,), record_every=64)
    info = H.simulate(cfg, tmp_path / "a.csv", tmp_path / "a.jsonl", tmp_path / "a.json")
    ids, recs = H.parse_rows((tmp_path / "a.csv").read_text())
    assert set(ids) == {7} and recs[-1].q == 0 and recs[-1].m == info["final_m"]
    summ = json.loads((tmp_path / "a.json").read_text())
    assert {"eps", "big_c", "omega"} <= set(summ)
    snap = P.load_snapshot(tmp_path / "a.jsonl")
    assert snap.m == info["final_m"] and snap.q == 0


def test_resume_matches_uninterrupted(tmp_path):
    whole = H.ExperimentConfig(n=300, seeds=(4,), record_every=100)
    H.simulate(whole, tmp_path / "whole.csv")
    part = H.ExperimentConfig(n=300, seeds=(4,), record_every=100, max_steps=1500)
    H.simulate(part, tmp_path / "part.csv", tmp_path / "part.jsonl")
    H.simulate(whole, tmp_path / "rest.csv", resume_path=tmp_path / "part.jsonl")
    full_lines = (tmp_path / "whole.csv").read_text().splitlines()
    rest_lines = (tmp_path / "rest.csv").read_text().splitlines()
    assert rest_lines[0] == full_lines[0]
    tail = [ln for ln in full_lines[1:] if int(ln.split(",")[1]) >= 1500]
    assert rest_lines[1:] == tail


def test_resume_rejects_wrong_seed(tmp_path):
    s = new_state(RunConfig(n=20, seed=1))
    P.advance(s, 5)
    P.save_snapshot(s, tmp_path / "s.jsonl")
    with pytest.raises(ValueError):
        H.simulate(H.ExperimentConfig(n=20, seeds=(2,)), tmp_path / "x.csv",
                   resume_path=tmp_path / "s.jsonl")


def test_ensemble_is_independent_of_jobs(tmp_path):
    base = dict(n=200, seeds=(0, 1, 2, 3), record_every=100)
    a = H.ensemble(H.ExperimentConfig(**base, jobs=1), tmp_path / "serial")
    b = H.ensemble(H.ExperimentConfig(**base, jobs=3), tmp_path / "parallel")
    for fa, fb in zip(a["files"], b["files"]):
        assert open(fa).read() == open(fb).read()
    assert open(a["aggregate"]).read() == open(b["aggregate"]).read()
    ids, _ = H.parse_rows(open(a["files"][2]).read())
    assert set(ids) == {2}


def test_aggregate_is_pure_and_orderless():
    texts = [H.run_one(H.ExperimentConfig(n=120, seeds=(s,), record_every=60), s).csv_text
             for s in range(3)]
    assert H.aggregate(texts) == H.aggregate(texts[::-1])
    rows = H.aggregate(texts).splitlines()
    header = rows[0].split(",")
    first = dict(zip(header, rows[1].split(",")))
    assert first["m"] == "0" and first["runs"] == "3"
    med = float(first["q_median"])
    assert med == 120 * 119 / 2


def test_ensemble_failure_aborts(monkeypatch):
    cfg = H.ExperimentConfig(n=50, seeds=(0, 1), jobs=1)

    def boom(config, seed, *a, **k):
        raise RuntimeError("worker died")

    monkeypatch.setattr(H, "run_one", boom)
    with pytest.raises(RuntimeError):
        H.run_ensemble(cfg)


def _cli(*args, cwd=None):
    return subprocess.run([sys.executable, "-m", "trifree.cli", *args], capture_output=True,
                          text=True, cwd=cwd)


def test_determinism_across_processes(tmp_path):
    for name in ("one", "two"):
        r = _cli("simulate", "--n", "512", "--seed", "11", "--record-every", "128",
                 "--out", str(tmp_path / f"{name}.csv"))
        assert r.returncode == 0, r.stderr
    assert (tmp_path / "one.csv").read_bytes() == (tmp_path / "two.csv").read_bytes()
    a = json.loads((tmp_path / "one.snapshot.jsonl").read_text())
    b = json.loads((tmp_path / "two.snapshot.jsonl").read_text())
    assert a["edges"] == b["edges"]


def test_cli_until_t(tmp_path):
    assert cli.main(["simulate", "--n", "256", "--until-t", "0.5", "--out", str(tmp_path / "h.csv")]) == 0
    _, recs = H.parse_rows((tmp_path / "h.csv").read_text())
    assert recs[-1].t >= 0.5 and (recs[-1].m - 1) / 256**1.5 < 0.5


def test_cli_usage_errors(tmp_path, capsys):
    assert cli.main(["simulate", "--n", "1", "--out", str(tmp_path / "x.csv")]) != 0
    assert "error" in capsys.readouterr().err
    bad = tmp_path / "bad.txt"
    bad.write_text("v: a b; A: a; E: a-b; O: a-b")
    assert cli.main(["structure", str(bad)]) != 0
    with pytest.raises(SystemExit):
        cli.main(["simulate"])


def test_cli_structure(tmp_path, capsys):
    f = tmp_path / "open.txt"
    f.write_text("v: a b; A: a; E:; O: a-b")
    assert cli.main(["structure", str(f), "--json", str(tmp_path / "r.json")]) == 0
    rep = json.loads((tmp_path / "r.json").read_text())
    assert rep["rho_star"] == "1/4" and rep["weights"]["c"] == "2"
    f.write_text("v: a b c x; A: a b c; E: a-x; O: b-x c-x")
    assert cli.main(["structure", str(f), "--families", "minus", "--json", str(tmp_path / "w.json")]) == 0
    cases = {m["case"] for m in json.loads((tmp_path / "w.json").read_text())["families"]["minus"]}
    assert cases <= set("abcdef")
    f.write_text("v: a b; A: a b; E:; O:")
    assert cli.main(["structure", str(f), "--json", str(tmp_path / "z.json")]) == 0
    assert json.loads((tmp_path / "z.json").read_text())["building_sequence"]["length"] == 0


def test_cli_ygraph(tmp_path):
    out = tmp_path / "y.csv"
    assert cli.main(["ygraph", "--n", "30", "--seed", "2", "--until-t", "0.3", "--sample", "3",
                     "--sigma", "", "L", "RL", "--out", str(out)]) == 0
    rows = out.read_text().splitlines()
    assert rows[0] == "edge,sigma,U,V" and len(rows) == 1 + 3 * 3
    for r in rows[1:]:
        edge, sigma, u, v = r.split(",")
        if sigma == "":
            assert u == "1"


def test_cli_witness_and_replay(tmp_path):
    out = tmp_path / "w.json"
    assert cli.main(["witness", "--n", "5", "--seed", "1", "--out", str(out)]) == 0
    cert = json.loads(out.read_text())
    assert cert["alpha_kind"] == "exact" and cert["claim"].startswith("R(3, ")
    assert cli.main(["replay", str(tmp_path / "w.graph.txt")]) == 0
    n, edges = P.read_graph(tmp_path / "w.graph.txt")
    A = np.zeros((n, n), dtype=bool)
    A[edges[:, 0], edges[:, 1]] = A[edges[:, 1], edges[:, 0]] = True
    assert P.is_maximal_triangle_free(A)


def test_cli_witness_too_large():
    assert cli.main(["witness", "--n", "100000", "--out", "/dev/null"]) != 0


def test_cli_ensemble(tmp_path):
    assert cli.main(["ensemble", "--n", "100", "--runs", "3", "--jobs", "2", "--seed", "5",
                     "--out", str(tmp_path / "ens")]) == 0
    files = sorted(p.name for p in (tmp_path / "ens").iterdir())
    assert files == ["aggregate.csv", "run_5.csv", "run_6.csv", "run_7.csv", "summary.json"]


def test_verify_quick_passes(capsys):
    assert cli.main(["verify", "--quick"]) == 0
    assert "all checks passed" in capsys.readouterr().out


def test_verify_catches_y_off_by_one(monkeypatch, capsys):
    real_step = P.step

    def faulty(state):
        out = real_step(state)
        if state.full and state.q:
            code = int(state.open_list[0])
            a, b = code // state.n, code % state.n
            state.y[a * (2 * state.n - a - 1) // 2 + (b - a - 1)] += 1
            state.ctr[2] += 1
        return out

    monkeypatch.setattr(P, "step", faulty)
    assert cli.main(["verify", "--quick"]) == 1
    text = capsys.readouterr().out
    assert "FAIL oracle+identities" in text
    assert "y_counters" in text and "ybb" in text
