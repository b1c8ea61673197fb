import json
import subprocess
import sys
import threading

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conormal import cache as cache_mod
from conormal import cli
from conormal.config import RunConfig
from conormal.engine import conormal_saturation
from conormal.exactalg import Subspace
from conormal.report import RECORD_FIELDS, SCHEMA_VERSION, strip_timings
from conormal.specs import SpecError, VarietySpec, parse_spec, resolve, save_spec_file
from conormal.varieties import catalog

P = RunConfig().prime


def run_cli(*argv):
    report, code = cli.run(list(argv), write=False)
    return report, code


# spec grammar ---------------------------------------------------------------


def test_parse_examples():
    s = parse_spec("tetragonal:2,2,1,b=1,2")
    assert s.constructor == "tetragonal"
    assert s.params == {"_pos": [2, 2, 1], "b": [1, 2]}
    assert parse_spec("pentagonal:g=8,seed=4") == VarietySpec("pentagonal", {"g": 8}, 4)
    assert parse_spec("g25").params == {}
    assert parse_spec("g25:realization=symbolic").params == {"realization": "symbolic"}


@pytest.mark.parametrize("bad", ["nosuch:1", "veronese:1,x", "g25:1", "tetragonal:2,1,1,c=1", "veronese:1,,2",
                                 "g25:realization=weird", "pentagonal:g=8,b=1,1"])
def test_parse_errors(bad):
    with pytest.raises(SpecError):
        parse_spec(bad).build()


tokens = st.lists(st.integers(0, 9), min_size=1, max_size=4)


@given(st.sampled_from(["veronese", "segre", "scroll", "ci", "plane-canonical"]), tokens, st.integers(0, 50))
def test_round_trip_string_and_json(name, pos, seed):
    spec = VarietySpec(name, {"_pos": pos}, seed)
    assert parse_spec(spec.to_string(), seed) == spec
    assert VarietySpec.from_json(spec.to_json()) == spec


@given(tokens, tokens)
def test_round_trip_keywords(e, b):
    spec = VarietySpec("tetragonal", {"_pos": e, "b": b}, 0)
    assert parse_spec(spec.label) == spec


def test_json_label_mismatch():
    doc = json.loads(parse_spec("veronese:1,3").to_json())
    doc["label"] = "veronese:1,4"
    with pytest.raises(SpecError):
        VarietySpec.from_json(json.dumps(doc))


def test_resolve_spec_file(tmp_path):
    spec = parse_spec("veronese:1,3")
    path = tmp_path / "v.json"
    save_spec_file(spec, path)
    assert resolve(str(path)) == spec


# config ----------------------------------------------------------------------


def test_config_validation():
    with pytest.raises(ValueError):
        RunConfig(kmax=0)
    with pytest.raises(ValueError):
        RunConfig(prime=1009)
    echo = RunConfig(cache_dir="/x", jobs=4).echo()
    assert "cache_dir" not in echo and "jobs" not in echo and echo["seed"] == 0


# commands --------------------------------------------------------------------


def test_star_veronese_quartic():
    report, code = run_cli("star", "--variety", "veronese:1,4", "--kmax", "6")
    assert code == 0 and report["exit_code"] == 0
    rec = report["records"][0]
    assert tuple(rec) == RECORD_FIELDS
    assert rec["dims"]["h1"] == {k: (3 if k == 2 else 0) for k in range(7)}
    assert rec["dims"]["gaussian_wedge_kernel"] == 3
    assert rec["verdicts"]["star"] == "HOLDS"
    assert report["schema_version"] == SCHEMA_VERSION


def test_star_tetragonal():
    report, code = run_cli("star", "--variety", "tetragonal:2,2,1,b=1,2", "--kmax", "5")
    rec = report["records"][0]
    assert code == 0
    assert {k: v for k, v in rec["dims"]["h1"].items() if k >= 3} == {3: 1, 4: 0, 5: 0}
    assert rec["verdicts"]["star"] == "FAILS"
    assert len(rec["primes"]["3"]) >= 2


def test_unstable_saturation_exits_two():
    # a window longer than the cap can never be met
    report, code = run_cli("star", "--variety", "veronese:1,3", "--kmax", "3", "--window", "5", "--mcap", "2")
    assert code == 2
    assert "UNSTABLE" in report["records"][0]["flags"]


def test_gaussian_and_t2():
    report, code = run_cli("gaussian", "--variety", "genus5")
    assert code == 0 and report["records"][0]["dims"]["corank"] == 10
    report, code = run_cli("t2", "--variety", "pentagonal:g=8", "--kmax", "3")
    assert code == 0 and set(report["records"][0]["dims"]["T2"].values()) == {0}


def test_extend_pentagonal(tmp_path):
    out = tmp_path / "r.json"
    _, code = cli.run(["extend", "--variety", "pentagonal:g=8", "--kmax", "3", "--out", str(out)])
    assert code == 0
    rec = json.loads(out.read_text())["records"][0]
    assert rec["status"] == "EXTENDABLE"
    assert rec["dims"]["first_order"] == 7
    assert all(item["flatness"] == "PASS" and item["generators"] for item in rec["details"]["lifts"])


def test_extend_rejects():
    report, code = run_cli("extend", "--variety", "genus5")
    assert code == 2 and report["records"][0]["status"] == "REJECT"


def test_internal_error_exit_code():
    assert cli.main(["star", "--variety", "nosuch"]) == 1
    assert cli.main(["extend", "--variety", "veronese:1,3"]) == 1


def test_combine_codes():
    assert cli.combine_codes([0, 0]) == 0
    assert cli.combine_codes([0, 2, 3]) == 3
    assert cli.combine_codes([2, 3, 1]) == 1


def test_catalog_runs_in_parallel():
    cfg = RunConfig(jobs=2)
    recs, code = cli.cmd_catalog("ci", cfg)
    assert code == 0
    assert [r["verdicts"]["star"] for r in recs] == ["HOLDS", "HOLDS"]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "conormal", "star", "--variety", "veronese:1,2", "--kmax", "3"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["records"][0]["dims"]["h1"]["2"] == 0


# determinism and cache -------------------------------------------------------


def test_reports_are_deterministic():
    a, _ = run_cli("star", "--variety", "tetragonal:2,1,1,b=1,1", "--kmax", "4", "--seed", "3")
    b, _ = run_cli("star", "--variety", "tetragonal:2,1,1,b=1,1", "--kmax", "4", "--seed", "3")
    assert strip_timings(a) == strip_timings(b)
    assert a["records"][0]["seed"] == 3


def test_cache_hits_do_not_change_dims(tmp_path):
    args = ("star", "--variety", "veronese:1,4", "--kmax", "4", "--cache-dir", str(tmp_path))
    a, _ = run_cli(*args)
    b, _ = run_cli(*args)
    assert a["records"][0]["timings"]["cache"]["hits"] == 0
    assert b["records"][0]["timings"]["cache"]["hits"] > 0
    assert strip_timings(a) == strip_timings(b)


def test_cache_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv(cache_mod.ENV_VAR, str(tmp_path))
    run_cli("star", "--variety", "veronese:1,3", "--kmax", "3")
    assert any(tmp_path.rglob("*.bin"))


def test_corrupt_entry_is_recomputed(tmp_path):
    X = catalog.veronese(1, 4)
    store = cache_mod.SubspaceCache(tmp_path)
    conormal_saturation(X, 2, 2, 6, P)
    cache_mod.save_saturation(store, X, 2, P, 2, 6)
    (path,) = tmp_path.rglob("*.bin")
    blob = bytearray(path.read_bytes())
    blob[len(blob) // 2] ^= 0xFF
    path.write_bytes(bytes(blob))
    Y = catalog.veronese(1, 4)
    assert not cache_mod.load_saturation(store, Y, 2, P, 2, 6)
    a, _ = run_cli("star", "--variety", "veronese:1,4", "--kmax", "2", "--cache-dir", str(tmp_path))
    assert a["records"][0]["dims"]["h1"][2] == 3
    assert cache_mod.load_saturation(store, catalog.veronese(1, 4), 2, P, 2, 6)


def test_cache_round_trip_and_versioning(tmp_path):
    store = cache_mod.SubspaceCache(tmp_path)
    S = Subspace.span(np.array([[1, 2, 3], [0, 1, 5]]), P)
    store.put("fp", "q", 2, P, {"S": S}, {"x": 1})
    header, spaces = store.get("fp", "q", 2, P)
    assert spaces["S"] == S and header["meta"] == {"x": 1}
    blob = cache_mod.encode({"a": 1}, {})
    assert cache_mod.decode(blob)[0] == {"a": 1}
    assert cache_mod.decode(b"XXXX" + blob[4:]) is None
    bumped = blob[:4] + (99).to_bytes(2, "little") + blob[6:]
    assert cache_mod.decode(bumped) is None


def test_concurrent_writers(tmp_path):
    store = cache_mod.SubspaceCache(tmp_path)
    S = Subspace.span(np.eye(4, dtype=np.int64)[:2], P)

    def work():
        for _ in range(20):
            store.put("fp", "q", 1, P, {"S": S})
            got = store.get("fp", "q", 1, P)
            assert got is not None and got[1]["S"] == S

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
