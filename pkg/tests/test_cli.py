import json

from forcelab.cli import main, run_suite


def test_truth_suite_passes(tmp_path):
    out = tmp_path / "report.json"
    code = main(["truth", "--stage", "2", "--A", "(hf)", "--out", str(out)])
    assert code == 0
    report = json.loads(out.read_text())
    assert report["schema"] == "forcelab-report/1"
    assert report["failures"] == 0
    assert {r["claim"] for r in report["rows"]} == {
        "truth/stage-2/collapse-vs-direct", "truth/stage-2/condition-invariance"}


def test_reports_are_reproducible(tmp_path):
    a, b = tmp_path / "a.json", tmp_path / "b.json"
    for path in (a, b):
        assert main(["translate", "--max-poset", "3", "--seed", "5",
                     "--count", "10", "--out", str(path)]) == 0
    assert a.read_text() == b.read_text()


def test_timings_are_opt_in(tmp_path):
    out = tmp_path / "t.json"
    main(["game", "--count", "5", "--out", str(out)])
    assert "runtime_ms" not in out.read_text()
    main(["game", "--count", "5", "--timings", "--out", str(out)])
    assert "runtime_ms" in out.read_text()


def test_malformed_input_exits_nonzero(tmp_path, capsys):
    bad = tmp_path / "bad.sexp"
    bad.write_text("(poset (elems")
    code = main(["force", "--poset", str(bad)])
    assert code == 2
    assert "error" in capsys.readouterr().err


def test_run_suite_rows_are_sorted():
    report = run_suite("complete", {"seed": 0, "max_poset": 3})
    claims = [r["claim"] for r in report["rows"]]
    assert claims == sorted(claims)
    assert report["failures"] == 0


def test_oracle_suite_small():
    report = run_suite("oracle", {"seed": 0, "max_poset": 3})
    assert report["failures"] == 0
    assert any("forced-iff-true" in r["claim"] for r in report["rows"])


def test_custom_poset_file(tmp_path):
    poset = tmp_path / "fork.sexp"
    poset.write_text("(poset (elems one a b) (one one) (le))")
    report = run_suite("force", {"seed": 0, "poset": str(poset)})
    assert report["failures"] == 0


def test_custom_pool_file(tmp_path):
    pool = tmp_path / "pool.sexp"
    pool.write_text("""
        ; equality is reflexive on the stage
        (forall (x) (= x x))
        (in x y)
        (in-class x A)
    """)
    out = tmp_path / "report.json"
    code = main(["truth", "--stage", "2", "--A", "(hf)",
                 "--pool", str(pool), "--out", str(out)])
    assert code == 0
    assert json.loads(out.read_text())["failures"] == 0
