import io
import json

from reliefbench.cli import EXIT_DATA, EXIT_OK, EXIT_USAGE, main


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def test_score_multisurf_ranks_irrelevant_last(fixtures_dir):
    code, out, _ = run("score", "--algorithm", "multisurf", "--endpoint", "Class",
                       str(fixtures_dir / "epistasis8.tsv"))
    assert code == EXIT_OK
    lines = out.splitlines()
    assert lines[0] == "rank\tfeature\tweight"
    assert len(lines) == 4
    assert lines[-1].split("\t")[1] == "A3"
    assert lines[1] == "1\tA1\t0.5"


def test_score_invalid_k_is_usage_error(fixtures_dir):
    code, _, err = run("score", "--algorithm", "relieff:k=0", str(fixtures_dir / "epistasis8.tsv"))
    assert code == EXIT_USAGE
    assert "k must be >= 1" in err


def test_unknown_algorithm_lists_valid_names(fixtures_dir):
    code, _, err = run("score", "-a", "bogus", str(fixtures_dir / "epistasis8.tsv"))
    assert code == EXIT_USAGE
    for name in ("relieff:k=K", "relieff:pct=P", "surf", "surfstar", "multisurfstar",
                 "multisurf", "chi2", "anova_f", "mutual_info"):
        assert name in err


def test_missing_file_and_bad_rows(tmp_path):
    code, _, _ = run("score", "-a", "surf", str(tmp_path / "nope.tsv"))
    assert code == EXIT_DATA
    bad = tmp_path / "bad.tsv"
    bad.write_text("a\tClass\n1\t0\n1\t1\t1\n")
    code, _, err = run("score", "-a", "surf", str(bad))
    assert code == EXIT_DATA and "line 3" in err


def test_missing_subcommand_and_seed():
    assert run()[0] == EXIT_USAGE
    assert run("generate", "--spec", "x.json", "--output", "o.tsv")[0] == EXIT_USAGE


def test_profile(fixtures_dir):
    code, out, _ = run("profile", str(fixtures_dir / "main_effect8.tsv"))
    info = json.loads(out)
    assert code == EXIT_OK
    assert info["endpoint"]["kind"] == "binary"
    assert info["feature_kinds"] == {"A1": "discrete", "A2": "discrete", "A3": "discrete"}


def test_generate_twice_byte_identical(tmp_path):
    spec = tmp_path / "xor2.spec"
    spec.write_text(json.dumps({"kind": "xor", "order": 2, "n": 100, "a": 6}))
    outs = []
    for name in ("a.tsv", "b.tsv"):
        code, _, _ = run("generate", "--spec", str(spec), "--seed", "7",
                         "--output", str(tmp_path / name))
        assert code == EXIT_OK
        outs.append(((tmp_path / name).read_bytes(),
                     (tmp_path / (name + ".manifest")).read_bytes()))
    assert outs[0] == outs[1]
    assert json.loads(outs[0][1])["relevant"]


def test_score_threads_identical_output(tmp_path):
    spec = tmp_path / "s.json"
    spec.write_text(json.dumps({"kind": "xor", "order": 2, "n": 150, "a": 8,
                                "transforms": [{"kind": "missing", "freq": 0.05}]}))
    run("generate", "--spec", str(spec), "--seed", "3", "--output", str(tmp_path / "d.tsv"))
    outs = set()
    for t in ("1", "2", "4"):
        for alg in ("multisurf", "relieff:k=10"):
            code, out, _ = run("score", "-a", alg, "--threads", t, str(tmp_path / "d.tsv"))
            assert code == EXIT_OK
            outs.add((alg, out))
    assert len(outs) == 2


def test_threads_env_default(monkeypatch, fixtures_dir):
    monkeypatch.setenv("RELIEFBENCH_THREADS", "2")
    assert run("score", "-a", "surf", str(fixtures_dir / "epistasis8.tsv"))[0] == EXIT_OK
    monkeypatch.setenv("RELIEFBENCH_THREADS", "lots")
    assert run("score", "-a", "surf", str(fixtures_dir / "epistasis8.tsv"))[0] == EXIT_USAGE


def test_benchmark_writes_reports(tmp_path):
    cfg = tmp_path / "mini.json"
    cfg.write_text(json.dumps({"name": "mini",
                               "generator": {"kind": "xor", "order": 2, "n": 120, "a": 8},
                               "algorithms": ["relieff:k=3"], "replicates": 2}))
    code, _, _ = run("benchmark", "--config", str(cfg), "--seed", "1",
                     "--out-dir", str(tmp_path / "out"))
    assert code == EXIT_OK
    assert (tmp_path / "out" / "mini.power.tsv").exists()
    assert (tmp_path / "out" / "mini.summary").exists()


def test_continuous_endpoint_filter_is_data_error(tmp_path):
    data = tmp_path / "c.tsv"
    rows = ["a\tClass"] + [f"{i % 2}\t{i * 0.37:.3f}" for i in range(15)]
    data.write_text("\n".join(rows) + "\n")
    code, _, err = run("score", "-a", "chi2", str(data))
    assert code == EXIT_DATA and "not applicable" in err


def test_distance_cache_reused(tmp_path, fixtures_dir):
    data = str(fixtures_dir / "epistasis8.tsv")
    first = run("score", "-a", "surfstar", "--distance-cache", str(tmp_path), data)
    assert len(list(tmp_path.glob("*.rbdm"))) == 1
    second = run("score", "-a", "surfstar", "--distance-cache", str(tmp_path), data)
    assert first == second and first[0] == EXIT_OK
