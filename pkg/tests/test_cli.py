import subprocess
import sys

import pytest

from archrecover.cli import run

from conftest import DATA, read_frozen_pairs


def call(*argv):
    return run([str(a) for a in argv])


@pytest.fixture
def system(tmp_path):
    trace, truth = tmp_path / "t.trace", tmp_path / "truth.txt"
    assert call("synth", "--sizes", "8,8,8", "--methods", 5, "--intra-degree", 5,
                "--inter-prob", 0.03, "--seed", 4, "--trace", trace, "--truth", truth) == 0
    return tmp_path, trace, truth


def pipeline(tmp_path, trace, truth, tag):
    g, c, dot, score = (tmp_path / f"{tag}.{ext}" for ext in ("graph", "clu", "dot", "nmi"))
    assert call("graph", "--trace", trace, "--out", g) == 0
    assert call("cluster", "--graph", g, "--out", c) == 0
    assert call("render", "--graph", g, "--clustering", c, "--out", dot) == 0
    assert call("eval", "--clustering", c, "--truth", truth, "--out", score) == 0
    return [p.read_text() for p in (g, c, dot, score)]


def test_pipeline_recovers_and_is_deterministic(system):
    tmp_path, trace, truth = system
    first = pipeline(tmp_path, trace, truth, "a")
    second = pipeline(tmp_path, trace, truth, "b")
    assert first == second
    graph, clu, dot, score = first
    assert graph.startswith("N c0_0\n")
    assert clu.startswith("L 0 c0_0\n") and "\nP c0_0 0\n" in clu
    assert dot.startswith("digraph architecture {")
    assert float(score.split()[1]) > 0.9


def test_cluster_fixed_k(system):
    tmp_path, trace, _ = system
    g, c = tmp_path / "g", tmp_path / "c"
    call("graph", "--trace", trace, "--out", g)
    assert call("cluster", "--graph", g, "--k", 4, "--no-tfidf", "--out", c) == 0
    labels = {line.split()[2] for line in c.read_text().splitlines() if line.startswith("P ")}
    assert len(labels) == 4


def test_bad_k_is_usage_error(system, capsys):
    tmp_path, trace, _ = system
    g = tmp_path / "g"
    call("graph", "--trace", trace, "--out", g)
    assert call("cluster", "--graph", g, "--k", 0) == 1
    assert call("cluster", "--graph", g, "--k", 25) == 1
    assert "archrecover cluster:" in capsys.readouterr().err


def test_usage_errors():
    assert call("frobnicate") == 1
    assert call("cluster") == 1
    assert call("cluster", "--graph", "g", "--k", 2, "--auto") == 1


def test_missing_input_is_exit_2(tmp_path, capsys):
    assert call("graph", "--trace", tmp_path / "none.trace") == 2
    assert "none.trace" in capsys.readouterr().err


def test_malformed_trace_is_exit_2(tmp_path):
    bad = tmp_path / "bad.trace"
    bad.write_text("C 1 a f\n")
    assert call("graph", "--trace", bad) == 2


def test_graph_with_symbols_and_imports(tmp_path):
    trace = tmp_path / "t.trace"
    trace.write_text("C 1 app.exe 0x1010 lib.dll 0x2000\nC 2 app.exe 0x1010 lib.dll 0x2000\n")
    syms = tmp_path / "syms"
    syms.mkdir()
    (syms / "app.exe.sym").write_text("0x1000 main\n")
    (syms / "lib.dll.sym").write_text("0x2000 work\n")
    imports = tmp_path / "imp.txt"
    imports.write_text("I app.exe kernel32.dll ExitProcess\n")
    out = tmp_path / "g"
    assert call("graph", "--trace", trace, "--symbols", syms, "--imports", imports, "--out", out) == 0
    lines = out.read_text().splitlines()
    assert lines[:3] == ["N app.exe", "N kernel32.dll", "N lib.dll"]
    assert [l for l in lines if l.startswith("E dynamic")] == ["E dynamic app.exe main+0x10 lib.dll work 1"]
    assert sum(l.startswith("E static-import") for l in lines) == 1


def test_imports_command(tmp_path):
    out = tmp_path / "imp"
    assert call("imports", DATA / "cli-32.exe", DATA / "fixture32.exe", "--out", out) == 0
    lines = out.read_text().splitlines()
    got = {(f[2], f[3]) for f in (l.split() for l in lines) if f[1] == "cli-32.exe"}
    assert got == read_frozen_pairs(DATA / "cli-32.objdump-imports.txt")
    assert "I fixture32.exe kernel32.dll ExitProcess" in lines


def test_imports_not_pe(tmp_path):
    junk = tmp_path / "junk.exe"
    junk.write_bytes(b"hello")
    assert call("imports", junk) == 2


def test_overlap_command(tmp_path):
    for rel in ["s1/bin/Foo.dll", "s1/x/FOO.DLL", "s1/readme.txt", "s2/foo.dll", "s2/bar.exe"]:
        p = tmp_path / rel
        p.parent.mkdir(parents=True, exist_ok=True)
        p.write_bytes(b"")
    out = tmp_path / "m.tsv"
    assert call("overlap", tmp_path / "s1", tmp_path / "s2", "--out", out) == 0
    assert out.read_text() == "\ts1\ts2\ns1\t2\t1\ns2\t1\t2\n"
    assert call("overlap", tmp_path / "s1", tmp_path / "s2", "--binary-only", "--out", out) == 0
    assert out.read_text() == "\ts1\ts2\ns1\t1\t1\ns2\t1\t2\n"
    assert call("overlap", tmp_path / "missing") == 2


def test_overlay_and_render(tmp_path):
    trace = tmp_path / "all.trace"
    trace.write_text("C 1 a f b g\nC 2 a f c h\nC 3 c f d g\n")
    use = tmp_path / "load.trace"
    use.write_text("C 1 a f b g\n")
    g, c, o, dot = (tmp_path / n for n in ("g", "c", "o", "dot"))
    call("graph", "--trace", trace, "--out", g)
    call("cluster", "--graph", g, "--k", 2, "--out", c)
    assert call("overlay", "--graph", g, "--clustering", c, "--usecase", f"load={use}", "--out", o) == 0
    lines = o.read_text().splitlines()
    assert [l.split()[1] for l in lines] == ["a", "b", "c", "d"]
    assert lines[2].endswith("0.0000") and lines[3].endswith("0.0000")
    assert "load" in lines[0]
    assert call("render", "--graph", g, "--clustering", c, "--overlay", o, "--out", dot) == 0
    assert "<font" in dot.read_text()
    assert call("overlay", "--graph", g, "--clustering", c, "--usecase", "nameonly") == 1


def test_render_redact_and_bad_options(system):
    tmp_path, trace, _ = system
    g, c, dot = tmp_path / "g", tmp_path / "c", tmp_path / "d"
    call("graph", "--trace", trace, "--out", g)
    call("cluster", "--graph", g, "--out", c)
    assert call("render", "--graph", g, "--clustering", c, "--redact", "--out", dot) == 0
    assert "c0_" not in dot.read_text()
    assert call("render", "--graph", g, "--clustering", c, "--buckets", 0) == 1


def test_eval_against_itself(tmp_path, system):
    _, _, truth = system
    clu = tmp_path / "as_p"
    clu.write_text(truth.read_text().replace("G ", "P "))
    out = tmp_path / "n"
    assert call("eval", "--clustering", clu, "--truth", truth, "--out", out) == 0
    assert out.read_text() == "nmi 1.000000\n"


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "archrecover", "--help"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert "synth" in proc.stdout
