import json

import pytest

from rcc.cli import main
from rcc.corpus import corpus_source


@pytest.fixture(scope="module")
def src(tmp_path_factory):
    path = tmp_path_factory.mktemp("cli") / "corpus.rcc"
    path.write_text(corpus_source())
    return str(path)


def lines(capsys):
    return capsys.readouterr().out.splitlines()


def test_parse(src, capsys):
    assert main(["parse", src]) == 0
    assert any(line.startswith("fun count") for line in lines(capsys))


def test_natify(src, capsys):
    assert main(["natify", src, "-f", "count"]) == 0
    assert lines(capsys)[0].startswith("(def count 3")


@pytest.mark.parametrize("stage", ["imptc", "impwc", "impw"])
def test_compile(src, capsys, stage):
    assert main(["compile", src, "-f", "is_leaf", "--to", stage]) == 0
    assert lines(capsys)[0].startswith("(")


def test_compile_impminus(src, tmp_path, capsys):
    state = tmp_path / "s.json"
    state.write_text(json.dumps({"is_leaf.arg.0": 1}))
    assert main(["lower", src, "-f", "is_leaf", "--to", "impminus", "--state", str(state)]) == 0
    assert "xbit" in capsys.readouterr().out
    assert main(["compile", src, "-f", "is_leaf", "--to", "impminus", "--width", "8"]) == 0


def test_run(tmp_path, capsys):
    prog = tmp_path / "p.sexp"
    prog.write_text("(seq (assign x (add (reg x) (const 2))) (assign y (sub (reg x) (const 9))))")
    state = tmp_path / "s.json"
    state.write_text('{"x": 1}')
    assert main(["run", str(prog), "--lang", "impw", "--state", str(state), "--canonical"]) == 0
    out = json.loads(lines(capsys)[0])
    assert out == {"state": {"x": 3}, "steps": 3}


def test_run_wrong_language(tmp_path, capsys):
    prog = tmp_path / "p.sexp"
    prog.write_text("(recurse)")
    assert main(["run", str(prog), "--lang", "impw"]) == 2
    assert "error" in capsys.readouterr().err


def test_difftest(src, capsys):
    assert main(["difftest", src, "-f", "is_leaf", "--cases", "5"]) == 0
    rows = [json.loads(x) for x in lines(capsys)]
    assert len(rows) == 5 and all(r["mismatches"] == 0 for r in rows)


def test_difftest_mutant(src, capsys):
    assert main(["difftest", src, "-f", "is_leaf", "--cases", "5", "--mutation", "flip_if",
                 "--width", "none"]) == 1
    capsys.readouterr()


def test_bench(src, capsys):
    assert main(["bench", src, "-f", "is_leaf", "--cases", "3"]) == 0
    rows = [json.loads(x) for x in lines(capsys)]
    assert {r["stage"] for r in rows} == {"inline", "bitblast"}
    assert any("corpus_max_ratio" in r for r in rows)


def test_encode_decode(src, capsys):
    assert main(["encode", src, "--type", "List Nat", "[5]"]) == 0
    assert lines(capsys) == ["322"]
    assert main(["decode", src, "--type", "List Nat", "322"]) == 0
    assert lines(capsys) == ["[5]"]
    assert main(["decode", src, "--type", "List Nat", "3"]) == 2
    capsys.readouterr()
    assert main(["decode", src, "--type", "List Nat", "3", "--lenient"]) == 0
