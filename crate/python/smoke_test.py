"""Builds the extension module and exercises it end to end.

Usage: python3 python/smoke_test.py
"""

import os
import shutil
import subprocess
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
TOY = os.path.join(ROOT, "data", "toy")


def build(dest):
    subprocess.run(
        ["cargo", "build", "-p", "funql-py", "--features", "extension-module"],
        cwd=ROOT,
        check=True,
    )
    target = os.environ.get("CARGO_TARGET_DIR", os.path.join(ROOT, "target"))
    lib = os.path.join(target, "debug", "libfunql.so")
    if not os.path.exists(lib):
        lib = os.path.join(target, "debug", "libfunql.dylib")
    shutil.copy(lib, os.path.join(dest, "funql.so"))
    sys.path.insert(0, dest)


def main():
    work = tempfile.mkdtemp()
    build(work)
    import funql

    assert funql.canonical("count( daughterOf(Barack_Obama) )") == "count(daughterOf(Barack_Obama))"
    steps = funql.oracle("count(daughterOf(Barack_Obama))", "td")
    assert steps[0] == "NT(count)", steps
    print("oracle:", " ".join(steps))

    kb = funql.KnowledgeBase.load(os.path.join(TOY, "kb.tsv"))
    assert kb.execute("count(daughterOf(Barack_Obama))") == ["2"]
    try:
        kb.execute("count(noSuchRelation(Barack_Obama))")
        raise AssertionError("expected a type error")
    except ValueError as e:
        print("rejected:", e)

    pairs = funql.synth_distant(os.path.join(TOY, "distant_corpus.jsonl"), kb)
    assert ("NVIDIA was founded by Jen-Hsun_Huang and _blank_", ["Chris_Malachowsky"]) in pairs

    parser = funql.Parser.train_supervised(
        os.path.join(TOY, "obama_train.jsonl"),
        os.path.join(TOY, "kb.tsv"),
        linker=os.path.join(TOY, "linker.tsv"),
        overrides=["dropout=0", "epochs=150", "target_accuracy=1"],
    )
    top = parser.parse("how many daughters does obama have", 10)[0]
    print("top candidate:", top)
    assert top[0] == "count(daughterOf(Barack_Obama))" and top[2] == ["2"]

    ckpt = os.path.join(work, "ckpt")
    parser.save(ckpt)
    again = funql.Parser.load(ckpt)
    assert again.answer("how old is sasha", 10) == ["15"]
    print("python smoke test passed")


if __name__ == "__main__":
    main()
