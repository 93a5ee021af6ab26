"""Smoke test for the macrorule Python bindings.

Build and install first:
    pip install --no-build-isolation -e crates/python
"""

from pathlib import Path

import macrorule

CORPUS = Path(__file__).resolve().parent.parent / "crates" / "core" / "corpus"


def read(name):
    return (CORPUS / name).read_text()


def main():
    out = macrorule.compile(read("memberp_v1.mr"), "memberp_v1.mr")
    assert not out.has_errors and out.diagnostics == []
    assert [r.pretty() for r in out.rules] == [
        "(memberp x nil) = false",
        "(memberp x (cons y m)) = true <== x = y",
        "(memberp x (cons y m)) = (memberp x m) <== x # y",
    ]
    assert out.rules[2].conditions == ["x # y"]

    # The canonical text reads back to the same system.
    back = macrorule.RuleSystem.parse(out.system.print())
    assert back.equivalent(out.system) and len(back) == 3

    # Random redex order gives the same rules.
    for seed in range(20):
        assert macrorule.compile(read("trees.mr"), seed=seed).system.equivalent(
            macrorule.compile(read("trees.mr")).system
        )

    arith = macrorule.compile(read("arith.mr")).system
    r = arith.normalize("(pot (s (s 0)) (s (s 0)))")
    assert r.result == "(s (s (s (s 0))))" and r.complete, r

    r = macrorule.compile(read("equal_l_or.mr")).system.normalize(
        "(equal-l nil)", max_steps=10_000, max_depth=1_000_000
    )
    assert not r.complete and r.steps_used == 10_000, r

    ds = macrorule.check(read("fixtures/shift_capture.mr"), "shift_capture.mr")
    assert [(d.severity, d.code, d.line) for d in ds] == [("ERROR", "match-shift-capture", 8)]
    assert ds[0].is_error and "(match* l (cons y k))" in ds[0].message

    trace, results = macrorule.expand(read("p.mr"), 0)
    assert trace.startswith("STEP 1 match-removal @")
    assert results == ["(macro-rule (p (s u)) u)"]

    assert macrorule.read_sexprs("(a (b c)) d") == [["a", ["b", "c"]], "d"]

    try:
        macrorule.compile("(macro-rule (f x)")
    except macrorule.MacroRuleError as e:
        assert "syntax" in str(e)
    else:
        raise AssertionError("unbalanced input accepted")

    print("python smoke test: ok")


if __name__ == "__main__":
    main()
