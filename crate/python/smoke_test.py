"""Smoke test for the `syl` extension module.

Build first:  cargo build --release -p syl-py
Then run:     python3 python/smoke_test.py
The script copies target/release/libsyl.so to a temporary directory as
syl.so and imports it from there, unless `syl` is already importable.
"""

import importlib
import math
import os
import shutil
import sys
import tempfile

ROOT = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))


def load():
    try:
        return importlib.import_module("syl")
    except ImportError:
        pass
    for name in ("libsyl.so", "libsyl.dylib"):
        lib = os.path.join(ROOT, "target", "release", name)
        if os.path.exists(lib):
            tmp = tempfile.mkdtemp()
            shutil.copy(lib, os.path.join(tmp, "syl.so"))
            sys.path.insert(0, tmp)
            return importlib.import_module("syl")
    sys.exit("build the extension first: cargo build --release -p syl-py")


def main():
    syl = load()

    assert syl.sigma([1.0, 2.0, 3.0], 2) == 11.0
    cone = syl.classify_cone([1.0, 1.0, -0.4], 2)
    assert cone["label"] == "interior", cone
    assert syl.classify_cone([1.0, -2.0, 0.5], 2)["label"] == "outside"
    try:
        syl.sigma([1.0, 2.0], 3)
        raise AssertionError("k > n accepted")
    except syl.DomainError:
        pass

    sol = syl.solve_annulus(1.0, 4.0, 3, 2)
    j = sol.junction
    assert abs(j["r_star"] - 2.0) < 1e-8, j
    assert sol.invariants_hold()
    fit = sol.fit_holder_exponent("outer")
    assert abs(fit["gamma"] - 0.5) < 0.05, fit
    outer = sol.grid("outer")
    assert outer["r"][0] < outer["r"][-1]

    point = sol.junction_point()
    roots = syl.singular_alpha_roots(point, 2)
    assert abs(roots["alpha_plus"] - j["dnu_w_plus"]) < 1e-6, roots
    assert abs(roots["alpha_minus"] - j["dnu_w_minus"]) < 1e-6, roots
    res = syl.theorem_a_residual(point, roots["alpha_plus"], 2)
    assert abs(res["residual"]) < 1e-9 and res["cone_ok"], res

    inp = sol.expansion_input("outer")
    coeff = syl.expansion_coefficient(inp)
    assert coeff["w_star"] < 0 and coeff["p"] == 1.5, coeff
    good = syl.verify_limit(inp)
    assert good["limit_residual"] < 1e-3 and good["cone_ok_near"], good
    bad = syl.verify_limit(inp, p=1.25)
    assert bad["limit_residual"] > 1e-3, bad

    flat = dict(inp, w1=0.0, surface={"kind": "hyperplane"})
    flat["point"] = dict(inp["point"], second_fund=[[0.0, 0.0], [0.0, 0.0]], H_sigma=0.0)
    try:
        syl.expansion_coefficient(flat)
        raise AssertionError("no-coefficient case accepted")
    except syl.InconsistencyError:
        pass

    with tempfile.TemporaryDirectory() as tmp:
        prefix = os.path.join(tmp, "ann")
        sol.save(prefix)
        back = syl.load_solution(prefix)
        assert back.junction == j
        assert back.grid("inner") == sol.grid("inner")

    print("smoke test passed: r_star=%.12f w0=%.12f gamma=%.6f w_star=%.6f"
          % (j["r_star"], j["w0"], fit["gamma"], coeff["w_star"]))
    assert math.isfinite(sol.max_abs_residual())


if __name__ == "__main__":
    main()
