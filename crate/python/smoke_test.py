"""Smoke test for the lnc_py extension.

Build first with `cargo build -p lnc-py --release`; the script loads
target/release/liblnc_py.so (or the debug build, or $LNC_PY_LIB).
"""

import importlib.util
import json
import os
import shutil
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def load():
    candidates = [os.environ.get("LNC_PY_LIB")] + [
        str(ROOT / "target" / profile / name)
        for profile in ("release", "debug")
        for name in ("liblnc_py.so", "liblnc_py.dylib")
    ]
    lib = next((c for c in candidates if c and Path(c).exists()), None)
    if lib is None:
        sys.exit("liblnc_py not found; run `cargo build -p lnc-py --release`")
    # the import machinery wants the module name as the file stem
    tmp = Path(tempfile.mkdtemp()) / "lnc_py.so"
    shutil.copy(lib, tmp)
    spec = importlib.util.spec_from_file_location("lnc_py", tmp)
    mod = importlib.util.module_from_spec(spec)
    spec.loader.exec_module(mod)
    return mod


def main():
    lnc = load()

    f4 = lnc.Field(2, 2)
    assert f4.poly == [1, 1, 1]
    assert f4.mul([0, 1], [0, 1]) == [1, 1]
    assert f4.phi([0, 1]).rows() == [[0, 1], [1, 1]]
    c = f4.companion()
    assert c.pow(3) == lnc.Matrix.identity(2, 2)
    assert (c * c.inverse()) == lnc.Matrix.identity(2, 2)
    assert lnc.Matrix(2, [[1, 1], [1, 1]]).rank() == 1

    swirl = lnc.Network.swirl(6)
    assert swirl.omega == 6
    for q, expect in [(4, False), (5, True), (7, True), (8, False)]:
        assert swirl.check_scalar(q)["solvable"] is expect, q
        assert lnc.corollary1_swirl(6, q)["solvable"] is expect

    comb = lnc.Network.combination(4)
    assert comb.check_scalar(2, brute=True)["solvable"] is False
    verdict = comb.check_scalar(3, brute=True)
    assert verdict["solvable"] is True
    code = verdict["witness"]["code"]
    assert comb.is_solution(code)["is_solution"]
    lifted = lnc.lift_scalar(code)
    assert lifted["dim"] == 1
    summed = comb.direct_sum([code, json.dumps(code)])
    assert summed["dim"] == 2 and comb.is_solution(summed)["is_solution"]
    assert comb.simulate(summed, trials=20, seed=1)["passed"]

    back = lnc.Network.from_json(comb.to_json())
    assert back.to_json() == comb.to_json()

    outcome = lnc.swirl_search(6, 2)
    assert outcome["found"] is False and outcome["exhausted"] is True
    assert lnc.swirl_prefix_count(3, 3) == 2304

    cert = lnc.prop4_certificate(3, 484, 200, 7)
    assert cert["certificate"]["unsolvable"]
    thm5 = lnc.thm5_params(3)
    assert thm5["params"]["a"] == 13 and thm5["params"]["m"] == "1275120"

    try:
        lnc.Field(4, 1)
    except ValueError:
        pass
    else:
        raise AssertionError("GF(4) as a prime field should be rejected")
    # a search cut short reports that it did not finish
    assert lnc.swirl_search(6, 3, time_ms=0)["exhausted"] is False
    try:
        lnc.prop4_certificate(12)
    except lnc.BudgetExceeded:
        pass
    else:
        raise AssertionError("GF(2^64) block should exceed the budget")

    print("lnc_py smoke test passed")


if __name__ == "__main__":
    main()
