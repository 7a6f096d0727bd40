#!/usr/bin/env python3
"""End-to-end smoke test for the msched_py extension module.

Builds nothing itself: run `cargo build -p msched-py` (or `--release`)
first, then `python3 python/smoke_test.py`. The script copies the built
cdylib next to a temp directory under the import name and exercises the
bound functions round trip.
"""

import json
import shutil
import sys
import tempfile
from fractions import Fraction
from pathlib import Path

ROOT = Path(__file__).resolve().parent.parent


def find_cdylib():
    names = ["libmsched_py.so", "msched_py.so", "libmsched_py.dylib", "msched_py.pyd"]
    for profile in ("release", "debug"):
        for name in names:
            p = ROOT / "target" / profile / name
            if p.exists():
                return p
    sys.exit("build the extension first: cargo build -p msched-py")


def main():
    lib = find_cdylib()
    tmp = Path(tempfile.mkdtemp(prefix="msched_py_"))
    shutil.copy2(lib, tmp / "msched_py.so")
    sys.path.insert(0, str(tmp))
    import msched_py

    # structured family with a known exact threshold
    assert msched_py.gap_threshold("restricted", 2) == "4/3"
    print("PASS gap threshold: restricted k=2 -> 4/3")

    inst = msched_py.gap_instance("restricted", 2)
    normalized = msched_py.normalize_instance(inst)
    assert msched_py.normalize_instance(normalized) == normalized
    assert json.loads(normalized)["machines"] == json.loads(inst)["machines"]
    print("PASS instance JSON round trip is idempotent")

    sol = msched_py.solve(inst, "restricted")
    makespan = Fraction(sol["makespan"])
    target = Fraction(sol["target"])
    factor = Fraction(sol["factor"])
    assert makespan <= factor * target, (makespan, factor, target)
    assert msched_py.verify(inst, sol["schedule"]) == []
    print(f"PASS solve+verify: makespan {sol['makespan']} within {sol['factor']} of {sol['target']}")

    opt, opt_schedule = msched_py.oracle_makespan(inst)
    assert Fraction(opt) == 2, opt
    assert msched_py.verify(inst, opt_schedule) == []
    assert makespan >= Fraction(opt)
    print("PASS oracle: exhaustive optimum 2/1, schedule verifies")

    approx = Fraction(msched_py.min_feasible(inst, "restricted"))
    assert approx <= Fraction(4, 3) * (1 + Fraction(1, 10**6))
    assert approx >= Fraction(4, 3)
    print(f"PASS bisection brackets the threshold: {approx}")

    try:
        msched_py.solve(inst, "uniform")
    except ValueError as e:
        assert "does not apply" in str(e), e
        print("PASS scheme/variant mismatch raises ValueError")
    else:
        sys.exit("uniform scheme on a restricted instance should be rejected")

    print("smoke test ok")


if __name__ == "__main__":
    main()
