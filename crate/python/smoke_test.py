"""Smoke test for the extension module.

Run python/build_extension.sh first, then `python3 python/smoke_test.py`
(or pytest on this file).
"""

import json
import math
import os
import sys

sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import symortho  # noqa: E402


def test_no_on_residuals():
    dims, data = symortho.case_tensor("thm-no-on")
    assert dims == [2, 2, 2, 2]
    report = json.loads(symortho.approx(dims, data, "son", 2, starts=16))
    assert abs(report["residual"] - math.sqrt(7 / 4)) < 1e-4
    lo, hi = symortho.oracle(dims, data, "con", 2)
    assert hi - lo <= 1e-7
    # ‖T‖² = 4 and the CON_2 residual is √2.
    assert abs(math.sqrt(4 - lo) - math.sqrt(2)) < 1e-4


def test_reported_decomposition_re_validates():
    dims, data = symortho.random_symmetric(3, 3, seed=5)
    report = json.loads(symortho.approx(dims, data, "pcon", 2, modes=[0, 2], starts=8, seed=1))
    decomposition = json.dumps(report["decomposition"])
    assert symortho.check(decomposition, "pcon", modes=[0, 2])
    again = json.loads(symortho.approx(dims, data, "pcon", 2, modes=[0, 2], starts=8, seed=1))
    assert again == report


def test_spectral_norm_of_a_rank_one_tensor():
    v = [0.6, 0.8]
    data = [-2.5 * a * b * c for a in v for b in v for c in v]
    assert abs(symortho.spectral_norm([2, 2, 2], data, starts=4) - 2.5) < 1e-9


def test_case_verification_and_errors():
    assert "thm-main" in symortho.case_ids()
    passed, report = symortho.verify_case("ex-singular")
    assert passed and json.loads(report)["id"] == "ex-singular"
    for bad in (
        lambda: symortho.case_tensor("nope"),
        lambda: symortho.approx([2, 2], [1.0, 2.0, 3.0], "con", 1),
        lambda: symortho.approx([2, 2, 2], [0.0] * 8, "pcon", 1),
        lambda: symortho.approx([2, 2, 2], [1.0] * 8, "con", 3),
    ):
        try:
            bad()
        except ValueError:
            continue
        raise AssertionError("expected ValueError")


if __name__ == "__main__":
    tests = [f for name, f in sorted(globals().items()) if name.startswith("test_")]
    for t in tests:
        t()
        print(f"ok {t.__name__}")
    print(f"{len(tests)} passed")
