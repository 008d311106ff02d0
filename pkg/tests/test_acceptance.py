"""Acceptance suite: every numbered verification criterion at full scale.

Each test prints one line per check so the run reads as a scoreboard.

The m = 2 constant comparison in criterion 1 is implemented exactly at its
stated threshold and is a known honest failure: the count at T = 10^6 sits
5.15% below its limit constant (tolerance 3%) because the squarefull
counting function carries a negative secondary term of relative size about
1.09 * T^(-1/6); fitting the ratio over T = 10^6 .. 6.4e7 extrapolates to
1.9713 against the Euler-product constant 1.9696, confirming the constant
itself to 0.1%. Meeting 3% would need T of order 4e7, but the threshold is
pinned. The m = 1 companion check passes with 8e-7 relative error.
"""

import pytest

from campana import verify


def _report(records):
    lines = []
    for r in records:
        status = "PASS" if r["passed"] else "FAIL"
        lines.append(f"criterion {r['criterion']}: {r['name']}: {status}  {r['info']}")
    return "\n".join(lines)


def _run(func, *args, **kw):
    records = func(*args, **kw)
    print()
    print(_report(records))
    return records


@pytest.fixture(scope="module")
def c1():
    return _run(verify.criterion_1)


@pytest.fixture(scope="module")
def c2():
    return _run(verify.criterion_2)


@pytest.fixture(scope="module")
def c3():
    return _run(verify.criterion_3)


@pytest.fixture(scope="module")
def c4():
    return _run(verify.criterion_4)


@pytest.fixture(scope="module")
def c5():
    return _run(verify.criterion_5, threads=2)


@pytest.fixture(scope="module")
def c7():
    return _run(verify.criterion_7, threads=2)


def test_criterion_1_m1_constant_within_1pct(c1):
    r = next(x for x in c1 if "m=1" in x["name"])
    assert r["passed"], r["info"]


def test_criterion_1_m2_constant_within_3pct(c1):
    # faithful to the stated tolerance; fails honestly, see module docstring
    r = next(x for x in c1 if "m=2" in x["name"])
    assert r["passed"], (
        "known shortfall: ratio at T = 1e6 is ~5.2% below the limit "
        f"constant (secondary term ~T^-1/6): {r['info']}"
    )


def test_criterion_2_exponent_window(c2):
    r = next(x for x in c2 if "exponent" in x["name"])
    assert r["passed"], r["info"]


def test_criterion_2_residual_trend(c2):
    r = next(x for x in c2 if "residual" in x["name"])
    assert r["passed"], r["info"]


def test_criterion_3_density_window(c3):
    r = next(x for x in c3 if "density" in x["name"])
    assert r["passed"], r["info"]


def test_criterion_3_ratio_approaches_target(c3):
    r = next(x for x in c3 if "approach" in x["name"])
    assert r["passed"], r["info"]


def test_criterion_4_density_strictly_increasing(c4):
    r = next(x for x in c4 if "increasing" in x["name"])
    assert r["passed"], r["info"]


def test_criterion_4_filter_slows_growth(c4):
    r = next(x for x in c4 if "filter" in x["name"])
    assert r["passed"], r["info"]


def test_criterion_5_blowup_exponent(c5):
    r = next(x for x in c5 if x["name"].startswith("blowup"))
    assert r["passed"], r["info"]


def test_criterion_5_dp_d5_exponent(c5):
    r = next(x for x in c5 if x["name"].startswith("dp_d5"))
    assert r["passed"], r["info"]


def test_criterion_6_invariant_table():
    records = _run(verify.criterion_6)
    assert all(r["passed"] for r in records), _report(records)


def test_criterion_7_enumerators_match_brute_force(c7):
    r = next(x for x in c7 if "brute" in x["name"])
    assert r["passed"], r["info"]


def test_criterion_7_m_full_list_matches_predicate(c7):
    r = next(x for x in c7 if "m_full" in x["name"])
    assert r["passed"], r["info"]


def test_criterion_8_analytic_identities():
    records = _run(verify.criterion_8)
    assert all(r["passed"] for r in records), _report(records)


def test_criterion_9_poisson_logged():
    records = _run(verify.criterion_9)
    r = records[0]
    assert not r["gating"]
    # informational, but with the oracle-fixed sign convention it does hold
    assert r["info"]["discrepancy"] < 1e-3, r["info"]
