"""One-shot verification suite: each numbered check returns a record with a
pass flag and the measured values, and the CLI aggregates them into an exit
status. The same functions back the acceptance tests.

Configured thresholds live at the top of the module. The exponent checks fit
the upper half of the log-range of each series (fit.upper_half_cutoff): the
m-full counting functions carry a genuine secondary term of relative size
~T^(-1/6) which inflates raw whole-grid slopes, and discarding the low range
is the documented fitting policy for exactly that reason.
"""

from __future__ import annotations

import math
import time
from fractions import Fraction

from . import _oracles, euler, fit, geometry, points
from .arith import SieveTable, m_full_list
from .points import count_points, count_series, count_weak_subfamily_A, get_model

# residual slope tolerance for fixed-exponent fits; the known secondary term
# contributes about 0.07 on the 10^3..10^6 grid, a wrong exponent far more
RESIDUAL_TREND_THRESHOLD = 0.1

CONSTANT_TOL_M1 = 0.01
CONSTANT_TOL_M2 = 0.03
P2_WINDOW = (1.45, 1.55)
A_WINDOW = (0.30, 0.45)
BLOWUP_WINDOW = (2.4, 2.6)
DP_D5_WINDOW = (2.35, 2.65)
POISSON_TOL = 1e-3


def _grid(lo: float, hi: float, per_decade: int = 4) -> list[int]:
    out = []
    e = math.log10(lo)
    while 10**e <= hi * 1.0000001:
        out.append(int(round(10**e)))
        e += 1.0 / per_decade
    return out


def _record(criterion, name, passed, gating=True, **info):
    return {
        "criterion": criterion,
        "name": name,
        "passed": bool(passed),
        "gating": gating,
        "info": info,
    }


def criterion_1(quick: bool = False) -> list[dict]:
    """Line constant check, euclidean height: count/T^a against the residue."""
    T = 10**4 if quick else 10**6
    out = []
    for m, tol in ((1, CONSTANT_TOL_M1), (2, CONSTANT_TOL_M2)):
        t0 = time.time()
        model = get_model("p1", m=m)
        a = 1 + 1 / m
        n = count_points(model, T, "campana", (), "euclidean")
        ratio = n / T**a
        c = euler.leading_constant_p1(m)
        rel = abs(ratio / (c / a) - 1)
        out.append(
            _record(
                1,
                f"p1 constant m={m}",
                rel <= tol,
                T=T,
                count=n,
                ratio=ratio,
                predicted=c / a,
                rel_err=rel,
                tol=tol,
                seconds=round(time.time() - t0, 2),
            )
        )
    return out


def criterion_2(quick: bool = False) -> list[dict]:
    """Three-lines Campana exponent 3/2 and fixed-exponent residual trend.

    Quick mode stops the grid at 10^4, where the secondary term is larger;
    its windows are widened accordingly (slope elevation scales like the
    relative secondary term, ~T^(-1/6))."""
    hi = 10**4 if quick else 10**6
    window = (1.42, 1.60) if quick else P2_WINDOW
    trend_tol = 0.15 if quick else RESIDUAL_TREND_THRESHOLD
    model = get_model("p2_three_lines", m0=2, m1=2, m2=2)
    series = count_series(model, _grid(10**3, hi))
    cut = fit.upper_half_cutoff(series)
    res = fit.fit_series(series, "free_a", min_T=cut)
    res_full = fit.fit_series(series, "free_a")
    trend = fit.residual_trend(series, a=1.5)
    lo_ok, hi_ok = window
    return [
        _record(
            2,
            "p2_three_lines exponent",
            lo_ok <= res.a_hat <= hi_ok,
            fitted_a=res.a_hat,
            fitted_a_full_grid=res_full.a_hat,
            window=window,
            fit_min_T=cut,
            grid_max=hi,
        ),
        _record(
            2,
            "p2_three_lines residual trend",
            abs(trend) <= trend_tol,
            residual_slope=trend,
            threshold=trend_tol,
        ),
    ]


def criterion_3(quick: bool = False) -> list[dict]:
    """Weak subfamily density against 1/zeta(2)^2."""
    target = (6 / math.pi**2) ** 2
    Ts = [10**3, 10**4] if quick else [10**4, 10**5, 10**6]
    table = SieveTable.build(max(Ts))
    ratios = []
    for T in Ts:
        n = count_weak_subfamily_A(T, table)
        ratios.append(n / (T**1.5 * math.log(T)))
    gaps = [abs(r - target) for r in ratios]
    lo, hi = A_WINDOW
    return [
        _record(
            3,
            "subfamily A density",
            lo <= ratios[-1] <= hi,
            ratio=ratios[-1],
            window=A_WINDOW,
            target=target,
            T=Ts[-1],
        ),
        _record(
            3,
            "subfamily A approach",
            all(b < a for a, b in zip(gaps, gaps[1:])),
            ratios=ratios,
            gaps=gaps,
            thresholds=Ts,
        ),
    ]


def criterion_4(quick: bool = False) -> list[dict]:
    """Four-lines super-linear growth and the square-family filter."""
    Ts = [10**3, 3 * 10**3, 10**4] if quick else [10**3, 3 * 10**3, 10**4, 3 * 10**4]
    model = get_model("by_four_lines")
    full = count_series(model, Ts).counts
    filt = count_series(model, Ts, kind="thin-filtered").counts
    dens_full = [n / t for n, t in zip(full, Ts)]
    dens_filt = [n / t for n, t in zip(filt, Ts)]
    increasing = all(b > a for a, b in zip(dens_full, dens_full[1:]))
    slower = all(
        (df2 - df1) < (du2 - du1)
        for (du1, du2, df1, df2) in zip(
            dens_full, dens_full[1:], dens_filt, dens_filt[1:]
        )
    )
    # pointwise filter audit at small T: the removed points are exactly the
    # square-product family, per the independent predicate
    T0 = 60
    removed_oracle = _oracles.oracle_count_tiny(model, T0) - _oracles.oracle_count_tiny(
        model, T0, kind="thin-filtered"
    )
    removed_fast = count_points(model, T0) - count_points(model, T0, "thin-filtered")
    return [
        _record(
            4,
            "by_four_lines N/T increasing",
            increasing,
            thresholds=Ts,
            density=dens_full,
        ),
        _record(
            4,
            "thin filter slows growth",
            slower and removed_oracle == removed_fast,
            density_filtered=dens_filt,
            removed_small_T=removed_fast,
            removed_small_T_oracle=removed_oracle,
        ),
    ]


def criterion_5(quick: bool = False, threads: int = 1) -> list[dict]:
    """Blow-up and del Pezzo exponents against n + 1/m2 and 2 + 1/m3."""
    hi = 10**3 if quick else 10**4
    out = []
    for name, params, window, target in (
        ("blowup_pn", dict(m1=2, m2=2), BLOWUP_WINDOW, 2.5),
        ("dp_d5", {}, DP_D5_WINDOW, 2.5),
    ):
        t0 = time.time()
        model = get_model(name, **params)
        series = count_series(model, _grid(10**2, hi), threads=threads)
        res = fit.fit_series(series, "free_a", min_T=fit.upper_half_cutoff(series))
        lo, hi_w = window
        out.append(
            _record(
                5,
                f"{name} exponent",
                lo <= res.a_hat <= hi_w,
                fitted_a=res.a_hat,
                window=window,
                target=target,
                grid_max=hi,
                seconds=round(time.time() - t0, 2),
            )
        )
    return out


def criterion_6(quick: bool = False) -> list[dict]:
    """Exact invariant table (rational equality throughout)."""
    checks = []

    m = get_model("p2_three_lines", m0=2, m1=2, m2=2)
    checks.append(("p2_three_lines a", geometry.fujita_invariant(m) == Fraction(3, 2)))
    checks.append(("p2_three_lines b", geometry.b_conjectural(m) == 1))

    m = get_model("by_four_lines")
    checks.append(("by_four_lines a", geometry.fujita_invariant(m) == 1))
    checks.append(("by_four_lines b", geometry.b_conjectural(m) == 1))

    for mm in (1, 2, 3, 7):
        m = get_model("p1", m=mm)
        checks.append((f"p1 m={mm} a", geometry.fujita_invariant(m) == Fraction(mm + 1, mm)))
        checks.append((f"p1 m={mm} b", geometry.b_klt(m) == 1))

    m = get_model("pn_hyperplane", m=2, n=2)
    checks.append(("pn_hyperplane a", geometry.fujita_invariant(m) == Fraction(5, 2)))
    checks.append(("pn_hyperplane b", geometry.b_conjectural(m) == 1))

    for name, params in (("blowup_pn", dict(m1=3, m2=2)), ("dp_d5", dict(m3=2))):
        m = get_model(name, **params).log_anticanonical()
        checks.append((f"{name} log-anticanonical a", geometry.fujita_invariant(m) == 1))
        checks.append(
            (f"{name} log-anticanonical b", geometry.b_klt(m) == len(m.components))
        )
        checks.append(
            (f"{name} log-anticanonical b face", geometry.b_conjectural(m) == len(m.components))
        )

    m = get_model("blowup_pn", m1=2, m2=2)
    checks.append(("blowup_pn a", geometry.fujita_invariant(m) == Fraction(5, 2)))
    m = get_model("dp_d5", m3=3)
    checks.append(("dp_d5 a", geometry.fujita_invariant(m) == Fraction(7, 3)))
    checks.append(("dp_d5 b", geometry.b_klt(m) == 1))

    m = get_model("pn_hyperplane", m="dlt", n=2).log_anticanonical()
    checks.append(("integral-point plane b_dlt", geometry.b_dlt(m, ("inf",)) == 1))

    failed = [name for name, ok in checks if not ok]
    return [
        _record(
            6,
            "invariant table",
            not failed,
            checks=len(checks),
            failed=failed,
        )
    ]


def criterion_7(quick: bool = False, threads: int = 1) -> list[dict]:
    """Optimized enumerators against brute-force membership loops, and the
    m-full sieve against the factorization predicate."""
    Tmax = 60 if quick else 200
    ladder = [10, 37, Tmax] if quick else [10, 37, 90, 200]
    bad = []
    t0 = time.time()
    for name in points.zoo_names():
        for mm in (1, 2, 3):
            params = _uniform_weights(name, mm)
            model = get_model(name, **params)
            for T in ladder:
                fast = count_points(model, T, threads=threads)
                slow = _oracles.oracle_count(model, T)
                if fast != slow:
                    bad.append((name, mm, T, fast, slow))
    # euclidean height ladder on the line
    for mm in (1, 2, 3):
        model = get_model("p1", m=mm)
        for T in ladder:
            fast = count_points(model, T, height="euclidean")
            slow = _oracles.oracle_count(model, T, height="euclidean")
            if fast != slow:
                bad.append(("p1-euclid", mm, T, fast, slow))
    rec1 = _record(
        7,
        "enumerators equal brute force",
        not bad,
        ladder=ladder,
        mismatches=bad[:5],
        seconds=round(time.time() - t0, 2),
    )

    lim = 10**5 if quick else 10**6
    table = SieveTable.build(lim)
    spf = table.spf
    bad_m = []
    t0 = time.time()
    min_expo = [0] * (lim + 1)
    for n in range(2, lim + 1):
        m0 = n
        me = lim
        while m0 > 1:
            p = int(spf[m0])
            e = 0
            while m0 % p == 0:
                m0 //= p
                e += 1
            if e < me:
                me = e
        min_expo[n] = me
    for mm in (1, 2, 3, 4):
        from_sieve = m_full_list(lim, mm)
        from_pred = [1] + [n for n in range(2, lim + 1) if min_expo[n] >= mm]
        if from_sieve != from_pred:
            bad_m.append(mm)
    rec2 = _record(
        7,
        "m_full_list equals predicate filter",
        not bad_m,
        limit=lim,
        failed_m=bad_m,
        seconds=round(time.time() - t0, 2),
    )
    return [rec1, rec2]


def _uniform_weights(name: str, m: int) -> dict:
    if name == "p1":
        return dict(m=m)
    if name == "pn_hyperplane":
        return dict(m=m, n=2)
    if name == "p2_three_lines":
        return dict(m0=m, m1=m, m2=m)
    if name == "by_four_lines":
        return dict(m=m)
    if name == "blowup_pn":
        return dict(m1=m, m2=m)
    if name == "dp_d5":
        return {f"m{i}": m for i in range(1, 7)}
    raise KeyError(name)


def criterion_8(quick: bool = False) -> list[dict]:
    """Analytic identities: stratum formula vs closed form, the m = 1 zeta
    quotient, and the oscillatory integral values."""
    worst = 0.0
    for p in euler.primes_up_to(100).tolist():
        for mm in (1, 2, 3):
            for s in (1.6, 2.0, 3.0):
                d = float(euler.denef_local_factor(euler.p1_stratum_data(mm), p, {"D": s}))
                c = float(euler.line_local_factor(p, mm, s))
                worst = max(worst, abs(d - c))
    rec1 = _record(8, "stratum formula vs closed form", worst <= 1e-12, max_abs_diff=worst)

    exact_ok = True
    for p in (2, 3, 5, 7, 97):
        for s in (2, 3, 5):
            lhs = euler.line_local_factor(p, 1, Fraction(s))
            zp = lambda w: 1 / (1 - Fraction(1, p**w))
            if lhs != zp(s - 1) / zp(s):
                exact_ok = False
    rec2 = _record(8, "m=1 factor equals zeta quotient", exact_ok)

    bad = []
    for p in (2, 3, 5):
        for d in (0, 1, 2):
            for i in (1, 2):
                for j in (0, 1) if not quick else (0,):
                    if i * d - j > 2 or (j != 0 and i * d - j < 2):
                        continue
                    val = euler.gauss_like_integral(p, d, i, j)
                    if val == euler.UNKNOWN:
                        continue
                    ref = _oracles.riemann_gauss_integral(p, d, i, j)
                    if abs(complex(val) - ref) > 1e-9:
                        bad.append((p, d, i, j, float(val), ref))
    rec3 = _record(8, "oscillatory integrals vs Riemann sums", not bad, mismatches=bad)
    return [rec1, rec2, rec3]


def criterion_9(quick: bool = False) -> list[dict]:
    """Poisson summation sanity on the line (informational, not gating)."""
    pb, cb = (10**3, 10) if quick else (10**5, 50)
    direct, poisson, disc = euler.zeta_poisson_check(1, 4.0, pb, cb)
    return [
        _record(
            9,
            "poisson check m=1 s=4",
            disc < POISSON_TOL,
            gating=False,
            direct=direct,
            poisson=poisson,
            discrepancy=disc,
            point_bound=pb,
            character_bound=cb,
        )
    ]


ALL_CRITERIA = (
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
    criterion_9,
)


def run_verification(level: str = "quick", threads: int = 1) -> tuple[list[dict], bool]:
    """Run every criterion; returns (records, all gating checks passed)."""
    quick = level == "quick"
    records: list[dict] = []
    for crit in ALL_CRITERIA:
        if crit in (criterion_5, criterion_7):
            records.extend(crit(quick, threads=threads))
        else:
            records.extend(crit(quick))
    ok = all(r["passed"] for r in records if r["gating"])
    return records, ok
