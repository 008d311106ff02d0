"""Independent reference implementations used to validate the fast paths.

Nothing here shares counting machinery with points.count_points: membership
is evaluated pointwise on explicit coordinate grids, and the p-adic integrals
are Riemann sums over unit groups. Slow on purpose; keep T small.
"""

from __future__ import annotations

import cmath
import math
from math import gcd, isqrt

import numpy as np

from . import points as pts
from .arith import is_m_full
from .points import is_campana, is_weak_campana, thin_filter_by


def _member_tables(model, T, S):
    """Stripped membership table per component id, sized for chain values."""
    size = 3 * T + 1
    out = {}
    for c in model.components:
        vals = np.arange(size, dtype=np.int64)
        for p in S:
            while True:
                mask = (vals % p == 0) & (vals > 0)
                if not mask.any():
                    break
                vals[mask] //= p
        if c.weight.is_dlt:
            tab = vals == 1
        else:
            base = np.zeros(size, dtype=bool)
            for v in _mfull_brute(size - 1, c.weight.m):
                base[v] = True
            tab = base[vals]
        tab[0] = False
        out[c.id] = tab
    return out


def _mfull_brute(limit: int, m: int):
    """m-full values by factoring every integer (no power enumeration)."""
    out = []
    for n in range(1, limit + 1):
        if is_m_full(n, m):
            out.append(n)
    return out


def oracle_count(model, T: int, kind: str = "campana", S=(), height: str = "naive") -> int:
    """Brute-force membership loop over all canonical open-orbit points."""
    backend = model.backend
    S = tuple(sorted(set(S)))
    if backend == "p1":
        return _oracle_p1(model, T, S, height)
    if height != "naive":
        raise ValueError("euclidean oracle exists for p1 only")
    if backend == "pn_hyperplane":
        return _oracle_pn(model, T, S)
    if backend in ("p2_three_lines", "by_four_lines"):
        return _oracle_plane_lines(model, T, S, kind)
    if backend == "blowup_pn":
        return _oracle_blowup(model, T, S)
    if backend == "dp_d5":
        return _oracle_dp_d5(model, T, S)
    raise ValueError(backend)


def _oracle_p1(model, T, S, height):
    (c,) = model.components
    tabs = _member_tables(model, T, S)["D"]
    total = 0
    for q in range(1, T + 1):
        if not tabs[q]:
            continue
        P = isqrt(T * T - q * q) if height == "euclidean" else T
        p = np.arange(-P, P + 1, dtype=np.int64)
        total += int((np.gcd(p, q) == 1).sum())
    return total


def _oracle_pn(model, T, S):
    tab = _member_tables(model, T, S)["D"]
    n = model.dim
    if n not in (2, 3):
        raise ValueError("pn oracle implemented for n = 2, 3")
    total = 0
    ax = np.arange(-T, T + 1, dtype=np.int64)
    for q in range(1, T + 1):
        if not tab[q]:
            continue
        g = np.gcd(np.gcd(q, ax)[:, None], ax[None, :])
        if n == 2:
            total += int((g == 1).sum())
        else:
            g3 = np.gcd(g[:, :, None], ax[None, None, :])
            total += int((g3 == 1).sum())
    return total


def _oracle_plane_lines(model, T, S, kind):
    tabs = _member_tables(model, T, S)
    four = model.backend == "by_four_lines"
    ids = model.ids
    ax = np.concatenate([np.arange(-T, 0), np.arange(1, T + 1)]).astype(np.int64)
    total = 0
    for x0 in range(1, T + 1):
        if not tabs[ids[0]][x0]:
            continue
        ok1 = tabs[ids[1]][np.abs(ax)]
        ok2 = tabs[ids[2]][np.abs(ax)]
        ok = ok1[:, None] & ok2[None, :]
        if four:
            w = x0 + ax[:, None] + ax[None, :]
            aw = np.abs(w)
            nz = w != 0
            wofs = np.where(nz, aw, 1)
            ok &= nz & tabs[ids[3]][wofs]
        g = np.gcd(np.gcd(x0, ax)[:, None], np.abs(ax)[None, :])
        ok &= g == 1
        if kind == "thin-filtered":
            prod_ = (-x0) * ax[:, None] * ax[None, :]
            r = np.sqrt(np.clip(prod_, 0, None).astype(np.float64)).astype(np.int64)
            sq = (prod_ >= 0) & (
                (r * r == prod_) | ((r + 1) * (r + 1) == prod_) | ((r - 1) * (r - 1) == prod_)
            )
            ok &= ~sq
        total += int(ok.sum())
    return total


def _oracle_blowup(model, T, S):
    tabs = _member_tables(model, T, S)
    ax = np.arange(-T, T + 1, dtype=np.int64)
    total = 0
    for x0 in range(1, T + 1):
        g = np.gcd(x0, np.abs(ax))
        ok = tabs["E"][g] & tabs["D2"][x0 // g]
        gall = np.gcd(g[:, None], np.abs(ax)[None, :])
        total += int((ok[:, None] & (gall == 1)).sum())
    return total


def _oracle_dp_d5(model, T, S):
    tabs = _member_tables(model, T, S)
    x1s = np.concatenate([np.arange(-T, 0), np.arange(1, T + 1)]).astype(np.int64)
    ax1 = np.abs(x1s)
    x2s = x1s
    total = 0
    for x0 in range(1, T + 1):
        x0a = np.full_like(x1s, x0)

        def f(y):
            return y // np.gcd(np.abs(y), ax1)

        def g(y):
            return x1s // np.gcd(np.abs(y), ax1)

        f1 = f(x0a)
        f2 = f(f1)
        f3 = f(f2)
        t = f3 - g(f2)
        ft = f(t)
        ok = (
            tabs["E1"][np.gcd(f2, np.abs(g(t)))]
            & tabs["E2"][np.gcd(np.abs(t), np.abs(g(ft)))]
            & tabs["E3"][f3]
            & tabs["E4"][np.gcd(f1, np.abs(g(f2)))]
            & tabs["E5"][np.gcd(x0a, np.abs(g(f1)))]
            & tabs["E6"][np.gcd(ax1, np.abs(ft))]
        )
        h = np.gcd(x0, ax1)
        gall = np.gcd(h[:, None], np.abs(x2s)[None, :])
        total += int((ok[:, None] & (gall == 1)).sum())
    return total


def oracle_count_tiny(model, T: int, kind: str = "campana", S=(), height: str = "naive") -> int:
    """Pure-python loop through the point predicates; very small T only."""
    total = 0
    for pt in pts._iter_points(model, T):
        if height == "euclidean":
            q, p = pt.coords
            if p * p + q * q > T * T:
                continue
        if kind == "campana" and is_campana(model, pt, S):
            total += 1
        elif kind == "weak" and is_weak_campana(model, pt, S):
            total += 1
        elif kind == "thin-filtered" and is_campana(model, pt, S) and not thin_filter_by(pt):
            total += 1
    return total


def brute_subfamily_A(T: int) -> int:
    """Exhaustive triple loop for the square/pair-square family."""
    total = 0
    for x0 in range(1, T + 1):
        if isqrt(x0) ** 2 != x0:
            continue
        for x1 in range(1, T + 1):
            g01 = gcd(x0, x1)
            for x2 in range(1, T + 1):
                v = x1 * x2
                if isqrt(v) ** 2 == v and gcd(g01, x2) == 1:
                    total += 1
    return total


# ---------------------------------------------------------------------------
# p-adic Riemann sums


def _psi_frac(r: float) -> complex:
    return cmath.exp(2j * math.pi * (r % 1.0))


def riemann_character_factor(p: int, m: int, s: float, k: int, in_S: bool = False,
                             depth: int = 3, shells: int = 4) -> complex:
    """Direct shell-by-shell sum of the local character-twisted height integral.

    Shell |x| = p^i contributes p^{-i(s-1)} times the unit-group average of
    the phase, evaluated as a Riemann sum over units modulo p^(i - k + depth).
    """
    if in_S:
        m = 1
    total = complex(1.0)
    for i in range(max(m, 1), k + shells + 1):
        M = max(depth, i - k)
        pM = p**M
        step = p ** (i - k) if i - k > 0 else 1
        acc = 0j
        for u in range(pM):
            if u % p == 0:
                continue
            acc += _psi_frac(u / step) if i - k > 0 else 1.0
        total += p ** (-i * (s - 1)) * (acc / pM)
    return total


def riemann_gauss_integral(p: int, d: int, i: int, j: int, depth: int = 3) -> complex:
    """Riemann sum of the unit-group oscillatory integral with phase
    pi^(-id+j) x^d, over units modulo p^depth (depth must cover id - j)."""
    shift = i * d - j
    M = max(depth, shift)
    pM = p**M
    acc = 0j
    for x in range(pM):
        if x % p == 0:
            continue
        if shift > 0:
            acc += _psi_frac((pow(x, d, p**shift)) / p**shift)
        else:
            acc += 1.0
    return acc / pM
