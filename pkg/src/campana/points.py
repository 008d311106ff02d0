"""Model zoo: membership predicates and height-bounded point counting.

Each zoo model pairs the combinatorial boundary data (geometry.OrbifoldModel)
with an enumeration backend. Membership is decided through exact intersection
multiplicities n_p(D_a, P), computed as p-adic valuations of model-specific
integer expressions; the optimized counters never enumerate full coordinate
boxes and are checked against brute-force membership loops in the tests.
"""

from __future__ import annotations

import csv
import io
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from fractions import Fraction
from math import gcd, isqrt, prod

import numpy as np

from . import arith
from .arith import SieveTable, coprime_count, factorize, is_perfect_square, m_full_table
from .geometry import BoundaryComponent, ClemensSpec, OrbifoldModel, Weight

__all__ = [
    "PrimitivePoint",
    "IntersectionProfile",
    "CountSeries",
    "zoo_names",
    "get_model",
    "intersection_profile",
    "is_campana",
    "is_weak_campana",
    "thin_filter_by",
    "count_points",
    "count_weak_subfamily_A",
    "count_series",
    "WEAK_BRUTE_LIMIT",
]

# Certified range for brute-force-backed counts (kind="weak" on most models).
WEAK_BRUTE_LIMIT = 200
_WEAK_PER_POINT_LIMIT = 60

KINDS = ("campana", "weak", "thin-filtered")
HEIGHTS = ("naive", "euclidean")


def _iroot(n: int, k: int) -> int:
    """Largest r with r**k <= n."""
    if k == 1:
        return n
    r = int(round(n ** (1.0 / k)))
    while r**k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


@dataclass(frozen=True)
class PrimitivePoint:
    """Primitive integer coordinates with the first nonzero one positive."""

    coords: tuple[int, ...]

    def __post_init__(self):
        if not self.coords or all(c == 0 for c in self.coords):
            raise ValueError("point must have a nonzero coordinate")
        g = 0
        for c in self.coords:
            g = gcd(g, c)
        if g != 1:
            raise ValueError(f"coordinates {self.coords} are not coprime")
        lead = next(c for c in self.coords if c != 0)
        if lead < 0:
            raise ValueError("canonical representative has first nonzero coordinate positive")

    @classmethod
    def canonical(cls, coords) -> "PrimitivePoint":
        g = 0
        for c in coords:
            g = gcd(g, c)
        if g == 0:
            raise ValueError("zero tuple")
        coords = tuple(c // g for c in coords)
        lead = next(c for c in coords if c != 0)
        if lead < 0:
            coords = tuple(-c for c in coords)
        return cls(coords)


@dataclass(frozen=True)
class IntersectionProfile:
    """Map (prime, component id) -> n_p > 0; absent entries mean zero."""

    entries: dict[tuple[int, str], int]

    def primes(self) -> set[int]:
        return {p for p, _ in self.entries}

    def at(self, p: int, cid: str) -> int:
        return self.entries.get((p, cid), 0)


@dataclass
class CountSeries:
    thresholds: list[float]
    counts: list[int]
    model: str
    kind: str
    height: str

    def __post_init__(self):
        if sorted(self.thresholds) != list(self.thresholds):
            raise ValueError("thresholds must be ascending")
        if any(b < a for a, b in zip(self.counts, self.counts[1:])):
            raise ValueError("counts must be non-decreasing")

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["T", "N", "model", "kind", "height"])
        for t, n in zip(self.thresholds, self.counts):
            w.writerow([_fmt_T(t), n, self.model, self.kind, self.height])
        return buf.getvalue()

    def to_json_records(self) -> list[dict]:
        return [
            {"T": t, "N": n, "model": self.model, "kind": self.kind, "height": self.height}
            for t, n in zip(self.thresholds, self.counts)
        ]

    @classmethod
    def from_csv(cls, text: str) -> "CountSeries":
        rows = list(csv.reader(io.StringIO(text)))
        if not rows or rows[0] != ["T", "N", "model", "kind", "height"]:
            raise ValueError("bad CountSeries csv header")
        body = rows[1:]
        if not body:
            return cls([], [], "", "", "")
        return cls(
            thresholds=[float(r[0]) for r in body],
            counts=[int(r[1]) for r in body],
            model=body[0][2],
            kind=body[0][3],
            height=body[0][4],
        )


def _fmt_T(t: float) -> str:
    return str(int(t)) if float(t).is_integer() else repr(t)


# ---------------------------------------------------------------------------
# model zoo

_REAL = "inf"


def _clemens_complete(ids, edges) -> ClemensSpec:
    return ClemensSpec.from_faces([{i} for i in ids] + [set(e) for e in edges])


def _zoo_p1(m=2) -> OrbifoldModel:
    return OrbifoldModel(
        name="p1",
        dim=1,
        components=(
            BoundaryComponent("D", _weight(m), Fraction(2), Fraction(1), (1,)),
        ),
        pic_rank=1,
        clemens={_REAL: _clemens_complete(["D"], [])},
        adjoint_rigid=True,
        backend="p1",
    )


def _zoo_pn_hyperplane(m=2, n=2) -> OrbifoldModel:
    return OrbifoldModel(
        name=f"pn_hyperplane" if n == 2 else f"pn_hyperplane_n{n}",
        dim=n,
        components=(
            BoundaryComponent("D", _weight(m), Fraction(n + 1), Fraction(1), (1,)),
        ),
        pic_rank=1,
        clemens={_REAL: _clemens_complete(["D"], [])},
        adjoint_rigid=True,
        backend="pn_hyperplane",
    )


def _zoo_p2_three_lines(m0=2, m1=2, m2=2) -> OrbifoldModel:
    ids = ["D0", "D1", "D2"]
    return OrbifoldModel(
        name="p2_three_lines",
        dim=2,
        components=tuple(
            BoundaryComponent(i, _weight(m), Fraction(1), Fraction(1, 3), (1,))
            for i, m in zip(ids, (m0, m1, m2))
        ),
        pic_rank=1,
        clemens={_REAL: _clemens_complete(ids, [(a, b) for a in ids for b in ids if a < b])},
        adjoint_rigid=True,
        backend="p2_three_lines",
    )


def _zoo_by_four_lines(m=2) -> OrbifoldModel:
    ids = ["D0", "D1", "D2", "D3"]
    edges = [(a, b) for a in ids for b in ids if a < b]
    return OrbifoldModel(
        name="by_four_lines",
        dim=2,
        components=tuple(
            BoundaryComponent(i, _weight(m), Fraction(3, 4), Fraction(1, 4), (1,))
            for i in ids
        ),
        pic_rank=1,
        clemens={_REAL: _clemens_complete(ids, edges)},
        adjoint_rigid=True,
        backend="by_four_lines",
    )


def _zoo_blowup_pn(m1=2, m2=2, n=2) -> OrbifoldModel:
    return OrbifoldModel(
        name="blowup_pn" if n == 2 else f"blowup_pn_n{n}",
        dim=n,
        components=(
            BoundaryComponent("E", _weight(m1), Fraction(n), Fraction(1), (1, 0)),
            BoundaryComponent("D2", _weight(m2), Fraction(n + 1), Fraction(1), (0, 1)),
        ),
        pic_rank=2,
        clemens={_REAL: _clemens_complete(["E", "D2"], [("E", "D2")])},
        adjoint_rigid=True,
        backend="blowup_pn",
    )


# Boundary classes of the D5 quartic del Pezzo desingularization, in the basis
# of the six boundary curves: -K = 6 E1 + 5 E2 + 3 E3 + 4 E4 + 2 E5 + 4 E6 and
# the pullback of the plane hyperplane class is 3 E1 + 3 E2 + E3 + 2 E4 + E5 + 3 E6.
_DP_D5_RHO = (6, 5, 3, 4, 2, 4)
_DP_D5_LAMBDA = (3, 3, 1, 2, 1, 3)
_DP_D5_EDGES = [("E1", "E3"), ("E1", "E4"), ("E4", "E5"), ("E1", "E2"), ("E2", "E6")]


def _zoo_dp_d5(m1=2, m2=2, m3=2, m4=2, m5=2, m6=2) -> OrbifoldModel:
    ids = [f"E{i}" for i in range(1, 7)]
    ms = (m1, m2, m3, m4, m5, m6)
    comps = tuple(
        BoundaryComponent(
            ids[i],
            _weight(ms[i]),
            Fraction(_DP_D5_RHO[i]),
            Fraction(_DP_D5_LAMBDA[i]),
            tuple(int(i == j) for j in range(6)),
        )
        for i in range(6)
    )
    return OrbifoldModel(
        name="dp_d5",
        dim=2,
        components=comps,
        pic_rank=6,
        clemens={_REAL: _clemens_complete(ids, _DP_D5_EDGES)},
        adjoint_rigid=True,
        backend="dp_d5",
    )


def _weight(m) -> Weight:
    if m in ("dlt", None):
        return Weight.dlt()
    return Weight.klt(int(m))


_ZOO = {
    "p1": _zoo_p1,
    "pn_hyperplane": _zoo_pn_hyperplane,
    "p2_three_lines": _zoo_p2_three_lines,
    "by_four_lines": _zoo_by_four_lines,
    "blowup_pn": _zoo_blowup_pn,
    "dp_d5": _zoo_dp_d5,
}

ZOO_NOTES = {
    "p1": "line with one weighted point; m-full denominators",
    "pn_hyperplane": "projective n-space with one weighted hyperplane",
    "p2_three_lines": "plane with the three coordinate lines at weight m",
    "by_four_lines": "plane with four half-weight lines and a thin square family",
    "blowup_pn": "blow-up of the plane along x0 = x1 = 0, weighted exceptional pair",
    "dp_d5": "desingularized D5 quartic del Pezzo, six-curve boundary chain",
}


def zoo_names() -> list[str]:
    return sorted(_ZOO)


def get_model(name: str, **params) -> OrbifoldModel:
    if name not in _ZOO:
        raise KeyError(f"unknown model {name!r}; available: {', '.join(zoo_names())}")
    return _ZOO[name](**params)


# ---------------------------------------------------------------------------
# intersection profiles


def _vp(n: int, table: SieveTable | None) -> dict[int, int]:
    if n in (1, -1):
        return {}
    return dict(factorize(abs(n), table).factors)


def _dp_d5_chain_values(x0: int, x1: int) -> dict[str, int]:
    """The six integer gcd-chain values whose valuations are the n_p(E_i)."""
    ax1 = abs(x1)

    def f(y):
        return y // gcd(abs(y), ax1)

    def g(y):
        return x1 // gcd(abs(y), ax1)

    f1 = f(x0)
    f2 = f(f1)
    f3 = f(f2)
    t = f3 - g(f2)
    ft = f(t)
    return {
        "E1": gcd(f2, abs(g(t))),
        "E2": gcd(abs(t), abs(g(ft))),
        "E3": f3,
        "E4": gcd(f1, abs(g(f2))),
        "E5": gcd(x0, abs(g(f1))),
        "E6": gcd(ax1, abs(ft)),
    }


def _chain_values(model: OrbifoldModel, point: PrimitivePoint) -> dict[str, int]:
    """Integer expression per component whose p-adic valuation is n_p."""
    x = point.coords
    backend = model.backend
    if backend in ("p1", "pn_hyperplane"):
        if x[0] == 0:
            raise ValueError("point lies on the boundary hyperplane")
        return {"D": abs(x[0])}
    if backend == "p2_three_lines":
        if 0 in x:
            raise ValueError("point lies on a boundary line")
        return {f"D{i}": abs(x[i]) for i in range(3)}
    if backend == "by_four_lines":
        s = x[0] + x[1] + x[2]
        if 0 in x or s == 0:
            raise ValueError("point lies on a boundary line")
        return {
            "D0": abs(x[0]),
            "D1": abs(x[1]),
            "D2": abs(x[2]),
            "D3": abs(s),
        }
    if backend == "blowup_pn":
        if x[0] == 0:
            raise ValueError("point lies on the boundary")
        g = gcd(abs(x[0]), abs(x[1]))
        return {"E": g, "D2": abs(x[0]) // g}
    if backend == "dp_d5":
        if x[0] == 0 or x[1] == 0 or x[2] == 0:
            raise ValueError("point lies on the boundary")
        return _dp_d5_chain_values(abs(x[0]), x[1])
    raise ValueError(f"unknown backend {backend!r}")


def intersection_profile(
    model: OrbifoldModel, point: PrimitivePoint, table: SieveTable | None = None
) -> IntersectionProfile:
    """Exact valuation map (p, component) -> n_p(D_a, P) for open-orbit points."""
    entries: dict[tuple[int, str], int] = {}
    for cid, value in _chain_values(model, point).items():
        for p, e in _vp(value, table).items():
            entries[(p, cid)] = e
    return IntersectionProfile(entries)


def _strip_primes(n: int, S) -> int:
    for p in S:
        while n % p == 0:
            n //= p
    return n


def is_campana(model: OrbifoldModel, point: PrimitivePoint, S=()) -> bool:
    """Componentwise membership: n_p = 0 or n_p >= m_a at every prime off S;
    DLT components require n_p = 0 off S."""
    values = _chain_values(model, point)
    for c in model.components:
        v = _strip_primes(values[c.id], tuple(S))
        if c.weight.is_dlt:
            if v != 1:
                return False
        elif not arith.is_m_full(v, c.weight.m):
            return False
    return True


def is_weak_campana(model: OrbifoldModel, point: PrimitivePoint, S=()) -> bool:
    """Aggregated membership: at every prime off S meeting the weighted
    boundary, sum eps_a n_p <= (sum n_p) - 1."""
    profile = intersection_profile(model, point)
    eps = {c.id: c.weight.epsilon for c in model.components}
    active = {c.id for c in model.components if eps[c.id] != 0}
    Sset = set(S)
    for p in profile.primes():
        if p in Sset:
            continue
        total = sum(profile.at(p, cid) for cid in active)
        weighted = sum(eps[cid] * profile.at(p, cid) for cid in active)
        if weighted > 0 and weighted > total - 1:
            return False
    return True


def thin_filter_by(point: PrimitivePoint) -> bool:
    """True iff -x0*x1*x2 is a perfect square (four-lines thin family)."""
    x0, x1, x2 = point.coords[:3]
    return is_perfect_square(-x0 * x1 * x2)


# ---------------------------------------------------------------------------
# counting


def _int_bound(T: float) -> int:
    if T < 1:
        raise ValueError("T must be >= 1")
    return int(np.floor(T + 1e-9))


def _stripped_m_full_table(limit: int, m, S) -> np.ndarray:
    """t[n] = membership of n with the S-part of n removed; DLT (m None)
    demands the stripped value be 1."""
    vals = np.arange(limit + 1, dtype=np.int64)
    for p in S:
        while True:
            mask = (vals % p == 0) & (vals > 0)
            if not mask.any():
                break
            vals[mask] //= p
    if m in ("dlt", None):
        t = vals == 1
        t[0] = False
        return t
    base = m_full_table(limit, int(m))
    t = base[vals]
    t[0] = False
    return t


def _accepted_values(limit: int, m, S) -> np.ndarray:
    return np.nonzero(_stripped_m_full_table(limit, m, S))[0]


def _chunks(lo: int, hi: int, pieces: int = 64):
    """Fixed partition of range(lo, hi) independent of worker count."""
    n = hi - lo
    if n <= 0:
        return
    size = max(1, -(-n // pieces))
    for start in range(lo, hi, size):
        yield start, min(start + size, hi)


def _parallel_sum(func, lo: int, hi: int, threads: int) -> int:
    parts = list(_chunks(lo, hi))
    if threads <= 1 or len(parts) <= 1:
        return sum(func(a, b) for a, b in parts)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return sum(pool.map(lambda ab: func(*ab), parts))


def _count_p1(model, T, S, height, table) -> int:
    (c,) = model.components
    m = c.weight.m
    euclid = height == "euclidean"
    Ti = _int_bound(T)
    if m == 1 and not c.weight.is_dlt:
        return _count_p1_unrestricted(Ti, euclid)
    qs = _accepted_values(Ti, "dlt" if c.weight.is_dlt else m, S)
    total = 0
    T2 = Ti * Ti
    for q in qs.tolist():
        if q == 0:
            continue
        P = isqrt(T2 - q * q) if euclid else Ti
        total += 2 * coprime_count(P, q, table) + (1 if q == 1 else 0)
    return total


def _count_p1_unrestricted(T: int, euclid: bool) -> int:
    """All of Q: Mobius over the common divisor, vectorized per d."""
    mu = arith.mobius_sieve(T)
    total = 0
    T2 = T * T
    for d in range(1, T + 1):
        s = int(mu[d])
        if not s:
            continue
        R = T // d
        if euclid:
            k = np.arange(1, R + 1, dtype=np.int64)
            rad = T2 - (d * d) * k * k
            rad = rad[rad >= 0]
            P = np.sqrt(rad.astype(np.float64)).astype(np.int64) // d
            r2 = rad
            up = (P + 1) * (P + 1) * (d * d) <= r2
            P[up] += 1
            down = P * P * (d * d) > r2
            P[down] -= 1
            total += s * int((2 * P + 1).sum())
        else:
            total += s * R * (2 * R + 1)
    return total


def _count_pn_hyperplane(model, T, S, table) -> int:
    (c,) = model.components
    n = model.dim
    Ti = _int_bound(T)
    qs = _accepted_values(Ti, "dlt" if c.weight.is_dlt else c.weight.m, S)
    total = 0
    for q in qs.tolist():
        if q == 0:
            continue
        for d, s in arith.squarefree_divisors(q, table):
            total += s * (2 * (Ti // d) + 1) ** n
    return total


def _count_p2_lines(model, T, S, table) -> int:
    ms = [("dlt" if c.weight.is_dlt else c.weight.m) for c in model.components]
    Ti = _int_bound(T)
    vals = [_accepted_values(Ti, m, S) for m in ms]
    if any(len(v) == 0 for v in vals):
        return 0
    closed = [m == 1 for m in ms]
    if all(closed):
        d = np.arange(1, Ti + 1, dtype=np.int64)
        mu = arith.mobius_sieve(Ti)[1:].astype(np.int64)
        cnt = Ti // d
        return 4 * int((mu * cnt * cnt * cnt).sum())
    # a squarefree d with all three counts nonzero divides an accepted value
    # of every component; its off-S radical is bounded by the m-th root.
    prods = prod(S) if S else 1
    rad_bounds = [
        prods * (1 if m in ("dlt", None) else _iroot(Ti, int(m)))
        for m, cl in zip(ms, closed)
        if not cl
    ]
    dmax = min([Ti] + rad_bounds)
    mu = arith.mobius_sieve(dmax)
    total = 0
    for d in range(1, dmax + 1):
        s = int(mu[d])
        if not s:
            continue
        term = s
        for v, m, cl in zip(vals, ms, closed):
            if cl:
                a = Ti // d
            elif d > int(v[-1]):
                a = 0
            else:
                a = int((v % d == 0).sum())
            if a == 0:
                term = 0
                break
            term *= a
        total += term
    return 4 * total


# certified backend ranges: beyond these the dense kernels are untested and
# the working set grows past what the int32/table layout was sized for
_BY4_LIMIT = 10**6
_DP_D5_LIMIT = 10**6


def _by4_heights(model, Tmax: int, S) -> tuple[np.ndarray, np.ndarray]:
    """Heights and thin flags of all accepted four-lines points up to Tmax.

    Iterates signed accepted values for (x0, x1, x2) and tests the fourth
    line through a lookup table on x0 + x1 + x2.
    """
    if Tmax > _BY4_LIMIT:
        raise ValueError(f"by_four_lines counting certified only up to T = {_BY4_LIMIT}")
    ms = [("dlt" if c.weight.is_dlt else c.weight.m) for c in model.components]
    pos = [_accepted_values(Tmax, m, S) for m in ms[:3]]
    pos = [v[v > 0] for v in pos]
    wtab = _stripped_m_full_table(3 * Tmax, ms[3], S)
    heights, thins = [], []
    sgn1 = np.concatenate([-pos[1][::-1], pos[1]])
    sgn2 = np.concatenate([-pos[2][::-1], pos[2]])
    for x0 in pos[0].tolist():
        w = x0 + sgn1[:, None] + sgn2[None, :]
        ok = np.abs(w) <= 3 * Tmax
        ok &= w != 0
        wofs = np.where(ok, np.abs(w), 1)
        ok &= wtab[wofs]
        g01 = np.gcd(x0, np.abs(sgn1))
        ok &= np.gcd(g01[:, None], np.abs(sgn2)[None, :]) == 1
        if not ok.any():
            continue
        i, j = np.nonzero(ok)
        h = np.maximum(x0, np.maximum(np.abs(sgn1[i]), np.abs(sgn2[j])))
        prod_ = (-x0) * sgn1[i] * sgn2[j]
        r = np.sqrt(np.clip(prod_, 0, None).astype(np.float64)).astype(np.int64)
        thin = (prod_ >= 0) & (
            (r * r == prod_) | ((r + 1) * (r + 1) == prod_) | ((r - 1) * (r - 1) == prod_)
        )
        heights.append(h)
        thins.append(thin)
    if not heights:
        return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=bool)
    return np.concatenate(heights), np.concatenate(thins)


def _count_by4(model, T, S, kind) -> int:
    Ti = _int_bound(T)
    h, thin = _by4_heights(model, Ti, S)
    sel = h <= Ti
    if kind == "thin-filtered":
        sel &= ~thin
    return int(sel.sum())


def _count_blowup(model, T, S, table) -> int:
    e, d2 = model.components
    n = model.dim
    Ti = _int_bound(T)
    t1 = _stripped_m_full_table(Ti, "dlt" if e.weight.is_dlt else e.weight.m, S)
    t2 = _stripped_m_full_table(Ti, "dlt" if d2.weight.is_dlt else d2.weight.m, S)

    def rest_count(g: int) -> int:
        # tuples (x2..xn) in [-T, T]^(n-1) with gcd(g, x2, .., xn) = 1
        return sum(
            s * (2 * (Ti // e) + 1) ** (n - 1)
            for e, s in arith.squarefree_divisors(g, table)
        )

    total = 0
    for x0 in range(1, Ti + 1):
        fac = factorize(x0, table).factors
        divs = [1]
        for p, ee in fac:
            divs = [dd * p**k for dd in divs for k in range(ee + 1)]
        for g in divs:
            u = x0 // g
            if not (t1[g] and t2[u]):
                continue
            ny = 2 * coprime_count(Ti // g, u, table) + (1 if u == 1 else 0)
            total += ny * rest_count(g)
    return total


def _dp_d5_pair_data(model, Tmax: int, S, threads: int = 1):
    """(height, gcd) arrays over accepted (x0, x1) pairs, x1 of both signs.

    The six chain conditions only involve (x0, x1); x2 contributes the
    primitivity count afterwards. Chain gcds are shared between the f and g
    evaluations at the same argument, and the two signs of x1 reuse the
    sign-independent prefix of the chain.
    """
    if Tmax > _DP_D5_LIMIT:
        raise ValueError(f"dp_d5 counting certified only up to T = {_DP_D5_LIMIT}")
    ms = {c.id: ("dlt" if c.weight.is_dlt else c.weight.m) for c in model.components}
    tabs = {cid: _stripped_m_full_table(2 * Tmax, ms[cid], S) for cid in ms}
    u = np.arange(1, Tmax + 1, dtype=np.int32)

    def block(lo, hi):
        out_h, out_g = [], []
        for x0 in range(max(lo, 1), hi):
            x0a = np.full_like(u, x0)
            d1 = np.gcd(x0a, u)
            f1 = x0a // d1
            d2 = np.gcd(f1, u)
            f2 = f1 // d2
            g1m = u // d2  # |g(f1)|
            d3 = np.gcd(f2, u)
            f3 = f2 // d3
            g2m = u // d3  # |g(f2)|
            base = tabs["E3"][f3] & tabs["E4"][np.gcd(f1, g2m)] & tabs["E5"][np.gcd(x0a, g1m)]
            if not base.any():
                continue
            for sign in (1, -1):
                t = f3 - sign * g2m
                at = np.abs(t)
                dt = np.gcd(at, u)
                ftm = at // dt
                gtm = u // dt
                dft = np.gcd(ftm, u)
                gftm = u // dft
                ok = (
                    base
                    & tabs["E1"][np.gcd(f2, gtm)]
                    & tabs["E2"][np.gcd(at, gftm)]
                    & tabs["E6"][np.gcd(u, ftm)]
                )
                if ok.any():
                    sel = u[ok]
                    out_h.append(np.maximum(sel, x0).astype(np.int64))
                    out_g.append(np.gcd(sel, x0).astype(np.int64))
        if not out_h:
            return np.zeros(0, dtype=np.int64), np.zeros(0, dtype=np.int64)
        return np.concatenate(out_h), np.concatenate(out_g)

    parts = list(_chunks(1, Tmax + 1))
    if threads > 1 and len(parts) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda ab: block(*ab), parts))
    else:
        results = [block(a, b) for a, b in parts]
    hs = np.concatenate([r[0] for r in results])
    gs = np.concatenate([r[1] for r in results])
    return hs, gs


def _dp_d5_aggregate(hs, gs, T: int, table) -> int:
    sel = hs <= T
    vals, cnts = np.unique(gs[sel], return_counts=True)
    return sum(
        int(c) * 2 * coprime_count(T, int(h), table)
        for h, c in zip(vals.tolist(), cnts.tolist())
    )


def _count_dp_d5(model, T, S, table, threads) -> int:
    Ti = _int_bound(T)
    hs, gs = _dp_d5_pair_data(model, Ti, S, threads)
    return _dp_d5_aggregate(hs, gs, Ti, table)


def _weak_uniform_m(model) -> int | None:
    ms = {c.weight.m for c in model.components}
    if len(ms) == 1 and None not in ms:
        return ms.pop()
    return None


def _count_weak_p2_uniform(model, T, S, m: int) -> int:
    """Weak membership with equal weights: |x0*x1*x2| must be m-full away from S."""
    Ti = _int_bound(T)
    if m == 1:
        return _count_p2_lines(model, Ti, S, None)
    tab = _stripped_m_full_table(Ti**3, m, S)
    xs = np.arange(1, Ti + 1, dtype=np.int64)
    total = 0
    for x0 in range(1, Ti + 1):
        p01 = x0 * xs
        g01 = np.gcd(x0, xs)
        ok = tab[p01[:, None] * xs[None, :]]
        ok &= np.gcd(g01[:, None], xs[None, :]) == 1
        total += int(ok.sum())
    return 4 * total


def _count_weak_brute(model, T, S) -> int:
    """Point-by-point weak membership; certified only for small T."""
    Ti = _int_bound(T)
    if Ti > _WEAK_PER_POINT_LIMIT:
        raise ValueError(
            f"weak counting on {model.backend} is certified only up to "
            f"T = {_WEAK_PER_POINT_LIMIT}"
        )
    total = 0
    for pt in _iter_points(model, Ti):
        if is_weak_campana(model, pt, S):
            total += 1
    return total


def _iter_points(model, T: int):
    """All canonical open-orbit points of naive height <= T (brute iteration)."""
    backend = model.backend
    if backend in ("p1", "pn_hyperplane"):
        n = model.dim
        rng = range(-T, T + 1)

        def rec(prefix):
            if len(prefix) == n:
                yield prefix
                return
            for v in rng:
                yield from rec(prefix + (v,))

        for q in range(1, T + 1):
            for rest in rec(()):
                g = q
                for v in rest:
                    g = gcd(g, v)
                if g == 1:
                    yield PrimitivePoint((q,) + rest)
    elif backend in ("p2_three_lines", "by_four_lines"):
        for x0 in range(1, T + 1):
            for x1 in range(-T, T + 1):
                if x1 == 0:
                    continue
                g01 = gcd(x0, x1)
                for x2 in range(-T, T + 1):
                    if x2 == 0 or gcd(g01, x2) != 1:
                        continue
                    if backend == "by_four_lines" and x0 + x1 + x2 == 0:
                        continue
                    yield PrimitivePoint((x0, x1, x2))
    elif backend in ("blowup_pn", "dp_d5"):
        openx = backend == "dp_d5"
        for x0 in range(1, T + 1):
            for x1 in range(-T, T + 1):
                if openx and x1 == 0:
                    continue
                g01 = gcd(x0, x1)
                for x2 in range(-T, T + 1):
                    if openx and x2 == 0:
                        continue
                    if gcd(g01, x2) == 1:
                        yield PrimitivePoint((x0, x1, x2))
    else:
        raise ValueError(f"unknown backend {backend!r}")


def count_points(
    model: OrbifoldModel,
    T: float,
    kind: str = "campana",
    S=(),
    height: str = "naive",
    table: SieveTable | None = None,
    threads: int = 1,
) -> int:
    """Exact count of open-orbit points of height <= T with the given membership."""
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}")
    if height not in HEIGHTS:
        raise ValueError(f"height must be one of {HEIGHTS}")
    backend = model.backend
    if height == "euclidean" and backend != "p1":
        raise ValueError("euclidean height is only defined for the p1 backend")
    if kind == "thin-filtered" and backend != "by_four_lines":
        raise ValueError("the thin filter applies to by_four_lines only")
    S = tuple(sorted(set(S)))
    if table is None and backend in ("blowup_pn", "dp_d5"):
        table = SieveTable.build(_int_bound(T))

    if kind == "weak":
        if backend in ("p1", "pn_hyperplane"):
            pass  # single boundary component: weak and campana agree
        elif backend == "p2_three_lines" and _weak_uniform_m(model) is not None:
            if _int_bound(T) > WEAK_BRUTE_LIMIT:
                raise ValueError(
                    f"weak counting certified only up to T = {WEAK_BRUTE_LIMIT}"
                )
            return _count_weak_p2_uniform(model, T, S, _weak_uniform_m(model))
        else:
            return _count_weak_brute(model, T, S)

    if backend == "p1":
        return _count_p1(model, T, S, height, table)
    if backend == "pn_hyperplane":
        return _count_pn_hyperplane(model, T, S, table)
    if backend == "p2_three_lines":
        return _count_p2_lines(model, T, S, table)
    if backend == "by_four_lines":
        return _count_by4(model, T, S, kind)
    if backend == "blowup_pn":
        return _count_blowup(model, T, S, table)
    if backend == "dp_d5":
        return _count_dp_d5(model, T, S, table, threads)
    raise ValueError(f"unknown backend {backend!r}")


def count_series(
    model: OrbifoldModel,
    grid,
    kind: str = "campana",
    S=(),
    height: str = "naive",
    table: SieveTable | None = None,
    threads: int = 1,
) -> CountSeries:
    """One count per threshold, sharing sieve and enumeration state."""
    grid = list(grid)
    if sorted(grid) != grid:
        raise ValueError("grid must be ascending")
    if not grid:
        return CountSeries([], [], model.name, kind, height)
    Tmax = _int_bound(max(grid))
    S = tuple(sorted(set(S)))
    if table is None:
        table = SieveTable.build(max(Tmax, 3))

    if model.backend == "dp_d5" and kind == "campana":
        hs, gs = _dp_d5_pair_data(model, Tmax, S, threads)
        counts = [_dp_d5_aggregate(hs, gs, _int_bound(t), table) for t in grid]
    elif model.backend == "by_four_lines" and kind in ("campana", "thin-filtered"):
        h, thin = _by4_heights(model, Tmax, S)
        if kind == "thin-filtered":
            h = h[~thin]
        h = np.sort(h)
        counts = [int(np.searchsorted(h, _int_bound(t), side="right")) for t in grid]
    else:
        counts = [
            count_points(model, t, kind, S, height, table=table, threads=threads)
            for t in grid
        ]
    return CountSeries([float(t) for t in grid], counts, model.name, kind, height)


def count_weak_subfamily_A(T: float, table: SieveTable | None = None) -> int:
    """Coprime positive triples up to T with x0 a square and x1*x2 a square.

    Parametrizes x1 = g*a^2, x2 = g*b^2 with gcd(a, b) = 1 and corrects the
    coprimality against x0 = s^2 by Mobius over rad(g).
    """
    Ti = _int_bound(T)
    rootT = isqrt(Ti)
    mu = arith.mobius_sieve(rootT)
    pair_counts = np.zeros(rootT + 1, dtype=np.int64)
    ds = np.arange(1, rootT + 1, dtype=np.int64)
    mu_np = mu[1:].astype(np.int64)
    for M in range(1, rootT + 1):
        quot = M // ds[:M]
        pair_counts[M] = int((mu_np[:M] * quot * quot).sum())
    if table is None or table.limit < Ti:
        table = SieveTable.build(Ti)
    total = 0
    for g in range(1, Ti + 1):
        M = isqrt(Ti // g)
        if M == 0:
            break
        total += int(pair_counts[M]) * coprime_count(rootT, g, table)
    return total
