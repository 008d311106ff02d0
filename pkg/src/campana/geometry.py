"""Combinatorial orbifold models and their a/b-type invariants.

A model is boundary data only: weighted components with anticanonical and
line-bundle coefficients, Picard classes spanning the effective cone, and
declared local-point data for boundary strata at each place of interest.
All invariant arithmetic is exact rational; ties in the maxima defining the
pole orders must be detected exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from fractions import Fraction
from math import prod

__all__ = [
    "Weight",
    "BoundaryComponent",
    "ClemensSpec",
    "OrbifoldModel",
    "FunctionalDivisorData",
    "InvariantReport",
    "fujita_invariant",
    "b_klt",
    "adjoint_class",
    "b_conjectural",
    "tilde_a",
    "clemens_dimension",
    "b_local",
    "b_local_f",
    "b_dlt",
    "alpha_constant_simplicial",
    "blow_up_transform",
    "invariant_report",
    "load_model",
    "dump_model",
]

Rational = Fraction | int


@dataclass(frozen=True)
class Weight:
    """Boundary weight: KLT with finite m (epsilon = 1 - 1/m) or DLT (epsilon = 1)."""

    m: int | None  # None marks DLT

    @classmethod
    def klt(cls, m: int) -> "Weight":
        if m < 1:
            raise ValueError("klt weight needs m >= 1")
        return cls(m)

    @classmethod
    def dlt(cls) -> "Weight":
        return cls(None)

    @property
    def is_dlt(self) -> bool:
        return self.m is None

    @property
    def epsilon(self) -> Fraction:
        if self.m is None:
            return Fraction(1)
        return Fraction(self.m - 1, self.m)

    def __str__(self) -> str:
        return "dlt" if self.m is None else str(self.m)


@dataclass(frozen=True)
class BoundaryComponent:
    """One boundary divisor with its weight and class data.

    rho is the coefficient in -K_X ~ sum rho_a D_a and lam the coefficient in
    L = sum lam_a D_a. rho is integral on vector-group models (where it is
    >= 2); the plane multi-line models carry the symmetric rational choice.
    """

    id: str
    weight: Weight
    rho: Fraction
    lam: Fraction
    pic_class: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "rho", Fraction(self.rho))
        object.__setattr__(self, "lam", Fraction(self.lam))
        if self.lam <= 0:
            raise ValueError(f"component {self.id}: lambda must be positive")


@dataclass(frozen=True)
class ClemensSpec:
    """Faces (subsets of component ids) marked as having local points."""

    faces: frozenset[frozenset[str]]

    def __post_init__(self):
        object.__setattr__(
            self, "faces", frozenset(frozenset(f) for f in self.faces if f)
        )
        for face in self.faces:
            for cid in face:
                if len(face) > 1 and frozenset(face - {cid}) not in self.faces:
                    raise ValueError(
                        f"clemens spec not downward closed at face {sorted(face)}"
                    )

    @classmethod
    def from_faces(cls, faces) -> "ClemensSpec":
        """Build from maximal faces, closing downward."""
        closed: set[frozenset[str]] = set()
        stack = [frozenset(f) for f in faces]
        while stack:
            f = stack.pop()
            if not f or f in closed:
                continue
            closed.add(f)
            for cid in f:
                stack.append(f - {cid})
        return cls(frozenset(closed))

    def restrict(self, ids) -> "ClemensSpec":
        keep = set(ids)
        return ClemensSpec(frozenset(f for f in self.faces if f <= keep))


@dataclass(frozen=True)
class FunctionalDivisorData:
    """Coefficients d_a(f) >= 0 of the boundary components in div(f)."""

    d: dict[str, int]

    def __post_init__(self):
        if any(v < 0 for v in self.d.values()):
            raise ValueError("d_a(f) entries must be >= 0")


@dataclass(frozen=True)
class OrbifoldModel:
    name: str
    dim: int
    components: tuple[BoundaryComponent, ...]
    pic_rank: int
    eff_generators: tuple[tuple[int, ...], ...] = ()
    clemens: dict[str, ClemensSpec] = field(default_factory=dict)
    adjoint_rigid: bool = True
    backend: str = ""

    def __post_init__(self):
        if not self.components:
            raise ValueError("model needs at least one boundary component")
        for c in self.components:
            if len(c.pic_class) != self.pic_rank:
                raise ValueError(
                    f"component {c.id}: pic_class length != pic_rank {self.pic_rank}"
                )
        if not self.eff_generators:
            object.__setattr__(
                self, "eff_generators", tuple(c.pic_class for c in self.components)
            )
        ids = [c.id for c in self.components]
        if len(set(ids)) != len(ids):
            raise ValueError("duplicate component ids")

    def component(self, cid: str) -> BoundaryComponent:
        for c in self.components:
            if c.id == cid:
                return c
        raise KeyError(cid)

    @property
    def ids(self) -> tuple[str, ...]:
        return tuple(c.id for c in self.components)

    def with_weights(self, weights: dict[str, Weight]) -> "OrbifoldModel":
        comps = tuple(
            replace(c, weight=weights.get(c.id, c.weight)) for c in self.components
        )
        return replace(self, components=comps)

    def with_lambda(self, lam: dict[str, Rational]) -> "OrbifoldModel":
        comps = tuple(
            replace(c, lam=Fraction(lam.get(c.id, c.lam))) for c in self.components
        )
        return replace(self, components=comps)

    def log_anticanonical(self) -> "OrbifoldModel":
        """Set L = -(K_X + D_eps), i.e. lambda_a = rho_a - eps_a."""
        return self.with_lambda(
            {c.id: c.rho - c.weight.epsilon for c in self.components}
        )


@dataclass(frozen=True)
class InvariantReport:
    a: Fraction
    b_klt: int | None
    b_conjectural: int
    b_dlt: int | None
    adjoint_support: frozenset[str]
    adjoint_rigid: bool


def fujita_invariant(model: OrbifoldModel, skip_dlt: bool = False) -> Fraction:
    """max over components of (rho - eps)/lambda; KLT components only if skip_dlt."""
    comps = [c for c in model.components if not (skip_dlt and c.weight.is_dlt)]
    if not comps:
        raise ValueError("no components to take the maximum over")
    return max((c.rho - c.weight.epsilon) / c.lam for c in comps)


def _attaining(model: OrbifoldModel) -> list[BoundaryComponent]:
    a = fujita_invariant(model)
    return [c for c in model.components if (c.rho - c.weight.epsilon) / c.lam == a]


def b_klt(model: OrbifoldModel) -> int:
    """Number of components attaining the Fujita maximum. All weights must be KLT."""
    if any(c.weight.is_dlt for c in model.components):
        raise ValueError("b_klt requires all weights KLT")
    return len(_attaining(model))


def adjoint_class(model: OrbifoldModel) -> tuple[dict[str, Fraction], frozenset[str]]:
    """Coefficients of a*L + K_X + D_eps per component and its support."""
    a = fujita_invariant(model)
    coeffs = {
        c.id: a * c.lam - c.rho + c.weight.epsilon for c in model.components
    }
    assert all(v >= 0 for v in coeffs.values())
    return coeffs, frozenset(cid for cid, v in coeffs.items() if v > 0)


# ---------------------------------------------------------------------------
# exact rational LP (tiny simplex with Bland's rule) for cone face queries


def _simplex_max(A: list[list[Fraction]], b: list[Fraction], c: list[Fraction]):
    """Maximize c.x subject to A x = b, x >= 0, exactly over the rationals.

    Two-phase tableau simplex with Bland's rule. Returns (status, value, x)
    where status is 'optimal', 'infeasible' or 'unbounded'.
    """
    m, n = len(A), len(c)
    # make b >= 0
    A = [row[:] for row in A]
    b = b[:]
    for i in range(m):
        if b[i] < 0:
            A[i] = [-v for v in A[i]]
            b[i] = -b[i]

    # tableau with artificial variables n..n+m-1
    T = [A[i] + [Fraction(int(i == j)) for j in range(m)] + [b[i]] for i in range(m)]
    basis = list(range(n, n + m))

    def pivot(T, basis, row, col):
        piv = T[row][col]
        T[row] = [v / piv for v in T[row]]
        for r in range(len(T)):
            if r != row and T[r][col] != 0:
                f = T[r][col]
                T[r] = [x - f * y for x, y in zip(T[r], T[row])]
        basis[row] = col

    def solve(T, basis, obj, allowed):
        # obj: cost row over all columns; only columns < allowed may enter
        ncols = len(T[0]) - 1
        while True:
            # reduced costs
            z = obj[:]
            rhs = Fraction(0)
            for r, bv in enumerate(basis):
                if obj[bv] != 0:
                    f = obj[bv]
                    z = [zi - f * ti for zi, ti in zip(z, T[r][:ncols])]
                    rhs -= f * T[r][ncols]
            enter = next((j for j in range(allowed) if z[j] > 0), None)
            if enter is None:
                return -rhs  # objective value
            ratios = [
                (T[r][ncols] / T[r][enter], basis[r], r)
                for r in range(len(T))
                if T[r][enter] > 0
            ]
            if not ratios:
                return None  # unbounded
            _, _, row = min(ratios, key=lambda t: (t[0], t[1]))
            pivot(T, basis, row, enter)

    # phase 1: maximize -(sum of artificials)
    obj1 = [Fraction(0)] * n + [Fraction(-1)] * m
    v1 = solve(T, basis, obj1, n + m)
    if v1 is None or v1 != 0:
        return "infeasible", None, None
    # drive leftover artificials out of the basis when possible
    for r in range(m):
        if basis[r] >= n:
            col = next((j for j in range(n) if T[r][j] != 0), None)
            if col is not None:
                pivot(T, basis, r, col)

    # artificials stay at zero: they may not re-enter in phase 2
    obj2 = list(c) + [Fraction(0)] * m
    v2 = solve(T, basis, obj2, n)
    if v2 is None:
        return "unbounded", None, None
    x = [Fraction(0)] * n
    for r, bv in enumerate(basis):
        if bv < n:
            x[bv] = T[r][-1]
    return "optimal", v2, x


def _rank(vectors: list[tuple[Fraction, ...]]) -> int:
    rows = [list(map(Fraction, v)) for v in vectors]
    rank = 0
    ncols = len(rows[0]) if rows else 0
    col = 0
    while rank < len(rows) and col < ncols:
        piv = next((r for r in range(rank, len(rows)) if rows[r][col] != 0), None)
        if piv is None:
            col += 1
            continue
        rows[rank], rows[piv] = rows[piv], rows[rank]
        for r in range(len(rows)):
            if r != rank and rows[r][col] != 0:
                f = rows[r][col] / rows[rank][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rank])]
        rank += 1
        col += 1
    return rank


def _minimal_face(generators, z):
    """Generators of the minimal face of cone(generators) containing z.

    g_j lies in the face iff z - eps*g_j stays in the cone for some eps > 0.
    Raises ValueError when z is not in the cone.
    """
    gens = [tuple(map(Fraction, g)) for g in generators]
    zval = [Fraction(v) for v in z]
    r = len(zval)
    n = len(gens)
    A = [[gens[j][i] for j in range(n)] for i in range(r)]
    status, _, _ = _simplex_max(A, zval, [Fraction(0)] * n)
    if status != "optimal":
        raise ValueError("class is not contained in the effective cone")
    face = []
    for j in range(n):
        # variables: c_0..c_{n-1}, eps ; constraints G c + eps g_j = z, eps <= 1
        Aj = [row[:] + [gens[j][i]] for i, row in enumerate(A)]
        Aj.append([Fraction(0)] * n + [Fraction(1)])  # eps + slack = 1
        for row in Aj[:-1]:
            row.append(Fraction(0))
        Aj[-1].append(Fraction(1))  # slack column
        bj = zval + [Fraction(1)]
        cj = [Fraction(0)] * n + [Fraction(1), Fraction(0)]
        status, val, _ = _simplex_max(Aj, bj, cj)
        if status == "optimal" and val > 0:
            face.append(gens[j])
    return face


def b_conjectural(model: OrbifoldModel) -> int:
    """Picard rank minus the dimension of the minimal effective-cone face
    containing the adjoint class a[L] + [K_X + D_eps]."""
    coeffs, _ = adjoint_class(model)
    z = [Fraction(0)] * model.pic_rank
    for c in model.components:
        for i, v in enumerate(c.pic_class):
            z[i] += coeffs[c.id] * v
    face = _minimal_face(model.eff_generators, z)
    dim = _rank(face) if face else 0
    return model.pic_rank - dim


def tilde_a(model: OrbifoldModel) -> Fraction:
    """max over components of (rho - 1)/lambda; weights are ignored."""
    return max((c.rho - 1) / c.lam for c in model.components)


def clemens_dimension(spec: ClemensSpec) -> int:
    """Max marked-face cardinality minus one; the empty complex has dimension -1."""
    if not spec.faces:
        return -1
    return max(len(f) for f in spec.faces) - 1


def _reduced_adjoint_support(model: OrbifoldModel) -> frozenset[str]:
    """Support of tilde_a * L + K_X + D_red (all weights taken as 1)."""
    a = tilde_a(model)
    return frozenset(
        c.id for c in model.components if a * c.lam - c.rho + 1 > 0
    )


def b_local(model: OrbifoldModel, place: str) -> int:
    """1 + dimension of the local Clemens complex of the components outside
    the support of tilde_a * L + K_X + D_red."""
    if place not in model.clemens:
        raise ValueError(f"no clemens data for place {place!r}")
    support = _reduced_adjoint_support(model)
    keep = [c.id for c in model.components if c.id not in support]
    return 1 + clemens_dimension(model.clemens[place].restrict(keep))


def b_local_f(model: OrbifoldModel, place: str, f_data: FunctionalDivisorData) -> int:
    """As b_local, additionally dropping components where d_a(f) > 0."""
    if place not in model.clemens:
        raise ValueError(f"no clemens data for place {place!r}")
    missing = set(model.ids) - set(f_data.d)
    if missing:
        raise ValueError(f"f_data misses components {sorted(missing)}")
    support = _reduced_adjoint_support(model)
    keep = [
        c.id
        for c in model.components
        if c.id not in support and f_data.d[c.id] <= 0
    ]
    return 1 + clemens_dimension(model.clemens[place].restrict(keep))


def b_dlt(model: OrbifoldModel, S: tuple[str, ...]) -> int:
    """#klt components + sum over v in S of b_local with reduced boundary.

    Requires L log-anticanonical (lambda_a = rho_a - eps_a).
    """
    for c in model.components:
        if c.lam != c.rho - c.weight.epsilon:
            raise ValueError(
                f"b_dlt needs L = -(K_X + D_eps); component {c.id} has "
                f"lambda {c.lam} != {c.rho - c.weight.epsilon}"
            )
    n_klt = sum(1 for c in model.components if not c.weight.is_dlt)
    return n_klt + sum(b_local(model, v) for v in S)


def alpha_constant_simplicial(
    dual_generators, L_class, weights_outside=()
) -> tuple[Fraction, float]:
    """Exponential-integral constant over a simplicial dual cone.

    For independent generators v_1..v_r of the dual cone, the integral of
    exp(-<L, x>) is |det(v_1..v_r)| * prod 1/<L, v_i>; the result is then
    scaled by prod (1 - eps) over the components outside the adjoint support.
    Returns the exact rational value and its float image.
    """
    gens = [tuple(map(Fraction, g)) for g in dual_generators]
    if not gens:
        raise ValueError("need at least one generator")
    r = len(gens[0])
    if len(gens) != r or _rank(gens) != len(gens):
        raise ValueError("dual cone must be simplicial: independent spanning generators")
    L = [Fraction(v) for v in L_class]
    pairings = [sum(a * b for a, b in zip(L, g)) for g in gens]
    if any(p <= 0 for p in pairings):
        raise ValueError("L must pair positively with every generator")
    det = _det(gens)
    chi = abs(det) * prod(Fraction(1) / p for p in pairings)
    alpha = chi * prod(1 - Fraction(e) for e in weights_outside)
    return alpha, float(alpha)


def _det(rows: list[tuple[Fraction, ...]]) -> Fraction:
    n = len(rows)
    M = [list(r) for r in rows]
    det = Fraction(1)
    for i in range(n):
        piv = next((r for r in range(i, n) if M[r][i] != 0), None)
        if piv is None:
            return Fraction(0)
        if piv != i:
            M[i], M[piv] = M[piv], M[i]
            det = -det
        det *= M[i][i]
        inv = Fraction(1) / M[i][i]
        for r in range(i + 1, n):
            f = M[r][i] * inv
            if f:
                M[r] = [x - f * y for x, y in zip(M[r], M[i])]
    return det


def blow_up_transform(
    model: OrbifoldModel,
    center: tuple[str, ...],
    exceptional_id: str = "E",
    multiplicities: dict[str, int] | None = None,
    rho_e: Rational | None = None,
) -> OrbifoldModel:
    """Blow up a marked boundary stratum and reweight the exceptional divisor.

    The exceptional weight is max over the center of ceil(m_a / e_a) (DLT if
    any center component is DLT); rho_E defaults to sum(rho_a) - codim + 1
    and lambda_E to sum(lambda_a). The Clemens face of the center is replaced
    by the exceptional star. Only strata that are full intersections of the
    center components are supported, which covers every hand-built case here.
    """
    cset = frozenset(center)
    if not cset <= set(model.ids):
        raise ValueError("center must consist of component ids")
    for place, spec in model.clemens.items():
        if cset not in spec.faces:
            raise ValueError(f"center is not a marked face at place {place!r}")
    mult = {cid: 1 for cid in cset}
    if multiplicities:
        mult.update(multiplicities)
    center_comps = [model.component(cid) for cid in cset]

    if any(c.weight.is_dlt and mult[c.id] > 0 for c in center_comps):
        new_weight = Weight.dlt()
    else:
        new_weight = Weight.klt(
            max(-(-c.weight.m // mult[c.id]) for c in center_comps if mult[c.id] > 0)
        )
    codim = len(cset)
    if rho_e is None:
        rho_e = sum(c.rho for c in center_comps) - codim + 1
    lam_e = sum(c.lam for c in center_comps)

    new_rank = model.pic_rank + 1
    comps = []
    for c in model.components:
        extra = (-1,) if c.id in cset else (0,)
        comps.append(replace(c, pic_class=c.pic_class + extra))
    comps.append(
        BoundaryComponent(
            id=exceptional_id,
            weight=new_weight,
            rho=Fraction(rho_e),
            lam=Fraction(lam_e),
            pic_class=(0,) * model.pic_rank + (1,),
        )
    )

    new_clemens = {}
    for place, spec in model.clemens.items():
        containing = [f for f in spec.faces if f >= cset]
        kept = frozenset(f for f in spec.faces if not f >= cset)
        stars = [frozenset({exceptional_id})]
        for f in containing:
            rest = f - cset
            for cid in cset:
                stars.append(frozenset({exceptional_id, cid} | rest))
        star_closure = ClemensSpec.from_faces(stars).faces
        new_clemens[place] = ClemensSpec(kept | star_closure)

    return replace(
        model,
        name=f"{model.name}_blowup",
        components=tuple(comps),
        pic_rank=new_rank,
        eff_generators=tuple(c.pic_class for c in comps),
        clemens=new_clemens,
    )


def invariant_report(model: OrbifoldModel, S: tuple[str, ...] = ()) -> InvariantReport:
    """Bundle the predicted exponents for a model."""
    all_klt = all(not c.weight.is_dlt for c in model.components)
    log_ac = all(c.lam == c.rho - c.weight.epsilon for c in model.components)
    _, support = adjoint_class(model)
    return InvariantReport(
        a=fujita_invariant(model),
        b_klt=b_klt(model) if all_klt else None,
        b_conjectural=b_conjectural(model),
        b_dlt=b_dlt(model, S) if log_ac and all(v in model.clemens for v in S) else None,
        adjoint_support=support,
        adjoint_rigid=model.adjoint_rigid,
    )


# ---------------------------------------------------------------------------
# model definition files


def dump_model(model: OrbifoldModel) -> str:
    lines = [
        f"name = {model.name}",
        f"dim = {model.dim}",
        f"pic_rank = {model.pic_rank}",
        f"adjoint_rigid = {'true' if model.adjoint_rigid else 'false'}",
        f"backend = {model.backend}",
        "",
    ]
    for c in model.components:
        lines.append(f"[component {c.id}]")
        lines.append(f"m = {c.weight}")
        lines.append(f"rho = {c.rho}")
        lines.append(f"lambda = {c.lam}")
        lines.append("pic_class = " + " ".join(str(v) for v in c.pic_class))
        lines.append("")
    lines.append("[cone]")
    lines.append(
        "generators = " + "; ".join(" ".join(str(v) for v in g) for g in model.eff_generators)
    )
    lines.append("")
    for place, spec in sorted(model.clemens.items()):
        lines.append(f"[clemens {place}]")
        faces = sorted(spec.faces, key=lambda f: (len(f), sorted(f)))
        lines.append("faces = " + "; ".join(" ".join(sorted(f)) for f in faces))
        lines.append("")
    return "\n".join(lines)


def load_model(text: str) -> OrbifoldModel:
    """Parse the key-value model format produced by dump_model."""
    header: dict[str, str] = {}
    comps: list[dict[str, str]] = []
    cone: dict[str, str] = {}
    clemens_raw: dict[str, str] = {}
    section: dict[str, str] | None = header
    comp_ids: list[str] = []
    clemens_place: str | None = None

    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            tag = line.strip("[]").split()
            if tag[0] == "component":
                comps.append({})
                comp_ids.append(tag[1])
                section = comps[-1]
                clemens_place = None
            elif tag[0] == "cone":
                section = cone
                clemens_place = None
            elif tag[0] == "clemens":
                clemens_place = tag[1]
                clemens_raw.setdefault(clemens_place, "")
                section = None
            else:
                raise ValueError(f"unknown section {line}")
            continue
        key, _, val = line.partition("=")
        key, val = key.strip(), val.strip()
        if not _:
            raise ValueError(f"expected key = value, got {line!r}")
        if clemens_place is not None:
            if key != "faces":
                raise ValueError(f"unexpected key {key!r} in clemens section")
            clemens_raw[clemens_place] = val
        elif section is None:
            raise ValueError(f"stray line {line!r}")
        else:
            section[key] = val

    for req in ("name", "dim", "pic_rank", "backend"):
        if req not in header:
            raise ValueError(f"missing header key {req!r}")
    rank = int(header["pic_rank"])
    components = []
    for cid, c in zip(comp_ids, comps):
        weight = Weight.dlt() if c["m"] == "dlt" else Weight.klt(int(c["m"]))
        components.append(
            BoundaryComponent(
                id=cid,
                weight=weight,
                rho=Fraction(c["rho"]),
                lam=Fraction(c["lambda"]),
                pic_class=tuple(int(v) for v in c["pic_class"].split()),
            )
        )
    gens = ()
    if "generators" in cone:
        gens = tuple(
            tuple(int(v) for v in chunk.split())
            for chunk in cone["generators"].split(";")
            if chunk.strip()
        )
    clemens = {
        place: ClemensSpec.from_faces(
            [chunk.split() for chunk in val.split(";") if chunk.strip()]
        )
        for place, val in clemens_raw.items()
    }
    return OrbifoldModel(
        name=header["name"],
        dim=int(header["dim"]),
        components=tuple(components),
        pic_rank=rank,
        eff_generators=gens,
        clemens=clemens,
        adjoint_rigid=header.get("adjoint_rigid", "true") == "true",
        backend=header["backend"],
    )
