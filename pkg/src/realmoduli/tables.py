"""Homotopy groups of gauge classifying spaces and of moduli spaces, as data.

Each cell is a list of ``(regime, group)`` pairs.  Regimes are predicates on
the rank ``n``; groups are written in a small notation evaluated at the
curve's ``g`` and ``r``::

    "Z^{g+1} + (Z/2)^r"   "Z + (Z/2)^{r-1} + Z/4"   "0"

A query whose rank falls in no regime raises :class:`UndeterminedEntry`.
"""

from __future__ import annotations

import enum
import math
import re
from dataclasses import dataclass, field
from typing import Callable, Mapping

from .errors import InvalidArgument, UndeterminedEntry
from .presentation import CurveTopology, CurveType, Structure


@dataclass(frozen=True)
class FpAbelianGroup:
    free_rank: int = 0
    torsion: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if self.free_rank < 0:
            raise InvalidArgument("free rank must be nonnegative")
        if any(t < 2 for t in self.torsion):
            raise InvalidArgument("torsion orders must be at least 2")
        object.__setattr__(self, "torsion", tuple(sorted(int(t) for t in self.torsion)))

    def to_json(self) -> dict:
        return {"free_rank": int(self.free_rank), "torsion": list(self.torsion)}

    @classmethod
    def from_json(cls, data: Mapping) -> "FpAbelianGroup":
        return cls(int(data["free_rank"]), tuple(data.get("torsion", ())))

    def __str__(self):
        parts = []
        if self.free_rank:
            parts.append("Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        parts += [f"Z/{t}" for t in self.torsion]
        return " + ".join(parts) if parts else "0"


class Space(str, enum.Enum):
    BASED_GAUGE = "based"
    FULL_GAUGE = "full"
    PROJECTIVE_GAUGE = "projective"
    MODULI = "moduli"
    MODULI_FIXED_DET = "moduli-fixed-det"

    @classmethod
    def parse(cls, value) -> "Space":
        if isinstance(value, Space):
            return value
        key = str(value).strip().lower().replace("_", "-")
        aliases = {"basedgauge": cls.BASED_GAUGE, "fullgauge": cls.FULL_GAUGE,
                   "projectivegauge": cls.PROJECTIVE_GAUGE, "modulifixeddet": cls.MODULI_FIXED_DET}
        if key.replace("-", "") in aliases:
            return aliases[key.replace("-", "")]
        try:
            return cls(key)
        except ValueError:
            raise InvalidArgument(f"unknown space {value!r}") from None


@dataclass(frozen=True)
class TableQuery:
    structure: Structure
    topology: CurveTopology
    space: Space
    degree: int
    n: int
    fixed_det: bool = False
    k: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "structure", Structure.parse(self.structure))
        object.__setattr__(self, "space", Space.parse(self.space))
        if self.space is Space.MODULI_FIXED_DET:
            object.__setattr__(self, "fixed_det", True)
        if self.degree not in (1, 2):
            raise InvalidArgument(f"only pi_1 and pi_2 are tabulated, got degree {self.degree}")
        if self.n < 1:
            raise InvalidArgument(f"rank must be positive, got {self.n}")
        if self.space in (Space.MODULI, Space.MODULI_FIXED_DET) and self.k is None:
            raise InvalidArgument("moduli queries need the bundle degree k")


# ---------------------------------------------------------------------------
# regimes and group notation

Regime = Callable[[int], bool]

ALL: Regime = lambda n: True
N1: Regime = lambda n: n == 1
N2: Regime = lambda n: n == 2
GT1: Regime = lambda n: n > 1
GT2: Regime = lambda n: n > 2
EVEN: Regime = lambda n: n % 2 == 0
ODD: Regime = lambda n: n % 2 == 1
ODD_GT1: Regime = lambda n: n % 2 == 1 and n > 1
EVEN_GT2: Regime = lambda n: n % 2 == 0 and n > 2
MOD4_0: Regime = lambda n: n % 4 == 0
MOD4_2_GT2: Regime = lambda n: n % 4 == 2 and n > 2

_TERM = re.compile(r"^(?:\((Z/\d+)\)|(Z/\d+)|(Z))(?:\^(\{[^}]*\}|\w+))?$")


def _eval_exponent(expr: str, g: int, r: int) -> int:
    expr = expr.strip("{}").replace(" ", "")
    if not re.fullmatch(r"[gr0-9+\-]+", expr):
        raise ValueError(f"bad exponent {expr!r}")
    total = 0
    for sign, tok in re.findall(r"([+-]?)([gr]|\d+)", expr):
        val = g if tok == "g" else r if tok == "r" else int(tok)
        total += -val if sign == "-" else val
    return total


def parse_group(text: str, g: int, r: int) -> FpAbelianGroup:
    text = text.strip()
    if text == "0":
        return FpAbelianGroup()
    free = 0
    torsion: list[int] = []
    for part in text.split("+ "):
        part = part.strip().rstrip("+").strip()
        m = _TERM.match(part)
        if not m:
            raise ValueError(f"cannot parse group term {part!r}")
        cyclic = m.group(1) or m.group(2)
        count = _eval_exponent(m.group(4), g, r) if m.group(4) else 1
        if count < 0:
            raise ValueError(f"negative exponent in {part!r} at g={g}, r={r}")
        if cyclic:
            torsion += [int(cyclic.split("/")[1])] * count
        else:
            free += count
    return FpAbelianGroup(free, tuple(torsion))


# ---------------------------------------------------------------------------
# the tables

R, Q = Structure.REAL, Structure.QUATERNIONIC
T0, T1, T2 = CurveType.TYPE0, CurveType.TYPE1, CurveType.TYPE2
BASED, FULL, PROJ = Space.BASED_GAUGE, Space.FULL_GAUGE, Space.PROJECTIVE_GAUGE

_real_boundary_full_pi2 = [(GT2, "Z + (Z/2)^r"), (N2, "Z^{r+1}"), (N1, "0")]
_real_boundary_proj_pi2 = [(MOD4_0, "Z + (Z/2)^{r+1}"), (MOD4_2_GT2, "Z + (Z/2)^{r-1} + Z/4"),
                           (ODD_GT1, "Z + (Z/2)^r"), (N2, "Z^{r+1}"), (N1, "0")]
_real_boundary_full_pi1 = [(GT2, "Z^g + (Z/2)^{r+1}"), (N2, "Z^{g+r} + Z/2"), (N1, "Z^g + Z/2")]
_real_boundary_proj_pi1 = [(EVEN_GT2, "Z^g + (Z/2)^{r+1}"), (ODD_GT1, "Z^g + (Z/2)^r"),
                           (N2, "Z^{g+r} + Z/2"), (N1, "Z^g")]

# (structure, type, space, pi) -> regimes, all ranks
GAUGE_TABLE = {
    (R, T0, BASED, 1): [(ALL, "Z^{g+1}")],
    (R, T0, FULL, 1): [(ALL, "Z^g + Z/2")],
    (R, T0, PROJ, 1): [(EVEN, "Z^g + Z/2"), (ODD, "Z^g")],
    (R, T0, BASED, 2): [(GT1, "Z"), (N1, "0")],
    (R, T0, FULL, 2): [(GT1, "Z"), (N1, "0")],
    (R, T0, PROJ, 2): [(EVEN, "Z + Z/2"), (ODD_GT1, "Z"), (N1, "0")],

    (R, T1, BASED, 1): [(GT2, "Z^g + (Z/2)^r"), (N2, "Z^{g+r}"), (N1, "Z^g")],
    (R, T1, FULL, 1): _real_boundary_full_pi1,
    (R, T1, PROJ, 1): _real_boundary_proj_pi1,
    (R, T1, BASED, 2): [(GT1, "Z"), (N1, "0")],
    (R, T1, FULL, 2): _real_boundary_full_pi2,
    (R, T1, PROJ, 2): _real_boundary_proj_pi2,

    (R, T2, BASED, 1): [(GT2, "Z^{g+1} + (Z/2)^r"), (N2, "Z^{g+1+r}"), (N1, "Z^{g+1}")],
    (R, T2, FULL, 1): _real_boundary_full_pi1,
    (R, T2, PROJ, 1): _real_boundary_proj_pi1,
    (R, T2, BASED, 2): [(GT1, "Z"), (N1, "0")],
    (R, T2, FULL, 2): _real_boundary_full_pi2,
    (R, T2, PROJ, 2): _real_boundary_proj_pi2,

    (Q, T0, BASED, 1): [(ALL, "Z^{g+1}")],
    (Q, T0, FULL, 1): [(ALL, "Z^g + Z/2")],
    (Q, T0, PROJ, 1): [(EVEN, "Z^g + Z/2"), (ODD, "Z^g")],
    (Q, T0, BASED, 2): [(GT1, "Z"), (N1, "0")],
    (Q, T0, FULL, 2): [(GT1, "Z"), (N1, "0")],
    (Q, T0, PROJ, 2): [(EVEN, "Z + Z/2"), (ODD_GT1, "Z"), (N1, "0")],

    (Q, T1, BASED, 1): [(EVEN, "Z^g")],
    (Q, T1, FULL, 1): [(EVEN, "Z^g")],
    (Q, T1, PROJ, 1): [(EVEN, "Z^g")],
    (Q, T1, BASED, 2): [(EVEN, "Z")],
    (Q, T1, FULL, 2): [(EVEN, "Z")],
    (Q, T1, PROJ, 2): [(EVEN, "Z + Z/2")],

    (Q, T2, BASED, 1): [(EVEN, "Z^{g+1}")],
    (Q, T2, FULL, 1): [(EVEN, "Z^g + Z/2")],
    (Q, T2, PROJ, 1): [(EVEN, "Z^g + Z/2")],
    (Q, T2, BASED, 2): [(EVEN, "Z")],
    (Q, T2, FULL, 2): [(EVEN, "Z")],
    (Q, T2, PROJ, 2): [(EVEN, "Z + Z/2")],
}

_real_boundary_fixed = {
    (BASED, 1): [(GT2, "(Z/2)^r"), (N2, "Z^r")],
    (FULL, 1): [(GT2, "(Z/2)^r"), (N2, "Z^r")],
    (PROJ, 1): [(GT2, "(Z/2)^r"), (N2, "Z^r")],
    (BASED, 2): [(GT1, "Z")],
    (FULL, 2): [(GT2, "Z + (Z/2)^r"), (N2, "Z^{r+1}")],
    (PROJ, 2): [(MOD4_0, "Z + (Z/2)^{r+1}"), (MOD4_2_GT2, "Z + (Z/2)^{r-1} + Z/4"),
                (ODD_GT1, "Z + (Z/2)^r"), (N2, "Z^{r+1}")],
}

# Fixed determinant, rank at least 2 throughout.
FIXED_DET_TABLE = {
    (R, T0, BASED, 1): [(GT1, "0")],
    (R, T0, FULL, 1): [(GT1, "0")],
    (R, T0, PROJ, 1): [(GT1, "0")],
    (R, T0, BASED, 2): [(GT1, "Z")],
    (R, T0, FULL, 2): [(GT1, "Z")],
    (R, T0, PROJ, 2): [(EVEN, "Z + Z/2"), (ODD_GT1, "Z")],
    **{(R, T, sp, pi): cell for T in (T1, T2) for (sp, pi), cell in _real_boundary_fixed.items()},
    (Q, T0, BASED, 1): [(GT1, "0")],
    (Q, T0, FULL, 1): [(GT1, "0")],
    (Q, T0, PROJ, 1): [(GT1, "0")],
    (Q, T0, BASED, 2): [(GT1, "Z")],
    (Q, T0, FULL, 2): [(GT1, "Z")],
    (Q, T0, PROJ, 2): [(EVEN, "Z + Z/2"), (ODD_GT1, "Z")],
    **{(Q, T, sp, 1): [(EVEN, "0")] for T in (T1, T2) for sp in (BASED, FULL, PROJ)},
    **{(Q, T, sp, 2): [(EVEN, "Z")] for T in (T1, T2) for sp in (BASED, FULL)},
    **{(Q, T, PROJ, 2): [(EVEN, "Z + Z/2")] for T in (T1, T2)},
}

_real_boundary_moduli = {
    (False, 1): [(EVEN_GT2, "Z^g + (Z/2)^{r+1}"), (ODD, "Z^g + (Z/2)^r"), (N2, "Z^{g+r} + Z/2")],
    (False, 2): [(MOD4_0, "Z + (Z/2)^{r+1}"), (MOD4_2_GT2, "Z + (Z/2)^{r-1} + Z/4"),
                 (ODD, "Z + (Z/2)^r"), (N2, "Z^{r+1}")],
    (True, 1): [(GT2, "(Z/2)^r"), (N2, "Z^r")],
    (True, 2): [(MOD4_0, "Z + (Z/2)^{r+1}"), (MOD4_2_GT2, "Z + (Z/2)^{r-1} + Z/4"),
                (ODD, "Z + (Z/2)^r"), (N2, "Z^{r+1}")],
}

# (structure, type, fixed_det, pi) -> regimes, rank at least 2
MODULI_TABLE = {
    (R, T0, False, 1): [(EVEN, "Z^g + Z/2"), (ODD, "Z^g")],
    (R, T0, False, 2): [(EVEN, "Z + Z/2"), (ODD, "Z")],
    (R, T0, True, 1): [(ALL, "0")],
    (R, T0, True, 2): [(EVEN, "Z + Z/2"), (ODD, "Z")],
    **{(R, T, fd, pi): cell for T in (T1, T2) for (fd, pi), cell in _real_boundary_moduli.items()},
    (Q, T0, False, 1): [(EVEN, "Z^g + Z/2"), (ODD, "Z^g")],
    (Q, T0, False, 2): [(EVEN, "Z + Z/2"), (ODD, "Z")],
    (Q, T0, True, 1): [(ALL, "0")],
    (Q, T0, True, 2): [(EVEN, "Z + Z/2"), (ODD, "Z")],
    (Q, T1, False, 1): [(EVEN, "Z^g")],
    (Q, T1, False, 2): [(EVEN, "Z + Z/2")],
    (Q, T1, True, 1): [(EVEN, "0")],
    (Q, T1, True, 2): [(EVEN, "Z + Z/2")],
    (Q, T2, False, 1): [(EVEN, "Z^g + Z/2")],
    (Q, T2, False, 2): [(EVEN, "Z + Z/2")],
    (Q, T2, True, 1): [(EVEN, "0")],
    (Q, T2, True, 2): [(EVEN, "Z + Z/2")],
}

# Low cases where only the fundamental group is pinned down, and the one
# where neither group is.
PI1_ONLY = {(3, 2), (2, 3)}
NOTHING = {(2, 2)}


def _resolve(cell, n: int, what: str, g: int, r: int) -> FpAbelianGroup:
    hits = [grp for regime, grp in cell if regime(n)]
    if not hits:
        raise UndeterminedEntry(f"{what}: no entry for rank {n}")
    if len(hits) > 1:
        raise AssertionError(f"{what}: overlapping regimes at rank {n}")
    return parse_group(hits[0], g, r)


def _check_structure(q: TableQuery):
    if q.structure is Structure.QUATERNIONIC and q.topology.r > 0 and q.n % 2:
        raise InvalidArgument("quaternionic bundles over a curve with real points have even rank")


def moduli_hypotheses(n: int, g: int, k: int) -> str | None:
    """Why the moduli table does not apply, or ``None`` if it does."""
    if n < 2 or g < 2:
        return "moduli table covers n >= 2 and g >= 2"
    if (n, g) in NOTHING:
        return "for (n, g) = (2, 2) only quotients of the tabulated groups are known"
    special = k == 0 and (n, g) in PI1_ONLY
    if math.gcd(n, k) != 1 and not special:
        return "moduli table covers the coprime case gcd(n, k) = 1"
    if (n - 1) * (g - 1) <= 2 and (n, g) not in PI1_ONLY:
        return "moduli table needs (n - 1)(g - 1) > 2"
    return None


def lookup(q: TableQuery, tables: Mapping | None = None) -> FpAbelianGroup:
    _check_structure(q)
    key_what = f"{q.structure.value} {q.topology.kind.value} {q.space.value} pi_{q.degree}"
    g, r = q.topology.g, q.topology.r
    if q.space in (Space.MODULI, Space.MODULI_FIXED_DET):
        from .invariants import realizable

        table = MODULI_TABLE if tables is None else tables["moduli"]
        if not realizable(q.topology, q.structure, q.n, q.k):
            raise InvalidArgument(f"no {q.structure.value} bundles of rank {q.n} and degree {q.k} on this curve")
        reason = moduli_hypotheses(q.n, g, q.k)
        if reason:
            raise UndeterminedEntry(reason)
        if q.degree == 2 and (q.n, g) in PI1_ONLY:
            raise UndeterminedEntry(f"for (n, g) = {(q.n, g)} pi_2 is only known up to a quotient")
        cell = table[(q.structure, q.topology.kind, q.fixed_det, q.degree)]
        return _resolve(cell, q.n, key_what + (" fixed det" if q.fixed_det else ""), g, r)
    if q.fixed_det:
        table = FIXED_DET_TABLE if tables is None else tables["fixed_det"]
        if q.n < 2:
            raise UndeterminedEntry("fixed-determinant table covers n > 1 only")
    else:
        table = GAUGE_TABLE if tables is None else tables["gauge"]
    return _resolve(table[(q.structure, q.topology.kind, q.space, q.degree)], q.n, key_what, g, r)


# ---------------------------------------------------------------------------
# audit


def default_tables() -> dict:
    return {"gauge": dict(GAUGE_TABLE), "fixed_det": dict(FIXED_DET_TABLE), "moduli": dict(MODULI_TABLE)}


def sample_topologies(g_range=range(2, 6)) -> list[CurveTopology]:
    out = []
    for g in g_range:
        out.append(CurveTopology(T0, g, 0))
        out += [CurveTopology(T1, g, r) for r in range(1, g + 2) if (g + 1 - r) % 2 == 0]
        out += [CurveTopology(T2, g, r) for r in range(1, g + 1) if (g - r) % 2 == 0]
    return out


def consistency_audit(tables: Mapping | None = None, ranks=range(1, 7), g_range=range(2, 6)) -> list[str]:
    """Coherence checks forced by how the tables were derived; returns mismatch descriptions."""
    tables = default_tables() if tables is None else tables
    problems = []

    def get(q):
        try:
            return lookup(q, tables)
        except (UndeterminedEntry, InvalidArgument):
            return None

    for top in sample_topologies(g_range):
        g = top.g
        for n in ranks:
            # (a) based gauge group, real type 0
            if top.kind is T0:
                got = get(TableQuery(R, top, BASED, 1, n))
                if got != FpAbelianGroup(g + 1):
                    problems.append(f"based pi_1 for real type 0 at g={g}, n={n} is {got}, expected Z^{g + 1}")
            for s in (R, Q):
                for fd in (False, True):
                    for pi in (1, 2):
                        full = get(TableQuery(s, top, FULL, pi, n, fd))
                        proj = get(TableQuery(s, top, PROJ, pi, n, fd))
                        # (b) projective and full differ at most in 2- and 4-torsion
                        if full is not None and proj is not None:
                            extra = set(full.torsion) ^ set(proj.torsion)
                            if full.free_rank != proj.free_rank or not extra <= {2, 4}:
                                problems.append(f"{s.value} {top} n={n} pi_{pi}{' fixed' if fd else ''}: "
                                                f"full {full} vs projective {proj}")
                    # (c) moduli agree with the projective gauge quotient
                    for k in range(0, n + 1):
                        for pi in (1, 2):
                            mod = get(TableQuery(s, top, Space.MODULI, pi, n, fd, k))
                            if mod is None:
                                continue
                            proj = get(TableQuery(s, top, PROJ, pi, n, fd))
                            if proj != mod:
                                problems.append(f"{s.value} {top} n={n} k={k} pi_{pi}{' fixed' if fd else ''}: "
                                                f"moduli {mod} vs projective {proj}")
    return sorted(set(problems))
