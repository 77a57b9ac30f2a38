"""Curve topology, generator schemas, relator words and the extended unitary group.

A representation of the orbifold fundamental group sends loops to U(n) and
paths ``x0 -> sigma(x0)`` to antiunitary maps ``v -> M conj(v)``.  Such a map is
stored as the pair ``(M, 1)``; a unitary map is ``(M, 0)``.  Products follow
``(M, a)(N, b) = (M conj^a(N), a + b mod 2)``.  For quaternionic
representations the two-cocycle ``(-1)^{a b}`` is folded into evaluation.

Relator words are written in the extended group, so the matrix-level
equations (e.g. ``[A, B] C conj(C) = zeta``) come out of the multiplication law
rather than from hand-placed conjugations.
"""

from __future__ import annotations

import cmath
import enum
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from .errors import InvalidArgument
from .linalg import Family, GroupKind


class CurveType(str, enum.Enum):
    TYPE0 = "type0"
    TYPE1 = "type1"
    TYPE2 = "type2"

    @classmethod
    def parse(cls, value) -> "CurveType":
        if isinstance(value, CurveType):
            return value
        aliases = {"0": cls.TYPE0, "i": cls.TYPE1, "1": cls.TYPE1, "ii": cls.TYPE2, "2": cls.TYPE2}
        key = str(value).strip().lower()
        key = key.removeprefix("type").strip()
        if key in aliases:
            return aliases[key]
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidArgument(f"unknown curve type {value!r}") from None


class Structure(str, enum.Enum):
    REAL = "real"
    QUATERNIONIC = "quaternionic"

    @property
    def sign(self) -> int:
        """Square of the antiunitary lift: +1 for real, -1 for quaternionic."""
        return 1 if self is Structure.REAL else -1

    @classmethod
    def parse(cls, value) -> "Structure":
        if isinstance(value, Structure):
            return value
        try:
            return cls(str(value).strip().lower())
        except ValueError:
            raise InvalidArgument(f"unknown structure {value!r}") from None


@dataclass(frozen=True)
class CurveTopology:
    kind: CurveType
    g: int
    r: int = 0

    def __post_init__(self):
        object.__setattr__(self, "kind", CurveType.parse(self.kind))
        g, r = self.g, self.r
        if not isinstance(g, (int, np.integer)) or not isinstance(r, (int, np.integer)):
            raise InvalidArgument("genus and number of real circles must be integers")
        if g < 0 or r < 0:
            raise InvalidArgument(f"genus and r must be nonnegative, got g={g}, r={r}")
        if self.kind is CurveType.TYPE0:
            if r != 0:
                raise InvalidArgument("a type 0 curve has no real circles")
        elif self.kind is CurveType.TYPE1:
            if r < 1 or (g + 1 - r) < 0 or (g + 1 - r) % 2:
                raise InvalidArgument(f"type I needs r >= 1 and g + 1 - r even and >= 0 (g={g}, r={r})")
        else:
            if r < 1 or r > g or (g - r) % 2:
                raise InvalidArgument(f"type II needs 1 <= r <= g and g - r even (g={g}, r={r})")

    @property
    def ghat(self) -> int:
        """Genus of the surface S_0 carrying the handle generators."""
        if self.kind is CurveType.TYPE0:
            return self.g // 2
        if self.kind is CurveType.TYPE1:
            return (self.g + 1 - self.r) // 2
        return (self.g - self.r) // 2

    @property
    def n_vertices(self) -> int:
        """Number of gauge factors in the quotient."""
        return {CurveType.TYPE0: 1, CurveType.TYPE1: self.r, CurveType.TYPE2: self.r + 1}[self.kind]

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "g": int(self.g), "r": int(self.r)}

    @classmethod
    def from_json(cls, data: Mapping) -> "CurveTopology":
        try:
            return cls(CurveType.parse(data["kind"]), int(data["g"]), int(data.get("r", 0)))
        except (KeyError, TypeError) as exc:
            raise InvalidArgument(f"malformed topology: {exc}") from None

    def __str__(self):
        return f"{self.kind.value}(g={self.g}, r={self.r})"


@dataclass(frozen=True)
class Generator:
    label: str
    epsilon: int
    family: Family
    gauge_left: int
    gauge_right: int
    gauge_right_conjugated: bool


@dataclass(frozen=True)
class GeneratorSchema:
    topology: CurveTopology
    structure: Structure
    generators: tuple[Generator, ...]
    vertex_families: tuple[Family, ...]

    @property
    def labels(self) -> list[str]:
        return [gen.label for gen in self.generators]

    def index(self, label: str) -> int:
        for i, gen in enumerate(self.generators):
            if gen.label == label:
                return i
        raise InvalidArgument(f"no generator {label!r} in schema")

    def group(self, i: int, n: int) -> GroupKind:
        return GroupKind(self.generators[i].family, n)

    def vertex_group(self, v: int, n: int) -> GroupKind:
        return GroupKind(self.vertex_families[v], n)


@dataclass(frozen=True)
class Letter:
    gen: int
    exponent: int = 1
    conjugate: bool = False

    def __post_init__(self):
        if self.exponent not in (1, -1):
            raise InvalidArgument(f"letter exponent must be +-1, got {self.exponent}")


@dataclass(frozen=True)
class TwistedWord:
    letters: tuple[Letter, ...] = ()

    def __mul__(self, other: "TwistedWord") -> "TwistedWord":
        return TwistedWord(self.letters + other.letters)

    def __len__(self):
        return len(self.letters)

    def inverse(self) -> "TwistedWord":
        return TwistedWord(tuple(Letter(l.gen, -l.exponent, l.conjugate) for l in reversed(self.letters)))

    def epsilon(self, schema_or_eps) -> int:
        eps = _epsilons(schema_or_eps)
        return sum(eps[l.gen] for l in self.letters) % 2

    def render(self, schema_or_labels) -> str:
        """Matrix-level form of the word, with conjugations made explicit."""
        if isinstance(schema_or_labels, GeneratorSchema):
            labels, eps = schema_or_labels.labels, _epsilons(schema_or_labels)
        else:
            labels, eps = schema_or_labels
        parts = []
        for gen, inverse, conj in _forms(self, eps):
            s = labels[gen] + ("^-1" if inverse else "")
            parts.append(f"conj({s})" if conj else s)
        return " ".join(parts) if parts else "1"


def _epsilons(schema_or_eps) -> list[int]:
    if isinstance(schema_or_eps, GeneratorSchema):
        return [g.epsilon for g in schema_or_eps.generators]
    return list(schema_or_eps)


def word(*letters) -> TwistedWord:
    """Build a word from ``(gen, exp)`` / ``(gen, exp, conj)`` tuples or bare indices."""
    out = []
    for item in letters:
        if isinstance(item, Letter):
            out.append(item)
        elif isinstance(item, (int, np.integer)):
            out.append(Letter(int(item)))
        else:
            out.append(Letter(*item))
    return TwistedWord(tuple(out))


def commutator(a: int, b: int) -> TwistedWord:
    return word((a, 1), (b, 1), (a, -1), (b, -1))


@dataclass(frozen=True)
class ExtendedUnitaryElement:
    matrix: np.ndarray
    epsilon: int = 0

    def __mul__(self, other: "ExtendedUnitaryElement") -> "ExtendedUnitaryElement":
        N = other.matrix.conj() if self.epsilon else other.matrix
        return ExtendedUnitaryElement(self.matrix @ N, (self.epsilon + other.epsilon) % 2)

    def inverse(self) -> "ExtendedUnitaryElement":
        M = self.matrix.conj() if self.epsilon else self.matrix
        return ExtendedUnitaryElement(linalg.dagger(M), self.epsilon)

    @classmethod
    def identity(cls, n: int) -> "ExtendedUnitaryElement":
        return cls(np.eye(n, dtype=complex), 0)


# ---------------------------------------------------------------------------
# schemas and relators


def generator_schema(topology: CurveTopology, structure) -> GeneratorSchema:
    """Generators of the punctured-surface model of the moduli problem, with gauge data."""
    structure = Structure.parse(structure)
    boundary = Family.ORTHOGONAL if structure is Structure.REAL else Family.QUATERNIONIC
    U = Family.UNITARY
    gens: list[Generator] = []
    t = topology

    if t.kind is CurveType.TYPE0:
        base = 0
        handles = t.g // 2
        for i in range(1, handles + 1):
            gens.append(Generator(f"A{i}", 0, U, base, base, False))
            gens.append(Generator(f"B{i}", 0, U, base, base, False))
        if t.g % 2 == 0:
            gens.append(Generator("C", 1, U, base, base, True))
        else:
            gens.append(Generator("C", 0, U, base, base, False))
            gens.append(Generator("D", 1, U, base, base, True))
        vertices = (U,)
    elif t.kind is CurveType.TYPE1:
        for i in range(1, t.ghat + 1):
            gens.append(Generator(f"A{i}", 0, U, 0, 0, False))
            gens.append(Generator(f"B{i}", 0, U, 0, 0, False))
        for j in range(1, t.r + 1):
            gens.append(Generator(f"C{j}", 0, boundary, j - 1, j - 1, False))
        for j in range(2, t.r + 1):
            gens.append(Generator(f"D{j}", 0, U, 0, j - 1, False))
        vertices = (boundary,) * t.r
    else:
        for i in range(1, t.ghat + 1):
            gens.append(Generator(f"A{i}", 0, U, 0, 0, False))
            gens.append(Generator(f"B{i}", 0, U, 0, 0, False))
        gens.append(Generator("C0", 1, U, 0, 0, True))
        for j in range(1, t.r + 1):
            gens.append(Generator(f"C{j}", 0, boundary, j, j, False))
        for j in range(1, t.r + 1):
            gens.append(Generator(f"D{j}", 0, U, 0, j, False))
        vertices = (U,) + (boundary,) * t.r
    return GeneratorSchema(t, structure, tuple(gens), vertices)


def relator_word(topology: CurveTopology, structure=Structure.REAL) -> TwistedWord:
    """The defining relator of the moduli problem, written in the extended group."""
    schema = generator_schema(topology, structure)
    ix = schema.index
    w = TwistedWord()
    for i in range(1, topology.ghat + 1):
        w = w * commutator(ix(f"A{i}"), ix(f"B{i}"))
    t = topology
    if t.kind is CurveType.TYPE0:
        if t.g % 2 == 0:
            w = w * word(ix("C"), ix("C"))
        else:
            w = w * word(ix("C"), ix("D"), ix("C"), (ix("D"), -1))
    elif t.kind is CurveType.TYPE1:
        w = w * word(ix("C1"))
        for j in range(2, t.r + 1):
            w = w * word(ix(f"D{j}"), ix(f"C{j}"), (ix(f"D{j}"), -1))
    else:
        w = w * word(ix("C0"), ix("C0"))
        for j in range(1, t.r + 1):
            w = w * word(ix(f"D{j}"), ix(f"C{j}"), (ix(f"D{j}"), -1))
    return w


def relator(topology: CurveTopology, structure) -> tuple[TwistedWord, int]:
    """Relator word and the overall sign multiplying its matrix-level product."""
    structure = Structure.parse(structure)
    return relator_word(topology, structure), calibrate_sign(topology, structure)


def central_target(n: int, k: int) -> complex:
    """Central monodromy ``exp(i pi k / n)`` at the puncture."""
    if n < 1:
        raise InvalidArgument(f"rank must be positive, got {n}")
    k = int(k)
    # Exact values on the axes keep solutions like C = I free of 1e-16 noise.
    q, rem = divmod(k, n)
    if rem == 0:
        return complex((-1) ** (q % 2))
    if (2 * k) % n == 0:
        return 1j if ((2 * k) // n) % 4 == 1 else -1j
    return cmath.exp(1j * math.pi * k / n)


# ---------------------------------------------------------------------------
# evaluation


def _forms(w: TwistedWord, eps: Sequence[int]):
    """Yield ``(gen, inverse, conj)`` for each letter's matrix factor in the product."""
    parity = 0
    for l in w.letters:
        e = eps[l.gen]
        inverse = l.exponent < 0
        # Inverse of (M, 1) is (conj(M)^-1, 1).
        conj = bool(e and inverse)
        if l.conjugate:
            conj = not conj
        if parity:
            conj = not conj
        yield l.gen, inverse, conj
        parity ^= e


def cocycle_sign(w: TwistedWord, eps: Sequence[int]) -> int:
    """Sign picked up by a quaternionic evaluation relative to the plain product.

    ``rho(a) rho(b) = (-1)^{eps(a) eps(b)} rho(ab)``: every time the running
    product is antiunitary and the next letter is too, the value gains -1;
    inverting an antiunitary letter costs another -1, because
    ``rho(x^-1) = -rho(x)^-1``.
    """
    sign, parity = 1, 0
    for l in w.letters:
        e = eps[l.gen]
        if e and l.exponent < 0:
            sign = -sign
        if e and parity:
            sign = -sign
        parity ^= e
    return sign


def matrix_factors(w: TwistedWord, eps: Sequence[int]) -> list[tuple[int, str]]:
    """Matrix-level factors ``(gen, form)`` with form in ``id, inv, conj, conjinv``."""
    names = {(False, False): "id", (True, False): "inv", (False, True): "conj", (True, True): "conjinv"}
    return [(gen, names[(inv, conj)]) for gen, inv, conj in _forms(w, eps)]


def apply_form(M: np.ndarray, form: str) -> np.ndarray:
    if form == "id":
        return M
    if form == "inv":
        return linalg.dagger(M)
    if form == "conj":
        return M.conj()
    if form == "conjinv":
        return M.T
    raise InvalidArgument(f"unknown factor form {form!r}")


def evaluate_word(w: TwistedWord, assignment, structure, n: int, eps: Sequence[int] | None = None,
                  check: bool = True) -> ExtendedUnitaryElement:
    """Evaluate ``w`` in the extended unitary group.

    ``assignment`` is either a sequence of matrices indexed like the schema
    or a mapping from generator index to matrix; ``eps`` gives each
    generator's grade (defaults to 0 for all).
    """
    structure = Structure.parse(structure)
    if isinstance(assignment, Mapping):
        lookup = assignment
    else:
        lookup = dict(enumerate(assignment))
    gens = {l.gen for l in w.letters}
    missing = sorted(g for g in gens if g not in lookup)
    if missing:
        raise InvalidArgument(f"assignment is missing generators {missing}")
    if eps is None:
        eps = [0] * (max(gens) + 1 if gens else 0)
    if check:
        for g in gens:
            M = np.asarray(lookup[g])
            if M.shape != (n, n) or linalg.membership_defect(linalg.unitary(n), M) > linalg.MEMBERSHIP_TOL:
                raise InvalidArgument(f"generator {g} is not an {n}x{n} unitary matrix")
    result = ExtendedUnitaryElement.identity(n)
    for l in w.letters:
        M = np.asarray(lookup[l.gen], dtype=complex)
        if l.conjugate:
            M = M.conj()
        elem = ExtendedUnitaryElement(M, eps[l.gen])
        if l.exponent < 0:
            elem = elem.inverse()
        result = result * elem
    if structure is Structure.QUATERNIONIC:
        result = ExtendedUnitaryElement(cocycle_sign(w, eps) * result.matrix, result.epsilon)
    return result


def evaluate_schema_word(w: TwistedWord, schema: GeneratorSchema, matrices: Sequence[np.ndarray],
                         n: int, check: bool = False) -> ExtendedUnitaryElement:
    return evaluate_word(w, list(matrices), schema.structure, n,
                         eps=[g.epsilon for g in schema.generators], check=check)


# ---------------------------------------------------------------------------
# sign calibration


def quaternionic_parity_allows(topology: CurveTopology, n: int, k: int) -> bool:
    """Degree parity law for quaternionic bundles: ``k + n(g - 1)`` even."""
    return (k + n * (topology.g - 1)) % 2 == 0


def calibrate_sign(topology: CurveTopology, structure=Structure.QUATERNIONIC) -> int:
    """Sign multiplying the relator's matrix product.

    The candidate comes from the cocycle rule applied to the relator word.  For
    type 0 curves it is then checked against the degree parity law by exact
    rank-one evaluation: the relator product is identically 1 on U(1), so sign
    ``s`` makes exactly the degrees with ``(-1)^k = s`` solvable.  For curves
    with real points the rank is even and ``det(-W) = det(W)``, so parity cannot
    separate the two signs and the cocycle count is returned as is.
    """
    structure = Structure.parse(structure)
    if structure is Structure.REAL:
        return 1
    schema = generator_schema(topology, structure)
    eps = [g.epsilon for g in schema.generators]
    w = relator_word(topology, structure)
    candidate = cocycle_sign(w, eps)
    if topology.kind is not CurveType.TYPE0:
        return candidate

    rng = np.random.default_rng(12345)
    for _ in range(8):
        mats = [np.array([[cmath.exp(2j * math.pi * rng.random())]]) for _ in schema.generators]
        value = evaluate_word(w, mats, Structure.REAL, 1, eps=eps).matrix[0, 0]
        if abs(value - 1) > 1e-12:
            raise AssertionError("rank-one relator is not constant; calibration assumption broken")
    matching = []
    for s in (1, -1):
        solvable = {k for k in range(-4, 5) if s == (-1) ** (k % 2)}
        lawful = {k for k in range(-4, 5) if quaternionic_parity_allows(topology, 1, k)}
        if solvable == lawful:
            matching.append(s)
    if matching != [candidate]:
        raise AssertionError(f"sign calibration mismatch for {topology}: cocycle {candidate}, parity {matching}")
    return candidate


# ---------------------------------------------------------------------------
# presentations of the orbifold fundamental group


@dataclass(frozen=True)
class GammaPresentation:
    labels: tuple[str, ...]
    epsilons: tuple[int, ...]
    relations: tuple[TwistedWord, ...] = field(default=())


def gamma_presentation(topology: CurveTopology, presentation: str = "efg") -> GammaPresentation:
    """Generators (with grades) and relations of the orbifold fundamental group.

    ``"efg"`` gives the one-relator-per-circle style presentation; ``"standard"``
    adds a single path generator to the standard surface generators.  For
    curves with real points the standard variant omits the relations saying how
    the involution acts on loops, which have no closed form.
    """
    t = topology
    key = presentation.lower()
    labels: list[str] = []
    eps: list[int] = []

    def add(label, e):
        labels.append(label)
        eps.append(e)
        return len(labels) - 1

    rels: list[TwistedWord] = []
    if key == "efg":
        if t.kind is CurveType.TYPE0:
            d = [add(f"delta{i}", 1) for i in range(1, t.g + 2)]
            rels.append(word(*[x for i in d for x in (i, i)]))
        elif t.kind is CurveType.TYPE1:
            m = t.r + t.ghat
            d = [add(f"delta{i}", 0) for i in range(1, m + 1)]
            e = [add(f"eta{i}", 1 if i <= t.r else 0) for i in range(1, m + 1)]
            for i in range(t.r):
                rels.append(word(e[i], e[i]))
                rels.append(commutator(d[i], e[i]))
            long = word(*d[: t.r])
            for i in range(t.r, m):
                long = long * commutator(d[i], e[i])
            rels.append(long)
        else:
            crosscaps = t.g + 1 - t.r
            d = [add(f"delta{i}", 0) for i in range(1, t.r + 1)]
            e = [add(f"eta{i}", 1) for i in range(1, t.r + crosscaps + 1)]
            for i in range(t.r):
                rels.append(word(e[i], e[i]))
                rels.append(commutator(d[i], e[i]))
            rels.append(word(*d, *[x for i in e[t.r:] for x in (i, i)]))
    elif key == "standard":
        a = []
        b = []
        for i in range(1, t.g + 1):
            a.append(add(f"alpha{i}", 0))
            b.append(add(f"beta{i}", 0))
        c = add("gamma", 1)
        full = TwistedWord()
        for i in range(t.g):
            full = full * commutator(a[i], b[i])
        if t.kind is CurveType.TYPE0 and t.g % 2 == 0:
            half = TwistedWord()
            for i in range(t.g // 2):
                half = half * commutator(a[i], b[i])
            rels.append(half * word(c, c))
        elif t.kind is CurveType.TYPE0:
            rels.append(word(c, c, (a[t.g // 2], -1)))
        else:
            rels.append(word(c, c))
        rels.append(full)
    else:
        raise InvalidArgument(f"unknown presentation {presentation!r}")
    return GammaPresentation(tuple(labels), tuple(eps), tuple(rels))
