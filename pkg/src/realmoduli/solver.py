"""Points of the representation varieties, Riemannian descent, gauge actions.

Unknowns live on products of U(n), O(n) and Sp(n/2).  Every residual used
here is a sum of terms ``|| s * F_1 F_2 ... F_m - T ||_F^2`` where each factor
is a constant matrix or a variable in one of four forms (``M``, ``M^-1``,
``conj(M)``, ``conj(M)^-1``), so one gradient routine serves relator solves,
extension solves and orbit alignment alike.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from . import presentation as pres
from .errors import InvalidArgument, InvalidState
from .linalg import Family, GroupKind
from .presentation import CurveTopology, CurveType, GeneratorSchema, Structure

SUCCESS_TOL = 1e-10
OBSTRUCTION_TOL = 1e-6
POLISH_TOL = 1e-26


# ---------------------------------------------------------------------------
# representations


@dataclass(frozen=True, eq=False)
class Representation:
    topology: CurveTopology
    structure: Structure
    n: int
    k: int
    matrices: tuple[np.ndarray, ...]

    def __post_init__(self):
        object.__setattr__(self, "structure", Structure.parse(self.structure))
        if not isinstance(self.n, (int, np.integer)) or self.n < 1:
            raise InvalidArgument(f"rank must be a positive integer, got {self.n}")
        check_rank(self.topology, self.structure, self.n)
        schema = self.schema
        if len(self.matrices) != len(schema.generators):
            raise InvalidArgument(f"expected {len(schema.generators)} matrices, got {len(self.matrices)}")
        mats = []
        for i, M in enumerate(self.matrices):
            M = np.array(M, dtype=complex)
            M.setflags(write=False)
            linalg.check_member(schema.group(i, self.n), M, what=f"generator {schema.generators[i].label}")
            mats.append(M)
        object.__setattr__(self, "matrices", tuple(mats))

    @property
    def schema(self) -> GeneratorSchema:
        return pres.generator_schema(self.topology, self.structure)

    @property
    def assignment(self) -> dict[str, np.ndarray]:
        return dict(zip(self.schema.labels, self.matrices))

    def __getitem__(self, label: str) -> np.ndarray:
        return self.matrices[self.schema.index(label)]

    def replace(self, matrices=None, **changes) -> "Representation":
        fields = dict(topology=self.topology, structure=self.structure, n=self.n, k=self.k,
                      matrices=self.matrices if matrices is None else tuple(matrices))
        fields.update(changes)
        return Representation(**fields)

    @classmethod
    def from_assignment(cls, topology, structure, n, k, assignment: Mapping[str, np.ndarray]):
        schema = pres.generator_schema(topology, structure)
        missing = [l for l in schema.labels if l not in assignment]
        if missing:
            raise InvalidArgument(f"assignment is missing generators {missing}")
        extra = sorted(set(assignment) - set(schema.labels))
        if extra:
            raise InvalidArgument(f"unknown generators {extra}")
        return cls(topology, structure, n, k, tuple(assignment[l] for l in schema.labels))

    @classmethod
    def identity(cls, topology, structure, n, k=0):
        structure = Structure.parse(structure)
        schema = pres.generator_schema(topology, structure)
        return cls(topology, structure, n, k, tuple(np.eye(n, dtype=complex) for _ in schema.generators))

    def to_json(self) -> dict:
        return {
            "topology": self.topology.to_json(),
            "structure": self.structure.value,
            "n": int(self.n),
            "k": int(self.k),
            "generators": {l: linalg.matrix_to_json(M) for l, M in self.assignment.items()},
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "Representation":
        try:
            topology = CurveTopology.from_json(data["topology"])
            gens = {l: linalg.matrix_from_json(m) for l, m in data["generators"].items()}
            return cls.from_assignment(topology, data["structure"], int(data["n"]), int(data["k"]), gens)
        except (KeyError, TypeError, AttributeError) as exc:
            raise InvalidArgument(f"malformed representation: {exc!r}") from None


def check_rank(topology: CurveTopology, structure, n: int):
    if Structure.parse(structure) is Structure.QUATERNIONIC and topology.kind is not CurveType.TYPE0 and n % 2:
        raise InvalidArgument("quaternionic bundles over a curve with real points have even rank")


@dataclass(frozen=True, eq=False)
class GaugeElement:
    """One group element per gauge vertex of the schema."""

    matrices: tuple[np.ndarray, ...]

    @classmethod
    def identity(cls, schema: GeneratorSchema, n: int) -> "GaugeElement":
        return cls(tuple(np.eye(n, dtype=complex) for _ in schema.vertex_families))

    @classmethod
    def random(cls, schema: GeneratorSchema, n: int, rng) -> "GaugeElement":
        return cls(tuple(linalg.haar_sample(schema.vertex_group(v, n), rng)
                         for v in range(len(schema.vertex_families))))

    def check(self, schema: GeneratorSchema, n: int):
        if len(self.matrices) != len(schema.vertex_families):
            raise InvalidArgument(f"gauge element needs {len(schema.vertex_families)} vertex matrices")
        for v, g in enumerate(self.matrices):
            linalg.check_member(schema.vertex_group(v, n), g, what=f"gauge factor {v}")

    def to_json(self) -> list:
        return [linalg.matrix_to_json(g) for g in self.matrices]


@dataclass(frozen=True, eq=False)
class SolveResult:
    representation: Representation
    residual: float
    iterations: int
    converged: bool
    seed: int
    start: int = 0

    def to_json(self) -> dict:
        out = self.representation.to_json()
        out.update(residual=float(self.residual), iterations=int(self.iterations),
                   converged=bool(self.converged), seed=int(self.seed))
        return out


# ---------------------------------------------------------------------------
# product objectives


@dataclass(frozen=True)
class Term:
    """``|| sign * prod(factors) - target ||^2``.

    A factor is ``("var", index, form)`` or ``("const", matrix)``.
    """

    factors: tuple
    target: np.ndarray
    sign: float = 1.0


def _form_grad(G: np.ndarray, form: str) -> np.ndarray:
    # Euclidean gradient with respect to M of Re<G, form(M)>, valid on the unitary group.
    if form == "id":
        return G
    if form == "conj":
        return G.conj()
    if form == "inv":
        return linalg.dagger(G)
    return G.T


def _form_diff(M: np.ndarray, dM: np.ndarray, form: str) -> np.ndarray:
    # Derivative of form(M) along dM (tangent at unitary M).
    if form == "id":
        return dM
    if form == "conj":
        return dM.conj()
    if form == "inv":
        return linalg.dagger(dM)
    return dM.T


class ProductObjective:
    def __init__(self, kinds: Sequence[GroupKind], terms: Sequence[Term]):
        self.kinds = list(kinds)
        self.terms = list(terms)

    def _factor_values(self, term: Term, X):
        out = []
        for f in term.factors:
            if f[0] == "const":
                out.append(f[1])
            else:
                out.append(pres.apply_form(X[f[1]], f[2]))
        return out

    def value(self, X) -> float:
        total = 0.0
        for term in self.terms:
            P = term.sign * _chain(self._factor_values(term, X), term.target.shape[0])
            total += float(np.sum(np.abs(P - term.target) ** 2))
        return total

    def value_and_grad(self, X):
        """Residual and Euclidean gradient (one array per variable)."""
        grads = [np.zeros_like(x) for x in X]
        total = 0.0
        for term in self.terms:
            vals = self._factor_values(term, X)
            n = term.target.shape[0]
            m = len(vals)
            prefix = [np.eye(n, dtype=complex)]
            for F in vals:
                prefix.append(prefix[-1] @ F)
            suffix = [np.eye(n, dtype=complex)] * (m + 1)
            for i in range(m - 1, -1, -1):
                suffix[i] = vals[i] @ suffix[i + 1]
            R = term.sign * prefix[-1] - term.target
            total += float(np.sum(np.abs(R) ** 2))
            for i, f in enumerate(term.factors):
                if f[0] != "var":
                    continue
                G = term.sign * linalg.dagger(prefix[i]) @ R @ linalg.dagger(suffix[i + 1])
                grads[f[1]] = grads[f[1]] + 2.0 * _form_grad(G, f[2])
        return total, grads

    def algebra_grad(self, X):
        """Residual and left-trivialised Riemannian gradient ``Omega_i`` (grad = X_i Omega_i)."""
        f, E = self.value_and_grad(X)
        return f, [linalg.project_algebra(kind, linalg.dagger(x) @ e) for kind, x, e in zip(self.kinds, X, E)]

    def differential(self, X, term_index: int = 0) -> np.ndarray:
        """Real Jacobian of ``sign * prod`` w.r.t. orthonormal Lie-algebra coordinates."""
        term = self.terms[term_index]
        vals = self._factor_values(term, X)
        n = term.target.shape[0]
        m = len(vals)
        prefix = [np.eye(n, dtype=complex)]
        for F in vals:
            prefix.append(prefix[-1] @ F)
        suffix = [np.eye(n, dtype=complex)] * (m + 1)
        for i in range(m - 1, -1, -1):
            suffix[i] = vals[i] @ suffix[i + 1]
        cols = []
        for v, (kind, x) in enumerate(zip(self.kinds, X)):
            for B in linalg.algebra_basis(kind):
                dM = x @ B
                d = np.zeros((n, n), dtype=complex)
                for i, f in enumerate(term.factors):
                    if f[0] == "var" and f[1] == v:
                        d = d + prefix[i] @ _form_diff(x, dM, f[2]) @ suffix[i + 1]
                cols.append(linalg.realify(term.sign * d))
        if not cols:
            return np.zeros((2 * n * n, 0))
        return np.array(cols).T


def _chain(mats, n):
    out = np.eye(n, dtype=complex)
    for M in mats:
        out = out @ M
    return out


@dataclass
class DescentReport:
    X: list
    value: float
    iterations: int


def descend(obj: ProductObjective, X0, max_iters: int = 3000, tol: float = POLISH_TOL,
            stall_window: int = 60, stall_ratio: float = 0.999) -> DescentReport:
    """Riemannian gradient descent with Armijo backtracking from a Barzilai-Borwein trial step.

    Stops at ``tol``, at ``max_iters``, when the line search fails, or when the
    residual has shrunk by less than ``1 - stall_ratio`` over ``stall_window``
    iterations (a positive local minimum).
    """
    X = [np.array(x, dtype=complex) for x in X0]
    f, W = obj.algebra_grad(X)
    step = 0.1
    prev_W = None
    prev_s = None
    history = [f]
    it = 0
    while it < max_iters and f > tol:
        g2 = sum(float(np.sum(np.abs(w) ** 2)) for w in W)
        if g2 < 1e-32:
            break
        if prev_W is not None:
            y = [w - pw for w, pw in zip(W, prev_W)]
            sy = sum(float(np.real(np.vdot(s, yy))) for s, yy in zip(prev_s, y))
            ss = sum(float(np.sum(np.abs(s) ** 2)) for s in prev_s)
            if sy > 0:
                step = min(max(ss / sy, 1e-8), 1e3)
            else:
                step = min(step * 2.0, 1e3)
        t = step
        accepted = False
        for _ in range(50):
            Xn = [linalg.retract_algebra(kind, x, -t * w) for kind, x, w in zip(obj.kinds, X, W)]
            fn = obj.value(Xn)
            if fn <= f - 1e-4 * t * g2:
                accepted = True
                break
            t *= 0.5
        if not accepted:
            break
        prev_s = [-t * w for w in W]
        prev_W = W
        X = Xn
        f, W = obj.algebra_grad(X)
        it += 1
        history.append(f)
        if len(history) > stall_window and f > SUCCESS_TOL:
            if f > stall_ratio * history[-1 - stall_window]:
                break
    return DescentReport(X, f, it)


# ---------------------------------------------------------------------------
# relator residual


def _relator_factors(topology: CurveTopology, structure: Structure):
    schema = pres.generator_schema(topology, structure)
    word, sign = pres.relator(topology, structure)
    eps = [g.epsilon for g in schema.generators]
    factors = tuple(("var", gen, form) for gen, form in pres.matrix_factors(word, eps))
    return schema, factors, sign


def relator_objective(topology: CurveTopology, structure, n: int, k: int) -> tuple[ProductObjective, GeneratorSchema]:
    structure = Structure.parse(structure)
    schema, factors, sign = _relator_factors(topology, structure)
    target = pres.central_target(n, k) * np.eye(n, dtype=complex)
    kinds = [schema.group(i, n) for i in range(len(schema.generators))]
    return ProductObjective(kinds, [Term(factors, target, float(sign))]), schema


def relator_value(rep: Representation) -> np.ndarray:
    """Matrix-level value of the signed relator (should equal ``zeta * I``)."""
    _, factors, sign = _relator_factors(rep.topology, rep.structure)
    return sign * _chain([pres.apply_form(rep.matrices[f[1]], f[2]) for f in factors], rep.n)


def residual(rep: Representation) -> float:
    obj, _ = relator_objective(rep.topology, rep.structure, rep.n, rep.k)
    return obj.value(list(rep.matrices))


def riemannian_gradient(rep: Representation) -> list[np.ndarray]:
    """Gradient of the residual on the product manifold, as ambient tangent matrices."""
    obj, _ = relator_objective(rep.topology, rep.structure, rep.n, rep.k)
    X = list(rep.matrices)
    _, W = obj.algebra_grad(X)
    return [x @ w for x, w in zip(X, W)]


# ---------------------------------------------------------------------------
# solving


def _start_rng(seed: int, start: int) -> np.random.Generator:
    return np.random.default_rng(int(seed) ^ int(start))


def solve(topology: CurveTopology, structure, n: int, k: int, seed: int = 0, max_iters: int = 3000,
          tol: float = SUCCESS_TOL, starts: int = 10, stop_at_first: bool = False) -> SolveResult:
    """Multistart descent on the relator residual.

    Start ``i`` draws its initial point from ``default_rng(seed ^ i)``.  The
    lowest residual wins, ties going to the lower start index.  With
    ``stop_at_first`` the search ends at the first converged start.
    """
    structure = Structure.parse(structure)
    if not isinstance(n, (int, np.integer)) or n < 1:
        raise InvalidArgument(f"rank must be a positive integer, got {n}")
    if starts < 1:
        raise InvalidArgument("starts must be >= 1")
    if seed < 0:
        raise InvalidArgument("seed must be nonnegative")
    check_rank(topology, structure, n)
    obj, schema = relator_objective(topology, structure, n, k)
    best = None
    for i in range(starts):
        rng = _start_rng(seed, i)
        X0 = [linalg.haar_sample(kind, rng) for kind in obj.kinds]
        report = descend(obj, X0, max_iters=max_iters)
        X = [linalg.nearest_member(kind, x) for kind, x in zip(obj.kinds, report.X)]
        value = obj.value(X)
        if best is None or value < best[0]:
            best = (value, X, report.iterations, i)
        if stop_at_first and value < tol:
            break
    value, X, iters, i = best
    rep = Representation(topology, structure, n, k, tuple(X))
    return SolveResult(rep, value, iters, bool(value < tol), int(seed), i)


def pi1_words(schema: GeneratorSchema) -> list[pres.TwistedWord]:
    """Words generating the unitary (grade 0) part of the group: ``x``, ``c x c^-1``, ``c d``."""
    eps = [g.epsilon for g in schema.generators]
    even = [i for i, e in enumerate(eps) if e == 0]
    odd = [i for i, e in enumerate(eps) if e == 1]
    words = [pres.word(i) for i in even]
    for c in odd:
        words += [pres.word(c, x, (c, -1)) for x in even]
        words += [pres.word(c, d) for d in odd]
    return words


def solve_extension(base: Representation, structure, k: int | None = None, seed: int = 0,
                    starts: int = 50, max_iters: int = 3000, tol: float = SUCCESS_TOL) -> SolveResult:
    """Look for a representation of the given structure with the same unitary part as ``base``.

    Grade 0 generators are frozen at their values in ``base``; the grade 1
    generators are free.  Besides the relator, the objective asks every word
    of :func:`pi1_words` to take the same value as in ``base``, so a zero
    residual means the two representations restrict to one and the same
    representation of the surface group.
    """
    structure = Structure.parse(structure)
    if base.topology.kind is not CurveType.TYPE0:
        raise InvalidArgument("extensions with a shared unitary part are only compared for type 0 curves")
    k = base.k if k is None else k
    n = base.n
    schema = pres.generator_schema(base.topology, structure)
    eps = [g.epsilon for g in schema.generators]
    free = [i for i, e in enumerate(eps) if e == 1]
    slot = {g: j for j, g in enumerate(free)}

    def factors_for(word):
        out = []
        for gen, form in pres.matrix_factors(word, eps):
            if gen in slot:
                out.append(("var", slot[gen], form))
            else:
                out.append(("const", pres.apply_form(base.matrices[gen], form)))
        return tuple(out)

    rel_word, rel_sign = pres.relator(base.topology, structure)
    terms = [Term(factors_for(rel_word), pres.central_target(n, k) * np.eye(n, dtype=complex), float(rel_sign))]
    for w in pi1_words(schema):
        ref = pres.evaluate_schema_word(w, base.schema, base.matrices, n)
        sign = pres.cocycle_sign(w, eps) if structure is Structure.QUATERNIONIC else 1
        terms.append(Term(factors_for(w), ref.matrix, float(sign)))
    kinds = [schema.group(i, n) for i in free]
    obj = ProductObjective(kinds, terms)
    best = None
    for i in range(starts):
        rng = _start_rng(seed, i)
        X0 = [linalg.haar_sample(kind, rng) for kind in kinds]
        report = descend(obj, X0, max_iters=max_iters)
        value = obj.value(report.X)
        if best is None or value < best[0]:
            best = (value, report.X, report.iterations, i)
    value, X, iters, i = best
    mats = list(base.matrices)
    for j, g in enumerate(free):
        mats[g] = linalg.nearest_member(kinds[j], X[j])
    rep = Representation(base.topology, structure, n, k, tuple(mats))
    return SolveResult(rep, value, iters, bool(value < tol), int(seed), i)


# ---------------------------------------------------------------------------
# gauge action


def _gauge_forms(gen: pres.Generator):
    return "id", ("conjinv" if gen.gauge_right_conjugated else "inv")


def apply_gauge(g: GaugeElement, rep: Representation) -> Representation:
    """``M -> g_left M conj^c(g_right)^-1`` generator by generator."""
    schema = rep.schema
    g.check(schema, rep.n)
    out = []
    for gen, M in zip(schema.generators, rep.matrices):
        left = g.matrices[gen.gauge_left]
        right = pres.apply_form(g.matrices[gen.gauge_right], _gauge_forms(gen)[1])
        out.append(left @ M @ right)
    return rep.replace(matrices=out)


def _check_compatible(rep1: Representation, rep2: Representation):
    same = (rep1.topology == rep2.topology and rep1.structure == rep2.structure
            and rep1.n == rep2.n and rep1.k == rep2.k)
    if not same:
        raise InvalidArgument("representations differ in topology, structure, rank or degree")


def rep_distance(rep1: Representation, rep2: Representation) -> float:
    return float(sum(np.sum(np.abs(a - b) ** 2) for a, b in zip(rep1.matrices, rep2.matrices)))


def _intertwiner_guess(rep1: Representation, rep2: Representation) -> GaugeElement:
    # Real-linear equations g_l M1 = M2 conj^c(g_r) in the vertex matrices;
    # the right singular vector of the smallest singular value is the best
    # linear intertwiner, projected back onto the vertex groups.
    schema = rep1.schema
    n = rep1.n
    V = len(schema.vertex_families)
    dim = 2 * n * n * V
    rows = []
    basis = np.eye(dim)
    for col in basis.T:
        gs = []
        for v in range(V):
            chunk = col[2 * n * n * v: 2 * n * n * (v + 1)]
            gs.append(chunk[: n * n].reshape(n, n) + 1j * chunk[n * n:].reshape(n, n))
        eqs = []
        for gen, M1, M2 in zip(schema.generators, rep1.matrices, rep2.matrices):
            gr = gs[gen.gauge_right].conj() if gen.gauge_right_conjugated else gs[gen.gauge_right]
            eqs.append(linalg.realify(gs[gen.gauge_left] @ M1 - M2 @ gr))
        # Keep the system well posed at vertices no generator touches.
        rows.append(np.concatenate(eqs) if eqs else np.zeros(0))
    A = np.array(rows).T
    if A.size == 0:
        return GaugeElement.identity(schema, n)
    _, _, Vh = np.linalg.svd(A)
    x = Vh[-1]
    raw = []
    for v in range(V):
        chunk = x[2 * n * n * v: 2 * n * n * (v + 1)]
        raw.append(chunk[: n * n].reshape(n, n) + 1j * chunk[n * n:].reshape(n, n))
    # When no edge conjugates, i g solves the same equations as g, so the null
    # vector carries an arbitrary phase; undo it before projecting.
    obj = _align_objective(rep1, rep2)
    best, best_val = None, math.inf
    for phi in np.arange(8) * np.pi / 8:
        mats = []
        for v, G in enumerate(raw):
            kind = schema.vertex_group(v, n)
            if np.linalg.norm(G) < 1e-12:
                mats.append(np.eye(n, dtype=complex))
            else:
                mats.append(linalg.nearest_member(kind, np.exp(1j * phi) * G))
        val = obj.value(mats)
        if val < best_val:
            best, best_val = mats, val
    return GaugeElement(tuple(best))


def _align_objective(rep1: Representation, rep2: Representation) -> ProductObjective:
    schema = rep1.schema
    n = rep1.n
    kinds = [schema.vertex_group(v, n) for v in range(len(schema.vertex_families))]
    terms = []
    for gen, M1, M2 in zip(schema.generators, rep1.matrices, rep2.matrices):
        left, right = _gauge_forms(gen)
        terms.append(Term((("var", gen.gauge_left, left), ("const", M1), ("var", gen.gauge_right, right)), M2))
    return ProductObjective(kinds, terms)


def orbit_align(rep1: Representation, rep2: Representation, seed: int = 0, max_iters: int = 2000,
                restarts: int = 4) -> tuple[GaugeElement, float]:
    """Gauge ``g`` (approximately) minimising ``sum ||(g . rep1) - rep2||^2`` and the value reached."""
    _check_compatible(rep1, rep2)
    schema = rep1.schema
    n = rep1.n
    obj = _align_objective(rep1, rep2)
    candidates = [GaugeElement.identity(schema, n), _intertwiner_guess(rep1, rep2)]
    rng = np.random.default_rng(seed)
    candidates += [GaugeElement.random(schema, n, rng) for _ in range(restarts)]
    best_g, best_val = None, math.inf
    for cand in candidates:
        report = descend(obj, list(cand.matrices), max_iters=max_iters, tol=1e-28)
        X = [linalg.nearest_member(kind, x) for kind, x in zip(obj.kinds, report.X)]
        val = obj.value(X)
        if val < best_val:
            best_g, best_val = GaugeElement(tuple(X)), val
        if best_val < 1e-24:
            break
    return best_g, float(best_val)


# ---------------------------------------------------------------------------
# invariants of the gauge action


def closed_words(schema: GeneratorSchema, max_len: int) -> list[pres.TwistedWord]:
    """Reduced words of grade 0 that start and end at gauge vertex 0, in canonical order.

    A letter ``x`` runs from ``gauge_right`` to ``gauge_left``; reading a word
    left to right walks the vertex graph backwards from vertex 0.
    """
    if max_len < 1:
        raise InvalidArgument("max_len must be >= 1")
    letters = []
    for i, gen in enumerate(schema.generators):
        letters.append((i, 1, gen.gauge_left, gen.gauge_right, gen.epsilon))
        letters.append((i, -1, gen.gauge_right, gen.gauge_left, gen.epsilon))
    out = []

    def grow(prefix, vertex, parity):
        if prefix and vertex == 0 and parity == 0:
            out.append(pres.word(*[(g, e) for g, e in prefix]))
        if len(prefix) == max_len:
            return
        for g, e, start, end, eps in letters:
            if start != vertex:
                continue
            if prefix and prefix[-1] == (g, -e):
                continue
            grow(prefix + [(g, e)], end, parity ^ eps)

    grow([], 0, 0)
    out.sort(key=lambda w: (len(w), [(l.gen, -l.exponent) for l in w.letters]))
    return out


def trace_invariants(rep: Representation, max_len: int = 3) -> list[complex]:
    """Traces of all closed grade-0 words up to ``max_len``; gauge invariant."""
    schema = rep.schema
    eps = [g.epsilon for g in schema.generators]
    out = []
    for w in closed_words(schema, max_len):
        val = pres.evaluate_word(w, list(rep.matrices), rep.structure, rep.n, eps=eps, check=False)
        out.append(complex(np.trace(val.matrix)))
    return out


def gauge_differential(rep: Representation) -> np.ndarray:
    """Real matrix of the infinitesimal gauge action in left-trivialised generator coordinates."""
    schema = rep.schema
    n = rep.n
    gen_bases = [linalg.algebra_basis(schema.group(i, n)) for i in range(len(schema.generators))]
    cols = []
    for v in range(len(schema.vertex_families)):
        for xi in linalg.algebra_basis(schema.vertex_group(v, n)):
            col = []
            for i, (gen, M) in enumerate(zip(schema.generators, rep.matrices)):
                d = np.zeros((n, n), dtype=complex)
                if gen.gauge_left == v:
                    d = d + xi @ M
                if gen.gauge_right == v:
                    d = d - M @ (xi.conj() if gen.gauge_right_conjugated else xi)
                omega = linalg.dagger(M) @ d
                col.extend(linalg.frob_inner(B, omega) for B in gen_bases[i])
            cols.append(col)
    return np.array(cols, dtype=float).T


def estimate_moduli_dimension(rep: Representation, rel_tol: float = linalg.DEFAULT_RANK_TOL) -> int:
    """``dim T - rank(D relator) - rank(D gauge action)`` at a converged point."""
    res = residual(rep)
    if not res < SUCCESS_TOL:
        raise InvalidState(f"representation is not a solution (residual {res:.3e})")
    obj, schema = relator_objective(rep.topology, rep.structure, rep.n, rep.k)
    dim_t = sum(kind.dimension for kind in obj.kinds)
    # Both differentials are built from unitary factors, so their entries are O(1).
    relator_rank = linalg.numerical_rank(obj.differential(list(rep.matrices)), rel_tol, scale=1.0)
    orbit_rank = linalg.numerical_rank(gauge_differential(rep), rel_tol, scale=1.0)
    return int(dim_t - relator_rank - orbit_rank)


def expected_dimension(topology: CurveTopology, n: int) -> int:
    """``n^2 (g - 1) + 1``, the dimension at irreducible points."""
    return n * n * (topology.g - 1) + 1
