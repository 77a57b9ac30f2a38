"""Topological classes, Stiefel-Whitney data and commutant-based irreducibility tests."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from . import holonomy
from . import linalg
from . import presentation as pres
from .errors import InvalidArgument
from .presentation import CurveTopology, CurveType, Structure
from .solver import SUCCESS_TOL, Representation, residual


@dataclass(frozen=True)
class TopologicalClass:
    n: int
    k: int
    structure: Structure
    w1: tuple[int, ...] = field(default=())

    def to_json(self) -> dict:
        return {"n": int(self.n), "k": int(self.k), "w1": [int(x) for x in self.w1],
                "structure": Structure.parse(self.structure).value}


def obstruction(topology: CurveTopology, structure, n: int, k: int,
                w1: Sequence[int] | None = None) -> str | None:
    """The classification rule violated by ``(n, k, w1)``, or ``None`` when realizable."""
    structure = Structure.parse(structure)
    if n < 1:
        raise InvalidArgument(f"rank must be positive, got {n}")
    if w1 is not None:
        if structure is not Structure.REAL or topology.r == 0:
            raise InvalidArgument("w1 is only defined for real bundles over curves with real points")
        if len(w1) != topology.r:
            raise InvalidArgument(f"w1 needs {topology.r} entries, got {len(w1)}")
        if any(x not in (0, 1) for x in w1):
            raise InvalidArgument("w1 entries must be 0 or 1")
    if structure is Structure.REAL:
        if topology.r == 0:
            return None if k % 2 == 0 else "c1 must be even for real bundles on a curve without real points"
        if w1 is not None and (k - sum(w1)) % 2:
            return "c1 must be congruent to the sum of w1 over the real circles (mod 2)"
        return None
    if topology.r > 0 and n % 2:
        return "quaternionic bundles over a curve with real points have even rank"
    if (k + n * (topology.g - 1)) % 2:
        return "k + n(g - 1) must be even for quaternionic bundles"
    return None


def realizable(topology: CurveTopology, structure, n: int, k: int, w1: Sequence[int] | None = None) -> bool:
    return obstruction(topology, structure, n, k, w1) is None


def _require_solution(rep: Representation):
    res = residual(rep)
    if not res < SUCCESS_TOL:
        raise InvalidArgument(f"representation is not a solution (residual {res:.3e})")


def stiefel_whitney(rep: Representation) -> tuple[int, ...]:
    """``w1`` of the real part over each real circle: 0 iff ``det C_j = +1``."""
    if rep.structure is not Structure.REAL or rep.topology.r == 0:
        raise InvalidArgument("Stiefel-Whitney data needs a real representation on a curve with real points")
    _require_solution(rep)
    out = []
    for j in range(1, rep.topology.r + 1):
        d = np.linalg.det(rep[f"C{j}"]).real
        out.append(0 if d > 0 else 1)
    return tuple(out)


def _nullity(A: np.ndarray, rel_tol: float) -> int:
    return A.shape[1] - linalg.numerical_rank(A, rel_tol)


def _commutant_system(rep: Representation, twisted: bool) -> np.ndarray:
    # Unknowns: one complex matrix per vertex of the doubled complex, as real
    # coordinates.  Edge equations make the family parallel; the twisted
    # version also asks it to commute with the antiunitary lifts.
    cx = holonomy.build_complex(rep.topology)
    conn = holonomy.rep_to_connection(rep, cx)
    n, V = rep.n, cx.n_vertices
    size = 2 * n * n * V
    cols = []
    for c in range(size):
        x = np.zeros(size)
        x[c] = 1.0
        X = []
        for v in range(V):
            chunk = x[2 * n * n * v: 2 * n * n * (v + 1)]
            X.append(chunk[: n * n].reshape(n, n) + 1j * chunk[n * n:].reshape(n, n))
        eqs = [X[e.tail] @ U - U @ X[e.head] for e, U in zip(cx.edges, conn.transport)]
        if twisted:
            eqs += [X[cx.vertex_sigma[v]] @ M - M @ X[v].conj() for v, M in enumerate(conn.lift)]
        cols.append(np.concatenate([linalg.realify(E) for E in eqs]))
    return np.array(cols).T


def pi1_commutant_dimension(rep: Representation, rel_tol: float = linalg.DEFAULT_RANK_TOL) -> int:
    """Complex dimension of the commutant of the underlying surface-group representation."""
    A = _commutant_system(rep, twisted=False)
    # The edge equations are complex linear, so the real nullity is even.
    return _nullity(A, rel_tol) // 2


def twisted_commutant_dimension(rep: Representation, rel_tol: float = linalg.DEFAULT_RANK_TOL) -> int:
    """Real dimension of the endomorphisms commuting with the whole extended representation."""
    return _nullity(_commutant_system(rep, twisted=True), rel_tol)


def random_path_words(schema: pres.GeneratorSchema, count: int, max_len: int, rng) -> list[pres.TwistedWord]:
    """Random reduced words of grade 1 that begin and end at gauge vertex 0."""
    eps = [g.epsilon for g in schema.generators]
    out = []
    attempts = 0
    while len(out) < count and attempts < 1000 * count:
        attempts += 1
        length = int(rng.integers(1, max_len + 1))
        letters = []
        vertex = 0
        ok = True
        for _ in range(length):
            choices = []
            for i, gen in enumerate(schema.generators):
                if gen.gauge_left == vertex:
                    choices.append((i, 1, gen.gauge_right))
                if gen.gauge_right == vertex:
                    choices.append((i, -1, gen.gauge_left))
            choices = [c for c in choices if not (letters and letters[-1] == (c[0], -c[1]))]
            if not choices:
                ok = False
                break
            i, e, vertex = choices[int(rng.integers(len(choices)))]
            letters.append((i, e))
        if not ok or vertex != 0:
            continue
        w = pres.word(*letters)
        if w.epsilon(eps) == 1:
            out.append(w)
    return out


@dataclass(frozen=True, eq=False)
class ExtensionReport:
    C: np.ndarray
    constant: bool
    commutes: bool
    c_cbar: complex | None
    spread: float
    commutator_norm: float

    def to_json(self) -> dict:
        return {
            "C": linalg.matrix_to_json(self.C),
            "constant": self.constant,
            "commutes": self.commutes,
            "c_cbar": None if self.c_cbar is None else [self.c_cbar.real, self.c_cbar.imag],
            "spread": self.spread,
            "commutator_norm": self.commutator_norm,
        }


def extension_compatibility(rep_hat: Representation, rep_tilde: Representation, n_words: int = 10,
                            max_len: int = 4, seed: int = 0, tol: float = 1e-8) -> ExtensionReport:
    """Compare two extensions of one surface-group representation.

    For a grade-1 element ``x`` the two antiunitary values differ by the linear
    map ``C(x) = rep_hat(x)^-1 rep_tilde(x)``, whose matrix is
    ``conj(M_hat^-1 M_tilde)``.
    """
    if rep_hat.topology != rep_tilde.topology or rep_hat.n != rep_tilde.n:
        raise InvalidArgument("representations have different shapes")
    hat_schema = rep_hat.schema
    tilde_schema = rep_tilde.schema
    eps = [g.epsilon for g in hat_schema.generators]
    if eps != [g.epsilon for g in tilde_schema.generators] or hat_schema.labels != tilde_schema.labels:
        raise InvalidArgument("representations use different generator schemas")
    rng = np.random.default_rng(seed)
    words = [pres.word(i) for i, e in enumerate(eps) if e == 1 and hat_schema.generators[i].gauge_left == 0
             and hat_schema.generators[i].gauge_right == 0]
    words += random_path_words(hat_schema, n_words, max_len, rng)
    if not words:
        raise InvalidArgument("topology has no grade-1 generators at the base vertex")
    Cs = []
    for w in words:
        a = pres.evaluate_schema_word(w, hat_schema, rep_hat.matrices, rep_hat.n)
        b = pres.evaluate_schema_word(w, tilde_schema, rep_tilde.matrices, rep_tilde.n)
        Cs.append((np.linalg.inv(a.matrix) @ b.matrix).conj())
    C = Cs[0]
    spread = max(float(np.linalg.norm(X - C)) for X in Cs)
    comm = 0.0
    for i, e in enumerate(eps):
        if e == 0 and hat_schema.generators[i].gauge_left == 0 and hat_schema.generators[i].gauge_right == 0:
            M = rep_hat.matrices[i]
            comm = max(comm, float(np.linalg.norm(C @ M - M @ C)))
    c = np.trace(C) / rep_hat.n
    c_cbar = complex(c * np.conj(c)) if np.linalg.norm(C - c * np.eye(rep_hat.n)) < tol else None
    return ExtensionReport(C, spread < tol, comm < tol, c_cbar, spread, comm)
