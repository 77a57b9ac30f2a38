"""Equivariant cell complexes of the curve and flat lattice connections on them.

The complex is the double of the one-face polygon model of the quotient
``X / sigma``: every gauge vertex of the generator schema has lifts on two
sheets (one lift if it lies on a real circle), every generator has two lifted
edges swapped by the involution (one if it runs along a real circle), and the
two faces are the lift of the relator word and its image.

Conventions:

* ``U_e`` transports the fibre at ``head(e)`` to the fibre at ``tail(e)``, so a
  path ``e_1 e_2 ...`` has transport ``U_{e_1} U_{e_2} ...``.
* The antiunitary lift at ``v`` is ``w -> M_v conj(w)`` from the fibre at ``v``
  to the fibre at ``sigma(v)``.
* Equivariance of transport reads ``U_{sigma e} = M_tail conj(U_e) M_head^-1``.
* A face lifting the relator has holonomy ``zeta`` and its image ``conj(zeta)``;
  ``zeta = 1`` in degree 0, where this is ordinary flatness.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np

from . import linalg
from . import presentation as pres
from .errors import InvalidArgument, InvalidState
from .presentation import CurveTopology, CurveType, Structure
from .solver import SUCCESS_TOL, Representation, residual

CONNECTION_TOL = 1e-8


@dataclass(frozen=True)
class Edge:
    tail: int
    head: int
    generator: int
    sheet: int | None
    circle: int | None = None


@dataclass(frozen=True)
class EquivariantComplex:
    topology: CurveTopology
    vertex_sigma: tuple[int, ...]
    vertex_fixed: tuple[bool, ...]
    vertex_of: Mapping[tuple[int, int], int]
    edges: tuple[Edge, ...]
    edge_sigma: tuple[int, ...]
    lift: Mapping[tuple[int, int], int]
    faces: tuple[tuple[tuple[int, int], ...], ...]
    face_sigma: tuple[int, ...]

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_sigma)

    @property
    def euler_characteristic(self) -> int:
        return self.n_vertices - len(self.edges) + len(self.faces)

    @property
    def base_vertex(self) -> int:
        return self.vertex_of[(0, 0)]

    def face_start(self, f: int) -> int:
        e, s = self.faces[f][0]
        edge = self.edges[e]
        return edge.tail if s > 0 else edge.head

    def fixed_circles(self) -> list[list[int]]:
        """Fixed edges grouped into connected circles."""
        fixed = [i for i, e in enumerate(self.edges) if self.edge_sigma[i] == i]
        groups: dict[int, list[int]] = {}
        for i in fixed:
            groups.setdefault(self.edges[i].circle, []).append(i)
        return [groups[c] for c in sorted(groups)]

    def check(self) -> list[str]:
        """Names of violated structural invariants (empty when the complex is sound)."""
        problems = []
        for name, perm in (("vertex", self.vertex_sigma), ("edge", self.edge_sigma), ("face", self.face_sigma)):
            if any(perm[perm[i]] != i for i in range(len(perm))):
                problems.append(f"{name} involution")
        if self.euler_characteristic != 2 - 2 * self.topology.g:
            problems.append("euler characteristic")
        for f, boundary in enumerate(self.faces):
            pos = self.face_start(f)
            for e, s in boundary:
                edge = self.edges[e]
                start, end = (edge.tail, edge.head) if s > 0 else (edge.head, edge.tail)
                if start != pos:
                    problems.append(f"face {f} boundary not a path")
                    break
                pos = end
            else:
                if pos != self.face_start(f):
                    problems.append(f"face {f} boundary not closed")
        uses = [0] * len(self.edges)
        for boundary in self.faces:
            for e, _ in boundary:
                uses[e] += 1
        if any(u != 2 for u in uses):
            problems.append("edge incidence")
        for i, e in enumerate(self.edges):
            se = self.edges[self.edge_sigma[i]]
            if (se.tail, se.head) != (self.vertex_sigma[e.tail], self.vertex_sigma[e.head]):
                problems.append(f"edge {i} not equivariant")
        n_circles = len(self.fixed_circles())
        if n_circles != self.topology.r:
            problems.append("fixed circles")
        return problems

    def to_json(self) -> dict:
        return {
            "topology": self.topology.to_json(),
            "vertices": [{"sigma": s, "fixed": f} for s, f in zip(self.vertex_sigma, self.vertex_fixed)],
            "edges": [{"tail": e.tail, "head": e.head, "generator": e.generator, "sheet": e.sheet,
                       "circle": e.circle, "sigma": self.edge_sigma[i]} for i, e in enumerate(self.edges)],
            "faces": [{"boundary": [[e, s] for e, s in b], "sigma": self.face_sigma[i]}
                      for i, b in enumerate(self.faces)],
        }


def build_complex(topology: CurveTopology) -> EquivariantComplex:
    schema = pres.generator_schema(topology, Structure.REAL)
    n_gauge = len(schema.vertex_families)
    if topology.kind is CurveType.TYPE0:
        fixed_gauge = [False]
    elif topology.kind is CurveType.TYPE1:
        fixed_gauge = [True] * n_gauge
    else:
        fixed_gauge = [False] + [True] * (n_gauge - 1)

    vertex_of: dict[tuple[int, int], int] = {}
    sigma_v: list[int] = []
    fixed_v: list[bool] = []
    for v in range(n_gauge):
        if fixed_gauge[v]:
            idx = len(sigma_v)
            vertex_of[(v, 0)] = vertex_of[(v, 1)] = idx
            sigma_v.append(idx)
            fixed_v.append(True)
        else:
            a, b = len(sigma_v), len(sigma_v) + 1
            vertex_of[(v, 0)], vertex_of[(v, 1)] = a, b
            sigma_v += [b, a]
            fixed_v += [False, False]

    edges: list[Edge] = []
    sigma_e: list[int] = []
    lift: dict[tuple[int, int], int] = {}
    circle = 0
    for i, gen in enumerate(schema.generators):
        on_circle = gen.family is not linalg.Family.UNITARY
        if on_circle:
            circle += 1
            v = vertex_of[(gen.gauge_left, 0)]
            idx = len(edges)
            edges.append(Edge(v, v, i, None, circle))
            sigma_e.append(idx)
            lift[(i, 0)] = lift[(i, 1)] = idx
            continue
        base = len(edges)
        for p in (0, 1):
            tail = vertex_of[(gen.gauge_left, p)]
            head = vertex_of[(gen.gauge_right, p ^ gen.epsilon)]
            edges.append(Edge(tail, head, i, p))
            lift[(i, p)] = base + p
        sigma_e += [base + 1, base]

    word = pres.relator_word(topology, Structure.REAL)
    eps = [g.epsilon for g in schema.generators]
    plus = []
    parity = 0
    for letter in word.letters:
        e = eps[letter.gen]
        if letter.exponent > 0:
            plus.append((lift[(letter.gen, parity)], 1))
        else:
            plus.append((lift[(letter.gen, parity ^ e)], -1))
        parity ^= e
    minus = [(sigma_e[e], s) for e, s in plus]
    return EquivariantComplex(topology, tuple(sigma_v), tuple(fixed_v), vertex_of, tuple(edges),
                              tuple(sigma_e), lift, (tuple(plus), tuple(minus)), (1, 0))


# ---------------------------------------------------------------------------
# connections


@dataclass(frozen=True, eq=False)
class LatticeConnection:
    transport: tuple[np.ndarray, ...]
    lift: tuple[np.ndarray, ...]
    structure: Structure
    n: int
    degree: int = 0

    def to_json(self) -> dict:
        return {
            "structure": self.structure.value,
            "n": int(self.n),
            "degree": int(self.degree),
            "transport": [linalg.matrix_to_json(U) for U in self.transport],
            "lift": [linalg.matrix_to_json(M) for M in self.lift],
        }

    @classmethod
    def from_json(cls, data: Mapping) -> "LatticeConnection":
        try:
            return cls(tuple(linalg.matrix_from_json(U) for U in data["transport"]),
                       tuple(linalg.matrix_from_json(M) for M in data["lift"]),
                       Structure.parse(data["structure"]), int(data["n"]), int(data.get("degree", 0)))
        except (KeyError, TypeError) as exc:
            raise InvalidArgument(f"malformed connection: {exc!r}") from None


def _standard_lift(n: int, structure: Structure) -> np.ndarray:
    return np.eye(n, dtype=complex) if structure is Structure.REAL else linalg.j_matrix(n).astype(complex)


def rep_to_connection(rep: Representation, cx: EquivariantComplex | None = None) -> LatticeConnection:
    res = residual(rep)
    if not res < SUCCESS_TOL:
        raise InvalidState(f"representation is not a solution (residual {res:.3e})")
    cx = build_complex(rep.topology) if cx is None else cx
    if cx.topology != rep.topology:
        raise InvalidArgument("complex was built for a different topology")
    n, s = rep.n, rep.structure.sign
    lifts = [None] * cx.n_vertices
    for (v, p), idx in cx.vertex_of.items():
        if cx.vertex_fixed[idx]:
            lifts[idx] = _standard_lift(n, rep.structure)
        else:
            lifts[idx] = np.eye(n, dtype=complex) * (1 if p == 0 else s)
    transport = [None] * len(cx.edges)
    for i, e in enumerate(cx.edges):
        if e.sheet in (0, None):
            transport[i] = np.array(rep.matrices[e.generator])
    for i, e in enumerate(cx.edges):
        if transport[i] is None:
            j = cx.edge_sigma[i]
            src = cx.edges[j]
            transport[i] = lifts[src.tail] @ transport[j].conj() @ linalg.dagger(lifts[src.head])
    return LatticeConnection(tuple(transport), tuple(lifts), rep.structure, n, rep.k)


def _path_transport(conn: LatticeConnection, cx: EquivariantComplex, path) -> np.ndarray:
    out = np.eye(conn.n, dtype=complex)
    for e, s in path:
        U = conn.transport[e]
        out = out @ (U if s > 0 else linalg.dagger(U))
    return out


def face_targets(cx: EquivariantComplex, n: int, k: int) -> list[complex]:
    zeta = pres.central_target(n, k)
    return [zeta, np.conj(zeta)]


def face_holonomies(conn: LatticeConnection, cx: EquivariantComplex) -> list[np.ndarray]:
    return [_path_transport(conn, cx, f) for f in cx.faces]


@dataclass(frozen=True)
class Defects:
    unitarity: float
    flatness: float
    equivariance: float
    sigma_square: float

    def worst(self) -> tuple[str, float]:
        items = {"unitarity": self.unitarity, "flatness": self.flatness,
                 "equivariance": self.equivariance, "sigma_square": self.sigma_square}
        name = max(items, key=items.get)
        return name, items[name]

    def to_json(self) -> dict:
        return {"unitarity": self.unitarity, "flatness": self.flatness,
                "equivariance": self.equivariance, "sigma_square": self.sigma_square}


def defects(conn: LatticeConnection, cx: EquivariantComplex) -> Defects:
    n = conn.n
    if len(conn.transport) != len(cx.edges) or len(conn.lift) != cx.n_vertices:
        raise InvalidArgument("connection does not match the complex")
    U_n = linalg.unitary(n)
    unit = max([linalg.membership_defect(U_n, U) for U in conn.transport]
               + [linalg.membership_defect(U_n, M) for M in conn.lift])
    targets = face_targets(cx, n, conn.degree)
    flat = max(float(np.linalg.norm(H - t * np.eye(n))) for H, t in zip(face_holonomies(conn, cx), targets))
    equi = 0.0
    for i, e in enumerate(cx.edges):
        want = conn.lift[e.tail] @ conn.transport[i].conj() @ linalg.dagger(conn.lift[e.head])
        equi = max(equi, float(np.linalg.norm(conn.transport[cx.edge_sigma[i]] - want)))
    s = conn.structure.sign
    sq = max(float(np.linalg.norm(conn.lift[cx.vertex_sigma[v]] @ conn.lift[v].conj() - s * np.eye(n)))
             for v in range(cx.n_vertices))
    return Defects(unit, flat, equi, sq)


def plaquette_energy(conn: LatticeConnection, cx: EquivariantComplex) -> float:
    """Sum over faces of ``||hol - target||^2`` (a diagnostic, not an action to minimise)."""
    targets = face_targets(cx, conn.n, conn.degree)
    return float(sum(np.sum(np.abs(H - t * np.eye(conn.n)) ** 2)
                     for H, t in zip(face_holonomies(conn, cx), targets)))


def gauge_transform(conn: LatticeConnection, cx: EquivariantComplex, h: Sequence[np.ndarray]) -> LatticeConnection:
    """Vertex gauge ``U_e -> h_tail U_e h_head^-1``, ``M_v -> h_sigma(v) M_v conj(h_v)^-1``."""
    transport = tuple(h[e.tail] @ U @ linalg.dagger(h[e.head]) for e, U in zip(cx.edges, conn.transport))
    lift = tuple(h[cx.vertex_sigma[v]] @ M @ linalg.dagger(h[v]).conj() for v, M in enumerate(conn.lift))
    return LatticeConnection(transport, lift, conn.structure, conn.n, conn.degree)


def random_vertex_gauge(cx: EquivariantComplex, n: int, rng) -> list[np.ndarray]:
    return [linalg.haar_sample(linalg.unitary(n), rng) for _ in range(cx.n_vertices)]


def connection_to_rep(conn: LatticeConnection, cx: EquivariantComplex, base_vertex: int | None = None,
                      tol: float = CONNECTION_TOL) -> Representation:
    """Read the generator matrices off a connection after fixing the lifts to standard form."""
    base = cx.base_vertex
    if base_vertex is not None and base_vertex != base:
        raise InvalidArgument(f"holonomy is read at vertex {base}; vertex {base_vertex} lies on another sheet"
                              " or over another gauge vertex")
    d = defects(conn, cx)
    name, value = d.worst()
    if value > tol:
        raise InvalidArgument(f"connection violates {name} (defect {value:.3e})")
    n, s = conn.n, conn.structure.sign
    h = [None] * cx.n_vertices
    rng = np.random.default_rng(0)
    for (v, p), idx in sorted(cx.vertex_of.items()):
        if h[idx] is not None:
            continue
        M = conn.lift[idx]
        if cx.vertex_fixed[idx]:
            W = linalg.structure_frame(M, s, rng)
            h[idx] = linalg.dagger(W)
        else:
            # Sheet 0 keeps its frame; sheet 1 absorbs the lift so M becomes I there.
            h[idx] = np.eye(n, dtype=complex)
            h[cx.vertex_sigma[idx]] = np.linalg.inv(M)
    std = gauge_transform(conn, cx, h)
    schema = pres.generator_schema(cx.topology, conn.structure)
    mats = []
    for i, gen in enumerate(schema.generators):
        M = std.transport[cx.lift[(i, 0)]]
        mats.append(linalg.nearest_member(schema.group(i, n), M))
    return Representation(cx.topology, conn.structure, n, conn.degree, tuple(mats))


# ---------------------------------------------------------------------------
# path independence of the lift


def spanning_tree_paths(cx: EquivariantComplex) -> dict[int, list[tuple[int, int]]]:
    """Breadth-first tree from the base vertex, lowest edge index first.

    Returns for each vertex ``x`` an edge path from ``x`` to the base vertex.
    """
    base = cx.base_vertex
    adj: dict[int, list[tuple[int, int, int]]] = {v: [] for v in range(cx.n_vertices)}
    for i, e in enumerate(cx.edges):
        adj[e.tail].append((i, e.head, 1))
        adj[e.head].append((i, e.tail, -1))
    paths = {base: []}
    queue = deque([base])
    while queue:
        u = queue.popleft()
        for i, w, s in sorted(adj[u]):
            if w in paths:
                continue
            # Step from w back to u uses edge i in the opposite direction.
            paths[w] = [(i, -s)] + paths[u]
            queue.append(w)
    return paths


def _corner_loops(cx: EquivariantComplex, x: int):
    for f, boundary in enumerate(cx.faces):
        m = len(boundary)
        for c in range(m):
            e, s = boundary[c]
            edge = cx.edges[e]
            start = edge.tail if s > 0 else edge.head
            if start == x:
                yield f, tuple(boundary[c:] + boundary[:c])


def path_independence_check(conn: LatticeConnection, cx: EquivariantComplex,
                            vertex_pairs: Sequence[tuple[int, int]] | None = None) -> float:
    """Largest disagreement between lifts obtained along relator-homotopic paths.

    The lift at ``x`` is rebuilt from the base lift along a tree path ``P``
    from ``x`` to the base: ``U_{sigma P} M_base conj(U_P)^-1``.  It is
    compared with the stored lift and with the value obtained when ``P`` is
    preceded by a face loop at ``x``, whose prescribed central holonomy is
    divided out.  Flat connections give zero.
    """
    paths = spanning_tree_paths(cx)
    base = cx.base_vertex
    n = conn.n
    targets = face_targets(cx, n, conn.degree)
    if vertex_pairs is None:
        vertex_pairs = sorted({(min(v, cx.vertex_sigma[v]), max(v, cx.vertex_sigma[v]))
                               for v in range(cx.n_vertices)})
    worst = 0.0
    for x, y in vertex_pairs:
        if cx.vertex_sigma[x] != y:
            raise InvalidArgument(f"vertices {x} and {y} are not swapped by the involution")
        P = paths[x]
        sP = [(cx.edge_sigma[e], s) for e, s in P]
        U_sP = _path_transport(conn, cx, sP)
        U_P = _path_transport(conn, cx, P)
        ref = U_sP @ conn.lift[base] @ np.linalg.inv(U_P.conj())
        worst = max(worst, float(np.linalg.norm(ref - conn.lift[x])))
        for f, loop in _corner_loops(cx, x):
            U_LP = _path_transport(conn, cx, loop) @ U_P / targets[f]
            alt = U_sP @ conn.lift[base] @ np.linalg.inv(U_LP.conj())
            worst = max(worst, float(np.linalg.norm(alt - ref)))
    return worst
