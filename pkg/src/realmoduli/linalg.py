"""Dense complex matrices on the compact groups U(n), O(n) and Sp(n/2).

All matrices are ``complex128`` numpy arrays, including orthogonal ones (their
imaginary part is zero).  The quaternionic unitary group is realised inside
U(n) as ``{M : conj(M) = J^{-1} M J}`` with ``J = [[0, -I], [I, 0]]``.

The Riemannian metric everywhere is the real Frobenius inner product
``Re tr(X^H Y)``.  Tangent vectors at ``X`` are ambient matrices ``X @ Omega``
with ``Omega`` in the Lie algebra; the optimiser works with ``Omega`` directly
(left trivialisation), so no vector transport is needed.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import InvalidArgument

MEMBERSHIP_TOL = 1e-8
DEFAULT_RANK_TOL = 1e-8


class Family(str, enum.Enum):
    UNITARY = "unitary"
    ORTHOGONAL = "orthogonal"
    QUATERNIONIC = "quaternionic"


@dataclass(frozen=True)
class GroupKind:
    family: Family
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise InvalidArgument(f"group size must be positive, got {self.n}")
        if self.family is Family.QUATERNIONIC and self.n % 2:
            raise InvalidArgument(f"quaternionic unitary group needs even n, got {self.n}")

    @property
    def dimension(self) -> int:
        """Real dimension of the group manifold."""
        n = self.n
        if self.family is Family.UNITARY:
            return n * n
        if self.family is Family.ORTHOGONAL:
            return n * (n - 1) // 2
        m = n // 2
        return m * (2 * m + 1)

    def __str__(self):
        label = {Family.UNITARY: "U", Family.ORTHOGONAL: "O", Family.QUATERNIONIC: "Sp"}[self.family]
        size = self.n // 2 if self.family is Family.QUATERNIONIC else self.n
        return f"{label}({size})"


def unitary(n: int) -> GroupKind:
    return GroupKind(Family.UNITARY, n)


def orthogonal(n: int) -> GroupKind:
    return GroupKind(Family.ORTHOGONAL, n)


def quaternionic(n: int) -> GroupKind:
    return GroupKind(Family.QUATERNIONIC, n)


@lru_cache(maxsize=None)
def _j_matrix(n: int) -> np.ndarray:
    m = n // 2
    J = np.zeros((n, n), dtype=complex)
    J[:m, m:] = -np.eye(m)
    J[m:, :m] = np.eye(m)
    J.setflags(write=False)
    return J


def j_matrix(n: int) -> np.ndarray:
    """The fixed quaternionic structure matrix ``[[0, -I], [I, 0]]`` of even size ``n``."""
    if n % 2:
        raise InvalidArgument(f"J is only defined for even n, got {n}")
    return _j_matrix(n)


def dagger(M: np.ndarray) -> np.ndarray:
    return M.conj().T


def frob_inner(X: np.ndarray, Y: np.ndarray) -> float:
    """Real Frobenius inner product ``Re tr(X^H Y)``."""
    return float(np.real(np.vdot(X, Y)))


def skew(A: np.ndarray) -> np.ndarray:
    return 0.5 * (A - dagger(A))


def membership_defect(kind: GroupKind, M: np.ndarray) -> float:
    """Frobenius distance of ``M`` from satisfying the defining equations of ``kind``."""
    M = np.asarray(M)
    n = kind.n
    if M.shape != (n, n):
        return float("inf")
    defect = np.linalg.norm(dagger(M) @ M - np.eye(n))
    if kind.family is Family.ORTHOGONAL:
        defect += np.linalg.norm(M.imag)
    elif kind.family is Family.QUATERNIONIC:
        J = _j_matrix(n)
        defect += np.linalg.norm(M.conj() - J.T @ M @ J)
    return float(defect)


def check_member(kind: GroupKind, M: np.ndarray, tol: float = MEMBERSHIP_TOL, what: str = "matrix"):
    defect = membership_defect(kind, M)
    if not defect <= tol:
        raise InvalidArgument(f"{what} is not in {kind} (defect {defect:.3e})")


def project_algebra(kind: GroupKind, omega: np.ndarray) -> np.ndarray:
    """Orthogonal projection of an arbitrary matrix onto the Lie algebra of ``kind``."""
    omega = skew(np.asarray(omega, dtype=complex))
    if kind.family is Family.ORTHOGONAL:
        return omega.real.astype(complex)
    if kind.family is Family.QUATERNIONIC:
        J = _j_matrix(kind.n)
        return 0.5 * (omega + J @ omega.conj() @ J.T)
    return omega


def project_tangent(kind: GroupKind, base: np.ndarray, ambient: np.ndarray) -> np.ndarray:
    """Project ``ambient`` onto the tangent space of ``kind`` at ``base``."""
    check_member(kind, base, what="base point")
    return base @ project_algebra(kind, dagger(base) @ ambient)


def expm_skew(omega: np.ndarray) -> np.ndarray:
    """Matrix exponential of a skew-Hermitian matrix via the Hermitian eigendecomposition."""
    H = -1j * skew(omega)
    H = 0.5 * (H + dagger(H))
    w, V = np.linalg.eigh(H)
    return (V * np.exp(1j * w)) @ dagger(V)


def _qr_positive(A: np.ndarray) -> np.ndarray:
    Q, R = np.linalg.qr(A)
    d = np.diagonal(R).copy()
    mag = np.abs(d)
    phase = np.where(mag > 0, d / np.where(mag > 0, mag, 1), 1.0)
    return Q * phase


def retract(kind: GroupKind, base: np.ndarray, tangent: np.ndarray) -> np.ndarray:
    """Map a tangent vector at ``base`` back onto the group.

    QR retraction for U(n) and O(n); the exponential map for Sp(n/2), whose
    defining equation QR does not respect.
    """
    base = np.asarray(base, dtype=complex)
    tangent = np.asarray(tangent, dtype=complex)
    if not np.any(tangent):
        return base.copy()
    if kind.family is Family.QUATERNIONIC:
        return base @ expm_skew(project_algebra(kind, dagger(base) @ tangent))
    if kind.family is Family.ORTHOGONAL:
        return _qr_positive((base + tangent).real).astype(complex)
    return _qr_positive(base + tangent)


def retract_algebra(kind: GroupKind, base: np.ndarray, omega: np.ndarray) -> np.ndarray:
    """Retraction along ``base @ omega`` with ``omega`` already in the Lie algebra."""
    if kind.family is Family.QUATERNIONIC:
        return base @ expm_skew(omega)
    return retract(kind, base, base @ omega)


def _quaternionic_frame(K_matrix: np.ndarray, rng: np.random.Generator, sign: int) -> np.ndarray:
    """Orthonormal frame adapted to the antiunitary map ``v -> K_matrix @ conj(v)``.

    For ``sign = +1`` (``K^2 = 1``) the columns are fixed by the map.  For
    ``sign = -1`` (``K^2 = -1``, even size) column ``m + i`` is the image of
    column ``i``.  In both cases the returned unitary ``W`` satisfies
    ``K_matrix @ conj(W) = W @ S`` with ``S = I`` or ``S = J``.
    """
    n = K_matrix.shape[0]
    cols: list[np.ndarray] = []

    def orth(v):
        for b in cols:
            v = v - np.vdot(b, v) * b
        return v

    if sign > 0:
        while len(cols) < n:
            u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
            v = orth(u + K_matrix @ u.conj())
            # Re-orthogonalise once for stability; keeps v fixed by K since coefficients are real.
            v = orth(v)
            nv = np.linalg.norm(v)
            if nv > 1e-6:
                cols.append(v / nv)
        return np.stack(cols, axis=1)

    m = n // 2
    firsts: list[np.ndarray] = []
    while len(firsts) < m:
        u = rng.standard_normal(n) + 1j * rng.standard_normal(n)
        v = orth(orth(u))
        nv = np.linalg.norm(v)
        if nv < 1e-6:
            continue
        v = v / nv
        w = K_matrix @ v.conj()
        firsts.append(v)
        cols.extend([v, w])
    seconds = [K_matrix @ v.conj() for v in firsts]
    return np.stack(firsts + seconds, axis=1)


def structure_frame(K_matrix: np.ndarray, sign: int, rng: np.random.Generator | None = None) -> np.ndarray:
    """Unitary ``W`` with ``K_matrix @ conj(W) = W @ S`` (``S = I`` if sign is +1, else ``J``).

    ``K_matrix`` must satisfy ``K_matrix @ conj(K_matrix) = sign * I``.
    """
    if rng is None:
        rng = np.random.default_rng(0)
    K_matrix = np.asarray(K_matrix, dtype=complex)
    n = K_matrix.shape[0]
    if sign < 0 and n % 2:
        raise InvalidArgument("an antiunitary map squaring to -1 needs even dimension")
    return _quaternionic_frame(K_matrix, rng, sign)


def haar_sample(kind: GroupKind, rng: np.random.Generator) -> np.ndarray:
    """Haar-distributed element of ``kind``."""
    n = kind.n
    if kind.family is Family.UNITARY:
        Z = (rng.standard_normal((n, n)) + 1j * rng.standard_normal((n, n))) / np.sqrt(2)
        return _qr_positive(Z)
    if kind.family is Family.ORTHOGONAL:
        return _qr_positive(rng.standard_normal((n, n))).astype(complex)
    # Gram-Schmidt on Gaussian quaternionic vectors commutes with left
    # multiplication, so the resulting frame is Haar on Sp(n/2).
    return _quaternionic_frame(_j_matrix(n), rng, -1)


def polar(M: np.ndarray) -> np.ndarray:
    U, _, Vh = np.linalg.svd(M)
    return U @ Vh


def nearest_member(kind: GroupKind, M: np.ndarray) -> np.ndarray:
    """A nearby group element (polar factor of the symmetrised matrix)."""
    M = np.asarray(M, dtype=complex)
    if kind.family is Family.ORTHOGONAL:
        return polar(M.real).astype(complex)
    if kind.family is Family.QUATERNIONIC:
        J = _j_matrix(kind.n)
        M = 0.5 * (M + J @ M.conj() @ J.T)
    return polar(M)


@lru_cache(maxsize=None)
def _algebra_basis(family: Family, n: int) -> tuple[np.ndarray, ...]:
    kind = GroupKind(family, n)
    raw = []
    for i in range(n):
        E = np.zeros((n, n), dtype=complex)
        E[i, i] = 1j
        raw.append(E)
    for i in range(n):
        for j in range(i + 1, n):
            E = np.zeros((n, n), dtype=complex)
            E[i, j], E[j, i] = 1, -1
            raw.append(E)
            E = np.zeros((n, n), dtype=complex)
            E[i, j], E[j, i] = 1j, 1j
            raw.append(E)
    vecs = np.array([np.concatenate([project_algebra(kind, E).real.ravel(),
                                     project_algebra(kind, E).imag.ravel()]) for E in raw])
    U, s, Vh = np.linalg.svd(vecs, full_matrices=False)
    rank = int(np.sum(s > 1e-10))
    basis = []
    for row in Vh[:rank]:
        B = (row[: n * n] + 1j * row[n * n:]).reshape(n, n)
        B.setflags(write=False)
        basis.append(B)
    return tuple(basis)


def algebra_basis(kind: GroupKind) -> tuple[np.ndarray, ...]:
    """Orthonormal basis (for ``Re tr(X^H Y)``) of the Lie algebra of ``kind``."""
    return _algebra_basis(kind.family, kind.n)


def numerical_rank(matrix: np.ndarray, rel_tol: float = DEFAULT_RANK_TOL, scale: float = 0.0) -> int:
    """Number of singular values above ``rel_tol * max(s_max, scale)``.

    ``scale`` is an absolute reference size; without it a matrix of pure
    round-off noise has full rank.
    """
    if not 0 < rel_tol < 1:
        raise InvalidArgument(f"rel_tol must lie in (0, 1), got {rel_tol}")
    matrix = np.asarray(matrix)
    if matrix.size == 0:
        return 0
    s = np.linalg.svd(matrix, compute_uv=False)
    ref = max(s[0], scale)
    if ref == 0:
        return 0
    return int(np.sum(s > rel_tol * ref))


def realify(M: np.ndarray) -> np.ndarray:
    """Stack real and imaginary parts of a complex matrix into one real vector."""
    M = np.asarray(M)
    return np.concatenate([M.real.ravel(), M.imag.ravel()])


def matrix_to_json(M: np.ndarray) -> list:
    M = np.asarray(M, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in M]


def matrix_from_json(data) -> np.ndarray:
    try:
        arr = np.array(data, dtype=float)
    except (TypeError, ValueError) as exc:
        raise InvalidArgument(f"malformed matrix encoding: {exc}") from None
    if arr.ndim != 3 or arr.shape[2] != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidArgument(f"matrix must be rows x cols x [re, im], got shape {arr.shape}")
    M = arr[..., 0] + 1j * arr[..., 1]
    if not np.all(np.isfinite(M)):
        raise InvalidArgument("matrix entries must be finite")
    return M
