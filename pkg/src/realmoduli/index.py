"""Riemann-Roch index counts at non-minimal Yang-Mills critical points."""

from __future__ import annotations

from dataclasses import dataclass

from .errors import InvalidArgument


@dataclass(frozen=True)
class DestabilizingDatum:
    """A subbundle of rank ``m`` and degree ``ell`` inside a bundle of rank ``n``, degree ``k``."""

    m: int
    ell: int
    n: int
    k: int
    g: int

    def __post_init__(self):
        if not 1 <= self.m < self.n:
            raise InvalidArgument(f"subbundle rank must satisfy 1 <= m < n, got m={self.m}, n={self.n}")
        if self.ell * self.n <= self.k * self.m:
            raise InvalidArgument(f"slope condition ell*n > k*m fails ({self.ell}*{self.n} <= {self.k}*{self.m})")


def index_value(d: DestabilizingDatum) -> int:
    """Complex index ``m(n-m)(g-1) + ell*n - k*m``."""
    if d.g < 2:
        raise InvalidArgument(f"genus must be at least 2, got {d.g}")
    m, n = d.m, d.n
    return m * (n - m) * (d.g - 1) + d.ell * (n - m) - (d.k - d.ell) * m


def minimal_degree(n: int, k: int, m: int) -> int:
    """Smallest ``ell`` with ``ell * n > k * m``."""
    return (k * m) // n + 1


def min_index(n: int, k: int, g: int) -> int:
    """Smallest index over all destabilising data; the index grows by ``n`` per unit of ``ell``."""
    if n < 2:
        raise InvalidArgument("rank must be at least 2 for a bundle to be destabilised")
    if g < 2:
        raise InvalidArgument(f"genus must be at least 2, got {g}")
    return min(index_value(DestabilizingDatum(m, minimal_degree(n, k, m), n, k, g)) for m in range(1, n))


def index_lower_bound(n: int, g: int) -> int:
    return 1 + (n - 1) * (g - 1)


def morse_iso_range(n: int, g: int) -> int:
    """Homotopy and homology agree with the space of connections strictly below this degree."""
    if n < 2 or g < 2:
        raise InvalidArgument(f"need n >= 2 and g >= 2, got n={n}, g={g}")
    return (n - 1) * (g - 1)
