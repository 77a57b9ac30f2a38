"""Shared helpers for the test suite."""

from functools import lru_cache

import numpy as np

from realmoduli import linalg, solver
from realmoduli.presentation import CurveTopology, CurveType


def topologies(g_max=3, g_min=0):
    out = []
    for g in range(g_min, g_max + 1):
        out.append(CurveTopology(CurveType.TYPE0, g, 0))
        for r in range(1, g + 2):
            if (g + 1 - r) % 2 == 0:
                out.append(CurveTopology(CurveType.TYPE1, g, r))
        for r in range(1, g + 1):
            if (g - r) % 2 == 0:
                out.append(CurveTopology(CurveType.TYPE2, g, r))
    return out


@lru_cache(maxsize=None)
def solution(top, structure, n, k, seed, starts=10):
    res = solver.solve(top, structure, n, k, seed=seed, starts=starts, stop_at_first=True)
    assert res.converged, (str(top), structure, n, k, seed, res.residual)
    return res.representation


def random_algebra(kind, rng):
    out = np.zeros((kind.n, kind.n), dtype=complex)
    for B in linalg.algebra_basis(kind):
        out += rng.standard_normal() * B
    return out


def fd_relative_error(obj, X, rng, t=1e-5):
    """Central difference along X_i expm(t Omega_i) against the analytic directional derivative.

    The error is scaled by ``|grad| |Omega|``, the largest value the directional
    derivative can take; where the gradient vanishes identically the absolute
    error is returned instead.
    """
    omegas = [random_algebra(kind, rng) for kind in obj.kinds]
    _, W = obj.algebra_grad(X)
    analytic = sum(linalg.frob_inner(w, o) for w, o in zip(W, omegas))
    scale = np.sqrt(sum(np.sum(np.abs(w) ** 2) for w in W)) * np.sqrt(sum(np.sum(np.abs(o) ** 2) for o in omegas))

    def moved(s):
        return [x @ linalg.expm_skew(s * o) for x, o in zip(X, omegas)]

    numeric = (obj.value(moved(t)) - obj.value(moved(-t))) / (2 * t)
    if scale < 1e-12:
        return abs(numeric - analytic), analytic
    return abs(numeric - analytic) / scale, analytic
