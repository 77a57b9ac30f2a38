import numpy as np
import pytest

from realmoduli import invariants, linalg, solver
from realmoduli.errors import InvalidArgument
from realmoduli.presentation import CurveTopology, CurveType
from support import solution, topologies

T0_2 = CurveTopology(CurveType.TYPE0, 2, 0)
T1_12 = CurveTopology(CurveType.TYPE1, 1, 2)
T1_32 = CurveTopology(CurveType.TYPE1, 3, 2)


def phase(rng):
    return np.exp(2j * np.pi * rng.random())


def test_realizable_examples():
    assert not invariants.realizable(T0_2, "real", 2, 3)
    assert not invariants.realizable(T1_32, "real", 2, 4, w1=(1, 0))
    for top in topologies(3):
        w1 = (0,) * top.r if top.r else None
        assert invariants.realizable(top, "real", 2, 0, w1)
    reason = invariants.obstruction(T0_2, "real", 2, 3)
    assert "c1 must be even" in reason


def test_realizable_validation():
    with pytest.raises(InvalidArgument):
        invariants.realizable(T1_32, "real", 2, 0, w1=(0,))
    with pytest.raises(InvalidArgument):
        invariants.realizable(T0_2, "real", 2, 0, w1=())
    with pytest.raises(InvalidArgument):
        invariants.realizable(T1_32, "real", 2, 0, w1=(2, 0))


def test_quaternionic_parity_rules():
    # g even, odd rank: k odd.  g odd, odd rank: k even.  Even rank: k even.
    assert invariants.realizable(T0_2, "quaternionic", 1, 1)
    assert not invariants.realizable(T0_2, "quaternionic", 1, 0)
    t3 = CurveTopology(CurveType.TYPE0, 3, 0)
    assert invariants.realizable(t3, "quaternionic", 1, 0)
    assert not invariants.realizable(t3, "quaternionic", 1, 1)
    assert invariants.realizable(T0_2, "quaternionic", 2, 2)
    assert not invariants.realizable(T0_2, "quaternionic", 2, 1)
    assert not invariants.realizable(T1_32, "quaternionic", 3, 0)


@pytest.mark.parametrize("top", topologies(3), ids=str)
def test_realizable_periodic_in_k(top):
    for structure in ("real", "quaternionic"):
        for n in (1, 2, 3):
            if structure == "real" and top.r:
                continue
            for k in range(-4, 5):
                assert invariants.realizable(top, structure, n, k) == invariants.realizable(top, structure, n, k + 2 * n)


def quarter_turn_solution():
    # w1 = (1, 0) with k = 1: C1 D2 C2 D2^-1 = i I.
    C1 = np.diag([-1.0, 1.0]).astype(complex)
    C2 = np.array([[0, -1], [1, 0]], dtype=complex)
    D2 = linalg.dagger(np.array([[1, 1], [1j, -1j]]) / np.sqrt(2))
    return solver.Representation.from_assignment(T1_12, "real", 2, 1, {"C1": C1, "C2": C2, "D2": D2})


def test_stiefel_whitney_examples():
    rep = solver.Representation.identity(T1_32, "real", 2, 0)
    assert invariants.stiefel_whitney(rep) == (0, 0)
    rep = quarter_turn_solution()
    assert solver.residual(rep) < 1e-20
    assert invariants.stiefel_whitney(rep) == (1, 0)


def test_stiefel_whitney_gauge_invariant():
    rng = np.random.default_rng(0)
    rep = quarter_turn_solution()
    for _ in range(5):
        g = solver.GaugeElement.random(rep.schema, 2, rng)
        assert invariants.stiefel_whitney(solver.apply_gauge(g, rep)) == (1, 0)


def test_stiefel_whitney_errors():
    with pytest.raises(InvalidArgument):
        invariants.stiefel_whitney(solver.Representation.identity(T0_2, "real", 2, 0))
    with pytest.raises(InvalidArgument):
        invariants.stiefel_whitney(solver.Representation.identity(T1_32, "quaternionic", 2, 0))


@pytest.mark.parametrize("top,k", [(T1_32, 1), (T1_32, 0), (CurveTopology(CurveType.TYPE2, 3, 1), 1),
                                   (CurveTopology(CurveType.TYPE2, 2, 2), 1)], ids=str)
def test_w1_parity_at_solutions(top, k):
    for seed in range(3):
        rep = solution(top, "real", 2, k, seed)
        assert sum(invariants.stiefel_whitney(rep)) % 2 == k % 2


def test_pi1_commutant_identity_and_generic():
    assert invariants.pi1_commutant_dimension(solver.Representation.identity(T0_2, "real", 2, 0)) == 4
    for seed in range(3):
        assert invariants.pi1_commutant_dimension(solution(T0_2, "real", 2, 0, seed)) == 1


def diagonal_sum(rng, swap):
    a = np.diag([phase(rng), phase(rng)])
    b = np.diag([phase(rng), phase(rng)])
    c = np.array([[0, 1], [1, 0]], dtype=complex) if swap else np.eye(2, dtype=complex)
    return solver.Representation.from_assignment(T0_2, "real", 2, 0, {"A1": a, "B1": b, "C": c})


def test_direct_sum_of_characters():
    rep = diagonal_sum(np.random.default_rng(1), swap=False)
    assert solver.residual(rep) < 1e-20
    assert invariants.pi1_commutant_dimension(rep) == 2
    assert invariants.twisted_commutant_dimension(rep) == 2


def test_sum_with_conjugate_pullback():
    # C swaps the two lines, so the second summand is the twisted conjugate of the first.
    rep = diagonal_sum(np.random.default_rng(2), swap=True)
    assert solver.residual(rep) < 1e-20
    assert invariants.pi1_commutant_dimension(rep) == 2
    assert invariants.twisted_commutant_dimension(rep) == 2


def test_twisted_commutant_examples():
    assert invariants.twisted_commutant_dimension(solver.Representation.identity(T0_2, "real", 1, 0)) == 1
    for seed in range(3):
        assert invariants.twisted_commutant_dimension(solution(T0_2, "real", 2, 0, seed)) == 1
    assert invariants.twisted_commutant_dimension(solution(T1_32, "real", 2, 1, 0)) == 1


@pytest.mark.slow
def test_twisted_commutant_generic_coprime():
    top = CurveTopology(CurveType.TYPE0, 3, 0)
    dims = [invariants.twisted_commutant_dimension(solution(top, "real", 2, 0, s)) for s in range(20)]
    assert all(d >= 1 for d in dims) and dims.count(1) == 20


def test_extension_compatibility_identity():
    rep = solution(T0_2, "real", 2, 0, 0)
    rpt = invariants.extension_compatibility(rep, rep)
    assert rpt.constant and rpt.commutes
    assert np.allclose(rpt.C, np.eye(2)) and abs(rpt.c_cbar - 1) < 1e-12


def test_extension_compatibility_scaled():
    rep = solution(T0_2, "real", 2, 0, 1)
    theta = 0.8
    mats = list(rep.matrices)
    c = rep.schema.index("C")
    mats[c] = np.exp(1j * theta) * mats[c]
    tilde = rep.replace(matrices=mats)
    assert solver.residual(tilde) < 1e-10
    rpt = invariants.extension_compatibility(rep, tilde)
    assert rpt.constant and rpt.commutes
    assert np.allclose(rpt.C, np.exp(-1j * theta) * np.eye(2), atol=1e-8)
    assert abs(rpt.c_cbar - 1) < 1e-12


def test_extension_compatibility_shape_mismatch():
    a = solver.Representation.identity(T0_2, "real", 2, 0)
    b = solver.Representation.identity(T0_2, "real", 1, 0)
    with pytest.raises(InvalidArgument):
        invariants.extension_compatibility(a, b)
