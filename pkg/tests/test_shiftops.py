import numpy as np
import pytest

from sdreflect import WeightScheme, constant_dynmat, function_dynmat, identity_dynmat
from sdreflect.dyncore import LegError
from sdreflect.shiftops import (
    ShiftOpSum,
    shiftop_commutator,
    shiftop_compose,
    shiftop_difference_residual,
)

SCH = WeightScheme(2, 1.0)
RNG = np.random.default_rng(55)
LEGS = (1,)
PTS = [(RNG.uniform(-1, 1, 2) + 1j * RNG.uniform(-1, 1, 2), {}) for _ in range(5)]


def term(shift, fn):
    return ShiftOpSum(SCH, LEGS, [(shift, function_dynmat(SCH, LEGS, fn))])


def test_identity_element():
    S = term((1, 0), lambda lam, u: np.diag([lam[0], lam[1] ** 2]))
    one = ShiftOpSum.from_matrix(identity_dynmat(SCH, LEGS))
    out = shiftop_compose(one, S)
    assert set(out.terms) == {(1, 0)}
    lam = PTS[0][0]
    np.testing.assert_allclose(out.terms[(1, 0)].eval(lam), S.terms[(1, 0)].eval(lam))


def test_composition_shifts_argument():
    # (lam_1 . 1, e1) twice gives coefficient lam_1 (lam_1 + gamma) at shift 2 e1
    S = term((1, 0), lambda lam, u: lam[0] * np.eye(2, dtype=complex))
    out = S.compose(S)
    assert set(out.terms) == {(2, 0)}
    val = out.terms[(2, 0)].eval(np.array([2.0, 0.0]))
    np.testing.assert_allclose(val, 6.0 * np.eye(2))


def test_associativity():
    sums = []
    for _ in range(3):
        shift = tuple(int(s) for s in RNG.integers(-1, 2, size=2))
        m = RNG.normal(size=(2, 2)) + 1j * RNG.normal(size=(2, 2))
        c = RNG.normal(size=2)
        sums.append(term(shift, lambda lam, u, m=m, c=c: m * np.exp(c @ lam)))
    a, b, c = sums
    left = (a.compose(b)).compose(c)
    right = a.compose(b.compose(c))
    rep = shiftop_difference_residual(left, right, PTS, 1e-12)
    assert rep.passed


def test_terms_merge_by_shift():
    m1 = constant_dynmat(SCH, LEGS, np.diag([1.0, 2.0]))
    m2 = constant_dynmat(SCH, LEGS, np.diag([3.0, 4.0]))
    S = ShiftOpSum(SCH, LEGS, [((0, 1), m1), ((0, 1), m2)])
    assert len(S.terms) == 1
    np.testing.assert_allclose(S.terms[(0, 1)].eval(PTS[0][0]), np.diag([4.0, 6.0]))


def test_weight_shift_expansion():
    W = ShiftOpSum.weight_shift(SCH, (0, 1), 0)
    assert set(W.terms) == {(1, 0), (0, 1)}
    lam = PTS[0][0]
    np.testing.assert_allclose(
        W.terms[(1, 0)].eval(lam), np.kron(SCH.projector(0), np.eye(2))
    )


def test_commutator_with_identity_term():
    S = term((1, 0), lambda lam, u: np.diag([np.exp(lam[0]), lam[1]]))
    one = ShiftOpSum.from_matrix(identity_dynmat(SCH, LEGS))
    rep = shiftop_commutator(S, one, PTS, 1e-12)
    assert rep.passed and rep.max_residual < 1e-14


def test_commutator_constant_diagonal_coefficients():
    S1 = term((1, 0), lambda lam, u: np.diag([2.0, 3.0]).astype(complex))
    S2 = term((0, 1), lambda lam, u: np.diag([0.5, 4.0]).astype(complex))
    assert shiftop_commutator(S1, S2, PTS, 1e-13).passed


def test_commutator_detects_noncommuting():
    S1 = term((1, 0), lambda lam, u: lam[0] * np.eye(2, dtype=complex))
    S2 = term((0, 0), lambda lam, u: lam[0] * np.eye(2, dtype=complex))
    rep = shiftop_commutator(S1, S2, PTS, 1e-10)
    assert not rep.passed  # coefficients fail to commute through the shift


def test_leg_mismatch():
    S1 = term((0, 0), lambda lam, u: np.eye(2, dtype=complex))
    S2 = ShiftOpSum.from_matrix(identity_dynmat(SCH, (1, 2)))
    with pytest.raises(LegError):
        S1.compose(S2)


def test_shift_vector_length_checked():
    with pytest.raises(ValueError):
        ShiftOpSum(SCH, LEGS, [((1,), identity_dynmat(SCH, LEGS))])


def test_pure_shift_commutes_with_constant_quantum_coefficient():
    # the expanded auxiliary shift factor commutes with any
    # lambda-independent coefficient on the other legs
    legs = (0, 1)
    W = ShiftOpSum.weight_shift(SCH, legs, 0)
    m = RNG.normal(size=(2, 2)) + 1j * RNG.normal(size=(2, 2))
    C = ShiftOpSum.from_matrix(constant_dynmat(SCH, legs, np.kron(np.eye(2), m)))
    assert shiftop_commutator(W, C, PTS, 1e-13).passed
