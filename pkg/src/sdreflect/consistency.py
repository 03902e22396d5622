"""Residual checkers for the consistency equations.

Every checker evaluates both sides of an identity at sampled dynamical /
spectral points and reports the maximum relative Frobenius residual
``|LHS - RHS| / max(|LHS|, |RHS|, 1)``.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .dyncore import (
    Automorphism,
    DynMat,
    LegError,
    WeightScheme,
    adjoint_auto,
    dyn_shift,
    embed,
    identity_dynmat,
)


def rel_residual(lhs: np.ndarray, rhs: np.ndarray) -> float:
    denom = max(np.linalg.norm(lhs), np.linalg.norm(rhs), 1.0)
    return float(np.linalg.norm(lhs - rhs) / denom)


@dataclass
class ResidualReport:
    check_name: str
    samples: int
    max_residual: float
    tolerance: float
    worst_point: tuple = None

    def __post_init__(self):
        if self.samples < 1:
            raise ValueError("a report needs at least one sample")

    @property
    def passed(self) -> bool:
        return self.max_residual <= self.tolerance

    def to_dict(self):
        lam, u = (None, None) if self.worst_point is None else self.worst_point
        pack = lambda z: [float(np.real(z)), float(np.imag(z))]
        return {
            "name": self.check_name,
            "samples": self.samples,
            "max_residual": float(self.max_residual),
            "tolerance": float(self.tolerance),
            "pass": bool(self.passed),
            "worst_point": None
            if lam is None
            else {
                "lambda": [pack(z) for z in np.atleast_1d(lam)],
                "u": [] if not u else [pack(u[k]) for k in sorted(u)],
            },
        }

    def __str__(self):
        flag = "pass" if self.passed else "FAIL"
        return (
            f"[{flag}] {self.check_name}: max residual {self.max_residual:.3e} "
            f"(tol {self.tolerance:.1e}, {self.samples} samples)"
        )


def _collect(name, points, tol, func):
    """Run ``func(lam, u) -> residual`` over points and assemble a report."""
    worst = -1.0
    worst_pt = None
    count = 0
    for lam, u in points:
        r = func(lam, u)
        count += 1
        if r > worst:
            worst = r
            worst_pt = (np.asarray(lam), dict(u))
    if count == 0:
        raise ValueError("point list is empty")
    return ResidualReport(name, count, worst, tol, worst_pt)


@dataclass
class StructureSet:
    """The four structure matrices of one exchange relation, on legs (1, 2)."""

    A: DynMat
    B: DynMat
    C: DynMat
    D: DynMat
    scheme: WeightScheme
    g: Automorphism = field(default_factory=Automorphism.identity)

    def __post_init__(self):
        for X in (self.A, self.B, self.C, self.D):
            if X.legs != (1, 2):
                raise LegError("structure matrices must live on legs (1, 2)")


# -- zero weight -----------------------------------------------------------


def residual_zero_weight(X: DynMat, kind: str, points, tol=1e-9, name=None):
    """Zero-weight residual of a 2-leg matrix.

    kind 'B': [h_i (x) 1, X] = 0; kind 'C': [1 (x) h_i, X] = 0;
    kind 'D': [h_i (x) 1 + 1 (x) h_i, X] = 0, maximized over i.
    """
    if len(X.legs) != 2:
        raise LegError("zero-weight check needs a 2-leg matrix")
    kind = kind.upper()
    if kind not in ("B", "C", "D"):
        raise ValueError("kind must be 'B', 'C' or 'D'")
    n = X.scheme.rank
    eye = np.eye(n, dtype=complex)
    gens = []
    for i in range(n):
        p = X.scheme.projector(i)
        if kind == "B":
            gens.append(np.kron(p, eye))
        elif kind == "C":
            gens.append(np.kron(eye, p))
        else:
            gens.append(np.kron(p, eye) + np.kron(eye, p))

    def func(lam, u):
        m = X.eval(lam, u)
        return max(rel_residual(h @ m, m @ h) for h in gens)

    return _collect(name or f"zero_weight_{kind}", points, tol, func)


# -- Yang-Baxter consistency families ---------------------------------------


def _pair_embeddings(X: DynMat, legs3=(1, 2, 3)):
    """X placed on the three pairs (12), (13), (23) of a 3-leg space."""
    return {
        (1, 2): embed(X, (legs3[0], legs3[1]), legs3),
        (1, 3): embed(X, (legs3[0], legs3[2]), legs3),
        (2, 3): embed(X, (legs3[1], legs3[2]), legs3),
    }


def _prod(ms):
    out = ms[0]
    for m in ms[1:]:
        out = out @ m
    return out


def residual_ybce(S: StructureSet, points, tol=1e-9):
    """The four cubic consistency relations for (A, B, C, D), plain case.

    a) A12 A13 A23 = A23 A13 A12
    b) A12 C13 C23 = C23 C13 A12(h3)
    c) D12 B13 B23(h1) = B23 B13(h2) D12
    d) D12(h3) D13 D23(h1) = D23 D13(h2) D12
    Returns one report per relation, keyed 'ybce_a' .. 'ybce_d'.
    """
    if not S.g.is_identity:
        raise ValueError("plain consistency equations assume the identity automorphism")
    legs3 = (1, 2, 3)
    A = _pair_embeddings(S.A, legs3)
    B = _pair_embeddings(S.B, legs3)
    C = _pair_embeddings(S.C, legs3)
    D = _pair_embeddings(S.D, legs3)
    sh = lambda X, legs: dyn_shift(X, legs, legs3)

    eqs = {
        "ybce_a": ([A[(1, 2)], A[(1, 3)], A[(2, 3)]], [A[(2, 3)], A[(1, 3)], A[(1, 2)]]),
        "ybce_b": (
            [A[(1, 2)], C[(1, 3)], C[(2, 3)]],
            [C[(2, 3)], C[(1, 3)], sh(A[(1, 2)], (3,))],
        ),
        "ybce_c": (
            [D[(1, 2)], B[(1, 3)], sh(B[(2, 3)], (1,))],
            [B[(2, 3)], sh(B[(1, 3)], (2,)), D[(1, 2)]],
        ),
        "ybce_d": (
            [sh(D[(1, 2)], (3,)), D[(1, 3)], sh(D[(2, 3)], (1,))],
            [D[(2, 3)], sh(D[(1, 3)], (2,)), D[(1, 2)]],
        ),
    }
    reports = {}
    for name, (lhs, rhs) in eqs.items():
        reports[name] = _collect(
            name,
            points,
            tol,
            lambda lam, u, L=lhs, R=rhs: rel_residual(
                _prod([x.eval(lam, u) for x in L]), _prod([x.eval(lam, u) for x in R])
            ),
        )
    return reports


def residual_gybce(S: StructureSet, points, tol=1e-9):
    """Automorphism-extended consistency relations.

    a) A12 A13^gg A23 = A23^gg A13 A12^gg
    b) A12 C13^g1 C23 = C23^g2 C13 A12^gg(h3)
    c) D12 B13 B23^g3(h1) = B23 B13^g3(h2) D12
    d) identical to the plain relation d.
    All automorphism actions are adjoint, so every line is a finite
    matrix identity.
    """
    g = S.g
    legs3 = (1, 2, 3)
    A = _pair_embeddings(S.A, legs3)
    B = _pair_embeddings(S.B, legs3)
    C = _pair_embeddings(S.C, legs3)
    D = _pair_embeddings(S.D, legs3)
    ad = lambda X, legs: adjoint_auto(X, g, legs, "conjugate", 1)
    sh = lambda X, legs: dyn_shift(X, legs, legs3)

    eqs = {
        "gybce_a": (
            [A[(1, 2)], ad(A[(1, 3)], (1, 3)), A[(2, 3)]],
            [ad(A[(2, 3)], (2, 3)), A[(1, 3)], ad(A[(1, 2)], (1, 2))],
        ),
        "gybce_b": (
            [A[(1, 2)], ad(C[(1, 3)], (1,)), C[(2, 3)]],
            [ad(C[(2, 3)], (2,)), C[(1, 3)], sh(ad(A[(1, 2)], (1, 2)), (3,))],
        ),
        "gybce_c": (
            [D[(1, 2)], B[(1, 3)], sh(ad(B[(2, 3)], (3,)), (1,))],
            [B[(2, 3)], sh(ad(B[(1, 3)], (3,)), (2,)), D[(1, 2)]],
        ),
        "gybce_d": (
            [sh(D[(1, 2)], (3,)), D[(1, 3)], sh(D[(2, 3)], (1,))],
            [D[(2, 3)], sh(D[(1, 3)], (2,)), D[(1, 2)]],
        ),
    }
    reports = {}
    for name, (lhs, rhs) in eqs.items():
        reports[name] = _collect(
            name,
            points,
            tol,
            lambda lam, u, L=lhs, R=rhs: rel_residual(
                _prod([x.eval(lam, u) for x in L]), _prod([x.eval(lam, u) for x in R])
            ),
        )
    return reports


def residual_dybe(D: DynMat, points, tol=1e-9, name="dybe"):
    """Dynamical Yang-Baxter residual D12(h3) D13 D23(h1) = D23 D13(h2) D12."""
    legs3 = (1, 2, 3)
    Dp = _pair_embeddings(D, legs3)
    sh = lambda X, legs: dyn_shift(X, legs, legs3)
    lhs = [sh(Dp[(1, 2)], (3,)), Dp[(1, 3)], sh(Dp[(2, 3)], (1,))]
    rhs = [Dp[(2, 3)], sh(Dp[(1, 3)], (2,)), Dp[(1, 2)]]
    return _collect(
        name,
        points,
        tol,
        lambda lam, u: rel_residual(
            _prod([x.eval(lam, u) for x in lhs]), _prod([x.eval(lam, u) for x in rhs])
        ),
    )


def residual_shifted_ybe(R0: DynMat, g: Automorphism, points, tol=1e-9, name="shifted_ybe"):
    """Shift-modified Yang-Baxter residual for a non-dynamical matrix:

    R12 R13^gg R23 = R23^gg R13 R12^gg.
    """
    legs3 = (1, 2, 3)
    Rp = _pair_embeddings(R0, legs3)
    ad = lambda X, legs: adjoint_auto(X, g, legs, "conjugate", 1)
    lhs = [Rp[(1, 2)], ad(Rp[(1, 3)], (1, 3)), Rp[(2, 3)]]
    rhs = [ad(Rp[(2, 3)], (2, 3)), Rp[(1, 3)], ad(Rp[(1, 2)], (1, 2))]
    return _collect(
        name,
        points,
        tol,
        lambda lam, u: rel_residual(
            _prod([x.eval(lam, u) for x in lhs]), _prod([x.eval(lam, u) for x in rhs])
        ),
    )


# -- reflection relations ----------------------------------------------------


class ShiftedSolution:
    """A reflection solution K composed with a spectral-shift power.

    Represents K . s^power where s shifts the slot of whatever stands to
    its right by ``step``; needed because such a product is an operator,
    not a plain matrix function.
    """

    def __init__(self, K: DynMat, step: complex, power: int):
        self.K = K
        self.step = complex(step)
        self.power = int(power)

    @property
    def offset(self):
        return self.step * self.power


def _ksplit(K):
    if isinstance(K, ShiftedSolution):
        return K.K, K.offset
    return K, 0.0


def residual_sdre(S: StructureSet, K, points, tol=1e-9, name="sdre"):
    """Reflection-relation residual

        A12 K1 B12 K2(lam + gamma h1) = K2 C12 K1(lam + gamma h2) D12

    on legs (1, 2).  ``K`` is a 1-leg matrix, optionally wrapped in
    :class:`ShiftedSolution` when it carries a trailing spectral shift.
    """
    Km, off = _ksplit(K)
    if len(Km.legs) != 1:
        raise LegError("reflection solutions live on 1 leg")
    legs = (1, 2)
    K1 = embed(Km, (1,), legs)
    K2 = embed(Km, (2,), legs)
    K2s = dyn_shift(K2, (1,), legs)
    K1s = dyn_shift(K1, (2,), legs)
    A, B, C, D = S.A, S.B, S.C, S.D
    if off != 0.0:
        # K = K0 . s^p : each insertion shifts the slot arguments of all
        # factors standing to its right on matching legs.
        B = B.shift_spectral({1: off}) if 1 in B.spectral_legs else B
        C = C.shift_spectral({2: off}) if 2 in C.spectral_legs else C
        shifts = {l: off for l in D.spectral_legs}
        D = D.shift_spectral(shifts) if shifts else D

    def func(lam, u):
        lhs = A.eval(lam, u) @ K1.eval(lam, u) @ B.eval(lam, u) @ K2s.eval(lam, u)
        rhs = K2.eval(lam, u) @ C.eval(lam, u) @ K1s.eval(lam, u) @ D.eval(lam, u)
        return rel_residual(lhs, rhs)

    return _collect(name, points, tol, func)


def residual_boundary_dra(S: StructureSet, K, points, tol=1e-9, name="boundary_dra"):
    """Fully dynamical reflection residual (shifts on both K factors):

    A12 K1(h2) B12 K2(h1) = K2(h1) C12 K1(h2) D12.
    """
    Km, off = _ksplit(K)
    if off != 0.0:
        raise ValueError("spectral-shift-decorated K is not supported here")
    legs = (1, 2)
    K1s = dyn_shift(embed(Km, (1,), legs), (2,), legs)
    K2s = dyn_shift(embed(Km, (2,), legs), (1,), legs)

    def func(lam, u):
        lhs = S.A.eval(lam, u) @ K1s.eval(lam, u) @ S.B.eval(lam, u) @ K2s.eval(lam, u)
        rhs = K2s.eval(lam, u) @ S.C.eval(lam, u) @ K1s.eval(lam, u) @ S.D.eval(lam, u)
        return rel_residual(lhs, rhs)

    return _collect(name, points, tol, func)


# -- quasi-non-dynamicity and factorization ----------------------------------


def residual_quasi_nondyn(X: DynMat, f: Automorphism, points, tol=1e-9, name="quasi_nondyn"):
    """Quasi-non-dynamicity residual of a 2-leg matrix:

    for every weight index i,
        X(lam + gamma e_i) = (f (x) f) X(lam) (f (x) f)^(-1).
    Checking per index is strictly stronger than assembling the projector
    sum and coincides with it when the identity holds.
    """
    if len(X.legs) != 2:
        raise LegError("quasi-non-dynamicity check needs a 2-leg matrix")
    scheme = X.scheme
    conj = adjoint_auto(X, f, X.legs, "conjugate", 1)

    def func(lam, u):
        rhs = conj.eval(lam, u)
        worst = 0.0
        for i in range(scheme.rank):
            lhs = X.eval(lam + scheme.gamma * scheme.unit(i), u)
            worst = max(worst, rel_residual(lhs, rhs))
        return worst

    return _collect(name, points, tol, func)


def residual_nondynamical(X: DynMat, points, tol=1e-9, name="nondynamical"):
    """Lambda-variation residual: X(lam + gamma e_i) = X(lam) for all i."""
    scheme = X.scheme

    def func(lam, u):
        base = X.eval(lam, u)
        worst = 0.0
        for i in range(scheme.rank):
            worst = max(
                worst, rel_residual(X.eval(lam + scheme.gamma * scheme.unit(i), u), base)
            )
        return worst

    return _collect(name, points, tol, func)


def residual_theta_period(kappa: DynMat, points, tol=1e-9, name="theta_period"):
    """Factorization-condition residual for a 1-leg candidate kappa:

    kappa(lam + gamma e_i) must be independent of i, which is the
    2-gamma periodicity of kappa in each theta variable at fixed sigma.
    """
    if len(kappa.legs) != 1:
        raise LegError("theta-periodicity check needs a 1-leg matrix")
    scheme = kappa.scheme

    def func(lam, u):
        vals = [
            kappa.eval(lam + scheme.gamma * scheme.unit(i), u)
            for i in range(scheme.rank)
        ]
        worst = 0.0
        for i in range(1, scheme.rank):
            worst = max(worst, rel_residual(vals[i], vals[0]))
        return worst

    return _collect(name, points, tol, func)


def residual_projector_compat(R: DynMat, projs, b: DynMat, points, tol=1e-9,
                              name="projector_compat"):
    """Compatibility of a projector family with (R, b):

    mutual commutation of the projectors, [P_i, b(lam)] = 0, and
    [P_i (x) P_i, R] = 0.  Non-idempotent input is rejected.
    """
    projs = [np.asarray(p, dtype=complex) for p in projs]
    for p in projs:
        if rel_residual(p @ p, p) > 1e-12:
            raise ValueError("projectors must be idempotent")

    def func(lam, u):
        worst = 0.0
        for i, p in enumerate(projs):
            for q in projs[i + 1:]:
                worst = max(worst, rel_residual(p @ q, q @ p))
            bm = b.eval(lam, {l: u[l] for l in b.spectral_legs} if u else None)
            worst = max(worst, rel_residual(p @ bm, bm @ p))
            pp = np.kron(p, p)
            rm = R.eval(lam, u)
            worst = max(worst, rel_residual(pp @ rm, rm @ pp))
        return worst

    return _collect(name, points, tol, func)


def residual_zwc(S: StructureSet, points, tol=1e-9):
    """Weight-compatibility of the automorphism with the structure set:

    [D, g (x) g] = [B, g (x) 1] = [C, 1 (x) g] = 0 and [h_i, g] = 0.
    For a spectral shift the commutators mean invariance of the matrix
    under the corresponding slot translations.
    """
    g = S.g
    if g.is_identity:
        def func(lam, u):
            return 0.0
        return _collect("zwc", points, tol, func)

    if g.variant == Automorphism.SHIFT:
        checks = []
        for X, legs, nm in ((S.D, (1, 2), "D"), (S.B, (1,), "B"), (S.C, (2,), "C")):
            legs = tuple(l for l in legs if l in X.spectral_legs)
            if legs:
                checks.append((X, adjoint_auto(X, g, legs, "conjugate", 1)))
            else:
                checks.append((X, X))

        def func(lam, u):
            return max(
                rel_residual(orig.eval(lam, u), moved.eval(lam, u))
                for orig, moved in checks
            )

        return _collect("zwc", points, tol, func)

    gm = g.matrix_at()
    n = S.scheme.rank
    eye = np.eye(n, dtype=complex)
    hcomm = max(
        rel_residual(S.scheme.projector(i) @ gm, gm @ S.scheme.projector(i))
        for i in range(n)
    )
    pairs = [
        (S.D, np.kron(gm, gm)),
        (S.B, np.kron(gm, eye)),
        (S.C, np.kron(eye, gm)),
    ]

    def func(lam, u):
        worst = hcomm
        for X, G in pairs:
            m = X.eval(lam, u)
            worst = max(worst, rel_residual(G @ m, m @ G))
        return worst

    return _collect("zwc", points, tol, func)
