"""Chain monodromy operators, their factorized form, and traced families.

The direct form dresses a reflection solution site by site,

    T = chi_0 . prod_{k=N..1} A_{0,2k}(S_k) C_{0,2k-1}(S_k)
        . Q_0(S_0)
        . prod_{k=1..N} D_{0,2k-1}(S_k) B_{0,2k}(S_k) . E_0,

where S_k collects the odd quantum legs above site k (S_k = {2k+1,
2k+3, ..., 2N-1}, S_0 = all odd legs) and E_0 is the expanded
weight-shift factor sum_i e_ii^(0) exp(gamma d_i) on the auxiliary leg.
Each added site pair shifts everything inside it by its odd leg, which
reproduces this pattern; it is certified here (rather than assumed) by
the factorization identity below.

For coefficients parametrized by (R0, b, q, k, Q) the same operator
factorizes through a quantum-leg conjugator O_N:

    T = O_N^{-1} . { chi_0 b_0^{-1} R_{0,2N} ... R_{02} Q_0 R_{01} ...
        R_{0,2N-1} b_0 k_0 . E_0 } . O_N,

with O_N = prod_{k=N..1} [q_{2k-1} b_{2k}](h over odd legs > 2k).  The
shift factor acts on the right O_N during conjugation, producing its
argument shifts automatically.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .consistency import (
    ResidualReport,
    StructureSet,
    residual_gybce,
    residual_sdre,
    residual_theta_period,
    residual_ybce,
    residual_zero_weight,
    residual_zwc,
)
from .dyncore import (
    Automorphism,
    DynMat,
    LegError,
    WeightScheme,
    adjoint_auto,
    constant_dynmat,
    dyn_shift,
    embed,
)
from .shiftops import ShiftOpSum, shiftop_commutator, shiftop_difference_residual


def all_legs(N: int):
    return tuple(range(0, 2 * N + 1))


def quantum_legs(N: int):
    return tuple(range(1, 2 * N + 1))


def bind_spectral(X: DynMat, uvals) -> DynMat:
    """Freeze the spectral slots of X at fixed values."""
    if not X.spectral_legs:
        return X
    missing = [l for l in X.spectral_legs if l not in uvals]
    if missing:
        raise ValueError(f"missing spectral values for legs {missing}")
    f = X.fn
    spect = X.spectral_legs
    fixed = {l: complex(uvals[l]) for l in spect}
    poles = None
    if X.poles is not None:
        poles = lambda lam, u, _p=X.poles: _p(lam, fixed)
    return DynMat(X.scheme, X.legs, lambda lam, u: f(lam, fixed), frozenset(), poles)


def locality_preset(u_ref, N: int):
    """Quantum spectral values u_{2n} = u_ref + (2N - 2n + 1),
    u_{2n-1} = u_ref + 2N (the choice making the traced Hamiltonians
    local for shift-type automorphisms)."""
    vals = {}
    for m in range(1, N + 1):
        vals[2 * m] = u_ref + (2 * N - 2 * m + 1)
        vals[2 * m - 1] = u_ref + 2 * N
    return vals


def _site_shift(k: int, N: int):
    return tuple(range(2 * k + 1, 2 * N, 2))


def build_monodromy_direct(S: StructureSet, Q0: DynMat, chi_t: DynMat, N: int,
                           u_quantum, u_aux) -> ShiftOpSum:
    """Site-by-site monodromy operator on legs 0..2N.

    ``Q0`` is the direct reflection solution (1 leg), ``chi_t`` the
    transposed dual solution (1 leg); ``u_quantum`` maps quantum legs to
    spectral values and ``u_aux`` is the auxiliary value.  Only the
    identity-automorphism chain is assembled here; the
    automorphism-extended chain interleaves auxiliary automorphism
    factors whose printed placement could not be certified against the
    factorized form, so it is exposed through the gauged factorized
    builder instead.
    """
    if N < 1:
        raise ValueError("N must be at least 1")
    if not S.g.is_identity:
        raise ValueError(
            "the direct site product is certified for the identity "
            "automorphism only; use build_monodromy_factored for the "
            "gauged chain"
        )
    scheme = S.scheme
    legs = all_legs(N)
    uvals = {0: complex(u_aux)}
    uvals.update({int(a): complex(v) for a, v in dict(u_quantum).items()})
    A, B, C, D = S.A, S.B, S.C, S.D

    def place_pair(X, a, shift):
        Xe = embed(X, (0, a), legs)
        if shift:
            Xe = dyn_shift(Xe, shift, legs)
        return bind_spectral(Xe, uvals)

    mat = bind_spectral(embed(chi_t, (0,), legs), uvals)
    for k in range(N, 0, -1):
        s = _site_shift(k, N)
        mat = mat @ place_pair(A, 2 * k, s) @ place_pair(C, 2 * k - 1, s)
    q0 = dyn_shift(embed(Q0, (0,), legs), tuple(range(1, 2 * N, 2)), legs)
    mat = mat @ bind_spectral(q0, uvals)
    for k in range(1, N + 1):
        s = _site_shift(k, N)
        mat = mat @ place_pair(D, 2 * k - 1, s) @ place_pair(B, 2 * k, s)
    return ShiftOpSum.from_matrix(mat).compose(
        ShiftOpSum.weight_shift(scheme, legs, 0)
    )


def build_ON(b: DynMat, q: DynMat, N: int, u_quantum, scheme: WeightScheme,
             g: Automorphism = None) -> DynMat:
    """Quantum-leg conjugator: odd legs carry q, even legs carry b,
    each site block shifted by the odd legs above it.

    For a matrix automorphism g the factors are replaced by their
    dressed versions g b g^-1 and (g b g^-1) k; pass q = (g b g^-1) k in
    that case.
    """
    from .parametrize import auto_dress

    if N < 1:
        raise ValueError("N must be at least 1")
    legs = all_legs(N)
    uvals = {int(a): complex(v) for a, v in dict(u_quantum).items()}
    if g is not None and not g.is_identity:
        b = auto_dress(b, g)
    out = None
    for k in range(N, 0, -1):
        blk = embed(q, (2 * k - 1,), legs) @ embed(b, (2 * k,), legs)
        s = _site_shift(k, N)
        if s:
            blk = dyn_shift(blk, s, legs)
        out = blk if out is None else out @ blk
    return bind_spectral(out, uvals)


def build_gauged_core(scheme: WeightScheme, R0: DynMat, b: DynMat, q: DynMat,
                      k: DynMat, Q, QL, g: Automorphism, N: int, u_quantum,
                      u_aux) -> DynMat:
    """Automorphism-dressed chain core on legs 0..2N:

        k0^-1 beta0^-1 . QL^-1 .
        [g0 R_{0,2N} ... g0 R_{02} . Q_0 . g0 R_{01} ... g0 R_{0,2N-1}] .
        beta0 k0 . g0^(-2N)

    with beta = g b g^-1.  For a constant automorphism the g0 factors
    are plain matrices; for a spectral shift each insertion translates
    the auxiliary argument of everything to its right and the final
    power cancels the residue, leaving a finite matrix.  The sigma-power
    sandwich and the quantum-leg sigma dressing cancel each other for
    the commuting-R0 class this builder supports and are therefore not
    assembled; the traced family built from this core commutes
    (certified numerically).
    """
    from .parametrize import auto_dress

    legs = all_legs(N)
    n = scheme.rank
    uvals = {0: complex(u_aux)}
    uvals.update({int(a): complex(v) for a, v in dict(u_quantum).items()})
    beta = auto_dress(b, g)
    kinv_binv = bind_spectral(embed((k.inv() @ beta.inv()), (0,), legs), uvals)
    QLi = embed(constant_dynmat(scheme, b.legs, np.linalg.inv(np.asarray(QL, complex))),
                (0,), legs)
    Qm = embed(constant_dynmat(scheme, b.legs, np.asarray(Q, complex)), (0,), legs)
    order = [2 * kk for kk in range(N, 0, -1)] + [None] + [2 * kk - 1 for kk in range(1, N + 1)]

    if g.variant == Automorphism.SHIFT:
        s = g.step

        def fn(lam, u):
            m = kinv_binv.eval(lam) @ QLi.eval(lam)
            count = 0
            for a in order:
                if a is None:
                    m = m @ Qm.eval(lam)
                    continue
                count += 1
                Re = embed(R0, (0, a), legs)
                m = m @ Re.eval(lam, {0: uvals[0] + count * s, a: uvals[a]})
            right = embed(beta @ k, (0,), legs)
            rv = {l: uvals[l] + (2 * N * s if l == 0 else 0.0) for l in right.spectral_legs}
            return m @ right.eval(lam, rv)

        return DynMat(scheme, legs, fn, frozenset())

    bk = bind_spectral(embed(beta @ k, (0,), legs), uvals)

    def fn(lam, u):
        g0 = _place0(g.matrix_at(), legs, n)
        m = kinv_binv.eval(lam) @ QLi.eval(lam)
        for a in order:
            if a is None:
                m = m @ Qm.eval(lam)
            else:
                Re = bind_spectral(embed(R0, (0, a), legs), uvals)
                m = m @ g0 @ Re.eval(lam)
        return m @ bk.eval(lam) @ _place0(g.matrix_at(power=-2 * N), legs, n)

    return DynMat(scheme, legs, fn, frozenset())


def _place0(mat, legs, n):
    from .dyncore import _place_matrix

    return _place_matrix(np.asarray(mat, complex), [0], len(legs), n)


def build_monodromy_factored(scheme: WeightScheme, R0: DynMat, b: DynMat,
                             q: DynMat, k: DynMat, Q, chi_t: DynMat, N: int,
                             u_quantum, u_aux, Rbar: DynMat = None,
                             chi0: DynMat = None, g: Automorphism = None,
                             QL=None) -> ShiftOpSum:
    """Conjugated factorized monodromy operator.

    Invertible case (Rbar None): the core is the bare chain product
    chi_0 b_0^-1 R_{0,2N} ... R_{02} Q_0 R_{01} ... R_{0,2N-1} b_0 k_0
    followed by the auxiliary weight-shift factor, conjugated by O_N.
    With Rbar (a second non-dynamical matrix not similar to R0) the odd
    chain factors use Rbar and the middle is the interleaved twisted
    reflection block built from chi0; this variant requires the caller
    to supply chi0 explicitly, since no dual can be manufactured from a
    direct solution here.  A non-identity automorphism dispatches to the
    gauged chain core (QL required, Rbar unsupported there).
    """
    if g is not None and not g.is_identity:
        if Rbar is not None:
            raise ValueError("the gauged chain supports only the single-R0 case")
        if QL is None:
            raise ValueError("the gauged chain needs the dual core QL")
        core = build_gauged_core(scheme, R0, b, q, k, Q, QL, g, N, u_quantum, u_aux)
        O = build_ON(b, q, N, u_quantum, scheme, g=g)
        mid = ShiftOpSum.from_matrix(core).compose(
            ShiftOpSum.weight_shift(scheme, all_legs(N), 0)
        )
        return ShiftOpSum.from_matrix(O.inv()).compose(mid).compose(
            ShiftOpSum.from_matrix(O)
        )
    legs = all_legs(N)
    uvals = {0: complex(u_aux)}
    uvals.update({int(a): complex(v) for a, v in dict(u_quantum).items()})
    n = scheme.rank

    def pl1(X, a):
        return bind_spectral(embed(X, (a,), legs), uvals)

    def pl2(X, a0, a1):
        return bind_spectral(embed(X, (a0, a1), legs), uvals)

    core = pl1(chi_t, 0) @ pl1(b.inv(), 0)
    for kk in range(N, 0, -1):
        core = core @ pl2(R0, 0, 2 * kk)
    if Rbar is None:
        Qm = np.asarray(Q, dtype=complex)
        core = core @ pl1(constant_dynmat(scheme, q.legs, Qm), 0)
    else:
        if chi0 is None:
            raise ValueError("the non-similar variant needs an explicit chi0")
        # interleaved twisted reflection block:
        # (prod_k q_{2k-1}(h odd above)) b_0 chi0(h odd above) q_0^-1 (prod)^-1
        odd = tuple(range(1, 2 * N, 2))
        qprod = None
        for kk in range(N, 0, -1):
            f = embed(q, (2 * kk - 1,), legs)
            s = _site_shift(kk, N)
            if s:
                f = dyn_shift(f, s, legs)
            qprod = f if qprod is None else qprod @ f
        qprod = bind_spectral(qprod, uvals)
        mid = bind_spectral(dyn_shift(embed(chi0, (0,), legs), odd, legs), uvals)
        core = core @ qprod @ pl1(b, 0) @ mid @ pl1(q.inv(), 0) @ qprod.inv()
    odd_R = Rbar if Rbar is not None else R0
    for kk in range(1, N + 1):
        core = core @ pl2(odd_R, 0, 2 * kk - 1)
    core = core @ pl1(b, 0) @ pl1(k, 0)

    O = build_ON(b, q, N, u_quantum, scheme)
    Osum = ShiftOpSum.from_matrix(O)
    Oinv = ShiftOpSum.from_matrix(O.inv())
    mid = ShiftOpSum.from_matrix(core).compose(
        ShiftOpSum.weight_shift(scheme, legs, 0)
    )
    return Oinv.compose(mid).compose(Osum)


def transfer_trace(T: ShiftOpSum, scheme: WeightScheme, N: int,
                   twist: DynMat = None, u_aux=None) -> ShiftOpSum:
    """Partial trace over the auxiliary leg, term by term.

    Each term (M, m) becomes (Tr_0[w^-1 M w], m) on the quantum legs,
    with w the optional auxiliary twist insertion evaluated at
    (lam, u_aux); shifts are preserved because the auxiliary shift
    factor was already expanded with weight projectors.
    """
    if 0 not in T.legs:
        raise LegError("transfer trace needs the auxiliary leg 0")
    n = scheme.rank
    qlegs = tuple(l for l in T.legs if l != 0)
    dq = n ** len(qlegs)
    terms = []
    for m, coeff in T.terms.items():
        def tr(lam, u, _c=coeff):
            M = _c.eval(lam)
            if twist is not None:
                uvals = {twist.legs[0]: complex(u_aux)} if twist.spectral_legs else {}
                w = twist.fn(lam, uvals)
                W = np.kron(w, np.eye(dq, dtype=complex))
                M = np.kron(np.linalg.inv(w), np.eye(dq, dtype=complex)) @ M @ W
            return np.einsum("iaib->ab", M.reshape(n, dq, n, dq))
        terms.append((m, DynMat(scheme, qlegs, tr, frozenset())))
    return ShiftOpSum(scheme, qlegs, terms)


@dataclass
class CommutationCertificate:
    """Outcome of a commuting-family certification run."""

    ingredient_reports: dict
    commutation: ResidualReport = None
    failed_preconditions: list = field(default_factory=list)

    @property
    def passed(self):
        return not self.failed_preconditions and (
            self.commutation is not None and self.commutation.passed
        )

    def summary(self):
        lines = [str(r) for r in self.ingredient_reports.values()]
        if self.failed_preconditions:
            lines.append(
                "precondition failure: " + ", ".join(self.failed_preconditions)
            )
        if self.commutation is not None:
            lines.append(str(self.commutation))
        return "\n".join(lines)


def certify_commuting_family(S: StructureSet, Q0: DynMat, chi_t: DynMat,
                             kappa: DynMat, N: int, u_list, u_quantum, points,
                             twist: DynMat = None, tol=1e-8,
                             ingredient_tol=1e-9, gauged=None) -> CommutationCertificate:
    """Build traced operators for each auxiliary value and certify
    pairwise commutation, gating on the ingredient residuals first.

    Ingredients checked: one-sided and diagonal weight conditions on
    (B, C, D) -- the diagonal condition on the twisted coefficient is
    the decisive hypothesis for commutation and is reported as
    ``twist_zero_weight_D`` -- the cubic consistency relations, the
    reflection residual for Q0, and the factorization condition for
    kappa.  On ingredient failure the commutation stage is skipped and
    the failing names are listed, localizing the violated hypothesis.
    """
    reports = {}
    reports["zero_weight_B"] = residual_zero_weight(S.B, "B", points, ingredient_tol)
    reports["zero_weight_C"] = residual_zero_weight(S.C, "C", points, ingredient_tol)
    reports["twist_zero_weight_D"] = residual_zero_weight(
        S.D, "D", points, ingredient_tol, name="twist_zero_weight_D"
    )
    if S.g.is_identity:
        reports.update(residual_ybce(S, points, ingredient_tol))
    else:
        reports.update(residual_gybce(S, points, ingredient_tol))
        reports["zwc"] = residual_zwc(S, points, ingredient_tol)
    reports["sdre_reflection"] = residual_sdre(
        S, Q0, points, ingredient_tol, name="sdre_reflection"
    )
    if kappa is not None:
        reports["theta_period"] = residual_theta_period(
            kappa, points, max(ingredient_tol, 1e-10)
        )
    failed = [name for name, rep in reports.items() if not rep.passed]
    if failed:
        return CommutationCertificate(reports, None, failed)

    scheme = S.scheme
    traced = []
    for u0 in u_list:
        if S.g.is_identity:
            T = build_monodromy_direct(S, Q0, chi_t, N, u_quantum, u0)
        else:
            if gauged is None:
                raise ValueError(
                    "certifying a gauged scenario needs the chain ingredients "
                    "(R0, b, q, k, Q, QL)"
                )
            T = build_monodromy_factored(
                scheme, gauged["R0"], gauged["b"], gauged["q"], gauged["k"],
                gauged["Q"], chi_t, N, u_quantum, u0, g=S.g, QL=gauged["QL"],
            )
        traced.append(transfer_trace(T, scheme, N, twist=twist, u_aux=u0))
    if len(traced) < 2:
        rep = ResidualReport("transfer_commutation", len(points), 0.0, tol,
                             (points[0][0], dict(points[0][1])))
        return CommutationCertificate(reports, rep, [])
    worst = None
    for i in range(len(traced)):
        for j in range(i + 1, len(traced)):
            r = shiftop_commutator(traced[i], traced[j], points, tol,
                                   name="transfer_commutation")
            if worst is None or r.max_residual > worst.max_residual:
                worst = r
    return CommutationCertificate(reports, worst, [])
