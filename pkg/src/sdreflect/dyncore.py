"""Calculus of dynamical matrices on tensor legs.

A dynamical matrix is a matrix-valued function of a dynamical point
``lam`` (a vector of n complex coordinates) and optional spectral values
attached to its legs.  Each leg is a copy of V = C^n; a matrix on k legs
has dimension n**k, with Kronecker factors ordered by increasing leg id.

The dynamical shift ``X(lam + gamma*h_k)`` is realized as the
weight-projector resolved sum

    sum_i X(lam + gamma*e_i) . e_ii^(k)

with the projector multiplied on the right; nested shifts add one sum
per shift leg.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np


class LegError(ValueError):
    """Leg lists are inconsistent (unknown leg, wrong count, ...)."""


class SpectralValueError(ValueError):
    """A spectral value is missing or supplied for a slot-less leg."""


class PoleError(ValueError):
    """Evaluation requested at a point marked as a pole."""

    def __init__(self, msg, lam=None, u=None):
        super().__init__(msg)
        self.lam = lam
        self.u = u


class AutomorphismError(ValueError):
    """Automorphism lacks the structure required by the operation."""


@dataclass(frozen=True)
class WeightScheme:
    """Cartan data: rank n, shift step gamma, weight basis e_ii on V."""

    rank: int
    gamma: complex = 1.0

    def __post_init__(self):
        if self.rank < 2:
            raise ValueError("rank must be at least 2")
        if self.gamma == 0:
            raise ValueError("gamma must be nonzero")

    def projector(self, i: int) -> np.ndarray:
        """The weight projector e_ii on V."""
        p = np.zeros((self.rank, self.rank), dtype=complex)
        p[i, i] = 1.0
        return p

    def unit(self, i: int) -> np.ndarray:
        """Coordinate direction e_i in lambda space."""
        v = np.zeros(self.rank, dtype=complex)
        v[i] = 1.0
        return v

    def check_point(self, lam) -> np.ndarray:
        lam = np.asarray(lam, dtype=complex)
        if lam.shape != (self.rank,):
            raise ValueError(f"lambda point must have {self.rank} coordinates")
        return lam


def permutation_operator(n: int) -> np.ndarray:
    """The flip P on V (x) V with P(x (x) y) = y (x) x."""
    if n < 2:
        raise ValueError("n must be at least 2")
    p = np.zeros((n * n, n * n), dtype=complex)
    for a in range(n):
        for b in range(n):
            p[b * n + a, a * n + b] = 1.0
    return p


def _as_u_dict(legs, u):
    if u is None:
        return {}
    if isinstance(u, dict):
        return dict(u)
    u = list(np.atleast_1d(u))
    if len(u) != len(legs):
        raise SpectralValueError("spectral value list does not match legs")
    return dict(zip(legs, u))


@dataclass(frozen=True)
class DynMat:
    """Matrix-valued pure function of (lam, u) on an ordered list of legs.

    ``fn(lam, u)`` receives the validated lambda vector and a dict mapping
    each spectral leg to its value; it must return an
    (n**k, n**k) array for k legs.
    """

    scheme: WeightScheme
    legs: tuple
    fn: object
    spectral_legs: frozenset = field(default_factory=frozenset)
    poles: object = None

    def __post_init__(self):
        object.__setattr__(self, "legs", tuple(self.legs))
        object.__setattr__(self, "spectral_legs", frozenset(self.spectral_legs))
        if tuple(sorted(self.legs)) != self.legs:
            raise LegError("legs must be listed in sorted order")
        if not self.spectral_legs <= set(self.legs):
            raise LegError("spectral slots must sit on declared legs")

    @property
    def dim(self) -> int:
        return self.scheme.rank ** len(self.legs)

    def eval(self, lam, u=None) -> np.ndarray:
        return eval_dynmat(self, lam, u)

    # -- pointwise algebra on a shared leg set --------------------------

    def _binary(self, other, op):
        if not isinstance(other, DynMat):
            raise TypeError("expected a DynMat")
        if self.legs != other.legs or self.scheme != other.scheme:
            raise LegError("operands must share legs and scheme")
        spect = self.spectral_legs | other.spectral_legs
        a, b = self, other

        def fn(lam, u):
            return op(
                a.fn(lam, {l: u[l] for l in a.spectral_legs}),
                b.fn(lam, {l: u[l] for l in b.spectral_legs}),
            )

        poles = _merge_poles(a.poles, b.poles)
        return DynMat(self.scheme, self.legs, fn, spect, poles)

    def __matmul__(self, other):
        return self._binary(other, lambda x, y: x @ y)

    def __add__(self, other):
        return self._binary(other, lambda x, y: x + y)

    def __sub__(self, other):
        return self._binary(other, lambda x, y: x - y)

    def __mul__(self, c):
        c = complex(c)
        return DynMat(
            self.scheme,
            self.legs,
            lambda lam, u, _f=self.fn: c * _f(lam, u),
            self.spectral_legs,
            self.poles,
        )

    __rmul__ = __mul__

    def inv(self):
        """Pointwise matrix inverse; singular points are poles."""
        f = self.fn

        def fn(lam, u):
            m = f(lam, u)
            try:
                return np.linalg.inv(m)
            except np.linalg.LinAlgError:
                raise PoleError("singular matrix encountered in inverse", lam, u)

        return DynMat(self.scheme, self.legs, fn, self.spectral_legs, self.poles)

    def shift_lambda(self, delta):
        """The matrix function lam -> X(lam + delta), same legs."""
        delta = np.asarray(delta, dtype=complex)
        f = self.fn
        return DynMat(
            self.scheme,
            self.legs,
            lambda lam, u: f(lam + delta, u),
            self.spectral_legs,
            None if self.poles is None else (lambda lam, u, p=self.poles: p(lam + delta, u)),
        )

    def shift_spectral(self, offsets):
        """Rewrite slot arguments u_leg -> u_leg + offsets[leg]."""
        offsets = dict(offsets)
        if not set(offsets) <= self.spectral_legs:
            raise SpectralValueError("offset on a leg without a spectral slot")
        f = self.fn

        def fn(lam, u):
            return f(lam, {l: u[l] + offsets.get(l, 0.0) for l in u})

        return DynMat(self.scheme, self.legs, fn, self.spectral_legs, self.poles)


def _merge_poles(p1, p2):
    if p1 is None:
        return p2
    if p2 is None:
        return p1
    return lambda lam, u: p1(lam, u) or p2(lam, u)


def eval_dynmat(X: DynMat, lam, u=None) -> np.ndarray:
    """Evaluate X at a point, validating spectral slots and poles."""
    lam = X.scheme.check_point(lam)
    ud = _as_u_dict(sorted(X.spectral_legs), u)
    missing = X.spectral_legs - set(ud)
    if missing:
        raise SpectralValueError(f"missing spectral value for legs {sorted(missing)}")
    ud = {l: complex(ud[l]) for l in X.spectral_legs}
    if X.poles is not None and X.poles(lam, ud):
        raise PoleError(f"evaluation at a pole (lam={lam}, u={ud})", lam, ud)
    m = np.asarray(X.fn(lam, ud), dtype=complex)
    if m.shape != (X.dim, X.dim):
        raise ValueError(f"evaluation returned shape {m.shape}, expected {(X.dim, X.dim)}")
    return m


# -- constructors --------------------------------------------------------


def identity_dynmat(scheme: WeightScheme, legs) -> DynMat:
    legs = tuple(sorted(legs))
    d = scheme.rank ** len(legs)
    return DynMat(scheme, legs, lambda lam, u: np.eye(d, dtype=complex))


def constant_dynmat(scheme: WeightScheme, legs, matrix) -> DynMat:
    legs = tuple(sorted(legs))
    m = np.asarray(matrix, dtype=complex).copy()
    if m.shape != (scheme.rank ** len(legs),) * 2:
        raise ValueError("matrix dimension does not match legs")
    return DynMat(scheme, legs, lambda lam, u: m)


def function_dynmat(scheme, legs, fn, spectral_legs=(), poles=None) -> DynMat:
    return DynMat(scheme, tuple(sorted(legs)), fn, frozenset(spectral_legs), poles)


def yangian_r(scheme: WeightScheme, legs=(1, 2), min_gap=1e-12) -> DynMat:
    """Rational R-matrix 1 + P/(u1 - u2) on two spectral legs."""
    legs = tuple(sorted(legs))
    if len(legs) != 2:
        raise LegError("R-matrix lives on exactly 2 legs")
    n = scheme.rank
    p = permutation_operator(n)
    eye = np.eye(n * n, dtype=complex)
    l1, l2 = legs

    def fn(lam, u):
        return eye + p / (u[l1] - u[l2])

    def poles(lam, u):
        return abs(u[l1] - u[l2]) < min_gap

    return DynMat(scheme, legs, fn, frozenset(legs), poles)


# -- leg placement -------------------------------------------------------


def _place_matrix(m, positions, total, n):
    """Embed an n**k matrix into n**total legs at the given positions."""
    k = len(positions)
    rest = [p for p in range(total) if p not in positions]
    full = np.kron(m, np.eye(n ** (total - k), dtype=complex))
    full = full.reshape((n,) * (2 * total))
    # current row-axis order: X legs then identity legs
    src_order = list(positions) + rest
    perm = [src_order.index(p) for p in range(total)]
    axes = perm + [total + a for a in perm]
    return full.transpose(axes).reshape(n ** total, n ** total)


def embed(X: DynMat, target_legs, all_legs) -> DynMat:
    """Place X on target_legs inside all_legs, identity elsewhere.

    ``target_legs[k]`` hosts X's k-th leg (so a non-monotone target list
    permutes the factors).
    """
    target_legs = tuple(target_legs)
    all_legs = tuple(sorted(all_legs))
    if len(target_legs) != len(X.legs):
        raise LegError("target leg count must match the matrix")
    if not set(target_legs) <= set(all_legs):
        raise LegError("target legs must be contained in the ambient legs")
    if len(set(target_legs)) != len(target_legs):
        raise LegError("target legs must be distinct")
    n = X.scheme.rank
    positions = [all_legs.index(t) for t in target_legs]
    spect = frozenset(
        target_legs[X.legs.index(l)] for l in X.spectral_legs
    )
    rebind = dict(zip(target_legs, X.legs))

    def fn(lam, u):
        m = X.fn(lam, {rebind[t]: u[t] for t in spect})
        return _place_matrix(m, positions, len(all_legs), n)

    poles = None
    if X.poles is not None:
        poles = lambda lam, u: X.poles(lam, {rebind[t]: u.get(t) for t in spect})
    return DynMat(X.scheme, all_legs, fn, spect, poles)


def dyn_shift(X: DynMat, shift_legs, all_legs=None) -> DynMat:
    """Weight-projector resolved shift of X by the named legs.

    Returns lam -> sum over weight indices of
    X(lam + gamma*(e_{i1}+...+e_{ir})) . prod_k e_{i_k i_k}^(shift_leg_k),
    embedded into the union of X's legs and the shift legs (or into
    all_legs when given).
    """
    shift_legs = tuple(shift_legs)
    scheme = X.scheme
    n = scheme.rank
    gamma = scheme.gamma
    if all_legs is None:
        all_legs = tuple(sorted(set(X.legs) | set(shift_legs)))
    else:
        all_legs = tuple(sorted(all_legs))
        if not (set(X.legs) | set(shift_legs)) <= set(all_legs):
            raise LegError("ambient legs must contain the matrix and shift legs")
    if not shift_legs:
        return embed(X, X.legs, all_legs)
    xe = embed(X, X.legs, all_legs)
    total = len(all_legs)
    pos = [all_legs.index(l) for l in shift_legs]

    def fn(lam, u):
        acc = np.zeros((n ** total,) * 2, dtype=complex)
        for idx in itertools.product(range(n), repeat=len(shift_legs)):
            delta = gamma * sum(scheme.unit(i) for i in idx)
            m = xe.fn(lam + delta, u)
            # diagonal projector prod_k e_{i_k i_k} on the shift legs,
            # multiplied on the right
            diag = np.ones((n,) * total, dtype=complex)
            for p, i in zip(pos, idx):
                sel = np.zeros(n)
                sel[i] = 1.0
                shape = [1] * total
                shape[p] = n
                diag = diag * sel.reshape(shape)
            acc += m * diag.reshape(-1)[None, :]
        return acc

    poles = None
    if xe.poles is not None:
        def poles(lam, u, _p=xe.poles):
            for idx in itertools.product(range(n), repeat=len(shift_legs)):
                delta = gamma * sum(scheme.unit(i) for i in idx)
                if _p(lam + delta, u):
                    return True
            return False

    return DynMat(scheme, all_legs, fn, xe.spectral_legs, poles)


def pi_transpose(X: DynMat) -> DynMat:
    """P X P with the two legs (and their spectral slots) swapped."""
    if len(X.legs) != 2:
        raise LegError("pi transpose needs exactly 2 legs")
    n = X.scheme.rank
    p = permutation_operator(n)
    l1, l2 = X.legs
    swap = {l1: l2, l2: l1}
    spect = frozenset(swap[l] for l in X.spectral_legs)

    def fn(lam, u):
        m = X.fn(lam, {swap[l]: u[l] for l in spect})
        return p @ m @ p

    poles = None
    if X.poles is not None:
        poles = lambda lam, u: X.poles(lam, {swap[l]: u.get(l) for l in spect})
    return DynMat(X.scheme, X.legs, fn, spect, poles)


# -- automorphisms --------------------------------------------------------


class Automorphism:
    """Auxiliary-space automorphism: identity, constant invertible matrix,
    invertible matrix function of u, or spectral shift u -> u + s."""

    IDENTITY = "identity"
    CONSTANT = "constant"
    FACTORIZABLE = "factorizable"
    SHIFT = "spectral_shift"

    def __init__(self, variant, matrix=None, matrix_fn=None, step=None):
        self.variant = variant
        self.step = None if step is None else complex(step)
        self.matrix_fn = matrix_fn
        self._eig = None
        if variant == self.CONSTANT:
            self.matrix = np.asarray(matrix, dtype=complex).copy()
            if abs(np.linalg.det(self.matrix)) < 1e-12:
                raise AutomorphismError("constant automorphism must be invertible")
        else:
            self.matrix = None

    @classmethod
    def identity(cls):
        return cls(cls.IDENTITY)

    @classmethod
    def constant(cls, matrix):
        return cls(cls.CONSTANT, matrix=matrix)

    @classmethod
    def factorizable(cls, matrix_fn):
        return cls(cls.FACTORIZABLE, matrix_fn=matrix_fn)

    @classmethod
    def spectral_shift(cls, step):
        return cls(cls.SHIFT, step=step)

    @property
    def is_identity(self):
        return self.variant == self.IDENTITY

    def matrix_at(self, u=None, power=1):
        """The n x n matrix of g**power (not defined for spectral shifts)."""
        if self.variant == self.IDENTITY:
            raise AutomorphismError("identity has no stored dimension; handle upstream")
        if self.variant == self.CONSTANT:
            base = self.matrix
        elif self.variant == self.FACTORIZABLE:
            if u is None:
                raise SpectralValueError("factorizable automorphism needs a spectral value")
            base = np.asarray(self.matrix_fn(u), dtype=complex)
        else:
            raise AutomorphismError("spectral shift is not a finite matrix")
        if power == 1:
            return base
        if power == -1:
            return np.linalg.inv(base)
        return np.linalg.matrix_power(base, power)

    def _eigendata(self):
        if self._eig is None:
            w, v = np.linalg.eig(self.matrix)
            if np.linalg.cond(v) > 1e10:
                raise AutomorphismError("automorphism is not (numerically) diagonalizable")
            bad = (np.abs(w) < 1e-12) | ((w.real < 0) & (np.abs(w.imag) < 1e-12))
            if np.any(bad):
                raise AutomorphismError(
                    "eigenvalue on the principal branch cut; sigma powers undefined"
                )
            self._eig = (w, v, np.linalg.inv(v))
        return self._eig

    def complex_power(self, exponent) -> np.ndarray:
        """Principal-branch matrix power g**exponent for constant g."""
        if self.variant != self.CONSTANT:
            raise AutomorphismError("complex powers require a constant automorphism")
        w, v, vinv = self._eigendata()
        return (v * np.exp(exponent * np.log(w))) @ vinv


def sigma_of(lam) -> complex:
    """Sum of the dynamical coordinates."""
    return complex(np.sum(np.asarray(lam, dtype=complex)))


def sigma_power(g: Automorphism, lam) -> Automorphism:
    """The automorphism g**sigma with sigma = sum_i lambda_i.

    Constant g: principal-branch eigenvalue powers (diagonalizable g with
    eigenvalues off the cut).  Spectral shift by s: shift by sigma*s.
    """
    s = sigma_of(lam)
    if g.variant == Automorphism.IDENTITY:
        return Automorphism.identity()
    if g.variant == Automorphism.SHIFT:
        return Automorphism.spectral_shift(s * g.step)
    if g.variant == Automorphism.CONSTANT:
        return Automorphism.constant(g.complex_power(s))
    raise AutomorphismError("sigma power supported for constant and shift automorphisms")


def adjoint_auto(X: DynMat, g: Automorphism, legs, side="conjugate", power=1) -> DynMat:
    """Adjoint (or one-sided) action of g**power on the named legs of X.

    conjugate: g^p X g^(-p); left / right: one-sided multiplication.  For
    a spectral shift the conjugate action rewrites the slot argument
    u -> u + power*s; one-sided multiplication is rejected because such a
    product is no longer a plain matrix function.
    """
    legs = tuple(legs)
    if not set(legs) <= set(X.legs):
        raise LegError("adjoint legs must belong to the matrix")
    if side not in ("conjugate", "left", "right"):
        raise ValueError("side must be conjugate, left or right")
    if g.is_identity or power == 0:
        return X
    if g.variant == Automorphism.SHIFT:
        if side != "conjugate":
            raise AutomorphismError(
                "one-sided spectral-shift action is not a finite matrix; "
                "only adjoint actions are representable here"
            )
        # conjugating a slot-less leg is exactly the identity map
        slotted = {l: power * g.step for l in legs if l in X.spectral_legs}
        return X.shift_spectral(slotted) if slotted else X

    n = X.scheme.rank
    f = X.fn
    xspect = X.spectral_legs
    # a spectrally dependent automorphism turns its legs into slots of
    # the result even when the underlying matrix ignores them
    spect = xspect
    if g.variant == Automorphism.FACTORIZABLE:
        spect = xspect | frozenset(legs)

    def fn(lam, u):
        m = f(lam, {l: u[l] for l in xspect})
        total = len(X.legs)
        gfull = np.eye(n ** total, dtype=complex)
        for l in legs:
            uval = u.get(l) if g.variant == Automorphism.FACTORIZABLE else None
            gl = g.matrix_at(u=uval, power=power)
            gfull = gfull @ _place_matrix(gl, [X.legs.index(l)], total, n)
        if side == "left":
            return gfull @ m
        if side == "right":
            return m @ gfull
        return gfull @ m @ np.linalg.inv(gfull)

    return DynMat(X.scheme, X.legs, fn, spect, X.poles)


def sigma_conjugate(X: DynMat, g: Automorphism, legs, sign=-1) -> DynMat:
    """Ad exp[sign*sigma*log g] applied to X on the named legs.

    sign=-1 gives exp(-sigma log g) X exp(+sigma log g); for a spectral
    shift this rewrites u -> u + sign*sigma*s on the named slots.
    """
    legs = tuple(legs)
    if g.is_identity:
        return X
    if g.variant == Automorphism.SHIFT:
        slotted = [l for l in legs if l in X.spectral_legs]
        if not slotted:
            return X
        f = X.fn
        step = g.step

        def fn(lam, u):
            s = sigma_of(lam)
            return f(lam, {l: u[l] + (sign * s * step if l in slotted else 0.0) for l in u})

        return DynMat(X.scheme, X.legs, fn, X.spectral_legs, X.poles)
    if g.variant != Automorphism.CONSTANT:
        raise AutomorphismError("sigma conjugation needs a constant or shift automorphism")
    n = X.scheme.rank
    f = X.fn

    def fn(lam, u):
        s = sigma_of(lam)
        gm = g.complex_power(sign * s)
        total = len(X.legs)
        gfull = np.eye(n ** total, dtype=complex)
        for l in legs:
            gfull = gfull @ _place_matrix(gm, [X.legs.index(l)], total, n)
        return gfull @ f(lam, u) @ np.linalg.inv(gfull)

    return DynMat(X.scheme, X.legs, fn, X.spectral_legs, X.poles)


# -- dynamical-variable changes ------------------------------------------


def sigma_theta(lam):
    """Change of variables (lambda_i) -> (sigma, theta_2..theta_n)."""
    lam = np.asarray(lam, dtype=complex)
    s = sigma_of(lam)
    thetas = s - 2.0 * lam[1:]
    return s, thetas


def sigma_theta_inverse(s, thetas):
    """Inverse of :func:`sigma_theta`."""
    thetas = np.asarray(thetas, dtype=complex)
    rest = (s - thetas) / 2.0
    lam1 = s - np.sum(rest)
    return np.concatenate(([lam1], rest))


# -- zero-weight decomposition -------------------------------------------


class ZeroWeightDecomposition:
    """Slot tables of a zero-weight 2-leg matrix.

    d[i, j] multiplies e_ii (x) e_jj and delta[i, j] (i != j) multiplies
    e_ij (x) e_ji; any residual mass outside those slots is reported.
    """

    def __init__(self, D: DynMat):
        if len(D.legs) != 2:
            raise LegError("zero-weight decomposition needs a 2-leg matrix")
        self.source = D
        self.n = D.scheme.rank

    def tables(self, lam, u=None):
        n = self.n
        m = self.source.eval(lam, u)
        d = np.zeros((n, n), dtype=complex)
        delta = np.zeros((n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                d[i, j] = m[i * n + j, i * n + j]
                if i != j:
                    delta[i, j] = m[i * n + j, j * n + i]
        return d, delta

    def offslot_residual(self, lam, u=None):
        n = self.n
        m = self.source.eval(lam, u).copy()
        for i in range(n):
            for j in range(n):
                m[i * n + j, i * n + j] = 0.0
                if i != j:
                    m[i * n + j, j * n + i] = 0.0
        denom = max(np.linalg.norm(self.source.eval(lam, u)), 1.0)
        return np.linalg.norm(m) / denom

    def reassemble(self, lam, u=None):
        n = self.n
        d, delta = self.tables(lam, u)
        m = np.zeros((n * n, n * n), dtype=complex)
        for i in range(n):
            for j in range(n):
                m[i * n + j, i * n + j] = d[i, j]
                if i != j:
                    m[i * n + j, j * n + i] = delta[i, j]
        return m


def decompose_zero_weight(D: DynMat, points, tol=1e-9):
    """Decompose a zero-weight 2-leg matrix into its d / Delta tables.

    ``points`` is a list of (lam, u) pairs used to certify that no mass
    sits outside the zero-weight slots; raises ValueError otherwise.
    """
    dec = ZeroWeightDecomposition(D)
    worst = 0.0
    for lam, u in points:
        worst = max(worst, dec.offslot_residual(lam, u))
    if worst > tol:
        raise ValueError(
            f"matrix is not zero-weight: off-slot residual {worst:.3e} exceeds {tol:.1e}"
        )
    return dec
