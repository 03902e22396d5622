"""Built-in instance catalog, scenario files, and scenario sampling.

A scenario bundles one fully specified instance: the weight data, the
matrix functions (as entry expressions in the grammar of
:mod:`~sdreflect.exprparse`), the constant cores, the automorphisms,
the chain size and spectral values, the sampler settings and the
tolerance.  Scenario files are JSON documents mirroring the field
names below; unknown fields are errors.
"""

from __future__ import annotations

import copy
import json
from dataclasses import dataclass, field

import numpy as np

from . import exprparse as ep
from .dyncore import Automorphism, DynMat, PoleError, WeightScheme, function_dynmat
from .sampling import invertibility_guard, sample_points


class ScenarioError(ValueError):
    """Malformed scenario data; the message carries the field path."""


# -- (de)serialization helpers ------------------------------------------------


def _pack_complex(z):
    z = complex(z)
    return [z.real, z.imag]


def _unpack_complex(v, path):
    if isinstance(v, (int, float)):
        return complex(v)
    if (not isinstance(v, (list, tuple))) or len(v) != 2:
        raise ScenarioError(f"{path}: complex numbers are [re, im] pairs")
    return complex(v[0], v[1])


def _pack_matrix(m):
    return [[_pack_complex(z) for z in row] for row in np.asarray(m, dtype=complex)]


def _unpack_matrix(v, path):
    try:
        return np.array(
            [[_unpack_complex(z, path) for z in row] for row in v], dtype=complex
        )
    except (TypeError, ScenarioError):
        raise ScenarioError(f"{path}: matrices are nested [re, im] pair arrays")


# -- matrix-function and automorphism specs -----------------------------------

MATRIX_KINDS = ("identity", "diagonal", "matrix", "yangian", "yangian_offdiag",
                "constant")
AUTO_KINDS = ("identity", "constant", "spectral_shift", "factorizable")


def compile_matrix_spec(spec, scheme: WeightScheme, legs, path="matrix"):
    """Compile a matrix spec into a DynMat on the given legs.

    kinds: identity; diagonal (entry expressions); matrix (row-major
    entry expressions); constant (numeric entries); yangian (two legs);
    yangian_offdiag (two legs, off-diagonal weight slots scaled by mu).
    Expression entries may reference u1..uk for the spectral slots of
    the k legs, in leg order.
    """
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ScenarioError(f"{path}: expected an object with a 'kind' field")
    kind = spec["kind"]
    if kind not in MATRIX_KINDS:
        raise ScenarioError(f"{path}.kind: unknown kind {kind!r}")
    n = scheme.rank
    legs = tuple(sorted(legs))
    known = {"kind", "entries", "mu"}
    extra = set(spec) - known
    if extra:
        raise ScenarioError(f"{path}: unknown fields {sorted(extra)}")

    if kind == "identity":
        d = n ** len(legs)
        return DynMat(scheme, legs, lambda lam, u: np.eye(d, dtype=complex))

    if kind == "constant":
        m = _unpack_matrix(spec.get("entries"), f"{path}.entries")
        if m.shape != (n ** len(legs),) * 2:
            raise ScenarioError(f"{path}.entries: wrong dimension {m.shape}")
        return DynMat(scheme, legs, lambda lam, u: m)

    if kind in ("yangian", "yangian_offdiag"):
        if len(legs) != 2:
            raise ScenarioError(f"{path}: R-matrix kinds need exactly 2 legs")
        from .dyncore import permutation_operator

        p = permutation_operator(n)
        eye = np.eye(n * n, dtype=complex)
        mu = _unpack_complex(spec.get("mu", 1.0), f"{path}.mu")
        # scale only the e_ii (x) e_jj weight slots (an abelian diagonal
        # twist), leaving the exchange slots alone; this preserves the
        # cubic exchange identity
        slot = np.zeros((n * n, n * n), dtype=complex)
        if kind == "yangian_offdiag":
            for i in range(n):
                for j in range(n):
                    if i < j:
                        slot[i * n + j, i * n + j] = mu - 1.0
                    elif i > j:
                        slot[i * n + j, i * n + j] = 1.0 / mu - 1.0
        l1, l2 = legs

        def fn(lam, u):
            base = eye + p / (u[l1] - u[l2])
            return base + slot

        def poles(lam, u):
            return abs(u[l1] - u[l2]) < 1e-9

        return DynMat(scheme, legs, fn, frozenset(legs), poles)

    entries = spec.get("entries")
    if entries is None:
        raise ScenarioError(f"{path}.entries: required for kind {kind!r}")
    if kind == "diagonal":
        if len(legs) != 1:
            raise ScenarioError(f"{path}: diagonal specs are single-leg")
        if len(entries) != n:
            raise ScenarioError(f"{path}.entries: need {n} diagonal entries")
        rows = [[entries[i] if i == j else None for j in range(n)] for i in range(n)]
    else:
        if len(legs) != 1:
            raise ScenarioError(f"{path}: matrix specs are single-leg")
        if len(entries) != n or any(len(r) != n for r in entries):
            raise ScenarioError(f"{path}.entries: need an {n}x{n} expression array")
        rows = entries

    asts = []
    uidx = set()
    for i, row in enumerate(rows):
        arow = []
        for j, src in enumerate(row):
            if src is None:
                arow.append(None)
                continue
            try:
                ast = ep.parse_expr(src)
            except ep.ParseError as exc:
                raise ScenarioError(f"{path}.entries[{i}][{j}]: {exc}")
            uidx |= ep.collect_u_indices(ast)
            arow.append(ast)
        asts.append(arow)
    if uidx - {1}:
        raise ScenarioError(
            f"{path}: single-leg entries may reference u1 only (found u{sorted(uidx)})"
        )
    spectral = frozenset(legs) if uidx else frozenset()
    leg = legs[0]
    gamma = scheme.gamma

    def fn(lam, u):
        uu = {1: u[leg]} if spectral else {}
        m = np.zeros((n, n), dtype=complex)
        for i in range(n):
            for j in range(n):
                if asts[i][j] is not None:
                    try:
                        m[i, j] = ep.eval_ast(asts[i][j], lam, uu, gamma)
                    except ep.EvalPoleError as exc:
                        raise PoleError(str(exc), lam, u)
        return m

    return DynMat(scheme, legs, fn, spectral)


def compile_automorphism_spec(spec, path="automorphism") -> Automorphism:
    if spec is None:
        return Automorphism.identity()
    if not isinstance(spec, dict) or "kind" not in spec:
        raise ScenarioError(f"{path}: expected an object with a 'kind' field")
    kind = spec["kind"]
    if kind not in AUTO_KINDS:
        raise ScenarioError(f"{path}.kind: unknown automorphism kind {kind!r}")
    known = {"kind", "matrix", "step", "entries"}
    extra = set(spec) - known
    if extra:
        raise ScenarioError(f"{path}: unknown fields {sorted(extra)}")
    if kind == "identity":
        return Automorphism.identity()
    if kind == "constant":
        return Automorphism.constant(_unpack_matrix(spec.get("matrix"), f"{path}.matrix"))
    if kind == "spectral_shift":
        return Automorphism.spectral_shift(_unpack_complex(spec.get("step", 1.0),
                                                           f"{path}.step"))
    entries = spec.get("entries")
    if entries is None:
        raise ScenarioError(f"{path}.entries: required for a factorizable automorphism")
    asts = [[ep.parse_expr(src) for src in row] for row in entries]

    def mfn(uval):
        return np.array(
            [[ep.eval_ast(a, [0.0], {1: uval}, 1.0) for a in row] for row in asts],
            dtype=complex,
        )

    return Automorphism.factorizable(mfn)


# -- the scenario type ---------------------------------------------------------

_FIELDS = {
    "name", "rank", "gamma", "spectral", "b", "q", "k", "Q", "Q_L",
    "g", "a", "f", "R0", "Rbar", "projectors", "chi0", "sites",
    "quantum_spectral", "sampler", "tolerance",
}


@dataclass
class Scenario:
    """A fully specified verification instance (see module docstring)."""

    name: str
    rank: int
    gamma: complex
    spectral: bool
    b: dict
    q: dict
    k: dict
    Q: np.ndarray
    Q_L: np.ndarray
    R0: dict
    g: dict = None
    a: dict = None
    f: dict = None
    Rbar: dict = None
    projectors: list = None
    chi0: dict = None
    sites: int = 1
    quantum_spectral: object = "default"
    sampler: dict = field(default_factory=lambda: {
        "seed": 1, "count": 50, "box": 2.0, "min_separation": 0.1,
    })
    tolerance: float = 1e-9

    def __post_init__(self):
        if self.rank < 2:
            raise ScenarioError("rank: must be at least 2")
        self.gamma = complex(self.gamma)
        if self.gamma == 0:
            raise ScenarioError("gamma: must be nonzero")
        if float(self.tolerance) <= 0:
            raise ScenarioError("tolerance: must be positive")
        self.Q = np.asarray(self.Q, dtype=complex)
        self.Q_L = np.asarray(self.Q_L, dtype=complex)
        self._scheme = WeightScheme(self.rank, self.gamma)

    # -- compiled accessors -------------------------------------------------

    @property
    def scheme(self) -> WeightScheme:
        return self._scheme

    def b_mat(self):
        return compile_matrix_spec(self.b, self.scheme, (1,), "b")

    def q_mat(self):
        return compile_matrix_spec(self.q, self.scheme, (1,), "q")

    def k_mat(self):
        return compile_matrix_spec(self.k, self.scheme, (1,), "k")

    def R0_mat(self):
        return compile_matrix_spec(self.R0, self.scheme, (1, 2), "R0")

    def Rbar_mat(self):
        if self.Rbar is None:
            return None
        return compile_matrix_spec(self.Rbar, self.scheme, (1, 2), "Rbar")

    def chi0_mat(self):
        if self.chi0 is None:
            return None
        return compile_matrix_spec(self.chi0, self.scheme, (1,), "chi0")

    def g_auto(self):
        return compile_automorphism_spec(self.g, "g")

    def a_auto(self):
        return compile_automorphism_spec(self.a, "a")

    def f_auto(self):
        return compile_automorphism_spec(self.f, "f")

    def projector_list(self):
        if self.projectors is None:
            return None
        return [_unpack_matrix(p, "projectors") for p in self.projectors]

    def quantum_values(self, N=None, u_ref=0.0):
        """Quantum-leg spectral values as a dict leg -> value."""
        from .monodromy import locality_preset

        N = self.sites if N is None else N
        qs = self.quantum_spectral
        if isinstance(qs, str):
            if qs == "locality":
                return locality_preset(u_ref, N)
            if qs == "default":
                base = [-0.9 + 0.11j, 0.73 - 0.4j, 1.61 + 0.3j, -1.97 - 0.22j,
                        2.41 + 0.17j, -2.63 + 0.35j]
                if 2 * N > len(base):
                    raise ScenarioError("quantum_spectral: default preset supports up to 3 sites")
                return {i + 1: base[i] for i in range(2 * N)}
            raise ScenarioError(f"quantum_spectral: unknown preset {qs!r}")
        vals = [_unpack_complex(v, "quantum_spectral") for v in qs]
        if len(vals) < 2 * N:
            raise ScenarioError("quantum_spectral: need two values per site")
        return {i + 1: vals[i] for i in range(2 * N)}

    def sample(self, count=None, seed=None, spectral_legs=(1, 2, 3)):
        """Pole-aware samples for this scenario's checks."""
        cfg = dict(self.sampler)
        count = cfg.get("count", 50) if count is None else count
        seed = cfg.get("seed", 1) if seed is None else seed
        n = self.rank
        gamma = self.gamma
        shifts = []
        for i in range(n):
            shifts.append(gamma * self.scheme.unit(i))
            for j in range(n):
                shifts.append(gamma * (self.scheme.unit(i) + self.scheme.unit(j)))
                for l in range(n):
                    shifts.append(
                        gamma * (self.scheme.unit(i) + self.scheme.unit(j)
                                 + self.scheme.unit(l)))
        guards = [invertibility_guard(
            [self.b_mat(), self.q_mat(), self.k_mat()],
            floor=0.05, probe_shifts=shifts,
        )]
        return sample_points(
            self.scheme,
            spectral_legs=spectral_legs if self.spectral else (),
            count=count,
            seed=seed,
            box=cfg.get("box", 2.0),
            min_sep=cfg.get("min_separation", 0.1),
            guards=guards,
        )

    # -- serialization --------------------------------------------------------

    def to_dict(self):
        out = {
            "name": self.name,
            "rank": self.rank,
            "gamma": _pack_complex(self.gamma),
            "spectral": bool(self.spectral),
            "b": self.b, "q": self.q, "k": self.k,
            "Q": _pack_matrix(self.Q),
            "Q_L": _pack_matrix(self.Q_L),
            "R0": self.R0,
            "sites": self.sites,
            "quantum_spectral": self.quantum_spectral
            if isinstance(self.quantum_spectral, str)
            else [_pack_complex(v) for v in self.quantum_spectral],
            "sampler": dict(self.sampler),
            "tolerance": float(self.tolerance),
        }
        for name in ("g", "a", "f", "Rbar", "chi0"):
            val = getattr(self, name)
            if val is not None:
                out[name] = val
        if self.projectors is not None:
            out["projectors"] = self.projectors
        return out

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1, sort_keys=True)
            fh.write("\n")


def scenario_from_dict(data) -> Scenario:
    if not isinstance(data, dict):
        raise ScenarioError("scenario document must be an object")
    extra = set(data) - _FIELDS
    if extra:
        raise ScenarioError(f"unknown fields {sorted(extra)}")
    missing = {"name", "rank", "gamma", "b", "q", "k", "Q", "Q_L", "R0"} - set(data)
    if missing:
        raise ScenarioError(f"missing fields {sorted(missing)}")
    data = copy.deepcopy(data)
    data["gamma"] = _unpack_complex(data["gamma"], "gamma")
    data["Q"] = _unpack_matrix(data["Q"], "Q")
    data["Q_L"] = _unpack_matrix(data["Q_L"], "Q_L")
    data.setdefault("spectral", True)
    qs = data.get("quantum_spectral", "default")
    if not isinstance(qs, str):
        data["quantum_spectral"] = [_unpack_complex(v, "quantum_spectral") for v in qs]
    try:
        scen = Scenario(**data)
    except TypeError as exc:
        raise ScenarioError(str(exc))
    # compile everything once so malformed expressions surface with paths
    scen.b_mat(); scen.q_mat(); scen.k_mat(); scen.R0_mat()
    scen.Rbar_mat(); scen.chi0_mat()
    scen.g_auto(); scen.a_auto(); scen.f_auto()
    return scen


def load_scenario(path) -> Scenario:
    with open(path) as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ScenarioError(f"not a valid scenario document: {exc}")
    return scenario_from_dict(data)


# -- built-in catalog -----------------------------------------------------------


def _diag_affine(consts, slopes):
    """Diagonal entries  c_i + sum_j s_ij * lambda_j  as expression strings."""
    entries = []
    for c, row in zip(consts, slopes):
        parts = [f"{c}"]
        for j, s in enumerate(row):
            if s == 0:
                continue
            op = "+" if s > 0 else "-"
            parts.append(f"{op}{abs(s)}*lambda{j+1}")
        entries.append("".join(parts))
    return {"kind": "diagonal", "entries": entries}


def _diag_ratio(numer, denom):
    """Entrywise ratio of two diagonal specs (for k = b^-1 q)."""
    return {
        "kind": "diagonal",
        "entries": [f"({p})/({q})" for p, q in zip(numer["entries"], denom["entries"])],
    }


def _identity_spec():
    return {"kind": "identity"}


def _builtin_trivial_yangian(rank=2):
    return {
        "name": "trivial_yangian",
        "rank": rank,
        "gamma": [1.0, 0.0],
        "spectral": True,
        "b": _identity_spec(), "q": _identity_spec(), "k": _identity_spec(),
        "Q": _pack_matrix(np.eye(rank)),
        "Q_L": _pack_matrix(np.eye(rank)),
        "R0": {"kind": "yangian"},
        "sites": 1,
        "quantum_spectral": "default",
        "sampler": {"seed": 1, "count": 50, "box": 2.0, "min_separation": 0.1},
        "tolerance": 1e-9,
    }


_B_CONSTS = [2.6, 2.4, 2.7]
_B_SLOPES = [[0.13, -0.07, 0.05], [0.04, 0.11, -0.06], [-0.08, 0.05, 0.12]]
_Q_CONSTS = [2.3, 2.8, 2.5]
_Q_SLOPES = [[0.09, 0.12, -0.04], [-0.11, 0.08, 0.07], [0.06, -0.09, 0.1]]


def _builtin_diagonal_dressed(rank=2):
    bspec = _diag_affine(_B_CONSTS[:rank], [r[:rank] for r in _B_SLOPES[:rank]])
    qspec = _diag_affine(_Q_CONSTS[:rank], [r[:rank] for r in _Q_SLOPES[:rank]])
    Q = np.eye(rank, dtype=complex)
    Q[0, 1], Q[1, 0], Q[1, 1] = 0.45, 0.21, 1.3
    QL = np.eye(rank, dtype=complex)
    QL[0, 0], QL[0, 1], QL[1, 0] = 1.1, 0.3, -0.2
    return {
        "name": "diagonal_dressed",
        "rank": rank,
        "gamma": [1.0, 0.0],
        "spectral": True,
        "b": bspec, "q": qspec, "k": _diag_ratio(qspec, bspec),
        "Q": _pack_matrix(Q),
        "Q_L": _pack_matrix(QL),
        "R0": {"kind": "yangian"},
        "sites": 2,
        "quantum_spectral": "default",
        "sampler": {"seed": 2, "count": 50, "box": 1.6, "min_separation": 0.1},
        "tolerance": 1e-9,
    }


def _builtin_projector_b(rank=2):
    base = _builtin_diagonal_dressed(rank)
    projs = []
    for i in range(rank):
        p = np.zeros((rank, rank))
        p[i, i] = 1.0
        projs.append(_pack_matrix(p))
    base.update({
        "name": "projector_b",
        "Q": _pack_matrix(np.diag([1.0] + [0.0] * (rank - 1))),
        "projectors": projs,
        "sites": 1,
        "sampler": {"seed": 3, "count": 50, "box": 1.6, "min_separation": 0.1},
    })
    return base


def _builtin_constant_g(rank=2):
    if rank != 2:
        raise ScenarioError("the constant-automorphism instance is rank 2")
    qspec = _diag_affine([2.5, 2.2], [[0.12, 0.0], [0.0, 0.1]])
    # b is unit-determinant triangular, so beta = g b g^-1 scales its
    # off-diagonal entry by g1/g2 = 2; k = beta^-1 q stays closed-form.
    off = "0.2+0.1*lambda1"
    bspec = {"kind": "matrix", "entries": [["1", off], ["0", "1"]]}
    q1, q2 = qspec["entries"]
    kspec = {"kind": "matrix", "entries": [
        [f"({q1})", f"0-2*({off})*({q2})"],
        ["0", f"({q2})"],
    ]}
    return {
        "name": "constant_g",
        "rank": 2,
        "gamma": [1.0, 0.0],
        "spectral": True,
        "b": bspec, "q": qspec, "k": kspec,
        "Q": _pack_matrix([[1.0, 0.45], [0.21, 1.3]]),
        "Q_L": _pack_matrix([[1.1, 0.3], [-0.2, 0.9]]),
        "R0": {"kind": "yangian"},
        "g": {"kind": "constant", "matrix": _pack_matrix(np.diag([2.0, 1.0]))},
        "a": {"kind": "constant", "matrix": _pack_matrix(np.diag([3.0, 1.0]))},
        "sites": 1,
        "quantum_spectral": "default",
        "sampler": {"seed": 4, "count": 50, "box": 1.6, "min_separation": 0.1},
        "tolerance": 1e-9,
    }


def _builtin_spectral_shift_g(rank=2):
    if rank != 2:
        raise ScenarioError("the shift-automorphism instance is rank 2")
    # b carries genuine spectral dependence; q is lambda-only so the
    # twisted coefficient keeps its difference form in u.
    bspec = {"kind": "diagonal", "entries": [
        "exp(0.2*u1+0.3*lambda1)", "exp(0-0.1*u1+0.1*lambda2)",
    ]}
    qspec = {"kind": "diagonal", "entries": ["exp(0.4*lambda1)", "exp(0-0.3*lambda2)"]}
    # k = (g b g^-1)^-1 q with the shift step 1: b arguments at u+1
    kspec = {"kind": "diagonal", "entries": [
        "exp(0.4*lambda1-0.2*(u1+1)-0.3*lambda1)",
        "exp(0-0.3*lambda2+0.1*(u1+1)-0.1*lambda2)",
    ]}
    return {
        "name": "spectral_shift_g",
        "rank": 2,
        "gamma": [1.0, 0.0],
        "spectral": True,
        "b": bspec, "q": qspec, "k": kspec,
        "Q": _pack_matrix([[1.0, 0.45], [0.21, 1.3]]),
        "Q_L": _pack_matrix([[1.1, 0.3], [-0.2, 0.9]]),
        "R0": {"kind": "yangian"},
        "g": {"kind": "spectral_shift", "step": [1.0, 0.0]},
        "sites": 1,
        "quantum_spectral": "default",
        "sampler": {"seed": 5, "count": 50, "box": 1.6, "min_separation": 0.1},
        "tolerance": 1e-9,
    }


def _builtin_nonsimilar_detwist(rank=2):
    base = _builtin_diagonal_dressed(rank)
    Q = np.zeros((rank, rank))
    Q[0, 0] = 1.0
    base.update({
        "name": "nonsimilar_detwist",
        "Rbar": {"kind": "yangian_offdiag", "mu": [2.0, 0.0]},
        "Q": _pack_matrix(Q),
        "chi0": _identity_spec(),
        "sites": 1,
        "sampler": {"seed": 6, "count": 50, "box": 1.6, "min_separation": 0.1},
    })
    return base


_CATALOG = {
    "trivial_yangian": _builtin_trivial_yangian,
    "diagonal_dressed": _builtin_diagonal_dressed,
    "projector_b": _builtin_projector_b,
    "constant_g": _builtin_constant_g,
    "spectral_shift_g": _builtin_spectral_shift_g,
    "nonsimilar_detwist": _builtin_nonsimilar_detwist,
}


def builtin_names():
    return sorted(_CATALOG)


def builtin_scenario(name, overrides=None) -> Scenario:
    """A catalog scenario, optionally with field overrides (e.g. rank)."""
    if name not in _CATALOG:
        raise ScenarioError(
            f"unknown builtin {name!r}; available: {', '.join(builtin_names())}"
        )
    overrides = dict(overrides or {})
    rank = int(overrides.pop("rank", 2))
    data = _CATALOG[name](rank=rank)
    for key, val in overrides.items():
        if key not in _FIELDS:
            raise ScenarioError(f"unknown override field {key!r}")
        data[key] = val
    return scenario_from_dict(data)
