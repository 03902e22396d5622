"""Command-line front end: suite selection, execution, reporting.

Exit codes: 0 all checks passed, 1 at least one check failed,
2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import sys
import time

import numpy as np

from .consistency import (
    StructureSet,
    residual_boundary_dra,
    residual_dybe,
    residual_gybce,
    residual_projector_compat,
    residual_sdre,
    residual_theta_period,
    residual_ybce,
    residual_zero_weight,
    residual_zwc,
)
from .monodromy import (
    build_monodromy_direct,
    build_monodromy_factored,
    certify_commuting_family,
)
from .parametrize import (
    auto_dress,
    build_A,
    build_BC,
    build_BC_projector,
    build_D_twist,
    detwist,
)
from .scenarios import Scenario, ScenarioError, builtin_names, builtin_scenario, load_scenario
from .shiftops import shiftop_difference_residual
from .solutions import (
    Decoration,
    DecorationFactor,
    IntertwinerSpec,
    build_dual,
    build_K_nondyn,
    constant_like,
    residual_intertwiner,
)

SUITES = (
    "zero-weight", "ybce", "gybce", "dybe", "sdre", "intertwiner",
    "detwist", "theta-period", "monodromy-factor", "transfer-commute", "zwc",
)


class Rig:
    """A scenario compiled into its derived verification objects."""

    def __init__(self, scenario: Scenario, samples=None, seed=None, tol=None,
                 sites=None):
        self.scenario = scenario
        self.scheme = scenario.scheme
        self.tol = scenario.tolerance if tol is None else tol
        self.sites = scenario.sites if sites is None else sites
        self.b = scenario.b_mat()
        self.q = scenario.q_mat()
        self.k = scenario.k_mat()
        self.R0 = scenario.R0_mat()
        self.Rbar = scenario.Rbar_mat()
        self.g = scenario.g_auto()
        self.beta = auto_dress(self.b, self.g)
        self.projs = scenario.projector_list()
        if self.projs is not None:
            self.B, self.C = build_BC_projector(self.b, self.projs, self.scheme)
        else:
            self.B, self.C = build_BC(self.b, self.g, self.scheme)
        self.A = build_A(self.R0, self.b, self.g, self.scheme)
        self.D = build_D_twist(self.Rbar or self.R0, self.q, self.scheme)
        self.S = StructureSet(self.A, self.B, self.C, self.D, self.scheme, self.g)
        self.Q = scenario.Q
        self.QL = scenario.Q_L
        # direct reflection solution K = beta^-1 Q q and its twisted core
        self.K = self.beta.inv() @ constant_like(self.b, self.Q) @ self.q
        self.kappa = self.beta @ self.K @ self.q.inv()
        self.chi = build_dual(self.k, self.b, self.g, self.QL)
        self.points = scenario.sample(count=samples, seed=seed)

    @property
    def gauged(self):
        return dict(R0=self.R0, b=self.b, q=self.q, k=self.k, Q=self.Q, QL=self.QL)

    def monodromy_applicable(self):
        return self.Rbar is None and self.projs is None

    def run_suite(self, suite):
        """Returns (reports, notices); empty reports with a notice means
        the suite does not apply to this scenario's ingredients."""
        pts = self.points
        tol = self.tol
        g_id = self.g.is_identity
        if suite == "zero-weight":
            return [
                residual_zero_weight(self.B, "B", pts, 1e-13),
                residual_zero_weight(self.C, "C", pts, 1e-13),
                residual_zero_weight(self.D, "D", pts, 1e-13),
            ], []
        if suite == "ybce":
            if not g_id:
                return [], ["ybce applies to identity-automorphism scenarios; see gybce"]
            return list(residual_ybce(self.S, pts, tol).values()), []
        if suite == "gybce":
            if g_id:
                return [], ["gybce duplicates ybce when the automorphism is trivial"]
            return list(residual_gybce(self.S, pts, tol).values()), []
        if suite == "zwc":
            if g_id:
                return [], ["zwc is trivial for the identity automorphism"]
            return [residual_zwc(self.S, pts, tol)], []
        if suite == "dybe":
            return [residual_dybe(self.D, pts, tol)], []
        if suite == "sdre":
            reps = [residual_sdre(self.S, self.K, pts, tol)]
            notes = []
            if self.Rbar is None:
                scalar = self.beta.inv() @ self.q
                reps.append(residual_sdre(self.S, scalar, pts, tol, name="sdre_scalar"))
            else:
                notes.append("no invertible scalar solution exists when the "
                             "twist core differs from R0; skipping sdre_scalar")
            return reps, notes
        if suite == "intertwiner":
            rr = self.Rbar or self.R0
            spec = IntertwinerSpec(self.R0, rr)
            reps = [
                residual_intertwiner(spec, self.Q, pts, tol, name="intertwiner_Q"),
                residual_intertwiner(IntertwinerSpec(self.R0, self.R0), self.QL,
                                     pts, tol, name="intertwiner_QL"),
            ]
            if self.projs is not None:
                reps.append(residual_projector_compat(self.R0, self.projs, self.b,
                                                      pts, tol))
            return reps, []
        if suite == "detwist":
            candidates = []
            if self.scenario.f is not None:
                candidates.append(("f", self.scenario.f_auto()))
            result = detwist(self.D, self.q, self.scheme, pts, tol,
                             candidates=candidates)
            reps = [result.nondyn_report] + list(result.quasi_reports.values())
            return reps, [f"verdicts: {', '.join(result.verdicts)}"]
        if suite == "theta-period":
            return [residual_theta_period(self.kappa, pts, 1e-10)], []
        if suite == "monodromy-factor":
            if not g_id or not self.monodromy_applicable():
                return [], ["factorization comparison needs the invertible "
                            "identity-automorphism chain"]
            reps = []
            for N in sorted({1, min(2, max(1, self.sites))}):
                uq = self.scenario.quantum_values(N)
                u0 = 0.52 + 0.21j
                Td = build_monodromy_direct(self.S, self.K, self.chi, N, uq, u0)
                Tf = build_monodromy_factored(
                    self.scheme, self.R0, self.b, self.q, self.k, self.Q,
                    self.chi, N, uq, u0,
                )
                reps.append(shiftop_difference_residual(
                    Td, Tf, pts[: min(8, len(pts))], 1e-8,
                    name=f"monodromy_factorization_N{N}",
                ))
            return reps, []
        if suite == "transfer-commute":
            if not self.monodromy_applicable():
                return [], ["the traced family needs the invertible single-R0 chain"]
            u_list = [0.52 + 0.21j, -0.63 + 0.77j, 2.31 - 0.52j]
            reps = []
            for N in sorted({1, min(2, max(1, self.sites))}):
                uq = self.scenario.quantum_values(N)
                cert = certify_commuting_family(
                    self.S, self.K, self.chi, self.kappa, N, u_list, uq,
                    pts[: min(12, len(pts))], twist=self.q, tol=1e-8,
                    ingredient_tol=self.tol,
                    gauged=None if g_id else self.gauged,
                )
                if cert.failed_preconditions:
                    for name in cert.failed_preconditions:
                        reps.append(cert.ingredient_reports[name])
                if cert.commutation is not None:
                    rep = cert.commutation
                    rep.check_name = f"transfer_commutation_N{N}"
                    reps.append(rep)
            return reps, []
        raise ScenarioError(f"unknown suite {suite!r}")


def applicable_suites(rig: Rig):
    """(applicable, skipped) suite names for this scenario's ingredients."""
    out, skipped = [], []
    for suite in SUITES:
        if suite == "ybce" and not rig.g.is_identity:
            skipped.append((suite, "superseded by gybce for a non-trivial automorphism"))
            continue
        if suite in ("gybce", "zwc") and rig.g.is_identity:
            skipped.append((suite, "trivial for the identity automorphism"))
            continue
        if suite == "monodromy-factor" and (
            not rig.g.is_identity or not rig.monodromy_applicable()
        ):
            skipped.append((suite, "needs the invertible identity-automorphism chain"))
            continue
        if suite == "transfer-commute" and not rig.monodromy_applicable():
            skipped.append((suite, "needs the invertible single-R0 chain"))
            continue
        out.append(suite)
    return out, skipped


def write_report(document, path):
    """Serialize the report document; byte-stable for identical inputs."""
    with open(path, "w") as fh:
        json.dump(document, fh, indent=1, sort_keys=True)
        fh.write("\n")


def build_parser():
    p = argparse.ArgumentParser(
        prog="sdreflect-verify",
        description="Residual verification suites for reflection-algebra structures",
    )
    src = p.add_mutually_exclusive_group()
    src.add_argument("--scenario", metavar="PATH", help="scenario file (JSON)")
    src.add_argument("--builtin", metavar="NAME", help="catalog scenario name")
    p.add_argument("--suite", action="append", default=None,
                   help="suite name (repeatable; default: all)")
    p.add_argument("--samples", type=int, default=None)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--tol", type=float, default=None)
    p.add_argument("--sites", type=int, default=None)
    p.add_argument("--report", metavar="PATH", help="write the JSON report here")
    p.add_argument("--format", choices=("text", "structured"), default="text")
    p.add_argument("--list-builtins", action="store_true")
    p.add_argument("--list-suites", action="store_true")
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 0 if exc.code in (0, None) else 2
    if args.list_builtins:
        for name in builtin_names():
            print(name)
        return 0
    if args.list_suites:
        for name in SUITES + ("all",):
            print(name)
        return 0
    if not args.scenario and not args.builtin:
        print("error: a scenario is required (--scenario or --builtin)", file=sys.stderr)
        return 2

    t0 = time.monotonic()
    try:
        if args.builtin:
            scenario = builtin_scenario(args.builtin)
        else:
            scenario = load_scenario(args.scenario)
        rig = Rig(scenario, samples=args.samples, seed=args.seed, tol=args.tol,
                  sites=args.sites)
        wanted = args.suite or ["all"]
        suites = []
        notices = []
        for s in wanted:
            if s == "all":
                applicable, skipped = applicable_suites(rig)
                suites.extend(applicable)
                notices.extend(f"[{name}] skipped: {why}" for name, why in skipped)
            elif s in SUITES:
                suites.append(s)
            else:
                print(f"error: unknown suite {s!r} (see --list-suites)", file=sys.stderr)
                return 2
        reports = []
        for suite in suites:
            reps, notes = rig.run_suite(suite)
            reports.extend(reps)
            notices.extend(f"[{suite}] {n}" for n in notes)
    except (ScenarioError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    elapsed_ms = int(1000 * (time.monotonic() - t0))
    ok = all(r.passed for r in reports)
    document = {
        "scenario": scenario.name,
        "suite": "+".join(suites),
        "pass": bool(ok),
        # deterministic by design so reports stay byte-stable; wall time
        # goes to the text summary instead
        "runtime_ms": None,
        "checks": [r.to_dict() for r in reports],
        "notices": notices,
    }
    if args.format == "structured":
        print(json.dumps(document, indent=1, sort_keys=True))
    else:
        print(f"scenario: {scenario.name}")
        for n in notices:
            print(f"note: {n}")
        for r in reports:
            print(str(r))
        print(f"{'PASS' if ok else 'FAIL'} ({len(reports)} checks, {elapsed_ms} ms)")
    if args.report:
        try:
            write_report(document, args.report)
        except OSError as exc:
            print(f"error: cannot write report: {exc}", file=sys.stderr)
            return 2
    return 0 if ok else 1


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
