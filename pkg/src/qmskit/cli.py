"""Command-line front end.

Subcommands: analyze, evolve, simulate, transform, compose.  Exit codes
form a stable contract: 0 ok, 1 statistical comparison failed, 2 invalid
input, 3 parse error, 4 obstructed.  The default tolerance is 1e-9,
overridable by --tol or the QMS_TOL environment variable.
"""

from __future__ import annotations

import argparse
import csv
import json
import os
import sys

import numpy as np

from . import dephasing, dilation, model, semigroup, trajectories
from .errors import (
    DimensionMismatch,
    InvalidState,
    NotMaximallyDephasing,
    Obstructed,
    QmsError,
)
from .io import (
    ModelFormatError,
    load_model,
    load_state,
    matrix_from_json,
    matrix_to_json,
    save_model,
    triple_to_dict,
)
from .linalg import Tolerance

EXIT_OK = 0
EXIT_COMPARISON_FAILED = 1
EXIT_INVALID_INPUT = 2
EXIT_PARSE_ERROR = 3
EXIT_OBSTRUCTED = 4

CONVENTION_NOTES = [
    "decay-rate convention: Gamma[n][m] = -Re z[n][m]; a qubit coupling "
    "sqrt(g)*sigma_z damps coherences at rate 2*g, twice the bare coefficient.",
    "frequency convention: Omega[n][m] = -Im z[n][m]; the opposite-sign "
    "variant eps_m - eps_n + A[n][m] is included as 'freq_alt'.",
    "series composition adds both component Hamiltonians: "
    "H = H_first + H_second + Im{L2^dag S2 L1}, with the second factor primed.",
    "the scattering matrix never enters the generator; analysis output is "
    "independent of it.",
    "obstruction values are evaluated directly from the coupling columns; "
    "reported argmax indices are 1-based.",
]


def _tolerance(ns) -> Tolerance:
    if ns.tol is not None:
        return Tolerance(abs_tol=ns.tol)
    env = os.environ.get("QMS_TOL")
    if env:
        return Tolerance(abs_tol=float(env))
    return Tolerance()


def _emit_json(doc: dict, out_path) -> None:
    if out_path:
        save_model(doc, out_path)
    else:
        json.dump(doc, sys.stdout, indent=2)
        sys.stdout.write("\n")


def _load_validated(path, tol):
    mf = load_model(path)
    triple = mf.to_triple()
    report = model.validate(triple, tol)
    return mf, triple, report


# ---------------------------------------------------------------------------
# analyze


def _analysis_report(spec, tol) -> dict:
    n = spec.dim
    report: dict = {"dim": n, "n_channels": spec.multiplicity}
    report["bistochastic"] = semigroup.is_bistochastic(spec, tol)
    report["minimal"] = model.is_minimal(spec, tol)
    triple = model.SlhTriple.from_parts(spec.couplings, spec.hamiltonian)
    _, rank = model.reduce_to_minimal(triple, tol)
    report["rank"] = rank

    stat = semigroup.stationary_states(spec, tol)
    report["stationary"] = {
        "kernel_dimension": len(stat.basis),
        "pure_states": [
            [[float(z.real), float(z.imag)] for z in v] for v in stat.pure_states
        ],
    }

    maximal, deph = dephasing.is_maximally_dephasing(spec, tol)
    report["maximally_dephasing"] = maximal
    if deph is not None:
        f = deph.coupling
        eps = f.diag_h
        freq_alt = eps[None, :] - eps[:, None] + deph.areas
        report["stable_basis"] = matrix_to_json(deph.stable_basis)
        report["F"] = matrix_to_json(f.f)
        report["diag_H"] = [float(x) for x in eps]
        report["z"] = matrix_to_json(deph.z)
        report["Gamma"] = [[float(x) for x in row] for row in deph.gamma]
        report["Omega"] = [[float(x) for x in row] for row in deph.omega]
        report["freq_alt"] = [[float(x) for x in row] for row in freq_alt]
        report["A"] = [[float(x) for x in row] for row in deph.areas]
        idx = np.unravel_index(np.argmax(np.abs(deph.delta)), deph.delta.shape)
        report["Delta_max"] = float(abs(deph.delta[idx]))
        report["Delta_argmax"] = [int(i) + 1 for i in idx]
    else:
        report["stable_basis"] = None
        report["F"] = None
        report["z"] = None
        report["Gamma"] = None
        report["Omega"] = None
        report["freq_alt"] = None
        report["A"] = None
        report["Delta_max"] = None
        report["Delta_argmax"] = None

    try:
        dephasing.self_adjoint_representation(spec, tol)
        report["self_adjointizable"] = True
    except (Obstructed, NotMaximallyDephasing):
        report["self_adjointizable"] = False
    try:
        ok, _ = dilation.admits_diffusive_dilation(spec, tol)
        report["diffusive_dilation"] = bool(ok) and report["self_adjointizable"]
    except (Obstructed, NotMaximallyDephasing):
        report["diffusive_dilation"] = False

    report["notes"] = list(CONVENTION_NOTES)
    return report


def cmd_analyze(ns) -> int:
    tol = _tolerance(ns)
    mf, triple, vr = _load_validated(ns.model, tol)
    if not vr.passed:
        for failure in vr.failures:
            print(f"validation: {failure}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    report = _analysis_report(triple.generator_spec(), tol)
    _emit_json(report, ns.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# evolve


def cmd_evolve(ns) -> int:
    tol = _tolerance(ns)
    mf, triple, vr = _load_validated(ns.model, tol)
    if not vr.passed:
        for failure in vr.failures:
            print(f"validation: {failure}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    n = triple.dim
    if ns.state == "maximally-mixed":
        rho0 = np.eye(n, dtype=complex) / n
    else:
        rho0 = load_state(ns.state)
    rho0 = model.require_density(rho0, tol)
    if rho0.shape[0] != n:
        raise DimensionMismatch("state dimension does not match the model")

    if ns.tmax < 0:
        raise InvalidState("tmax must be nonnegative")
    if ns.tmax == 0:
        times = np.array([0.0])
    else:
        times = np.linspace(0.0, ns.tmax, ns.steps + 1)
    spec = triple.generator_spec()
    states = semigroup.evolve(spec, rho0, times, semigroup.SCHRODINGER)

    header = ["t"]
    for i in range(n):
        for j in range(n):
            header += [f"rho_{i}{j}_re", f"rho_{i}{j}_im"]
    header += ["trace", "purity"]
    rows = []
    for t, rho in zip(times, states):
        row = [repr(float(t))]
        for i in range(n):
            for j in range(n):
                row += [repr(float(rho[i, j].real)), repr(float(rho[i, j].imag))]
        row.append(repr(float(np.trace(rho).real)))
        row.append(repr(float(np.trace(rho @ rho).real)))
        rows.append(row)
    _write_csv(ns.out, header, rows)
    return EXIT_OK


def _write_csv(path, header, rows) -> None:
    if path:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(header)
            w.writerows(rows)
    else:
        w = csv.writer(sys.stdout)
        w.writerow(header)
        w.writerows(rows)


# ---------------------------------------------------------------------------
# simulate


def cmd_simulate(ns) -> int:
    tol = _tolerance(ns)
    mf, triple, vr = _load_validated(ns.model, tol)
    if mf.classical is None:
        print("model file has no 'classical' section", file=sys.stderr)
        return EXIT_INVALID_INPUT
    cmodel = mf.classical
    if ns.tmax <= 0 or ns.steps < 1:
        print("tmax must be positive and steps >= 1", file=sys.stderr)
        return EXIT_INVALID_INPUT
    times = tuple(ns.tmax * (i + 1) / ns.steps for i in range(ns.steps))
    config = trajectories.SimulationConfig(
        times=times, n_traj=ns.traj, master_seed=ns.seed, dt=ns.dt
    )
    reference = None
    if ns.expect_rate is not None:
        reference = dilation.ClassicalModel(
            jumps=tuple(
                dilation.JumpChannel(j.s, ns.expect_rate, j.xi_phase)
                for j in cmodel.jumps
            ),
            diffusions=cmodel.diffusions,
            hamiltonian=cmodel.hamiltonian,
        )
    report = trajectories.compare_to_semigroup(
        cmodel, config, reference=reference, n_workers=ns.workers, tol=tol
    )
    header = ["t", "max_abs_dev", "stderr", "dev_over_stderr"]
    rows = [
        [repr(t), repr(d), repr(s), repr(u)]
        for t, d, s, u in zip(
            report.times,
            report.max_abs_deviation,
            report.stderr,
            report.deviation_over_stderr,
        )
    ]
    _write_csv(ns.out, header, rows)
    return EXIT_OK if report.passed else EXIT_COMPARISON_FAILED


# ---------------------------------------------------------------------------
# transform


def _parse_euclidean(spec_str, d: int) -> model.EuclideanTransform:
    text = spec_str
    if spec_str.startswith("@"):
        with open(spec_str[1:]) as fh:
            text = fh.read()
    doc = json.loads(text)
    if not isinstance(doc, dict) or "t" not in doc or "beta" not in doc:
        raise ModelFormatError("euclidean spec needs 't', 'beta' and optional 'e'")
    t = matrix_from_json(doc["t"], "t", (d, d))
    beta_raw = doc["beta"]
    if not isinstance(beta_raw, list) or len(beta_raw) != d:
        raise ModelFormatError(f"beta must be a list of length {d}")
    beta = np.array(
        [complex(b[0], b[1]) if isinstance(b, list) else complex(b) for b in beta_raw]
    )
    e = float(doc.get("e", 0.0))
    return model.EuclideanTransform(t, beta, e)


def cmd_transform(ns) -> int:
    tol = _tolerance(ns)
    mf, triple, vr = _load_validated(ns.model, tol)
    if not vr.passed:
        for failure in vr.failures:
            print(f"validation: {failure}", file=sys.stderr)
        return EXIT_INVALID_INPUT

    if ns.self_adjoint:
        try:
            spec = dephasing.self_adjoint_representation(triple.generator_spec(), tol)
        except Obstructed as err:
            print(
                f"obstructed: |Delta| = {err.max_delta:.6g} at "
                f"{tuple(i + 1 for i in err.argmax)} (1-based)",
                file=sys.stderr,
            )
            return EXIT_OBSTRUCTED
        out_triple = model.SlhTriple.from_parts(spec.couplings, spec.hamiltonian)
    elif ns.center is not None:
        n = triple.dim
        if ns.center == "maximally-mixed":
            rho = np.eye(n, dtype=complex) / n
        else:
            rho = load_state(ns.center)
        out_triple, _ = model.center(triple, rho, tol)
    elif ns.euclidean is not None:
        transform = _parse_euclidean(ns.euclidean, triple.multiplicity)
        out_triple = model.euclidean_transform(triple, transform)
    else:
        print("choose one of --self-adjoint, --center, --euclidean", file=sys.stderr)
        return EXIT_INVALID_INPUT

    _emit_json(triple_to_dict(out_triple), ns.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# compose


def cmd_compose(ns) -> int:
    tol = _tolerance(ns)
    paths = ns.series if ns.series else ns.concat
    mf_a, triple_a, vr_a = _load_validated(paths[0], tol)
    mf_b, triple_b, vr_b = _load_validated(paths[1], tol)
    for vr, label in ((vr_a, paths[0]), (vr_b, paths[1])):
        if not vr.passed:
            for failure in vr.failures:
                print(f"validation ({label}): {failure}", file=sys.stderr)
            return EXIT_INVALID_INPUT
    if ns.series:
        out_triple = model.series_product(triple_a, triple_b)
    else:
        out_triple = model.concatenation(triple_a, triple_b)
    _emit_json(triple_to_dict(out_triple), ns.out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser / entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qmskit",
        description="Analyze, transform, and simulate Markov generators of open quantum systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--tol", type=float, default=None, help="absolute tolerance")
        p.add_argument("--out", default=None, help="output path (default: stdout)")

    p = sub.add_parser("analyze", help="full structural analysis report (JSON)")
    p.add_argument("--model", required=True)
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("evolve", help="master-equation evolution (CSV)")
    p.add_argument("--model", required=True)
    p.add_argument("--state", default="maximally-mixed",
                   help="state JSON path or 'maximally-mixed'")
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--steps", type=int, default=100)
    common(p)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("simulate", help="Monte Carlo dilation vs exact semigroup (CSV)")
    p.add_argument("--model", required=True)
    p.add_argument("--traj", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tmax", type=float, required=True)
    p.add_argument("--steps", type=int, default=4)
    p.add_argument("--dt", type=float, default=0.01)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--expect-rate", dest="expect_rate", type=float, default=None,
                   help="compare against this jump rate instead (negative control)")
    common(p)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("transform", help="rewrite a model in a different gauge")
    p.add_argument("--model", required=True)
    p.add_argument("--self-adjoint", dest="self_adjoint", action="store_true")
    p.add_argument("--center", nargs="?", const="maximally-mixed", default=None,
                   help="center w.r.t. a state JSON (default maximally mixed)")
    p.add_argument("--euclidean", default=None,
                   help="inline JSON or @file with fields t, beta, e")
    common(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("compose", help="series or concatenation product of two models")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--series", nargs=2, metavar=("FIRST", "SECOND"))
    group.add_argument("--concat", nargs=2, metavar=("A", "B"))
    common(p)
    p.set_defaults(func=cmd_compose)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    ns = parser.parse_args(argv)
    try:
        return ns.func(ns)
    except (json.JSONDecodeError, ModelFormatError) as err:
        print(f"parse error: {err}", file=sys.stderr)
        return EXIT_PARSE_ERROR
    except Obstructed as err:
        print(f"obstructed: {err}", file=sys.stderr)
        return EXIT_OBSTRUCTED
    except FileNotFoundError as err:
        print(f"invalid input: {err}", file=sys.stderr)
        return EXIT_INVALID_INPUT
    except (QmsError, ValueError) as err:
        print(f"invalid input: {err}", file=sys.stderr)
        return EXIT_INVALID_INPUT


if __name__ == "__main__":
    sys.exit(main())
