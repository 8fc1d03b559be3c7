"""Command-line front end.

Three subcommands: `analyze` prints a contraction report for a chain spec
and writes a machine-readable summary, `curves` tabulates exact entropy
decay against every tracked bound into CSV (with companion figures), and
`simulate` runs a model's coalescence coupling with an explicit seed.

Exit codes: 0 success, 2 malformed spec or arguments, 3 infeasible
precondition (e.g. a coupling that needs monotone rates), 4 a theorem-level
inequality failed beyond tolerance.  CSV payloads go to files only, never to
stdout.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bounds import KIND_DBAR, KIND_KAPPA_T, KIND_MLSI, KIND_MODEL, compare_bounds
from .chain import ProbabilityVector, adjoint, semigroup_at
from .chainspec import ChainBundle, load_chain
from .entropy import estimate_alpha, relative_entropy_batch
from .errors import (
    BadRatesError,
    CurvlabError,
    DisconnectedSupportError,
    MonotonicityViolatedError,
    NotConnectedError,
    NotIrreducibleError,
    SingularLaplacianError,
    SpecFormatError,
    TooLargeError,
)
from .models import BirthDeathSpec, InterchangeSpec, ZRPSpec
from .simulate import (
    simulate_bdp_pair,
    simulate_interchange_pair,
    simulate_zrp_pair,
)
from .transport import ollivier_curvature, sectional_feasible

EXIT_OK = 0
EXIT_SPEC = 2
EXIT_INFEASIBLE = 3
EXIT_VIOLATION = 4

_INFEASIBLE = (
    MonotonicityViolatedError,
    TooLargeError,
    NotIrreducibleError,
    SingularLaplacianError,
    DisconnectedSupportError,
    NotConnectedError,
    BadRatesError,
)

BOUND_TOL = 1e-9
_EI_SAMPLES = 1000
_EI_SEED = 0


def _fmt(x: float) -> str:
    """Shortest decimal that round-trips the double exactly."""
    return repr(float(x))


def _atomic_write_text(path: Path, data: str) -> None:
    tmp = path.with_name(path.name + f".tmp{os.getpid()}")
    tmp.write_text(data)
    os.replace(tmp, path)


def _parse_times(raw: str):
    try:
        times = [float(tok) for tok in raw.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise SpecFormatError(f"--times: {exc}") from exc
    if not times or any(t < 0 for t in times) or times != sorted(times):
        raise SpecFormatError("--times must be a sorted list of non-negative reals")
    return times


def _parse_mu0(raw: str, bundle: ChainBundle) -> ProbabilityVector:
    space = bundle.generator.space
    if raw == "uniform":
        return ProbabilityVector.uniform(space)
    if raw.startswith("dirac:"):
        label = raw.split(":", 1)[1]
        try:
            return ProbabilityVector.dirac(space, label)
        except KeyError as exc:
            raise SpecFormatError(f"--mu0: unknown state {label!r}") from exc
    try:
        weights = [float(tok) for tok in raw.split(",")]
        return ProbabilityVector(space, weights)
    except (ValueError, CurvlabError) as exc:
        raise SpecFormatError(f"--mu0: {exc}") from exc


def _analysis_kernel(bundle: ChainBundle, t: float):
    """The kernel the report is about: the chain itself when it is natively
    discrete, otherwise the semigroup member at the reference time."""
    if bundle.discrete:
        return bundle.kernel, None
    return semigroup_at(bundle.generator, t), t


def cmd_analyze(args) -> int:
    bundle = load_chain(args.spec)
    P, at_time = _analysis_kernel(bundle, args.time)
    pi = bundle.pi
    Pstar = adjoint(P, pi)

    curv = ollivier_curvature(P, bundle.metric, bundle.gen_set)
    cert = sectional_feasible(Pstar, bundle.metric, bundle.gen_set)
    alpha = estimate_alpha(P, starts=args.alpha_starts, tol=args.tol)
    lam2 = alpha.lambda2

    violations = []
    if cert.holds and curv.kappa >= 0:
        rng = np.random.default_rng(_EI_SEED)
        mus = rng.dirichlet(np.ones(P.size), size=_EI_SAMPLES)
        h0 = relative_entropy_batch(mus, pi.weights)
        h1 = relative_entropy_batch(mus @ P.entries, pi.weights)
        excess = h1 - (1.0 - curv.kappa) * h0
        if float(excess.max()) > BOUND_TOL:
            violations.append(
                "entropy contraction with the curvature constant failed on "
                f"{int(np.sum(excess > BOUND_TOL))}/{_EI_SAMPLES} sampled measures"
            )
    M = P @ Pstar
    kap_pp = ollivier_curvature(M, bundle.metric, bundle.gen_set).kappa
    if lam2 > 1.0 - kap_pp + BOUND_TOL:
        violations.append("lambda2 exceeds 1 - kappa(P P*)")
    if alpha.alpha_hat < curv.kappa - BOUND_TOL and cert.holds and curv.kappa >= 0:
        violations.append("alpha estimate fell below the certified curvature")

    worst = curv.worst_pair()
    report = {
        "curvlab": __version__,
        "chain": {
            "kind": bundle.kind,
            "states": bundle.size,
            "discrete_time": bundle.discrete,
            "labels_preview": list(bundle.generator.space.labels[:8]),
        },
        "analysis_time": at_time,
        "kappa": curv.kappa,
        "worst_pair": {"x": worst[0], "y": worst[1], "contraction": worst[2]},
        "generating_pairs": len(bundle.gen_set),
        "sectional": {
            "holds": cert.holds,
            "failing_pair": list(cert.failing_pair) if cert.failing_pair else None,
        },
        "alpha": {
            "alpha_hat": alpha.alpha_hat,
            "lambda2": lam2,
            "n_starts": alpha.n_starts,
            "converged": alpha.converged,
            "maximizer": (
                alpha.maximizer
                if isinstance(alpha.maximizer, str)
                else [float(w) for w in alpha.maximizer.weights]
            ),
        },
        "violations": violations,
        "chain_spec": bundle.document,
    }

    out_path = Path(args.out) if args.out else Path(args.spec).with_suffix(
        ".report.json"
    )
    _atomic_write_text(out_path, json.dumps(report, indent=2) + "\n")

    when = "one step" if at_time is None else f"t = {_fmt(at_time)}"
    print(f"chain        : {bundle.kind}, {bundle.size} states")
    print(f"analyzed at  : {when}")
    print(f"kappa        : {_fmt(curv.kappa)}  over {len(bundle.gen_set)} pairs")
    print(
        f"worst pair   : ({worst[0]}, {worst[1]}) contracts by {_fmt(worst[2])}"
    )
    print(f"sectional    : {'holds' if cert.holds else 'FAILS'}"
          + (f" at pair {cert.failing_pair}" if cert.failing_pair else ""))
    print(f"alpha_hat    : {_fmt(alpha.alpha_hat)} "
          f"(lambda2 = {_fmt(lam2)}, stationarity "
          f"{'ok' if alpha.converged else 'unresolved'})")
    print(f"report file  : {out_path}")
    if violations:
        for v in violations:
            print(f"VIOLATION    : {v}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _curves_csv(table) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(
        ["t", "H_exact", "bound_kappa_t", "bound_mlsi", "bound_dbar", "bound_model"]
    )
    model = table.curves.get(KIND_MODEL)
    for i, t in enumerate(table.times):
        row = [
            _fmt(t),
            _fmt(table.h_exact[i]),
            _fmt(table.curves[KIND_KAPPA_T].values[i]),
            _fmt(table.curves[KIND_MLSI].values[i]),
            _fmt(table.curves[KIND_DBAR].values[i]),
            _fmt(model.values[i]) if model is not None else "",
        ]
        writer.writerow(row)
    return buf.getvalue()


def cmd_curves(args) -> int:
    bundle = load_chain(args.spec)
    times = _parse_times(args.times)
    mu0 = _parse_mu0(args.mu0, bundle)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    mode = args.sectional or ("check" if bundle.kind == "explicit" else "assume")
    model_curve = bundle.model_bound(times) if bundle.model_bound else None
    table = compare_bounds(
        bundle.generator,
        bundle.metric,
        bundle.gen_set,
        mu0,
        times,
        sectional_mode=mode,
        model_curve=model_curve,
    )

    csv_path = out_dir / "curves.csv"
    _atomic_write_text(csv_path, _curves_csv(table))
    print(f"wrote {csv_path}")
    if not args.no_figures:
        from .figures import render_bound_table

        fig_path = out_dir / "curves.png"
        render_bound_table(table, fig_path, title=f"{bundle.kind}: entropy decay")
        print(f"wrote {fig_path}")

    if table.violations:
        for v in table.violations:
            print(f"VIOLATION    : {v}", file=sys.stderr)
        return EXIT_VIOLATION
    return EXIT_OK


def _parse_sites(raw: str, what: str):
    try:
        vals = [int(tok) for tok in raw.split(",")]
    except ValueError as exc:
        raise SpecFormatError(f"{what}: {exc}") from exc
    return vals


def cmd_simulate(args) -> int:
    bundle = load_chain(args.spec)
    times = _parse_times(args.times)
    if bundle.sim_kind is None:
        print(
            f"model kind {bundle.kind!r} has no coalescence coupling to simulate",
            file=sys.stderr,
        )
        return EXIT_INFEASIBLE
    doc = bundle.document

    if bundle.sim_kind == "bdp":
        spec = BirthDeathSpec(doc["n"], tuple(doc["q_plus"]), tuple(doc["q_minus"]))
        est = simulate_bdp_pair(spec, args.x0, times, args.samples, args.seed)
        detail = f"x0={args.x0}"
    elif bundle.sim_kind == "interchange":
        spec = InterchangeSpec(
            doc["n"], tuple((tuple(b["sites"]), b["rate"]) for b in doc["blocks"])
        )
        pair = _parse_sites(args.pair, "--pair")
        if len(pair) != 2:
            raise SpecFormatError("--pair must name two sites, e.g. 1,2")
        est = simulate_interchange_pair(spec, pair, times, args.samples, args.seed)
        detail = f"pair={pair[0]},{pair[1]}"
    else:  # zrp
        spec = ZRPSpec(
            doc["m"], doc["n"], tuple(map(tuple, doc["G"])),
            tuple(map(tuple, doc["rates"])),
        )
        if args.z0:
            z0 = _parse_sites(args.z0, "--z0")
        else:
            z0 = [spec.m - 1] + [0] * (spec.n - 1)
        ii = args.i if args.i is not None else 1
        jj = args.j if args.j is not None else spec.n
        est = simulate_zrp_pair(
            spec, z0, ii, jj, times, args.samples, args.seed,
            coupling=args.model_coupling,
        )
        detail = f"z0={','.join(map(str, z0))} i={ii} j={jj} coupling={args.model_coupling}"

    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    buf = io.StringIO()
    buf.write(
        f"# model={bundle.sim_kind} seed={est.seed} rng={est.rng} "
        f"samples={est.n_samples} {detail}\n"
    )
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(["t", "tail_mean", "ci95"])
    for t, (mean, ci) in zip(est.times, est.tail_estimate):
        writer.writerow([_fmt(t), _fmt(mean), _fmt(ci)])
    csv_path = out_dir / "simulate.csv"
    _atomic_write_text(csv_path, buf.getvalue())
    print(f"wrote {csv_path}")

    if not args.no_figures:
        from .figures import render_estimate

        fig_path = out_dir / "simulate.png"
        render_estimate(
            est, fig_path, title=f"{bundle.sim_kind}: coalescence tail ({detail})"
        )
        print(f"wrote {fig_path}")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="curvlab",
        description=(
            "Exact contraction analysis of finite Markov chains: curvature, "
            "coupling certificates, entropy decay, and model couplings."
        ),
    )
    parser.add_argument("--version", action="version", version=__version__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("analyze", help="contraction report for a chain spec")
    p.add_argument("spec", help="path to a chain spec (JSON)")
    p.add_argument("--alpha-starts", type=int, default=16, metavar="K",
                   help="ascent starts for the contraction-constant estimate")
    p.add_argument("--tol", type=float, default=1e-6,
                   help="stationarity tolerance for the alpha estimate")
    p.add_argument("--time", type=float, default=1.0,
                   help="semigroup time to analyze for continuous chains")
    p.add_argument("--out", help="summary JSON path (default: <spec>.report.json)")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("curves", help="exact entropy decay vs bound curves (CSV)")
    p.add_argument("spec")
    p.add_argument("--times", required=True, help="comma-separated times")
    p.add_argument("--mu0", required=True,
                   help='initial law: "uniform", "dirac:LABEL", or comma floats')
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--sectional", choices=["check", "assume", "skip"],
                   help="per-time certification mode (default: check for "
                        "explicit chains, assume for model families)")
    p.add_argument("--no-figures", action="store_true",
                   help="skip the companion PNG")
    p.set_defaults(func=cmd_curves)

    p = sub.add_parser("simulate", help="Monte-Carlo coalescence tail (CSV)")
    p.add_argument("spec")
    p.add_argument("--samples", type=int, required=True)
    p.add_argument("--seed", type=int, required=True,
                   help="explicit RNG seed (no silent entropy source)")
    p.add_argument("--times", required=True, help="comma-separated times")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--model-coupling", default="independent",
                   choices=["independent", "synchronized-refresh"],
                   help="tagged-walk coupling for the zero-range model")
    p.add_argument("--x0", type=int, default=1, help="lower start (birth-death)")
    p.add_argument("--pair", default="1,2", help="discrepancy sites (interchange)")
    p.add_argument("--z0", help="background occupancies (zero-range)")
    p.add_argument("--i", type=int, help="first tagged site (zero-range)")
    p.add_argument("--j", type=int, help="second tagged site (zero-range)")
    p.add_argument("--no-figures", action="store_true")
    p.set_defaults(func=cmd_simulate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except SpecFormatError as exc:
        print(f"spec error: {exc}", file=sys.stderr)
        return EXIT_SPEC
    except _INFEASIBLE as exc:
        print(f"infeasible: {exc}", file=sys.stderr)
        return EXIT_INFEASIBLE


if __name__ == "__main__":
    sys.exit(main())
