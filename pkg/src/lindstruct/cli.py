"""Command-line front end.

Exit status: 0 on success, 1 when a certification fails, 2 for usage or
input errors (unreadable JSON, inconsistent dimensions, bad flags).
"""
from __future__ import annotations

import argparse
import json
import sys
import warnings
from pathlib import Path

import numpy as np

from . import serialize
from .errors import CertificationError, DegenerateBeyondOrderError, DimensionError, LindstructError
from .generator import generator_from_json
from .linop import DEFAULT_TOL, Tolerance, matrix_from_json

EXIT_OK, EXIT_CERT, EXIT_USAGE = 0, 1, 2


class UsageError(Exception):
    pass


def _positive(text):
    try:
        x = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}") from None
    if not x > 0:
        raise argparse.ArgumentTypeError("tolerances must be positive")
    return x


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--tol-rank", type=_positive, default=DEFAULT_TOL.rank_tol)
    common.add_argument("--tol-match", type=_positive, default=DEFAULT_TOL.match_tol)
    common.add_argument("--tol-eig", type=_positive, default=DEFAULT_TOL.eig_group_tol)
    common.add_argument("--seed", type=int, default=None)
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--out", default=None, help="write the report here instead of stdout")

    p = argparse.ArgumentParser(prog="lindstruct", description="Structure analysis of Lindblad generators.")
    sub = p.add_subparsers(dest="verb", required=True)
    for verb, help_ in [("validate", "check Hermiticity, trace preservation and complete positivity"),
                        ("spectrum", "eigenvalues, Jordan defects and path classes"),
                        ("structure", "levels, basins, intertwiners and stationary states")]:
        s = sub.add_parser(verb, parents=[common], help=help_)
        s.add_argument("generator")
    for verb, help_ in [("evolve", "trajectory of a state"), ("asymptotics", "long-time form of a state")]:
        s = sub.add_parser(verb, parents=[common], help=help_)
        s.add_argument("generator")
        s.add_argument("--state", default=None, help="JSON matrix; default is the first basis projector")
        s.add_argument("--t-max", type=_positive, default=10.0)
        s.add_argument("--steps", type=int, default=100)
    s = sub.add_parser("perturb", parents=[common], help="stationary-state perturbation series")
    s.add_argument("perturbation")
    s.add_argument("--order", type=int, default=10)
    s.add_argument("--lambda", dest="lambdas", type=float, action="append", default=None)
    s.add_argument("--probe", action="store_true", help="also run the structure-continuity probe")
    s = sub.add_parser("corpus", parents=[common], help="built-in worked examples")
    s.add_argument("action", choices=("run", "list"))
    s.add_argument("names", nargs="*")
    return p


def _tol(args) -> Tolerance:
    return Tolerance(rank_tol=args.tol_rank, match_tol=args.tol_match, eig_group_tol=args.tol_eig)


def _read_json(path):
    try:
        with open(Path(path)) as fh:
            return json.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: malformed JSON ({exc.msg} at line {exc.lineno})") from None


def _load_generator(path):
    try:
        return generator_from_json(_read_json(path))
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"{path}: {exc}") from None


def _load_state(args, d):
    if args.state is None:
        rho = np.zeros((d, d), dtype=complex)
        rho[0, 0] = 1.0
        return rho
    try:
        rho = matrix_from_json(_read_json(args.state))
    except ValueError as exc:
        raise UsageError(f"{args.state}: {exc}") from None
    if rho.shape != (d, d):
        raise UsageError(f"state has shape {rho.shape}, generator has dim {d}")
    return rho


def _fmt(z: complex) -> str:
    z = complex(z)
    re = 0.0 if abs(z.real) < 5e-13 else z.real
    im = 0.0 if abs(z.imag) < 5e-13 else z.imag
    if im == 0:
        return f"{re:.10g}"
    return f"{re:.10g}{im:+.10g}i"


# --- text renderers ----------------------------------------------------------------

def _text_validation(r: dict) -> str:
    lines = [f"generator of dim {r['dim']} with {r['n_ops']} transfer operators: {'valid' if r['ok'] else 'INVALID'}",
             f"  Hamiltonian hermiticity defect {r['hermiticity_defect']:.3g}",
             f"  trace-preservation defect      {r['trace_defect']:.3g}",
             f"  min Choi eigenvalue at dt={r['choi_dt']:g}  {r['choi_min_eigenvalue']:.3g}"]
    lines += [f"  warning: {w}" for w in r["warnings"]]
    return "\n".join(lines)


def _text_spectrum(sd) -> str:
    from .spectral import classify_paths

    lines = ["eigenvalues:"]
    lines += [f"  {_fmt(z):>24}  {p.value}" for z, p in zip(sd.eigenvalues, classify_paths(sd))]
    lines.append(f"kernel dimension {sd.kernel_dim()}, gap {sd.gap():.6g}")
    return "\n".join(lines)


def _text_structure(rep) -> str:
    lines = [f"Hilbert space of dim {rep.dim}; commutant dim {rep.commutant_dim}"]
    decaying = [b for lev in rep.levels[1:] for b in lev]
    lines.append(f"Decay: {len(rep.levels)} level(s); decaying subspace of dim {sum(b.rank for b in decaying)}")
    for k, lev in enumerate(rep.levels):
        lines.append(f"  level {k}: basin ranks {[b.rank for b in lev]}")
    lines.append(f"Dissipation: {len(rep.levels[0])} minimal collecting basin(s), one stationary state each")
    for k, (b, rho) in enumerate(zip(rep.levels[0], rep.stationary.basis_states)):
        w = np.linalg.eigvalsh(0.5 * (rho + rho.conj().T))
        lines.append(f"  basin {k}: rank {b.rank}, state rank {int(np.sum(w > 1e-9))}")
    lines.append(f"Dephasing: {len(rep.dephasing_classes)} class(es)")
    for c in rep.dephasing_classes:
        en = ", ".join(f"{float(e):.6g}" for e in c.energies)
        kind = "single basin" if c.multiplicity == 1 else (
            "stationary phase relations" if np.allclose(c.energies, 0, atol=1e-8) else "oscillating phase relations")
        lines.append(f"  basins {list(c.members)}: energies [{en}], {kind}")
    lines.append(f"stationary states {len(rep.stationary.basis_states)}, "
                 f"phase relations {len(rep.stationary.phase_relations)}, "
                 f"invariant observables {len(rep.stationary.invariant_observables)}")
    lines += [f"warning: {w}" for w in rep.warnings]
    return "\n".join(lines)


def _text_series(series) -> str:
    lines = [f"order {series.order}, look-ahead {series.lookahead}, "
             f"estimated radius {series.radius_estimate():.6g}"]
    for n, s in enumerate(series.sigmas):
        lines.append(f"  |sigma_{n}| = {np.linalg.norm(s, 2):.6g}")
    for lam, res in sorted(series.residual_at.items()):
        lines.append(f"  residual at lambda={lam:g}: {res:.3g}")
    lines += [f"warning: {w}" for w in series.warnings]
    return "\n".join(lines)


def _text_corpus(report) -> str:
    lines = []
    for r in report.results:
        lines.append(f"{'PASS' if r.passed else 'FAIL'} {r.name}")
        if r.error:
            lines.append(f"    error: {r.error}")
        for c in r.checks:
            if not c.passed:
                lines.append(f"    {c.key}: defect {c.defect:.3g} (tol {c.tol}) {c.detail}")
    lines.append(f"{sum(r.passed for r in report.results)}/{len(report.results)} fixtures passed")
    return "\n".join(lines)


# --- verbs -------------------------------------------------------------------------

def _run(args):
    """Returns (report dict or None, text, csv text or None, exit code)."""
    from .corpus import list_fixtures, run_all
    from .dynamics import asymptotic_state, trajectory, trajectory_csv
    from .generator import validate
    from .perturbation import expand, perturbation_from_json, structure_continuity_probe
    from .spectral import decompose
    from .structure import DEFAULT_SEED, analyze

    tol = _tol(args)
    seed = DEFAULT_SEED if args.seed is None else args.seed
    if args.format == "csv" and args.verb != "evolve":
        raise UsageError("--format csv is only available for evolve")

    if args.verb == "validate":
        v = validate(_load_generator(args.generator), tol)
        rep = serialize.validation_report(v)
        return rep, _text_validation(rep), None, EXIT_OK if v.ok else EXIT_CERT
    if args.verb == "spectrum":
        sd = decompose(_load_generator(args.generator), tol)
        return serialize.spectrum_report(sd), _text_spectrum(sd), None, EXIT_OK
    if args.verb == "structure":
        rep = analyze(_load_generator(args.generator), tol, seed=seed)
        return serialize.structure_report(rep), _text_structure(rep), None, EXIT_OK
    if args.verb in ("evolve", "asymptotics"):
        g = _load_generator(args.generator)
        rho = _load_state(args, g.dim)
        if args.verb == "evolve":
            if args.steps < 1:
                raise UsageError("--steps must be positive")
            traj = trajectory(g, rho, args.t_max, args.steps)
            rep = serialize.trajectory_report(traj)
            text = "\n".join(f"t={t:.6g} min_eig={m['min_eigenvalue']:.6g} rank={m['rank']}"
                             for t, m in zip(traj.times, traj.monitors))
            return rep, text, trajectory_csv(traj), EXIT_OK
        form = asymptotic_state(g, rho, analyze(g, tol, seed=seed), tol)
        rep = serialize.asymptotics_report(form)
        text = "\n".join([f"class {c.members}: weight {c.weight:.6g}" for c in form.classes]
                         + [f"residual at t={form.check_time:.6g}: {form.check_residual:.3g}"])
        return rep, text, None, EXIT_OK
    if args.verb == "perturb":
        if args.order < 0:
            raise UsageError("--order must be non-negative")
        try:
            pg = perturbation_from_json(_read_json(args.perturbation), tol)
        except (ValueError, KeyError, TypeError) as exc:
            raise UsageError(f"{args.perturbation}: {exc}") from None
        lambdas = args.lambdas or [0.1]
        series = expand(pg, args.order, tol)
        for lam in lambdas:
            series.residual_at[lam] = series.residual(lam)
            if series.diverges_at(lam):
                series.warnings.append(f"ratio test: lambda = {lam:g} lies outside the estimated radius")
        rep = serialize.series_report(series)
        text = _text_series(series)
        if args.probe:
            probe = structure_continuity_probe(pg, lambdas, tol, seed)
            rep["continuity"] = {
                "snapshots": [{"lambda": s.lam, "kernel_dim": s.kernel_dim, "peripheral_dim": s.peripheral_dim,
                               "oscillating": s.oscillating, "commutant_dim": s.commutant_dim,
                               "level_ranks": s.level_ranks} for s in probe.snapshots],
                "violations": [list(v) for v in probe.violations],
                "merges": [{"lambda": lam, "merges": [[lv, bi, [list(h) for h in hits]] for lv, bi, hits in m]}
                           for lam, m in probe.merges.items()],
            }
            text += "\n" + "\n".join(f"lambda={s.lam:g}: kernel {s.kernel_dim}, levels {s.level_ranks}"
                                     for s in probe.snapshots)
        return rep, text, None, EXIT_OK
    if args.verb == "corpus":
        if args.action == "list":
            names = list_fixtures()
            return {"schema": serialize.schema_id("corpus"), "passed": True, "fixtures": names}, \
                "\n".join(names), None, EXIT_OK
        known = set(list_fixtures())
        bad = [n for n in args.names if n not in known]
        if bad:
            raise UsageError(f"unknown fixture(s): {', '.join(bad)}")
        report = run_all(tol, seed, names=args.names or None)
        return serialize.corpus_report(report), _text_corpus(report), None, \
            EXIT_OK if report.passed else EXIT_CERT
    raise UsageError(f"unknown verb {args.verb}")


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code not in (0, None) else EXIT_OK
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            report, text, csv_text, code = _run(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DimensionError, DegenerateBeyondOrderError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE if isinstance(exc, DimensionError) else EXIT_CERT
    except CertificationError as exc:
        extra = "" if exc.defect is None else f" (defect {exc.defect:.3g})"
        print(f"certification failed: {exc}{extra}", file=sys.stderr)
        return EXIT_CERT
    except LindstructError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CERT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE

    if args.format == "json":
        out = json.dumps(report, indent=1, allow_nan=False)
    elif args.format == "csv":
        out = csv_text
    else:
        out = text
    if args.out:
        Path(args.out).write_text(out if out.endswith("\n") else out + "\n")
    else:
        print(out)
    return code


if __name__ == "__main__":
    sys.exit(main())
