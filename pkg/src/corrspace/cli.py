"""Command-line front end.

Builds and analyzes the resource states, runs the measurement protocols,
generates and reconstructs tomography data, and emits tables/curves as JSON
or CSV.  All output is deterministic for a fixed argument list and seed:
field order is fixed, floats are printed with 15 significant digits, and
every randomized command either takes ``--seed`` or generates one and
records it in the output.

Exit codes: 0 success, 1 numeric failure (zero-probability post-selection,
annihilated filters, ...), 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import re
import secrets
import sys
from math import isfinite, pi
from typing import Any, Sequence

import numpy as np

from . import analysis, noise_tomo, prep, protocols, qmath as qm
from .wires import PSI6_LABELS, build_psi4, build_psi6, lambda34

SCHEMA = "corrspace/1"

_STATE_BUILDERS = {
    "psi4": lambda th: build_psi4(th),
    "psi6": lambda th: build_psi6(th),
    "lambda34": lambda th: lambda34(th),
}


class CliError(Exception):
    """Semantic usage error (maps to exit code 2)."""


# ---------------------------------------------------------------------------
# Argument parsing helpers
# ---------------------------------------------------------------------------

_PI_RE = re.compile(
    r"^([+-]?)(\d+(?:\.\d+)?)?\s*\*?\s*pi(?:\s*/\s*(\d+(?:\.\d+)?))?$",
    re.IGNORECASE,
)


def parse_angle(text: str) -> float:
    """Angle as decimal radians or a rational multiple of pi ('pi/3', '-2pi/3')."""
    t = text.strip()
    m = _PI_RE.match(t)
    if m:
        sign = -1.0 if m.group(1) == "-" else 1.0
        num = float(m.group(2)) if m.group(2) else 1.0
        den = float(m.group(3)) if m.group(3) else 1.0
        if den == 0:
            raise argparse.ArgumentTypeError(f"zero denominator in angle {text!r}")
        return sign * num * pi / den
    try:
        return float(t)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"cannot parse angle {text!r} (use decimal radians or 'pi/3' forms)"
        ) from None


def parse_bits(text: str) -> tuple[int, ...]:
    """Comma-separated measurement outcomes, e.g. '0,1,0'."""
    try:
        bits = tuple(int(p) for p in text.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError(f"cannot parse outcomes {text!r}") from None
    if any(b not in (0, 1) for b in bits):
        raise argparse.ArgumentTypeError("outcomes must be 0 or 1")
    return bits


def _fresh_seed() -> int:
    return secrets.randbits(63)


# ---------------------------------------------------------------------------
# Deterministic serialization
# ---------------------------------------------------------------------------

def format_float(x: float) -> str:
    """15-significant-digit representation used for all numeric output."""
    f = float(x)
    if not isfinite(f):
        raise ValueError("non-finite number in output")
    if f == 0.0:
        f = 0.0  # normalize -0.0
    return format(f, ".15g")


def _emit(obj: Any, out: list[str], indent: int, inline: bool) -> None:
    pad = "  " * indent
    if obj is None:
        out.append("null")
    elif isinstance(obj, bool):
        out.append("true" if obj else "false")
    elif isinstance(obj, (int, np.integer)):
        out.append(str(int(obj)))
    elif isinstance(obj, (float, np.floating)):
        out.append(format_float(obj))
    elif isinstance(obj, (complex, np.complexfloating)):
        _emit([obj.real, obj.imag], out, indent, True)
    elif isinstance(obj, str):
        out.append(json.dumps(obj))
    elif isinstance(obj, np.ndarray):
        _emit(obj.tolist(), out, indent, inline)
    elif isinstance(obj, dict):
        if not obj:
            out.append("{}")
            return
        out.append("{\n")
        items = list(obj.items())
        for i, (k, v) in enumerate(items):
            if not isinstance(k, str):
                raise TypeError(f"non-string JSON key {k!r}")
            out.append(pad + "  " + json.dumps(k) + ": ")
            _emit(v, out, indent + 1, False)
            out.append(",\n" if i < len(items) - 1 else "\n")
        out.append(pad + "}")
    elif isinstance(obj, (list, tuple)):
        # lists render inline (amplitude vectors and matrices stay compact)
        out.append("[")
        for i, v in enumerate(obj):
            _emit(v, out, indent, True)
            if i < len(obj) - 1:
                out.append(", ")
        out.append("]")
    else:
        raise TypeError(f"cannot serialize {type(obj).__name__}")


def dumps15(payload: dict) -> str:
    """Render a payload as deterministic pretty JSON with 15-digit floats."""
    out: list[str] = []
    _emit(payload, out, 0, False)
    return "".join(out) + "\n"


def render_csv(header: Sequence[str], rows: Sequence[Sequence[Any]]) -> str:
    lines = [",".join(header)]
    for row in rows:
        cells = []
        for v in row:
            if isinstance(v, (float, np.floating)):
                cells.append(format_float(v))
            else:
                cells.append(str(v))
        lines.append(",".join(cells))
    return "\n".join(lines) + "\n"


def _write_output(text: str, path: str | None) -> None:
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="ascii", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# Shared payload pieces
# ---------------------------------------------------------------------------

def _state_payload(state: qm.StateVector) -> dict:
    return {
        "labels": list(state.labels),
        "amplitudes": [[a.real, a.imag] for a in state.amps],
    }


def _resolve_mode(args) -> tuple[tuple[int, ...] | None, int | None, str]:
    """Map (--outcomes | --postselect-zeros | --seed) onto protocol inputs."""
    given = [
        name
        for name, val in (
            ("--outcomes", getattr(args, "outcomes", None)),
            ("--postselect-zeros", getattr(args, "postselect_zeros", False) or None),
            ("--seed", getattr(args, "seed", None)),
        )
        if val is not None
    ]
    if len(given) > 1:
        raise CliError(f"options {given} are mutually exclusive")
    if args.outcomes is not None:
        return tuple(args.outcomes), None, "postselect"
    if getattr(args, "postselect_zeros", False):
        return None, None, "postselect"  # caller substitutes all-zero outcomes
    seed = args.seed if args.seed is not None else _fresh_seed()
    return None, seed, "sampled"


def _noisy_state(pure: qm.StateVector, fidelity: float):
    if fidelity == 1.0:
        return pure
    return noise_tomo.white_noise(pure, fidelity)


# ---------------------------------------------------------------------------
# Command implementations
# ---------------------------------------------------------------------------

def _cmd_state_build(args) -> tuple[str, str | None]:
    state = _STATE_BUILDERS[args.state](args.theta)
    payload = {
        "schema": SCHEMA,
        "command": "state build",
        "state": args.state,
        "theta": args.theta,
    }
    payload.update(_state_payload(state))
    return dumps15(payload), args.out


def _cmd_state_analyze(args) -> tuple[str, str | None]:
    state = _STATE_BUILDERS[args.state](args.theta)
    if args.state == "psi4":
        correlations = {
            "Q_XX_13": analysis.two_point_correlation(state, "1", "3", "X", "X"),
            "q_max_13": analysis.q_max(state, "1", "3"),
        }
    elif args.state == "psi6":
        correlations = {
            "Q_XZ_24": analysis.two_point_correlation(state, "2", "4", "X", "Z"),
            "Q_ZX_34": analysis.two_point_correlation(state, "3", "4", "Z", "X"),
        }
    else:
        correlations = {}
    entropies = analysis.linear_entropies(state)
    payload = {
        "schema": SCHEMA,
        "command": "state analyze",
        "state": args.state,
        "theta": args.theta,
        "correlations": correlations,
        "entropies": {label: entropies[label] for label in state.labels},
    }
    return dumps15(payload), args.out


def _cmd_protocol_rotate(args) -> tuple[str, str | None]:
    outcomes, seed, mode = _resolve_mode(args)
    if mode == "postselect" and outcomes is None:
        outcomes = (0, 0, 0)
    rng = np.random.default_rng(seed) if seed is not None else None
    tr = protocols.rotate_sequence(
        args.alpha, args.beta, args.gamma, theta=args.theta,
        outcomes=outcomes, rng=rng,
    )
    payload = {
        "schema": SCHEMA,
        "command": "protocol rotate",
        "theta": args.theta,
        "alpha": args.alpha,
        "beta": args.beta,
        "gamma": args.gamma,
        "mode": mode,
        "seed": seed,
        "transcript": tr.to_json_dict(),
    }
    return dumps15(payload), args.out


def _cmd_protocol_compensate(args) -> tuple[str, str | None]:
    resource = f"{args.resource}-qubit"
    p_s, p_theta = protocols.success_probability(args.alpha, args.theta)
    alpha_wrong = protocols.wrong_angle(args.alpha, args.theta)
    p_retry, _ = protocols.success_probability(args.alpha - alpha_wrong, args.theta)
    total = p_s if args.resource == 2 else p_s + (1.0 - p_s) * p_retry
    analytic = {
        "p_success_single": p_s,
        "p_theta": p_theta,
        "wrong_angle": alpha_wrong,
        "p_success_total": total,
    }
    payload = {
        "schema": SCHEMA,
        "command": "protocol compensate",
        "resource": resource,
        "theta": args.theta,
        "alpha": args.alpha,
        "analytic": analytic,
    }
    if args.enumerate:
        if args.outcomes is not None or args.seed is not None:
            raise CliError("--enumerate excludes --outcomes/--seed")
        p_total, branches = protocols.enumerate_compensation(
            args.alpha, resource, theta=args.theta
        )
        payload["mode"] = "enumerate"
        payload["seed"] = None
        payload["total_success_probability"] = p_total
        payload["branches"] = [
            {
                "outcomes": [rec.outcome for rec in tr.outcomes],
                "probability": tr.total_probability,
                "success": tr.success,
            }
            for tr in branches
        ]
        return dumps15(payload), args.out
    outcomes, seed, mode = _resolve_mode(args)
    if mode == "postselect" and outcomes is None:
        outcomes = (0,) if args.resource == 2 else (0, 0, 0)
    rng = np.random.default_rng(seed) if seed is not None else None
    tr = protocols.compensate(
        args.alpha, resource, theta=args.theta, outcomes=outcomes, rng=rng
    )
    payload["mode"] = mode
    payload["seed"] = seed
    payload["transcript"] = tr.to_json_dict()
    return dumps15(payload), args.out


def _cmd_protocol_cz(args) -> tuple[str, str | None]:
    outcomes, seed, mode = _resolve_mode(args)
    if mode == "postselect" and outcomes is None:
        outcomes = (0, 0, 0, 0)
    rng = np.random.default_rng(seed) if seed is not None else None
    tr = protocols.cz_gate_protocol(
        args.alpha, outcomes=outcomes, rng=rng, theta=args.theta
    )
    payload = {
        "schema": SCHEMA,
        "command": "protocol cz",
        "theta": args.theta,
        "alpha": args.alpha,
        "mode": mode,
        "seed": seed,
        "transcript": tr.to_json_dict(),
    }
    return dumps15(payload), args.out


def _cmd_protocol_deutsch(args) -> tuple[str, str | None]:
    outcomes, seed, mode = _resolve_mode(args)
    if mode == "postselect" and outcomes is None:
        outcomes = (0, 0, 0, 0)
    rng = np.random.default_rng(seed) if seed is not None else None
    query, ancilla, tr = protocols.deutsch(
        args.function, outcomes=outcomes, rng=rng, theta=args.theta
    )
    payload = {
        "schema": SCHEMA,
        "command": "protocol deutsch",
        "function": args.function,
        "theta": args.theta,
        "mode": mode,
        "seed": seed,
        "query_bit": query,
        "ancilla_bit": ancilla,
        "success": tr.success,
        "transcript": tr.to_json_dict(),
    }
    return dumps15(payload), args.out


def _cmd_tomo_simulate(args) -> tuple[str, str | None]:
    pure = _STATE_BUILDERS[args.state](args.theta)
    rho = _noisy_state(pure, args.fidelity)
    seed = args.seed if args.seed is not None else _fresh_seed()
    counts = noise_tomo.simulate_counts(
        rho, shots=args.shots, seed=seed, mode=args.sampling
    )
    if args.format == "csv":
        return (
            render_csv(("setting", "cell", "count"), counts.to_csv_rows()),
            args.out,
        )
    payload = {
        "schema": SCHEMA,
        "command": "tomo simulate",
        "state": args.state,
        "theta": args.theta,
        "fidelity": args.fidelity,
        "shots": args.shots,
        "sampling": args.sampling,
        "seed": seed,
        "counts": counts.to_json_dict(),
    }
    return dumps15(payload), args.out


def _load_counts(path: str) -> noise_tomo.CountsTable:
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if isinstance(data, dict) and "counts" in data and "labels" not in data:
        data = data["counts"]  # wrapped `tomo simulate` payload
    if not isinstance(data, dict):
        raise ValueError("counts file must hold a JSON object")
    return noise_tomo.CountsTable.from_json_dict(data)


def _cmd_tomo_reconstruct(args) -> tuple[str, str | None]:
    counts = _load_counts(args.counts)
    target = None
    if args.target is not None:
        target = _STATE_BUILDERS[args.target](args.theta)
        if tuple(target.labels) != tuple(counts.labels):
            target = target.reorder(counts.labels)
    result = noise_tomo.ml_reconstruct(
        counts, target, max_iters=args.max_iters, tol=args.tol
    )
    monte_carlo = None
    seed = None
    if args.mc_runs:
        if target is None:
            raise CliError("--mc-runs requires --target")
        seed = args.seed if args.seed is not None else _fresh_seed()
        mean, sigma = noise_tomo.monte_carlo_error(
            counts, target, runs=args.mc_runs, seed=seed,
            max_iters=args.max_iters, tol=args.tol,
        )
        monte_carlo = {
            "runs": args.mc_runs,
            "fidelity_mean": mean,
            "fidelity_sigma": sigma,
        }
    payload = {
        "schema": SCHEMA,
        "command": "tomo reconstruct",
        "target": args.target,
        "theta": args.theta,
        "max_iters": args.max_iters,
        "tol": args.tol,
        "seed": seed,
        "result": result.to_json_dict(),
        "monte_carlo": monte_carlo,
    }
    if not args.full_matrix:
        payload["result"].pop("rho")
    return dumps15(payload), args.out


def _cmd_witness_fidelity(args) -> tuple[str, str | None]:
    pure = build_psi6(args.theta).reorder(analysis.WITNESS_ORDER)
    rho = _noisy_state(pure, args.fidelity)
    report = analysis.assemble_witness(args.theta, corrected=args.corrected)
    settings = tuple(sorted(set(report.derived_settings)))
    seed = None
    if args.shots:
        seed = args.seed if args.seed is not None else _fresh_seed()
        counts = noise_tomo.simulate_counts(
            rho, settings=settings, shots=args.shots, seed=seed
        )
        cells = analysis.counts_to_cells(counts)
        mode = "sampled"
    else:
        cells = analysis.exact_setting_cells(rho, settings)
        mode = "exact"
    value = analysis.fidelity_from_settings(
        cells, theta=args.theta, corrected=args.corrected
    )
    payload = {
        "schema": SCHEMA,
        "command": "witness fidelity",
        "state": "psi6",
        "theta": args.theta,
        "fidelity": args.fidelity,
        "corrected": args.corrected,
        "mode": mode,
        "shots": args.shots,
        "seed": seed,
        "fidelity_estimate": value,
        "report": report.to_json_dict(),
    }
    return dumps15(payload), args.out


def _cmd_curve_fig2(args) -> tuple[str, str | None]:
    if args.grid < 2:
        raise CliError("--grid must be at least 2")
    resource = f"{args.resource}-qubit"
    alphas = np.linspace(0.0, pi, args.grid)
    points = protocols.noisy_success_curve(
        alphas, resource, args.fidelity, theta=args.theta
    )
    if args.format == "json":
        payload = {
            "schema": SCHEMA,
            "command": "curve fig2",
            "resource": resource,
            "fidelity": args.fidelity,
            "theta": args.theta,
            "grid": args.grid,
            "points": [[a, p] for a, p in points],
        }
        return dumps15(payload), args.out
    return render_csv(("alpha", "p_success"), points), args.out


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------

def _add_common(p: argparse.ArgumentParser, *, theta: bool = True) -> None:
    if theta:
        p.add_argument("--theta", type=parse_angle, default=pi / 6,
                       help="wire weighting angle (default pi/6)")
    p.add_argument("--out", metavar="FILE", default=None,
                   help="write output to FILE instead of stdout")


def _add_branch_options(p: argparse.ArgumentParser, n: int) -> None:
    p.add_argument("--outcomes", type=parse_bits, default=None,
                   help=f"post-select {n} comma-separated outcome bits")
    p.add_argument("--postselect-zeros", action="store_true",
                   help="post-select the all-zero outcome branch")
    p.add_argument("--seed", type=int, default=None,
                   help="sample outcomes with this RNG seed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrspace",
        description="Correlation-space MBQC simulator and analysis toolkit.",
    )
    groups = parser.add_subparsers(dest="group", required=True)

    # state ----------------------------------------------------------------
    state = groups.add_parser("state", help="build or analyze resource states")
    state_sub = state.add_subparsers(dest="action", required=True)

    p = state_sub.add_parser("build", help="emit a resource state's amplitudes")
    p.add_argument("--state", choices=sorted(_STATE_BUILDERS), required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_state_build)

    p = state_sub.add_parser("analyze", help="correlations and entropies")
    p.add_argument("--state", choices=sorted(_STATE_BUILDERS), required=True)
    _add_common(p)
    p.set_defaults(func=_cmd_state_analyze)

    # protocol -------------------------------------------------------------
    proto = groups.add_parser("protocol", help="run measurement protocols")
    proto_sub = proto.add_subparsers(dest="action", required=True)

    p = proto_sub.add_parser("rotate", help="three-angle rotation sequence")
    p.add_argument("--alpha", type=parse_angle, required=True)
    p.add_argument("--beta", type=parse_angle, required=True)
    p.add_argument("--gamma", type=parse_angle, required=True)
    _add_branch_options(p, 3)
    _add_common(p)
    p.set_defaults(func=_cmd_protocol_rotate)

    p = proto_sub.add_parser("compensate", help="trial-until-success rotation")
    p.add_argument("--alpha", type=parse_angle, required=True)
    p.add_argument("--resource", type=int, choices=(2, 4), default=4)
    p.add_argument("--enumerate", action="store_true",
                   help="enumerate all branches instead of running one")
    _add_branch_options(p, 3)
    _add_common(p)
    p.set_defaults(func=_cmd_protocol_compensate)

    p = proto_sub.add_parser("cz", help="two-wire entangling gate")
    p.add_argument("--alpha", type=parse_angle, required=True)
    _add_branch_options(p, 4)
    _add_common(p)
    p.set_defaults(func=_cmd_protocol_cz)

    p = proto_sub.add_parser("deutsch", help="constant/balanced discrimination")
    p.add_argument("--function", choices=("constant", "balanced"), required=True)
    _add_branch_options(p, 4)
    _add_common(p)
    p.set_defaults(func=_cmd_protocol_deutsch)

    # tomo -----------------------------------------------------------------
    tomo = groups.add_parser("tomo", help="tomography data and reconstruction")
    tomo_sub = tomo.add_subparsers(dest="action", required=True)

    p = tomo_sub.add_parser("simulate", help="sample synthetic counts")
    p.add_argument("--state", choices=sorted(_STATE_BUILDERS), required=True)
    p.add_argument("--fidelity", type=float, default=1.0,
                   help="white-noise fidelity of the prepared state")
    p.add_argument("--shots", type=int, default=1000)
    p.add_argument("--sampling", choices=("multinomial", "poisson"),
                   default="multinomial")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--format", choices=("json", "csv"), default="json")
    _add_common(p)
    p.set_defaults(func=_cmd_tomo_simulate)

    p = tomo_sub.add_parser("reconstruct", help="maximum-likelihood state fit")
    p.add_argument("--counts", metavar="FILE", required=True,
                   help="counts JSON from 'tomo simulate'")
    p.add_argument("--target", choices=sorted(_STATE_BUILDERS), default=None,
                   help="report fidelity against this builder state")
    p.add_argument("--max-iters", type=int, default=10_000)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--mc-runs", type=int, default=0,
                   help="bootstrap runs for the fidelity error bar")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--full-matrix", action="store_true",
                   help="include the reconstructed density matrix")
    _add_common(p)
    p.set_defaults(func=_cmd_tomo_reconstruct)

    # witness --------------------------------------------------------------
    wit = groups.add_parser("witness", help="local-setting fidelity estimation")
    wit_sub = wit.add_subparsers(dest="action", required=True)

    p = wit_sub.add_parser("fidelity", help="36-setting fidelity of psi6")
    p.add_argument("--fidelity", type=float, default=1.0,
                   help="white-noise fidelity of the measured state")
    p.add_argument("--corrected", action="store_true",
                   help="use the repaired decomposition (exact projector)")
    p.add_argument("--shots", type=int, default=0,
                   help="shots per setting (0 = exact expectations)")
    p.add_argument("--seed", type=int, default=None)
    _add_common(p)
    p.set_defaults(func=_cmd_witness_fidelity)

    # curve ----------------------------------------------------------------
    curve = groups.add_parser("curve", help="theory curves")
    curve_sub = curve.add_subparsers(dest="action", required=True)

    p = curve_sub.add_parser("fig2", help="compensated success vs alpha")
    p.add_argument("--resource", type=int, choices=(2, 4), required=True)
    p.add_argument("--fidelity", type=float, default=1.0)
    p.add_argument("--grid", type=int, default=25)
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    _add_common(p)
    p.set_defaults(func=_cmd_curve_fig2)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    try:
        text, out_path = args.func(args)
    except CliError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 2
    except (ValueError, KeyError, OverflowError, AssertionError,
            protocols.ProtocolAbort, OSError, np.linalg.LinAlgError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    _write_output(text, out_path)
    return 0


if __name__ == "__main__":
    sys.exit(main())
