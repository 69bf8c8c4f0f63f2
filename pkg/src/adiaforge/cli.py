"""Command-line front end.

Exit codes: 0 success, 1 validation/guard/input error, 2 numerical failure
(including a failed property in ``verify``).
"""

from __future__ import annotations

import argparse
import logging
import sys

import numpy as np

from . import io
from .circuit import pad_identities, to_grid_layout
from .errors import GuardError, NumericalError, ValidationError

__all__ = ["main", "build_parser"]

log = logging.getLogger("adiaforge")


def _positive_float(x):
    v = float(x)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {x}")
    return v


def _epsilon(x):
    v = float(x)
    if not 0 < v <= 1:
        raise argparse.ArgumentTypeError(f"epsilon must lie in (0, 1], got {x}")
    return v


def _s_value(x):
    v = float(x)
    if not 0 <= v <= 1:
        raise argparse.ArgumentTypeError(f"s must lie in [0, 1], got {x}")
    return v


def _emit(text, out):
    if out:
        io.atomic_write(out, text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------


def cmd_compile(args):
    from .grid6 import build_grid_program, pad_grid_rounds
    from .kitaev3 import build_3local
    from .kitaev5 import build_5local

    circuit = io.circuit_from_json(io.load_json(args.circuit))
    if hasattr(circuit, "as_circuit"):
        circuit = circuit.as_circuit()
    L0 = circuit.L
    eps = args.epsilon
    if args.flavor == "grid":
        layout = to_grid_layout(circuit)
        L0 = layout.L
        if args.pad:
            layout = pad_grid_rounds(layout, eps)
        prog = build_grid_program(layout, eps, args.J, L_original=L0, J_power=args.J_power)
    else:
        if args.pad:
            circuit = pad_identities(circuit, eps)
        if args.flavor == "5local":
            prog = build_5local(circuit, L_original=L0, epsilon=eps if args.pad else None)
        else:
            prog = build_3local(circuit, eps, args.J, L_original=L0, J_power=args.J_power)
    _emit(io.dumps(io.program_to_json(prog)), args.out)
    return 0


def _load_program(path):
    return io.program_from_json(io.load_json(path))


def cmd_gap(args):
    from .spectral import gap_profile

    prog = _load_program(args.prog)
    prof = gap_profile(prog, args.mode, args.samples)
    _emit(io.csv_text(["s", "lambda0", "lambda1", "gap"], prof.rows()), args.out)
    log.info("min gap %.6g at s=%.4g", prof.min_gap, prof.argmin_s)
    return 0


def cmd_evolve(args):
    from .evolution import EvolutionConfig, evolution_frame, evolve, measure_clock, search_T, steps_for

    prog = _load_program(args.prog)
    frame = evolution_frame(prog, args.frame)
    eps = prog.epsilon if prog.epsilon is not None else 0.2
    td_goal = args.trace_target if args.trace_target is not None else eps / 2
    ps_goal = args.success_target if args.success_target is not None else 1 - eps / 2
    report = {}
    if args.T is not None:
        steps = args.steps or steps_for(args.T, frame.scale)
        res = evolve(prog, EvolutionConfig(args.T, steps, delta=args.delta, sign=args.sign), frame)
        meas = measure_clock(res.state, prog, frame.basis)
    else:
        search = search_T(
            prog,
            lambda r, m: m.trace_distance <= td_goal and m.p_success >= ps_goal,
            T0=args.T0,
            budget_factor=args.budget,
            delta=args.delta,
            frame=frame,
            sign=args.sign,
        )
        report["sweep"] = [
            {"T": T, "steps": N, "fidelity": f, "p_success": p, "trace_distance": d} for T, N, f, p, d in search.runs
        ]
        report["found"] = search.found
        if not search.found:
            _emit(io.dumps(report), args.out)
            raise NumericalError(f"no T up to {args.T0 * args.budget:g} met the targets")
        res, meas = search.result, search.measurement
    report = {
        "T": res.T,
        "steps": res.steps,
        "fidelity": res.fidelity,
        "norm_drift": res.norm_drift,
        "runtime_metric": res.runtime_metric,
        "runtime_metric_exact": res.runtime_metric_exact,
        "frame": frame.kind,
        "measurement": meas.to_dict(),
        **report,
    }
    _emit(io.dumps(report), args.out)
    return 0


def cmd_shapes(args):
    from .grid6 import RULE_SET_MAX_SITES, enumerate_legal, shape_discrepancy

    shapes = enumerate_legal(args.n, args.R)
    if args.n * (args.R + 1) <= RULE_SET_MAX_SITES:
        extra = shape_discrepancy(args.n, args.R)
        note = None
    else:
        extra = None
        note = f"rule scan skipped: n(R+1) exceeds {RULE_SET_MAX_SITES}"
    if args.json:
        obj = {
            "n": args.n,
            "R": args.R,
            "legal": [{"ell": i, "rows": s.rows()} for i, s in enumerate(shapes)],
            "discrepancy": None if extra is None else [s.rows() for s in extra],
        }
        if note:
            obj["note"] = note
        _emit(io.dumps(obj), args.out)
        return 0
    lines = [f"# legal shapes n={args.n} R={args.R} ({len(shapes)})"]
    lines += [f"{i} {'/'.join(s.rows())}" for i, s in enumerate(shapes)]
    if extra is None:
        lines.append(f"# {note}")
    else:
        lines.append(f"# discrepancy: {len(extra)} shapes pass every pairwise rule but are not legal")
        lines += ["/".join(s.rows()) for s in extra]
    _emit("\n".join(lines) + "\n", args.out)
    return 0


def cmd_markov(args):
    from .spectral import conductance, history_basis, perron_chain, restrict
    from .local_hamiltonian import at

    prog = _load_program(args.prog)
    M = restrict(at(prog, args.s), history_basis(prog, 0)).matrix
    chain = perron_chain(np.real_if_close(M, tol=1e6))
    rep = conductance(chain, args.conductance)
    obj = {
        "s": args.s,
        "dim": chain.dim,
        "mu": chain.mu,
        "lambda0": chain.lambda0,
        "pi": chain.pi.tolist(),
        "P": chain.P.tolist(),
        "gap": chain.gap(),
        **rep.to_dict(),
    }
    _emit(io.dumps(obj), args.out)
    return 0


def cmd_verify(args):
    from .verify import run_suite

    circuit = io.circuit_from_json(io.load_json(args.circuit))
    if hasattr(circuit, "as_circuit"):
        circuit = circuit.as_circuit()
    results = run_suite(circuit, seed=args.seed, epsilon=args.epsilon)
    lines = [f"{'PASS' if ok else 'FAIL'} {name}: {detail}" for name, ok, detail in results]
    failed = sum(not ok for _, ok, _ in results)
    lines.append(f"{len(results) - failed}/{len(results)} properties passed")
    _emit("\n".join(lines) + "\n", args.out)
    return 0 if failed == 0 else 2


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(
        prog="adiaforge",
        description="Compile circuits to adiabatic Hamiltonians, analyse their gaps and simulate the evolution.",
        epilog="Environment: ADIAFORGE_THREADS caps worker threads for s-sample parallelism.",
    )
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="command", required=True)

    c = sub.add_parser("compile", help="circuit JSON -> program JSON")
    c.add_argument("--circuit", required=True, help="input circuit JSON")
    c.add_argument("--flavor", required=True, choices=["5local", "3local", "grid"])
    c.add_argument("--epsilon", type=_epsilon, default=1.0, help="target error; sets J and the padding (default 1)")
    c.add_argument("--pad", action="store_true", help="append ceil((2/eps-1)L) identity gates (whole rounds on the grid)")
    c.add_argument("--J", type=_positive_float, default=None, help="clock penalty override (3local, grid)")
    c.add_argument("--J-power", type=int, choices=[5, 6], default=6, help="exponent of L in the default J")
    c.add_argument("--out", help="output path (default stdout)")
    c.set_defaults(func=cmd_compile)

    g = sub.add_parser("gap", help="program JSON -> CSV gap profile")
    g.add_argument("--prog", required=True, help="program JSON")
    g.add_argument("--mode", choices=["full", "S", "S0"], default="S0", help="space to diagonalise in")
    g.add_argument("--samples", type=int, default=101, help="number of evenly spaced s values (>= 2)")
    g.add_argument("--out", help="output CSV (default stdout)")
    g.set_defaults(func=cmd_gap)

    e = sub.add_parser("evolve", help="program JSON -> evolution report JSON")
    e.add_argument("--prog", required=True, help="program JSON")
    e.add_argument("--T", type=_positive_float, help="fixed total time; omit to run the doubling search")
    e.add_argument("--steps", type=int, help="time steps for a fixed-T run (default scales with T)")
    e.add_argument("--T0", type=_positive_float, default=10.0, help="first T of the doubling search")
    e.add_argument("--budget", type=int, default=2 ** 14, help="search stops once T exceeds T0 * budget")
    e.add_argument("--trace-target", type=float, help="accepted trace distance (default epsilon/2)")
    e.add_argument("--success-target", type=float, help="accepted P(clock >= L) (default 1-epsilon/2)")
    e.add_argument("--delta", type=_positive_float, default=0.1, help="adiabatic exponent recorded in the config")
    e.add_argument("--sign", type=int, choices=[1, -1], default=1, help="Schrodinger sign convention")
    e.add_argument("--frame", choices=["auto", "full", "legal", "history"], default="auto", help="integration space")
    e.add_argument("--out", help="output JSON (default stdout)")
    e.set_defaults(func=cmd_evolve)

    s = sub.add_parser("shapes", help="legal grid shapes and the rule discrepancy report")
    s.add_argument("--n", type=int, required=True, help="rows (qubits)")
    s.add_argument("--R", type=int, required=True, help="rounds (columns beyond the first)")
    s.add_argument("--json", action="store_true", help="JSON instead of text")
    s.add_argument("--out", help="output path (default stdout)")
    s.set_defaults(func=cmd_shapes)

    v = sub.add_parser("verify", help="run the property suite on a circuit")
    v.add_argument("--circuit", required=True, help="circuit JSON")
    v.add_argument("--seed", type=int, default=0, help="64-bit seed for random instances")
    v.add_argument("--epsilon", type=_epsilon, default=0.5, help="epsilon for the 3-local checks")
    v.add_argument("--out", help="output path (default stdout)")
    v.set_defaults(func=cmd_verify)

    m = sub.add_parser("markov", help="S0 restriction at s -> Markov chain and conductance JSON")
    m.add_argument("--prog", required=True, help="program JSON")
    m.add_argument("--s", type=_s_value, required=True, help="interpolation parameter")
    m.add_argument("--conductance", choices=["exhaustive", "prefix"], default="exhaustive")
    m.add_argument("--out", help="output JSON (default stdout)")
    m.set_defaults(func=cmd_markov)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        return args.func(args)
    except GuardError as exc:
        print(f"error: guard {exc.guard}: {exc}", file=sys.stderr)
        return 1
    except ValidationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except NumericalError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
