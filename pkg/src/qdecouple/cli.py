"""Command-line front end.

Subcommands ``entropy``, ``design``, ``decouple`` and ``rates`` read JSON
state/ensemble files and print a JSON report carrying ``schema_version``.

Exit codes: 0 ok, 2 parse error, 3 invariant violation, 4 solver failure,
5 decoupling bound violated although its condition holds. Errors are a
single JSON line on stderr.
"""

import argparse
import json
import os
import sys

import numpy as np

from . import designs, entropies, merging
from .decoupling import BipartiteSplit, run_experiment
from .entropies import SolverError
from .serialization import SCHEMA_VERSION, FormatError, dumps, load_state
from .states import PureState

EXIT_OK, EXIT_PARSE, EXIT_INVARIANT, EXIT_SOLVER, EXIT_BOUND = 0, 2, 3, 4, 5

QUANTITIES = ("renyi", "hmin", "hmax", "smooth-hmin", "smooth-hmax", "h0", "vn", "mutual-info")


class CLIError(Exception):
    def __init__(self, code, kind, message):
        super().__init__(message)
        self.code, self.kind = code, kind


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise CLIError(EXIT_PARSE, "parse", message)


def _split_ab(state):
    """View a state as bipartite: first subsystem A, the rest B."""
    rho = state.density() if isinstance(state, PureState) else state
    dims = rho.layout.dims
    if len(dims) < 2:
        raise CLIError(EXIT_INVARIANT, "invariant", "conditional quantities need at least two subsystems")
    return rho.matrix, (dims[0], int(np.prod(dims[1:])))


def _smoothing_doc(res):
    return {"value": res.value, "bound": res.bound, "objective": res.objective,
            "residual": res.residual, "iterations": res.iterations, "info": res.info,
            "witness_trace": res.witness.trace}


def cmd_entropy(args):
    state = load_state(args.state)
    rho = state.density() if isinstance(state, PureState) else state
    q = args.quantity
    doc = {"quantity": q}
    if q == "vn":
        doc["value"] = entropies.von_neumann(rho)
    elif q == "h0":
        doc["value"] = entropies.h0_eps(rho, _eps(args, 0.0))
        doc["eps"] = _eps(args, 0.0)
        doc["bound"] = "upper"
    else:
        m, dims = _split_ab(state)
        doc["dims"] = list(dims)
        if q == "mutual-info":
            doc["value"] = entropies.mutual_information(m, dims)
        elif q == "renyi":
            if args.alpha is None:
                raise CLIError(EXIT_PARSE, "parse", "--alpha is required for renyi")
            val, _, info = entropies.cond_renyi_entropy(m, args.alpha, dims, full_output=True)
            doc.update(value=val, alpha=args.alpha, bound="lower", optimizer=info)
        elif q == "hmin":
            doc.update(value=entropies.h_min(m, dims), bound="lower")
        elif q == "hmax":
            doc.update(value=entropies.h_max(m, dims), bound="lower")
        elif q == "smooth-hmin":
            doc.update(_smoothing_doc(entropies.smooth_h_min(m, _eps(args), dims)), eps=_eps(args))
        elif q == "smooth-hmax":
            doc.update(_smoothing_doc(entropies.smooth_h_max(m, _eps(args), dims)), eps=_eps(args))
    return doc, EXIT_OK


def _eps(args, default=None):
    if args.eps is None:
        if default is None:
            raise CLIError(EXIT_PARSE, "parse", "--eps is required")
        return default
    return args.eps


def _load_ensemble_spec(args):
    text = args.ensemble
    if text is None:
        raise CLIError(EXIT_PARSE, "parse", "--ensemble is required")
    try:
        if os.path.exists(text):
            with open(text, encoding="utf-8") as fh:
                spec = json.load(fh)
        else:
            spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise CLIError(EXIT_PARSE, "parse", f"ensemble spec is not valid JSON: {exc.msg}") from None
    if not isinstance(spec, dict) or "kind" not in spec:
        raise CLIError(EXIT_PARSE, "parse", "ensemble spec must be an object with a 'kind' field")
    if spec["kind"] in ("random_circuit", "haar_samples") and spec.get("seed") is None:
        spec["seed"] = args.seed
    return spec


def _ensemble(args):
    spec = _load_ensemble_spec(args)
    try:
        return designs.ensemble_from_spec(spec), spec
    except (KeyError, TypeError) as exc:
        raise CLIError(EXIT_PARSE, "parse", f"incomplete ensemble spec: {exc}") from None


def cmd_design(args):
    ens, spec = _ensemble(args)
    doc = {"action": args.action, "spec": spec, "dim": ens.dim, "n_elements": len(ens)}
    if args.action == "gen":
        doc["ensemble"] = designs.ensemble_to_spec(ens)
    elif args.action == "delta":
        est = designs.delta_bounds(ens)
        doc["delta"] = {"lower": est.lower, "upper": est.upper}
    elif args.action == "check":
        doc["tol"] = args.tol
        doc["exact"] = bool(designs.is_exact_2design(ens, args.tol))
    return doc, EXIT_OK


def cmd_decouple(args):
    state = load_state(args.state)
    rho = state.density() if isinstance(state, PureState) else state
    if args.split is None:
        raise CLIError(EXIT_PARSE, "parse", "--split is required")
    try:
        split = BipartiteSplit.parse(args.split)
    except ValueError as exc:
        raise CLIError(EXIT_PARSE, "parse", str(exc)) from None
    ens, spec = _ensemble(args)
    rep = run_experiment(rho.matrix, ens, split, _eps(args), delta=args.delta, workers=args.threads)
    doc = rep.to_dict()
    doc["ensemble_spec"] = spec
    code = EXIT_OK
    if rep.condition_holds and rep.empirical_average > rep.bound:
        doc["violation"] = True
        code = EXIT_BOUND
    return doc, code


def cmd_rates(args):
    state = load_state(args.state)
    if not isinstance(state, PureState):
        raise CLIError(EXIT_INVARIANT, "invariant", "rates need a pure state file on subsystems A, B, R")
    doc = {}
    if args.asymptotic:
        q_inf, e_inf = merging.asymptotic_rates(state)
        doc["asymptotic"] = {"q_inf": q_inf, "e_inf": e_inf}
    if args.eps is not None:
        rep = merging.merging_rates(state, args.eps, args.delta or 0.0, args.d_a1)
        doc["one_shot"] = rep.to_dict()
    if args.iid_trend:
        rows = merging.iid_trend(state, _eps(args), args.iid_trend, args.delta or 0.0, args.d_a1)
        for r in rows:
            r["report"] = r["report"].to_dict()
        doc["iid_trend"] = rows
    if not doc:
        raise CLIError(EXIT_PARSE, "parse", "nothing to do: give --eps, --asymptotic or --iid-trend")
    return doc, EXIT_OK


def build_parser():
    p = _Parser(prog="qdecouple", description=__doc__.splitlines()[0])
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--threads", type=int, default=1)
    common.add_argument("--out")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("entropy", parents=[common])
    e.add_argument("--state", required=True)
    e.add_argument("--quantity", required=True, choices=QUANTITIES)
    e.add_argument("--alpha", type=float)
    e.add_argument("--eps", type=float)
    e.set_defaults(func=cmd_entropy)

    d = sub.add_parser("design", parents=[common])
    d.add_argument("action", choices=("gen", "delta", "check"))
    d.add_argument("--ensemble", required=True, help="spec file or inline JSON")
    d.add_argument("--tol", type=float, default=1e-9)
    d.set_defaults(func=cmd_design)

    c = sub.add_parser("decouple", parents=[common])
    c.add_argument("--state", required=True)
    c.add_argument("--split", required=True)
    c.add_argument("--ensemble", required=True)
    c.add_argument("--eps", type=float, required=True)
    c.add_argument("--delta", type=float)
    c.set_defaults(func=cmd_decouple)

    r = sub.add_parser("rates", parents=[common])
    r.add_argument("--state", required=True)
    r.add_argument("--eps", type=float)
    r.add_argument("--delta", type=float, default=0.0)
    r.add_argument("--d-a1", dest="d_a1", type=int)
    r.add_argument("--asymptotic", action="store_true")
    r.add_argument("--iid-trend", type=int, default=0)
    r.set_defaults(func=cmd_rates)
    return p


def _fail(code, kind, message):
    line = json.dumps({"error": kind, "code": code, "message": " ".join(str(message).split())})
    print(line, file=sys.stderr)
    return code


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        doc, code = args.func(args)
    except CLIError as exc:
        return _fail(exc.code, exc.kind, exc)
    except (FormatError, FileNotFoundError, IsADirectoryError) as exc:
        return _fail(EXIT_PARSE, "parse", exc)
    except SolverError as exc:
        return _fail(EXIT_SOLVER, "solver", exc)
    except (ValueError, KeyError, MemoryError) as exc:
        return _fail(EXIT_INVARIANT, "invariant", exc)
    doc = {"schema_version": SCHEMA_VERSION, "command": args.command, **doc}
    text = dumps(doc)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
