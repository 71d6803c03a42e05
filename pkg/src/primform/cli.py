"""Command-line front end.

    primform validate  INPUT   identity gates (exit 1 on failure)
    primform exponents INPUT   Hodge numbers and exponents
    primform pipeline  INPUT   primitive form and Frobenius potential
    primform hochschild INPUT  ranks of the polyvector and form spaces

INPUT is a JSON file or the name of a bundled corpus entry (see
``primform pipeline --list``).  Reports go to stdout, or to --out, as JSON.
Exit codes: 0 success, 1 validation gate, 2 Calabi-Yau or degeneration
hypothesis fails, 3 truncation too small.
"""

import argparse
import sys
from math import ceil
from pathlib import Path

from .corpus import CORPUS_DIR
from .errors import CapMismatch, NotAComplex, ParseError, PrimformError, ValidationError
from .hochschild import compute_tpoly_and_omega, mm_bracket_vanishes
from .pipeline import EXTRA_ORDER, _require_cy, exponents_report, run_pipeline, validation_report
from .serialize import (DG_FORMAT, PACKAGE_FORMAT, algebra_from_json, cy_from_json,
                        dumps, input_kind, jsonable, load_json, package_from_json,
                        polynomial_from_json)

DEFAULT_L = 4
DEFAULT_W = 3


def corpus_entries():
    return sorted(p.stem for p in CORPUS_DIR.glob("*.json"))


def resolve_input(name):
    p = Path(name)
    if p.exists():
        return p
    bundled = CORPUS_DIR / f"{name.removeprefix('corpus:')}.json"
    if bundled.exists():
        return bundled
    raise ParseError(f"no such file or corpus entry: {name}", stage="parse",
                     witness={"location": name, "corpus": corpus_entries()})


class Job:
    """Parsed input plus the truncation settings of one command."""

    def __init__(self, args, command):
        self.args = args
        self.command = command
        self.path = resolve_input(args.input)
        self.obj = load_json(self.path)
        self.kind = input_kind(self.obj)
        self.algebra = None
        N = getattr(args, "t_order", None)
        if args.trunc_length is not None and args.trunc_length < 2:
            raise CapMismatch("truncation length must be at least 2", stage="config",
                              witness={"L": args.trunc_length})
        if N is not None and N < 1:
            raise CapMismatch("t-order must be at least 1", stage="config", witness={"N": N})
        self.N = N

    def package(self):
        """(package, cy, extra report entries)."""
        a = self.args
        extra = {"input": self.path.name, "format": self.kind}
        if self.kind == DG_FORMAT:
            A = algebra_from_json(self.obj)
            self.algebra = A
            extra["axioms"] = axiom_gate(A)
            if self.command in ("exponents", "pipeline") and self.obj.get("cy") is None:
                _require_cy(None)
            L = a.trunc_length
            if L is None:
                L = self.N + EXTRA_ORDER + 2 if self.command == "pipeline" else DEFAULT_L
            extra["trunc_length"] = L
            P = compute_tpoly_and_omega(A, L)
            cy = cy_from_json(P, self.obj.get("cy"))
            return P, cy, extra
        if a.trunc_length is not None:
            extra["note"] = "--trunc-length only applies to dg-algebra input"
        if self.kind == PACKAGE_FORMAT:
            if a.weight_cap is not None:
                raise CapMismatch("an explicit calculus package has a fixed weight cap",
                                  stage="config", witness={"weight_cap": a.weight_cap})
            P, cy = package_from_json(self.obj)
            return P, cy, extra
        W = a.weight_cap
        if W is None and self.obj.get("weight_cap", "auto") == "auto":
            if self.command == "pipeline":
                n = int(self.obj["n"])
                q_max = 1 - 2 / n
                W = str(ceil(q_max + self.N + EXTRA_ORDER + 1))
            else:
                W = str(DEFAULT_W)
        P, cy = polynomial_from_json(self.obj, W)
        extra["weight_cap"] = str(P.meta["weight_cap"])
        return P, cy, extra


def axiom_gate(A):
    """Axiom checks and the [m, m] = 0 equivalence; raises on the first failed axiom."""
    ax = A.check_axioms()
    mm_zero, _ = mm_bracket_vanishes(A, 3)
    core = ("d_squared_zero", "leibniz", "associativity")
    axioms_ok = all(ax[k] is None for k in core)
    report = {"algebra": A.name,
              "axioms": {k: {"pass": v is None, "witness": v} for k, v in ax.items()},
              "[m, m] = 0": mm_zero,
              "[m, m] = 0 iff axioms hold": mm_zero == axioms_ok}
    bad = [k for k, v in ax.items() if v is not None]
    if bad:
        cls = NotAComplex if bad[0] == "d_squared_zero" else ValidationError
        exc = cls(f"dg algebra axiom fails: {bad[0]}", stage="check_axioms",
                  anchor="eq:L" if bad[0] == "leibniz" else None, witness=ax[bad[0]])
        exc.report = report
        raise exc
    return report


def cmd_validate(job):
    P, cy, extra = job.package()
    report = dict(extra)
    report["package"] = P.name
    report["dimensions"] = {"T": P.T.dim, "Omega": P.O.dim}
    report["validation"] = validation_report(P)
    if P.certificate is not None:
        report["stabilization"] = P.certificate
    return report


def cmd_exponents(job):
    P, cy, extra = job.package()
    report = exponents_report(P, cy, strict=job.args.strict)
    report.update(extra)
    return report


def cmd_pipeline(job):
    P, cy, extra = job.package()
    report, _ = run_pipeline(P, cy, job.N, u_window=job.args.u_window, strict=job.args.strict)
    report.update(extra)
    return report


def cmd_hochschild(job):
    P, cy, extra = job.package()

    def ranks(V):
        out = {}
        for (d, w), idx in sorted(V.blocks().items()):
            out[f"deg={d},wt={w}"] = len(idx)
        return out

    report = dict(extra)
    report.update({"package": P.name, "T_dim": P.T.dim, "Omega_dim": P.O.dim,
                   "T_ranks": ranks(P.T), "Omega_ranks": ranks(P.O)})
    if P.certificate is not None:
        report["stabilization"] = P.certificate
    return report


COMMANDS = {"validate": cmd_validate, "exponents": cmd_exponents, "pipeline": cmd_pipeline,
            "hochschild": cmd_hochschild}


def build_parser():
    parser = argparse.ArgumentParser(prog="primform",
                                     description="Primitive forms and Frobenius potentials "
                                                 "of Calabi-Yau dg algebras, over Q.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        p = sub.add_parser(name)
        p.add_argument("input", nargs="?", help="JSON file or bundled corpus entry")
        p.add_argument("--list", action="store_true", help="list the bundled corpus and exit")
        p.add_argument("--trunc-length", type=int, default=None, metavar="L",
                       help="Hochschild truncation length (dg-algebra input)")
        p.add_argument("--weight-cap", default=None, metavar="W",
                       help="weight cap for polynomial models")
        p.add_argument("--strict", action="store_true", help="require integral exponents")
        p.add_argument("--out", default=None, help="write the report here instead of stdout")
        p.add_argument("--format", choices=("json", "text"), default="json")
        if name == "pipeline":
            p.add_argument("--t-order", type=int, default=4, metavar="N")
            p.add_argument("--u-window", type=int, nargs=2, default=None, metavar=("LO", "HI"))
    return parser


def _text(report, indent=0):
    lines = []
    pad = "  " * indent
    for k in sorted(report):
        v = report[k]
        if isinstance(v, dict):
            if "pass" in v and isinstance(v["pass"], bool):
                lines.append(f"{pad}{k}: {'pass' if v['pass'] else 'FAIL'}")
            elif indent < 2:
                lines.append(f"{pad}{k}:")
                lines += _text(v, indent + 1)
        elif isinstance(v, bool):
            lines.append(f"{pad}{k}: {'true' if v else 'false'}")
        elif isinstance(v, (str, int)) or v is None:
            lines.append(f"{pad}{k}: {v}")
    return lines


def emit(report, args, stream):
    text = dumps(report) if args.format == "json" else "\n".join(_text(report)) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        stream.write(text)


def main(argv=None):
    args = build_parser().parse_args(argv)
    if args.list:
        sys.stdout.write("\n".join(corpus_entries()) + "\n")
        return 0
    if args.input is None:
        sys.stderr.write("primform: an input file or corpus entry is required\n")
        return 1
    try:
        job = Job(args, args.command)
        report = COMMANDS[args.command](job)
    except PrimformError as exc:
        out = {"command": args.command, "status": "error", "exit_code": exc.exit_code,
               **jsonable(exc.to_dict())}
        if hasattr(exc, "report"):
            out["report"] = jsonable(exc.report)
        emit(out, args, sys.stdout)
        sys.stderr.write(f"primform: {type(exc).__name__}: {exc.message}"
                         + (f" [stage {exc.stage}]" if exc.stage else "") + "\n")
        return exc.exit_code
    report = {"command": args.command, "status": "ok", **jsonable(report)}
    emit(report, args, sys.stdout)
    return 0


if __name__ == "__main__":
    sys.exit(main())
