"""Command-line entry point: ``sqcodes <subcommand> ...``.

Exit codes: 0 on success, 1 on usage or input errors, 2 when an exhaustive
enumeration would exceed its budget (raise it with ``--max-enum``).
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .codes import (
    LinearCode,
    SamplerModel,
    distinguish,
    format_code,
    parse_code,
    rs_code,
    schur_power,
    square_bound,
    square_dim,
)
from .errors import BudgetExceeded, InputError, ParseError, SqcodesError
from .experiments import (
    EXPECTATION_BUDGET,
    DUAL_BUDGET,
    ExperimentReport,
    exact_expectation,
    mc_dim_at_large_n,
    mc_dual_distance,
    mc_kernel_size,
    mc_model_compare,
    mc_square_full,
)
from .fq import field_new
from .quadforms import (
    CENSUS_BUDGET,
    ZERO_COUNT_BUDGET,
    QuadraticForm,
    census_brute,
    census_formula,
    decompose,
    n_monomials,
    qf_rank,
    zero_count_brute,
    zero_count_closed,
)

FORMATS = ("text", "json", "csv")


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(1, f"UsageError: {message}\n")


# --- file readers -------------------------------------------------------------

def read_code_file(path: str | Path) -> LinearCode:
    try:
        text = Path(path).read_text(encoding="ascii")
    except UnicodeDecodeError as exc:
        raise ParseError(f"{path}: not ASCII") from exc
    return parse_code(text)


def parse_form(text: str) -> QuadraticForm:
    """``q k`` on the first line, then the k(k+1)/2 coefficients a_ij (i <= j, lexicographic)."""
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines:
        raise ParseError("empty form file")
    head = lines[0].split()
    if len(head) != 2:
        raise ParseError("header must be 'q k'")
    try:
        q, k = (int(t) for t in head)
        coeffs = [int(t) for ln in lines[1:] for t in ln.split()]
    except ValueError as exc:
        raise ParseError("non-integer token") from exc
    ctx = field_new(q)
    if k < 0:
        raise ParseError("k must be >= 0")
    if len(coeffs) != n_monomials(k):
        raise ParseError(f"expected {n_monomials(k)} coefficients, found {len(coeffs)}")
    for v in coeffs:
        if not 0 <= v < q:
            raise ParseError(f"coefficient {v} is not an element of F_{q}")
    return QuadraticForm(ctx, k, tuple(coeffs))


def read_form_file(path: str | Path) -> QuadraticForm:
    return parse_form(Path(path).read_text(encoding="ascii"))


# --- output -----------------------------------------------------------------

def _flat_csv(payload: dict) -> str:
    lines = ["name,value"]
    for k in sorted(payload):
        v = payload[k]
        lines.append(f"{k},{json.dumps(v) if isinstance(v, (list, dict)) else _csv_scalar(v)}")
    return "\n".join(lines) + "\n"


def _csv_scalar(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    return str(v)


def _emit(args, payload: dict, text: str, csv: str | None = None) -> None:
    fmt = args.format
    if fmt == "json":
        out = json.dumps(payload, sort_keys=True, indent=2) + "\n"
    elif fmt == "csv":
        out = csv if csv is not None else _flat_csv(payload)
    else:
        out = text
    if args.out:
        Path(args.out).write_text(out)
    else:
        sys.stdout.write(out)


def _emit_report(args, rep: ExperimentReport) -> None:
    fmt = args.format
    if fmt == "json":
        out = rep.to_json(include_elapsed=args.timing)
    elif fmt == "csv":
        out = rep.to_csv()
    else:
        out = rep.to_text()
    if args.out:
        Path(args.out).write_text(out)
    else:
        sys.stdout.write(out)


# --- subcommands --------------------------------------------------------------

def cmd_square(args) -> int:
    C = read_code_file(args.input)
    d = square_dim(C)
    expected = square_bound(C.n, C.k)
    payload = {"q": C.ctx.q, "n": C.n, "k": C.k, "dim_square": d, "expected": expected, "deficiency": expected - d}
    _emit(args, payload, f"dim C^2 = {d} (generic {expected}, deficiency {expected - d})\n")
    return 0


def cmd_power(args) -> int:
    C = read_code_file(args.input)
    P = schur_power(C, args.d)
    payload = {"q": C.ctx.q, "n": C.n, "k": C.k, "d": args.d, "dim_power": P.k}
    if args.code_out:
        Path(args.code_out).write_text(format_code(P))
    _emit(args, payload, f"dim C^{args.d} = {P.k}\n")
    return 0


def cmd_zeros(args) -> int:
    Q = read_form_file(args.input)
    closed = zero_count_closed(Q)
    brute = zero_count_brute(Q, max_enum=args.max_enum)
    payload = {"q": Q.ctx.q, "k": Q.k, "rank": qf_rank(Q), "zeros_closed": closed, "zeros_brute": brute,
               "match": closed == brute}
    _emit(args, payload, f"rank {payload['rank']}: closed {closed}, brute {brute}, match {str(closed == brute).lower()}\n")
    return 0


def cmd_census(args) -> int:
    ctx = field_new(args.q)
    brute = census_brute(ctx, args.k, max_enum=args.max_enum)
    formula = census_formula(args.k, args.q)
    rows = [
        {"q": args.q, "k": args.k, "r": r, "count_formula": formula.counts[r], "count_brute": brute.counts[r],
         "match": formula.counts[r] == brute.counts[r]}
        for r in range(args.k + 1)
    ]
    csv = ["q,k,r,count_formula,count_brute,match"]
    csv += [f"{x['q']},{x['k']},{x['r']},{x['count_formula']},{x['count_brute']},{str(x['match']).lower()}" for x in rows]
    csv_text = "\n".join(csv) + "\n"
    _emit(args, {"rows": rows}, csv_text, csv_text)
    return 0


def cmd_decompose(args) -> int:
    Q = read_form_file(args.input)
    D = decompose(Q)
    payload = {
        "q": Q.ctx.q, "k": Q.k, "rank": qf_rank(Q),
        "radical": [list(v) for v in D.radical],
        "pairs": [[list(a), list(b)] for a, b in D.pairs],
        "residual": [list(v) for v in D.residual],
    }
    text = [f"rank {payload['rank']}"]
    text += [f"radical {' '.join(map(str, v))}" for v in D.radical]
    text += [f"pair {' '.join(map(str, a))} | {' '.join(map(str, b))}" for a, b in D.pairs]
    text += [f"residual {' '.join(map(str, v))}" for v in D.residual]
    _emit(args, payload, "\n".join(text) + "\n")
    return 0


def cmd_expect(args) -> int:
    E = exact_expectation(args.q, args.k, zero_counter="brute" if args.brute else "closed", max_enum=args.max_enum)
    v = E.value
    _emit(args, E.as_dict(), f"{v.numerator}/{v.denominator} = {E.decimal()}\n")
    return 0


def _resolve_n(args) -> int:
    m = n_monomials(args.k)
    if (args.n is None) == (args.t is None):
        raise InputError("give exactly one of --n and --t")
    n = args.n if args.n is not None else m - args.t
    if n < args.k:
        raise InputError(f"need n >= k, got n={n}")
    return n


def cmd_mc_square(args) -> int:
    _emit_report(args, mc_square_full(args.q, args.k, _resolve_n(args), args.model, args.trials, args.seed))
    return 0


def cmd_mc_kernel(args) -> int:
    n = args.n if args.n is not None else n_monomials(args.k)
    _emit_report(args, mc_kernel_size(args.q, args.k, n, args.model, args.trials, args.seed))
    return 0


def cmd_mc_dim(args) -> int:
    _emit_report(args, mc_dim_at_large_n(args.q, args.k, args.s, args.trials, args.seed, args.model, args.max_enum))
    return 0


def cmd_mc_dual(args) -> int:
    rep = mc_dual_distance(args.q, args.k, args.trials, args.seed, n=args.n, delta=args.delta, model=args.model,
                           max_enum=args.max_enum)
    _emit_report(args, rep)
    return 0


def cmd_mc_models(args) -> int:
    _emit_report(args, mc_model_compare(args.q, args.k, args.n, args.trials, args.seed))
    return 0


def cmd_distinguish(args) -> int:
    C = read_code_file(args.input)
    rep = distinguish(C, args.threshold)
    d = rep.as_dict()
    d["q"] = C.ctx.q
    _emit(args, d, f"{rep.verdict}: dim C^2 = {rep.dim_square}, generic {rep.expected}, deficiency {rep.deficiency}\n")
    return 0


def cmd_rs(args) -> int:
    C = rs_code(field_new(args.q), args.n, args.k)
    text = format_code(C)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


# --- parser -------------------------------------------------------------------

def _positive(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from None
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _nonneg(s: str) -> int:
    try:
        v = int(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {s!r}") from None
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be >= 0, got {v}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sqcodes", description="Squares of random codes and quadratic forms over finite fields.")
    p.add_argument("--version", action="version", version=f"sqcodes {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def add(name, func, help_, budget=None):
        sp = sub.add_parser(name, help=help_, description=help_)
        sp.set_defaults(func=func)
        sp.add_argument("--format", choices=FORMATS, default="text", help="output format (default: text)")
        sp.add_argument("--out", help="write output to this file instead of stdout")
        if budget is not None:
            sp.add_argument("--max-enum", type=_positive, default=budget,
                            help=f"enumeration cap (default: {budget})")
        return sp

    def qk(sp, k_required=True):
        sp.add_argument("--q", type=_positive, required=True, help="field size (prime power <= 65536)")
        sp.add_argument("--k", type=_positive, required=k_required, help="code dimension / number of variables")

    def mc(sp, default_trials=1000):
        sp.add_argument("--trials", type=_positive, default=default_trials, help=f"number of trials (default: {default_trials})")
        sp.add_argument("--seed", type=int, default=0, help="master seed (default: 0)")
        sp.add_argument("--timing", action="store_true", help="include elapsed_s in JSON output")

    def model(sp):
        sp.add_argument("--model", choices=[m.value for m in SamplerModel], default=SamplerModel.SystematicC.value,
                        help="random code model (default: systematic)")

    sp = add("square", cmd_square, "dimension of the square of a code read from a file")
    sp.add_argument("--in", dest="input", required=True, help="code file")

    sp = add("power", cmd_power, "dimension of the d-th Schur power of a code")
    sp.add_argument("--in", dest="input", required=True, help="code file")
    sp.add_argument("--d", type=_positive, required=True, help="exponent d >= 1")
    sp.add_argument("--code-out", help="also write the power code to this file")

    sp = add("zeros", cmd_zeros, "zero count of a quadratic form, closed form vs enumeration", ZERO_COUNT_BUDGET)
    sp.add_argument("--in", dest="input", required=True, help="form file: 'q k' then the coefficients")

    sp = add("census", cmd_census, "rank census of all forms on F_q^k, formula vs enumeration", CENSUS_BUDGET)
    qk(sp)
    sp.set_defaults(format="csv")

    sp = add("decompose", cmd_decompose, "orthogonal decomposition of a quadratic form")
    sp.add_argument("--in", dest="input", required=True, help="form file")

    sp = add("expect", cmd_expect, "exact expected kernel size at n = k(k+1)/2", EXPECTATION_BUDGET)
    qk(sp)
    sp.add_argument("--brute", action="store_true", help="use enumerated zero counts instead of closed forms")

    sp = add("mc-square", cmd_mc_square, "Monte-Carlo probability that the square fills F_q^n")
    qk(sp)
    sp.add_argument("--n", type=_positive, help="code length")
    sp.add_argument("--t", type=int, help="alternative to --n: n = k(k+1)/2 - t")
    model(sp)
    mc(sp)

    sp = add("mc-kernel", cmd_mc_kernel, "Monte-Carlo mean of |ker ev_C| (default n = k(k+1)/2)")
    qk(sp)
    sp.add_argument("--n", type=_positive, help="code length (default k(k+1)/2)")
    model(sp)
    mc(sp)

    sp = add("mc-dim", cmd_mc_dim, "Pr(dim C^2 = k(k+1)/2) at n = k(k+1)/2 + s, with the analytic bound", 1 << 16)
    qk(sp)
    sp.add_argument("--s", type=_nonneg, required=True, help="excess length s >= 0")
    model(sp)
    mc(sp)

    sp = add("mc-dual", cmd_mc_dual, "minimum distance of the dual of the square", DUAL_BUDGET)
    qk(sp)
    sp.add_argument("--n", type=_positive, help="code length (default k(k+1)/2)")
    sp.add_argument("--delta", type=float, default=0.1, help="report the fraction with d <= delta*n (default: 0.1)")
    model(sp)
    mc(sp, 200)

    sp = add("mc-models", cmd_mc_models, "compare the systematic, matrix and uniform code models")
    qk(sp)
    sp.add_argument("--n", type=_positive, required=True, help="code length")
    mc(sp)

    sp = add("distinguish", cmd_distinguish, "square-dimension distinguisher on a code file")
    sp.add_argument("--in", dest="input", required=True, help="code file")
    sp.add_argument("--threshold", type=_positive, default=1, help="minimum deficiency flagged structured (default: 1)")

    sp = add("rs", cmd_rs, "write a Reed-Solomon code file (evaluation points 0..n-1)")
    qk(sp)
    sp.add_argument("--n", type=_positive, required=True, help="code length")
    return p


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        print(f"BudgetExceeded: {exc}", file=sys.stderr)
        return 2
    except (SqcodesError, ValueError, ZeroDivisionError) as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"{type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
