"""Command-line entry point: ``takagi <subcommand> ...`` or ``python3 -m takagi``.

Every subcommand writes one document to stdout (or ``--output``), JSON by
default. JSON documents carry ``"schema": "1"`` and write exact rationals as
``{"num": "...", "den": "..."}`` with decimal-string parts.

CSV columns
-----------
eval       point, radix, mode, lo_num, lo_den, hi_num, hi_den
classify   point, side, result, certified, detail
signs      n, digit, sign, partial_sum
criterion  anchor, sum_part, gap, value
probe      level, target_num, target_den, h_lo, h_hi, q_lo, q_hi  (floats)
fractal enum     word, value_num, value_den
fractal ifs      lo_num, lo_den, hi_num, hi_den
fractal dims     n, radix, sign, count, exact_ratio, lemma_bound
fractal boxdim   m, count  (slope in the JSON form only)
fractal witness  point, address
sample     statistic, value

Errors: exit 2 for bad input, with a one-line JSON object on stderr; exit 1
when a computational cap is hit. ``TAKAGI_THREADS`` sets the default worker
count for ``sample``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import derivatives as dv
from . import fractal as fr
from .digits import as_stream, classify_point, format_point
from .errors import CapError, PointError, TakagiError
from .series import Enclosure, eval_exact, eval_partial

SCHEMA = "1"
THREADS_ENV = "TAKAGI_THREADS"


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _rat(x) -> dict:
    x = Fraction(x)
    return {"num": str(x.numerator), "den": str(x.denominator)}


def _enc(e: Enclosure) -> dict:
    return {"lo": _rat(e.lo), "hi": _rat(e.hi),
            "lo_float": float(e.lo), "hi_float": float(e.hi)}


def _verdict(v: dv.Verdict) -> dict:
    c = v.certainty
    out = {"side": v.side.value, "result": v.result.value, "certified": v.certified}
    if v.certified:
        out.update(reason=c.reason, drift=c.drift, period=c.period)
    else:
        out.update(depth=c.depth, criterion=c.criterion,
                   tail_window_min=c.tail_window_min, tail_window_max=c.tail_window_max)
    return out


def _threads() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        n = int(raw)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}")
    if n < 1:
        raise UsageError(f"{THREADS_ENV} must be >= 1")
    return n


def _positive(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not an integer: {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be >= 1, got {v}")
    return v


def _radix(text: str) -> int:
    v = _positive(text)
    if v < 2:
        raise argparse.ArgumentTypeError("radix must be >= 2")
    return v


def _int_list(text: str) -> list[int]:
    try:
        return [int(t) for t in text.split(",") if t]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")


def _point(args):
    return as_stream(args.point, args.radix)


# ------------------------------------------------------------- subcommands

def cmd_eval(args):
    s = _point(args)
    r = s.radix
    if args.depth is None:
        if not s.is_periodic:
            raise UsageError("--exact needs a rational point; give --depth N")
        v = eval_exact(s.value(), r)
        enc = Enclosure.point(v)
        doc = {"mode": "exact", "value": _rat(v), "value_float": float(v)}
    else:
        enc = eval_partial(s if not s.is_periodic else s.value(), r, args.depth)
        doc = {"mode": "partial", "N": args.depth, "enclosure": _enc(enc)}
    rows = [[format_point(s), r, doc["mode"], enc.lo.numerator, enc.lo.denominator,
             enc.hi.numerator, enc.hi.denominator]]
    return doc, ["point", "radix", "mode", "lo_num", "lo_den", "hi_num", "hi_den"], rows


def cmd_classify(args):
    s = _point(args)
    cls = classify_point(s)
    if args.heuristic or dv.to_periodic(s) is None and cls.value == "Generic":
        left, right = dv.heuristic_verdict(s, args.depth)
    else:
        left, right = dv.certify(s)
    doc = {"class": cls.value, "left": _verdict(left), "right": _verdict(right)}
    rows = []
    for v in (left, right):
        d = _verdict(v)
        detail = (f"drift={d['drift']},period={d['period']}" if v.certified
                  else f"depth={d['depth']},min={d['tail_window_min']!r},"
                       f"max={d['tail_window_max']!r}")
        rows.append([format_point(s), v.side.value, v.result.value, v.certified, detail])
    return doc, ["point", "side", "result", "certified", "detail"], rows


def cmd_signs(args):
    s = _point(args)
    tr = dv.deriv_signs(s, args.count)
    digits = list(s.digits(args.count))
    signs = tr.signs.tolist()
    sums = tr.partial_sums.tolist()
    doc = {"N": tr.N, "S": tr.S, "O": tr.O, "I": tr.I, "digits": digits,
           "signs": signs, "partial_sums": sums}
    rows = [[n + 1, digits[n], signs[n], sums[n]] for n in range(tr.N)]
    return doc, ["n", "digit", "sign", "partial_sum"], rows


def cmd_criterion(args):
    s = _point(args)
    terms = dv.criterion_sequence(s, args.side, args.sign, args.count)
    doc = {"side": args.side, "sign": args.sign,
           "terms": [{"anchor": t.anchor, "sum_part": t.sum_part, "gap": t.gap,
                      "value": t.value} for t in terms]}
    rows = [[t.anchor, t.sum_part, t.gap, repr(t.value)] for t in terms]
    return doc, ["anchor", "sum_part", "gap", "value"], rows


def cmd_probe(args):
    s = _point(args)
    steps = dv.quotient_probe(s, args.side, args.steps)
    doc = {"side": args.side,
           "steps": [{"level": p.level, "target": _rat(p.target), "h": _enc(p.h),
                      "quotient": _enc(p.quotient)} for p in steps]}
    rows = [[p.level, p.target.numerator, p.target.denominator, repr(float(p.h.lo)),
             repr(float(p.h.hi)), repr(float(p.quotient.lo)), repr(float(p.quotient.hi))]
            for p in steps]
    return doc, ["level", "target_num", "target_den", "h_lo", "h_hi", "q_lo", "q_hi"], rows


def _interval_rows(iset: fr.IntervalSet):
    return iset.endpoint_rows()


def cmd_fractal(args):
    r, n, sign = args.radix, args.n, args.sign
    doc, header, rows = _fractal_action(args, r, n, sign)
    return {"action": args.action, "sign": sign, **doc}, header, rows


def _fractal_action(args, r, n, sign):
    if args.action == "enum":
        ws = fr.enum_B(n, r, sign)
        vals = ws.values()
        doc = {"n": n, "count": len(ws), "words": ws.strings(),
               "values": [_rat(Fraction(v, r**n)) for v in vals]}
        rows = [[w, Fraction(v, r**n).numerator, Fraction(v, r**n).denominator]
                for w, v in zip(ws.strings(), vals)]
        return doc, ["word", "value_num", "value_den"], rows
    if args.action == "ifs":
        iset = fr.ifs_approx(n, r, sign, args.K)
        rows = _interval_rows(iset)
        doc = {"n": n, "K": args.K, "count": len(iset), "length": _rat(iset.length),
               "intervals": [{"lo": {"num": str(a), "den": str(b)},
                              "hi": {"num": str(c), "den": str(d)}} for a, b, c, d in rows]}
        return doc, ["lo_num", "lo_den", "hi_num", "hi_den"], rows
    if args.action == "dims":
        b = fr.dim_bounds(n, r, sign)
        doc = {"n": n, "count": b.count, "exact_ratio": b.exact_ratio,
               "lemma_bound": b.lemma_bound}
        return doc, ["n", "radix", "sign", "count", "exact_ratio", "lemma_bound"], \
            [[n, r, sign, b.count, repr(b.exact_ratio), repr(b.lemma_bound)]]
    if args.action == "boxdim":
        iset = fr.ifs_approx(n, r, sign, args.K)
        m_list = args.m or [n * k for k in range(1, args.K + 1)]
        counts = fr.box_counts(iset, m_list)
        slope = fr.box_count_dim(iset, m_list)
        doc = {"n": n, "K": args.K, "m": m_list, "counts": counts, "slope": slope,
               "exact_ratio": fr.dim_bounds(n, r, sign).exact_ratio}
        return doc, ["m", "count"], [[m, c] for m, c in zip(m_list, counts)]
    if args.action == "witness":
        if not args.address:
            raise UsageError("witness needs --address")
        s = fr.membership_witness(n, r, sign, args.address.split(","))
        left, right = dv.certify(s)
        doc = {"n": n, "point": format_point(s), "left": _verdict(left),
               "right": _verdict(right)}
        return doc, ["point", "address"], [[format_point(s), args.address]]
    raise UsageError(f"unknown fractal action {args.action!r}")


def cmd_sample(args):
    stats = fr.sample_null_measure(args.radix, args.N, args.samples, args.seed,
                                   workers=_threads())
    doc = {k: v for k, v in stats.items() if k != "r"}
    doc["tails"] = {str(c): v for c, v in stats["tails"].items()}
    doc["generator"] = "splitmix64, seed ^ index, digit = output mod r"
    rows = [["mean", repr(stats["mean"])], ["variance", repr(stats["variance"])]]
    rows += [[f"tail_{c}", repr(v)] for c, v in stats["tails"].items()]
    return doc, ["statistic", "value"], rows


# ----------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="takagi", description=__doc__.split("\n\n")[0],
                formatter_class=argparse.RawDescriptionHelpFormatter,
                epilog=__doc__.split("\n\n", 1)[1])
    common = _Parser(add_help=False)
    common.add_argument("--format", choices=["json", "csv"], default="json")
    common.add_argument("--output", "-o", help="write to this file instead of stdout")
    pointed = _Parser(add_help=False, parents=[common])
    pointed.add_argument("--radix", "-r", type=_radix,
                         help="radix (optional when the point spells its own)")
    pointed.add_argument("--point", "-p", required=True,
                         help='"p/q", "0.<pre>(<period>)_r" or "sparse:b=,on=,off="')
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    e = sub.add_parser("eval", parents=[pointed], help="value of f_r at a point")
    mode = e.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true", help="exact rational value (default)")
    mode.add_argument("--depth", type=_positive, help="enclosure from the first N terms")
    e.set_defaults(func=cmd_eval)

    c = sub.add_parser("classify", parents=[pointed], help="one-sided derivative verdicts")
    c.add_argument("--depth", type=_positive, default=4,
                   help="heuristic horizon 10**depth (non-periodic points)")
    c.add_argument("--heuristic", action="store_true",
                   help="use the finite-depth trend test even when certifiable")
    c.set_defaults(func=cmd_classify)

    s = sub.add_parser("signs", parents=[pointed], help="derivative signs g'_n")
    s.add_argument("--count", "-n", type=_positive, default=40)
    s.set_defaults(func=cmd_signs)

    k = sub.add_parser("criterion", parents=[pointed], help="criterion terms")
    k.add_argument("--side", choices=["Left", "Right"], required=True)
    k.add_argument("--sign", choices=["Plus", "Minus"], required=True)
    k.add_argument("--count", "-n", type=_positive, default=20)
    k.set_defaults(func=cmd_criterion)

    q = sub.add_parser("probe", parents=[pointed], help="difference quotients on grid ladders")
    q.add_argument("--side", choices=["Left", "Right"], required=True)
    q.add_argument("--steps", type=_positive, default=16)
    q.set_defaults(func=cmd_probe)

    f = sub.add_parser("fractal", parents=[common], help="digit alphabets and attractors")
    f.add_argument("action", choices=["enum", "ifs", "dims", "boxdim", "witness"])
    f.add_argument("--radix", "-r", type=_radix, required=True)
    f.add_argument("--n", type=_positive, default=3, help="block length (odd, >= 3)")
    f.add_argument("--sign", choices=["Plus", "Minus"], default="Plus")
    f.add_argument("--K", type=_positive, default=1, help="IFS depth")
    f.add_argument("--m", type=_int_list, help="grid exponents for boxdim, e.g. 3,6,9")
    f.add_argument("--address", help="comma-separated block words for witness")
    f.set_defaults(func=cmd_fractal)

    m = sub.add_parser("sample", parents=[common], help="Monte Carlo statistics of S_N")
    m.add_argument("--radix", "-r", type=_radix, required=True)
    m.add_argument("--N", type=_positive, default=400)
    m.add_argument("--samples", type=_positive, default=10**5)
    m.add_argument("--seed", type=int, default=1)
    m.set_defaults(func=cmd_sample)
    return p


def _render(args, doc, header, rows) -> str:
    if args.format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)
        return buf.getvalue()
    head = {"schema": SCHEMA, "command": args.command}
    if getattr(args, "point", None) is not None:
        s = _point(args)
        head["point"] = format_point(s)
        head["radix"] = s.radix
    elif getattr(args, "radix", None) is not None:
        head["radix"] = args.radix
    head.update(doc)
    return json.dumps(head, indent=2) + "\n"


def _fail(kind: str, message: str, code: int) -> int:
    print(json.dumps({"schema": SCHEMA, "error": kind, "message": message}), file=sys.stderr)
    return code


def main(argv: Optional[Sequence[str]] = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        doc, header, rows = args.func(args)
        text = _render(args, doc, header, rows)
    except UsageError as exc:
        return _fail("usage", str(exc), 2)
    except CapError as exc:
        return _fail(type(exc).__name__, str(exc), 1)
    except (PointError, TakagiError, ValueError) as exc:
        return _fail(type(exc).__name__, str(exc), 2)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return 0


if __name__ == "__main__":
    sys.exit(main())
