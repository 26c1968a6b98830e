"""Command-line front end.

Every subcommand writes JSON (CSV for ``sweep`` and optionally ``verify``) to
``--out`` (``-`` for stdout).  Exit codes: 0 success, 2 violations found,
3 cap exceeded, 64 bad flags, 66 unreadable input.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from fractions import Fraction

from . import exact
from .core import (BooleanFunction, CapError, FormatError, fmt_input, named_function,
                   parse_function, random_function)

EXIT_OK, EXIT_VIOLATION, EXIT_CAP, EXIT_USAGE, EXIT_NOINPUT = 0, 2, 3, 64, 66

# largest arity each command is tested at; --cap-n may raise it with a warning
TESTED_CAPS = {"measure": 12, "sweep": 10, "hindex": 12, "sculpt": 14, "shatter": 16,
               "run": 8, "oracle": 3}


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        sys.stderr.write(f"{self.prog}: error: {message}\n")
        raise SystemExit(EXIT_USAGE)


def _common(p: argparse.ArgumentParser, inp: bool = True) -> None:
    if inp:
        p.add_argument("--in", dest="inp", metavar="PATH", help="input function file")
        p.add_argument("--format", choices=["bf", "json"], default=None,
                       help="input format (default: from the extension, else bf)")
    p.add_argument("--out", default="-", metavar="PATH", help="output path, - for stdout")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--trials", type=int, default=1)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--cap-n", type=int, default=None, help="override the arity cap")
    p.add_argument("--dry-run", action="store_true", help="validate and print the plan only")


def build_parser() -> argparse.ArgumentParser:
    ap = _Parser(prog="querysculpt", description="Exact query-complexity measures, "
                 "query algorithms, promise constructions and verification suites.")
    sub = ap.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("measure", help="all measures of one function")
    _common(p)
    p.add_argument("--no-d", action="store_true", help="skip the decision-tree depth")

    p = sub.add_parser("sweep", help="CSV of measures over a family")
    _common(p, inp=False)
    p.add_argument("--family", required=True,
                   help="all:N | random:N:COUNT | named:NAME:N (comma-separate several)")
    p.add_argument("--no-d", action="store_true")

    p = sub.add_parser("hindex", help="H-index of a per-input measure")
    _common(p)
    p.add_argument("--selector", default="C", help="C, bs, RC, sqrtC, Csquared or scaled:NAME:FACTOR")

    p = sub.add_parser("sculpt", help="promise constructions")
    p.add_argument("kind", choices=["r0r", "gadget"])
    _common(p)
    p.add_argument("--gadget", metavar="PATH", help="gadget function file (sculpt gadget)")
    p.add_argument("--rc-threshold", default=None, help="RC class threshold (sculpt gadget)")
    p.add_argument("--parameters", action="store_true", help="report the default gadget parameters")

    p = sub.add_parser("shatter", help="shattered index set of a string collection")
    _common(p)
    p.add_argument("--size", type=int, default=None, help="requested size (default: guaranteed size)")
    p.add_argument("--max", action="store_true", help="also compute the largest shattered size")

    p = sub.add_parser("run", help="run a query algorithm")
    p.add_argument("algorithm", choices=["majority", "deterministic", "probe", "hybrid", "tree-chain"])
    _common(p)
    p.add_argument("--input", default=None, help="one input as a bit string (x_n ... x_1)")
    p.add_argument("--transcripts", action="store_true", help="include every transcript")

    p = sub.add_parser("oracle", help="brute-force oracles at n <= 3")
    p.add_argument("kind", choices=["r", "r0", "rc"])
    _common(p)
    p.add_argument("--input", default=None, help="input for rc (default: all inputs)")

    p = sub.add_parser("gadget", help="hard gadget constructions")
    p.add_argument("kind", choices=["eq", "vis"])
    _common(p, inp=False)
    p.add_argument("--n", type=int, default=None)
    p.add_argument("--b", type=int, default=8, help="precision bits (vis)")
    p.add_argument("--side", choices=["in-H", "in-H-perp", "both"], default="both")
    p.add_argument("--show-instance", action="store_true")

    p = sub.add_parser("verify", help="run a verification suite")
    p.add_argument("suite", help="suite name, or 'list'")
    _common(p, inp=False)
    p.add_argument("--param", action="append", default=[], metavar="K=V",
                   help="suite parameter override (repeatable)")
    p.add_argument("--csv", action="store_true", help="CSV report instead of JSON")
    return ap


# -- helpers -----------------------------------------------------------------------------

def _read_text(path: str) -> str:
    if path is None:
        raise UsageError("--in is required")
    try:
        if path == "-":
            return sys.stdin.read()
        with open(path, encoding="utf-8") as fh:
            return fh.read()
    except OSError as e:
        raise InputError(f"cannot read {path}: {e.strerror}") from None


def _load_function(path: str, fmt: str | None) -> BooleanFunction:
    text = _read_text(path)
    if fmt is None:
        fmt = "json" if path.endswith(".json") else "bf"
    try:
        return parse_function(text, fmt)
    except FormatError as e:
        raise InputError(f"{path}: {e}") from None


def _cap(args, command: str, n: int) -> None:
    tested = TESTED_CAPS[command]
    cap = tested if args.cap_n is None else args.cap_n
    if args.cap_n is not None and args.cap_n > tested:
        sys.stderr.write(f"warning: --cap-n {args.cap_n} exceeds the tested range "
                         f"n <= {tested} for '{command}'\n")
    if n > cap:
        raise CapError(f"n = {n} exceeds the cap {cap} for '{command}' (use --cap-n)")


def _emit(args, text: str) -> None:
    if args.out == "-":
        sys.stdout.write(text)
        return
    try:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text)
    except OSError as e:
        raise InputError(f"cannot write {args.out}: {e.strerror}") from None


def _json(obj) -> str:
    return json.dumps(obj, indent=2, default=_default) + "\n"


def _default(o):
    if isinstance(o, Fraction):
        return f"{o.numerator}/{o.denominator}"
    return exact.render(o)


def _parse_input(text: str, n: int) -> int:
    if len(text) != n or set(text) - set("01"):
        raise UsageError(f"--input must be {n} characters from {{0,1}}")
    return int(text, 2)


def _plan(args, **extra) -> str:
    d = {"command": args.command, "dry_run": True}
    d.update({k: v for k, v in vars(args).items() if k not in ("command", "dry_run")})
    d.update(extra)
    return _json(d)


# -- commands ----------------------------------------------------------------------------

def cmd_measure(args) -> int:
    from .measures import measure_report

    f = _load_function(args.inp, args.format)
    _cap(args, "measure", f.n)
    if args.dry_run:
        _emit(args, _plan(args, n=f.n, domain_size=len(f.points())))
        return EXIT_OK
    rep = measure_report(f, with_d=not args.no_d)
    _emit(args, rep.to_json())
    return EXIT_OK


def _family(text: str):
    """Yield (function_id, function) for a family description."""
    from .core import all_total_functions

    for part in text.split(","):
        bits = part.split(":")
        try:
            if bits[0] == "all" and len(bits) == 2:
                n = int(bits[1])
                for f in all_total_functions(n):
                    yield f"all{n}:{f.values:x}", f
            elif bits[0] == "random" and len(bits) in (3, 4):
                n, count = int(bits[1]), int(bits[2])
                seed = int(bits[3]) if len(bits) == 4 else 0
                for i in range(count):
                    yield f"random{n}:{seed}:{i}", random_function(n, seed=[seed, i])
            elif bits[0] == "named" and len(bits) == 3:
                yield f"{bits[1].upper()}_{bits[2]}", named_function(bits[1], int(bits[2]))
            else:
                raise ValueError
        except ValueError:
            raise UsageError(f"bad family {part!r}") from None


def _sweep_rows(items, with_d):
    from .measures import measure_report

    return [measure_report(f, with_d=with_d).csv_row(fid) for fid, f in items]


def cmd_sweep(args) -> int:
    from concurrent.futures import ProcessPoolExecutor

    from .measures import CSV_HEADER

    items = list(_family(args.family))
    for _, f in items:
        _cap(args, "sweep", f.n)
    if args.dry_run:
        _emit(args, _plan(args, functions=len(items)))
        return EXIT_OK
    with_d = not args.no_d
    if args.jobs > 1 and len(items) > 1:
        size = -(-len(items) // args.jobs)
        chunks = [items[i:i + size] for i in range(0, len(items), size)]
        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            parts = list(pool.map(_sweep_rows, chunks, [with_d] * len(chunks)))
        rows = [r for part in parts for r in part]
    else:
        rows = _sweep_rows(items, with_d)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    w.writerows(rows)
    _emit(args, buf.getvalue())
    return EXIT_OK


def cmd_hindex(args) -> int:
    from .measures import h_index, parse_factor, parse_selector, selector_values

    f = _load_function(args.inp, args.format)
    _cap(args, "hindex", f.n)
    try:
        sel = parse_selector(args.selector)
        if isinstance(sel, tuple):
            kind, name, factor = sel
            if isinstance(factor, tuple):
                factor = parse_factor(args.selector.split(":")[2], f.n)
            sel = (kind, name, factor)
            if name not in ("C", "bs", "RC"):
                raise ValueError
        elif sel not in ("C", "bs", "RC", "sqrtC", "Csquared"):
            raise ValueError
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad selector {args.selector!r}") from None
    if args.dry_run:
        _emit(args, _plan(args, n=f.n))
        return EXIT_OK
    h = h_index(selector_values(sel, f))
    _emit(args, _json({"selector": args.selector, "n": f.n, "value": exact.to_float(h),
                       "exact": exact.render(h)}))
    return EXIT_OK


def cmd_sculpt(args) -> int:
    from .sculpt import SculptRefused, gadget_parameters, sculpt_r0_vs_r, sculpt_via_gadget

    f = _load_function(args.inp, args.format)
    _cap(args, "sculpt", f.n)
    if args.kind == "r0r":
        if args.dry_run:
            _emit(args, _plan(args, n=f.n))
            return EXIT_OK
        res = sculpt_r0_vs_r(f)
        _emit(args, res.to_json())
        return EXIT_OK if res.ok else EXIT_VIOLATION
    if args.parameters:
        if args.dry_run:
            _emit(args, _plan(args, n=f.n))
            return EXIT_OK
        _emit(args, _json(gadget_parameters(f).to_dict()))
        return EXIT_OK
    if args.gadget is None or args.rc_threshold is None:
        raise UsageError("sculpt gadget needs --gadget and --rc-threshold")
    g = _load_function(args.gadget, None)
    try:
        thr = Fraction(args.rc_threshold)
    except (ValueError, ZeroDivisionError):
        raise UsageError(f"bad --rc-threshold {args.rc_threshold!r}") from None
    if args.dry_run:
        _emit(args, _plan(args, n=f.n, gadget_arity=g.n))
        return EXIT_OK
    try:
        res = sculpt_via_gadget(f, g, thr)
    except SculptRefused as e:
        _emit(args, _json({"refused": True, "reason": str(e)}))
        return EXIT_VIOLATION
    _emit(args, res.to_json())
    return EXIT_OK if res.ok else EXIT_VIOLATION


def _load_strings(path: str) -> tuple[int, list[int]]:
    lines = [ln.strip() for ln in _read_text(path).splitlines() if ln.strip()]
    if not lines:
        raise InputError(f"{path}: no strings")
    n = len(lines[0])
    for ln in lines:
        if len(ln) != n or set(ln) - set("01"):
            raise InputError(f"{path}: every line must be a {n}-character 0/1 string")
    return n, [int(ln, 2) for ln in lines]


def cmd_shatter(args) -> int:
    from .shattering import (GuaranteeViolated, NoShatteredSet, find_shattered_set,
                             guaranteed_size, max_shattered_size)

    n, S = _load_strings(args.inp)
    _cap(args, "shatter", n)
    if args.dry_run:
        _emit(args, _plan(args, n=n, strings=len(set(S)), guaranteed=guaranteed_size(len(set(S)), n)))
        return EXIT_OK
    try:
        w = find_shattered_set(S, n, target_size=args.size)
    except NoShatteredSet as e:
        _emit(args, _json({"found": False, "reason": str(e)}))
        return EXIT_VIOLATION
    except GuaranteeViolated as e:
        _emit(args, _json({"found": False, "reason": str(e)}))
        return EXIT_VIOLATION
    d = w.to_dict()
    d["guaranteed_size"] = guaranteed_size(len(set(S)), n)
    if args.max:
        d["max_shattered_size"] = max_shattered_size(S, n)
    _emit(args, _json(d))
    return EXIT_OK


def _runner(name: str, f: BooleanFunction):
    from . import algorithms as al

    if name == "majority":
        m = al.MajorityEliminator(f)
        return lambda x, seed: m.run(x, seed)
    if name == "deterministic":
        d = al.DeterministicEliminator(f)
        return lambda x, seed: d.run(x)
    if name == "probe":
        p = al.CertificateProbe(f)

        def probe(x, seed):
            r = p.run(x)
            return format(r.S, "x"), r.transcript
        return probe
    if name == "hybrid":
        h = al.HybridDecider(f)
        return lambda x, seed: h.run(x)
    t = al.TreeChainEliminator(f, seed=0)
    return lambda x, seed: t.run(x)


def cmd_run(args) -> int:
    f = _load_function(args.inp, args.format)
    _cap(args, "run", f.n)
    if args.algorithm == "tree-chain" and f.n > 3:
        raise CapError("tree-chain needs the zero-error oracle, n <= 3")
    inputs = [_parse_input(args.input, f.n)] if args.input else f.points()
    if args.trials < 1:
        raise UsageError("--trials must be positive")
    if args.dry_run:
        _emit(args, _plan(args, n=f.n, inputs=len(inputs)))
        return EXIT_OK
    try:
        run = _runner(args.algorithm, f)
    except ValueError as e:
        raise UsageError(str(e)) from None
    per_input = []
    wrong = 0
    for x in inputs:
        outs, queries, transcripts = [], [], []
        for t in range(args.trials):
            out, tr = run(x, args.seed + t)
            outs.append(out)
            queries.append(tr.total)
            if args.transcripts or (args.input and args.trials == 1):
                transcripts.append(tr.to_dict())
        entry = {"x": fmt_input(x, f.n), "trials": args.trials,
                 "mean_queries": str(Fraction(sum(queries), len(queries))),
                 "max_queries": max(queries)}
        if args.algorithm == "probe":
            entry["residual_hex"] = sorted(set(outs))
        elif f.in_domain(x):
            ok = sum(1 for o in outs if o == f(x))
            wrong += ok < len(outs) and args.algorithm != "majority"
            entry["correct"] = ok
        if transcripts:
            entry["transcripts"] = transcripts
        per_input.append(entry)
    _emit(args, _json({"algorithm": args.algorithm, "n": f.n, "seed": args.seed,
                       "inputs": per_input}))
    return EXIT_VIOLATION if wrong else EXIT_OK


def cmd_oracle(args) -> int:
    from . import oracles

    f = _load_function(args.inp, args.format)
    _cap(args, "oracle", f.n)
    if args.dry_run:
        _emit(args, _plan(args, n=f.n))
        return EXIT_OK
    if args.kind == "r":
        out = {"R": oracles.brute_force_R(f),
               "game_values": {q: oracles.brute_force_R(f, q) for q in range(f.n + 1)}}
    elif args.kind == "r0":
        val, support = oracles.brute_force_R0(f, support=True)
        out = {"R0": val, "support": [[repr(t), p] for t, p in support]}
    else:
        xs = [_parse_input(args.input, f.n)] if args.input else f.points()
        out = {"RC": {fmt_input(x, f.n): oracles.brute_force_rc(f, x) for x in xs}}
    out["n"] = f.n
    _emit(args, _json(out))
    return EXIT_OK


def cmd_gadget(args) -> int:
    from . import gadgets

    if args.kind == "eq":
        n = 8 if args.n is None else args.n
        if args.dry_run:
            _emit(args, _plan(args, n=n))
            return EXIT_OK
        _, inst = gadgets.build_double_equality(n, args.seed)
        res = gadgets.run_sampler_trials(inst, max(args.trials, 1), args.seed)
        out = {"n": n, "seed": args.seed, "min_distance": inst.min_distance,
               "code_length": inst.length, **res}
        if args.show_instance:
            out["instance"] = inst.to_dict()
        _emit(args, _json(out))
        return EXIT_VIOLATION if res["errors"] else EXIT_OK
    n = 16 if args.n is None else args.n
    if args.dry_run:
        _emit(args, _plan(args, n=n))
        return EXIT_OK
    sides = ["in-H", "in-H-perp"] if args.side == "both" else [args.side]
    out = {"n": n, "b": args.b, "seed": args.seed, "sides": {}}
    for side in sides:
        correct, fids, verdict = 0, [], None
        for t in range(max(args.trials, 1)):
            inst = gadgets.vis_build_instance(n, args.b, side, args.seed + t)
            bits, _ = inst.bob_bits()
            verdict = gadgets.vis_alice_decide(inst, bits)
            correct += verdict.verdict == side
            fids.append(gadgets.fidelity(inst))
        out["sides"][side] = {"instances": max(args.trials, 1), "correct": correct,
                              "min_fidelity": round(min(fids), 12),
                              "probability_queries": verdict.probability_queries,
                              "bit_queries": verdict.bit_queries,
                              "constant": verdict.constant}
    if args.show_instance:
        out["instance"] = gadgets.vis_build_instance(n, args.b, sides[0], args.seed).to_dict()
    _emit(args, _json(out))
    return EXIT_OK


def _suite_params(pairs):
    out = {}
    for item in pairs:
        if "=" not in item:
            raise UsageError(f"bad --param {item!r}")
        k, v = item.split("=", 1)
        try:
            out[k] = int(v)
        except ValueError:
            out[k] = v
    return out


def cmd_verify(args) -> int:
    from .verify import SUITES, list_suites, verify_suite

    if args.suite == "list":
        _emit(args, _json(list_suites()))
        return EXIT_OK
    if args.suite not in SUITES:
        raise UsageError(f"unknown suite {args.suite!r}")
    params = _suite_params(args.param)
    if args.dry_run:
        p = dict(SUITES[args.suite].defaults)
        p.update(params)
        _emit(args, _plan(args, params=p))
        return EXIT_OK
    rep = verify_suite(args.suite, params, jobs=args.jobs)
    _emit(args, rep.to_csv() if args.csv else rep.to_json())
    return rep.exit_code


COMMANDS = {"measure": cmd_measure, "sweep": cmd_sweep, "hindex": cmd_hindex, "sculpt": cmd_sculpt,
            "shatter": cmd_shatter, "run": cmd_run, "oracle": cmd_oracle, "gadget": cmd_gadget,
            "verify": cmd_verify}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return e.code if isinstance(e.code, int) else EXIT_USAGE
    if args.jobs < 1:
        sys.stderr.write("querysculpt: error: --jobs must be positive\n")
        return EXIT_USAGE
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        parser.print_usage(sys.stderr)
        sys.stderr.write(f"querysculpt: error: {e}\n")
        return EXIT_USAGE
    except InputError as e:
        sys.stderr.write(f"querysculpt: {e}\n")
        return EXIT_NOINPUT
    except CapError as e:
        sys.stderr.write(f"querysculpt: cap exceeded: {e}\n")
        return EXIT_CAP


if __name__ == "__main__":
    sys.exit(main())
