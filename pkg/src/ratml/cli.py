"""Command-line interface: ``ratml <subcommand> ...``.

Exit codes: 0 success, 2 usage, 3 I/O, 4 hypothesis violated, 5 decode error.
"""

from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction

from .algebra import BitVector, MatrixFormatError, read_matrix, write_matrix
from .channel_sim import default_workers, format_csv, read_spec, sweep
from .code import (BUILTINS, ENUMERATION_LIMIT, LinearCode, RandomCodeSpec, builtin, dual,
                   max_clean_order, min_distance, random_systematic_circulant)
from .decode import approx_ml_decode, bm_decode, ml_decode
from .errors import (ConfigError, DecodeError, HypothesisViolated, InvalidCode, InvalidEpsilon,
                     InvalidSpec, LengthMismatch, NotBchCode, PoleError, RatmlError, TooLarge)
from .rational_map import eigen_structure
from .taylor import truncated_map

EXIT_OK, EXIT_USAGE, EXIT_IO, EXIT_HYPOTHESIS, EXIT_DECODE = 0, 2, 3, 4, 5


class UsageError(Exception):
    pass


class InputError(Exception):
    pass


def load_code(source: str) -> LinearCode:
    """A builtin name or a matrix file.

    A file whose generator equals a builtin's is returned as that builtin,
    which restores structure (e.g. BCH) that the text format does not carry.
    """
    if source in BUILTINS:
        return builtin(source)
    try:
        G = read_matrix(source)
    except (OSError, MatrixFormatError) as exc:
        raise InputError(f"cannot read {source}: {exc}")
    for name in BUILTINS:
        ref = builtin(name)
        if ref.G == G:
            return ref
    try:
        return LinearCode.from_generator(G, os.path.splitext(os.path.basename(source))[0])
    except RatmlError as exc:
        raise InputError(f"{source}: {exc}")


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"expected a positive integer, got {text}")
    return v


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_gen_code(args, out) -> int:
    if args.builtin:
        if any(v is not None for v in (args.k, args.blocks, args.w)):
            raise UsageError("--builtin cannot be combined with --k/--blocks/--w")
        code = builtin(args.builtin)
    else:
        if any(v is None for v in (args.k, args.blocks, args.w)):
            raise UsageError("give --builtin or all of --k, --blocks, --w")
        try:
            code = random_systematic_circulant(RandomCodeSpec(args.k, args.blocks, args.w,
                                                              args.seed))
        except InvalidSpec as exc:
            raise UsageError(str(exc))
    try:
        write_matrix(args.out, code.G)
    except OSError as exc:
        raise InputError(f"cannot write {args.out}: {exc}")
    mco = max_clean_order(code)
    print(f"n={code.n} k={code.k} max_clean_order={_clean_order(mco)}", file=out)
    return EXIT_OK


def _clean_order(mco) -> str:
    return f">={mco.order}" if mco.capped else str(mco.order)


def cmd_analyze(args, out) -> int:
    code = load_code(args.code)
    mco = max_clean_order(code)
    es = eigen_structure(code)
    rate = Fraction(code.k, code.n)
    d = str(min_distance(code)) if code.k <= ENUMERATION_LIMIT else "NA"
    if not mco.capped:
        dual_d = str(mco.order + 1)
    elif code.n - code.k <= ENUMERATION_LIMIT:
        dual_d = str(min_distance(dual(code)))
    else:
        dual_d = f">={mco.order + 1}"
    identity = all(c.size == 1 for c in es.components)
    print(f"code: {code.name}", file=out)
    print(f"n={code.n} k={code.k} rate={rate}", file=out)
    print(f"d={d}, dual_d={dual_d}, max_clean_order={_clean_order(mco)}, "
          f"J={'identity' if identity else 'block'}", file=out)
    sizes = [c.size for c in es.components]
    print(f"components: [{', '.join(map(str, sizes))}], "
          f"eigenvalues: {','.join(map(str, es.spectrum()))}", file=out)
    print(f"hyperbolic: {'yes' if es.hyperbolic else 'no'}", file=out)
    if rate > Fraction(1, 2):
        print(f"warning: rate {rate} > 1/2, so p has a center direction "
              "(eigenvalue 1) and is not hyperbolic", file=out)
    return EXIT_OK


def cmd_taylor(args, out) -> int:
    code = load_code(args.code)
    tm = truncated_map(code, args.order, args.mode)
    text = tm.to_text()
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write(text)
        except OSError as exc:
            raise InputError(f"cannot write {args.out}: {exc}")
        print(f"wrote {len(tm)} terms ({tm.mode}, order {tm.order}) to {args.out}", file=out)
    else:
        out.write(text)
    return EXIT_OK


def _parse_word(text: str, n: int) -> BitVector:
    try:
        y = BitVector.from_string(text.strip())
    except ValueError:
        raise UsageError(f"--y must be a string of 0/1, got {text!r}")
    if y.length != n:
        raise UsageError(f"--y has length {y.length}, code has n = {n}")
    return y


def cmd_decode(args, out) -> int:
    code = load_code(args.code)
    y = _parse_word(args.y, code.n)
    method = args.method
    if method == "ml":
        res = ml_decode(code, y, args.epsilon)
    elif method == "bm":
        res = bm_decode(code, y)
    elif method.startswith("approx:"):
        try:
            order = int(method.split(":", 1)[1])
        except ValueError:
            raise UsageError(f"bad method {method!r}")
        res = approx_ml_decode(truncated_map(code, order, args.mode), y, args.epsilon)
    else:
        raise UsageError(f"unknown method {method!r} (ml, approx:<order>, bm)")
    print(f"decoded: {res.decoded}", file=out)
    print("soft: " + " ".join(f"{s:.6f}" for s in res.soft), file=out)
    print(f"failed: {'yes' if res.failed else 'no'}", file=out)
    return EXIT_OK


def cmd_ber(args, out) -> int:
    try:
        spec = read_spec(args.spec)
    except OSError as exc:
        raise InputError(f"cannot read {args.spec}: {exc}")
    if args.trials is not None:
        if args.trials < 1:
            raise UsageError("--trials must be positive")
        spec.trials = args.trials
    if args.no_timing:
        spec.timing = False
    workers = args.workers if args.workers is not None else default_workers()
    if workers < 1:
        raise UsageError("--workers must be positive")
    rows = sweep(spec, workers=workers)
    text = format_csv(rows)
    target = args.out or spec.output
    if target:
        if not os.path.isabs(target) and not args.out:
            target = os.path.join(spec.base_dir, target)
        try:
            with open(target, "w", encoding="utf-8", newline="") as fh:
                fh.write(text)
        except OSError as exc:
            raise InputError(f"cannot write {target}: {exc}")
        print(f"{'code':<22}{'decoder':<10}{'rate':>8}{'eps':>8}{'real':>6}{'pe_bit':>14}",
              file=out)
        for r in rows:
            print(f"{r[0]:<22}{r[1]:<10}{r[4]:>8.8}{r[5]:>8}{r[7]:>6}{r[10]:>14}", file=out)
    else:
        out.write(text)
    return EXIT_OK


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="ratml", description=(
        "ML decoding of binary linear codes via a rational map, its Taylor "
        "approximations, and BSC bit-error simulations."))
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("gen-code", help="write a generator matrix")
    g.add_argument("--builtin", choices=sorted(BUILTINS))
    g.add_argument("--k", type=_positive_int)
    g.add_argument("--blocks", type=_positive_int)
    g.add_argument("--w", type=_positive_int)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen_code)

    a = sub.add_parser("analyze", help="structural report for a code")
    a.add_argument("code", help="matrix file or builtin name")
    a.set_defaults(func=cmd_analyze)

    t = sub.add_parser("taylor", help="truncated map term list")
    t.add_argument("code", help="matrix file or builtin name")
    t.add_argument("--order", type=int, required=True)
    t.add_argument("--mode", choices=("clean", "general", "auto"), default="clean")
    t.add_argument("--out")
    t.set_defaults(func=cmd_taylor)

    d = sub.add_parser("decode", help="decode one received word")
    d.add_argument("code", help="matrix file or builtin name")
    d.add_argument("--y", required=True, help="received word as a 0/1 string")
    d.add_argument("--epsilon", type=float, default=0.1)
    d.add_argument("--method", default="ml", help="ml, approx:<order> or bm")
    d.add_argument("--mode", choices=("clean", "general", "auto"), default="auto",
                   help="truncated map used by approx methods")
    d.set_defaults(func=cmd_decode)

    b = sub.add_parser("ber", help="run a BER experiment spec")
    b.add_argument("spec")
    b.add_argument("--workers", type=int, help="worker processes (default: RATML_WORKERS "
                                                "or the CPU count)")
    b.add_argument("--trials", type=int, help="override the spec's trial count")
    b.add_argument("--out", help="CSV path (default: the spec's output, else stdout)")
    b.add_argument("--no-timing", action="store_true", help="write elapsed_s as NA")
    b.set_defaults(func=cmd_ber)
    return p


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, out)
    except HypothesisViolated as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_HYPOTHESIS
    except (UsageError, ConfigError, InvalidEpsilon, InvalidSpec, LengthMismatch,
            NotBchCode, TooLarge) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InputError, InvalidCode) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except (DecodeError, PoleError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_DECODE
    except RatmlError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
