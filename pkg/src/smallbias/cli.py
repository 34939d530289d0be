"""Command-line entry point.

Exit codes: 0 success, 1 verification failure or infeasible request,
2 usage error, 3 IO or parse error.
"""

from __future__ import annotations

import argparse
import csv
import io
import math
import sys
import time
from importlib import resources
from pathlib import Path

from .derandomizer import (
    DescentError,
    InfeasibleError,
    ParameterSet,
    bias_curve,
    choose_d,
    log_phi0,
    run_greedy,
    sigma_check,
)
from .group_spectral import CyclicGroup
from .qfa_mod import accept_curve
from .qfa_palindrome import PalindromeQfa, PromiseViolation, default_d, validate_promise
from .setfile import SetFileError, read_set, write_set

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3
TABLE1_PRIMES = (11, 17, 23, 29, 31, 37, 41, 47, 53, 59, 61, 67, 71, 83, 97)
TABLE1_EPSILON = 0.2
# slack on the bias bound when verifying sets read from disk
VERIFY_TOL = 1e-9


class UsageError(Exception):
    pass


def fmt(x: float) -> str:
    return f"{x:.12g}"


def _gamma_from(args, required: bool = True) -> float | None:
    if args.gamma is not None:
        gamma = args.gamma
    elif args.epsilon is not None:
        if not 0.0 < args.epsilon < 1.0:
            raise UsageError(f"--epsilon must lie in (0, 1), got {args.epsilon}")
        gamma = math.sqrt(args.epsilon)
    elif required:
        raise UsageError("one of --gamma/--epsilon is required")
    else:
        return None
    if not 0.0 < gamma < 1.0:
        raise UsageError(f"gamma must lie in (0, 1), got {gamma}")
    return gamma


def _add_bias_target(p: argparse.ArgumentParser) -> None:
    g = p.add_mutually_exclusive_group()
    g.add_argument("--gamma", type=float, help="bias bound gamma")
    g.add_argument("--epsilon", type=float, help="error bound epsilon (gamma = sqrt(epsilon))")


def _group(n: int) -> CyclicGroup:
    try:
        return CyclicGroup(n)
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _write_csv(rows, header, path: str | None, out) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    text = buf.getvalue()
    if path:
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
    else:
        out.write(text)


def cmd_find_set(args, out) -> int:
    gamma = _gamma_from(args)
    group = _group(args.n)
    start = time.perf_counter()
    d = args.d if args.d is not None else choose_d(group, gamma)
    if d < 1:
        raise UsageError(f"--d must be >= 1, got {d}")
    pset, phis = run_greedy(group, d, gamma)
    elapsed = time.perf_counter() - start
    report = sigma_check(pset)
    if args.out:
        write_set(pset, args.out)
    print(f"n={pset.n}", file=out)
    print(f"d={pset.d}", file=out)
    print(f"gamma={pset.gamma:.17g}", file=out)
    print(f"phi_0={fmt(phis[0])}", file=out)
    print(f"phi_d={fmt(phis[-1])}", file=out)
    print(f"max_bias={fmt(report.max_bias)} at j={report.argmax_j}", file=out)
    print(f"wall_time_s={elapsed:.3f}", file=out)
    if not args.out:
        print("k=" + " ".join(map(str, pset.ks)), file=out)
    return EXIT_OK


def cmd_choose_d(args, out) -> int:
    gamma = _gamma_from(args)
    group = _group(args.n)
    d = choose_d(group, gamma)
    print(f"d={d}", file=out)
    print(f"phi_0={fmt(math.exp(log_phi0(group, d, gamma)))}", file=out)
    if d > 1:
        print(f"phi_0(d-1)={fmt(math.exp(log_phi0(group, d - 1, gamma)))}", file=out)
    return EXIT_OK


def _report_curve(pset: ParameterSet, path: str) -> None:
    b = bias_curve(pset)
    rows = [(j, fmt(v), fmt(v * v)) for j, v in enumerate(b, start=1)]
    _write_csv(rows, ("j", "bias", "accept_prob"), path, None)


def cmd_verify_set(args, out) -> int:
    pset = read_set(args.inp)
    gamma = args.gamma if args.gamma is not None else pset.gamma
    report = sigma_check(pset, gamma=gamma, tol=VERIFY_TOL)
    if args.curve:
        _report_curve(pset, args.curve)
    status = "PASS" if report.ok else "FAIL"
    print(f"n={pset.n} d={pset.d} gamma={fmt(gamma)} max_bias={fmt(report.max_bias)} "
          f"at j={report.argmax_j} {status}", file=out)
    return EXIT_OK if report.ok else EXIT_FAIL


def _fixture_paths(directory: str | None):
    if directory is None:
        base = resources.files("smallbias") / "fixtures"
    else:
        base = Path(directory)
    return [(p, base / f"table1_p{p:03d}.txt") for p in TABLE1_PRIMES]


def cmd_verify_appendix(args, out) -> int:
    gamma = math.sqrt(TABLE1_EPSILON)
    rows = []
    for p, path in _fixture_paths(args.fixtures):
        if not path.is_file():
            raise SetFileError("fixture missing", 0, path)
        pset = read_set(path)
        if pset.n != p:
            raise SetFileError(f"fixture declares n={pset.n}, expected {p}", 2, path)
        rows.append((pset, sigma_check(pset, gamma=gamma, tol=VERIFY_TOL)))
    passed = 0
    for pset, report in rows:
        passed += report.ok
        status = "PASS" if report.ok else "FAIL"
        print(f"p={pset.n:3d} d={pset.d:3d} max_bias={report.max_bias:.12f} "
              f"j={report.argmax_j:3d} {status}", file=out)
    print(f"{passed}/{len(rows)} rows pass at gamma=sqrt({TABLE1_EPSILON})", file=out)
    return EXIT_OK if passed == len(rows) else EXIT_FAIL


def _parse_j_range(text: str) -> range:
    try:
        a, b = text.split("..")
        lo, hi = int(a), int(b)
    except ValueError:
        raise UsageError(f"--j-range must look like a..b, got {text!r}") from None
    if lo < 0 or hi < lo:
        raise UsageError(f"bad --j-range {text!r}")
    return range(lo, hi + 1)


def cmd_simulate_mod(args, out) -> int:
    pset = read_set(args.set)
    if args.j is not None:
        if args.j < 0:
            raise UsageError("--j must be >= 0")
        js = [args.j]
    else:
        js = _parse_j_range(args.j_range)
    try:
        curve = accept_curve(pset, js)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    rows = [(j, fmt(c), fmt(s), fmt(abs(s - c))) for j, c, s in curve]
    header = ("j", "closed", "simulated", "diff")
    _write_csv(rows, header, None, out)
    if args.csv:
        _write_csv(rows, header, args.csv, out)
    return EXIT_OK


def _words_from(args) -> list[str]:
    words = list(args.word or [])
    if args.words:
        text = Path(args.words).read_text()
        words.extend(line.rstrip("\r") for line in text.split("\n") if line.strip())
    if not words:
        raise UsageError("give --word or --words")
    return words


def cmd_simulate_palindrome(args, out) -> int:
    s = args.s
    if s < 2 or s % 2:
        raise UsageError(f"--s must be an even integer >= 2, got {s}")
    if args.shots is None and not args.exact:
        raise UsageError("choose --exact or --shots N")
    if args.shots is not None and args.shots < 1:
        raise UsageError("--shots must be >= 1")
    words = _words_from(args)
    if args.set:
        pset = read_set(args.set)
        try:
            qfa = PalindromeQfa(s, pset)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    else:
        if args.epsilon is None:
            raise UsageError("--epsilon is required when no --set is given")
        if not 0.0 < args.epsilon < 1.0:
            raise UsageError(f"--epsilon must lie in (0, 1), got {args.epsilon}")
        d = args.d if args.d is not None else default_d(s, args.epsilon)
        qfa = PalindromeQfa.build(s, args.epsilon, d)
    print(f"# s={s} n={qfa.n} d={qfa.d} t_qubits={qfa.t_qubits} epsilon={fmt(qfa.pset.epsilon)}",
          file=out)
    violations = 0
    if args.shots is None:
        print("word,accept_prob", file=out)
    else:
        print("word,accepted,rejected", file=out)
    for raw in words:
        try:
            word = validate_promise(raw, s)
        except PromiseViolation as exc:
            violations += 1
            print(f"{raw},error: {exc}", file=out)
            continue
        if args.shots is None:
            print(f"{raw},{fmt(qfa.accept_probability_exact(word))}", file=out)
        else:
            acc, rej = qfa.accept_sampled(word, args.shots, args.seed)
            print(f"{raw},{acc},{rej}", file=out)
    return EXIT_IO if violations else EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="smallbias", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("find-set", help="greedy small-biased set over Z_n")
    p.add_argument("--n", type=int, required=True)
    _add_bias_target(p)
    p.add_argument("--d", type=int, help="set size (default: smallest feasible)")
    p.add_argument("--out", help="write the set file here")
    p.set_defaults(func=cmd_find_set)

    p = sub.add_parser("choose-d", help="smallest set size the estimator certifies")
    p.add_argument("--n", type=int, required=True)
    _add_bias_target(p)
    p.set_defaults(func=cmd_choose_d)

    p = sub.add_parser("verify-set", help="check the bias bound of a set file")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--gamma", type=float, help="override the gamma stored in the file")
    p.add_argument("--curve", help="write j,bias,accept_prob CSV")
    p.set_defaults(func=cmd_verify_set)

    p = sub.add_parser("verify-appendix", help="check the shipped Table 1 sets")
    p.add_argument("--fixtures", help="directory of table1_pNNN.txt files")
    p.set_defaults(func=cmd_verify_appendix)

    p = sub.add_parser("simulate-mod", help="MOD_p acceptance, closed form vs simulation")
    p.add_argument("--set", required=True)
    g = p.add_mutually_exclusive_group(required=True)
    g.add_argument("--j", type=int)
    g.add_argument("--j-range", dest="j_range")
    p.add_argument("--csv")
    p.set_defaults(func=cmd_simulate_mod)

    p = sub.add_parser("simulate-palindrome", help="Palindrome_s automaton on promise words")
    p.add_argument("--s", type=int, required=True)
    p.add_argument("--epsilon", type=float)
    p.add_argument("--d", type=int, help="set size when building the set on the fly")
    p.add_argument("--word", action="append")
    p.add_argument("--words", help="file with one word per line")
    p.add_argument("--set")
    mode = p.add_mutually_exclusive_group()
    mode.add_argument("--exact", action="store_true")
    mode.add_argument("--shots", type=int)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_simulate_palindrome)
    return parser


def main(argv=None, out=None) -> int:
    out = sys.stdout if out is None else out
    args = build_parser().parse_args(argv)
    try:
        return args.func(args, out)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (InfeasibleError, DescentError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (SetFileError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
