"""Command-line front end.

Subcommands:
  pmf     exact masses and tables for the partition measures
  sample  Markov-chain sampling of the base measure
  graphs  random-graph p-Sylow experiments
  verify  identity / recursion / chain verification suites

Exit codes: 0 success, 1 verification failure, 2 usage or domain error.
Randomized commands require an explicit --seed; every file output gets a
<output>.manifest.json recording the full parameter set and a digest, and
re-running the same command reproduces the bytes.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
from fractions import Fraction

from . import __version__
from .measures import (
    MassValue,
    even_qpoch,
    pmf,
    pmf_deformed,
    pmf_parts,
    pmf_size,
    pmf_truncated,
    pmf_via_conjugate,
    solve_parts_recursion,
    tabulate,
    deformed_series_check,
    truncated_series_check,
)
from .partitions import Partition
from .qseries import (
    fraction_str,
    verify_euler_identity,
    verify_qbinomial,
)
from .sampler import (
    DEFAULT_CUTOFF,
    SamplerConfig,
    empirical_distribution,
    initial_column_distribution,
    kernel,
    kernel_row,
    sample_partition,
)
from .sandpile import run_experiment
from .rng import substream


class CliError(Exception):
    """Domain/usage error: one-line diagnostic, exit code 2."""


def _parse_fraction(text: str) -> Fraction:
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise CliError(f"cannot parse rational {text!r} (use a/b or an integer)") from None


def _check_prime(p: int) -> int:
    if p < 2:
        raise CliError("p must be >= 2 and prime")
    d = 2
    while d * d <= p:
        if p % d == 0:
            raise CliError(f"p must be prime, got {p} = {d} * {p // d}")
        d += 1
    return p


def _parse_partition(text: str) -> Partition:
    try:
        return Partition.from_string(text)
    except ValueError as exc:
        raise CliError(str(exc)) from None


def _write_output(args, payload: str, command: str, params: dict) -> None:
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(payload)
        digest = hashlib.sha256(payload.encode()).hexdigest()
        manifest = {
            "command": command,
            "params": params,
            "seed": params.get("seed"),
            "version": __version__,
            "outputs": {args.output: digest},
        }
        with open(args.output + ".manifest.json", "w") as fh:
            json.dump(manifest, fh, indent=2, sort_keys=True)
            fh.write("\n")
    else:
        sys.stdout.write(payload)


def _dumps(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------- pmf


def _constant_line(mass) -> str:
    enc = mass.constant_enclosure()
    if mass.constant == "exact":
        return "constant: exact 1 (no infinite product)"
    label = f"{mass.constant}(p={mass.p}" + (f", u={mass.u}" if mass.u is not None else "") + ")"
    return f"constant {label} = {enc}"


def cmd_pmf(args) -> int:
    p = _check_prime(args.p)
    measure = args.measure

    if measure in ("size", "parts"):
        value = args.n if measure == "size" else args.a
        if value is None:
            raise CliError(f"--measure {measure} needs --{'n' if measure == 'size' else 'a'}")
        if value < 0:
            raise CliError("argument must be >= 0")
        mass = pmf_size(value, p) if measure == "size" else pmf_parts(value, p)
        enc = mass.enclosure()
        print(_constant_line(mass))
        payload = _dumps({
            "measure": measure, "p": p, "argument": value,
            "rational": fraction_str(mass.rational),
            "mass": enc.to_json(),
        })
        _write_output(args, payload, "pmf", _param_dict(args))
        return 0

    if (args.partition is None) == (args.max_size is None):
        raise CliError("give exactly one of --partition or --max-size")

    u = _parse_fraction(args.u) if args.u is not None else None
    if measure == "deformed":
        if u is None:
            raise CliError("--measure deformed needs --u")
        if not (0 < u < p):
            raise CliError(f"u must satisfy 0 < u < p, got {u}")
    if measure == "truncated" and args.r is None:
        raise CliError("--measure truncated needs --r")

    if args.partition is not None:
        lam = _parse_partition(args.partition)
        if measure == "cl":
            mass = pmf(lam, p)
        elif measure == "cl-conjugate":
            mass = pmf_via_conjugate(lam, p)
        elif measure == "deformed":
            mass = pmf_deformed(lam, p, u)
        elif measure == "truncated":
            if lam.length > args.r:
                raise CliError(f"partition has {lam.length} parts, more than r={args.r}")
            mass = MassValue(pmf_truncated(lam, p, args.r))
        else:
            raise CliError(f"--measure {measure} takes --n/--a, not a partition")
        enc = mass.enclosure()
        print(_constant_line(mass))
        payload = _dumps({
            "measure": measure, "p": p, "partition": str(lam),
            "rational": fraction_str(mass.rational),
            "mass": enc.to_json(),
        })
        _write_output(args, payload, "pmf", _param_dict(args))
        return 0

    # table mode
    if measure == "cl-conjugate":
        raise CliError("tables use the canonical form; use --measure cl")
    try:
        dist = tabulate(p, args.max_size, measure=measure, u=u, r=args.r)
    except ValueError as exc:
        raise CliError(str(exc)) from None
    sample_mass = next(iter(dist.entries.values()))
    print(_constant_line(sample_mass))
    total = dist.normalization_enclosure()
    print(f"table total + tail = {total}")
    if args.format == "csv":
        payload = "\n".join(",".join(row) for row in dist.to_csv_rows()) + "\n"
    else:
        payload = _dumps(dist.to_json_dict())
    _write_output(args, payload, "pmf", _param_dict(args))
    return 0


# ---------------------------------------------------------------- sample


def cmd_sample(args) -> int:
    p = _check_prime(args.p)
    if args.trials < 1:
        raise CliError("trials must be >= 1")
    cutoff = _parse_fraction(args.cutoff)
    if not (0 < cutoff < 1):
        raise CliError(f"cutoff must lie in (0,1), got {cutoff}")
    config = SamplerConfig(p=p, seed=args.seed, initial_tail_cutoff=cutoff)
    if args.summary:
        dist = empirical_distribution(config, args.trials)
        payload = _dumps(dist.to_json_dict())
    else:
        lines = []
        for t in range(args.trials):
            lam = sample_partition(config, substream(args.seed, t))
            lines.append(str(lam))
        payload = "\n".join(lines) + "\n"
    _write_output(args, payload, "sample", _param_dict(args))
    return 0


# ---------------------------------------------------------------- graphs


def cmd_graphs(args) -> int:
    p = _check_prime(args.p)
    if args.n < 2:
        raise CliError("n must be >= 2")
    if args.trials < 1:
        raise CliError("trials must be >= 1")
    if args.cap < 1:
        raise CliError("cap must be >= 1")
    q = _parse_fraction(args.q)
    if not (0 < q < 1):
        raise CliError(f"q must lie strictly in (0,1), got {q}")
    result = run_experiment(args.n, q, p, args.trials, args.seed,
                            cap=args.cap, method=args.method)
    payload = _dumps(result.to_json_dict())
    _write_output(args, payload, "graphs", _param_dict(args))
    return 0


# ---------------------------------------------------------------- verify


def _run_checks(checks) -> int:
    failures = 0
    for name, ok, detail in checks:
        status = "PASS" if ok else "FAIL"
        print(f"{status} {name}: {detail}")
        if not ok:
            failures += 1
    print(f"{'all checks passed' if not failures else f'{failures} check(s) FAILED'}")
    return 0 if failures == 0 else 1


def _identity_checks(primes, depth):
    for p in primes:
        s, q = Fraction(1, p), Fraction(1, p * p)
        check = verify_euler_identity(s, q, depth)
        yield (f"euler-series s=1/{p} q=1/{p*p} terms={depth}", check.agree,
               f"lhs={float(check.lhs):.12f} rhs={check.rhs} tail<={float(check.truncation_bound):.3e}")
        for r in range(1, 6):
            for x in (1, 2):
                qb = verify_qbinomial(r, Fraction(1, p), x)
                yield (f"q-binomial r={r} q=1/{p} x={x}", qb.agree,
                       f"both sides = {fraction_str(qb.lhs)}")
        for u in ([Fraction(1, 2)] + ([Fraction(2)] if p > 2 else [])):
            partial, rhs, tail, agree = deformed_series_check(p, u, min(depth, 40))
            yield (f"deformed-series p={p} u={u}", agree,
                   f"partial={float(partial):.12f} rhs={rhs} tail<={float(tail):.3e}")
        for r in range(1, 6):
            partial, rhs, tail, agree = truncated_series_check(p, r, min(depth, 40))
            yield (f"truncated-series p={p} r={r}", agree,
                   f"partial={float(partial):.12f} rhs={fraction_str(rhs)} tail<={float(tail):.3e}")
        dist = tabulate(p, min(depth, 30))
        total = dist.normalization_enclosure()
        yield (f"normalization p={p} max_size={min(depth, 30)}", total.contains(1),
               f"total+tail = {total}")


def _recursion_checks(primes, a_max):
    for p in primes:
        values = solve_parts_recursion(p, a_max)  # raises if the two routes disagree
        closed = [pmf_parts(a, p) for a in range(a_max + 1)]
        ok = all(v.rational == c.rational for v, c in zip(values, closed))
        yield (f"parts-recursions-vs-closed-form p={p} a<={a_max}", ok,
               "both recursions and the closed form agree exactly")


def _chain_checks(primes, a_max):
    for p in primes:
        ok_rows = all(sum(kernel_row(a, p).masses) == 1 for a in range(a_max + 1))
        yield (f"kernel-row-sums p={p} a<={a_max}", ok_rows, "exact row sums = 1")
        parts = [pmf_parts(a, p).rational for a in range(a_max + 1)]
        ok_ratio = True
        for a in range(a_max + 1):
            for b in range(a + 1):
                lhs = parts[b] / (Fraction(p) ** (a * (a + 1) // 2) * parts[a]
                                  * even_qpoch(p, (a - b) // 2))
                if lhs != kernel(a, b, p):
                    ok_ratio = False
        yield (f"kernel-ratio-identity p={p} a<={a_max}", ok_ratio,
               "P(b) / (p^binom(a+1,2) P(a) (1/p^2)_floor((a-b)/2)) = K(a,b) exactly")
        entries = initial_column_distribution(p, DEFAULT_CUTOFF)
        ok_init = all(mass.rational == pmf_parts(a, p).rational for a, mass in entries)
        yield (f"initial-column-distribution p={p}", ok_init,
               f"{len(entries)} heights retained, tail below {DEFAULT_CUTOFF}")


def cmd_verify(args) -> int:
    try:
        primes = [_check_prime(int(tok)) for tok in args.p.split(",") if tok.strip()]
    except ValueError:
        raise CliError(f"cannot parse prime list {args.p!r}") from None
    if not primes:
        raise CliError("empty prime list")
    if args.depth < 1:
        raise CliError("depth must be >= 1")
    if args.a_max < 0:
        raise CliError("a-max must be >= 0")
    if args.suite == "identities":
        return _run_checks(_identity_checks(primes, args.depth))
    if args.suite == "recursions":
        return _run_checks(_recursion_checks(primes, args.a_max))
    return _run_checks(_chain_checks(primes, args.a_max))


# ---------------------------------------------------------------- wiring


def _param_dict(args) -> dict:
    skip = {"func", "output"}
    out = {}
    for key, value in sorted(vars(args).items()):
        if key not in skip and value is not None:
            out[key] = value
    return out


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="clpart",
        description="Cohen-Lenstra partition measures: exact tables, sampling, graph experiments.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_pmf = sub.add_parser("pmf", help="exact masses and tables")
    p_pmf.add_argument("--measure", required=True,
                       choices=["cl", "cl-conjugate", "deformed", "truncated", "size", "parts"])
    p_pmf.add_argument("--p", required=True, type=int, help="prime")
    p_pmf.add_argument("--partition", help='partition in bracket form, e.g. "[3,1]"')
    p_pmf.add_argument("--max-size", type=int, help="tabulate all partitions up to this size")
    p_pmf.add_argument("--n", type=int, help="size argument for --measure size")
    p_pmf.add_argument("--a", type=int, help="parts argument for --measure parts")
    p_pmf.add_argument("--u", help="deformation parameter (rational, 0 < u < p)")
    p_pmf.add_argument("--r", type=int, help="parts bound for the truncated measure")
    p_pmf.add_argument("--format", choices=["json", "csv"], default="json")
    p_pmf.add_argument("--output")
    p_pmf.set_defaults(func=cmd_pmf)

    p_sample = sub.add_parser("sample", help="Markov-chain sampling")
    p_sample.add_argument("--p", required=True, type=int)
    p_sample.add_argument("--trials", required=True, type=int)
    p_sample.add_argument("--seed", required=True, type=int)
    p_sample.add_argument("--cutoff", default=f"{DEFAULT_CUTOFF}",
                          help="initial-column tail cutoff (rational)")
    p_sample.add_argument("--summary", action="store_true",
                          help="write a frequency table instead of one partition per line")
    p_sample.add_argument("--output")
    p_sample.set_defaults(func=cmd_sample)

    p_graphs = sub.add_parser("graphs", help="random-graph p-Sylow experiments")
    p_graphs.add_argument("--n", required=True, type=int)
    p_graphs.add_argument("--q", required=True, help="edge probability (rational in (0,1))")
    p_graphs.add_argument("--p", required=True, type=int)
    p_graphs.add_argument("--trials", required=True, type=int)
    p_graphs.add_argument("--seed", required=True, type=int)
    p_graphs.add_argument("--cap", type=int, default=12, help="valuation cap")
    p_graphs.add_argument("--method", choices=["plocal", "snf"], default="plocal")
    p_graphs.add_argument("--output")
    p_graphs.set_defaults(func=cmd_graphs)

    p_verify = sub.add_parser("verify", help="verification suites")
    p_verify.add_argument("--suite", required=True,
                          choices=["identities", "recursions", "chain"])
    p_verify.add_argument("--p", default="2,3", help="comma-separated primes")
    p_verify.add_argument("--depth", type=int, default=40,
                          help="series truncation depth for identity checks")
    p_verify.add_argument("--a-max", dest="a_max", type=int, default=30)
    p_verify.set_defaults(func=cmd_verify)

    return parser


def main(argv=None) -> int:
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2
    try:
        return args.func(args)
    except CliError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
