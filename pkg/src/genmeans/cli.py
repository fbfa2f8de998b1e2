"""`genmeans` command line: mean, theory, verify and apportion.

Exit codes: 0 success / all PASS, 2 spec or domain error, 3 at least one FAIL.
"""

from __future__ import annotations

import argparse
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

from . import apportionment as app
from . import asymptotics as asy
from . import generators as gen
from . import montecarlo as mc
from . import structure
from .distributions import distribution_from_string
from .errors import GenMeansError, SpecError
from .means import (
    Bajraktarevic,
    ExpCauchy,
    Gini,
    Holder,
    LogCauchy,
    MultCauchy,
    QuasiArithmetic,
    evaluate_mean,
)
from .serialize import dumps, fmt
from .specfile import DEFAULT_SEED, SuiteSpec, build_experiment, bundled_spec_path, bundled_specs, load_spec

EXIT_OK, EXIT_ERROR, EXIT_FAIL = 0, 2, 3

KINDS = (
    "arithmetic",
    "geometric",
    "harmonic",
    "quasi-arithmetic",
    "bajraktarevic",
    "gini",
    "holder",
    "exp-cauchy",
    "log-cauchy",
    "mult-cauchy",
)


def _kind_from_args(args):
    k = args.kind
    if k == "arithmetic":
        return QuasiArithmetic(gen.identity())
    if k == "geometric":
        return QuasiArithmetic(gen.log())
    if k == "harmonic":
        return QuasiArithmetic(gen.reciprocal())
    if k == "quasi-arithmetic":
        return QuasiArithmetic(gen.generator_from_name(args.generator or "identity"))
    if k == "bajraktarevic":
        return Bajraktarevic(
            gen.generator_from_name(args.generator or "identity"),
            gen.weight_from_name(args.weight or "one"),
        )
    if k == "gini":
        if args.r is None or args.s is None:
            raise SpecError("gini needs --r and --s")
        return Gini(args.r, args.s)
    if k == "holder":
        if args.p is None:
            raise SpecError("holder needs --p")
        return Holder(args.p)
    return {"exp-cauchy": ExpCauchy, "log-cauchy": LogCauchy, "mult-cauchy": MultCauchy}[k]()


def _add_kind_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--kind", required=True, choices=KINDS)
    p.add_argument("--generator", help="identity | ln | reciprocal | power:<p>")
    p.add_argument("--weight", help="one | identity | power:<q> (bajraktarevic)")
    p.add_argument("--r", type=float)
    p.add_argument("--s", type=float)
    p.add_argument("--p", type=float)


def _read_values(path) -> list:
    """One real per line; a non-numeric first line is taken as a header."""
    values = []
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    for i, line in enumerate(lines):
        cell = line.split(",")[0].strip()
        if not cell:
            continue
        try:
            values.append(float(cell))
        except ValueError:
            if i == 0:
                continue
            raise SpecError(f"{path}:{i + 1}: {cell!r} is not a number") from None
    return values


def _tolerances(text: str | None) -> dict:
    out = {}
    for item in filter(None, (text or "").split(",")):
        key, sep, value = item.partition("=")
        if not sep:
            raise SpecError(f"--tolerance expects k=v pairs, got {item!r}")
        try:
            out[key.strip()] = float(value)
        except ValueError:
            raise SpecError(f"tolerance {key!r} is not a number: {value!r}") from None
    unknown = set(out) - set(mc.DEFAULT_TOLERANCES)
    if unknown:
        raise SpecError(f"unknown tolerance keys {sorted(unknown)}; known: {sorted(mc.DEFAULT_TOLERANCES)}")
    return out


# -- subcommands --------------------------------------------------------------


def cmd_mean(args) -> int:
    kind = _kind_from_args(args)
    values = list(args.values)
    if args.file:
        values += _read_values(args.file)
    if not values:
        raise SpecError("no values given")
    print(fmt(evaluate_mean(kind, values)))
    return EXIT_OK


def cmd_theory(args) -> int:
    kind = _kind_from_args(args)
    dist = distribution_from_string(args.dist)
    params, moments = asy.theory_for(kind, dist, args.mode)
    print(dumps({"kind": kind.to_dict(), "dist": dist.to_dict(), "mode": args.mode,
                 "theory": params.to_dict(), "moments": moments.to_dict()}))
    return EXIT_OK


def _run_experiments(spec: SuiteSpec, seed: int, args) -> tuple[list, bool]:
    overrides = _tolerances(args.tolerance)
    experiments = [build_experiment(item, seed, overrides) for item in spec.experiments]
    rows, ok = [], True
    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        for exp in experiments:
            report = mc.run_experiment(exp, pool)
            mc.write_report(report, args.out)
            ok &= report.passed
            last = report.per_n[-1]
            detail = ", ".join(
                f"{c['name']}={fmt(c['value'])}" for c in report.checks
            )
            rows.append(f"{report.verdict:4}  {report.name:32} {report.mode:13} n={last['n']:<8} {detail}")
    return rows, ok


def _run_bisym(spec: SuiteSpec, args) -> tuple[list, bool]:
    results = [structure.reproduce_counterexample_L(n).to_dict() for n in spec.n_values]
    witness = structure.falsify_bisymmetry_G(spec.g_grid).to_dict()
    doc = {"suite": "bisym", "counterexamples_L": results, "G_witness": witness}
    ok = all(r["verdict"] == "PASS" for r in results) and witness["verdict"] == "PASS"
    doc["verdict"] = "PASS" if ok else "FAIL"
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "bisym.json").write_text(dumps(doc) + "\n", encoding="utf-8")
    rows = []
    for r in results:
        if r["n"] == 2:
            rows.append(f"{r['verdict']:4}  L_n counterexample n=2  LHS={fmt(r['lhs'])} RHS={fmt(r['rhs'])}")
        else:
            rows.append(
                f"{r['verdict']:4}  L_n counterexample n={r['n']}  log-scale convexity margin="
                f"{fmt(r['convexity_margin'])}"
            )
    rows.append(f"{witness['verdict']:4}  G witness {witness['quadruple']} gap={fmt(witness['gap'])}")
    return rows, ok


def _run_structure(spec: SuiteSpec, seed: int, args) -> tuple[list, bool]:
    doc = structure.run_structure_suite(spec.trials, seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    (out / "structure.json").write_text(dumps(doc) + "\n", encoding="utf-8")
    bad = sum(doc["mean_axioms"]["violations"].values())
    rows = [
        f"{'PASS' if bad == 0 else 'FAIL':4}  mean axioms, {len(doc['mean_axioms']['violations'])} kinds: {bad} violations"
    ]
    for key in ("pn_chain", "entropy_bound", "quasi_arithmetic_bisymmetry"):
        v = doc[key]["violations"]
        rows.append(f"{'PASS' if v == 0 else 'FAIL':4}  {key}: {v} violations in {doc[key]['trials']}")
    rows.append(f"{doc['G_witness']['verdict']:4}  G witness gap={fmt(doc['G_witness']['gap'])}")
    return rows, doc["verdict"] == "PASS"


def cmd_verify(args) -> int:
    if args.spec:
        path = Path(args.spec)
        # a bare name that is not a local file may name a bundled spec
        if not path.exists() and path.name == args.spec and path.name in bundled_specs():
            path = bundled_spec_path(path.name)
        spec = load_spec(path)
        if args.suite and args.suite != spec.suite:
            raise SpecError(f"--suite {args.suite} conflicts with the spec's suite {spec.suite!r}")
    elif args.suite in ("bisym", "structure"):
        spec = SuiteSpec(suite=args.suite, seed=None)
    else:
        raise SpecError("verify needs a spec file or --suite bisym|structure")
    seed = args.seed if args.seed is not None else (spec.seed if spec.seed is not None else DEFAULT_SEED)
    if spec.suite == "experiments":
        rows, ok = _run_experiments(spec, seed, args)
    elif spec.suite == "bisym":
        rows, ok = _run_bisym(spec, args)
    else:
        rows, ok = _run_structure(spec, seed, args)
    for row in rows:
        print(row)
    print(f"{'PASS' if ok else 'FAIL'}: {len(rows)} check(s), seed={seed}, reports in {args.out}")
    return EXIT_OK if ok else EXIT_FAIL


def _method_from_args(args):
    if args.method == "exp-cauchy":
        return ExpCauchy()
    g = gen.generator_from_name(args.method)
    if args.weight:
        return Bajraktarevic(g, gen.weight_from_name(args.weight))
    return QuasiArithmetic(g)


def cmd_apportion(args) -> int:
    states = app.load_census(args.census)
    config = app.ApportionmentConfig(house_size=args.house, method=_method_from_args(args), mode=args.mode)
    allocation = app.apportion(states, config)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        app.write_allocation(allocation, out / "allocation.csv", out / "audit.json")
    sys.stdout.write(allocation.to_csv())
    return EXIT_OK


# -- entry point --------------------------------------------------------------


def _u64(text: str) -> int:
    value = int(text, 0)
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be an unsigned 64-bit integer")
    return value


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="genmeans", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("mean", help="evaluate a mean of the given values")
    _add_kind_flags(p)
    p.add_argument("--file", help="one value per line")
    p.add_argument("values", nargs="*", type=float)
    p.set_defaults(func=cmd_mean)

    p = sub.add_parser("theory", help="print the limit-theorem parameters for a kind and a law")
    _add_kind_flags(p)
    p.add_argument("--dist", required=True, help="e.g. explog:lam=2 or lognormalbase:mu=0,sigma=0.5")
    p.add_argument("--mode", default="clt", choices=mc.MODES)
    p.set_defaults(func=cmd_theory)

    p = sub.add_parser("verify", help="run an experiment or property suite")
    p.add_argument("spec", nargs="?", help="spec JSON file")
    p.add_argument("--suite", choices=("experiments", "bisym", "structure"))
    p.add_argument("--seed", type=_u64, help=f"default {DEFAULT_SEED:#x}")
    p.add_argument("--threads", type=int, default=1)
    p.add_argument("--out", default="genmeans-out")
    p.add_argument("--tolerance", help="k=v,... overrides, e.g. clt_ks=0.04")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("apportion", help="allocate house seats from a census CSV")
    p.add_argument("census", help="CSV with header name,population")
    p.add_argument("--house", type=int, default=435)
    p.add_argument("--method", default="ln", help="generator name or exp-cauchy")
    p.add_argument("--weight", help="makes the method Bajraktarevic with this weight")
    p.add_argument("--mode", default="one_shot", choices=app.MODES)
    p.add_argument("--out", help="directory for allocation.csv and audit.json")
    p.set_defaults(func=cmd_apportion)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except GenMeansError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == "__main__":
    sys.exit(main())
