"""Command-line entry points.

Exit codes: 0 success, 1 a verification check failed, 2 a budget ran out
before a verdict, 3 bad usage or unreadable input.  Every output embeds the
resolved configuration, and wall-clock timings appear only with
``--timings`` so repeated runs stay byte-identical.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from fractions import Fraction
from pathlib import Path

from . import metric
from .errors import BudgetExceeded, StableKMError
from .generators import GenSpec, generate
from .local_search import iteration_bound, run_local_search, first_k_centres
from .oracle import DEFAULT_BUDGET, brute_force_optimum, certify_stability
from .reductions import (appendix_d_family, e3sat_to_3dm, parse_dimacs,
                         qsat_to_e3sat, tdm_to_cbt, cbt_to_kmeans)
from .reductions.tdm import cbt_provenance, dump_sidecar
from .verify import Budgets, FAIL, INCONCLUSIVE, measure_sat_stability, verify_chain

EXIT_OK, EXIT_FAIL, EXIT_INCONCLUSIVE, EXIT_USAGE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _dump(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _write(path: str | None, text: str):
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _read_json(arg: str):
    """A path to a JSON file, or inline JSON."""
    p = Path(arg)
    try:
        text = p.read_text() if p.exists() else arg
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise UsageError(f"cannot parse JSON from {arg!r}: {exc}") from exc


def _load_instance(path: str) -> metric.MetricInstance:
    obj = _read_json(path)
    if isinstance(obj, dict) and "instance" in obj:
        obj = obj["instance"]
    return metric.from_json(obj)


def _config(args, *names) -> dict:
    cfg = {"command": args.command}
    for n in names:
        v = getattr(args, n)
        cfg[n] = str(v) if isinstance(v, Fraction) else v
    return cfg


# -- commands -----------------------------------------------------------------

def cmd_generate(args) -> int:
    spec = GenSpec.from_json(_read_json(args.spec))
    inst = generate(spec)
    out = {"config": {"command": "generate", "spec": spec.to_json()},
           "instance": metric.to_json(inst), "warnings": list(inst.warnings)}
    _write(args.out, _dump(out))
    return EXIT_OK


def cmd_solve(args) -> int:
    inst = _load_instance(args.instance)
    bound = iteration_bound(inst)
    cap = bound if args.truncate else args.cap
    start = metric.Solution.of(args.start) if args.start else first_k_centres(inst)
    trace = run_local_search(inst, args.rho, start, cap=cap, threads=args.threads)
    cfg = _config(args, "instance", "rho", "truncate", "cap", "start", "threads")
    cfg["resolved_cap"] = cap
    S, c = trace.final
    summary = {
        "config": cfg,
        "final": S.to_json(),
        "cost": metric.cost_to_json(c),
        "iterations": trace.iterations,
        "iteration_bound": bound,
        "terminated_locally_optimal": trace.terminated_locally_optimal,
        "iteration_cap_hit": trace.iteration_cap_hit,
    }
    if args.compare_optimum:
        optima, best = brute_force_optimum(inst, args.budget)
        summary["optimum_cost"] = metric.cost_to_json(best)
        summary["found_optimum"] = c == best
    if args.trace:
        _write(args.trace, _dump({"config": cfg, "trace": trace.to_json()}))
    if args.csv:
        Path(args.csv).write_text(trace.to_csv())
        Path(args.csv + ".config.json").write_text(_dump(cfg))
    _write(args.out, _dump(summary))
    return EXIT_OK


def cmd_certify(args) -> int:
    inst = _load_instance(args.instance)
    report = certify_stability(inst, args.alpha, args.budget, exhaustive=args.exhaustive)
    out = {"config": _config(args, "instance", "alpha", "budget", "exhaustive"),
           "report": report.to_json()}
    _write(args.out, _dump(out))
    return EXIT_OK


STAGES = ("e3sat", "3dm", "cbt", "kmeans")


def cmd_reduce(args) -> int:
    phi = parse_dimacs(Path(args.cnf).read_text())
    outdir = Path(args.out_dir)
    outdir.mkdir(parents=True, exist_ok=True)
    cfg = _config(args, "cnf", "stage", "k_override", "coordinates")
    stop = STAGES.index(args.stage)
    written = []
    if args.input_stage == "e3sat":
        psi, prov = phi, None
    else:
        psi, prov = qsat_to_e3sat(phi)
        (outdir / "e3sat.cnf").write_text(psi.to_dimacs())
        written.append("e3sat.cnf")
    if stop >= 1:
        ts, p2 = e3sat_to_3dm(psi, args.k_override)
        if prov is not None:
            p2.previous = prov.stages()
        prov = p2
        name = "3dm" if stop == 1 else "cbt"
        if stop >= 2:
            ts = tdm_to_cbt(ts)
            prov = cbt_provenance(prov)
        (outdir / f"{name}.txt").write_text(ts.to_text())
        (outdir / f"{name}.json").write_text(dump_sidecar(ts) + "\n")
        written += [f"{name}.txt", f"{name}.json"]
        if stop >= 3:
            inst, prov = cbt_to_kmeans(ts, prov)
            obj = metric.to_json(inst, coordinates=False)
            if args.coordinates:
                from .reductions.embed import kmeans_coordinates
                obj["points"], obj["centres"] = kmeans_coordinates(ts)
            (outdir / "kmeans.json").write_text(_dump({"config": cfg, "instance": obj}))
            written.append("kmeans.json")
    if prov is not None:
        (outdir / "provenance.json").write_text(_dump({"config": cfg, "provenance": prov.to_json()}))
        written.append("provenance.json")
    _write(args.out, _dump({"config": cfg, "written": written}))
    return EXIT_OK


def cmd_verify_chain(args) -> int:
    phi = parse_dimacs(Path(args.cnf).read_text())
    budgets = Budgets(args.sat_budget, args.model_nodes, args.matching_nodes, args.matching_seconds)
    report = verify_chain(phi, args.k_override, budgets)
    out = {"config": _config(args, "cnf", "k_override", "sat_budget", "model_nodes",
                             "matching_nodes", "matching_seconds"),
           "report": report.to_json(timings=args.timings)}
    if not args.provenance:
        out["report"].pop("provenance", None)
    _write(args.out, _dump(out))
    if args.summary:
        sys.stderr.write(report.summary() + "\n")
    return {FAIL: EXIT_FAIL, INCONCLUSIVE: EXIT_INCONCLUSIVE}.get(report.verdict, EXIT_OK)


BENCH_FIELDS = ["instance", "n", "k", "delta", "iterations", "bound", "opt_found",
                "cost", "opt_cost", "stable", "error"]


def cmd_bench(args) -> int:
    suite = _read_json(args.suite)
    if isinstance(suite, list):
        suite = {"instances": suite}
    rho = int(suite.get("rho", args.rho))
    alpha = Fraction(str(suite.get("alpha", args.alpha)))
    rows = []
    for i, entry in enumerate(suite.get("instances", [])):
        name = entry.get("name", f"row{i}") if isinstance(entry, dict) else f"row{i}"
        row = dict.fromkeys(BENCH_FIELDS, "")
        row["instance"] = name
        try:
            spec = GenSpec.from_json({k: v for k, v in entry.items() if k != "name"})
            inst = generate(spec)
            row.update(n=inst.n_points, k=inst.k, delta=metric.delta_max(inst))
            bound = iteration_bound(inst)
            trace = run_local_search(inst, rho, first_k_centres(inst), cap=bound, threads=args.threads)
            S, c = trace.final
            optima, best = brute_force_optimum(inst, args.budget)
            report = certify_stability(inst, alpha, args.budget)
            row.update(iterations=trace.iterations, bound=bound, opt_found=c == best,
                       cost=metric.cost_to_json(c), opt_cost=metric.cost_to_json(best),
                       stable=report.stable)
            if isinstance(row["cost"], dict):
                row["cost"] = row["cost"]["approx"]
                row["opt_cost"] = row["opt_cost"]["approx"]
        except (StableKMError, KeyError, TypeError, AttributeError) as exc:
            row["error"] = f"{type(exc).__name__}: {exc}"
        rows.append(row)
    buf = _csv(BENCH_FIELDS, rows)
    _write(args.out, buf)
    cfg = _config(args, "suite", "budget", "threads")
    cfg.update(rho=rho, alpha=str(alpha))
    if args.out and args.out != "-":
        Path(args.out + ".config.json").write_text(_dump(cfg))
    return EXIT_OK


def _csv(fields, rows) -> str:
    import io
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow(r)
    return buf.getvalue()


def cmd_demo_appendix_d(args) -> int:
    rows = []
    prev = None
    for n in range(1, args.n_max + 1):
        phi, psi = appendix_d_family(n)
        s_phi = measure_sat_stability(phi, args.sat_budget)
        s_psi = measure_sat_stability(psi, args.sat_budget)
        rows.append({"n": n, "s_phi": str(s_phi), "s_psi": str(s_psi),
                     "s_phi_float": f"{float(s_phi):.6f}", "s_psi_float": f"{float(s_psi):.6f}",
                     "phi_at_least_half": s_phi >= Fraction(1, 2),
                     "psi_decreasing": "" if prev is None else s_psi < prev})
        prev = s_psi
    fields = ["n", "s_phi", "s_psi", "s_phi_float", "s_psi_float", "phi_at_least_half", "psi_decreasing"]
    _write(args.out, _csv(fields, rows))
    if args.out and args.out != "-":
        Path(args.out + ".config.json").write_text(_dump(_config(args, "n_max", "sat_budget")))
    ok = all(r["phi_at_least_half"] and r["psi_decreasing"] is not False for r in rows)
    return EXIT_OK if ok else EXIT_FAIL


# -- parser -------------------------------------------------------------------

def _positive_fraction(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="stablekm", description="Exact local search for stable clustering and "
                "stability-preserving reductions.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="build a seeded instance from a generator spec")
    g.add_argument("spec", help="GenSpec JSON (file path or inline)")
    g.add_argument("-o", "--out")
    g.set_defaults(func=cmd_generate)

    s = sub.add_parser("solve", help="run multi-swap local search")
    s.add_argument("instance")
    s.add_argument("--rho", type=int, default=2)
    s.add_argument("--truncate", action="store_true", help="cap at ceil(2k ln(n Delta)) iterations")
    s.add_argument("--cap", type=int, default=None)
    s.add_argument("--start", type=int, nargs="+", help="starting centre indices (default: first k)")
    s.add_argument("--compare-optimum", action="store_true")
    s.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    s.add_argument("--trace", help="trace JSON path")
    s.add_argument("--csv", help="trace CSV path")
    s.add_argument("--threads", type=int, default=1)
    s.add_argument("-o", "--out")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("certify", help="exact alpha-stability check")
    c.add_argument("instance")
    c.add_argument("--alpha", type=_positive_fraction, default=Fraction(21, 20))
    c.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    c.add_argument("--exhaustive", action="store_true")
    c.add_argument("-o", "--out")
    c.set_defaults(func=cmd_certify)

    r = sub.add_parser("reduce", help="run the reduction chain on a DIMACS formula")
    r.add_argument("cnf")
    r.add_argument("--stage", choices=STAGES, default="kmeans", help="last stage to emit")
    r.add_argument("--input-stage", choices=("qsat", "e3sat"), default="qsat",
                   help="treat the input as already exactly-3 (skips the first stage)")
    r.add_argument("--k-override", type=int, default=None)
    r.add_argument("--coordinates", action="store_true", help="also emit 3n-dimensional coordinates")
    r.add_argument("--out-dir", required=True)
    r.add_argument("-o", "--out")
    r.set_defaults(func=cmd_reduce)

    v = sub.add_parser("verify-chain", help="build and brute-force check the whole chain")
    v.add_argument("cnf")
    v.add_argument("--k-override", type=int, default=4)
    v.add_argument("--sat-budget", type=int, default=Budgets.sat_assignments)
    v.add_argument("--model-nodes", type=int, default=Budgets.model_nodes)
    v.add_argument("--matching-nodes", type=int, default=Budgets.matching_nodes)
    v.add_argument("--matching-seconds", type=float, default=Budgets.matching_seconds)
    v.add_argument("--provenance", action="store_true", help="include full provenance maps")
    v.add_argument("--summary", action="store_true", help="print a text summary to stderr")
    v.add_argument("--timings", action="store_true")
    v.add_argument("-o", "--out")
    v.set_defaults(func=cmd_verify_chain)

    b = sub.add_parser("bench", help="iterations versus bound over a suite of generator specs")
    b.add_argument("suite")
    b.add_argument("--rho", type=int, default=2)
    b.add_argument("--alpha", default="21/20")
    b.add_argument("--budget", type=int, default=DEFAULT_BUDGET)
    b.add_argument("--threads", type=int, default=1)
    b.add_argument("-o", "--out")
    b.set_defaults(func=cmd_bench)

    d = sub.add_parser("demo-appendix-d", help="stability of the split-occurrence family")
    d.add_argument("--n-max", type=int, default=6)
    d.add_argument("--sat-budget", type=int, default=Budgets.sat_assignments)
    d.add_argument("-o", "--out")
    d.set_defaults(func=cmd_demo_appendix_d)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "threads", 1) < 1:
        parser.error("--threads must be at least 1")
    try:
        return args.func(args)
    except BudgetExceeded as exc:
        sys.stderr.write(f"inconclusive: {exc}\n")
        return EXIT_INCONCLUSIVE
    except (StableKMError, UsageError, OSError, ValueError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
