"""Command-line interface: ``forbcount <subcommand> ...``.

Every subcommand writes one flat record (or table) as CSV or ``key=value``
text.  Wall-clock timings go to a leading ``#`` comment so the CSV body is
reproducible byte for byte.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time
from pathlib import Path

from . import acceptance, generators
from .counting import BudgetExceeded, count_forb
from .estimator import EstimatorConfig, estimate_z
from .extremal import RecoveryFailed, dist_forbhom, ex_value, find_recovering_partition
from .graphs import ForbiddenFamily, builtin_graph, format_graph, format_weighted, read_graph, read_weighted
from .partitions import FKRegularityError, find_fk_partition, format_partition
from .removal import removal_report


class Output:
    """Collects records and renders them as CSV or text."""

    def __init__(self, fmt: str):
        self.fmt = fmt
        self.comments: list[str] = []
        self.header: list[str] | None = None
        self.rows: list[list] = []

    def comment(self, text: str):
        self.comments.append(text)

    def record(self, fields: dict):
        if self.header is None:
            self.header = list(fields)
        self.rows.append([fields.get(h, "") for h in self.header])

    def table(self, header, rows):
        self.header = list(header)
        self.rows.extend(list(r) for r in rows)

    def render(self) -> str:
        buf = io.StringIO()
        for c in self.comments:
            buf.write(f"# {c}\n")
        if self.fmt == "csv":
            writer = csv.writer(buf, lineterminator="\n")
            if self.header:
                writer.writerow(self.header)
            writer.writerows(self.rows)
        else:
            for row in self.rows:
                buf.write(" ".join(f"{h}={v}" for h, v in zip(self.header, row)) + "\n")
        return buf.getvalue()


def parse_family(spec: str) -> ForbiddenFamily:
    """Comma-separated builtin names (K3, P4, C5, ...) or paths to edge-list files."""
    members, names = [], []
    for token in (t.strip() for t in spec.split(",")):
        if not token:
            continue
        path = Path(token)
        if path.is_file():
            members.append(read_graph(path))
            names.append(path.stem)
        else:
            members.append(builtin_graph(token))
            names.append(token.upper())
    return ForbiddenFamily(members, names)


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, float) else str(x)


# subcommands ------------------------------------------------------------------

def cmd_gen(args, out: Output):
    params = {k: v for k, v in (("n", args.n), ("r", args.r), ("p", args.p), ("a", args.a), ("b", args.b),
                                ("class_size", args.class_size)) if v is not None}
    if args.kind == "blowup":
        params["r"] = read_weighted(args.weighted)
    if args.kind == "planted":
        params["fam"] = parse_family(args.family)
    g = generators.generate(args.kind, seed=args.seed, **params)
    return format_graph(g)


def cmd_count(args, out: Output):
    g = read_graph(args.graph)
    fam = parse_family(args.family)
    res = count_forb(g, fam, node_budget=args.budget)
    out.comment(f"elapsed_ms={1000 * res.elapsed:.3f}")
    out.record({"n": res.n, "m": res.m, "family": fam.label, "count": str(res.count),
                "z": _fmt(res.z), "nodes": res.nodes})


def cmd_estimate(args, out: Output):
    g = read_graph(args.graph)
    fam = parse_family(args.family)
    cfg = EstimatorConfig(q=args.q, trials=args.trials, seed=args.seed, K=args.K, mode=args.mode, eps=args.eps)
    rep = estimate_z(g, fam, cfg)
    out.comment(f"elapsed_ms={1000 * rep.elapsed:.3f}")
    out.comment("trial_elapsed_ms=" + ",".join(f"{t:.3f}" for t in rep.trial_ms))
    rows = [[t, cfg.q, _fmt(z), "", "", ""] for t, z in enumerate(rep.per_trial)]
    rows.append(["summary", cfg.q, "", _fmt(rep.median), _fmt(rep.iqr), cfg.mode])
    out.table(["trial", "q", "z_sample", "median", "iqr", "mode"], rows)


def cmd_ex(args, out: Output):
    r = read_weighted(args.weighted)
    fam = parse_family(args.family)
    ex, sel = ex_value(r, fam)
    support = " ".join(f"{i}-{j}" for i, j in sel.kept)
    out.record({"k": r.n, "family": fam.label, "ex": _fmt(ex), "support": support,
                "dist_forbhom": _fmt(dist_forbhom(r, fam)), "exact": int(sel.exact)})


def cmd_partition(args, out: Output):
    g = read_graph(args.graph)
    start = time.perf_counter()
    try:
        fk = find_fk_partition(g, args.gamma, args.k0, mode=args.cut_mode)
    except FKRegularityError as err:
        _write_partition(args, err.partition)
        raise
    out.comment(f"elapsed_ms={1000 * (time.perf_counter() - start):.3f}")
    _write_partition(args, fk.partition)
    out.record({"n": g.n, "k": fk.partition.k, "gamma": _fmt(args.gamma), "cut_value": _fmt(fk.cut_value),
                "certified": int(fk.certified), "iterations": fk.iterations})


def _write_partition(args, p):
    if args.partition_out:
        Path(args.partition_out).write_text(format_partition(p))


def cmd_recover(args, out: Output):
    g = read_graph(args.graph)
    fam = parse_family(args.family)
    rec = find_recovering_partition(g, fam, args.eps, args.gamma, args.k0, max_retries=args.max_retries)
    _write_partition(args, rec.partition)
    out.record({"k": rec.partition.k, "eps": _fmt(rec.eps), "achieved_dist": _fmt(rec.achieved_dist),
                "gamma_used": _fmt(rec.gamma_used), "retries": rec.retries, "exact": int(rec.exact)})


def cmd_removal(args, out: Output):
    r = read_weighted(args.weighted)
    fam = parse_family(args.family)
    rep = removal_report(r, fam, args.eps)
    w = rep.witness
    out.record({"k": r.n, "family": fam.label, "eps": _fmt(args.eps), "dist": _fmt(rep.dist),
                "witness": "none" if w is None else w.name,
                "witness_edges": "" if w is None else " ".join(f"{u}-{v}" for u, v in w.member.edges),
                "density": "" if w is None else _fmt(w.density),
                "threshold_edges": rep.threshold.m,
                "threshold_loop_mass": _fmt(rep.threshold.dropped_loop_mass)})


def cmd_verify(args, out: Output):
    numbers = sorted({int(x) for x in args.criteria.split(",")}) if args.criteria else None
    results = acceptance.run_suite(numbers)
    if not args.skip_determinism:
        results.append(acceptance.determinism_check(results, numbers))
    print(acceptance.table(results), file=sys.stderr)
    for r in results:
        out.comment(f"criterion {r.number} elapsed_ms={1000 * r.elapsed:.1f}")
    out.table(["criterion", "title", "passed", "detail"],
              [[r.number, r.title, int(r.passed), r.detail] for r in results])
    return 0 if all(r.passed for r in results) else 1


COMMANDS = {"count": cmd_count, "estimate": cmd_estimate, "ex": cmd_ex, "partition": cmd_partition,
            "recover": cmd_recover, "removal": cmd_removal, "verify": cmd_verify}


# experiment specs -------------------------------------------------------------

def run_spec(path, fmt_override=None) -> int:
    """Run a JSON experiment spec.

    Keys: ``generator`` ({name, params, seed}), ``family``, ``operation``,
    ``config`` (operation flags) and ``output`` ({path, format}).  The
    generated graph is written next to the output as ``<output>.graph``
    (as a weighted graph for ``ex`` and ``removal``).
    """
    spec = json.loads(Path(path).read_text())
    gen = spec["generator"]
    if "seed" not in gen:
        raise ValueError("generator seed must be given explicitly")
    op = spec["operation"]
    if op not in COMMANDS or op == "verify":
        raise ValueError(f"unsupported operation {op!r} in spec")
    params = dict(gen.get("params", {}))
    if gen["name"] == "planted":
        params["fam"] = parse_family(spec["family"])
    g = generators.generate(gen["name"], seed=int(gen["seed"]), **params)
    output = spec.get("output", {})
    out_path = output.get("path")
    graph_path = Path(out_path + ".graph") if out_path else Path(path).with_suffix(".graph")
    graph_path.write_text(format_weighted(g.as_weighted()) if op in ("ex", "removal") else format_graph(g))
    argv = [op, str(graph_path), "--family", spec["family"], "--seed", str(int(gen["seed"]))]
    for key, value in spec.get("config", {}).items():
        argv += [f"--{key.replace('_', '-')}", str(value)]
    if out_path:
        argv += ["--out", out_path]
    argv += ["--format", fmt_override or output.get("format", "csv")]
    return main(argv)


# argument parsing -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=argparse.SUPPRESS, help="random seed (default 0)")
    common.add_argument("--out", default=argparse.SUPPRESS, help="output file (default stdout)")
    common.add_argument("--format", choices=("csv", "text"), default=argparse.SUPPRESS)

    parser = argparse.ArgumentParser(prog="forbcount", parents=[common],
                                     description="Count and estimate F-free spanning subgraphs.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", parents=[common], help="generate a graph")
    p.add_argument("kind", choices=("complete", "turan", "er", "bipartite", "blowup", "planted"))
    p.add_argument("--n", type=int)
    p.add_argument("--r", type=int)
    p.add_argument("--p", type=float)
    p.add_argument("--a", type=int)
    p.add_argument("--b", type=int)
    p.add_argument("--class-size", type=int)
    p.add_argument("--weighted", help="weighted graph file for blowup")
    p.add_argument("--family", help="family for planted")

    p = sub.add_parser("count", parents=[common], help="exact count of F-free spanning subgraphs")
    p.add_argument("graph")
    p.add_argument("--family", default="K3")
    p.add_argument("--budget", type=int, default=10 ** 9)

    p = sub.add_parser("estimate", parents=[common], help="sampling estimate of z")
    p.add_argument("graph")
    p.add_argument("--family", default="K3")
    p.add_argument("--q", type=int, required=True)
    p.add_argument("--trials", type=int, default=25)
    p.add_argument("--K", type=int, default=3)
    p.add_argument("--mode", choices=("exact-count", "cluster-max"), default="exact-count")
    p.add_argument("--eps", type=float, default=0.05)

    p = sub.add_parser("ex", parents=[common], help="ex value and distance of a weighted graph")
    p.add_argument("weighted")
    p.add_argument("--family", default="K3")

    p = sub.add_parser("partition", parents=[common], help="weak-regular equipartition")
    p.add_argument("graph")
    p.add_argument("--gamma", type=float, required=True)
    p.add_argument("--k0", type=int, default=2)
    p.add_argument("--cut-mode", choices=("auto", "exact", "heuristic"), default="auto")
    p.add_argument("--partition-out")

    p = sub.add_parser("recover", parents=[common], help="recovering equipartition")
    p.add_argument("graph")
    p.add_argument("--family", default="K3")
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--gamma", type=float, default=0.1)
    p.add_argument("--k0", type=int, default=2)
    p.add_argument("--max-retries", type=int, default=4)
    p.add_argument("--partition-out")

    p = sub.add_parser("removal", parents=[common], help="removal witness for a weighted graph")
    p.add_argument("weighted")
    p.add_argument("--family", default="K3")
    p.add_argument("--eps", type=float, required=True)

    p = sub.add_parser("verify", parents=[common], help="run the acceptance criteria")
    p.add_argument("--criteria", help="comma-separated subset, e.g. 1,2,5")
    p.add_argument("--skip-determinism", action="store_true", help="skip the repeated run")

    p = sub.add_parser("run", parents=[common], help="run a JSON experiment spec")
    p.add_argument("spec")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    explicit_format = getattr(args, "format", None)
    for name, default in (("seed", 0), ("out", None), ("format", "csv")):
        if not hasattr(args, name):
            setattr(args, name, default)
    try:
        if args.command == "run":
            return run_spec(args.spec, explicit_format)
        if args.command == "gen":
            text = cmd_gen(args, None)
            code = 0
        else:
            out = Output(args.format)
            code = COMMANDS[args.command](args, out) or 0
            text = out.render()
    except (ValueError, KeyError, OSError, BudgetExceeded, FKRegularityError, RecoveryFailed) as err:
        print(f"forbcount {args.command}: {err}", file=sys.stderr)
        return 2
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
