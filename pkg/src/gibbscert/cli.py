"""Batch front-end: build model artifacts, run checks, run experiments.

Subcommands:

* build: materialize a model spec into hypergraph and line-graph artifacts.
* check: run uniqueness criteria against a built model and write reports.
* experiment: boundary-sensitivity decay table over a radius sweep.
* disorder: moment function, critical coupling, and the quenched decay table.

Every JSON output embeds the resolved configuration, its hash, the seed, and
the library version, so equal hashes mean equal numeric outputs.  CSV tables
carry pure data rows (RFC 4180); their provenance lives in the JSON summary
written next to them.  Wall-clock timings also stay out of the CSV so that
reruns with the same seed produce byte-identical tables.

Exit codes: 0 holds/success, 1 fails, 2 inconclusive, 64 usage or input error.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import sys
import time
from pathlib import Path

from . import __version__
from .conditions import (
    EPSILON_DEFAULT,
    certify_temperedness,
    dobrushin_check,
    explicit_kappa_check,
    main_uniqueness_check,
    phi_class_certificate,
)
from .enumeration import (
    Budget,
    GROWTH_LOG,
    growth_floor_log_squared,
)
from .gibbs import SizeError, boundary_sensitivity, disorder_decay_experiment
from .hypergraph import check_separability
from .linegraph import adjacency_json, build_line_graph, edge_list_csv
from .models import (
    CliqueTreeSpec,
    RandomInteractionSpec,
    build_overlapping_cliques,
    load_model_spec,
)
from .models import tau_and_threshold

EXIT_OK = 0
EXIT_FAILS = 1
EXIT_INCONCLUSIVE = 2
EXIT_USAGE = 64

CRITERIA = ("dobrushin", "tempered-main", "explicit-kappa", "phi-class")

# thirty dyadic steps on the log scale; the series' default probe sequence
_DEFAULT_LOG_T = tuple(float(2**k) for k in range(1, 32))


class _Parser(argparse.ArgumentParser):
    """argparse with usage failures mapped onto the 64 exit code."""

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _config_hash(payload: dict) -> str:
    canonical = json.dumps(payload, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def _stamp(payload: dict, config: dict, seed) -> dict:
    out = dict(payload)
    out["config"] = config
    out["config_hash"] = _config_hash(config)
    out["seed"] = seed
    out["version"] = __version__
    return out


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, sort_keys=True, indent=2) + "\n",
                    encoding="utf-8")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf)
    writer.writerow(header)
    writer.writerows(rows)
    path.write_text(buf.getvalue(), encoding="utf-8", newline="")


def _load_tree_spec(path: str) -> tuple[CliqueTreeSpec, dict]:
    data = load_model_spec(path)
    return CliqueTreeSpec.from_dict(data), data


def _cell(value) -> object:
    """CSV cell for an optional float; empty when absent."""
    if value is None:
        return ""
    if isinstance(value, float) and math.isinf(value):
        return "inf"
    return repr(value) if isinstance(value, float) else value


# -- build ---------------------------------------------------------------------


def cmd_build(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        spec, raw = _load_tree_spec(args.spec)
        hg, _model = build_overlapping_cliques(spec)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"build: invalid model spec: {exc}", file=sys.stderr)
        return EXIT_USAGE

    lg = build_line_graph(hg)
    (out_dir / "hypergraph.json").write_text(hg.to_json(), encoding="utf-8")
    (out_dir / "linegraph.json").write_text(adjacency_json(lg), encoding="utf-8")
    (out_dir / "linegraph_edges.csv").write_text(edge_list_csv(lg), encoding="utf-8",
                                                 newline="")

    resolved = spec.to_dict()
    for key in ("distribution", "params", "seed"):
        if key in raw:
            resolved[key] = raw[key]
    _write_json(out_dir / "modelspec.json", resolved)

    histogram: dict[str, int] = {}
    for node in lg.nodes:
        histogram[str(lg.degree(node))] = histogram.get(str(lg.degree(node)), 0) + 1
    separability = check_separability(hg)
    config = {"subcommand": "build", "spec": resolved}
    summary = _stamp(
        {
            "vertex_count": hg.vertex_count,
            "edge_count": hg.edge_count,
            "line_degree_histogram": dict(sorted(histogram.items())),
            "separability_passed": separability.passed,
        },
        config,
        raw.get("seed"),
    )
    _write_json(out_dir / "summary.json", summary)
    print(f"build: {hg.vertex_count} vertices, {hg.edge_count} edges -> {out_dir}")
    return EXIT_OK


# -- check ---------------------------------------------------------------------


def _certificate_for(lg, abar, depth, budget):
    degrees = lg.degrees()
    if abar is None:
        # the loosest bound the truncation itself supports: every animal
        # average of log(degree) is at most the maximum over nodes
        abar = max(math.log(d) for d in degrees.values() if d > 0)
    return certify_temperedness(
        lg, GROWTH_LOG, abar, depth_cap=depth, budget=budget
    )


def _run_criterion(name, hg, lg, model, args):
    budget = Budget(args.budget) if args.budget is not None else None
    bounds = model.bounds()
    if name == "dobrushin":
        return dobrushin_check(hg, bounds)
    if name == "tempered-main":
        certificate = _certificate_for(lg, args.abar, args.depth, budget)
        return main_uniqueness_check(
            lg, bounds, certificate, epsilon=args.epsilon,
            depth_cap=args.depth, budget=budget,
        )
    if name == "explicit-kappa":
        certificate = _certificate_for(lg, args.abar, args.depth, budget)
        if not certificate.usable:
            from .conditions import ConditionReport, VERDICT_INCONCLUSIVE

            return ConditionReport(
                criterion="explicit-kappa", verdict=VERDICT_INCONCLUSIVE,
                flags={"reason": f"certificate status {certificate.status}"},
            )
        return explicit_kappa_check(lg, bounds, certificate, epsilon=args.epsilon)
    if name == "phi-class":
        result = phi_class_certificate(
            lg, growth_floor_log_squared(), GROWTH_LOG,
            log_t_sequence=_DEFAULT_LOG_T, terms=30,
        )
        from .conditions import ConditionReport

        status_to_verdict = {
            "closed-form": "holds", "refuted": "fails",
            "inconclusive": "inconclusive",
        }
        return ConditionReport(
            criterion="phi-class",
            verdict=status_to_verdict[result.certificate.status],
            margin=None,
            witness=result.hub_violations[0] if result.hub_violations else None,
            flags={
                "b_bar": result.b_bar,
                "abar": result.certificate.abar,
                "tail_closed": result.tail_closed,
                "hub_violations": len(result.hub_violations),
            },
        )
    raise ValueError(f"unknown criterion {name!r}")


def cmd_check(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        spec, raw = _load_tree_spec(args.spec)
        hg, model = build_overlapping_cliques(spec)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"check: invalid model spec: {exc}", file=sys.stderr)
        return EXIT_USAGE
    lg = build_line_graph(hg)

    names = args.criterion or list(CRITERIA)
    config = {
        "subcommand": "check", "spec": spec.to_dict(), "criteria": list(names),
        "epsilon": args.epsilon, "depth": args.depth, "budget": args.budget,
        "abar": args.abar,
    }
    worst = EXIT_OK
    for name in names:
        report = _run_criterion(name, hg, lg, model, args)
        payload = _stamp(report.to_json_dict(), config, raw.get("seed"))
        _write_json(out_dir / f"report_{name}.json", payload)
        print(f"check {name}: {report.verdict}"
              + (f" (margin {report.margin:.6g})" if report.margin is not None else ""))
        if report.exit_code == EXIT_FAILS:
            worst = EXIT_FAILS
        elif report.exit_code == EXIT_INCONCLUSIVE and worst != EXIT_FAILS:
            worst = EXIT_INCONCLUSIVE
    return worst


# -- experiment ------------------------------------------------------------------


def cmd_experiment(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        spec, raw = _load_tree_spec(args.spec)
        hg, model = build_overlapping_cliques(spec)
        radii = [int(r) for r in args.radii.split(",")]
        if not radii or any(r < 0 for r in radii):
            raise ValueError(f"bad radius list {args.radii!r}")
        statistic = None
        if args.statistic is not None:
            statistic = (int(args.statistic),)
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"experiment: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE

    rows = []
    timings = {}
    for radius in radii:
        started = time.perf_counter()
        try:
            result = boundary_sensitivity(
                model, args.x, e_x=args.e_x, radius=radius, statistic=statistic,
                mode=args.mode, epsilon=args.epsilon, samples=args.samples,
                seed=args.seed,
            )
        except SizeError as exc:
            print(f"experiment: radius {radius}: {exc}", file=sys.stderr)
            print("experiment: try --mode random-search", file=sys.stderr)
            return EXIT_USAGE
        timings[str(radius)] = round((time.perf_counter() - started) * 1000.0, 3)
        rows.append([radius, _cell(result.m_value), _cell(result.envelope),
                     result.method, result.kernel_calls])

    _write_csv(out_dir / "experiment.csv",
               ["radius", "m_value", "envelope", "method", "kernel_calls"], rows)
    config = {
        "subcommand": "experiment", "spec": spec.to_dict(), "x": args.x,
        "e_x": args.e_x, "radii": radii, "mode": args.mode,
        "statistic": args.statistic, "epsilon": args.epsilon,
        "samples": args.samples,
    }
    summary = _stamp(
        {
            "rows": [
                {"radius": r[0], "m_value": r[1], "envelope": r[2] or None,
                 "method": r[3], "kernel_calls": r[4]}
                for r in rows
            ],
            "runtime_ms": timings,
        },
        config,
        args.seed,
    )
    _write_json(out_dir / "experiment_summary.json", summary)
    print(f"experiment: {len(rows)} radii -> {out_dir / 'experiment.csv'}")
    return EXIT_OK


# -- disorder --------------------------------------------------------------------


def cmd_disorder(args) -> int:
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    try:
        spec, raw = _load_tree_spec(args.spec)
        params = tuple(float(p) for p in args.params.split(","))
        couplings = [float(k) for k in args.coupling] or [0.0]
        schedule = tuple(int(s) for s in args.schedule.split(","))
        if not schedule or schedule[0] < 1 or any(
            b <= a for a, b in zip(schedule, schedule[1:])
        ):
            raise ValueError(f"schedule {args.schedule!r} must be strictly "
                             "increasing and positive")
        base = RandomInteractionSpec(
            distribution=args.distribution, params=params,
            coupling=couplings[0], seed=args.seed,
        )
        threshold = tau_and_threshold(base, args.abar)
        tau_rows = [
            {"coupling": k, "tau": base.tau(k),
             "ratio": math.exp(args.abar) * base.tau(k)}
            for k in couplings
        ]
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"disorder: invalid input: {exc}", file=sys.stderr)
        return EXIT_USAGE

    config = {
        "subcommand": "disorder", "spec": spec.to_dict(),
        "distribution": args.distribution, "params": list(params),
        "couplings": couplings, "schedule": list(schedule),
        "replicas": args.replicas, "abar": args.abar,
    }
    summary_body = {
        "k_star": None if math.isinf(threshold.k_star) else threshold.k_star,
        "target": threshold.target,
        "tau": tau_rows,
        "decay_table": None,
    }

    if args.replicas > 0 and len(couplings) == 1:
        result = disorder_decay_experiment(
            spec, base, x=args.x, schedule=schedule, replicas=args.replicas,
            abar=args.abar, seed=args.seed,
        )
        rows = [
            [row["k"], row["n_k"], _cell(row["mean"]), _cell(row["stderr"]),
             _cell(row["envelope"])]
            for row in result.rows
        ]
        _write_csv(out_dir / "disorder_decay.csv",
                   ["k", "n_k", "mean", "stderr", "envelope"], rows)
        summary_body["decay_table"] = "disorder_decay.csv"
        summary_body["supercritical"] = result.supercritical
        if result.supercritical:
            print("disorder: warning: coupling at or beyond the critical value; "
                  "the envelope diverges", file=sys.stderr)

    summary = _stamp(summary_body, config, args.seed)
    _write_json(out_dir / "disorder_summary.json", summary)
    k_star_text = "inf" if math.isinf(threshold.k_star) else f"{threshold.k_star:.9g}"
    print(f"disorder: K* = {k_star_text} at abar = {args.abar:.9g}")
    return EXIT_OK


# -- wiring ----------------------------------------------------------------------


def _build_parser() -> _Parser:
    parser = _Parser(prog="gibbscert",
                     description="Uniqueness certificates for hypergraph Gibbs fields")
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_build = sub.add_parser("build", parents=[], help="materialize model artifacts",
                             add_help=True)
    p_build.add_argument("--spec", required=True, help="model spec file (json or toml)")
    p_build.add_argument("--out", required=True, help="output directory")
    p_build.set_defaults(func=cmd_build)

    p_check = sub.add_parser("check", help="run uniqueness criteria")
    p_check.add_argument("--spec", required=True)
    p_check.add_argument("--out", required=True)
    p_check.add_argument("--criterion", action="append", choices=CRITERIA,
                         help="repeatable; default runs all criteria")
    p_check.add_argument("--epsilon", type=float, default=EPSILON_DEFAULT)
    p_check.add_argument("--depth", type=int, default=2)
    p_check.add_argument("--budget", type=int, default=None)
    p_check.add_argument("--abar", type=float, default=None,
                         help="growth bound; default derives it from the maximum degree")
    p_check.set_defaults(func=cmd_check)

    p_exp = sub.add_parser("experiment", help="boundary-sensitivity decay table")
    p_exp.add_argument("--spec", required=True)
    p_exp.add_argument("--out", required=True)
    p_exp.add_argument("--x", type=int, default=0, help="probe vertex")
    p_exp.add_argument("--e-x", dest="e_x", type=int, default=None,
                       help="root edge id; default lowest incident edge")
    p_exp.add_argument("--radii", default="1,2,3")
    p_exp.add_argument("--mode", choices=("exact-sup", "random-search"),
                       default="exact-sup")
    p_exp.add_argument("--statistic", default=None,
                       help="spin value defining the single-site event")
    p_exp.add_argument("--epsilon", type=float, default=None,
                       help="envelope decay rate; omit to leave the column empty")
    p_exp.add_argument("--samples", type=int, default=200)
    p_exp.add_argument("--seed", type=int, default=0)
    p_exp.set_defaults(func=cmd_experiment)

    p_dis = sub.add_parser("disorder", help="moment function and decay experiment")
    p_dis.add_argument("--spec", required=True)
    p_dis.add_argument("--out", required=True)
    p_dis.add_argument("--distribution",
                       choices=("exponential", "uniform", "degenerate"),
                       required=True)
    p_dis.add_argument("--params", required=True,
                       help="comma separated distribution parameters")
    p_dis.add_argument("--coupling", action="append", default=[],
                       help="repeatable coupling K; one value enables the decay table")
    p_dis.add_argument("--schedule", default="1,2,3,4,5,6")
    p_dis.add_argument("--replicas", type=int, default=0)
    p_dis.add_argument("--abar", type=float, required=True)
    p_dis.add_argument("--x", type=int, default=0)
    p_dis.add_argument("--seed", type=int, default=0)
    p_dis.set_defaults(func=cmd_disorder)

    return parser


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
