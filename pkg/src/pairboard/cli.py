"""Batch entry point for offline analysis.

Subcommands: leaderboard, winrates, axes-winrates, interpret (train/eval/
shap), reliability (raters/sentences), simulate, validate-log, serve.
Exit codes: 0 success, 1 domain error, 2 usage error. Every stochastic
subcommand takes --seed; with --strict-repro the seed is mandatory.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import os
import sys

import numpy as np

from .errors import LogParseError, PairboardError
from .interpret import (
    build_feature_dataset,
    evaluate_cross_lingual,
    format_shapley_table,
    mean_abs_shapley_report,
    model_from_coefficients,
    train_preference_classifier,
)
from .ranking import (
    LeaderboardConfig,
    SubgroupFilter,
    axis_win_rates,
    build_leaderboard,
    format_leaderboard_table,
    leaderboard_to_dicts,
    win_rates,
)
from .reliability import rater_subsample_curve, sentence_subsample_curve
from .simulate import WorldSpec, run_simulation
from .storage import (
    load_manifest,
    load_raters,
    read_log,
    save_manifest,
    save_raters,
    write_log,
)

_USAGE_EXIT = 2
_DOMAIN_EXIT = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(_USAGE_EXIT, f"{self.prog}: error: {message}\n")


def _add_io_flags(p: argparse.ArgumentParser, need_log: bool = True):
    p.add_argument("--manifest", required=True, help="path to manifest.json")
    if need_log:
        p.add_argument("--log", required=True, help="path to preferences.jsonl")
    p.add_argument("--out", help="output path (default: stdout)")
    p.add_argument(
        "--format", choices=("json", "table", "csv"), default="table",
        help="output format",
    )


def _add_filter_flags(p: argparse.ArgumentParser):
    p.add_argument("--language")
    p.add_argument("--domain")
    p.add_argument("--subset", choices=("normalized", "symbolic", "codemixed"))
    p.add_argument("--systems", help="comma-separated system allowlist")


def _add_stat_flags(p: argparse.ArgumentParser, default_replicates: int = 500):
    p.add_argument("--replicates", type=int, default=default_replicates)
    p.add_argument("--seed", type=int)
    p.add_argument("--pseudo-count", type=float, default=0.0)
    p.add_argument("--jobs", type=int, default=1,
                   help="parallelism hint; results are seed-deterministic either way")
    p.add_argument("--strict-repro", action="store_true",
                   help="require an explicit --seed for stochastic commands")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pairboard", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("leaderboard", help="BT leaderboard with bootstrap CIs")
    _add_io_flags(p)
    _add_filter_flags(p)
    _add_stat_flags(p)

    p = sub.add_parser("winrates", help="per-system win rates")
    _add_io_flags(p)
    _add_filter_flags(p)

    p = sub.add_parser("axes-winrates", help="per-axis win rates per system")
    _add_io_flags(p)
    _add_filter_flags(p)

    p = sub.add_parser("interpret", help="preference classifier and SHAP reports")
    isub = p.add_subparsers(dest="subcommand", required=True)

    pt = isub.add_parser("train", help="train the axis->preference classifier")
    _add_io_flags(pt)
    pt.add_argument("--train-languages", required=True,
                    help="comma-separated training languages")
    pt.add_argument("--include-ties", action="store_true")
    pt.add_argument("--c", type=float, default=1.0, help="inverse L2 strength")
    pt.add_argument("--seed", type=int, default=0)
    pt.add_argument("--model-out", required=True, help="where to write model.json")

    pe = isub.add_parser("eval", help="cross-lingual holdout accuracy")
    _add_io_flags(pe)
    pe.add_argument("--model", required=True, help="model.json from interpret train")
    pe.add_argument("--holdout-languages", required=True)
    pe.add_argument("--include-ties", action="store_true")

    ps = isub.add_parser("shap", help="mean |SHAP| attribution per axis")
    _add_io_flags(ps)
    ps.add_argument("--model", required=True)
    ps.add_argument("--languages", help="evaluation languages (default: all rows)")
    ps.add_argument("--include-ties", action="store_true")

    p = sub.add_parser("reliability", help="stability vs evaluation scale")
    rsub = p.add_subparsers(dest="subcommand", required=True)
    for mode in ("raters", "sentences"):
        pr = rsub.add_parser(mode)
        _add_io_flags(pr)
        pr.add_argument("--grid", required=True, help="comma-separated counts")
        pr.add_argument("--trials", type=int, default=20)
        pr.add_argument("--systems", help="comma-separated system subset")
        pr.add_argument("--target-rho", type=float, default=0.95)
        _add_stat_flags(pr, default_replicates=100)
        if mode == "sentences":
            pr.add_argument("--fixed-raters", type=int, default=200)

    p = sub.add_parser("simulate", help="generate a synthetic world")
    p.add_argument("--spec", help="WorldSpec JSON (flags below override)")
    p.add_argument("--systems", type=int)
    p.add_argument("--raters", type=int)
    p.add_argument("--sentences", type=int, help="sentences per language")
    p.add_argument("--languages", help="comma-separated language codes")
    p.add_argument("--tie-rate", type=float)
    p.add_argument("--rater-noise", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--out-dir", required=True)

    p = sub.add_parser("validate-log", help="parse and validate a preference log")
    p.add_argument("--manifest", required=True)
    p.add_argument("--log", required=True)

    p = sub.add_parser("serve", help="run the annotation/leaderboard service")
    p.add_argument("--manifest", required=True)
    p.add_argument("--raters", required=True, help="raters.json roster")
    p.add_argument("--log", required=True, help="preference log to append to")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)

    return parser


def _emit(text: str, out: str | None):
    if out:
        with open(out, "w", encoding="utf-8") as f:
            f.write(text if text.endswith("\n") else text + "\n")
    else:
        print(text)


def _check_seed(args) -> None:
    if getattr(args, "strict_repro", False) and getattr(args, "seed", None) is None:
        raise PairboardError("--strict-repro requires an explicit --seed")


def _load_inputs(args):
    manifest = load_manifest(args.manifest)
    log = read_log(args.log, manifest)
    return manifest, log


def _subgroup(args) -> SubgroupFilter:
    return SubgroupFilter(
        language=args.language,
        domain=args.domain,
        subset=args.subset,
        systems=frozenset(args.systems.split(",")) if args.systems else None,
    )


def _csv_text(rows: list[dict]) -> str:
    if not rows:
        return ""
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=list(rows[0]))
    writer.writeheader()
    writer.writerows(rows)
    return buf.getvalue()


def _cmd_leaderboard(args) -> int:
    _check_seed(args)
    manifest, log = _load_inputs(args)
    entries = build_leaderboard(
        log,
        _subgroup(args),
        LeaderboardConfig(
            replicates=args.replicates,
            seed=args.seed,
            pseudo_count=args.pseudo_count,
        ),
    )
    if args.format == "table":
        _emit(format_leaderboard_table(entries, manifest), args.out)
    elif args.format == "csv":
        _emit(_csv_text(leaderboard_to_dicts(entries)), args.out)
    else:
        _emit(json.dumps(leaderboard_to_dicts(entries), indent=2), args.out)
    return 0


def _cmd_winrates(args) -> int:
    _, log = _load_inputs(args)
    rates = win_rates(log, _subgroup(args))
    if args.format == "json":
        _emit(json.dumps(rates, indent=2), args.out)
    elif args.format == "csv":
        _emit(_csv_text([{"system_id": k, "win_rate_pct": v} for k, v in rates.items()]), args.out)
    else:
        width = max(len(k) for k in rates)
        lines = [f"{k.ljust(width)}  {v:6.2f}" for k, v in sorted(rates.items(), key=lambda kv: -kv[1])]
        _emit("\n".join(lines), args.out)
    return 0


def _cmd_axes_winrates(args) -> int:
    _, log = _load_inputs(args)
    rates = axis_win_rates(log, _subgroup(args))
    if args.format == "json":
        _emit(json.dumps(rates, indent=2), args.out)
        return 0
    axes = list(next(iter(rates.values())).keys()) if rates else []
    rows = [
        {"system_id": sid, **{axis: round(vals[axis], 2) for axis in axes}}
        for sid, vals in rates.items()
    ]
    if args.format == "csv":
        _emit(_csv_text(rows), args.out)
    else:
        header = ["system".ljust(12)] + [a[:12].rjust(14) for a in axes]
        lines = ["".join(header)]
        for row in rows:
            cells = [str(row["system_id"]).ljust(12)] + [
                f"{row[a]:14.2f}" for a in axes
            ]
            lines.append("".join(cells))
        _emit("\n".join(lines), args.out)
    return 0


def _rows_for(args, log):
    return build_feature_dataset(log, include_overall_ties=args.include_ties)


def _cmd_interpret(args) -> int:
    manifest, log = _load_inputs(args)
    rows = _rows_for(args, log)
    if args.subcommand == "train":
        model = train_preference_classifier(
            rows,
            args.train_languages.split(","),
            hyperparameters={"c": args.c},
            seed=args.seed,
        )
        doc = {
            "type": "logistic",
            "coef": model.hyperparameters["coef"],
            "intercept": model.hyperparameters["intercept"],
            "training_languages": sorted(model.training_languages),
        }
        with open(args.model_out, "w", encoding="utf-8") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")
        _emit(json.dumps({"trained_on": doc["training_languages"],
                          "n_rows": len(rows)}, indent=2), args.out)
        return 0

    with open(args.model, "r", encoding="utf-8") as f:
        doc = json.load(f)
    model = model_from_coefficients(
        doc["coef"], doc["intercept"], doc["training_languages"]
    )
    if args.subcommand == "eval":
        report = evaluate_cross_lingual(model, rows, args.holdout_languages.split(","))
        body = {
            "pooled_accuracy": report.pooled_accuracy,
            "per_language": report.per_language,
            "n_rows": report.n_rows,
        }
        _emit(json.dumps(body, indent=2), args.out)
        return 0

    # shap
    train_rows = [r for r in rows if r.language in model.training_languages]
    if not train_rows:
        raise PairboardError("log has no rows from the model's training languages")
    background = np.array([r.features for r in train_rows])
    eval_rows = rows
    if args.languages:
        wanted = set(args.languages.split(","))
        eval_rows = [r for r in rows if r.language in wanted]
    report = mean_abs_shapley_report(model, eval_rows, background)
    if args.format == "json":
        _emit(json.dumps(report.to_dict(), indent=2), args.out)
    else:
        _emit(format_shapley_table(report), args.out)
    return 0


def _cmd_reliability(args) -> int:
    _check_seed(args)
    if args.replicates == 100:
        print(
            "note: reliability sweeps default to 100 bootstrap replicates "
            "(headline leaderboards use 500); pass --replicates to change.",
            file=sys.stderr,
        )
    _, log = _load_inputs(args)
    grid = tuple(int(g) for g in args.grid.split(","))
    subset = tuple(args.systems.split(",")) if args.systems else None
    if args.subcommand == "raters":
        curve = rater_subsample_curve(
            log, subset, grid,
            trials=args.trials,
            bootstrap_replicates=args.replicates,
            seed=args.seed,
            pseudo_count=args.pseudo_count,
        )
    else:
        curve = sentence_subsample_curve(
            log, subset, grid,
            fixed_raters=args.fixed_raters,
            trials=args.trials,
            bootstrap_replicates=args.replicates,
            seed=args.seed,
            pseudo_count=args.pseudo_count,
        )
    from .reliability import find_threshold

    threshold = find_threshold(curve, args.target_rho)
    if args.format == "csv":
        _emit(curve.to_csv(), args.out)
    elif args.format == "json":
        body = curve.to_dict()
        body["threshold"] = (
            {
                "axis_value": threshold.axis_value,
                "mean_rho": threshold.mean_rho,
                "mean_ci_width": threshold.mean_ci_width,
            }
            if threshold
            else "not reached"
        )
        _emit(json.dumps(body, indent=2), args.out)
    else:
        lines = [
            f"{'n':>8}  {'mean_rho':>9}  {'rho_std':>8}  {'mean_ci_width':>14}"
        ]
        for p in curve.grid:
            lines.append(
                f"{p.axis_value:>8}  {p.mean_rho:>9.4f}  {p.rho_std:>8.4f}  "
                f"{p.mean_ci_width:>14.2f}"
            )
        if threshold:
            lines.append(
                f"rho >= {args.target_rho} first reached at {threshold.axis_value} "
                f"(mean CI width {threshold.mean_ci_width:.2f})"
            )
        else:
            lines.append(f"rho >= {args.target_rho}: not reached")
        _emit("\n".join(lines), args.out)
    return 0


def _cmd_simulate(args) -> int:
    if args.spec:
        spec = WorldSpec.load(args.spec)
    else:
        spec = WorldSpec()
    overrides = {
        "n_systems": args.systems,
        "n_raters": args.raters,
        "n_sentences": args.sentences,
        "tie_rate": args.tie_rate,
        "rater_noise": args.rater_noise,
        "seed": args.seed,
    }
    doc = spec.to_dict()
    for key, value in overrides.items():
        if value is not None:
            doc[key] = value
            if key == "n_systems":
                doc["true_ratings"] = None
    if args.languages:
        doc["languages"] = args.languages.split(",")
    spec = WorldSpec.from_dict(doc)
    world = run_simulation(spec)
    os.makedirs(args.out_dir, exist_ok=True)
    save_manifest(world.manifest, os.path.join(args.out_dir, "manifest.json"))
    log_path = os.path.join(args.out_dir, "preferences.jsonl")
    if os.path.exists(log_path):
        os.remove(log_path)
    write_log(world.log.records, log_path)
    save_raters(world.raters, os.path.join(args.out_dir, "raters.json"))
    with open(os.path.join(args.out_dir, "truth.json"), "w", encoding="utf-8") as f:
        json.dump(
            {
                "true_ratings": world.true_ratings,
                "axis_weights": list(world.axis_weights),
                "spec": spec.to_dict(),
            },
            f,
            indent=2,
        )
        f.write("\n")
    print(
        f"wrote {len(world.log.records)} records for {spec.n_systems} systems "
        f"to {args.out_dir}"
    )
    return 0


def _cmd_validate_log(args) -> int:
    manifest = load_manifest(args.manifest)
    try:
        log = read_log(args.log, manifest)
    except LogParseError as exc:
        print(f"invalid: {exc}", file=sys.stderr)
        return _DOMAIN_EXIT
    print(f"ok: {len(log.records)} records")
    return 0


def _cmd_serve(args) -> int:
    import uvicorn

    from .service import EvaluationService, create_app
    from .storage import LogWriter

    manifest = load_manifest(args.manifest)
    raters = load_raters(args.raters)
    initial = ()
    if os.path.exists(args.log):
        initial = read_log(args.log, manifest).records
    service = EvaluationService(
        manifest,
        raters,
        seed=args.seed,
        log_writer=LogWriter(args.log),
        initial_records=initial,
    )
    uvicorn.run(create_app(service), host=args.host, port=args.port)
    return 0


_COMMANDS = {
    "leaderboard": _cmd_leaderboard,
    "winrates": _cmd_winrates,
    "axes-winrates": _cmd_axes_winrates,
    "interpret": _cmd_interpret,
    "reliability": _cmd_reliability,
    "simulate": _cmd_simulate,
    "validate-log": _cmd_validate_log,
    "serve": _cmd_serve,
}


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except PairboardError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return _DOMAIN_EXIT


if __name__ == "__main__":
    sys.exit(main())
