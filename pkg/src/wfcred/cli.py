"""Command-line interface.

Exit status: 0 success, 1 usage or configuration error, 2 input parse
error, 3 golden-check failure.
"""

from __future__ import annotations

import argparse
import csv
import logging
import sys
import warnings
from pathlib import Path

import numpy as np

from . import credibility as cred
from .datagen import (
    EvaluationRecord,
    GenerationStats,
    GeneratorConfig,
    format_dataset,
    generate_dataset,
    read_dataset,
    resolve_weights,
)
from .errors import ConfigError, HistoryError, MatrixError, WfcredError, WorkflowParseError
from .harness import (
    ExperimentConfig,
    SwitchoverEngine,
    SwitchoverPolicy,
    evaluate_workflow,
    golden_checks,
    parse_split,
    run_benchmark,
)
from .learners import LEARNER_NAMES, CredibilityModel, make_learner
from .reference import DISCREPANCIES

EXIT_OK, EXIT_USAGE, EXIT_PARSE, EXIT_GOLDEN = 0, 1, 2, 3

log = logging.getLogger("wfcred")


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _learner_list(text: str, mf: str) -> tuple:
    names = []
    for raw in text.split(","):
        name = raw.strip().lower()
        if not name:
            continue
        if name == "all":
            names.extend(LEARNER_NAMES)
            continue
        if name == "enfn":
            name = "enfn-tri" if mf == "triangular" else "enfn-gauss"
        if name not in LEARNER_NAMES:
            raise ConfigError(f"unknown learner {name!r}; choose from {', '.join(LEARNER_NAMES)} (or 'enfn' with --mf)")
        if name not in names:
            names.append(name)
    if not names:
        raise ConfigError("no learners selected")
    return tuple(names)


def _generator(args) -> GeneratorConfig:
    return GeneratorConfig(count=args.count, seed=args.seed, weight_source=args.weights, label_noise_sd=args.noise)


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# subcommands


def cmd_evaluate(args) -> int:
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        res = evaluate_workflow(args.workflow, args.history, args.matrix)
    for issue in res.validation.violations:
        print(f"warning: workflow {issue.code}: {issue.message}", file=sys.stderr)
    for note in res.clamp_notes:
        print(f"warning: {note}", file=sys.stderr)

    print("features:")
    for sym, v in res.features.as_dict().items():
        print(f"  {sym:<12} {v:.6g}")
    print("indices (x100):")
    for name, v in res.indices.as_dict().items():
        print(f"  {name:<16} {100 * v:6.2f}")
    wv = res.weights
    print("weights:")
    for name, v in wv.as_dict().items():
        print(f"  {name:<16} {v:.4f}")
    verdict = "acceptable" if res.consistent else "weights unreliable"
    print(f"lambda_max {wv.lambda_max:.4f}  CI {wv.ci:.4f}  CR {wv.cr:.4f}  ({verdict})")
    print(f"credibility E = {res.credibility:.2f}")

    if args.database:
        path = Path(args.database)
        new = not path.exists() or path.stat().st_size == 0
        rec = EvaluationRecord(res.features, res.indices, res.credibility, wv.w, "computed-from-workflow")
        text = format_dataset([rec])
        with path.open("a", encoding="utf-8") as fh:
            fh.write(text if new else text.split("\n", 1)[1])
        print(f"appended record to {path}")
    return EXIT_OK


def cmd_ahp(args) -> int:
    jm = cred.load_matrix(args.matrix)
    for i, j, prod in jm.reciprocity_violations:
        print(f"warning: a[{i + 1},{j + 1}] * a[{j + 1},{i + 1}] = {prod:.4f} (not reciprocal)", file=sys.stderr)
    wv = cred.principal_eigenvector(jm)
    for name, v in wv.as_dict().items():
        print(f"{name:<16} {v:.4f}")
    verdict = "acceptable" if cred.consistency_check(wv) else "weights unreliable"
    print(f"lambda_max {wv.lambda_max:.4f}  CI {wv.ci:.4f}  CR {wv.cr:.4f}  ({verdict})")
    print(f"iterations {wv.iterations}")
    return EXIT_OK


def cmd_generate(args) -> int:
    stats = GenerationStats()
    records = generate_dataset(_generator(args), stats)
    path = _out_dir(args) / "dataset.csv"
    path.write_text(format_dataset(records), encoding="utf-8")
    print(f"wrote {len(records)} records to {path}")
    if stats.clamped:
        print(f"{stats.clamped} noisy labels clamped to [0, 100]")
    if stats.weights_cr is not None:
        print(f"weight matrix CR {stats.weights_cr:.4f}")
    return EXIT_OK


def _overrides(args, learners) -> dict:
    out = {}
    if args.bp_epochs is not None and "bp" in learners:
        out["bp"] = {"max_epochs": args.bp_epochs}
    return out


def cmd_benchmark(args) -> int:
    learners = _learner_list(args.learners, args.mf)
    cfg = ExperimentConfig(
        learners=learners,
        split=parse_split(args.split),
        seed=args.seed,
        out_dir=_out_dir(args),
        dataset=args.dataset,
        generator=_generator(args),
        overrides=_overrides(args, learners),
        plots=not args.no_plots,
    )
    report = run_benchmark(cfg)
    print(f"{'learner':<11} {'protocol':<18} {'n':>5} {'MAE':>8} {'MAPE%':>8} {'>2':>6} {'>5':>6} {'warm-up':>8} {'stable':>8}")
    for r in report.runs:
        if r.status != "ok":
            print(f"{r.learner:<11} {r.status}: {r.note}")
            continue
        m = r.metrics
        print(
            f"{r.learner:<11} {r.protocol:<18} {m['n']:>5} {m['mae']:8.4f} {m['mape']:8.4f} "
            f"{m['frac_gt_2']:6.3f} {m['frac_gt_5']:6.3f} {r.warmup_mae:8.4f} {r.stabilized_mae:8.4f}"
        )
    print(f"results in {cfg.out_dir}")
    return EXIT_OK


def cmd_switchover(args) -> int:
    learners = _learner_list(args.learners, args.mf)
    models = [CredibilityModel(make_learner(n, seed=args.seed), n) for n in learners]
    weights, _, _ = resolve_weights(args.weights)
    engine = SwitchoverEngine(SwitchoverPolicy(args.threshold), models, weights)
    records = read_dataset(args.dataset) if args.dataset else generate_dataset(_generator(args))
    out = _out_dir(args) / "switchover.csv"
    counts = {}
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        with out.open("w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(("index", "path", "credibility", "formula_credibility"))
            for k, rec in enumerate(records):
                e, path = engine.query(rec.features)
                counts[path] = counts.get(path, 0) + 1
                w.writerow((k, path, repr(float(e)), repr(float(engine.manual_score(rec.features)[0]))))
    for path, n in sorted(counts.items()):
        print(f"{path:<16} {n}")
    print(f"database size {len(engine.database)}; results in {out}")
    return EXIT_OK


def cmd_validate_pipeline(args) -> int:
    checks = golden_checks()
    for c in checks:
        print(c.line())
    print("documented formula/table differences:")
    for name, (formula, tabulated) in DISCREPANCIES.items():
        print(f"  {name:<16} formula {formula:.4f}  tabulated {tabulated:.4f}")
    failed = [c for c in checks if not c.passed]
    print(f"{len(checks) - len(failed)}/{len(checks)} checks passed")
    return EXIT_GOLDEN if failed else EXIT_OK


# ---------------------------------------------------------------------------


def _add_data_options(p, count=2000):
    p.add_argument("--count", type=int, default=count, help="records to generate (default %(default)s)")
    p.add_argument("--noise", type=float, default=0.0, metavar="SD", help="label noise SD in credibility points")
    p.add_argument(
        "--weights",
        default="paper",
        metavar="paper|FILE|perturbed:SCALE",
        help="label weights: the reference weights, a judgment matrix file, or drifting weights",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="wfcred", description="Credibility scoring of simulation workflows.")
    parser.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("evaluate", help="score one workflow definition")
    p.add_argument("workflow", help="workflow definition (XML)")
    p.add_argument("--history", help="execution history CSV")
    p.add_argument("--matrix", help="judgment matrix file (default: the reference matrix)")
    p.add_argument("--database", help="dataset CSV to append the evaluation record to")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("ahp", help="weights and consistency of a judgment matrix")
    p.add_argument("matrix", help="judgment matrix file")
    p.set_defaults(func=cmd_ahp)

    p = sub.add_parser("generate", help="write a synthetic evaluation database")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default=".", metavar="DIR")
    _add_data_options(p)
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("benchmark", help="train and compare learners")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default="results", metavar="DIR")
    p.add_argument("--learners", default="all", metavar="LIST", help=f"comma list from {', '.join(LEARNER_NAMES)}")
    p.add_argument("--split", default="1900/100", metavar="TRAIN/TEST", help="train/test counts, or 'stream'")
    p.add_argument("--mf", choices=("triangular", "gaussian"), default="triangular", help="MF shape for 'enfn'")
    p.add_argument("--dataset", help="use this dataset CSV instead of generating one")
    p.add_argument("--bp-epochs", type=int, help="override the BP epoch cap")
    p.add_argument("--no-plots", action="store_true", help="skip the SVG plots")
    _add_data_options(p)
    p.set_defaults(func=cmd_benchmark)

    p = sub.add_parser("switchover", help="replay a record stream through the switchover policy")
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--out", default="results", metavar="DIR")
    p.add_argument("--threshold", type=int, default=200, metavar="N")
    p.add_argument("--learners", default="figmn", metavar="LIST")
    p.add_argument("--mf", choices=("triangular", "gaussian"), default="triangular")
    p.add_argument("--dataset", help="replay this dataset CSV instead of generating one")
    _add_data_options(p, count=300)
    p.set_defaults(func=cmd_switchover)

    p = sub.add_parser("validate-pipeline", help="check the reference case study")
    p.set_defaults(func=cmd_validate_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(name)s: %(message)s")
    np.seterr(over="ignore")
    try:
        return args.func(args)
    except (WorkflowParseError, HistoryError, MatrixError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except (ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except WfcredError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
