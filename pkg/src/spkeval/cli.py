"""Command line entry points.

Exit codes: 0 on success, 1 when inputs fail validation, 2 on usage or
configuration errors (argparse handles the usage half itself).
"""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .analysis import (
    bootstrap_ci,
    format_slice_table,
    parse_slice_spec,
    slice_csv,
    slice_eval,
    MetadataTable,
)
from .diarization import corpus_csv, evaluate_corpus, format_corpus_report
from .errors import ConfigurationError, ParseError, UndefinedMetricError, ValidationError
from .rttm import parse_rttm
from .trials import CoverageError, join_scores, parse_score_file, parse_trial_list
from .verification import DcfParams, det_csv, eer, error_profile, min_dcf


def _read(path: str) -> str:
    return Path(path).read_text(encoding="utf-8")


def _dcf_params(args) -> DcfParams:
    return DcfParams(c_miss=args.c_miss, c_fa=args.c_fa, p_tar=args.p_tar)


def _add_dcf_args(parser):
    parser.add_argument("--c-miss", type=float, default=1.0, help="cost of a miss")
    parser.add_argument("--c-fa", type=float, default=1.0, help="cost of a false alarm")
    parser.add_argument("--p-tar", type=float, default=0.05, help="target prior")


def _scored_trials(trials_path: str, scores_path: str):
    trials = parse_trial_list(_read(trials_path), expect_labels=True)
    records = parse_score_file(_read(scores_path))
    return join_scores(trials, records)


def cmd_score_verif(args) -> int:
    scored = _scored_trials(args.trials, args.scores)
    profile = error_profile(scored)
    params = _dcf_params(args)
    rate = eer(profile)
    result = min_dcf(profile, params)
    print(f"EER: {100.0 * rate:.3f}%  minDCF: {result.value:.4f}  threshold: {result.threshold:g}")
    if args.det_out:
        Path(args.det_out).write_text(
            det_csv(profile, probit=args.probit, params=params), encoding="utf-8"
        )
    return 0


def cmd_score_diar(args) -> int:
    references = parse_rttm(_read(args.reference))
    hypotheses = parse_rttm(_read(args.hypothesis))
    result = evaluate_corpus(references, hypotheses, collar=args.collar)
    print(format_corpus_report(result), end="")
    if args.csv_out:
        Path(args.csv_out).write_text(corpus_csv(result), encoding="utf-8")
    return 0


def cmd_bootstrap(args) -> int:
    scored = _scored_trials(args.trials, args.scores)
    ci = bootstrap_ci(
        scored,
        metric=args.metric,
        params=_dcf_params(args),
        n_resamples=args.resamples,
        level=args.level,
        seed=args.seed,
        workers=args.workers,
    )
    pct = 100.0 * ci.level
    level_txt = f"{pct:g}%"
    if args.metric == "eer":
        print(
            f"EER: {100.0 * ci.point:.3f}%  {level_txt} CI: "
            f"[{100.0 * ci.low:.3f}%, {100.0 * ci.high:.3f}%]  "
            f"(resamples={ci.n_resamples}, seed={ci.seed})"
        )
    else:
        print(
            f"minDCF: {ci.point:.4f}  {level_txt} CI: [{ci.low:.4f}, {ci.high:.4f}]  "
            f"(resamples={ci.n_resamples}, seed={ci.seed})"
        )
    return 0


def cmd_slice(args) -> int:
    scored = _scored_trials(args.trials, args.scores)
    pair_csv = _read(args.pair_kinds) if args.pair_kinds else None
    table = MetadataTable.from_csv(_read(args.metadata), pair_csv)
    specs = args.slice or ["all"]
    slices = [parse_slice_spec(s) for s in specs]
    results = slice_eval(scored, table, slices, params=_dcf_params(args))
    if args.csv:
        print(slice_csv(results), end="")
    else:
        print(format_slice_table(results), end="")
    return 0


def cmd_validate(args) -> int:
    submission = _read(args.submission)
    if args.trials:
        trial_pairs = parse_trial_list(_read(args.trials), expect_labels=True)
        records = parse_score_file(submission)
        join_scores(trial_pairs, records)
        print(f"OK: scores cover all {len(trial_pairs)} trial pairs")
        return 0
    references = parse_rttm(_read(args.rttm))
    hypotheses = parse_rttm(submission)
    unknown = sorted(set(hypotheses) - set(references))
    if unknown:
        raise ValidationError("hypothesis for unknown file id(s): " + ", ".join(unknown))
    n_turns = sum(len(a.turns) for a in hypotheses.values())
    print(f"OK: {len(hypotheses)} file(s), {n_turns} turn(s)")
    return 0


def cmd_det(args) -> int:
    scored = _scored_trials(args.trials, args.scores)
    profile = error_profile(scored)
    text = det_csv(profile, probit=args.probit, params=_dcf_params(args))
    if args.out:
        Path(args.out).write_text(text, encoding="utf-8")
    else:
        print(text, end="")
    return 0


def cmd_serve(args) -> int:
    # imported lazily so scoring commands never pay the web stack
    import uvicorn

    from .httpapi import app_from_config
    from .service import build_service, load_config

    config = load_config(args.config)
    service = build_service(config)
    app = app_from_config(config, service)
    listen = os.environ.get("SPKEVAL_LISTEN", f"{args.host}:{args.port}")
    host, _, port_text = listen.rpartition(":")
    if not host or not port_text.isdigit():
        raise ConfigurationError(f"SPKEVAL_LISTEN must be host:port, got {listen!r}")
    uvicorn.run(app, host=host, port=int(port_text))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spkeval",
        description="Score speaker verification and diarization systems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("score-verif", help="EER and minimum detection cost")
    p.add_argument("trials", help="labeled trial list")
    p.add_argument("scores", help="score file")
    _add_dcf_args(p)
    p.add_argument("--det-out", help="also write the DET curve CSV here")
    p.add_argument("--probit", action="store_true", help="probit axes in the DET CSV")
    p.set_defaults(func=cmd_score_verif)

    p = sub.add_parser("score-diar", help="diarization error rates")
    p.add_argument("reference", help="reference RTTM")
    p.add_argument("hypothesis", help="hypothesis RTTM")
    p.add_argument("--collar", type=float, default=0.25, help="forgiveness collar in seconds")
    p.add_argument("--csv-out", help="also write per-file rows as CSV here")
    p.set_defaults(func=cmd_score_diar)

    p = sub.add_parser("bootstrap", help="confidence interval via resampling")
    p.add_argument("trials")
    p.add_argument("scores")
    p.add_argument("--metric", choices=("eer", "min_dcf"), default="eer")
    p.add_argument("--resamples", type=int, default=1000)
    p.add_argument("--level", type=float, default=0.95)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--workers", type=int, default=1)
    _add_dcf_args(p)
    p.set_defaults(func=cmd_bootstrap)

    p = sub.add_parser("slice", help="re-score metadata subsets of the trial list")
    p.add_argument("trials")
    p.add_argument("scores")
    p.add_argument("--metadata", required=True, help="utterance attribute CSV")
    p.add_argument("--pair-kinds", help="optional per-pair kind CSV")
    p.add_argument(
        "--slice",
        action="append",
        help="selector like all, dur>8, gender=male, lang=en, kind=A,B (repeatable)",
    )
    p.add_argument("--csv", action="store_true", help="machine-readable output")
    _add_dcf_args(p)
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("validate", help="check a submission file against a reference")
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--trials", help="labeled trial list the scores must cover")
    group.add_argument("--rttm", help="reference RTTM naming the valid file ids")
    p.add_argument("submission", help="score file or hypothesis RTTM")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("det", help="DET curve points as CSV")
    p.add_argument("trials")
    p.add_argument("scores")
    p.add_argument("--probit", action="store_true")
    p.add_argument("--out", help="write here instead of stdout")
    _add_dcf_args(p)
    p.set_defaults(func=cmd_det)

    p = sub.add_parser("serve", help="run the submission service")
    p.add_argument("--config", required=True, help="service config JSON")
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8000)
    p.set_defaults(func=cmd_serve)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except CoverageError as exc:
        print(f"validation failed: {exc.report.summary()}", file=sys.stderr)
        return 1
    except (ParseError, ValidationError, UndefinedMetricError) as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
