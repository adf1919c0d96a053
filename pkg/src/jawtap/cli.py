"""Command-line front end.

Subcommands: synth, train, classify, eval, activate, features.
Exit codes: 0 success, 1 usage error, 2 data or model error.
Diagnostics go to stderr; results go to stdout or --out/--events.
"""
from __future__ import annotations

import argparse
import dataclasses
import json
import sys
from pathlib import Path

from .errors import JawtapError
from .evaluate import (
    GROUP_MANNER3,
    GROUP_NONE,
    GROUP_PLACE4,
    prepare_eval,
    regroup,
    report_from_events,
    run_eval_masked,
)
from .features import feature_layout
from .io import load_recording, save_recording
from .pipeline import GestureRecognizer, PipelineConfig
from .segment import GateConfig
from .session import ACTIVATION_MODE
from .synth import SynthParams, synth_dataset, truth_to_json_dict


class _Parser(argparse.ArgumentParser):
    # usage problems exit 1; data problems exit 2 (see main)
    def error(self, message):
        self.exit(1, f"{self.prog}: error: {message}\n")


def _build_pipeline_config(args) -> PipelineConfig:
    config = PipelineConfig()
    overrides = {}
    if getattr(args, "config", None):
        overrides = json.loads(Path(args.config).read_text())
    if "gate" in overrides:
        config.gate = GateConfig(**overrides["gate"])
    for key in ("feature_mode", "band", "use_noise_gate",
                "activation_factor", "release_threshold_ratio",
                "release_lockout_s", "hold_timeout_s", "match_window_s"):
        if key in overrides:
            setattr(config, key, overrides[key])
    for key, attr in (("c", "svm_c"), ("tol", "svm_tol"),
                      ("max_passes", "svm_max_passes")):
        if key in overrides.get("svm", {}):
            setattr(config, attr, overrides["svm"][key])
    if getattr(args, "feature_mode", None):
        config.feature_mode = args.feature_mode
    if getattr(args, "band", None) is not None:
        config.band = args.band
    if getattr(args, "mask", None):
        config.channel_mask = args.mask
    return config


def _write_events(events, path: str):
    lines = [json.dumps(ev.to_json_dict()) for ev in events]
    text = "\n".join(lines) + ("\n" if lines else "")
    if path == "-":
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def _print_diagnostics(diagnostics):
    for d in diagnostics:
        print(json.dumps(d.to_json_dict()), file=sys.stderr)


def _cmd_synth(args) -> int:
    spec = json.loads(Path(args.spec).read_text())
    counts = spec["counts"]
    kwargs = {k: spec[k] for k in
              ("spacing_s", "lead_in_s", "tail_s", "noise_clip_s",
               "suppress_release", "shuffle") if k in spec}
    seed = args.seed if args.seed is not None else spec.get("seed", 0)
    rec, truths = synth_dataset(counts, seed=seed, params=SynthParams(),
                                **kwargs)
    save_recording(rec, args.out)
    with open(Path(args.out) / "truth.jsonl", "w") as fh:
        for truth in truths:
            fh.write(json.dumps(truth_to_json_dict(truth)) + "\n")
    print(f"wrote {rec.duration:.1f} s recording with "
          f"{len(rec.annotations)} annotations to {args.out}")
    return 0


def _cmd_train(args) -> int:
    config = _build_pipeline_config(args)
    recognizer = GestureRecognizer(config)
    recognizer.fit(load_recording(args.data))
    recognizer.save(args.out)
    n = len(recognizer.knn_.templates_)
    print(f"trained {config.feature_mode} model with {n} templates "
          f"-> {args.out}")
    return 0


def _cmd_classify(args) -> int:
    config = _build_pipeline_config(args)
    recognizer = GestureRecognizer.load(args.model, config)
    events, diagnostics = recognizer.process(
        load_recording(args.replay), realtime=args.realtime)
    _write_events(events, args.events)
    if args.verbose:
        _print_diagnostics(diagnostics)
    return 0


def _cmd_activate(args) -> int:
    config = _build_pipeline_config(args)
    recognizer = GestureRecognizer.load(args.model, config)
    events, diagnostics = recognizer.process(
        load_recording(args.replay), mode=ACTIVATION_MODE,
        realtime=args.realtime)
    _write_events(events, args.events)
    if args.verbose:
        _print_diagnostics(diagnostics)
    return 0


def _cmd_eval(args) -> int:
    config = _build_pipeline_config(args)
    test = load_recording(args.test)
    if args.train:
        inputs = prepare_eval(load_recording(args.train), test, config)
        report = run_eval_masked(inputs, args.mask)
    else:
        recognizer = GestureRecognizer.load(args.model, config)
        recognizer.knn_.set_params(channel_mask=args.mask)
        events, _ = recognizer.process(test)
        report = report_from_events(events, test,
                                    window_s=config.match_window_s,
                                    channel_mask="both" if args.mask ==
                                    ("left", "right") else args.mask)
    if args.group != GROUP_NONE:
        report = regroup(report, args.group)
    print(report.format_confusion())
    if args.out:
        Path(args.out).write_bytes(report.to_json_bytes() + b"\n")
    if args.log_csv:
        report.save_log_csv(args.log_csv)
    return 0


def _cmd_features(args) -> int:
    if not args.describe:
        print("nothing to do; pass --describe", file=sys.stderr)
        return 1
    layout = feature_layout(args.feature_mode, args.mask)
    print(layout.to_json())
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="jawtap",
                     description="teeth-tap gesture recognition engine")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("synth", help="generate a synthetic recording")
    p.add_argument("--spec", required=True,
                   help="JSON file with clip counts and scheduling options")
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--out", required=True, help="recording directory to write")
    p.set_defaults(func=_cmd_synth)

    p = sub.add_parser("train", help="train a model from a recording")
    p.add_argument("--data", required=True, help="recording directory")
    p.add_argument("--out", required=True, help="model.json path")
    p.add_argument("--feature-mode", choices=("full", "paper64"))
    p.add_argument("--band", type=int, default=None)
    p.add_argument("--config", help="pipeline-config JSON overrides")
    p.set_defaults(func=_cmd_train)

    for name, fn, help_text in (
        ("classify", _cmd_classify, "replay a recording through a model"),
        ("activate", _cmd_activate, "wake-gesture-only detection"),
    ):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--model", required=True)
        p.add_argument("--replay", required=True,
                       help="recording directory to replay")
        p.add_argument("--events", default="-",
                       help="output JSONL path, '-' for stdout")
        p.add_argument("--realtime", action="store_true",
                       help="pace the replay at recording speed")
        p.add_argument("--verbose", action="store_true",
                       help="emit diagnostics as JSON lines on stderr")
        p.add_argument("--config")
        p.set_defaults(func=fn)

    p = sub.add_parser("eval", help="score a model against a test recording")
    p.add_argument("--test", required=True)
    group = p.add_mutually_exclusive_group(required=True)
    group.add_argument("--train", help="training recording directory")
    group.add_argument("--model", help="persisted model.json")
    p.add_argument("--mask", choices=("both", "left", "right"),
                   default="both")
    p.add_argument("--group",
                   choices=(GROUP_NONE, GROUP_MANNER3, GROUP_PLACE4),
                   default=GROUP_NONE)
    p.add_argument("--out", help="write the report JSON here")
    p.add_argument("--log-csv", help="write the per-event log as CSV")
    p.add_argument("--feature-mode", choices=("full", "paper64"))
    p.add_argument("--band", type=int, default=None)
    p.add_argument("--config")
    p.set_defaults(func=_cmd_eval)

    p = sub.add_parser("features", help="describe the feature layout")
    p.add_argument("--describe", action="store_true")
    p.add_argument("--feature-mode", choices=("full", "paper64"),
                   default="full")
    p.add_argument("--mask", choices=("both", "left", "right"),
                   default="both")
    p.set_defaults(func=_cmd_features)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code else 0
    try:
        return args.func(args)
    except (JawtapError, OSError, json.JSONDecodeError, KeyError,
            ValueError) as exc:
        print(f"jawtap: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
