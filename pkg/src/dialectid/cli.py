"""Command-line entry point: ``dialectid {extract,stats,split,run,lid-report}``."""
from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import lid
from .config import ConfigError, load_config
from .corpus import ManifestError, corpus_stats, load_manifest
from .fmx import FmxError
from .pipeline import PipelineError, cmd_extract, cmd_run
from .splits import SplitError, make_split


def _cmd_extract(args):
    result = cmd_extract(args.manifest, args.kind, args.out_dir, args.workers)
    print(json.dumps(result))


def _cmd_stats(args):
    records = load_manifest(args.manifest)
    stats = corpus_stats(records)
    print(json.dumps(stats.to_dict(), indent=1) if args.json else stats.render())


def _cmd_split(args):
    records = load_manifest(args.manifest)
    text = make_split(records, args.seed, args.mode).to_json()
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _cmd_run(args):
    # flag paths are relative to the working directory, not the config file
    for key in ("manifest", "features_dir", "out_dir"):
        if getattr(args, key):
            setattr(args, key, str(Path(getattr(args, key)).resolve()))
    overrides = {
        "manifest": args.manifest, "features_dir": args.features_dir, "out_dir": args.out_dir,
        "feature_kind": args.feature_kind, "pooling": args.pooling,
        "normalize": args.normalize, "split_mode": args.split_mode,
        "seeds": args.seeds, "lr": args.lr, "epochs": args.epochs,
    }
    config = load_config(args.config, overrides)
    result = cmd_run(config)
    avg = result["average"]
    print(json.dumps({"out_dir": result["out_dir"], "config_hash": config.hash(),
                      "unweighted_accuracy": avg.unweighted_accuracy,
                      "overall_accuracy": avg.overall_accuracy,
                      "per_seed": [r.unweighted_accuracy for r in result["reports"]]}))


def _cmd_lid_report(args):
    if not args.n:
        raise lid.LidError("n list must not be empty")
    records = load_manifest(args.manifest)
    posteriors = lid.parse_lid_file(Path(args.posteriors).read_text(encoding="utf-8"))
    tables = [("n-best", lid.nbest_rates(posteriors, records, args.n))]
    if args.merge:
        tables.append(("n-best, et merged into fi",
                       lid.merged_finnic_rates(posteriors, records, args.n)))
    out = Path(args.out_dir) if args.out_dir else None
    if out:
        out.mkdir(parents=True, exist_ok=True)
    for i, (title, table) in enumerate(tables):
        print(f"# {title}")
        print(table.render())
        if table.undefined_groups:
            print(f"(no utterances for group(s): {', '.join(table.undefined_groups)})")
        if out:
            name = "lid_nbest.csv" if i == 0 else "lid_nbest_merged.csv"
            (out / name).write_text(table.to_csv())


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="dialectid", description=__doc__)
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    e = sub.add_parser("extract", help="extract frame-level features to FMX files")
    e.add_argument("manifest")
    e.add_argument("--kind", required=True, choices=["FB40", "MFCC39", "PROSODY", "EMBEDDING"])
    e.add_argument("--out-dir", required=True)
    e.add_argument("--workers", type=int, default=None,
                   help="worker processes (default: $DIALECTID_WORKERS or 1)")
    e.set_defaults(func=_cmd_extract)

    s = sub.add_parser("stats", help="utterance counts by dialect, language and gender")
    s.add_argument("manifest")
    s.add_argument("--json", action="store_true")
    s.set_defaults(func=_cmd_stats)

    sp = sub.add_parser("split", help="write one SD or SI split as canonical JSON")
    sp.add_argument("manifest")
    sp.add_argument("--mode", required=True, choices=["SD", "SI"])
    sp.add_argument("--seed", type=int, required=True)
    sp.add_argument("--out")
    sp.set_defaults(func=_cmd_split)

    r = sub.add_parser("run", help="train and evaluate over all seeds")
    r.add_argument("config", help="TOML experiment config")
    r.add_argument("--manifest")
    r.add_argument("--features-dir")
    r.add_argument("--out-dir")
    r.add_argument("--feature-kind", choices=["FB40", "MFCC39", "PROSODY", "EMBEDDING"])
    r.add_argument("--pooling", choices=["MEAN", "STD", "MEANSTD"])
    r.add_argument("--normalize", choices=["auto", "on", "off"])
    r.add_argument("--split-mode", choices=["SD", "SI"])
    r.add_argument("--seeds", type=int, nargs="+")
    r.add_argument("--lr", type=float)
    r.add_argument("--epochs", type=int)
    r.set_defaults(func=_cmd_run)

    lr = sub.add_parser("lid-report", help="n-best majority-language table from LID posteriors")
    lr.add_argument("manifest")
    lr.add_argument("posteriors", help="JSON-Lines LID posterior file")
    lr.add_argument("--n", type=int, nargs="*", default=[1, 2, 5])
    lr.add_argument("--merge", action="store_true", help="also report et merged into fi")
    lr.add_argument("--out-dir")
    lr.set_defaults(func=_cmd_lid_report)
    return p


_USER_ERRORS = (PipelineError, ConfigError, ManifestError, SplitError, FmxError,
                lid.LidError, OSError, ValueError)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except _USER_ERRORS as exc:
        payload = exc.to_dict() if isinstance(exc, PipelineError) else {
            "error": str(exc), "stage": args.command}
        payload["type"] = type(exc).__name__
        print(json.dumps(payload), file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
