"""Command-line entry point: ``hsmd run | bench | rank | demo``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import reports
from .bench import BenchError, bench
from .config import ConfigError, load_config, parse_overrides
from .frames import FrameError
from .pipeline import run

log = logging.getLogger("hsmd")


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="YAML config file")
    p.add_argument("--bs", choices=("frame-diff", "sample-consensus"), help="background-subtraction mode")
    p.add_argument("--threads", type=int, help="worker threads for pixel-parallel stages")
    p.add_argument("--seed", type=int, help="background-model seed")
    p.add_argument("--out", help="output directory")
    p.add_argument("--dump-masks", action="store_true", default=None, help="write binary masks as PNG")
    p.add_argument(
        "--set", dest="overrides", action="append", default=[], metavar="KEY=VALUE",
        help="override any config key, e.g. --set c=17.5 --set neuron.v_th=-50",
    )


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hsmd", description="Hybrid spiking motion detector")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="process a camera, video file or image-sequence directory")
    p.add_argument("--source", help="device index, video path or image directory")
    _add_common(p)
    p.add_argument("--dump-layers", action="store_true", default=None, help="write L2/L3/L4 spike planes")
    p.add_argument("--scale", type=float, help="reduce frames by this factor before processing")

    p = sub.add_parser("bench", help="score a CDnet-layout dataset")
    p.add_argument("--dataset", required=True, help="dataset root (category/video/...)")
    p.add_argument("--categories", help="comma-separated subset of categories")
    p.add_argument("--format", dest="formats", help="comma-separated report formats: csv,json")
    p.add_argument("--compare", help="fixtures CSV with other methods' per-category metrics")
    _add_common(p)

    p = sub.add_parser("rank", help="rank externally supplied metric tables")
    p.add_argument("--fixtures", required=True, help="CSV: [category,] method, Re, Sp, FPR, FNR, WCR, CCR, Pr, F1")
    p.add_argument("--out", help="directory for ranking.csv / ranking.json (default: print only)")

    p = sub.add_parser("demo", help="write a synthetic moving-square sequence with ground truth")
    p.add_argument("--out", required=True)
    p.add_argument("--frames", type=int, default=60)
    p.add_argument("--size", type=int, default=64)
    return parser


def _overrides(args: argparse.Namespace) -> dict:
    flat = list(args.overrides)
    for flag, key in (("bs", "bs.mode"), ("threads", "threads"), ("seed", "seed"), ("out", "out"),
                      ("dump_masks", "dump_masks"), ("dump_layers", "dump_layers"), ("scale", "scale"),
                      ("source", "source"), ("formats", "formats")):
        value = getattr(args, flag, None)
        if value is not None:
            flat.append(f"{key}={value}" if not isinstance(value, bool) else f"{key}={str(value).lower()}")
    data = parse_overrides(flat)
    # keep path-like strings verbatim (YAML would turn "0012" into 12)
    if getattr(args, "source", None) is not None:
        data["source"] = args.source
    if getattr(args, "out", None) is not None:
        data["out"] = args.out
    return data


def _cmd_run(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    if cfg.source_kind == "dataset":
        log.info("%s looks like a dataset root; running bench", cfg.source)
        return _run_bench(cfg, cfg.source, None, None)
    report = run(cfg)
    print(report.summary())
    return 0


def _run_bench(cfg, dataset, categories, compare_path) -> int:
    compare = reports.read_fixtures(compare_path) if compare_path else None
    result = bench(cfg, dataset, categories, compare)
    out = Path(cfg.out or "bench_out")
    for path in result.write(out, cfg.formats):
        print(f"wrote {path}")
    _, rc = result.ranking()
    overall = result.overall_metrics.as_dict()
    print(f"{result.method}: " + ", ".join(
        f"{k}={'n/a' if v is None else f'{v:.4f}'}" for k, v in overall.items()
    ) + (f", RC={rc[result.method]:.3f}" if result.method in rc else ""))
    if result.failures:
        print(f"{len(result.failures)} video(s) failed:", file=sys.stderr)
        for f in result.failures:
            print(f"  {f}", file=sys.stderr)
        return 1
    return 0


def _cmd_bench(args) -> int:
    cfg = load_config(args.config, _overrides(args))
    categories = [c.strip() for c in args.categories.split(",")] if args.categories else None
    return _run_bench(cfg, args.dataset, categories, args.compare)


def _cmd_rank(args) -> int:
    groups = reports.read_fixtures(args.fixtures)
    tables, rc = reports.rank_groups(groups)
    rows = reports.ranking_rows(tables)
    for row in rows:
        print(f"{row['category']:>20}  {row['method']:<12} R={row['R']:.3f}")
    if len(tables) > 1:
        for method, value in sorted(rc.items(), key=lambda kv: kv[1]):
            print(f"{'RC':>20}  {method:<12} {value:.3f}")
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        reports.write_csv(out / "ranking.csv", reports.RANKING_COLUMNS, rows)
        reports.write_json(out / "ranking.json", {"ranking": reports.ranking_json(tables), "RC": rc})
    return 0


def _cmd_demo(args) -> int:
    from .frames import write_mask
    from .synthetic import MovingSquare
    from PIL import Image

    frames, gts = MovingSquare(size=args.size, frames=args.frames).generate()
    out = Path(args.out)
    (out / "input").mkdir(parents=True, exist_ok=True)
    (out / "groundtruth").mkdir(parents=True, exist_ok=True)
    for i, (rgb, gt) in enumerate(zip(frames, gts), start=1):
        Image.fromarray(rgb).save(out / "input" / f"in{i:06d}.png")
        write_mask(gt, out / "groundtruth" / f"gt{i:06d}.png")
    print(f"wrote {len(frames)} frames to {out}")
    return 0


COMMANDS = {"run": _cmd_run, "bench": _cmd_bench, "rank": _cmd_rank, "demo": _cmd_demo}


def main(argv: list[str] | None = None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
    except (FrameError, BenchError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
    return 1


if __name__ == "__main__":
    sys.exit(main())
