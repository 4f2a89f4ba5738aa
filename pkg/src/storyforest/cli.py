"""Command line driver: run the pipeline, score a run, generate corpora.

Subcommands:
  run   ingest a JSONL corpus slice by slice, writing per-slice forest
        snapshots, change logs, and resumable state files
  eval  score a forest snapshot against a planted ground truth
  gen   write a synthetic corpus plus its ground truth

Exit codes: 0 success, 1 I/O failure, 2 invalid configuration.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .config import ConfigError, RunConfig, load_config
from .corpus import load_jsonl
from .evaluate import generate_synthetic, score_structure
from .keyword_graph import graph_to_dot
from .pipeline import Pipeline, canonical_json, state_from_dict, state_to_dict
from .story_forest import forest_snapshot, tree_to_dot

log = logging.getLogger(__name__)


def _write(path: Path, text: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(text, encoding="utf-8")


def cmd_run(args) -> int:
    config = load_config(args.config) if args.config else RunConfig()
    state = None
    if args.state:
        with open(args.state, "r", encoding="utf-8") as fh:
            state = state_from_dict(json.load(fh))
    pipe = Pipeline(config, state)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    last_index = None
    for result in pipe.run(load_jsonl(args.input)):
        idx = result.slice.index
        last_index = idx
        _write(out / f"forest_{idx:04d}.json", canonical_json(forest_snapshot(pipe.state.forest)))
        _write(out / f"changes_{idx:04d}.json", canonical_json(result.changes))
        _write(out / f"state_{idx:04d}.json", canonical_json(state_to_dict(pipe.state)))
        if args.dump_keyword_graph:
            _write(out / f"keywords_{idx:04d}.dot", graph_to_dot(result.graph, result.communities))
        log.info(
            "slice %d: %d docs, %d communities, %d events, %d trees",
            idx, len(result.slice.documents), len(result.communities),
            len(result.events), len(pipe.state.forest.trees),
        )
    if last_index is None:
        log.warning("no documents to process")
    _write(out / "forest_final.json", canonical_json(forest_snapshot(pipe.state.forest)))
    _write(out / "state_final.json", canonical_json(state_to_dict(pipe.state)))
    for tree in pipe.state.forest.trees:
        _write(out / f"tree_{tree.id:04d}.dot", tree_to_dot(tree))
    return 0


def cmd_eval(args) -> int:
    with open(args.pred, "r", encoding="utf-8") as fh:
        snapshot = json.load(fh)
    with open(args.truth, "r", encoding="utf-8") as fh:
        truth = json.load(fh)
    metrics = score_structure(snapshot, truth)
    text = json.dumps(metrics, sort_keys=True, indent=2)
    print(text)
    if args.out:
        _write(Path(args.out), text + "\n")
    return 0


def cmd_gen(args) -> int:
    config = load_config(args.config) if args.config else RunConfig()
    lines, truth = generate_synthetic(config.synth)
    _write(Path(args.out_corpus), "\n".join(lines) + "\n")
    _write(Path(args.out_truth), canonical_json(truth))
    log.info("wrote %d documents to %s", len(lines), args.out_corpus)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="storyforest", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="process a JSONL corpus into a story forest")
    p_run.add_argument("--input", required=True, help="JSONL corpus path")
    p_run.add_argument("--config", help="TOML config path (defaults used if omitted)")
    p_run.add_argument("--state", help="state snapshot to resume from")
    p_run.add_argument("--out", required=True, help="output directory")
    p_run.add_argument("--dump-keyword-graph", action="store_true",
                       help="also write per-slice keyword graph DOT files")
    p_run.set_defaults(func=cmd_run)

    p_eval = sub.add_parser("eval", help="score a forest snapshot against ground truth")
    p_eval.add_argument("--pred", required=True, help="forest snapshot JSON")
    p_eval.add_argument("--truth", required=True, help="ground truth JSON")
    p_eval.add_argument("--out", help="write metrics JSON here as well")
    p_eval.set_defaults(func=cmd_eval)

    p_gen = sub.add_parser("gen", help="generate a synthetic corpus with ground truth")
    p_gen.add_argument("--config", help="TOML config with a [synth] section")
    p_gen.add_argument("--out-corpus", required=True, help="corpus JSONL to write")
    p_gen.add_argument("--out-truth", required=True, help="truth JSON to write")
    p_gen.set_defaults(func=cmd_gen)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return 1
    except (ValueError, KeyError) as exc:
        print(f"invalid input file: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
