"""Command-line pipeline.

    dptrack generate  [--config F] [--seed N] [--out DIR]
    dptrack build-net EVENT [--config F] [--out DIR]
    dptrack to-qubo   ISING [--out DIR]
    dptrack solve     PROBLEM [--solver M] [--config F] [--seed N] [--out DIR]
    dptrack embed     ISING [--grid N] [--out DIR]
    dptrack evaluate  RESULT EVENT [--config F] [--out DIR]
    dptrack run-all   [--config F] [--seed N] [--solver M] [--out DIR]

Exit status: 0 success, 1 usage error, 2 input/parse error, 3 capacity or
embedding infeasible. Failures print one ``ERROR <code>: message`` line on
stderr.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import chimera
from .config import RunConfig, load_config
from .denby_peterson import build_network, extract_tracks
from .errors import DPTrackError, ParseError
from .event_gen import dumps_event, generate_event, load_event, save_event
from .ising import (
    ising_to_qubo,
    load_ising,
    load_problem,
    save_ising,
    save_qubo,
)
from .metrics import emit_report, score_segments, score_tracks
from .segments import build_segments
from .solvers import METHODS, SolveResult, solve

EVENT_FILE = "event.json"
SEGMENTS_FILE = "segments.json"
NETWORK_FILE = "network.ising"
QUBO_FILE = "network.qubo"
RESULT_FILE = "result.json"
EMBEDDING_FILE = "embedding.json"
PHYSICAL_FILE = "physical.ising"


class UsageError(DPTrackError):
    exit_code = 1


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(message)


def _write_json(path: Path, obj) -> Path:
    path.write_text(json.dumps(obj, indent=1) + "\n", encoding="utf-8")
    return path


# -- stages ----------------------------------------------------------------------


def cmd_generate(cfg: RunConfig, out: Path) -> Path:
    event = generate_event(cfg.generator_for_run(), cfg.geometry)
    return save_event(event, out / EVENT_FILE)


def cmd_build_net(event_path: Path, cfg: RunConfig, out: Path) -> Path:
    event = load_event(event_path)
    segments = build_segments(event, cfg.cuts)
    net = build_network(segments, cfg.dp, cfg.cuts.max_kink_angle)
    seg_dump = [{"id": s.id, "from": s.from_hit, "to": s.to_hit} for s in segments]
    (out / SEGMENTS_FILE).write_text(dumps_event(event, {"segments": seg_dump}), encoding="utf-8")
    return save_ising(net.to_ising(), out / NETWORK_FILE)


def cmd_to_qubo(ising_path: Path, out: Path) -> Path:
    return save_qubo(ising_to_qubo(load_ising(ising_path)), out / QUBO_FILE)


def cmd_solve(problem_path: Path, method: str, cfg: RunConfig, out: Path) -> Path:
    problem = load_problem(problem_path)
    result = solve(problem, method, cfg.solver_params(method))
    return _write_json(out / RESULT_FILE, result.to_dict())


def cmd_embed(ising_path: Path, grid_n: int, out: Path) -> tuple[Path, Path]:
    problem = load_ising(ising_path)
    g = chimera.build_chimera(grid_n)
    emb = chimera.find_embedding(problem, g)
    physical = chimera.embed_problem(problem, emb, g)
    return (chimera.save_embedding(emb, out / EMBEDDING_FILE),
            save_ising(physical, out / PHYSICAL_FILE))


def _load_result(path: Path) -> SolveResult:
    try:
        return SolveResult.from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
    except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{path}: malformed result file ({exc})") from None


def cmd_evaluate(result_path: Path, event_path: Path, cfg: RunConfig, out: Path):
    result = _load_result(result_path)
    event = load_event(event_path)
    segments = build_segments(event, cfg.cuts)
    if result.n != len(segments):
        raise ParseError(
            f"{result_path}: state has {result.n} entries but the event yields "
            f"{len(segments)} segments under the configured cuts"
        )
    on = result.best_state > 0
    pairs = segments.pairs()
    seg_score = score_segments([pairs[i] for i in np.flatnonzero(on)], event)
    candidates = extract_tracks(on, segments)
    trk_score = score_tracks([c.hits for c in candidates], event.truth)
    extra = {
        "candidates": [{"hits": list(c.hits), "ambiguous": c.ambiguous} for c in candidates],
    }
    return emit_report(out, seg_score, trk_score, [result], extra)


def cmd_run_all(cfg: RunConfig, out: Path, method: str | None = None):
    method = method or cfg.method
    out.mkdir(parents=True, exist_ok=True)
    event_path = cmd_generate(cfg, out)
    ising_path = cmd_build_net(event_path, cfg, out)
    cmd_to_qubo(ising_path, out)
    result_path = cmd_solve(ising_path, method, cfg, out)
    if cfg.grid_n is not None:
        cmd_embed(ising_path, cfg.grid_n, out)
    return cmd_evaluate(result_path, event_path, cfg, out)


# -- argument handling -------------------------------------------------------------


def _parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="INI run configuration")
    common.add_argument("--seed", type=int, help="master seed (overrides config)")
    common.add_argument("--out", type=Path, help="output directory (overrides config)")
    common.add_argument("--solver", choices=METHODS, help="solver backend (overrides config)")

    p = _Parser(prog="dptrack", description=__doc__.split("\n\n")[0])
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    sub.add_parser("generate", parents=[common], help="generate a synthetic event")
    b = sub.add_parser("build-net", parents=[common], help="event -> Denby-Peterson Ising file")
    b.add_argument("event", type=Path)
    q = sub.add_parser("to-qubo", parents=[common], help="Ising file -> QUBO file")
    q.add_argument("ising", type=Path)
    s = sub.add_parser("solve", parents=[common], help="solve an Ising or QUBO file")
    s.add_argument("problem", type=Path)
    e = sub.add_parser("embed", parents=[common], help="embed an Ising file on Chimera")
    e.add_argument("ising", type=Path)
    e.add_argument("--grid", type=int, help="Chimera grid size n (n x n cells)")
    v = sub.add_parser("evaluate", parents=[common], help="score a result against truth")
    v.add_argument("result", type=Path)
    v.add_argument("event", type=Path)
    sub.add_parser("run-all", parents=[common], help="run every stage")
    return p


def run(argv=None) -> int:
    args = _parser().parse_args(argv)
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.solver is not None:
        cfg.method = args.solver
    out = args.out if args.out is not None else cfg.out
    out.mkdir(parents=True, exist_ok=True)

    cmd = args.command
    if cmd == "generate":
        written = [cmd_generate(cfg, out)]
    elif cmd == "build-net":
        written = [cmd_build_net(args.event, cfg, out)]
    elif cmd == "to-qubo":
        written = [cmd_to_qubo(args.ising, out)]
    elif cmd == "solve":
        written = [cmd_solve(args.problem, cfg.method, cfg, out)]
    elif cmd == "embed":
        grid = args.grid if args.grid is not None else cfg.grid_n
        if grid is None:
            raise UsageError("embed needs --grid or [chimera] grid_n")
        written = list(cmd_embed(args.ising, grid, out))
    elif cmd == "evaluate":
        written = list(cmd_evaluate(args.result, args.event, cfg, out))
    else:
        written = list(cmd_run_all(cfg, out))
    for path in written:
        print(path)
    return 0


def main(argv=None) -> int:
    try:
        return run(argv)
    except DPTrackError as exc:
        print(f"ERROR {exc.exit_code}: {exc}", file=sys.stderr)
        return exc.exit_code
    except OSError as exc:
        print(f"ERROR 2: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
