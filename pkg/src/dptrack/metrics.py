"""Scoring reconstructed segments and tracks against generator truth, and report output."""

from __future__ import annotations

import csv
import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

from .errors import ContractError
from .event_gen import Event, Truth

TRACK_PURITY_MIN = 0.75
TRACK_COVERAGE_MIN = 0.50
TRACE_COLUMNS = ("restart", "step", "temperature_or_gamma", "best_energy")


@dataclass(frozen=True)
class SegmentScore:
    n_true: int
    n_found: int
    n_matched: int

    @property
    def efficiency(self) -> float | None:
        return self.n_matched / self.n_true if self.n_true else None

    @property
    def purity(self) -> float | None:
        return self.n_matched / self.n_found if self.n_found else None

    def to_dict(self) -> dict[str, Any]:
        return {**asdict(self), "efficiency": self.efficiency, "purity": self.purity}


@dataclass(frozen=True)
class TrackScore:
    """``n_matched`` counts truth tracks found; ``n_fake`` counts candidates matching none."""

    n_true: int
    n_found: int
    n_matched: int
    n_fake: int = 0

    @property
    def efficiency(self) -> float | None:
        return self.n_matched / self.n_true if self.n_true else None

    @property
    def fake_rate(self) -> float | None:
        return self.n_fake / self.n_found if self.n_found else None

    def to_dict(self) -> dict[str, Any]:
        return {**asdict(self), "efficiency": self.efficiency, "fake_rate": self.fake_rate}


def _truth(event: Event) -> Truth:
    if event.truth is None:
        raise ContractError("event carries no truth record")
    return event.truth


def score_segments(found: Iterable[tuple[int, int]], event: Event) -> SegmentScore:
    """``found`` holds (from_hit, to_hit) pairs of the active segments."""
    found = set(found)
    for f, t in found:
        if f not in event or t not in event:
            raise ContractError(f"segment ({f}, {t}) references hits outside the event")
    true = _truth(event).true_segments()
    return SegmentScore(len(true), len(found), len(found & true))


def score_tracks(candidates: Sequence[Sequence[int]], truth: Truth) -> TrackScore:
    """Double-majority matching.

    A candidate matches a truth track when at least 75% of its hits belong to
    that track and it holds at least 50% of the track's hits. Each truth track
    counts as matched once.
    """
    owner = truth.track_of()
    sizes = {t.track_id: len(t.hit_ids) for t in truth.tracks if t.hit_ids}
    matched_tracks = set()
    n_fake = 0
    for cand in candidates:
        hits = list(cand)
        if not hits:
            n_fake += 1
            continue
        counts: dict[int, int] = {}
        for h in hits:
            if h in owner:
                counts[owner[h]] = counts.get(owner[h], 0) + 1
        hit = [tid for tid, k in counts.items()
               if k >= TRACK_PURITY_MIN * len(hits) and k >= TRACK_COVERAGE_MIN * sizes[tid]]
        matched_tracks.update(hit)
        n_fake += not hit
    return TrackScore(len(sizes), len(candidates), len(matched_tracks), n_fake)


def trace_rows(results) -> list[tuple]:
    rows = []
    for res in results:
        rows.extend(tuple(r) for r in res.trace)
    return rows


def emit_report(destination: str | Path, segment_score: SegmentScore | None = None,
                track_score: TrackScore | None = None, results: Sequence = (),
                extra: dict[str, Any] | None = None) -> tuple[Path, Path]:
    """Write ``report.json`` and ``energy_trace.csv`` into ``destination``."""
    out = Path(destination)
    out.mkdir(parents=True, exist_ok=True)
    report = {
        "segments": segment_score.to_dict() if segment_score else None,
        "tracks": track_score.to_dict() if track_score else None,
        "solves": [
            {k: r.to_dict()[k] for k in ("method", "seed", "n", "domain", "best_energy",
                                         "restart_energies", "acceptance_rate")}
            for r in results
        ],
    }
    if extra:
        report.update(extra)
    json_path = out / "report.json"
    json_path.write_text(json.dumps(report, indent=1) + "\n", encoding="utf-8")
    csv_path = out / "energy_trace.csv"
    with csv_path.open("w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for restart, step, control, energy in trace_rows(results):
            w.writerow((int(restart), int(step), repr(float(control)), repr(float(energy))))
    return json_path, csv_path


def read_trace(path: str | Path) -> list[tuple[int, int, float, float]]:
    with Path(path).open(encoding="utf-8", newline="") as fh:
        r = csv.reader(fh)
        header = next(r)
        if tuple(header) != TRACE_COLUMNS:
            raise ContractError(f"unexpected trace header {header}")
        return [(int(a), int(b), float(c), float(d)) for a, b, c, d in r]
