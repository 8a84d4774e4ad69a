"""Per-evaluation run records and their JSON-lines persistence.

Each evaluation appends one record; a sidecar header carries run metadata.
Writing the same run twice produces byte-identical files.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

__all__ = ["RunRecord", "RunLog"]

RECORD_KEYS = (
    "iter",
    "eval_id",
    "objective",
    "score",
    "active",
    "best_objective",
    "candidate_digest",
)


@dataclass(frozen=True)
class RunRecord:
    iter: int
    eval_id: int
    objective: float
    score: Optional[float]
    active: int
    best_objective: float
    candidate_digest: str

    def to_obj(self) -> dict:
        return {key: getattr(self, key) for key in RECORD_KEYS}

    @classmethod
    def from_obj(cls, obj: dict) -> "RunRecord":
        return cls(**{key: obj[key] for key in RECORD_KEYS})


class RunLog:
    """Ordered evaluation records for one (strategy, objective, seed) run."""

    def __init__(self, header: dict):
        self.header = dict(header)
        self.records: list[RunRecord] = []

    def append(self, record: RunRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def best_objective(self) -> float:
        if not self.records:
            raise ValueError("empty run log")
        return self.records[-1].best_objective

    @property
    def best_score(self) -> Optional[float]:
        """Score of the best-so-far record (earliest on ties)."""
        if not self.records:
            raise ValueError("empty run log")
        best = min(self.records, key=lambda r: (r.objective, r.eval_id))
        return best.score

    def active_counts(self) -> list[int]:
        return [r.active for r in self.records]

    def iterations(self) -> list[int]:
        seen: list[int] = []
        for r in self.records:
            if not seen or r.iter != seen[-1]:
                seen.append(r.iter)
        return seen

    def to_jsonl(self) -> str:
        return "".join(
            json.dumps(r.to_obj(), separators=(",", ":")) + "\n" for r in self.records
        )

    def save(self, path: str | Path) -> None:
        path = Path(path)
        path.write_text(self.to_jsonl(), encoding="utf-8")
        meta = path.with_suffix(path.suffix + ".meta.json")
        meta.write_text(
            json.dumps(self.header, sort_keys=True, indent=1) + "\n", encoding="utf-8"
        )

    @classmethod
    def load(cls, path: str | Path) -> "RunLog":
        path = Path(path)
        meta = path.with_suffix(path.suffix + ".meta.json")
        header = json.loads(meta.read_text(encoding="utf-8")) if meta.exists() else {}
        log = cls(header)
        for line in path.read_text(encoding="utf-8").splitlines():
            if line.strip():
                log.append(RunRecord.from_obj(json.loads(line)))
        return log
