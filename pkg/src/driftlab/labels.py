"""Expert drift labels: append-only persistence and multi-expert consensus.

Labels are immutable once acknowledged; corrections are new labels that
reference the superseded one. Storage is a line-delimited JSON log plus an
in-memory index rebuilt on load, with appends serialized through a single
writer lock and fsynced before acknowledgement.
"""

from __future__ import annotations

import json
import os
import threading
import uuid
from collections import Counter
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Sequence

from .errors import FormatError, UnknownExpertError, ValidationError
from .timestamps import format_rfc3339, parse_rfc3339

DRIFT_TYPES = ("sudden", "gradual", "recurring", "unknown")
CAUSES = (
    "sensor_miscalibration",
    "maintenance_action",
    "power_limitation",
    "wear",
    "other",
)
CONFIDENCE_LEVELS = ("low", "medium", "high")


@dataclass(frozen=True)
class DriftLabel:
    """An expert-asserted drift period. Labels are retrospective, so
    created_at may precede or follow the labelled interval."""

    label_id: str
    turbine_id: str
    model_id: str
    start: int
    end: int
    drift_type: str
    cause: str
    severity: int
    confidence: str
    expert_id: str
    created_at: int
    note: str = ""
    supersedes: str | None = None

    def __post_init__(self):
        if self.start >= self.end:
            raise ValidationError("label start must precede end", field="end")
        if self.drift_type not in DRIFT_TYPES:
            raise ValidationError(
                f"drift_type must be one of {DRIFT_TYPES}", field="drift_type"
            )
        if self.cause not in CAUSES:
            raise ValidationError(f"cause must be one of {CAUSES}", field="cause")
        if not (1 <= int(self.severity) <= 5):
            raise ValidationError("severity must lie in 1..5", field="severity")
        if self.confidence not in CONFIDENCE_LEVELS:
            raise ValidationError(
                f"confidence must be one of {CONFIDENCE_LEVELS}", field="confidence"
            )

    def to_json(self) -> str:
        doc = {
            "label_id": self.label_id,
            "turbine_id": self.turbine_id,
            "model_id": self.model_id,
            "start": format_rfc3339(self.start),
            "end": format_rfc3339(self.end),
            "drift_type": self.drift_type,
            "cause": self.cause,
            "severity": self.severity,
            "confidence": self.confidence,
            "expert_id": self.expert_id,
            "created_at": format_rfc3339(self.created_at),
            "note": self.note,
        }
        if self.supersedes is not None:
            doc["supersedes"] = self.supersedes
        return json.dumps(doc, separators=(",", ":"))

    @classmethod
    def from_json(cls, line: str) -> "DriftLabel":
        try:
            doc = json.loads(line)
        except json.JSONDecodeError as exc:
            raise FormatError(f"bad label record: {line!r}") from exc
        return cls(
            label_id=doc["label_id"],
            turbine_id=doc["turbine_id"],
            model_id=doc["model_id"],
            start=parse_rfc3339(doc["start"]),
            end=parse_rfc3339(doc["end"]),
            drift_type=doc["drift_type"],
            cause=doc["cause"],
            severity=int(doc["severity"]),
            confidence=doc["confidence"],
            expert_id=doc["expert_id"],
            created_at=parse_rfc3339(doc["created_at"]),
            note=doc.get("note", ""),
            supersedes=doc.get("supersedes"),
        )


@dataclass(frozen=True)
class ExpertInfo:
    expert_id: str
    display_name: str

    def __post_init__(self):
        if not self.expert_id:
            raise ValidationError("expert_id must be non-empty", field="expert_id")


class LabelStore:
    """Append-only label log with an expert registry.

    One instance owns the files under `root`; appends are serialized and
    fsynced so every acknowledged record survives restart byte-identically.
    """

    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._labels_path = self.root / "labels.jsonl"
        self._experts_path = self.root / "experts.jsonl"
        self._lock = threading.Lock()
        self._labels: dict[str, DriftLabel] = {}
        self._order: list[str] = []
        self._experts: dict[str, ExpertInfo] = {}
        self._load()

    def _load(self) -> None:
        if self._experts_path.exists():
            for line in self._experts_path.read_text("utf-8").splitlines():
                if not line.strip():
                    continue
                doc = json.loads(line)
                info = ExpertInfo(doc["expert_id"], doc.get("display_name", ""))
                self._experts[info.expert_id] = info
        if self._labels_path.exists():
            for line in self._labels_path.read_text("utf-8").splitlines():
                if not line.strip():
                    continue
                label = DriftLabel.from_json(line)
                if label.label_id not in self._labels:
                    self._order.append(label.label_id)
                self._labels[label.label_id] = label

    @staticmethod
    def _append_line(path: Path, line: str) -> None:
        with open(path, "a", encoding="utf-8") as fh:
            fh.write(line + "\n")
            fh.flush()
            os.fsync(fh.fileno())

    # experts ---------------------------------------------------------------

    def register_expert(self, info: ExpertInfo) -> ExpertInfo:
        with self._lock:
            existing = self._experts.get(info.expert_id)
            if existing is not None:
                return existing
            self._append_line(
                self._experts_path,
                json.dumps(
                    {"expert_id": info.expert_id, "display_name": info.display_name},
                    separators=(",", ":"),
                ),
            )
            self._experts[info.expert_id] = info
            return info

    def list_experts(self) -> list[ExpertInfo]:
        return sorted(self._experts.values(), key=lambda e: e.expert_id)

    def has_expert(self, expert_id: str) -> bool:
        return expert_id in self._experts

    # labels ------------------------------------------------------------------

    def append_label(self, label: DriftLabel, label_id: str | None = None) -> DriftLabel:
        """Durably append a validated label and return it with its id.

        A caller-supplied `label_id` (idempotency) that already exists
        returns the stored record unchanged; otherwise a fresh UUID is
        assigned. Unknown experts are rejected.
        """
        if not self.has_expert(label.expert_id):
            raise UnknownExpertError(f"expert {label.expert_id!r} is not registered")
        with self._lock:
            assigned = label_id or label.label_id or str(uuid.uuid4())
            if assigned in self._labels:
                return self._labels[assigned]
            stored = replace(label, label_id=assigned)
            self._append_line(self._labels_path, stored.to_json())
            self._labels[assigned] = stored
            self._order.append(assigned)
            return stored

    def get_label(self, label_id: str) -> DriftLabel | None:
        return self._labels.get(label_id)

    def query_labels(
        self,
        turbine_id: str | None = None,
        model_id: str | None = None,
        expert_id: str | None = None,
        start: int | None = None,
        end: int | None = None,
        cause: str | None = None,
    ) -> list[DriftLabel]:
        """Labels matching every provided filter, ordered by start time.

        The time filter keeps labels whose interval intersects [start, end].
        """
        out = []
        for label_id in self._order:
            label = self._labels[label_id]
            if turbine_id is not None and label.turbine_id != turbine_id:
                continue
            if model_id is not None and label.model_id != model_id:
                continue
            if expert_id is not None and label.expert_id != expert_id:
                continue
            if cause is not None and label.cause != cause:
                continue
            if start is not None and label.end < start:
                continue
            if end is not None and label.start > end:
                continue
            out.append(label)
        out.sort(key=lambda lb: (lb.start, lb.end, lb.label_id))
        return out

    def all_labels(self) -> list[DriftLabel]:
        return self.query_labels()


@dataclass(frozen=True)
class ConsensusPeriod:
    """Several experts' overlapping labels merged into one period."""

    start: int
    end: int
    support: int  # distinct experts
    cause: str  # majority cause
    cause_tied: bool
    severity: int  # maximum over merged labels
    label_ids: tuple[str, ...]


def _jaccard(a_start, a_end, b_start, b_end) -> float:
    inter = max(0, min(a_end, b_end) - max(a_start, b_start))
    union = (a_end - a_start) + (b_end - b_start) - inter
    return inter / union if union > 0 else 0.0


def consensus(
    labels: Sequence[DriftLabel], overlap_threshold: float = 0.5
) -> list[ConsensusPeriod]:
    """Merge overlapping labels (Jaccard >= threshold) into consensus periods.

    Labels must belong to one turbine/model. Groups merge repeatedly until
    no pair of merged intervals still clears the threshold, which makes the
    operation idempotent. Majority cause ties are flagged, severity is the
    maximum (cautious), support counts distinct experts.
    """
    if not labels:
        return []
    keys = {(lb.turbine_id, lb.model_id) for lb in labels}
    if len(keys) > 1:
        raise ValidationError("consensus requires labels for a single turbine/model")
    groups: list[dict] = [
        {"start": lb.start, "end": lb.end, "labels": [lb]} for lb in labels
    ]
    merged = True
    while merged:
        merged = False
        for i in range(len(groups)):
            for j in range(i + 1, len(groups)):
                a, b = groups[i], groups[j]
                if (
                    _jaccard(a["start"], a["end"], b["start"], b["end"])
                    >= overlap_threshold
                ):
                    a["start"] = min(a["start"], b["start"])
                    a["end"] = max(a["end"], b["end"])
                    a["labels"].extend(b["labels"])
                    del groups[j]
                    merged = True
                    break
            if merged:
                break
    periods = []
    for group in sorted(groups, key=lambda g: (g["start"], g["end"])):
        members: list[DriftLabel] = group["labels"]
        cause_counts = Counter(lb.cause for lb in members)
        top = cause_counts.most_common()
        best_count = top[0][1]
        tied_causes = sorted(c for c, n in top if n == best_count)
        periods.append(
            ConsensusPeriod(
                start=group["start"],
                end=group["end"],
                support=len({lb.expert_id for lb in members}),
                cause=tied_causes[0],
                cause_tied=len(tied_causes) > 1,
                severity=max(lb.severity for lb in members),
                label_ids=tuple(sorted(lb.label_id for lb in members)),
            )
        )
    return periods
