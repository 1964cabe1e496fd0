"""On-disk layout shared by the CLI and the HTTP service.

Everything lives under one data directory::

    series/<turbine>.csv          SCADA series
    truth/<turbine>.jsonl         injected ground-truth drifts
    models/<turbine>/<model>/     ensemble manifest + one .elm file per member
    residuals/<turbine>/<model>.csv
    labels/                       label log and expert registry
    runs/<run_id>/                detector events + run metadata

The service computes nothing itself: every artifact it serves is written
and read through these helpers, so any response can be reproduced by a
library call against the same files.
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Sequence

import numpy as np

from . import elm
from .detectors import (
    DetectionEvent,
    DetectorConfig,
    parse_events_csv,
    write_events_csv,
)
from .ensemble import (
    CertaintyFilter,
    EnsembleMember,
    EnsembleModel,
    ResidualSeries,
    parse_residual_csv,
    write_residual_csv,
)
from .errors import FormatError, NotFoundError
from .labels import LabelStore
from .scada import (
    DriftInjection,
    TurbineSeries,
    parse_scada_csv,
    read_injections,
    write_injections,
    write_scada_csv,
)

MANIFEST_VERSION = 1


class DataDir:
    def __init__(self, root: str | Path):
        self.root = Path(root)

    # layout -----------------------------------------------------------------

    def series_path(self, turbine_id: str) -> Path:
        return self.root / "series" / f"{turbine_id}.csv"

    def truth_path(self, turbine_id: str) -> Path:
        return self.root / "truth" / f"{turbine_id}.jsonl"

    def model_dir(self, turbine_id: str, model_id: str) -> Path:
        return self.root / "models" / turbine_id / model_id

    def residual_path(self, turbine_id: str, model_id: str) -> Path:
        return self.root / "residuals" / turbine_id / f"{model_id}.csv"

    def run_dir(self, run_id: str) -> Path:
        return self.root / "runs" / run_id

    def label_store(self) -> LabelStore:
        return LabelStore(self.root / "labels")

    def list_turbines(self) -> list[str]:
        base = self.root / "series"
        if not base.is_dir():
            return []
        return sorted(p.stem for p in base.glob("*.csv"))

    def list_models(self, turbine_id: str) -> list[str]:
        base = self.root / "residuals" / turbine_id
        if not base.is_dir():
            return []
        return sorted(p.stem for p in base.glob("*.csv"))

    def list_runs(self) -> list[str]:
        base = self.root / "runs"
        if not base.is_dir():
            return []
        return sorted(p.name for p in base.iterdir() if p.is_dir())

    # series -------------------------------------------------------------------

    def save_series(self, series: TurbineSeries) -> Path:
        path = self.series_path(series.turbine_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            write_scada_csv(series, fh)
        return path

    def load_series(self, turbine_id: str) -> TurbineSeries:
        path = self.series_path(turbine_id)
        if not path.exists():
            raise NotFoundError(f"no series for turbine {turbine_id!r}")
        with open(path, "rb") as fh:
            return parse_scada_csv(fh, turbine_id).series

    def save_truth(self, turbine_id: str, injections: Sequence[DriftInjection]) -> Path:
        path = self.truth_path(turbine_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            write_injections(injections, fh)
        return path

    def load_truth(self, turbine_id: str) -> list[DriftInjection]:
        path = self.truth_path(turbine_id)
        if not path.exists():
            raise NotFoundError(f"no ground truth for turbine {turbine_id!r}")
        with open(path, encoding="utf-8") as fh:
            return read_injections(fh)

    # models ---------------------------------------------------------------------

    def save_ensemble(self, turbine_id: str, model_id: str, ens: EnsembleModel) -> Path:
        out = self.model_dir(turbine_id, model_id)
        out.mkdir(parents=True, exist_ok=True)
        members = []
        for i, member in enumerate(ens.members):
            fname = f"member_{i:03d}.elm"
            with open(out / fname, "wb") as fh:
                elm.save_model(member.model, fh)
            filt = member.cert_filter
            members.append(
                {
                    "file": fname,
                    "validation_rmse": member.validation_rmse,
                    "weight": member.weight,
                    "batch_index": member.batch_index,
                    "filter": {
                        "min_occupancy": filt.min_occupancy,
                        "dims": [
                            {
                                "edges": [float(v) for v in filt.edges[d]],
                                "counts": [int(v) for v in filt.counts[d]],
                                "degenerate": bool(filt.degenerate[d]),
                                "constant": float(filt.constants[d]),
                            }
                            for d in range(filt.n_dims)
                        ],
                    },
                }
            )
        manifest = {
            "version": MANIFEST_VERSION,
            "predictors": list(ens.predictors),
            "combination": ens.combination,
            "members": members,
        }
        (out / "manifest.json").write_text(
            json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
        )
        return out

    def load_ensemble(self, turbine_id: str, model_id: str) -> EnsembleModel:
        base = self.model_dir(turbine_id, model_id)
        manifest_path = base / "manifest.json"
        if not manifest_path.exists():
            raise NotFoundError(f"no model {model_id!r} for turbine {turbine_id!r}")
        manifest = json.loads(manifest_path.read_text("utf-8"))
        if manifest.get("version") != MANIFEST_VERSION:
            raise FormatError(f"unsupported manifest version {manifest.get('version')}")
        members = []
        for doc in manifest["members"]:
            with open(base / doc["file"], "rb") as fh:
                model = elm.load_model(fh)
            fdoc = doc["filter"]
            filt = CertaintyFilter(
                edges=[np.array(d["edges"], dtype=np.float64) for d in fdoc["dims"]],
                counts=[np.array(d["counts"], dtype=np.int64) for d in fdoc["dims"]],
                min_occupancy=int(fdoc["min_occupancy"]),
                degenerate=np.array([d["degenerate"] for d in fdoc["dims"]], dtype=bool),
                constants=np.array([d["constant"] for d in fdoc["dims"]]),
            )
            members.append(
                EnsembleMember(
                    model=model,
                    cert_filter=filt,
                    validation_rmse=float(doc["validation_rmse"]),
                    weight=float(doc["weight"]),
                    batch_index=int(doc.get("batch_index", -1)),
                )
            )
        return EnsembleModel(
            members=members,
            predictors=tuple(manifest["predictors"]),
            combination=manifest["combination"],
        )

    # residuals ---------------------------------------------------------------

    def save_residuals(
        self, turbine_id: str, model_id: str, residuals: ResidualSeries
    ) -> Path:
        path = self.residual_path(turbine_id, model_id)
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as fh:
            write_residual_csv(residuals, fh)
        return path

    def load_residuals(self, turbine_id: str, model_id: str) -> ResidualSeries:
        path = self.residual_path(turbine_id, model_id)
        if not path.exists():
            raise NotFoundError(
                f"no residuals for turbine {turbine_id!r} model {model_id!r}"
            )
        with open(path, encoding="utf-8") as fh:
            return parse_residual_csv(fh, turbine_id)

    # detector runs -------------------------------------------------------------

    def save_run(
        self,
        run_id: str,
        turbine_id: str,
        model_id: str,
        configs: Sequence[DetectorConfig],
        events: dict[str, list[DetectionEvent]],
    ) -> Path:
        out = self.run_dir(run_id)
        out.mkdir(parents=True, exist_ok=True)
        meta = {
            "run_id": run_id,
            "turbine_id": turbine_id,
            "model_id": model_id,
            "detectors": {
                cfg.kind: {**cfg.params, "transform": cfg.transform} for cfg in configs
            },
        }
        (out / "meta.json").write_text(
            json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8"
        )
        flat = [ev for kind in sorted(events) for ev in events[kind]]
        with open(out / "events.csv", "w", encoding="utf-8") as fh:
            write_events_csv(flat, fh)
        return out

    def load_run(self, run_id: str) -> tuple[dict, dict[str, list[DetectionEvent]]]:
        base = self.run_dir(run_id)
        meta_path = base / "meta.json"
        if not meta_path.exists():
            raise NotFoundError(f"no run {run_id!r}")
        meta = json.loads(meta_path.read_text("utf-8"))
        with open(base / "events.csv", encoding="utf-8") as fh:
            flat = parse_events_csv(fh)
        events: dict[str, list[DetectionEvent]] = {
            kind: [] for kind in meta.get("detectors", {})
        }
        for ev in flat:
            events.setdefault(ev.detector, []).append(ev)
        return meta, events


def deterministic_run_id(
    turbine_id: str, model_id: str, configs: Sequence[DetectorConfig]
) -> str:
    """Stable run identifier from the run inputs (for reproducible CLI runs)."""
    payload = json.dumps(
        {
            "turbine_id": turbine_id,
            "model_id": model_id,
            "detectors": {
                cfg.kind: {**cfg.params, "transform": cfg.transform} for cfg in configs
            },
        },
        sort_keys=True,
    )
    return hashlib.sha256(payload.encode("utf-8")).hexdigest()[:16]
