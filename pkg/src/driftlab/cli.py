"""Command-line client mirroring the HTTP API over a local data directory.

Subcommands read and write exactly the file formats the service uses, so a
pipeline driven from the shell and one driven through HTTP produce the same
artifacts. Exit codes: 0 success, 2 validation/config errors, 1 otherwise.
"""

from __future__ import annotations

import functools
import sys
from pathlib import Path

import click

from . import errors
from .detectors import (
    DETECTOR_KINDS,
    DetectorConfig,
    load_detector_configs,
    run_detectors,
)
from .ensemble import EnsembleConfig, ensemble_residuals, train_ensemble
from .evaluation import (
    LabelledPeriod,
    match_triggers,
    merge_overlapping,
    precision_sensitivity,
    write_results_csv,
)
from .labels import ExpertInfo, consensus
from .scada import GeneratorConfig, generate_series, read_injections
from .storage import DataDir, deterministic_run_id
from .timestamps import parse_rfc3339

_VALIDATION_ERRORS = (
    errors.ValidationError,
    errors.ConfigError,
    errors.FormatError,
    errors.OrderingError,
    errors.RangeError,
    errors.OverlappingPeriodsError,
    errors.InsufficientDataError,
    errors.InsufficientSamplesError,
    errors.EmptyInputError,
    errors.ShapeMismatchError,
    errors.DuplicateTimestampError,
    errors.UnknownExpertError,
)


def guarded(fn):
    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except _VALIDATION_ERRORS as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(2)
        except errors.DriftLabError as exc:
            click.echo(f"error: {exc}", err=True)
            sys.exit(1)

    return wrapper


@click.group()
@click.option(
    "--data-dir",
    type=click.Path(path_type=Path),
    default=Path("data"),
    show_default=True,
    help="Directory holding series, models, residuals, labels and runs.",
)
@click.pass_context
def main(ctx, data_dir: Path):
    """Concept-drift workbench for wind-turbine residual monitoring."""
    ctx.obj = DataDir(data_dir)


@main.command()
@click.option("--turbine", required=True, help="Turbine identifier.")
@click.option("--records", default=52560, show_default=True, type=int)
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--noise-sd", default=40.0, show_default=True, type=float)
@click.option("--rated-power", default=2000.0, show_default=True, type=float)
@click.option("--start", default="2016-01-01T00:00:00Z", show_default=True)
@click.option(
    "--injections",
    type=click.File("r"),
    default=None,
    help="Line-delimited JSON drift injections to apply (also saved as ground truth).",
)
@click.pass_obj
@guarded
def generate(data: DataDir, turbine, records, seed, noise_sd, rated_power, start, injections):
    """Generate a synthetic SCADA series (and its ground-truth drifts)."""
    config = GeneratorConfig(
        rated_power=rated_power,
        noise_sd=noise_sd,
        seed=seed,
        n_records=records,
        start=parse_rfc3339(start),
    )
    injected = read_injections(injections) if injections else []
    series, truth = generate_series(config, injected)
    series.turbine_id = turbine
    path = data.save_series(series)
    data.save_truth(turbine, truth)
    click.echo(f"wrote {len(series)} records to {path}")


@main.command()
@click.option("--turbine", required=True)
@click.option("--model", required=True, help="Model identifier for this ensemble.")
@click.option("--seed", default=0, show_default=True, type=int)
@click.option("--batch-size", default=4320, show_default=True, type=int)
@click.option("--validation-fraction", default=0.2, show_default=True, type=float)
@click.option("--hidden-width", default=100, show_default=True, type=int)
@click.option("--ridge-lambda", default=1e-3, show_default=True, type=float)
@click.option(
    "--activation",
    default="sigmoid",
    show_default=True,
    type=click.Choice(["sigmoid", "tanh"]),
)
@click.option("--bins", default=20, show_default=True, type=int)
@click.option("--min-occupancy", default=3, show_default=True, type=int)
@click.pass_obj
@guarded
def train(
    data: DataDir,
    turbine,
    model,
    seed,
    batch_size,
    validation_fraction,
    hidden_width,
    ridge_lambda,
    activation,
    bins,
    min_occupancy,
):
    """Train the per-batch ELM ensemble for a turbine."""
    series = data.load_series(turbine)
    config = EnsembleConfig(
        batch_size=batch_size,
        validation_fraction=validation_fraction,
        hidden_width=hidden_width,
        ridge_lambda=ridge_lambda,
        activation=activation,
        bins=bins,
        min_occupancy=min_occupancy,
    )
    ens = train_ensemble(series, config, seed=seed)
    path = data.save_ensemble(turbine, model, ens)
    click.echo(f"trained {len(ens.members)} members into {path}")


@main.command()
@click.option("--turbine", required=True)
@click.option("--model", required=True)
@click.pass_obj
@guarded
def residuals(data: DataDir, turbine, model):
    """Compute and store the ensemble residual series."""
    series = data.load_series(turbine)
    ens = data.load_ensemble(turbine, model)
    res = ensemble_residuals(ens, series, turbine_id=turbine)
    path = data.save_residuals(turbine, model, res)
    covered = int(res.present.sum())
    click.echo(f"wrote {len(res)} rows ({covered} covered) to {path}")


@main.command()
@click.option("--turbine", required=True)
@click.option("--model", required=True)
@click.option(
    "--detectors",
    "kinds",
    default=",".join(DETECTOR_KINDS),
    show_default=True,
    help="Comma-separated detector kinds to run.",
)
@click.option(
    "--config",
    "config_file",
    type=click.File("r"),
    default=None,
    help="JSON file keyed by detector kind with named parameters.",
)
@click.option("--run-id", default=None, help="Defaults to a digest of the run inputs.")
@click.pass_obj
@guarded
def detect(data: DataDir, turbine, model, kinds, config_file, run_id):
    """Run drift detectors over stored residuals; persists a run."""
    overrides = {c.kind: c for c in load_detector_configs(config_file)} if config_file else {}
    configs = []
    for kind in [k.strip() for k in kinds.split(",") if k.strip()]:
        configs.append(overrides.get(kind, DetectorConfig(kind=kind)))
    res = data.load_residuals(turbine, model)
    events = run_detectors(configs, res)
    run_id = run_id or deterministic_run_id(turbine, model, configs)
    path = data.save_run(run_id, turbine, model, configs, events)
    click.echo(f"run {run_id} -> {path}")
    for kind in sorted(events):
        click.echo(f"  {kind}: {len(events[kind])} events")


@main.command()
@click.option("--run-id", required=True)
@click.option(
    "--labels",
    "label_source",
    default="ground_truth",
    show_default=True,
    type=click.Choice(["expert", "consensus", "ground_truth"]),
)
@click.option("--tolerance", default=0.0, show_default=True, type=float)
@click.option("--consensus-threshold", default=0.5, show_default=True, type=float)
@click.option("--out", type=click.File("w"), default="-", show_default=True)
@click.pass_obj
@guarded
def evaluate(data: DataDir, run_id, label_source, tolerance, consensus_threshold, out):
    """Score a detector run against labelled periods (results CSV)."""
    meta, run_events = data.load_run(run_id)
    turbine, model = meta["turbine_id"], meta["model_id"]
    if label_source == "ground_truth":
        truth = data.load_truth(turbine)
        periods = merge_overlapping(
            LabelledPeriod(start=i.start, end=i.end, source="injected_ground_truth")
            for i in truth
        )
    else:
        store = data.label_store()
        found = store.query_labels(turbine_id=turbine, model_id=model)
        if not found:
            raise errors.EmptyInputError("no expert labels for this turbine/model")
        if label_source == "consensus":
            merged = consensus(found, overlap_threshold=consensus_threshold)
            periods = merge_overlapping(
                LabelledPeriod(start=p.start, end=p.end, source="consensus")
                for p in merged
            )
        else:
            periods = [
                LabelledPeriod(start=lb.start, end=lb.end, source="expert")
                for lb in found
            ]
    results = []
    for kind in sorted(run_events):
        counts = match_triggers(periods, run_events[kind], tolerance)
        results.append(precision_sensitivity(counts, kind))
    write_results_csv(results, out)


@main.group()
def labels():
    """Label log operations."""


@labels.command("export")
@click.option("--turbine", default=None)
@click.option("--model", default=None)
@click.option("--expert", default=None)
@click.option("--from", "from_", default=None, help="RFC 3339 lower bound.")
@click.option("--to", default=None, help="RFC 3339 upper bound.")
@click.option("--cause", default=None)
@click.option("--out", type=click.File("w"), default="-", show_default=True)
@click.pass_obj
@guarded
def labels_export(data: DataDir, turbine, model, expert, from_, to, cause, out):
    """Export labels as line-delimited JSON (same format as the log)."""
    store = data.label_store()
    found = store.query_labels(
        turbine_id=turbine,
        model_id=model,
        expert_id=expert,
        start=parse_rfc3339(from_) if from_ else None,
        end=parse_rfc3339(to) if to else None,
        cause=cause,
    )
    for label in found:
        out.write(label.to_json() + "\n")


@main.group()
def experts():
    """Expert registry operations."""


@experts.command("add")
@click.option("--expert-id", required=True)
@click.option("--name", default="", help="Display name.")
@click.pass_obj
@guarded
def experts_add(data: DataDir, expert_id, name):
    store = data.label_store()
    info = store.register_expert(ExpertInfo(expert_id=expert_id, display_name=name))
    click.echo(f"registered {info.expert_id}")


@main.command()
@click.option("--listen", default="127.0.0.1:8000", show_default=True)
@click.option("--read-only", is_flag=True, default=False)
@click.option(
    "--ui-dir",
    type=click.Path(path_type=Path),
    default=None,
    help="Static UI build to mount at /ui (defaults to ./frontend/dist if present).",
)
@click.pass_obj
@guarded
def serve(data: DataDir, listen, read_only, ui_dir):
    """Serve the HTTP API (and the labelling UI, when built)."""
    import uvicorn

    from .service import create_app

    if ui_dir is None:
        candidate = Path("frontend") / "dist"
        ui_dir = candidate if candidate.is_dir() else None
    host, _, port = listen.partition(":")
    app = create_app(data.root, read_only=read_only, ui_dir=ui_dir)
    uvicorn.run(app, host=host or "127.0.0.1", port=int(port or 8000))


if __name__ == "__main__":
    main()
