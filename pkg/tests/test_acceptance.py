"""Acceptance suite: one test per release criterion, at the stated tolerances.

Run with `pytest tests/test_acceptance.py -s` to see one PASS/FAIL line per
criterion with the measured values.
"""

import math
import time
from contextlib import contextmanager
from pathlib import Path

import numpy as np
import pytest
from click.testing import CliRunner
from fastapi.testclient import TestClient

from driftlab.cli import main as cli_main
from driftlab.corpus import make_synthetic_corpus
from driftlab.detectors import DetectorConfig, default_configs, make_detector, stream_indices
from driftlab.elm import ELMParams, train_elm
from driftlab.ensemble import EnsembleConfig, ResidualSeries, ensemble_residuals, train_ensemble
from driftlab.evaluation import (
    ConfusionCounts,
    LabelledPeriod,
    benchmark_detectors,
    match_triggers,
    precision_sensitivity,
    results_csv_text,
)
from driftlab.metrics import (
    characterize_drift,
    drift_duration,
    drift_magnitude,
    drift_path_length,
    hellinger_distance,
    total_variation_distance,
)
from driftlab.scada import GeneratorConfig, generate_series
from driftlab.service import create_app
from driftlab.storage import DataDir
from driftlab.timestamps import format_rfc3339, parse_rfc3339


@contextmanager
def criterion(name):
    start = time.monotonic()
    info = {}
    try:
        yield info
    except BaseException:
        print(f"ACCEPTANCE FAIL: {name} ({time.monotonic() - start:.1f}s) {info}")
        raise
    print(f"ACCEPTANCE PASS: {name} ({time.monotonic() - start:.1f}s) {info}")


def test_elm_oracle_equivalence():
    with criterion("ELM beta matches closed-form ridge oracle (20 seeds, <=1e-8)") as info:
        start = time.monotonic()
        worst = 0.0
        for seed in range(20):
            rng = np.random.default_rng(seed)
            X = rng.normal(0.0, 2.0, size=(500, 3))
            y = (
                np.sin(X[:, 0])
                + 0.4 * X[:, 1] * X[:, 2]
                + rng.normal(0, 0.2, 500)
            )
            params = ELMParams(
                hidden_width=80, ridge_lambda=1e-3, input_dim=3, seed=1000 + seed
            )
            model = train_elm(X, y, params)
            # independent dense-linear-algebra oracle on the same features
            Xs = (X - model.scaler_mean) / model.scaler_sd
            H = 1.0 / (1.0 + np.exp(-(Xs @ model.input_weights.T + model.biases)))
            H = np.column_stack([H, np.ones(len(H))])
            A = H.T @ H + params.ridge_lambda * np.eye(H.shape[1])
            beta = np.linalg.solve(A, H.T @ (y - y.mean()))
            rel = np.linalg.norm(model.output_weights - beta) / np.linalg.norm(beta)
            worst = max(worst, rel)
        elapsed = time.monotonic() - start
        info["worst_rel_err"] = f"{worst:.2e}"
        info["runtime_s"] = f"{elapsed:.2f}"
        assert worst <= 1e-8
        assert elapsed < 5.0


def test_normal_behaviour_fidelity():
    with criterion(
        "drift-free year: residual mean within 3*SE, sd <= 1.5x noise, < 60 s"
    ) as info:
        start = time.monotonic()
        noise_sd = 0.02 * 2000.0
        config = GeneratorConfig(n_records=52560, seed=7, noise_sd=noise_sd)
        series, _ = generate_series(config)
        ens = train_ensemble(series, EnsembleConfig(), seed=107)
        res = ensemble_residuals(ens, series)
        _, r = res.observed()
        se = r.std() / np.sqrt(len(r))
        elapsed = time.monotonic() - start
        info["mean_kw"] = f"{r.mean():+.3f}"
        info["limit_kw"] = f"{3 * se:.3f}"
        info["sd_kw"] = f"{r.std():.1f}"
        info["runtime_s"] = f"{elapsed:.1f}"
        assert len(series) == 52560
        assert abs(r.mean()) <= 3 * se
        assert r.std() <= 1.5 * noise_sd
        assert elapsed < 60.0


def test_metric_identities():
    with criterion(
        "Hellinger/TV identities on 10,000 random mass pairs at 1e-9"
    ) as info:
        rng = np.random.default_rng(12345)
        sqrt2 = math.sqrt(2.0)
        for _ in range(10_000):
            size = int(rng.integers(2, 24))
            p = rng.dirichlet(np.ones(size))
            q = rng.dirichlet(np.ones(size))
            r = rng.dirichlet(np.ones(size))
            h_pq = hellinger_distance(p, q)
            tv_pq = total_variation_distance(p, q)
            # symmetry
            assert abs(h_pq - hellinger_distance(q, p)) <= 1e-9
            assert abs(tv_pq - total_variation_distance(q, p)) <= 1e-9
            # bounds
            assert -1e-9 <= h_pq <= 1.0 + 1e-9
            assert -1e-9 <= tv_pq <= 1.0 + 1e-9
            # identity of indiscernibles
            assert hellinger_distance(p, p) <= 1e-9
            assert total_variation_distance(p, p) <= 1e-9
            assert h_pq > 1e-9 and tv_pq > 1e-9
            # triangle inequality
            assert h_pq <= hellinger_distance(p, r) + hellinger_distance(r, q) + 1e-9
            assert (
                tv_pq
                <= total_variation_distance(p, r)
                + total_variation_distance(r, q)
                + 1e-9
            )
            # H^2 <= TV <= sqrt(2) H
            assert h_pq**2 <= tv_pq + 1e-9
            assert tv_pq <= sqrt2 * h_pq + 1e-9
        h_hand = hellinger_distance([0.5, 0.5], [0.9, 0.1])
        tv_hand = total_variation_distance([0.5, 0.5], [0.9, 0.1])
        info["hellinger_hand"] = f"{h_hand:.6f}"
        info["tv_hand"] = f"{tv_hand:.6f}"
        assert abs(h_hand - 0.3250) <= 1e-4
        assert abs(tv_hand - 0.4) <= 1e-4


def _noise_series(n, seed, offset_from=None, offset=0.0):
    rng = np.random.default_rng(seed)
    values = rng.normal(0.0, 1.0, n)
    ts = 600 * np.arange(n, dtype=np.int64)
    if offset_from is not None:
        values[ts >= offset_from] += offset
    return ResidualSeries(
        turbine_id="t",
        timestamps=ts,
        actual=values,
        predicted=np.zeros(n),
        residual=values,
        n_members=np.ones(n, dtype=np.int64),
    )


def test_duration_and_path_length():
    with criterion(
        "duration exact; path(n=1) == magnitude; path >= magnitude on 1,000 windows"
    ) as info:
        t = parse_rfc3339("2016-01-01T00:00:00Z")
        u = parse_rfc3339("2016-01-03T00:00:00Z")
        assert drift_duration(t, u) == 172800.0

        series = _noise_series(5000, seed=0, offset_from=600 * 2500, offset=2.0)
        window = 600.0 * 400
        t1, u1 = 600 * 2000, 600 * 3000
        path1 = drift_path_length(series, t1, u1, n_steps=1, window=window)
        mag1 = drift_magnitude(series, t1, u1, window=window)
        assert path1 == mag1

        rng = np.random.default_rng(99)
        checked = 0
        while checked < 1000:
            seed = int(rng.integers(0, 2**31))
            offset = float(rng.uniform(-4, 4))
            s = _noise_series(5000, seed=seed, offset_from=600 * 2500, offset=offset)
            t2 = int(rng.integers(1200, 2600)) * 600
            u2 = t2 + int(rng.integers(300, 1500)) * 600
            n_steps = int(rng.integers(1, 5))
            result = characterize_drift(s, t2, u2, n_steps=n_steps, window=window)
            assert result.path_length >= result.magnitude - 1e-9
            checked += 1
        info["windows_checked"] = checked


def test_detector_delay_and_false_alarm_calibration():
    with criterion(
        "delays: cusum/ph <= 50, adwin <= 300 in >= 95/100; <= 3 false alarms per 10k"
    ) as info:
        start = time.monotonic()
        delay_specs = {
            "cusum": (DetectorConfig("cusum", {"threshold": 5.0, "drift_allowance": 0.5}), 50),
            "ph": (DetectorConfig("ph", {"threshold": 50.0, "delta": 0.005}), 50),
            "adwin": (DetectorConfig("adwin", {"delta": 0.002}), 300),
        }
        for kind, (config, budget) in delay_specs.items():
            within = 0
            for seed in range(100):
                rng = np.random.default_rng(10_000 + seed)
                stream = np.concatenate(
                    [rng.normal(0, 1, 2000), rng.normal(3, 1, 600)]
                )
                hits = stream_indices(make_detector(config), stream)
                post = [h for h in hits if h >= 2000]
                within += bool(post) and post[0] - 2000 <= budget
            info[f"{kind}_within"] = f"{within}/100"
            assert within >= 95
        rng = np.random.default_rng(424242)
        stream = rng.normal(0, 1, 10_000)
        for config in default_configs():
            hits = stream_indices(make_detector(config), stream)
            info[f"{config.kind}_fa"] = len(hits)
            assert len(hits) <= 3
        elapsed = time.monotonic() - start
        info["runtime_s"] = f"{elapsed:.1f}"
        assert elapsed < 120.0


def test_evaluation_arithmetic():
    with criterion(
        "hand-counted fixture: precision 2/3, sensitivity 1.0; monotone sweep"
    ) as info:
        periods = [LabelledPeriod(10, 20), LabelledPeriod(40, 50)]
        counts = match_triggers(periods, [12.0, 30.0, 45.0], 0.0)
        result = precision_sensitivity(counts, "fixture")
        info["precision"] = f"{result.precision:.9f}"
        info["sensitivity"] = f"{result.sensitivity:.9f}"
        assert abs(result.precision - 2.0 / 3.0) <= 1e-9
        assert result.sensitivity == 1.0
        prev = -1.0
        for tol in (0.0, 5.0, 9.0, 20.0):
            swept = match_triggers(periods, [25.0, 35.0], tol)
            sens = swept.tp / (swept.tp + swept.fn)
            assert sens >= prev
            prev = sens


def test_benchmark_table_shape():
    with criterion(
        "20-series corpus: 10-row table, tp+fn == periods, ratios in [0,1], CSV schema"
    ) as info:
        start = time.monotonic()
        corpus = make_synthetic_corpus(n_series=20, seed=31, n_records=4000)
        total_periods = sum(len(periods) for _, periods in corpus)
        table = benchmark_detectors(corpus, default_configs(), tolerance=0.0)
        assert len(table.pooled) == 10
        for row in table.pooled:
            assert row.counts.tp + row.counts.fn == total_periods
            for value in (row.precision, row.sensitivity):
                assert value is None or 0.0 <= value <= 1.0
        csv_text = results_csv_text(table.pooled)
        header = csv_text.splitlines()[0].split(",")
        assert header[:3] == ["detector", "precision", "sensitivity"]
        assert len(csv_text.splitlines()) == 11
        elapsed = time.monotonic() - start
        info["series"] = len(corpus)
        info["periods"] = total_periods
        info["runtime_s"] = f"{elapsed:.1f}"


def _run_cli_pipeline(data_dir: Path, records: int = 9000) -> tuple[str, str]:
    from driftlab.scada import DriftInjection

    runner = CliRunner()
    base = ["--data-dir", str(data_dir)]
    inj_path = data_dir.parent / f"{data_dir.name}_inject.jsonl"
    t0 = 1451606400
    inj_path.write_text(
        DriftInjection(
            kind="sudden",
            start=t0 + 600 * 5000,
            end=t0 + 600 * 5600,
            amplitude=-320.0,
        ).to_json()
        + "\n"
    )
    steps = [
        base
        + [
            "generate",
            "--turbine",
            "wt1",
            "--records",
            str(records),
            "--seed",
            "11",
            "--noise-sd",
            "40",
            "--injections",
            str(inj_path),
        ],
        base
        + [
            "train",
            "--turbine",
            "wt1",
            "--model",
            "power",
            "--seed",
            "5",
            "--batch-size",
            "3000",
            "--hidden-width",
            "100",
        ],
        base + ["residuals", "--turbine", "wt1", "--model", "power"],
        base
        + ["detect", "--turbine", "wt1", "--model", "power", "--detectors", "cusum,ph,adwin"],
    ]
    run_id = None
    for step in steps:
        result = runner.invoke(cli_main, step, catch_exceptions=False)
        assert result.exit_code == 0, result.output
        if "detect" in step:
            run_id = result.output.split()[1]
    eval_result = runner.invoke(
        cli_main,
        base
        + [
            "evaluate",
            "--run-id",
            run_id,
            "--labels",
            "ground_truth",
            "--tolerance",
            "86400",
        ],
        catch_exceptions=False,
    )
    assert eval_result.exit_code == 0, eval_result.output
    return run_id, eval_result.output


def test_end_to_end_cli_reproducible():
    with criterion(
        "CLI generate->train->residuals->detect->evaluate < 3 min, byte-reproducible"
    ) as info:
        import tempfile

        start = time.monotonic()
        with tempfile.TemporaryDirectory() as tmp:
            root = Path(tmp)
            run_a, out_a = _run_cli_pipeline(root / "a")
            first_elapsed = time.monotonic() - start
            run_b, out_b = _run_cli_pipeline(root / "b")
            assert run_a == run_b
            assert out_a == out_b
            files_a = sorted((root / "a").rglob("*"))
            files_b = sorted((root / "b").rglob("*"))
            rel_a = [p.relative_to(root / "a") for p in files_a if p.is_file()]
            rel_b = [p.relative_to(root / "b") for p in files_b if p.is_file()]
            assert rel_a == rel_b
            mismatched = [
                str(rel)
                for rel in rel_a
                if (root / "a" / rel).read_bytes() != (root / "b" / rel).read_bytes()
            ]
            info["files_compared"] = len(rel_a)
            info["runtime_s"] = f"{first_elapsed:.1f}"
            assert mismatched == []
            assert first_elapsed < 180.0


def test_label_durability_under_concurrency(tmp_path):
    with criterion(
        "100 concurrent label posts all present after restart, byte-identical"
    ) as info:
        import concurrent.futures

        data_root = tmp_path / "data"
        store_root = DataDir(data_root).label_store()
        from driftlab.labels import ExpertInfo

        store_root.register_expert(ExpertInfo("e1", "One"))
        app = create_app(data_root)
        client = TestClient(app)

        def post(k):
            payload = {
                "turbine_id": "wt1",
                "model_id": "power",
                "start": format_rfc3339(1451606400 + k * 6000),
                "end": format_rfc3339(1451606400 + k * 6000 + 3000),
                "drift_type": "sudden",
                "cause": "other",
                "severity": 1 + (k % 5),
                "confidence": "medium",
                "expert_id": "e1",
            }
            response = client.post("/labels", json=payload)
            assert response.status_code == 201
            return response.json()

        with concurrent.futures.ThreadPoolExecutor(max_workers=32) as pool:
            acknowledged = [f.result() for f in [pool.submit(post, k) for k in range(100)]]

        # restart: fresh app + store over the same directory
        restarted = TestClient(create_app(data_root))
        after = restarted.get("/labels").json()["labels"]
        by_id = {lb["label_id"]: lb for lb in after}
        info["stored"] = len(after)
        assert len(acknowledged) == 100
        for ack in acknowledged:
            assert by_id[ack["label_id"]] == ack
