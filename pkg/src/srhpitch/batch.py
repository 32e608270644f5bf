"""Batch runner: optional noise mixing, tracking and scoring over a manifest."""
from __future__ import annotations

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

from . import io
from .evaluation import EvalReport, FramePairs, NoiseSpec, align, mix_noise, pool, report
from .tracker import srh_surface, track

logger = logging.getLogger(__name__)

AGGREGATE_NAME = "ALL"


@dataclass
class FileResult:
    name: str
    pairs: FramePairs | None = None
    error: str | None = None

    @property
    def report(self) -> EvalReport | None:
        return None if self.pairs is None else report(self.pairs)


@dataclass
class BatchResult:
    files: list[FileResult]
    condition: str
    aggregate: EvalReport | None
    metrics_path: Path

    @property
    def n_failed(self) -> int:
        return sum(r.error is not None for r in self.files)

    @property
    def ok(self) -> bool:
        return self.n_failed == 0


def _output_names(manifest: io.RunManifest) -> list[str]:
    names, seen = [], {}
    for entry in manifest.files:
        stem = entry.audio.stem
        seen[stem] = seen.get(stem, 0) + 1
        names.append(stem if seen[stem] == 1 else f"{stem}_{seen[stem]}")
    return names


def _process(manifest: io.RunManifest, index: int, name: str) -> FileResult:
    entry = manifest.files[index]
    out_dir = manifest.output_dir
    try:
        signal = io.read_wav(entry.audio)
        if manifest.noise is not None:
            noise = io.read_wav(manifest.noise)
            signal = mix_noise(signal, NoiseSpec(noise, manifest.snr_db, manifest.noise_offset))
        config = manifest.config
        result = track(signal, config)
        io.write_track(result, out_dir / f"{name}.track.csv")

        truth = io.read_truth(entry.truth) if entry.truth is not None else None
        if manifest.plot_data:
            io.write_plot_data(result, out_dir / f"{name}.plot.csv", truth)
        if manifest.plot_surface:
            times, curve = srh_surface(signal, config)
            io.write_surface(times, curve, out_dir / f"{name}.surface.csv")
        pairs = align(result, truth, manifest.uncertain) if truth is not None else None
        return FileResult(name, pairs)
    except Exception as exc:  # noqa: BLE001  batch continues past per-file failures
        logger.error("%s: %s", entry.audio, exc)
        return FileResult(name, error=f"{type(exc).__name__}: {exc}")


def run_batch(manifest: io.RunManifest, jobs: int | None = None) -> BatchResult:
    """
    Process every file of ``manifest`` and write tracks plus ``metrics.csv``.

    The aggregate row pools frames over all scored files. Results are reduced
    in manifest order, so the output does not depend on ``jobs``.
    """
    manifest.validate()
    manifest.output_dir.mkdir(parents=True, exist_ok=True)
    jobs = jobs or manifest.jobs
    names = _output_names(manifest)

    if jobs > 1 and len(names) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as ex:
            futures = [ex.submit(_process, manifest, i, n) for i, n in enumerate(names)]
            results = [f.result() for f in futures]
    else:
        results = [_process(manifest, i, n) for i, n in enumerate(names)]

    condition = manifest.condition_label
    scored = [r.pairs for r in results if r.pairs is not None]
    aggregate = report(pool(scored)) if scored else None
    rows = [(r.name, condition, r.report) for r in results]
    rows.append((AGGREGATE_NAME, condition, aggregate))
    metrics_path = manifest.output_dir / "metrics.csv"
    io.write_metrics(rows, metrics_path)

    out = BatchResult(results, condition, aggregate, metrics_path)
    logger.info("batch finished: %d files, %d failed", len(results), out.n_failed)
    return out
