"""End-to-end background subtraction runs and the SVD benchmark harness.

A run splits the input video into chunks, decomposes each chunk on its own
(seeded independently, so chunk results do not depend on processing order),
models the background per chunk, and assembles masks 1:1 with the input
frames. A chunk that fails records its diagnostic and contributes empty
masks; the other chunks proceed.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, replace

import numpy as np

from . import background as bg
from . import evaluation as ev
from .dmd import MEDIAN_FRAME, DmdDecomposition, SnapshotMatrix, rdmd
from .errors import DegenerateDataError
from .linalg import SketchConfig, deterministic_svd, rsvd
from .synthetic import SyntheticSpec, decaying_spectrum_matrix, generate_synthetic

__all__ = [
    "RunConfig",
    "ChunkResult",
    "RunReport",
    "chunk_bounds",
    "run_bgsub",
    "render_report",
    "BenchmarkRow",
    "benchmark_svd",
    "write_benchmark_csv",
]


@dataclass(frozen=True)
class RunConfig:
    """Everything a background-subtraction run needs.

    Exactly one of frames (a PGM glob pattern) and synthetic must be set.
    tau fixes the threshold; leaving it None sweeps sweep_size thresholds,
    which requires ground truth to pick the best one.
    """

    frames: str | None = None
    synthetic: SyntheticSpec | None = None
    truth: str | None = None
    chunk_length: int = 200
    k: int = 11
    p: int = 2
    q: int = 1
    seed: int = 0
    n_background: int = 3
    anchor: str | int = MEDIAN_FRAME
    tau: float | None = None
    sweep_size: int = 51
    median_kernel: int = 3
    output_dir: str | None = None
    save_residuals: bool = False

    def __post_init__(self) -> None:
        if (self.frames is None) == (self.synthetic is None):
            raise ValueError("exactly one of frames and synthetic must be given")
        if self.chunk_length < 2:
            raise ValueError(f"chunk_length must be >= 2, got {self.chunk_length}")
        if self.k < 1 or self.p < 0 or self.q < 0:
            raise ValueError("need k >= 1, p >= 0, q >= 0")
        if self.k + self.p > self.chunk_length - 1:
            raise ValueError(
                f"k+p = {self.k + self.p} exceeds chunk_length-1 = {self.chunk_length - 1}"
            )
        if self.n_background < 1:
            raise ValueError("n_background must be >= 1")
        if self.tau is not None and self.tau < 0:
            raise ValueError("tau must be nonnegative")
        if self.sweep_size < 2:
            raise ValueError("sweep_size must be >= 2")
        if self.median_kernel < 1 or self.median_kernel % 2 == 0:
            raise ValueError("median_kernel must be odd and >= 1")

    @property
    def min_chunk_frames(self) -> int:
        # A chunk of n frames exposes n-1 snapshot pairs; the sketch needs k+p.
        return self.k + self.p + 1


@dataclass(frozen=True)
class ChunkResult:
    index: int
    start: int
    stop: int
    seed: int
    retained_rank: int | None = None
    eigenvalues: np.ndarray | None = None
    omega: np.ndarray | None = None
    background_indices: tuple[int, ...] | None = None
    error: str | None = None
    decompose_seconds: float = 0.0
    mask_seconds: float = 0.0

    @property
    def ok(self) -> bool:
        return self.error is None


@dataclass(frozen=True)
class RunReport:
    config: RunConfig
    frame_height: int
    frame_width: int
    n_frames: int
    chunks: tuple[ChunkResult, ...]
    tau: float | None
    masks: bg.ForegroundMaskSequence | None
    summary: dict[str, float] | None
    total_seconds: float


def chunk_bounds(n_frames: int, chunk_length: int, min_frames: int) -> list[tuple[int, int]]:
    """[start, stop) per chunk; a too-short tail merges into the previous chunk."""
    if n_frames < min_frames:
        raise ValueError(f"{n_frames} frames, but a chunk needs at least {min_frames}")
    bounds = [
        (s, min(s + chunk_length, n_frames)) for s in range(0, n_frames, chunk_length)
    ]
    if len(bounds) > 1 and bounds[-1][1] - bounds[-1][0] < min_frames:
        _, stop = bounds.pop()
        start, _ = bounds.pop()
        bounds.append((start, stop))
    return bounds


def _load_input(cfg: RunConfig) -> tuple[SnapshotMatrix, bg.ForegroundMaskSequence | None]:
    if cfg.synthetic is not None:
        return generate_synthetic(cfg.synthetic)
    from .io_formats import load_frames, load_masks

    D = load_frames(cfg.frames)
    truth = load_masks(cfg.truth) if cfg.truth is not None else None
    return D, truth


def _chunk_decomposition(
    D: SnapshotMatrix, cfg: RunConfig, index: int, start: int, stop: int
) -> tuple[DmdDecomposition, bg.ModePartition, bg.ResidualSequence]:
    sub = SnapshotMatrix(
        D.data[:, start:stop],
        frame_height=D.frame_height,
        frame_width=D.frame_width,
        dt=D.dt,
    )
    sketch = SketchConfig(
        rank=cfg.k,
        oversampling=cfg.p,
        subspace_iters=cfg.q,
        seed=cfg.seed + index,
    )
    dec = rdmd(sub, sketch, anchor=cfg.anchor)
    fm = bg.fourier_modes(dec)
    # A near-static chunk can retain fewer usable modes than requested; take
    # what is there rather than failing the chunk.
    n_bg = min(cfg.n_background, fm.usable_indices.size)
    if n_bg == 0:
        raise DegenerateDataError("chunk has no usable modes")
    part = bg.partition_modes(fm, n_bg)
    L = bg.background_model(dec, part)
    S = bg.residual(sub, L)
    return dec, part, S


def run_bgsub(cfg: RunConfig) -> RunReport:
    """Decompose, model, threshold and evaluate; see the module docstring."""
    t_run = time.perf_counter()
    D, truth = _load_input(cfg)
    bounds = chunk_bounds(D.n_frames, cfg.chunk_length, cfg.min_chunk_frames)

    chunks: list[ChunkResult] = []
    residuals: dict[int, bg.ResidualSequence] = {}
    decomposition_store: dict[int, DmdDecomposition] = {}
    for i, (start, stop) in enumerate(bounds):
        t0 = time.perf_counter()
        try:
            dec, part, S = _chunk_decomposition(D, cfg, i, start, stop)
        except (ValueError, DegenerateDataError, np.linalg.LinAlgError) as exc:
            chunks.append(
                ChunkResult(
                    index=i,
                    start=start,
                    stop=stop,
                    seed=cfg.seed + i,
                    error=f"{type(exc).__name__}: {exc}",
                    decompose_seconds=time.perf_counter() - t0,
                )
            )
            continue
        residuals[i] = S
        decomposition_store[i] = dec
        fm = bg.fourier_modes(dec)
        chunks.append(
            ChunkResult(
                index=i,
                start=start,
                stop=stop,
                seed=cfg.seed + i,
                retained_rank=dec.rank,
                eigenvalues=dec.eigenvalues,
                omega=fm.omega,
                background_indices=part.background_indices,
                decompose_seconds=time.perf_counter() - t0,
            )
        )

    ok_indices = [i for i in residuals]
    summary: dict[str, float] | None = None
    tau = cfg.tau

    pooled = None
    truth_pool = None
    if ok_indices:
        pooled = bg.ResidualSequence(
            np.concatenate([residuals[i].values for i in ok_indices], axis=1),
            D.frame_height,
            D.frame_width,
        )
        if truth is not None:
            frame_idx = np.concatenate(
                [np.arange(chunks[i].start, chunks[i].stop) for i in ok_indices]
            )
            truth_pool = bg.ForegroundMaskSequence(truth.masks[frame_idx], tau=None)

    if tau is None:
        if pooled is None or truth_pool is None:
            raise ValueError("threshold sweep needs ground truth; pass a fixed tau instead")
        taus = ev.default_taus(pooled, cfg.sweep_size)
        best_tau, best_f = ev.best_f_over_thresholds(pooled, truth_pool, taus)
        filt_tau, filt_f = ev.best_f_over_thresholds(
            pooled, truth_pool, taus, kernel=cfg.median_kernel
        )
        curve = ev.roc_curve(pooled, truth_pool, taus)
        tau = filt_tau if cfg.median_kernel > 1 else best_tau
        summary = {
            "best_tau_raw": best_tau,
            "best_f_raw": best_f,
            "best_tau_filtered": filt_tau,
            "best_f_filtered": filt_f,
            "auc": curve.auc,
        }

    masks = None
    if pooled is not None:
        mask_frames = np.zeros((D.n_frames, D.frame_height, D.frame_width), dtype=bool)
        timed: list[ChunkResult] = []
        for c in chunks:
            if not c.ok:
                timed.append(c)
                continue
            t0 = time.perf_counter()
            chunk_masks = bg.filter_masks(
                bg.threshold_mask(residuals[c.index], tau), cfg.median_kernel
            )
            mask_frames[c.start : c.stop] = chunk_masks.masks
            timed.append(replace(c, mask_seconds=time.perf_counter() - t0))
        chunks = timed
        masks = bg.ForegroundMaskSequence(mask_frames, tau=tau)
        if truth is not None and truth_pool is not None:
            rates = ev.evaluate_masks(
                bg.ForegroundMaskSequence(
                    masks.masks[np.concatenate(
                        [np.arange(c.start, c.stop) for c in chunks if c.ok]
                    )],
                    tau=tau,
                ),
                truth_pool,
            )
            summary = dict(summary or {})
            summary.update(
                {
                    "recall": float(rates["recall"]),
                    "precision": float(rates["precision"]),
                    "specificity": float(rates["specificity"]),
                    "f_measure": float(rates["f_measure"]),
                }
            )

    report = RunReport(
        config=cfg,
        frame_height=D.frame_height,
        frame_width=D.frame_width,
        n_frames=D.n_frames,
        chunks=tuple(chunks),
        tau=tau,
        masks=masks,
        summary=summary,
        total_seconds=time.perf_counter() - t_run,
    )
    if cfg.output_dir is not None:
        _write_outputs(cfg, report, truth_pool, pooled, decomposition_store)
    return report


def _write_outputs(cfg, report, truth_pool, pooled, decomposition_store) -> None:
    import glob as globmod
    import os

    from .io_formats import save_decomposition, save_masks, save_matrix

    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    with open(os.path.join(out, "report.txt"), "w") as fh:
        fh.write(render_report(report))
    with open(os.path.join(out, "timings.csv"), "w") as fh:
        fh.write("chunk,decompose_seconds,mask_seconds\n")
        for c in report.chunks:
            fh.write(f"{c.index},{c.decompose_seconds!r},{c.mask_seconds!r}\n")
        fh.write(f"total,{report.total_seconds!r},0.0\n")
    if report.masks is not None:
        stems = None
        if cfg.frames is not None:
            names = sorted(globmod.glob(cfg.frames))
            if len(names) == report.masks.n_frames:
                stems = [
                    os.path.splitext(os.path.basename(p))[0] + "_mask" for p in names
                ]
        save_masks(os.path.join(out, "masks"), report.masks, stems)
    for i, dec in decomposition_store.items():
        save_decomposition(os.path.join(out, f"chunk_{i:03d}"), dec)
        if cfg.save_residuals:
            save_matrix(os.path.join(out, f"chunk_{i:03d}", "residual.mat"),
                        _residual_for(report, i, pooled))
    if pooled is not None and truth_pool is not None:
        taus = ev.default_taus(pooled, cfg.sweep_size)
        rows = [
            ev.metrics_row(float(t), ev.confusion(bg.threshold_mask(pooled, float(t)), truth_pool))
            for t in taus
        ]
        ev.write_metrics_csv(os.path.join(out, "metrics.csv"), rows)
        # A curve needs both truth classes; metrics rows alone cover the rest.
        if truth_pool.masks.any() and not truth_pool.masks.all():
            ev.write_roc_csv(os.path.join(out, "roc.csv"), ev.roc_curve(pooled, truth_pool, taus))


def _residual_for(report: RunReport, index: int, pooled) -> np.ndarray:
    offset = 0
    for c in report.chunks:
        if not c.ok:
            continue
        width = c.stop - c.start
        if c.index == index:
            return pooled.values[:, offset : offset + width]
        offset += width
    raise KeyError(index)


def render_report(report: RunReport) -> str:
    """Human-readable run description; deterministic (timings live in the CSV)."""
    cfg = report.config
    lines = [
        f"run: {report.n_frames} frames of "
        f"{report.frame_height}x{report.frame_width}, {len(report.chunks)} chunks",
        f"config: k={cfg.k} p={cfg.p} q={cfg.q} chunk_length={cfg.chunk_length} "
        f"n_background={cfg.n_background} anchor={cfg.anchor} "
        f"median_kernel={cfg.median_kernel} seed={cfg.seed}",
        "threshold: " + ("sweep" if cfg.tau is None else repr(cfg.tau))
        + (f" -> tau={report.tau!r}" if report.tau is not None else ""),
        "",
    ]
    for c in report.chunks:
        if not c.ok:
            lines.append(f"chunk {c.index}: frames [{c.start}, {c.stop}) FAILED {c.error}")
            lines.append("")
            continue
        lines.append(
            f"chunk {c.index}: frames [{c.start}, {c.stop}), seed {c.seed}, "
            f"rank {c.retained_rank}, background modes {list(c.background_indices)}"
        )
        lines.append("  idx  eigenvalue                     |lambda|   |omega|    role")
        bg_set = set(c.background_indices)
        for j, (lam, om) in enumerate(zip(c.eigenvalues, c.omega)):
            mod = "excluded" if not np.isfinite(om) else f"{abs(om):.6f}"
            role = "background" if j in bg_set else (
                "excluded" if not np.isfinite(om) else "foreground"
            )
            lines.append(
                f"  {j:<4d} {lam.real:+.6f}{lam.imag:+.6f}j "
                f"   {abs(lam):.6f}   {mod:<9s}  {role}"
            )
        lines.append("")
    if report.summary is not None:
        parts = [f"{k}={v:.6f}" for k, v in sorted(report.summary.items())]
        lines.append("summary: " + " ".join(parts))
        lines.append("")
    return "\n".join(lines)


@dataclass(frozen=True)
class BenchmarkRow:
    rows: int
    cols: int
    k: int
    q: int
    deterministic_seconds: float
    randomized_seconds: float
    deterministic_error: float
    randomized_error: float


def _median_time(fn, repeats: int = 5) -> tuple[float, object]:
    fn()  # warm-up
    times = []
    result = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        result = fn()
        times.append(time.perf_counter() - t0)
    return float(np.median(times)), result


def benchmark_svd(
    shapes: list[tuple[int, int]],
    ranks: list[int],
    seeds: list[int],
    qs: list[int] = (0, 1, 2),
    repeats: int = 5,
) -> list[BenchmarkRow]:
    """Wall-clock and accuracy comparison of the two SVD paths.

    Test matrices have a polynomially decaying spectrum so the error columns
    respond to the power-iteration count. Times are medians of `repeats` runs
    after one warm-up. No speed relation is asserted when k is not small
    against min(m, n); that regime gains nothing from sketching.
    """
    rows = []
    for m, n in shapes:
        spectrum = 1.0 / np.arange(1, min(m, n) + 1) ** 2
        for seed in seeds:
            A, _ = decaying_spectrum_matrix(m, n, spectrum, seed)
            norm = np.linalg.norm(A)
            for k in ranks:
                t_det, det = _median_time(lambda: deterministic_svd(A, k), repeats)
                err_det = np.linalg.norm(A - det.reconstruct()) / norm
                for q in qs:
                    sketch = SketchConfig(rank=k, oversampling=2, subspace_iters=q, seed=seed)
                    t_rnd, rnd = _median_time(lambda: rsvd(A, sketch), repeats)
                    err_rnd = np.linalg.norm(A - rnd.reconstruct()) / norm
                    rows.append(
                        BenchmarkRow(m, n, k, q, t_det, t_rnd, float(err_det), float(err_rnd))
                    )
    return rows


def write_benchmark_csv(path: str, rows: list[BenchmarkRow]) -> None:
    import csv

    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(
            ["rows", "cols", "k", "q", "deterministic_seconds", "randomized_seconds",
             "deterministic_error", "randomized_error"]
        )
        for r in rows:
            writer.writerow(
                [r.rows, r.cols, r.k, r.q, repr(r.deterministic_seconds),
                 repr(r.randomized_seconds), repr(r.deterministic_error),
                 repr(r.randomized_error)]
            )
