"""Command-line front end.

Subcommands: synth generates a labeled test video, decompose fits and stores
a decomposition of a frame sequence, bgsub runs the full detection pipeline,
eval scores masks against ground truth, svd benchmarks the two SVD paths.

Exit codes group failures by kind: 2 invalid arguments or configuration,
3 degenerate input data, 4 file-system problems, 5 numerical failures.
"""

from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from . import evaluation as ev
from .background import fourier_modes
from .dmd import rdmd
from .errors import DegenerateDataError
from .io_formats import (
    load_frames,
    load_masks,
    save_decomposition,
    save_frames,
    save_masks,
)
from .linalg import SketchConfig
from .pipeline import RunConfig, benchmark_svd, render_report, run_bgsub, write_benchmark_csv
from .synthetic import MovingRect, SyntheticSpec, generate_synthetic

__all__ = ["main"]

EXIT_BAD_ARGS = 2
EXIT_DEGENERATE = 3
EXIT_IO = 4
EXIT_NUMERIC = 5


def _parse_anchor(value: str):
    if value in ("first", "median"):
        return value
    try:
        return int(value)
    except ValueError:
        raise argparse.ArgumentTypeError(
            f"anchor must be 'first', 'median' or a frame index, got {value!r}"
        )


def _parse_shape(value: str) -> tuple[int, int]:
    try:
        m, n = value.lower().split("x")
        return int(m), int(n)
    except ValueError:
        raise argparse.ArgumentTypeError(f"shape must look like 2000x500, got {value!r}")


def _parse_int_list(value: str) -> list[int]:
    try:
        return [int(v) for v in value.split(",") if v]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {value!r}")


def _parse_rect(value: str) -> MovingRect:
    parts = value.split(",")
    if len(parts) != 7:
        raise argparse.ArgumentTypeError(
            "rect format: top,left,height,width,intensity,vy,vx"
        )
    try:
        top, left = float(parts[0]), float(parts[1])
        height, width = int(parts[2]), int(parts[3])
        intensity, vy, vx = (float(v) for v in parts[4:])
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad rect {value!r}")
    return MovingRect(top, left, height, width, intensity, (vy, vx))


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dmdmotion",
        description="Motion detection in fixed-camera video via low-rank spectral decomposition.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    synth = sub.add_parser("synth", help="generate a synthetic video plus ground truth")
    synth.add_argument("--out", required=True, help="output directory")
    synth.add_argument("--height", type=int, default=64)
    synth.add_argument("--width", type=int, default=64)
    synth.add_argument("--frames", type=int, default=200)
    synth.add_argument("--base-level", type=float, default=0.5)
    synth.add_argument("--noise", type=float, default=0.0, help="Gaussian sigma")
    synth.add_argument("--texture-amplitude", type=float, default=0.0)
    synth.add_argument("--texture-period", type=float, default=0.0)
    synth.add_argument(
        "--rect",
        action="append",
        type=_parse_rect,
        default=[],
        help="top,left,height,width,intensity,vy,vx (repeatable)",
    )
    synth.add_argument("--seed", type=int, required=True)
    synth.set_defaults(func=_cmd_synth)

    dec = sub.add_parser("decompose", help="fit a decomposition of a frame sequence")
    dec.add_argument("--frames", required=True, help="glob of PGM frames")
    dec.add_argument("--out", required=True, help="output directory")
    dec.add_argument("--k", type=int, default=11)
    dec.add_argument("--p", type=int, default=2)
    dec.add_argument("--q", type=int, default=1)
    dec.add_argument("--anchor", type=_parse_anchor, default="median")
    dec.add_argument("--seed", type=int, required=True)
    dec.set_defaults(func=_cmd_decompose)

    bgsub = sub.add_parser("bgsub", help="full background-subtraction pipeline")
    bgsub.add_argument("--frames", required=True, help="glob of PGM frames")
    bgsub.add_argument("--truth", help="glob of ground-truth mask PGMs")
    bgsub.add_argument("--out", required=True, help="output directory")
    bgsub.add_argument("--chunk-length", type=int, default=200)
    bgsub.add_argument("--k", type=int, default=11)
    bgsub.add_argument("--p", type=int, default=2)
    bgsub.add_argument("--q", type=int, default=1)
    bgsub.add_argument("--n-background", type=int, default=3)
    bgsub.add_argument("--anchor", type=_parse_anchor, default="median")
    bgsub.add_argument("--tau", type=float, help="fixed threshold; omit to sweep (needs --truth)")
    bgsub.add_argument("--sweep-size", type=int, default=51)
    bgsub.add_argument("--median-kernel", type=int, default=3)
    bgsub.add_argument("--save-residuals", action="store_true")
    bgsub.add_argument("--seed", type=int, required=True)
    bgsub.set_defaults(func=_cmd_bgsub)

    ev_p = sub.add_parser("eval", help="score masks against ground truth")
    ev_p.add_argument("--masks", required=True, help="glob of predicted mask PGMs")
    ev_p.add_argument("--truth", required=True, help="glob of ground-truth mask PGMs")
    ev_p.add_argument("--out", help="metrics CSV path")
    ev_p.set_defaults(func=_cmd_eval)

    svd = sub.add_parser("svd", help="benchmark deterministic vs randomized SVD")
    svd.add_argument("--shapes", type=_parse_shape, nargs="+", default=[(2000, 500)])
    svd.add_argument("--ranks", type=_parse_int_list, default=[20])
    svd.add_argument("--qs", type=_parse_int_list, default=[0, 1, 2])
    svd.add_argument("--repeats", type=int, default=5)
    svd.add_argument("--out", required=True, help="CSV path")
    svd.add_argument("--seeds", type=_parse_int_list, required=True)
    svd.set_defaults(func=_cmd_svd)
    return parser


def _cmd_synth(args) -> int:
    spec = SyntheticSpec(
        frame_height=args.height,
        frame_width=args.width,
        n_frames=args.frames,
        base_level=args.base_level,
        texture_amplitude=args.texture_amplitude,
        texture_period=args.texture_period,
        noise_sigma=args.noise,
        objects=tuple(args.rect),
        seed=args.seed,
    )
    D, truth = generate_synthetic(spec)
    frame_paths = save_frames(os.path.join(args.out, "frames"), D)
    mask_paths = save_masks(os.path.join(args.out, "truth"), truth)
    print(f"wrote {len(frame_paths)} frames and {len(mask_paths)} truth masks to {args.out}")
    return 0


def _cmd_decompose(args) -> int:
    D = load_frames(args.frames)
    cfg = SketchConfig(rank=args.k, oversampling=args.p, subspace_iters=args.q, seed=args.seed)
    dec = rdmd(D, cfg, anchor=args.anchor)
    save_decomposition(args.out, dec)
    fm = fourier_modes(dec)
    print(f"decomposition of {D.n_frames} frames, retained rank {dec.rank}")
    print("idx  eigenvalue                     |lambda|   |omega|")
    for j, (lam, om) in enumerate(zip(dec.eigenvalues, fm.omega)):
        om_text = "excluded" if not np.isfinite(om) else f"{abs(om):.6f}"
        print(f"{j:<4d} {lam.real:+.6f}{lam.imag:+.6f}j    {abs(lam):.6f}   {om_text}")
    return 0


def _cmd_bgsub(args) -> int:
    cfg = RunConfig(
        frames=args.frames,
        truth=args.truth,
        chunk_length=args.chunk_length,
        k=args.k,
        p=args.p,
        q=args.q,
        seed=args.seed,
        n_background=args.n_background,
        anchor=args.anchor,
        tau=args.tau,
        sweep_size=args.sweep_size,
        median_kernel=args.median_kernel,
        output_dir=args.out,
        save_residuals=args.save_residuals,
    )
    report = run_bgsub(cfg)
    sys.stdout.write(render_report(report))
    failed = [c for c in report.chunks if not c.ok]
    if len(failed) == len(report.chunks):
        raise DegenerateDataError("every chunk failed; see the report for diagnostics")
    return 0


def _cmd_eval(args) -> int:
    predicted = load_masks(args.masks)
    truth = load_masks(args.truth)
    c = ev.confusion(predicted, truth)
    rates = ev.evaluate_masks(predicted, truth)
    print(
        f"tp={c.tp} fp={c.fp} tn={c.tn} fn={c.fn} "
        f"recall={rates['recall']:.6f} precision={rates['precision']:.6f} "
        f"specificity={rates['specificity']:.6f} f_measure={rates['f_measure']:.6f}"
    )
    if rates["undefined_rates"]:
        print("note: at least one rate had a zero denominator and was reported as 0")
    if args.out:
        ev.write_metrics_csv(args.out, [ev.metrics_row(float("nan"), c)])
    return 0


def _cmd_svd(args) -> int:
    rows = benchmark_svd(args.shapes, args.ranks, args.seeds, qs=args.qs, repeats=args.repeats)
    write_benchmark_csv(args.out, rows)
    print(f"wrote {len(rows)} benchmark rows to {args.out}")
    for r in rows:
        print(
            f"{r.rows}x{r.cols} k={r.k} q={r.q}: deterministic {r.deterministic_seconds:.4f}s "
            f"(err {r.deterministic_error:.2e}), randomized {r.randomized_seconds:.4f}s "
            f"(err {r.randomized_error:.2e})"
        )
    return 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except DegenerateDataError as exc:
        print(f"error (degenerate data): {exc}", file=sys.stderr)
        return EXIT_DEGENERATE
    except np.linalg.LinAlgError as exc:
        print(f"error (numerical): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except ValueError as exc:
        print(f"error (invalid input): {exc}", file=sys.stderr)
        return EXIT_BAD_ARGS
    except OSError as exc:
        print(f"error (file system): {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
