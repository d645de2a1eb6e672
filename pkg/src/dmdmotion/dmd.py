"""Low-rank dynamic mode decomposition of video snapshot matrices.

A snapshot matrix holds consecutive grayscale frames as columns. The one-step
linear operator relating each frame to the next is reduced onto the leading
left singular subspace of the left snapshot sequence; its eigendecomposition
yields spatial modes, eigenvalues describing each mode's temporal evolution,
and complex amplitudes fitted to an anchor frame by least squares.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateDataError
from .linalg import SketchConfig, SvdFactors, deterministic_svd, eig, least_squares, rsvd

__all__ = [
    "SnapshotMatrix",
    "DmdDecomposition",
    "FIRST_FRAME",
    "MEDIAN_FRAME",
    "split_snapshots",
    "effective_rank",
    "reduced_operator",
    "dmd_modes",
    "projected_dmd_modes",
    "dmd_amplitudes",
    "amplitudes_per_span",
    "vandermonde",
    "rdmd",
    "deterministic_dmd",
    "reconstruct",
]

# Anchor frame selectors for the amplitude fit. An integer anchor addresses an
# explicit frame of the left sequence.
FIRST_FRAME = "first"
MEDIAN_FRAME = "median"

# Relative cutoff below which singular values are treated as zero when the
# pseudo-inverse is formed. Near-singular chunks (static scenes) would blow up
# otherwise.
PINV_RCOND = 1e-12


@dataclass(frozen=True)
class SnapshotMatrix:
    """m x n matrix of n consecutive frames, each flattened row-major.

    Intensities are normalized to [0, 1] at ingestion so tolerances are
    scale-free. dt is the frame spacing in seconds (1.0 for standard video).
    """

    data: np.ndarray
    frame_height: int
    frame_width: int
    dt: float = 1.0

    def __post_init__(self) -> None:
        data = np.asarray(self.data, dtype=np.float64)
        object.__setattr__(self, "data", data)
        if data.ndim != 2:
            raise ValueError("snapshot data must be 2-dimensional")
        m, n = data.shape
        if n < 2:
            raise ValueError(f"need at least 2 frames, got {n}")
        if self.frame_height * self.frame_width != m:
            raise ValueError(
                f"frame geometry {self.frame_height}x{self.frame_width} "
                f"does not match {m} pixels"
            )
        if not np.all(np.isfinite(data)):
            raise ValueError("snapshot data contains non-finite entries")
        if data.min() < 0.0 or data.max() > 1.0:
            raise ValueError("snapshot intensities must lie in [0, 1]")
        if self.dt <= 0.0:
            raise ValueError(f"dt must be positive, got {self.dt}")

    @property
    def n_pixels(self) -> int:
        return self.data.shape[0]

    @property
    def n_frames(self) -> int:
        return self.data.shape[1]

    def frame(self, t: int) -> np.ndarray:
        """Frame t as a (height, width) image."""
        return self.data[:, t].reshape(self.frame_height, self.frame_width)


@dataclass(frozen=True)
class DmdDecomposition:
    """Modes, eigenvalues and amplitudes of a fitted decomposition.

    modes: (m, k) complex spatial modes, one column per eigenvalue.
    eigenvalues: (k,) complex, ordered background-first (ascending |log|).
    amplitudes: (k,) complex weights fitted to the anchor frame.
    amplitude_spans: optional ((start, stop, b), ...) when amplitudes were
        refitted per sub-span of the sequence; span-local time starts at 0.
    """

    modes: np.ndarray
    eigenvalues: np.ndarray
    amplitudes: np.ndarray
    n_frames: int
    dt: float
    frame_height: int
    frame_width: int
    anchor: str | int = MEDIAN_FRAME
    seed: int = 0
    amplitude_spans: tuple[tuple[int, int, np.ndarray], ...] | None = None

    def __post_init__(self) -> None:
        k = self.eigenvalues.shape[0]
        if k < 1:
            raise ValueError("decomposition must retain at least one mode")
        if self.modes.shape != (self.modes.shape[0], k) or self.amplitudes.shape != (k,):
            raise ValueError("mode/eigenvalue/amplitude shapes are inconsistent")
        if not np.all(np.isfinite(self.modes)):
            raise ValueError("modes contain non-finite entries")

    @property
    def rank(self) -> int:
        return self.eigenvalues.shape[0]

    @property
    def n_pixels(self) -> int:
        return self.modes.shape[0]


def split_snapshots(D: SnapshotMatrix) -> tuple[np.ndarray, np.ndarray]:
    """Left and right snapshot sequences: columns 0..n-2 and 1..n-1 of D."""
    X = D.data[:, :-1]
    Y = D.data[:, 1:]
    return X, Y


def effective_rank(singular_values: np.ndarray, rcond: float = PINV_RCOND) -> int:
    """Number of singular values kept by the pseudo-inverse cutoff."""
    s = np.asarray(singular_values, dtype=np.float64)
    if s.size == 0 or s[0] <= 0.0:
        raise DegenerateDataError("all singular values are zero; data has no signal")
    return int(np.count_nonzero(s > rcond * s[0]))


def reduced_operator(factors: SvdFactors, Y: np.ndarray, rcond: float = PINV_RCOND) -> np.ndarray:
    """One-step operator projected onto the retained left singular subspace.

    Computes U^T Y V diag(s)^-1, truncating the factors to the effective rank
    first so near-zero singular values never enter the inversion.
    """
    r = effective_rank(factors.singular_values, rcond)
    U = factors.U[:, :r]
    V = factors.V[:, :r]
    s = factors.singular_values[:r]
    if Y.shape[0] != U.shape[0] or Y.shape[1] != V.shape[0]:
        raise ValueError(
            f"Y shape {Y.shape} inconsistent with factors "
            f"({U.shape[0]} pixels, {V.shape[0]} frames)"
        )
    return (U.T @ Y @ V) / s


def dmd_modes(Y: np.ndarray, V: np.ndarray, singular_values: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Exact spatial modes Y V diag(s)^-1 W, one column per eigenvector.

    Columns keep the scale this product produces; no renormalization.
    """
    if Y.shape[1] != V.shape[0] or V.shape[1] != singular_values.shape[0]:
        raise ValueError("Y/V/singular_values shapes are inconsistent")
    if W.shape[0] != singular_values.shape[0]:
        raise ValueError("eigenvector matrix does not match the retained rank")
    return (Y @ V / singular_values) @ W


def projected_dmd_modes(U: np.ndarray, W: np.ndarray) -> np.ndarray:
    """Projected-mode variant U W; cheaper, confined to the sketch subspace."""
    if U.shape[1] != W.shape[0]:
        raise ValueError("U and W shapes are inconsistent")
    return U.astype(np.complex128) @ W


def _anchor_frame(D: SnapshotMatrix, anchor: str | int) -> np.ndarray:
    X = D.data[:, :-1]
    if anchor == FIRST_FRAME:
        return X[:, 0]
    if anchor == MEDIAN_FRAME:
        return np.median(X, axis=1)
    if isinstance(anchor, (int, np.integer)):
        idx = int(anchor)
        if not 0 <= idx < X.shape[1]:
            raise ValueError(f"anchor frame {idx} outside [0, {X.shape[1]})")
        return X[:, idx]
    raise ValueError(f"unknown amplitude anchor {anchor!r}")


def dmd_amplitudes(Phi: np.ndarray, D: SnapshotMatrix, anchor: str | int = MEDIAN_FRAME) -> np.ndarray:
    """Least-squares amplitudes b with Phi b fitting the anchor frame.

    The median anchor uses the per-pixel median over the left sequence; it is
    markedly more robust than the first frame when foreground objects are
    present from the start. Degenerate Phi yields the minimum-norm fit.
    """
    if Phi.shape[0] != D.n_pixels:
        raise ValueError("mode matrix does not match the snapshot pixel count")
    return least_squares(Phi, _anchor_frame(D, anchor).astype(np.complex128))


def amplitudes_per_span(
    Phi: np.ndarray,
    D: SnapshotMatrix,
    anchor: str | int,
    span_length: int,
) -> tuple[tuple[int, int, np.ndarray], ...]:
    """Refit amplitudes on fixed-length sub-spans of the sequence.

    Each span is treated with its own time origin, so within [start, stop)
    the frame at global time t is modeled as Phi (b * lam**(t - start)).
    Helps with sudden illumination changes; the default pipeline fits one
    amplitude vector for the whole sequence instead.
    """
    if span_length < 2:
        raise ValueError(f"span_length must be >= 2, got {span_length}")
    n = D.n_frames
    spans = []
    for start in range(0, n, span_length):
        stop = min(start + span_length, n)
        if stop - start < 2 and spans:
            prev_start, _, _ = spans.pop()
            start = prev_start
        sub = SnapshotMatrix(
            D.data[:, start:stop],
            frame_height=D.frame_height,
            frame_width=D.frame_width,
            dt=D.dt,
        )
        b = dmd_amplitudes(Phi, sub, anchor)
        spans.append((start, stop, b))
    return tuple(spans)


def vandermonde(eigenvalues: np.ndarray, n: int) -> np.ndarray:
    """(k, n) matrix of eigenvalue powers: entry (i, t) = lam_i ** t."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    lam = np.asarray(eigenvalues, dtype=np.complex128)
    return np.vander(lam, n, increasing=True)


def _background_first_order(lam: np.ndarray) -> np.ndarray:
    # Sort ascending by |log lam| so quasi-static modes come first; zero
    # eigenvalues (log undefined) sort last. Ties, conjugate pairs included,
    # break by ascending imaginary part so ordering is deterministic.
    with np.errstate(divide="ignore", invalid="ignore"):
        key = np.abs(np.log(lam))
    key = np.where(np.isfinite(key), key, np.inf)
    return np.lexsort((lam.imag, key))


def _decompose(
    D: SnapshotMatrix,
    factors: SvdFactors,
    anchor: str | int,
    seed: int,
    amplitude_span: int | None,
) -> DmdDecomposition:
    _, Y = split_snapshots(D)
    r = effective_rank(factors.singular_values)
    factors = factors.truncate(r)
    M_tilde = reduced_operator(factors, Y)
    W, lam = eig(M_tilde)
    order = _background_first_order(lam)
    lam = lam[order]
    W = W[:, order]
    Phi = dmd_modes(Y, factors.V, factors.singular_values, W)
    b = dmd_amplitudes(Phi, D, anchor)
    spans = None
    if amplitude_span is not None:
        spans = amplitudes_per_span(Phi, D, anchor, amplitude_span)
    return DmdDecomposition(
        modes=Phi,
        eigenvalues=lam,
        amplitudes=b,
        n_frames=D.n_frames,
        dt=D.dt,
        frame_height=D.frame_height,
        frame_width=D.frame_width,
        anchor=anchor,
        seed=seed,
        amplitude_spans=spans,
    )


def rdmd(
    D: SnapshotMatrix,
    cfg: SketchConfig,
    anchor: str | int = MEDIAN_FRAME,
    amplitude_span: int | None = None,
) -> DmdDecomposition:
    """Randomized decomposition: sketched SVD of the left sequence feeds the fit.

    Deterministic for a fixed cfg.seed. The retained rank can fall below
    cfg.rank when trailing singular values are negligible (static scenes).
    """
    X, _ = split_snapshots(D)
    cfg.validate_for_shape(*X.shape)
    factors = rsvd(X, cfg)
    return _decompose(D, factors, anchor, cfg.seed, amplitude_span)


def deterministic_dmd(
    D: SnapshotMatrix,
    rank: int,
    anchor: str | int = MEDIAN_FRAME,
    amplitude_span: int | None = None,
) -> DmdDecomposition:
    """Reference decomposition using the deterministic SVD; the rdmd oracle."""
    X, _ = split_snapshots(D)
    factors = deterministic_svd(X, rank)
    return _decompose(D, factors, anchor, seed=0, amplitude_span=amplitude_span)


def reconstruct(
    dec: DmdDecomposition,
    mode_indices=None,
    t_range=None,
) -> np.ndarray:
    """Sum of b_i phi_i lam_i**t over the selected modes and times.

    mode_indices None means all modes; an empty selection returns zeros.
    t_range defaults to every frame of the source sequence. The full index
    set over all frames reproduces the retained-rank approximation of D.
    """
    if mode_indices is None:
        idx = np.arange(dec.rank)
    else:
        idx = np.unique(np.asarray(list(mode_indices), dtype=np.intp))
        if idx.size and (idx.min() < 0 or idx.max() >= dec.rank):
            raise ValueError(f"mode indices outside [0, {dec.rank})")
    if t_range is None:
        t_range = range(dec.n_frames)
    times = np.asarray(list(t_range), dtype=np.int64)
    if times.size and (times.min() < 0 or times.max() >= dec.n_frames):
        raise ValueError(f"time indices outside [0, {dec.n_frames})")
    out = np.zeros((dec.n_pixels, times.size), dtype=np.complex128)
    if idx.size == 0 or times.size == 0:
        return out
    if dec.amplitude_spans is None:
        temporal = dec.amplitudes[idx, None] * dec.eigenvalues[idx, None] ** times[None, :]
        return dec.modes[:, idx] @ temporal
    for start, stop, b in dec.amplitude_spans:
        cols = np.nonzero((times >= start) & (times < stop))[0]
        if cols.size == 0:
            continue
        local_t = times[cols] - start
        temporal = b[idx, None] * dec.eigenvalues[idx, None] ** local_t[None, :]
        out[:, cols] = dec.modes[:, idx] @ temporal
    return out
