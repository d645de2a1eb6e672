"""Background model, residuals and foreground masks from a decomposition.

Each eigenvalue maps to a continuous-time frequency via the principal complex
logarithm; modes whose frequency modulus is near zero evolve slowly and model
the background. The background video is the mode-subset reconstruction, the
residual is the per-pixel distance to it, and masks come from thresholding
the residual, optionally cleaned with a majority (median) filter.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.ndimage

from .dmd import DmdDecomposition, reconstruct
from .dmd import SnapshotMatrix
from .errors import DegenerateDataError

__all__ = [
    "FourierModes",
    "ModePartition",
    "ResidualSequence",
    "ForegroundMaskSequence",
    "fourier_modes",
    "partition_modes",
    "partition_modes_by_threshold",
    "background_model",
    "residual",
    "threshold_mask",
    "median_filter",
    "filter_masks",
]

# Eigenvalues below this magnitude have no usable logarithm; the modes they
# describe are one-step transients and never enter the background set.
ZERO_EIGENVALUE_CUTOFF = 1e-12

# Two frequency moduli within this relative tolerance are treated as tied, so
# conjugate pairs are selected or rejected together.
_TIE_RTOL = 1e-9


@dataclass(frozen=True)
class FourierModes:
    """Continuous-time frequencies of each mode, units 1/dt.

    excluded marks modes with near-zero eigenvalues, whose frequency is
    undefined; they belong to neither background nor foreground.
    """

    omega: np.ndarray
    excluded: np.ndarray

    def __post_init__(self) -> None:
        if self.omega.shape != self.excluded.shape:
            raise ValueError("omega and excluded must have matching shapes")
        if np.any(~np.isfinite(self.omega) & ~self.excluded):
            raise ValueError("non-excluded frequencies must be finite")

    @property
    def usable_indices(self) -> np.ndarray:
        return np.nonzero(~self.excluded)[0]


@dataclass(frozen=True)
class ModePartition:
    background_indices: tuple[int, ...]
    foreground_indices: tuple[int, ...]

    def __post_init__(self) -> None:
        if set(self.background_indices) & set(self.foreground_indices):
            raise ValueError("background and foreground sets overlap")


@dataclass(frozen=True)
class ResidualSequence:
    """Per-pixel nonnegative residual magnitudes, one column per frame."""

    values: np.ndarray
    frame_height: int
    frame_width: int

    def __post_init__(self) -> None:
        if self.values.ndim != 2:
            raise ValueError("residual values must be 2-dimensional")
        if self.values.shape[0] != self.frame_height * self.frame_width:
            raise ValueError("residual geometry does not match pixel count")
        if not np.all(np.isfinite(self.values)) or self.values.min() < 0.0:
            raise ValueError("residuals must be finite and nonnegative")

    @property
    def n_frames(self) -> int:
        return self.values.shape[1]

    def frame(self, t: int) -> np.ndarray:
        return self.values[:, t].reshape(self.frame_height, self.frame_width)


@dataclass(frozen=True)
class ForegroundMaskSequence:
    """Binary masks, shape (n_frames, height, width); tau is the threshold used.

    tau is None for ground-truth masks that were not produced by thresholding.
    """

    masks: np.ndarray
    tau: float | None = None

    def __post_init__(self) -> None:
        masks = np.asarray(self.masks, dtype=bool)
        object.__setattr__(self, "masks", masks)
        if masks.ndim != 3:
            raise ValueError("masks must have shape (n_frames, height, width)")

    @property
    def n_frames(self) -> int:
        return self.masks.shape[0]

    @property
    def frame_shape(self) -> tuple[int, int]:
        return self.masks.shape[1], self.masks.shape[2]


def fourier_modes(dec: DmdDecomposition) -> FourierModes:
    """Principal-branch frequencies log(lam)/dt, with zero-eigenvalue modes excluded."""
    lam = dec.eigenvalues
    excluded = np.abs(lam) < ZERO_EIGENVALUE_CUTOFF
    with np.errstate(divide="ignore", invalid="ignore"):
        omega = np.log(lam) / dec.dt
    omega = np.where(excluded, np.inf + 0j, omega)
    return FourierModes(omega=omega, excluded=excluded)


def _split_by_background(fm: FourierModes, background: np.ndarray) -> ModePartition:
    usable = fm.usable_indices
    bg = set(int(i) for i in background)
    fg = tuple(int(i) for i in usable if int(i) not in bg)
    return ModePartition(tuple(sorted(bg)), fg)


def partition_modes(fm: FourierModes, n_background: int) -> ModePartition:
    """Background = the n_background usable modes of smallest frequency modulus.

    Ordering ties break by ascending index. When the cut would separate modes
    of equal modulus (a complex-conjugate pair), the whole tied group is kept,
    so the background can exceed n_background rather than split a pair.
    """
    usable = fm.usable_indices
    if usable.size == 0:
        raise DegenerateDataError("no usable modes: every eigenvalue is near zero")
    if not 1 <= n_background <= usable.size:
        raise ValueError(
            f"n_background={n_background} outside [1, {usable.size} usable modes]"
        )
    mod = np.abs(fm.omega[usable])
    order = np.lexsort((usable, mod))
    ranked = usable[order]
    ranked_mod = mod[order]
    cut = n_background
    while cut < ranked.size and np.isclose(
        ranked_mod[cut], ranked_mod[cut - 1], rtol=_TIE_RTOL, atol=0.0
    ):
        cut += 1
    return _split_by_background(fm, ranked[:cut])


def partition_modes_by_threshold(fm: FourierModes, omega_max: float) -> ModePartition:
    """Background = every usable mode with frequency modulus below omega_max."""
    usable = fm.usable_indices
    if usable.size == 0:
        raise DegenerateDataError("no usable modes: every eigenvalue is near zero")
    if omega_max < 0:
        raise ValueError(f"omega_max must be nonnegative, got {omega_max}")
    background = usable[np.abs(fm.omega[usable]) < omega_max]
    return _split_by_background(fm, background)


def background_model(dec: DmdDecomposition, part: ModePartition) -> np.ndarray:
    """Complex background video: the background-mode reconstruction over all frames."""
    if part.background_indices and max(part.background_indices) >= dec.rank:
        raise ValueError("partition refers to modes outside the decomposition")
    return reconstruct(dec, part.background_indices)


def residual(D: SnapshotMatrix, L: np.ndarray) -> ResidualSequence:
    """Per-pixel distance |d - Re(l)|; the imaginary part of L is discarded."""
    if L.shape != D.data.shape:
        raise ValueError(f"background shape {L.shape} does not match video {D.data.shape}")
    values = np.abs(D.data - L.real)
    return ResidualSequence(values, D.frame_height, D.frame_width)


def threshold_mask(S: ResidualSequence, tau: float) -> ForegroundMaskSequence:
    """Foreground where the residual strictly exceeds tau."""
    if tau < 0:
        raise ValueError(f"tau must be nonnegative, got {tau}")
    masks = (S.values > tau).T.reshape(S.n_frames, S.frame_height, S.frame_width)
    return ForegroundMaskSequence(masks=masks, tau=float(tau))


def median_filter(mask: np.ndarray, kernel: int = 3) -> np.ndarray:
    """Majority vote in each kernel x kernel neighborhood of a binary frame.

    Borders replicate the edge pixel; kernel 1 is the identity.
    """
    if kernel < 1 or kernel % 2 == 0:
        raise ValueError(f"kernel must be odd and >= 1, got {kernel}")
    mask = np.asarray(mask, dtype=bool)
    if mask.ndim != 2:
        raise ValueError("median_filter expects a single 2-d mask frame")
    if kernel == 1:
        return mask.copy()
    filtered = scipy.ndimage.median_filter(
        mask.astype(np.uint8), size=kernel, mode="nearest"
    )
    return filtered.astype(bool)


def filter_masks(seq: ForegroundMaskSequence, kernel: int = 3) -> ForegroundMaskSequence:
    """Median-filter every frame of a mask sequence."""
    if kernel == 1:
        return seq
    filtered = np.stack([median_filter(frame, kernel) for frame in seq.masks])
    return ForegroundMaskSequence(masks=filtered, tau=seq.tau)
