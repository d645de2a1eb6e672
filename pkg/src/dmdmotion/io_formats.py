"""Binary matrix containers, PGM frame I/O, and decomposition persistence.

Matrices travel in a minimal binary container: an 8-byte magic tag, row and
column counts as little-endian unsigned 64-bit, then the entries row-major as
little-endian float64. Real data uses the tag RDMDMAT1; complex data uses
RDMDCPX1 with interleaved (real, imag) pairs.

Frames are binary PGM (P5), 8-bit or 16-bit big-endian per the PNM spec,
normalized to [0, 1] by maxval on load. Masks are P5 with values 0/255 only.
"""

from __future__ import annotations

import glob
import os
import struct

import numpy as np

from .background import ForegroundMaskSequence
from .dmd import DmdDecomposition, SnapshotMatrix

__all__ = [
    "MAGIC_REAL",
    "MAGIC_COMPLEX",
    "save_matrix",
    "load_matrix",
    "save_pgm",
    "load_pgm",
    "load_frames",
    "save_frames",
    "save_masks",
    "load_masks",
    "save_decomposition",
    "load_decomposition",
]

MAGIC_REAL = b"RDMDMAT1"
MAGIC_COMPLEX = b"RDMDCPX1"

_MANIFEST = "manifest.txt"


def save_matrix(path: str, A: np.ndarray) -> None:
    """Write a 2-d array; complex dtype picks the interleaved container."""
    A = np.asarray(A)
    if A.ndim != 2:
        raise ValueError(f"matrix container stores 2-d arrays, got shape {A.shape}")
    rows, cols = A.shape
    complex_data = np.iscomplexobj(A)
    with open(path, "wb") as fh:
        fh.write(MAGIC_COMPLEX if complex_data else MAGIC_REAL)
        fh.write(struct.pack("<QQ", rows, cols))
        if complex_data:
            interleaved = np.empty((rows, 2 * cols), dtype="<f8")
            interleaved[:, 0::2] = A.real
            interleaved[:, 1::2] = A.imag
            fh.write(interleaved.tobytes())
        else:
            fh.write(np.ascontiguousarray(A, dtype="<f8").tobytes())


def load_matrix(path: str) -> np.ndarray:
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic not in (MAGIC_REAL, MAGIC_COMPLEX):
            raise ValueError(f"{path}: unrecognized matrix container magic {magic!r}")
        rows, cols = struct.unpack("<QQ", fh.read(16))
        per_entry = 16 if magic == MAGIC_COMPLEX else 8
        body = fh.read(rows * cols * per_entry)
    if len(body) != rows * cols * per_entry:
        raise ValueError(f"{path}: truncated matrix body")
    flat = np.frombuffer(body, dtype="<f8")
    if magic == MAGIC_COMPLEX:
        return (flat[0::2] + 1j * flat[1::2]).reshape(rows, cols)
    return flat.reshape(rows, cols).copy()


def _parse_pgm_header(data: bytes, path: str) -> tuple[int, int, int, int]:
    # Tokens are whitespace separated; '#' starts a comment running to EOL.
    tokens: list[bytes] = []
    i = 0
    while len(tokens) < 4 and i < len(data):
        c = data[i : i + 1]
        if c in b" \t\r\n":
            i += 1
        elif c == b"#":
            while i < len(data) and data[i : i + 1] != b"\n":
                i += 1
        else:
            j = i
            while j < len(data) and data[j : j + 1] not in b" \t\r\n#":
                j += 1
            tokens.append(data[i:j])
            i = j
    if len(tokens) < 4:
        raise ValueError(f"{path}: truncated PGM header")
    if tokens[0] != b"P5":
        raise ValueError(
            f"{path}: expected binary grayscale PGM (P5), got {tokens[0]!r}"
        )
    width, height, maxval = (int(t) for t in tokens[1:4])
    if width < 1 or height < 1 or not 1 <= maxval <= 65535:
        raise ValueError(f"{path}: invalid PGM dimensions or maxval")
    # Exactly one whitespace byte separates maxval from the raster.
    return width, height, maxval, i + 1


def load_pgm(path: str) -> tuple[np.ndarray, int]:
    """(image array (height, width), maxval); 16-bit rasters are big-endian."""
    with open(path, "rb") as fh:
        data = fh.read()
    width, height, maxval, offset = _parse_pgm_header(data, path)
    count = width * height
    dtype = ">u2" if maxval > 255 else np.uint8
    per_pixel = 2 if maxval > 255 else 1
    if len(data) - offset < count * per_pixel:
        raise ValueError(f"{path}: truncated PGM raster")
    raster = np.frombuffer(data, dtype=dtype, count=count, offset=offset)
    img = raster.reshape(height, width).astype(np.uint16 if maxval > 255 else np.uint8)
    if img.max(initial=0) > maxval:
        raise ValueError(f"{path}: pixel value exceeds maxval {maxval}")
    return img, maxval


def save_pgm(path: str, img: np.ndarray, maxval: int = 255) -> None:
    img = np.asarray(img)
    if img.ndim != 2:
        raise ValueError("PGM stores single 2-d frames")
    if not 1 <= maxval <= 65535:
        raise ValueError(f"maxval {maxval} outside [1, 65535]")
    if img.min(initial=0) < 0 or img.max(initial=0) > maxval:
        raise ValueError("pixel values outside [0, maxval]")
    height, width = img.shape
    dtype = ">u2" if maxval > 255 else np.uint8
    with open(path, "wb") as fh:
        fh.write(f"P5\n{width} {height}\n{maxval}\n".encode("ascii"))
        fh.write(img.astype(dtype).tobytes())


def load_frames(pattern: str, dt: float = 1.0) -> SnapshotMatrix:
    """Assemble a snapshot matrix from the PGM files matching a glob pattern.

    Files are taken in lexicographic order; each becomes one column, flattened
    row-major and normalized to [0, 1] by its maxval.
    """
    paths = sorted(glob.glob(pattern))
    if len(paths) < 2:
        raise ValueError(f"need at least 2 frames, pattern {pattern!r} matched {len(paths)}")
    columns = []
    geometry: tuple[int, int] | None = None
    for p in paths:
        img, maxval = load_pgm(p)
        if geometry is None:
            geometry = img.shape
        elif img.shape != geometry:
            raise ValueError(
                f"{p}: frame geometry {img.shape} differs from first frame {geometry}"
            )
        columns.append(img.reshape(-1).astype(np.float64) / maxval)
    height, width = geometry
    return SnapshotMatrix(
        data=np.stack(columns, axis=1),
        frame_height=height,
        frame_width=width,
        dt=dt,
    )


def save_frames(
    directory: str,
    D: SnapshotMatrix,
    stem: str = "frame",
    maxval: int = 255,
) -> list[str]:
    """Quantize each frame to [0, maxval] and write numbered PGM files."""
    os.makedirs(directory, exist_ok=True)
    paths = []
    for t in range(D.n_frames):
        img = np.rint(D.frame(t) * maxval).astype(np.uint32)
        path = os.path.join(directory, f"{stem}_{t:05d}.pgm")
        save_pgm(path, img, maxval)
        paths.append(path)
    return paths


def save_masks(
    directory: str,
    seq: ForegroundMaskSequence,
    stems: list[str] | None = None,
) -> list[str]:
    """One P5 file per mask frame, foreground 255, background 0.

    stems, when given, name the files 1:1 after the input frames.
    """
    if stems is not None and len(stems) != seq.n_frames:
        raise ValueError(f"{len(stems)} stems for {seq.n_frames} mask frames")
    os.makedirs(directory, exist_ok=True)
    paths = []
    for t in range(seq.n_frames):
        stem = stems[t] if stems is not None else f"mask_{t:05d}"
        path = os.path.join(directory, f"{stem}.pgm")
        save_pgm(path, seq.masks[t].astype(np.uint8) * 255, maxval=255)
        paths.append(path)
    return paths


def load_masks(pattern: str) -> ForegroundMaskSequence:
    paths = sorted(glob.glob(pattern))
    if not paths:
        raise ValueError(f"mask pattern {pattern!r} matched no files")
    frames = []
    for p in paths:
        img, maxval = load_pgm(p)
        frames.append(img > maxval // 2)
    masks = np.stack(frames)
    return ForegroundMaskSequence(masks=masks, tau=None)


def save_decomposition(directory: str, dec: DmdDecomposition) -> None:
    """Persist a decomposition as matrix containers plus a text manifest."""
    os.makedirs(directory, exist_ok=True)
    lines = [
        "format rdmd-decomposition-1",
        f"rank {dec.rank}",
        f"n_frames {dec.n_frames}",
        f"dt {dec.dt!r}",
        f"frame_height {dec.frame_height}",
        f"frame_width {dec.frame_width}",
        f"anchor {dec.anchor}",
        f"seed {dec.seed}",
    ]
    if dec.amplitude_spans is not None:
        bounds = ",".join(f"{start}:{stop}" for start, stop, _ in dec.amplitude_spans)
        lines.append(f"spans {bounds}")
        span_b = np.stack([b for _, _, b in dec.amplitude_spans], axis=1)
        save_matrix(os.path.join(directory, "span_amplitudes.cpx"), span_b)
    with open(os.path.join(directory, _MANIFEST), "w") as fh:
        fh.write("\n".join(lines) + "\n")
    save_matrix(os.path.join(directory, "modes.cpx"), dec.modes)
    save_matrix(os.path.join(directory, "eigenvalues.cpx"), dec.eigenvalues[:, None])
    save_matrix(os.path.join(directory, "amplitudes.cpx"), dec.amplitudes[:, None])


def load_decomposition(directory: str) -> DmdDecomposition:
    fields: dict[str, str] = {}
    with open(os.path.join(directory, _MANIFEST)) as fh:
        for line in fh:
            line = line.strip()
            if line:
                key, _, value = line.partition(" ")
                fields[key] = value
    if fields.get("format") != "rdmd-decomposition-1":
        raise ValueError(f"{directory}: unrecognized manifest format {fields.get('format')!r}")
    modes = load_matrix(os.path.join(directory, "modes.cpx"))
    eigenvalues = load_matrix(os.path.join(directory, "eigenvalues.cpx")).ravel()
    amplitudes = load_matrix(os.path.join(directory, "amplitudes.cpx")).ravel()
    spans = None
    if "spans" in fields:
        span_b = load_matrix(os.path.join(directory, "span_amplitudes.cpx"))
        bounds = [tuple(int(v) for v in part.split(":")) for part in fields["spans"].split(",")]
        spans = tuple(
            (start, stop, span_b[:, i]) for i, (start, stop) in enumerate(bounds)
        )
    anchor: str | int = fields["anchor"]
    try:
        anchor = int(anchor)
    except ValueError:
        pass
    return DmdDecomposition(
        modes=modes,
        eigenvalues=eigenvalues,
        amplitudes=amplitudes,
        n_frames=int(fields["n_frames"]),
        dt=float(fields["dt"]),
        frame_height=int(fields["frame_height"]),
        frame_width=int(fields["frame_width"]),
        anchor=anchor,
        seed=int(fields["seed"]),
        amplitude_spans=spans,
    )
