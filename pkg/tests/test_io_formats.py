"""Binary matrix container, PGM codec and decomposition persistence."""

import numpy as np
import pytest

from dmdmotion.background import ForegroundMaskSequence
from dmdmotion.dmd import MEDIAN_FRAME, SnapshotMatrix, rdmd
from dmdmotion.io_formats import (
    MAGIC_COMPLEX,
    MAGIC_REAL,
    load_decomposition,
    load_frames,
    load_masks,
    load_matrix,
    load_pgm,
    save_decomposition,
    save_frames,
    save_masks,
    save_matrix,
    save_pgm,
)
from dmdmotion.linalg import SketchConfig
from dmdmotion.synthetic import MovingRect, SyntheticSpec, generate_synthetic


# ------------------------------------------------------------------ matrices

def test_real_matrix_round_trip(tmp_path):
    rng = np.random.default_rng(0)
    A = rng.standard_normal((7, 5))
    path = str(tmp_path / "a.mat")
    save_matrix(path, A)
    B = load_matrix(path)
    assert B.dtype == np.float64
    assert np.array_equal(A, B)
    with open(path, "rb") as fh:
        assert fh.read(8) == MAGIC_REAL


def test_complex_matrix_round_trip(tmp_path):
    rng = np.random.default_rng(1)
    A = rng.standard_normal((4, 6)) + 1j * rng.standard_normal((4, 6))
    path = str(tmp_path / "a.cpx")
    save_matrix(path, A)
    B = load_matrix(path)
    assert B.dtype == np.complex128
    assert np.array_equal(A, B)
    with open(path, "rb") as fh:
        assert fh.read(8) == MAGIC_COMPLEX


def test_matrix_rejects_bad_magic(tmp_path):
    path = tmp_path / "bad.mat"
    path.write_bytes(b"NOTMAGIC" + b"\x00" * 32)
    with pytest.raises(ValueError, match="magic"):
        load_matrix(str(path))


def test_matrix_rejects_truncated_body(tmp_path):
    path = str(tmp_path / "trunc.mat")
    save_matrix(path, np.ones((3, 3)))
    blob = open(path, "rb").read()
    with open(path, "wb") as fh:
        fh.write(blob[:-8])
    with pytest.raises(ValueError, match="truncated"):
        load_matrix(path)


def test_matrix_rejects_non_2d():
    with pytest.raises(ValueError):
        save_matrix("/dev/null", np.ones(5))


# ------------------------------------------------------------------ pgm

def test_pgm_round_trip_8bit(tmp_path):
    img = (np.arange(12, dtype=np.uint8) * 20).reshape(3, 4)
    path = str(tmp_path / "f.pgm")
    save_pgm(path, img, maxval=255)
    loaded, maxval = load_pgm(path)
    assert maxval == 255
    assert np.array_equal(img, loaded)


def test_pgm_round_trip_16bit(tmp_path):
    rng = np.random.default_rng(2)
    img = rng.integers(0, 40000, size=(5, 7)).astype(np.uint16)
    path = str(tmp_path / "f16.pgm")
    save_pgm(path, img, maxval=65535)
    loaded, maxval = load_pgm(path)
    assert maxval == 65535
    assert loaded.dtype == np.uint16
    assert np.array_equal(img, loaded)


def test_pgm_16bit_raster_is_big_endian(tmp_path):
    img = np.array([[0x0102]], dtype=np.uint16)
    path = str(tmp_path / "be.pgm")
    save_pgm(path, img, maxval=65535)
    raw = open(path, "rb").read()
    assert raw.endswith(b"\x01\x02")


def test_pgm_rejects_color_format(tmp_path):
    path = tmp_path / "c.ppm"
    path.write_bytes(b"P6\n2 2\n255\n" + b"\x00" * 12)
    with pytest.raises(ValueError, match="P5"):
        load_pgm(str(path))


def test_pgm_header_comments_skipped(tmp_path):
    path = tmp_path / "commented.pgm"
    path.write_bytes(b"P5 # format\n# a comment line\n2 # width\n1 255\n\x07\x09")
    img, maxval = load_pgm(str(path))
    assert maxval == 255
    assert img.shape == (1, 2)
    assert img.tolist() == [[7, 9]]


def test_pgm_rejects_truncated_raster(tmp_path):
    path = tmp_path / "t.pgm"
    path.write_bytes(b"P5\n4 4\n255\n" + b"\x00" * 7)
    with pytest.raises(ValueError, match="truncated"):
        load_pgm(str(path))


def test_pgm_rejects_out_of_range_pixels():
    with pytest.raises(ValueError):
        save_pgm("/dev/null", np.array([[300]]), maxval=255)


# ------------------------------------------------------------------ frames

def test_frames_round_trip_is_exact(tmp_path):
    spec = SyntheticSpec(frame_height=6, frame_width=8, n_frames=5,
                         noise_sigma=0.03, seed=3)
    D, _ = generate_synthetic(spec)
    save_frames(str(tmp_path), D, maxval=255)
    loaded = load_frames(str(tmp_path / "frame_*.pgm"))
    assert loaded.frame_height == 6 and loaded.frame_width == 8
    assert loaded.n_frames == 5
    # one quantization error of at most half a gray level per pixel
    assert np.max(np.abs(loaded.data - D.data)) <= 0.5 / 255 + 1e-12
    # and saving the loaded frames reproduces the files bit for bit
    save_frames(str(tmp_path / "again"), loaded, maxval=255)
    for t in range(5):
        a = open(tmp_path / f"frame_{t:05d}.pgm", "rb").read()
        b = open(tmp_path / "again" / f"frame_{t:05d}.pgm", "rb").read()
        assert a == b


def test_frames_lexicographic_order(tmp_path):
    for t in (2, 0, 1):
        save_pgm(str(tmp_path / f"frame_{t:05d}.pgm"),
                 np.full((2, 2), t * 10, dtype=np.uint8))
    D = load_frames(str(tmp_path / "frame_*.pgm"))
    assert np.allclose(D.data[0], np.array([0.0, 10.0, 20.0]) / 255)


def test_frames_require_consistent_geometry(tmp_path):
    save_pgm(str(tmp_path / "a_00.pgm"), np.zeros((2, 2), dtype=np.uint8))
    save_pgm(str(tmp_path / "a_01.pgm"), np.zeros((3, 2), dtype=np.uint8))
    with pytest.raises(ValueError, match="geometry"):
        load_frames(str(tmp_path / "a_*.pgm"))


def test_frames_require_at_least_two(tmp_path):
    save_pgm(str(tmp_path / "only.pgm"), np.zeros((2, 2), dtype=np.uint8))
    with pytest.raises(ValueError, match="at least 2"):
        load_frames(str(tmp_path / "only.pgm"))


def test_frames_maxval_normalization(tmp_path):
    img = np.array([[0, 50], [100, 100]], dtype=np.uint8)
    save_pgm(str(tmp_path / "n_0.pgm"), img, maxval=100)
    save_pgm(str(tmp_path / "n_1.pgm"), img, maxval=100)
    D = load_frames(str(tmp_path / "n_*.pgm"))
    assert D.data.max() == 1.0
    assert D.data[1, 0] == 0.5


# ------------------------------------------------------------------ masks

def test_masks_round_trip(tmp_path):
    rng = np.random.default_rng(4)
    masks = ForegroundMaskSequence(rng.uniform(size=(3, 5, 4)) < 0.4, tau=None)
    paths = save_masks(str(tmp_path), masks)
    assert len(paths) == 3
    loaded = load_masks(str(tmp_path / "mask_*.pgm"))
    assert np.array_equal(loaded.masks, masks.masks)
    img, maxval = load_pgm(paths[0])
    assert set(np.unique(img)) <= {0, 255}


def test_masks_custom_stems(tmp_path):
    masks = ForegroundMaskSequence(np.zeros((2, 2, 2), dtype=bool), tau=None)
    paths = save_masks(str(tmp_path), masks, stems=["in000_mask", "in001_mask"])
    assert sorted(p.split("/")[-1] for p in paths) == [
        "in000_mask.pgm", "in001_mask.pgm"
    ]
    with pytest.raises(ValueError):
        save_masks(str(tmp_path), masks, stems=["lonely"])


# ------------------------------------------------------------------ decompositions

def fitted_decomposition(spans=None):
    spec = SyntheticSpec(frame_height=8, frame_width=8, n_frames=24,
                         objects=(MovingRect(2.0, 1.0, 3, 3, 1.0, (0.0, 0.2)),),
                         noise_sigma=0.02, seed=5)
    D, _ = generate_synthetic(spec)
    return rdmd(D, SketchConfig(rank=4, oversampling=2, subspace_iters=1, seed=6),
                anchor=MEDIAN_FRAME, amplitude_span=spans)


def test_decomposition_round_trip(tmp_path):
    dec = fitted_decomposition()
    save_decomposition(str(tmp_path), dec)
    back = load_decomposition(str(tmp_path))
    assert np.array_equal(back.modes, dec.modes)
    assert np.array_equal(back.eigenvalues, dec.eigenvalues)
    assert np.array_equal(back.amplitudes, dec.amplitudes)
    assert back.n_frames == dec.n_frames
    assert back.dt == dec.dt
    assert (back.frame_height, back.frame_width) == (8, 8)
    assert back.anchor == dec.anchor
    assert back.seed == dec.seed
    assert back.amplitude_spans is None


def test_decomposition_round_trip_with_spans(tmp_path):
    dec = fitted_decomposition(spans=8)
    assert dec.amplitude_spans is not None
    save_decomposition(str(tmp_path), dec)
    back = load_decomposition(str(tmp_path))
    assert len(back.amplitude_spans) == len(dec.amplitude_spans)
    for (s0, e0, b0), (s1, e1, b1) in zip(back.amplitude_spans, dec.amplitude_spans):
        assert (s0, e0) == (s1, e1)
        assert np.array_equal(b0, b1)


def test_decomposition_rejects_foreign_manifest(tmp_path):
    (tmp_path / "manifest.txt").write_text("format something-else\n")
    with pytest.raises(ValueError, match="manifest"):
        load_decomposition(str(tmp_path))


def test_decomposition_save_is_deterministic(tmp_path):
    dec = fitted_decomposition()
    save_decomposition(str(tmp_path / "a"), dec)
    save_decomposition(str(tmp_path / "b"), dec)
    for name in ("manifest.txt", "modes.cpx", "eigenvalues.cpx", "amplitudes.cpx"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()
