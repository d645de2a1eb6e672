"""Dense-matrix kernel: randomized low-rank SVD plus deterministic oracles.

The randomized path follows the two-stage sketch-and-project scheme: a
Gaussian sketch captures an approximate range, optional subspace iterations
sharpen it against slowly decaying spectra, and a small deterministic SVD on
the projected matrix recovers the factors. Deterministic SVD, eigensolver and
least squares are thin, validated wrappers over LAPACK and serve as the
exactness oracles in the test suite.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "SvdFactors",
    "SketchConfig",
    "deterministic_svd",
    "random_gaussian",
    "randomized_range_finder",
    "rsvd",
    "rsvd_error_bound",
    "eig",
    "least_squares",
]


def _as_matrix(A: np.ndarray, name: str = "A") -> np.ndarray:
    A = np.asarray(A, dtype=np.float64)
    if A.ndim != 2:
        raise ValueError(f"{name} must be 2-dimensional, got ndim={A.ndim}")
    if A.shape[0] < 1 or A.shape[1] < 1:
        raise ValueError(f"{name} must have at least one row and one column")
    if not np.all(np.isfinite(A)):
        raise ValueError(f"{name} contains non-finite entries")
    return A


@dataclass(frozen=True)
class SvdFactors:
    """Truncated rank-k factors U diag(s) V^T with orthonormal U, V columns."""

    U: np.ndarray                # (m, k)
    singular_values: np.ndarray  # (k,), nonincreasing, nonnegative
    V: np.ndarray                # (n, k)

    def __post_init__(self) -> None:
        s = self.singular_values
        k = s.shape[0]
        if self.U.ndim != 2 or self.V.ndim != 2 or self.U.shape[1] != k or self.V.shape[1] != k:
            raise ValueError("factor shapes disagree on the rank")
        if np.any(s < 0.0) or np.any(np.diff(s) > 0.0):
            raise ValueError("singular values must be nonnegative and nonincreasing")
        eye = np.eye(k)
        if np.max(np.abs(self.U.T @ self.U - eye)) > 1e-10:
            raise ValueError("U columns are not orthonormal")
        if np.max(np.abs(self.V.T @ self.V - eye)) > 1e-10:
            raise ValueError("V columns are not orthonormal")

    @property
    def rank(self) -> int:
        return self.singular_values.shape[0]

    def reconstruct(self) -> np.ndarray:
        """Dense rank-k approximation U diag(s) V^T."""
        return (self.U * self.singular_values) @ self.V.T

    def truncate(self, k: int) -> "SvdFactors":
        if not 1 <= k <= self.rank:
            raise ValueError(f"cannot truncate rank-{self.rank} factors to k={k}")
        return SvdFactors(self.U[:, :k], self.singular_values[:k], self.V[:, :k])


@dataclass(frozen=True)
class SketchConfig:
    """Parameters of the randomized sketch.

    rank: number of factors returned.
    oversampling: extra sketch columns beyond rank (raises the probability of
        capturing the true range).
    subspace_iters: alternating re-orthonormalized passes with the matrix and
        its transpose, sharpening the sketch on slowly decaying spectra.
    """

    rank: int
    oversampling: int = 2
    subspace_iters: int = 1
    seed: int = 0

    def __post_init__(self) -> None:
        if self.rank < 1:
            raise ValueError(f"rank must be >= 1, got {self.rank}")
        if self.oversampling < 0:
            raise ValueError(f"oversampling must be >= 0, got {self.oversampling}")
        if self.subspace_iters < 0:
            raise ValueError(f"subspace_iters must be >= 0, got {self.subspace_iters}")

    @property
    def sketch_size(self) -> int:
        return self.rank + self.oversampling

    def validate_for_shape(self, m: int, n: int) -> None:
        if self.sketch_size > min(m, n):
            raise ValueError(
                f"rank + oversampling = {self.sketch_size} exceeds "
                f"min(m, n) = {min(m, n)} for a {m}x{n} matrix"
            )


def _fix_signs(U: np.ndarray, V: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # Deterministic sign convention: largest-magnitude entry of each U column
    # is made positive; V is flipped to match so the product is unchanged.
    idx = np.argmax(np.abs(U), axis=0)
    signs = np.sign(U[idx, np.arange(U.shape[1])])
    signs[signs == 0] = 1.0
    return U * signs, V * signs


def deterministic_svd(A: np.ndarray, k: int) -> SvdFactors:
    """Top-k factors of the full SVD of A; the exactness oracle.

    Frobenius reconstruction error equals sqrt(sum of squared singular values
    beyond the k-th).
    """
    A = _as_matrix(A)
    m, n = A.shape
    if not 1 <= k <= min(m, n):
        raise ValueError(f"k={k} outside [1, min(m, n)={min(m, n)}]")
    U, s, Vt = np.linalg.svd(A, full_matrices=False)
    U, V = _fix_signs(U[:, :k], Vt[:k, :].T)
    return SvdFactors(U, s[:k].copy(), V)


def random_gaussian(rows: int, cols: int, seed: int) -> np.ndarray:
    """Matrix of i.i.d. standard-normal entries, deterministic per seed."""
    if rows < 1 or cols < 1:
        raise ValueError(f"invalid shape ({rows}, {cols})")
    rng = np.random.default_rng(seed)
    return rng.standard_normal((rows, cols))


def randomized_range_finder(A: np.ndarray, l: int, q: int, seed: int) -> np.ndarray:
    """Orthonormal (m, l) basis Q approximately spanning the range of A.

    Starts from a Gaussian sketch A @ Omega. Each of the q iterations applies
    A^T then A with a thin QR after every application (subspace iteration;
    plain power iteration loses the small singular directions to roundoff).
    """
    A = _as_matrix(A)
    m, n = A.shape
    if not 1 <= l <= min(m, n):
        raise ValueError(f"l={l} outside [1, min(m, n)={min(m, n)}]")
    if q < 0:
        raise ValueError(f"q must be >= 0, got {q}")
    omega = random_gaussian(n, l, seed)
    Q, _ = np.linalg.qr(A @ omega)
    for _ in range(q):
        Z, _ = np.linalg.qr(A.T @ Q)
        Q, _ = np.linalg.qr(A @ Z)
    return Q


def rsvd(A: np.ndarray, cfg: SketchConfig) -> SvdFactors:
    """Randomized truncated SVD: sketch, project, small SVD, recover, trim.

    Computes rank + oversampling factors internally and returns the leading
    `cfg.rank`. Two passes over A plus two per subspace iteration.
    """
    A = _as_matrix(A)
    m, n = A.shape
    cfg.validate_for_shape(m, n)
    Q = randomized_range_finder(A, cfg.sketch_size, cfg.subspace_iters, cfg.seed)
    B = Q.T @ A
    Ub, s, Vt = np.linalg.svd(B, full_matrices=False)
    k = cfg.rank
    U, V = _fix_signs(Q @ Ub[:, :k], Vt[:k, :].T)
    return SvdFactors(U, s[:k].copy(), V)


def rsvd_error_bound(sigma_l_plus_1: float, m: int, n: int, l: int, q: int) -> float:
    """Expected Frobenius-error bound of the sketched SVD at sketch size l.

    sigma_{l+1} * [1 + 4 sqrt(2 min(m,n) / (l-1))] ** (1 / (2q+1)).
    Stated for oversampling equal to the target rank (l = 2k); no claim is
    made at other sketch sizes, the formula is simply evaluated.
    """
    if l < 2:
        raise ValueError(f"l must be >= 2 (divides by l - 1), got {l}")
    if sigma_l_plus_1 < 0:
        raise ValueError("sigma_l_plus_1 must be nonnegative")
    if q < 0:
        raise ValueError(f"q must be >= 0, got {q}")
    base = 1.0 + 4.0 * np.sqrt(2.0 * min(m, n) / (l - 1.0))
    return float(sigma_l_plus_1 * base ** (1.0 / (2.0 * q + 1.0)))


def eig(M: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a square real matrix.

    Returns (W, lam): unit-normalized eigenvector columns and eigenvalues,
    both complex, in LAPACK order.
    """
    M = _as_matrix(M, "M")
    if M.shape[0] != M.shape[1]:
        raise ValueError(f"M must be square, got {M.shape}")
    lam, W = np.linalg.eig(M)
    return W.astype(np.complex128, copy=False), lam.astype(np.complex128, copy=False)


def least_squares(A: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Minimum-norm least-squares solution of A x = y via orthogonal factorization.

    Accepts real or complex A with m >= k columns. Rank-deficient systems get
    the minimum-norm solution rather than an error.
    """
    A = np.asarray(A)
    y = np.asarray(y)
    if A.ndim != 2:
        raise ValueError(f"A must be 2-dimensional, got ndim={A.ndim}")
    m, k = A.shape
    if m < k:
        raise ValueError(f"system must be square or overdetermined, got {A.shape}")
    if y.shape[0] != m:
        raise ValueError(f"y length {y.shape[0]} does not match {m} rows")
    if not np.all(np.isfinite(A)):
        raise ValueError("A contains non-finite entries")
    x, *_ = np.linalg.lstsq(A, y, rcond=None)
    return x
