"""Real embedding of complex matrices and vectors.

A complex scalar a = x + iy embeds as the 2x2 real matrix [[x, -y], [y, x]].
Matrices embed blockwise, and vectors embed by interleaving real and
imaginary parts (re_1, im_1, re_2, im_2, ...), so the embedding of a product
is the product of the embeddings and complex sample arrays can be fed to
real-valued estimators without reshaping.

Key identities, for complex matrices A and B of compatible shapes:

* embed(A B) = embed(A) embed(B)
* embed(A^H) = embed(A)^T
* det(embed(A)) = |det(A)|^2 for square A
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BadBlockStructure, NotSpd

__all__ = [
    "hat_embed",
    "unhat",
    "embed_samples",
    "block_polar",
    "BlockPolar",
]


def hat_embed(A) -> np.ndarray:
    """Embed a complex matrix or vector into real coordinates.

    A matrix of shape (m, n) maps to shape (2m, 2n) with 2x2 blocks
    [[re, -im], [im, re]]; a vector of length n maps to length 2n with
    interleaved real and imaginary parts.
    """
    arr = np.asarray(A, dtype=np.complex128)
    if arr.ndim == 1:
        out = np.empty(2 * arr.size, dtype=np.float64)
        out[0::2] = arr.real
        out[1::2] = arr.imag
        return out
    if arr.ndim != 2:
        raise ValueError("expected a vector or a 2-D matrix")
    m, n = arr.shape
    out = np.empty((2 * m, 2 * n), dtype=np.float64)
    out[0::2, 0::2] = arr.real
    out[0::2, 1::2] = -arr.imag
    out[1::2, 0::2] = arr.imag
    out[1::2, 1::2] = arr.real
    return out


def unhat(Ahat, tol: float = 1e-10) -> np.ndarray:
    """Invert :func:`hat_embed`, validating the block pattern.

    Parameters
    ----------
    Ahat:
        Real array of even length (vector) or even dimensions (matrix).
    tol:
        Entrywise tolerance for the [[a, -b], [b, a]] pattern.

    Raises
    ------
    BadBlockStructure
        If dimensions are odd or some 2x2 block breaks the pattern; the
        message names the first offending block.
    """
    arr = np.asarray(Ahat, dtype=np.float64)
    if arr.ndim == 1:
        if arr.size % 2:
            raise BadBlockStructure("vector length must be even")
        return arr[0::2] + 1j * arr[1::2]
    if arr.ndim != 2:
        raise ValueError("expected a vector or a 2-D matrix")
    if arr.shape[0] % 2 or arr.shape[1] % 2:
        raise BadBlockStructure("matrix dimensions must be even")
    a = arr[0::2, 0::2]
    d = arr[1::2, 1::2]
    b = arr[0::2, 1::2]
    c = arr[1::2, 0::2]
    diag_err = np.abs(a - d)
    off_err = np.abs(b + c)
    if diag_err.max() > tol or off_err.max() > tol:
        err = np.maximum(diag_err, off_err)
        i, j = np.unravel_index(int(err.argmax()), err.shape)
        raise BadBlockStructure(
            f"block ({i}, {j}) violates the embedding pattern by {err[i, j]:.3e} (tol {tol:.0e})"
        )
    return a + 1j * c


def embed_samples(Z) -> np.ndarray:
    """Embed complex sample rows (N, n) as real rows (N, 2n).

    Each row is embedded as an interleaved vector, matching the vector
    convention of :func:`hat_embed`, so real estimators see the same
    geometry that embedded matrices act on.
    """
    arr = np.asarray(Z, dtype=np.complex128)
    if arr.ndim == 1:
        arr = arr[:, None]
    n_samples, n_dims = arr.shape
    out = np.empty((n_samples, 2 * n_dims), dtype=np.float64)
    out[:, 0::2] = arr.real
    out[:, 1::2] = arr.imag
    return out


@dataclass(frozen=True)
class BlockPolar:
    """Rotation-diagonal factorization of a 2x2 SPD block.

    The block equals R(theta) diag(d) R(theta)^T with d[0] >= d[1] > 0 and
    theta in (-pi/2, pi/2].
    """

    theta: float
    d: tuple[float, float]

    def rotation(self) -> np.ndarray:
        c, s = np.cos(self.theta), np.sin(self.theta)
        return np.array([[c, -s], [s, c]])

    def reconstruct(self) -> np.ndarray:
        R = self.rotation()
        return (R * np.asarray(self.d)) @ R.T


def block_polar(block, tol: float = 1e-10) -> BlockPolar:
    """Factor a symmetric positive definite 2x2 block as R diag(d) R^T.

    Uses the closed-form eigendecomposition of a symmetric 2x2 matrix:
    with mean mu = (a + c) / 2 and radius rho = sqrt(((a - c) / 2)^2 + b^2),
    the eigenvalues are mu +/- rho and theta = atan2(2b, a - c) / 2.  The
    convention d[0] >= d[1] with theta in (-pi/2, pi/2] makes the result
    deterministic; equal eigenvalues give theta = 0.

    Raises
    ------
    NotSpd
        If the block is not symmetric within ``tol`` or not positive
        definite.
    """
    arr = np.asarray(block, dtype=np.float64)
    if arr.shape != (2, 2):
        raise NotSpd("block must be 2x2")
    if abs(arr[0, 1] - arr[1, 0]) > tol:
        raise NotSpd(f"block is not symmetric within {tol:.0e}")
    a, c = arr[0, 0], arr[1, 1]
    b = 0.5 * (arr[0, 1] + arr[1, 0])
    mu = 0.5 * (a + c)
    rho = float(np.hypot(0.5 * (a - c), b))
    d1, d2 = mu + rho, mu - rho
    if d2 <= 0:
        raise NotSpd("block is not positive definite")
    theta = 0.5 * float(np.arctan2(2.0 * b, a - c))
    if theta <= -np.pi / 2:
        theta += np.pi
    elif theta > np.pi / 2:
        theta -= np.pi
    return BlockPolar(theta=theta, d=(float(d1), float(d2)))
