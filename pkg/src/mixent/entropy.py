"""Nonparametric differential entropy estimators and Gaussian references.

Two estimators are provided, both reporting nats:

* :func:`spacing_entropy`: a one-dimensional m-spacing estimator with
  position-dependent window coefficients correcting edge bias.  It is
  exactly scale-equivariant: estimate(a X) = estimate(X) + log|a|.
* :func:`knn_entropy`: a k-nearest-neighbor estimator for joint entropy in
  any dimension, Euclidean metric, digamma-corrected.  Exactly
  scale-equivariant up to floating-point rounding.

Gaussian references: :func:`surrogate_sigma` converts an entropy into the
scale of a Gaussian with that entropy, and :func:`gaussian_mix_entropy`
gives the closed-form entropy of a linear mixture of independent Gaussians.

Standard errors are estimated by splitting the (deterministically shuffled)
sample into disjoint blocks and scaling the dispersion of block estimates.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree
from scipy.special import digamma, gammaln, ndtri

from .complex_embedding import embed_samples
from .errors import DegenerateData, DuplicatePoints, RankDeficient, TooFewSamples
from .matrix_analysis import MixingMatrix, as_array
from .rng import generator, uniform_open

__all__ = [
    "EntropyEstimate",
    "GaussianSurrogate",
    "spacing_entropy",
    "spacing_entropy_value",
    "knn_entropy",
    "surrogate_sigma",
    "gaussian_mix_entropy",
]

_SHUFFLE_SEED = 0x5EB10C5


@dataclass(frozen=True)
class EntropyEstimate:
    """An entropy estimate in nats with its provenance.

    ``method`` is ``"spacing"``, ``"knn"``, or ``"closed_form"``; ``params``
    records estimator settings (window size or neighbor count) and
    ``std_error`` the block-resampling standard error (zero for closed
    forms).
    """

    value: float
    method: str
    n_samples: int
    params: dict
    std_error: float


@dataclass(frozen=True)
class GaussianSurrogate:
    """Scale of a Gaussian matching a prescribed entropy."""

    sigma: float
    entropy: float
    field: str


def _spacing_windows(n: int, m: int):
    # Windows are clamped to the sample range near the edges; the
    # coefficient c_i counts the effective window width in units of m.
    c = np.full(n, 2.0)
    i = np.arange(m, dtype=np.float64)
    c[:m] = 1.0 + i / m
    c[n - m :] = 1.0 + i[::-1] / m
    return c


def spacing_entropy_value(samples: np.ndarray, m: int) -> float:
    """Core m-spacing estimate without validation or standard error.

    Exposed separately because optimization loops evaluate it thousands of
    times.  ``samples`` must be a 1-D float array, 2 <= 2m <= n.
    """
    x = np.sort(samples)
    n = x.size
    lo = np.empty(n)
    hi = np.empty(n)
    lo[:m] = x[0]
    lo[m:] = x[:-m]
    hi[: n - m] = x[m:]
    hi[n - m :] = x[-1]
    d = hi - lo
    c = _spacing_windows(n, m)
    pos = d > 0
    if not pos.any():
        raise DegenerateData("all samples are equal")
    return float(np.mean(np.log(d[pos] / c[pos]))) + math.log(n / m)


def default_spacing_window(n: int) -> int:
    """Default window: round(sqrt(n)), clipped to a valid range."""
    return int(np.clip(round(math.sqrt(n)), 1, n // 2))


def _block_std_error(estimate_block, x: np.ndarray, min_block: int) -> float:
    n = x.shape[0]
    n_blocks = min(10, n // max(min_block, 10))
    if n_blocks < 2:
        return float("nan")
    order = generator(_SHUFFLE_SEED, n).permutation(n)
    size = n // n_blocks
    vals = []
    for b in range(n_blocks):
        idx = order[b * size : (b + 1) * size]
        vals.append(estimate_block(x[idx]))
    return float(np.std(vals, ddof=1) / math.sqrt(n_blocks))


def spacing_entropy(samples, m: int | None = None) -> EntropyEstimate:
    """Estimate the entropy of a scalar sample by m-spacings.

    Parameters
    ----------
    samples:
        1-D real sample array, at least 10 points.
    m:
        Window size; defaults to round(sqrt(n)).

    Returns
    -------
    EntropyEstimate
        Value in nats with a block-resampling standard error.

    Raises
    ------
    TooFewSamples, DegenerateData
    """
    x = np.asarray(samples, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("spacing estimator requires a 1-D real sample")
    n = x.size
    if n < 10:
        raise TooFewSamples(f"need at least 10 samples, got {n}")
    if m is None:
        m = default_spacing_window(n)
    if not (1 <= m <= n // 2):
        raise ValueError(f"window m={m} out of range [1, {n // 2}]")
    value = spacing_entropy_value(x, m)
    se = _block_std_error(
        lambda blk: spacing_entropy_value(blk, default_spacing_window(blk.size)),
        x,
        min_block=10,
    )
    return EntropyEstimate(value=value, method="spacing", n_samples=n, params={"m": int(m)}, std_error=se)


def _knn_value(pts: np.ndarray, k: int) -> float:
    n, d = pts.shape
    tree = cKDTree(pts)
    dist, _ = tree.query(pts, k=k + 1, workers=-1)
    eps = dist[:, k]
    if np.any(eps == 0.0):
        raise DuplicatePoints("zero k-th neighbor distance; enable jitter to break ties")
    log_vd = 0.5 * d * math.log(math.pi) - gammaln(0.5 * d + 1.0)
    return float(digamma(n) - digamma(k) + log_vd + d * np.mean(np.log(eps)))


def knn_entropy(samples, k: int = 4, jitter: bool = True, seed: int = 0) -> EntropyEstimate:
    """Estimate joint entropy by k-nearest-neighbor distances.

    Complex input of shape (N, d) is embedded as real data of shape
    (N, 2d) with interleaved real and imaginary parts.  Exact duplicate
    points are broken by a deterministic jitter of relative magnitude 1e-10
    derived from ``seed``; with ``jitter=False`` duplicates raise instead.

    Parameters
    ----------
    samples:
        Array of shape (N,) or (N, d), real or complex; N at least 50.
    k:
        Neighbor order, default 4; must satisfy 1 <= k < N.

    Raises
    ------
    TooFewSamples, DuplicatePoints
    """
    arr = np.asarray(samples)
    if np.iscomplexobj(arr):
        arr = embed_samples(arr)
    arr = np.asarray(arr, dtype=np.float64)
    if arr.ndim == 1:
        arr = arr[:, None]
    if arr.ndim != 2:
        raise ValueError("samples must be 1-D or 2-D")
    n, d = arr.shape
    if n < 50 or n <= k:
        raise TooFewSamples(f"need at least max(50, k+1) samples, got {n} with k={k}")
    if k < 1:
        raise ValueError("k must be at least 1")

    if np.unique(arr, axis=0).shape[0] < n:
        if not jitter:
            raise DuplicatePoints("duplicate sample points with jitter disabled")
        rng = generator(seed, 0xD1CE)
        scale = arr.std(axis=0)
        fallback = max(1.0, float(np.abs(arr).max()))
        scale = np.where(scale > 0, scale, fallback)
        arr = arr + 1e-10 * scale * ndtri(uniform_open(rng, arr.shape))

    value = _knn_value(arr, k)
    se = _block_std_error(lambda blk: _knn_value(blk, k), arr, min_block=max(10, k + 2))
    return EntropyEstimate(value=value, method="knn", n_samples=n, params={"k": int(k)}, std_error=se)


def surrogate_sigma(entropy_nats: float, field: str = "real") -> GaussianSurrogate:
    """Scale of the Gaussian whose entropy equals ``entropy_nats``.

    Real field: h = log(2 pi e sigma^2) / 2, so sigma = e^h / sqrt(2 pi e).
    Complex field: h = log(pi e sigma^2), so sigma = e^{h/2} / sqrt(pi e).
    """
    if field == "real":
        sigma = math.exp(entropy_nats) / math.sqrt(2 * math.pi * math.e)
    elif field == "complex":
        sigma = math.exp(entropy_nats / 2.0) / math.sqrt(math.pi * math.e)
    else:
        raise ValueError(f"unknown field {field!r}")
    return GaussianSurrogate(sigma=sigma, entropy=float(entropy_nats), field=field)


def gaussian_mix_entropy(A, sigmas, field: str | None = None) -> float:
    """Entropy of A X for independent Gaussians X_j with scales sigmas.

    Real field: (m/2) log(2 pi e) + log det(A S A^T) / 2 with
    S = diag(sigma_j^2).  Complex field (circular components):
    m log(pi e) + log det(A S A^H).

    Raises
    ------
    RankDeficient
        If A S A^H is singular, where the entropy is minus infinity.
    """
    if isinstance(A, MixingMatrix):
        fld = A.field
        arr = A.array
    else:
        arr = as_array(A)
        fld = field if field is not None else ("complex" if np.iscomplexobj(arr) else "real")
    sig = np.asarray(sigmas, dtype=np.float64)
    if sig.ndim != 1 or sig.size != arr.shape[1]:
        raise ValueError("sigmas must have one entry per column of A")
    if not np.all(sig > 0):
        raise ValueError("sigmas must be strictly positive")
    m = arr.shape[0]
    sv = np.linalg.svd(arr * sig, compute_uv=False)
    if sv.size == 0 or sv[0] == 0.0 or sv[-1] <= max(arr.shape) * np.finfo(np.float64).eps * sv[0]:
        raise RankDeficient("A diag(sigma) is rank deficient; the mixture entropy is -inf")
    log_det_half = float(np.log(sv).sum())
    if fld == "real":
        return 0.5 * m * math.log(2 * math.pi * math.e) + log_det_half
    return m * math.log(math.pi * math.e) + 2.0 * log_det_half
