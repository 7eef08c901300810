"""Source distribution models, sampling, and transport maps.

A :class:`SourceModel` names a scalar distribution family with parameters,
over the real or complex field.  The module provides closed-form (or
quadrature) differential entropies in nats, deterministic inverse-CDF
sampling on Philox streams, entropy normalization across a set of models,
and monotone transport maps from the standard normal onto a target model.

Real families are zero-mean by default; the exponential family is the
exception and is intended for estimator calibration only.  Complex families
are circularly symmetric.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable

import numpy as np
from scipy import integrate, optimize
from scipy.special import ndtr, ndtri

from .errors import NotCircular, UnsupportedFamily
from .rng import generator, uniform_open

__all__ = [
    "SourceModel",
    "DiagonalScaling",
    "TransportMap1D",
    "RadialTransportMap2D",
    "gaussian",
    "uniform",
    "laplace",
    "exponential",
    "gaussian_mixture",
    "circular_gaussian",
    "uniform_disk",
    "unit_variance_uniform",
    "exact_entropy",
    "variance",
    "mean",
    "sample",
    "scale_model",
    "normalize_entropies",
    "match_entropy",
    "quantile_transport",
    "radial_transport",
    "transport_log_derivative_expectation",
]

_REAL_FAMILIES = ("gaussian", "uniform", "laplace", "exponential", "gaussian_mixture_2")
_COMPLEX_FAMILIES = ("complex_circular_gaussian", "complex_uniform_disk")


@dataclass(frozen=True)
class SourceModel:
    """A named scalar distribution with validated parameters.

    Parameters
    ----------
    family:
        One of ``gaussian``, ``uniform``, ``laplace``, ``exponential``,
        ``gaussian_mixture_2``, ``complex_circular_gaussian``,
        ``complex_uniform_disk``.
    params:
        Family-specific parameters; see the factory helpers below.
    field:
        ``"real"`` or ``"complex"``, implied by the family.
    """

    family: str
    params: dict
    field: str = dc_field(default="real")

    def __post_init__(self):
        if self.family in _REAL_FAMILIES:
            expected = "real"
        elif self.family in _COMPLEX_FAMILIES:
            expected = "complex"
        else:
            raise UnsupportedFamily(f"unknown family {self.family!r}")
        if self.field != expected:
            raise UnsupportedFamily(f"family {self.family!r} is a {expected}-field family")
        _validate_params(self.family, self.params)


def _positive(params: dict, key: str) -> float:
    v = float(params[key])
    if not (v > 0 and math.isfinite(v)):
        raise ValueError(f"parameter {key!r} must be positive and finite, got {v}")
    return v


def _validate_params(family: str, params: dict) -> None:
    if family == "gaussian":
        _positive(params, "sigma")
        float(params.get("mu", 0.0))
    elif family == "uniform":
        low, high = float(params["low"]), float(params["high"])
        if not (math.isfinite(low) and math.isfinite(high) and high > low):
            raise ValueError("uniform requires finite low < high")
    elif family == "laplace":
        _positive(params, "scale")
        float(params.get("mu", 0.0))
    elif family == "exponential":
        _positive(params, "rate")
    elif family == "gaussian_mixture_2":
        w = [float(x) for x in params["weights"]]
        mus = [float(x) for x in params["mus"]]
        sigmas = [float(x) for x in params["sigmas"]]
        if len(w) != 2 or len(mus) != 2 or len(sigmas) != 2:
            raise ValueError("gaussian_mixture_2 requires two weights, mus, sigmas")
        if min(w) <= 0 or abs(sum(w) - 1.0) > 1e-12:
            raise ValueError("weights must be positive and sum to 1")
        if min(sigmas) <= 0:
            raise ValueError("sigmas must be positive")
    elif family == "complex_circular_gaussian":
        _positive(params, "sigma")
    elif family == "complex_uniform_disk":
        _positive(params, "radius")


def gaussian(sigma: float = 1.0, mu: float = 0.0) -> SourceModel:
    """Normal N(mu, sigma^2)."""
    return SourceModel("gaussian", {"sigma": float(sigma), "mu": float(mu)})


def uniform(low: float, high: float) -> SourceModel:
    """Uniform on [low, high]."""
    return SourceModel("uniform", {"low": float(low), "high": float(high)})


def unit_variance_uniform() -> SourceModel:
    """Uniform on [-sqrt(3), sqrt(3)]: zero mean, unit variance."""
    s = math.sqrt(3.0)
    return uniform(-s, s)


def laplace(scale: float = 1.0, mu: float = 0.0) -> SourceModel:
    """Laplace with density exp(-|x - mu| / scale) / (2 scale)."""
    return SourceModel("laplace", {"scale": float(scale), "mu": float(mu)})


def exponential(rate: float = 1.0) -> SourceModel:
    """Exponential with density rate * exp(-rate x) on x >= 0.

    Not zero-mean; intended for estimator calibration rather than mixing
    experiments.
    """
    return SourceModel("exponential", {"rate": float(rate)})


def gaussian_mixture(weights, mus, sigmas) -> SourceModel:
    """Two-component Gaussian mixture."""
    return SourceModel(
        "gaussian_mixture_2",
        {
            "weights": [float(w) for w in weights],
            "mus": [float(m) for m in mus],
            "sigmas": [float(s) for s in sigmas],
        },
    )


def circular_gaussian(sigma: float = 1.0) -> SourceModel:
    """Circularly symmetric complex normal with E|X|^2 = sigma^2.

    Real and imaginary parts are independent N(0, sigma^2 / 2); the
    entropy, viewing the variable as two real coordinates, is
    log(pi e sigma^2).
    """
    return SourceModel("complex_circular_gaussian", {"sigma": float(sigma)}, field="complex")


def uniform_disk(radius: float = 1.0) -> SourceModel:
    """Uniform on the complex disk of the given radius."""
    return SourceModel("complex_uniform_disk", {"radius": float(radius)}, field="complex")


def exact_entropy(model: SourceModel) -> float:
    """Differential entropy in nats.

    Complex families report the entropy of the two-dimensional real
    embedding.  The two-component Gaussian mixture is integrated by
    adaptive quadrature to absolute accuracy better than 1e-10.
    """
    p = model.params
    if model.family == "gaussian":
        return 0.5 * math.log(2 * math.pi * math.e * p["sigma"] ** 2)
    if model.family == "uniform":
        return math.log(p["high"] - p["low"])
    if model.family == "laplace":
        return 1.0 + math.log(2 * p["scale"])
    if model.family == "exponential":
        return 1.0 - math.log(p["rate"])
    if model.family == "gaussian_mixture_2":
        return _mixture_entropy(p)
    if model.family == "complex_circular_gaussian":
        return math.log(math.pi * math.e * p["sigma"] ** 2)
    if model.family == "complex_uniform_disk":
        return math.log(math.pi * p["radius"] ** 2)
    raise UnsupportedFamily(model.family)


def _mixture_density(p: dict) -> Callable[[np.ndarray], np.ndarray]:
    w = np.asarray(p["weights"], dtype=float)
    mus = np.asarray(p["mus"], dtype=float)
    sigmas = np.asarray(p["sigmas"], dtype=float)

    def pdf(x):
        x = np.asarray(x, dtype=float)
        z = (x[..., None] - mus) / sigmas
        comp = np.exp(-0.5 * z * z) / (sigmas * math.sqrt(2 * math.pi))
        return comp @ w

    return pdf


def _mixture_entropy(p: dict) -> float:
    pdf = _mixture_density(p)
    mus = p["mus"]
    sigmas = p["sigmas"]
    lo = min(m - 40 * s for m, s in zip(mus, sigmas))
    hi = max(m + 40 * s for m, s in zip(mus, sigmas))

    def integrand(x):
        f = pdf(x)
        return np.where(f > 0, -f * np.log(np.maximum(f, 1e-300)), 0.0)

    val, _ = integrate.quad(integrand, lo, hi, points=sorted(mus), limit=400, epsabs=1e-12, epsrel=1e-12)
    return float(val)


def mean(model: SourceModel):
    """Mean of the model (complex models are zero-mean by symmetry)."""
    p = model.params
    if model.family == "gaussian":
        return p.get("mu", 0.0)
    if model.family == "uniform":
        return 0.5 * (p["low"] + p["high"])
    if model.family == "laplace":
        return p.get("mu", 0.0)
    if model.family == "exponential":
        return 1.0 / p["rate"]
    if model.family == "gaussian_mixture_2":
        return float(np.dot(p["weights"], p["mus"]))
    return 0.0 + 0.0j


def variance(model: SourceModel) -> float:
    """Central second moment; for complex models, E|X - EX|^2."""
    p = model.params
    if model.family == "gaussian":
        return p["sigma"] ** 2
    if model.family == "uniform":
        return (p["high"] - p["low"]) ** 2 / 12.0
    if model.family == "laplace":
        return 2.0 * p["scale"] ** 2
    if model.family == "exponential":
        return 1.0 / p["rate"] ** 2
    if model.family == "gaussian_mixture_2":
        w = np.asarray(p["weights"])
        mus = np.asarray(p["mus"])
        sigmas = np.asarray(p["sigmas"])
        m1 = float(w @ mus)
        return float(w @ (sigmas**2 + mus**2) - m1**2)
    if model.family == "complex_circular_gaussian":
        return p["sigma"] ** 2
    if model.family == "complex_uniform_disk":
        return p["radius"] ** 2 / 2.0
    raise UnsupportedFamily(model.family)


def sample(model: SourceModel, n_samples: int, seed: int, stream: int = 0) -> np.ndarray:
    """Draw ``n_samples`` variates deterministically.

    Sampling is inverse-CDF on uniforms from a Philox stream keyed by
    (seed, stream), so results are reproducible bit for bit and independent
    streams never overlap.  Complex families return complex128 arrays.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    rng = generator(seed, stream)
    p = model.params
    if model.family == "gaussian":
        u = uniform_open(rng, n_samples)
        return p.get("mu", 0.0) + p["sigma"] * ndtri(u)
    if model.family == "uniform":
        return p["low"] + (p["high"] - p["low"]) * rng.random(n_samples)
    if model.family == "laplace":
        u = uniform_open(rng, n_samples) - 0.5
        return p.get("mu", 0.0) - p["scale"] * np.sign(u) * np.log1p(-2.0 * np.abs(u))
    if model.family == "exponential":
        u = rng.random(n_samples)
        return -np.log1p(-u) / p["rate"]
    if model.family == "gaussian_mixture_2":
        u_comp = rng.random(n_samples)
        u = uniform_open(rng, n_samples)
        which = (u_comp >= p["weights"][0]).astype(int)
        mus = np.asarray(p["mus"])[which]
        sigmas = np.asarray(p["sigmas"])[which]
        return mus + sigmas * ndtri(u)
    if model.family == "complex_circular_gaussian":
        u1 = uniform_open(rng, n_samples)
        u2 = uniform_open(rng, n_samples)
        s = p["sigma"] / math.sqrt(2.0)
        return s * (ndtri(u1) + 1j * ndtri(u2))
    if model.family == "complex_uniform_disk":
        u1 = rng.random(n_samples)
        u2 = rng.random(n_samples)
        r = p["radius"] * np.sqrt(u1)
        ang = 2 * math.pi * u2
        return r * np.exp(1j * ang)
    raise UnsupportedFamily(model.family)


def scale_model(model: SourceModel, c: float) -> SourceModel:
    """The model of c X for a positive real factor c.

    Real entropies shift by log c; complex entropies shift by 2 log c.
    """
    if not (c > 0 and math.isfinite(c)):
        raise ValueError("scale factor must be positive and finite")
    p = dict(model.params)
    if model.family == "gaussian":
        return gaussian(sigma=c * p["sigma"], mu=c * p.get("mu", 0.0))
    if model.family == "uniform":
        return uniform(c * p["low"], c * p["high"])
    if model.family == "laplace":
        return laplace(scale=c * p["scale"], mu=c * p.get("mu", 0.0))
    if model.family == "exponential":
        return exponential(rate=p["rate"] / c)
    if model.family == "gaussian_mixture_2":
        return gaussian_mixture(
            p["weights"], [c * m for m in p["mus"]], [c * s for s in p["sigmas"]]
        )
    if model.family == "complex_circular_gaussian":
        return circular_gaussian(sigma=c * p["sigma"])
    if model.family == "complex_uniform_disk":
        return uniform_disk(radius=c * p["radius"])
    raise UnsupportedFamily(model.family)


@dataclass(frozen=True)
class DiagonalScaling:
    """Per-component scale factors recorded by entropy normalization."""

    deltas: tuple[float, ...]


def normalize_entropies(models) -> tuple[list[SourceModel], DiagonalScaling]:
    """Rescale models so all entropies are equal (to zero).

    Each real model X_j is replaced by X_j / delta_j with
    delta_j = exp(h(X_j)); complex models use delta_j = exp(h(X_j) / 2)
    because scaling shifts their entropy by twice the log factor.  All
    models must live over the same field.

    Returns the scaled models and the recorded scalings.
    """
    models = list(models)
    if not models:
        raise ValueError("need at least one model")
    fields = {m.field for m in models}
    if len(fields) > 1:
        raise UnsupportedFamily("cannot normalize models over mixed fields")
    fld = fields.pop()
    deltas = []
    scaled = []
    for m in models:
        h = exact_entropy(m)
        delta = math.exp(h) if fld == "real" else math.exp(h / 2.0)
        deltas.append(delta)
        scaled.append(scale_model(m, 1.0 / delta))
    return scaled, DiagonalScaling(deltas=tuple(deltas))


def match_entropy(model: SourceModel, target_entropy: float) -> SourceModel:
    """Rescale one model to the requested entropy."""
    h = exact_entropy(model)
    if model.field == "real":
        return scale_model(model, math.exp(target_entropy - h))
    return scale_model(model, math.exp((target_entropy - h) / 2.0))


@dataclass(frozen=True)
class TransportMap1D:
    """Monotone map T with T(Z) distributed as the target for Z ~ N(0, 1).

    ``transform`` evaluates T = F_target^{-1} o Phi and ``derivative``
    evaluates T'(x) = phi(x) / f_target(T(x)); both are vectorized and
    strictly positive-derivative.
    """

    target: SourceModel
    _transform: Callable[[np.ndarray], np.ndarray]
    _derivative: Callable[[np.ndarray], np.ndarray]

    def transform(self, x) -> np.ndarray:
        return self._transform(np.asarray(x, dtype=float))

    def derivative(self, x) -> np.ndarray:
        return self._derivative(np.asarray(x, dtype=float))


def _norm_pdf(x: np.ndarray) -> np.ndarray:
    return np.exp(-0.5 * x * x) / math.sqrt(2 * math.pi)


def quantile_transport(target: SourceModel) -> TransportMap1D:
    """Monotone transport from the standard normal to a real target.

    Gaussian targets use the exact affine map, so identity targets have
    identically zero log-derivative.  The two-component mixture inverts its
    CDF numerically to 1e-12.

    Raises
    ------
    UnsupportedFamily
        For complex targets; use :func:`radial_transport` instead.
    """
    if target.field != "real":
        raise UnsupportedFamily("quantile transport requires a real target")
    p = target.params
    fam = target.family

    if fam == "gaussian":
        mu, sigma = p.get("mu", 0.0), p["sigma"]

        def t(x):
            return mu + sigma * x

        def dt(x):
            return np.full_like(x, sigma, dtype=float)

    elif fam == "uniform":
        low, width = p["low"], p["high"] - p["low"]

        def t(x):
            return low + width * ndtr(x)

        def dt(x):
            return width * _norm_pdf(x)

    elif fam == "laplace":
        mu, b = p.get("mu", 0.0), p["scale"]

        def t(x):
            u = ndtr(x) - 0.5
            return mu - b * np.sign(u) * np.log1p(-2.0 * np.abs(u))

        def dt(x):
            u = ndtr(x) - 0.5
            return _norm_pdf(x) * 2.0 * b / np.maximum(1.0 - 2.0 * np.abs(u), 1e-300)

    elif fam == "exponential":
        rate = p["rate"]

        def t(x):
            # -log(1 - Phi(x)) / rate, with the complement evaluated stably.
            return -np.log(np.maximum(ndtr(-np.asarray(x, dtype=float)), 1e-300)) / rate

        def dt(x):
            return _norm_pdf(x) / np.maximum(rate * ndtr(-np.asarray(x, dtype=float)), 1e-300)

    elif fam == "gaussian_mixture_2":
        pdf = _mixture_density(p)
        w = np.asarray(p["weights"])
        mus = np.asarray(p["mus"])
        sigmas = np.asarray(p["sigmas"])

        def cdf(y):
            y = np.asarray(y, dtype=float)
            return (ndtr((y[..., None] - mus) / sigmas) @ w).reshape(y.shape)

        lo0 = float(min(mus - 42 * sigmas))
        hi0 = float(max(mus + 42 * sigmas))

        def t(x):
            x = np.atleast_1d(np.asarray(x, dtype=float))
            u = ndtr(x)
            out = np.empty_like(x)
            for i, ui in np.ndenumerate(u):
                out[i] = optimize.brentq(lambda y: cdf(y) - ui, lo0, hi0, xtol=1e-12, rtol=1e-14)
            return out

        def dt(x):
            x = np.asarray(x, dtype=float)
            return _norm_pdf(x) / np.maximum(pdf(t(x)), 1e-300)

    else:
        raise UnsupportedFamily(fam)

    return TransportMap1D(target=target, _transform=t, _derivative=dt)


@dataclass(frozen=True)
class RadialTransportMap2D:
    """Radial transport of a standard 2-D normal onto a circular target.

    The map sends x to g(|x|) x / |x| where g matches radius CDFs:
    F_target(g(r)) = 1 - exp(-r^2 / 2).  Its Jacobian at x is symmetric
    positive definite with eigenvalues g'(r) and g(r)/r.
    """

    target: SourceModel
    _g: Callable[[np.ndarray], np.ndarray]
    _gprime: Callable[[np.ndarray], np.ndarray]

    def radial_map(self, r) -> np.ndarray:
        return self._g(np.asarray(r, dtype=float))

    def radial_derivative(self, r) -> np.ndarray:
        return self._gprime(np.asarray(r, dtype=float))

    def transform(self, points) -> np.ndarray:
        pts = np.asarray(points, dtype=float)
        single = pts.ndim == 1
        pts = np.atleast_2d(pts)
        r = np.linalg.norm(pts, axis=1)
        safe = np.maximum(r, 1e-300)
        factor = np.where(r > 0, self._g(safe) / safe, self._gprime(np.zeros_like(r)))
        out = pts * factor[:, None]
        return out[0] if single else out

    def jacobian(self, point) -> np.ndarray:
        x = np.asarray(point, dtype=float)
        r = float(np.linalg.norm(x))
        if r == 0.0:
            return float(self._gprime(np.array(0.0))) * np.eye(2)
        u = (x / r)[:, None]
        proj = u @ u.T
        gp = float(self._gprime(np.array(r)))
        ratio = float(self._g(np.array(r))) / r
        return gp * proj + ratio * (np.eye(2) - proj)


def radial_transport(target: SourceModel) -> RadialTransportMap2D:
    """Radial transport onto a circular complex target.

    For the circular Gaussian with E|X|^2 = sigma^2 the map is the linear
    g(r) = sigma r / sqrt(2); for the uniform disk of radius R it is
    g(r) = R sqrt(1 - exp(-r^2 / 2)).

    Raises
    ------
    NotCircular
        If the target is not a circular complex family.
    """
    if target.field != "complex":
        raise NotCircular("radial transport requires a circular complex target")
    p = target.params
    if target.family == "complex_circular_gaussian":
        slope = p["sigma"] / math.sqrt(2.0)

        def g(r):
            return slope * r

        def gp(r):
            return np.full_like(np.asarray(r, dtype=float), slope)

    elif target.family == "complex_uniform_disk":
        R = p["radius"]

        def g(r):
            return R * np.sqrt(-np.expm1(-0.5 * r * r))

        def gp(r):
            r = np.asarray(r, dtype=float)
            base = np.sqrt(np.maximum(-np.expm1(-0.5 * r * r), 1e-300))
            out = R * r * np.exp(-0.5 * r * r) / (2.0 * base)
            # Limit R / sqrt(2) at r -> 0.
            return np.where(r < 1e-8, R / math.sqrt(2.0), out)

    else:
        raise NotCircular(f"family {target.family!r} is not circular")

    return RadialTransportMap2D(target=target, _g=g, _gprime=gp)


def transport_log_derivative_expectation(tmap: TransportMap1D, n_samples: int, seed: int) -> float:
    """Monte Carlo estimate of E[log T'(Z)] for Z ~ N(0, 1).

    Equals h(target) - h(N(0, 1)) in expectation; in particular it vanishes
    when the target entropy matches the standard normal entropy, and is
    exactly zero for the standard normal target itself.
    """
    if n_samples < 1:
        raise ValueError("n_samples must be positive")
    rng = generator(seed, 0)
    z = ndtri(uniform_open(rng, n_samples))
    return float(np.mean(np.log(tmap.derivative(z))))
