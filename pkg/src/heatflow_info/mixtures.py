"""Weighted Gaussian / point-mass mixtures in R^n and their heat-flow evolution.

A model is

    rho = sum_i p_i N(a_i, s_i I),   p_i > 0, sum p_i = 1, s_i >= 0,

with s_i = 0 meaning a point mass at a_i.  Adding independent N(0, tI) noise
(the heat flow at time t) maps s_i -> s_i + t and leaves weights and centers
unchanged, so the family is closed under the flow.

Every density-path computation runs in log space (log-sum-exp): components at
separations of tens of standard deviations underflow otherwise, and that is
precisely the regime the small-time analysis operates in.

Only isotropic per-component covariance s_i * I is represented.  Anisotropic
components are a non-goal: every closed form and threshold implemented
downstream is stated for isotropic components.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp, softmax

from .errors import (
    InvalidArgumentError,
    ModelParseError,
    SingularDensityError,
    UnsupportedModelError,
)

_LOG_2PI = math.log(2.0 * math.pi)
_WEIGHT_TOL = 1e-12


@dataclass(frozen=True)
class MixtureModel:
    """Immutable mixture of isotropic Gaussians / point masses in R^dim."""

    dim: int
    weights: np.ndarray   # (k,)
    centers: np.ndarray   # (k, dim)
    variances: np.ndarray  # (k,)

    def __post_init__(self) -> None:
        dim = int(self.dim)
        if dim < 1:
            raise InvalidArgumentError("dim must be >= 1")
        weights = np.atleast_1d(np.asarray(self.weights, dtype=float))
        centers = np.asarray(self.centers, dtype=float)
        if centers.ndim == 1:
            centers = centers[:, None] if dim == 1 else centers[None, :]
        variances = np.atleast_1d(np.asarray(self.variances, dtype=float))
        k = weights.size
        if k < 1:
            raise InvalidArgumentError("at least one component required")
        if centers.shape != (k, dim):
            raise InvalidArgumentError(
                f"centers must have shape ({k}, {dim}), got {centers.shape}"
            )
        if variances.shape != (k,):
            raise InvalidArgumentError("variances must match the number of components")
        if not (weights > 0).all():
            raise InvalidArgumentError("weights must be strictly positive")
        if abs(weights.sum() - 1.0) > _WEIGHT_TOL:
            raise InvalidArgumentError("weights must sum to 1 within 1e-12")
        if not (variances >= 0).all():
            raise InvalidArgumentError("variances must be nonnegative")

        weights, centers, variances = _merge_duplicates(weights, centers, variances)
        for arr in (weights, centers, variances):
            arr.flags.writeable = False
        object.__setattr__(self, "dim", dim)
        object.__setattr__(self, "weights", weights)
        object.__setattr__(self, "centers", centers)
        object.__setattr__(self, "variances", variances)

    # -- classification ----------------------------------------------------

    @property
    def k(self) -> int:
        return self.weights.size

    @property
    def is_point_mass(self) -> bool:
        return bool((self.variances == 0).all())

    @property
    def is_smooth(self) -> bool:
        return bool((self.variances > 0).all())

    @property
    def has_shared_variance(self) -> bool:
        return bool((self.variances == self.variances[0]).all())

    def symmetric_pair(self) -> tuple[float, float] | None:
        """(|a|^2, s) for a two-component equal-weight equal-variance mixture.

        Such a mixture is a translate of (1/2) N(-a, sI) + (1/2) N(a, sI) with
        a = (c_1 - c_0) / 2; all functionals computed downstream are
        translation invariant, so the offset is irrelevant.
        """
        if self.k != 2:
            return None
        if abs(self.weights[0] - 0.5) > _WEIGHT_TOL:
            return None
        if self.variances[0] != self.variances[1]:
            return None
        half_gap = 0.5 * (self.centers[1] - self.centers[0])
        return float(half_gap @ half_gap), float(self.variances[0])

    def collinear_projection(self) -> "MixtureModel | None":
        """1-D model with the same weights/variances whose centers are the
        projections of this model's centers onto their common line.

        Returns None when the centers are not collinear or the variance is
        not shared across components (the orthogonal directions only factor
        out of the density for a shared variance).  For dim == 1 returns self.
        """
        if not self.has_shared_variance:
            return None
        if self.dim == 1:
            return self
        origin = self.centers[0]
        deltas = self.centers - origin
        norms = np.linalg.norm(deltas, axis=1)
        scale = float(norms.max())
        if scale == 0.0:
            return MixtureModel(1, self.weights, np.zeros(self.k), self.variances)
        direction = deltas[int(np.argmax(norms))] / scale
        coords = deltas @ direction
        residual = deltas - coords[:, None] * direction[None, :]
        if float(np.abs(residual).max()) > 1e-9 * scale:
            return None
        return MixtureModel(1, self.weights, coords, self.variances)

    # -- constructors -------------------------------------------------------

    @staticmethod
    def single_gaussian(mean, variance: float, dim: int = 1) -> "MixtureModel":
        mean = np.atleast_1d(np.asarray(mean, dtype=float))
        if dim == 1 and mean.size == 1:
            centers = mean.reshape(1, 1)
        else:
            centers = mean.reshape(1, dim)
        return MixtureModel(dim, np.array([1.0]), centers, np.array([float(variance)]))

    @staticmethod
    def point_mixture(weights, centers, dim: int | None = None) -> "MixtureModel":
        centers = np.asarray(centers, dtype=float)
        if centers.ndim == 1:
            centers = centers[:, None]
        if dim is None:
            dim = centers.shape[1]
        weights = np.asarray(weights, dtype=float)
        return MixtureModel(dim, weights, centers, np.zeros(weights.size))


def _merge_duplicates(weights, centers, variances):
    """Merge components with identical (center, variance), summing weights."""
    k = weights.size
    keep: list[int] = []
    merged_into: dict[int, int] = {}
    for i in range(k):
        dup = next(
            (
                j
                for j in keep
                if variances[j] == variances[i] and (centers[j] == centers[i]).all()
            ),
            None,
        )
        if dup is None:
            keep.append(i)
        else:
            merged_into[i] = dup
    if not merged_into:
        return weights.copy(), centers.copy(), variances.copy()
    warnings.warn(
        f"merged {len(merged_into)} duplicate mixture component(s)",
        stacklevel=4,
    )
    new_w = weights[keep].copy()
    for i, j in merged_into.items():
        new_w[keep.index(j)] += weights[i]
    return new_w, centers[keep].copy(), variances[keep].copy()


# -- heat flow ---------------------------------------------------------------


def heat_evolve(model: MixtureModel, t: float) -> MixtureModel:
    """Mixture of X_t = X_0 + sqrt(t) Z: same weights/centers, s_i -> s_i + t."""
    if t < 0:
        raise InvalidArgumentError("evolution time must be nonnegative")
    if t == 0:
        return model
    return MixtureModel(model.dim, model.weights, model.centers, model.variances + t)


# -- density and derivatives --------------------------------------------------


def _require_smooth(model: MixtureModel) -> None:
    if not model.is_smooth:
        raise SingularDensityError(
            "density undefined: mixture has a zero-variance component"
        )


def _as_points(model: MixtureModel, y) -> np.ndarray:
    """Coerce y to shape (m, dim)."""
    arr = np.asarray(y, dtype=float)
    if arr.ndim == 0:
        if model.dim != 1:
            raise InvalidArgumentError("scalar point only valid for dim == 1")
        return arr.reshape(1, 1)
    if arr.ndim == 1:
        if model.dim == 1:
            return arr[:, None]
        if arr.size == model.dim:
            return arr[None, :]
        raise InvalidArgumentError(f"point has size {arr.size}, expected {model.dim}")
    return arr


def component_log_weights(model: MixtureModel, points: np.ndarray) -> np.ndarray:
    """(m, k) matrix: log p_i + log N(y_j; a_i, s_i I)."""
    _require_smooth(model)
    d2 = ((points[:, None, :] - model.centers[None, :, :]) ** 2).sum(axis=2)
    n = model.dim
    return (
        np.log(model.weights)[None, :]
        - 0.5 * n * (_LOG_2PI + np.log(model.variances))[None, :]
        - 0.5 * d2 / model.variances[None, :]
    )


def log_density(model: MixtureModel, y) -> float:
    """log rho(y) via log-sum-exp over components."""
    pts = _as_points(model, y)
    return float(logsumexp(component_log_weights(model, pts), axis=1)[0])


def log_density_batch(model: MixtureModel, ys: np.ndarray) -> np.ndarray:
    """Vectorized log rho over points; ys is (m,) for dim 1 or (m, dim)."""
    pts = _as_points(model, ys)
    return logsumexp(component_log_weights(model, pts), axis=1)


def density(model: MixtureModel, y) -> float:
    """rho(y) = sum_i p_i (2 pi s_i)^(-n/2) exp(-|y - a_i|^2 / (2 s_i))."""
    return math.exp(log_density(model, y))


def component_posterior(model: MixtureModel, y) -> np.ndarray:
    """Posterior component weights w_i(y) proportional to p_i N(y; a_i, s_i I)."""
    pts = _as_points(model, y)
    return softmax(component_log_weights(model, pts), axis=1)[0]


def log_density_grad(model: MixtureModel, y) -> np.ndarray:
    """Score grad log rho(y) = sum_i w_i(y) (a_i - y) / s_i, shape (dim,)."""
    pts = _as_points(model, y)
    w = softmax(component_log_weights(model, pts), axis=1)[0]
    g = (model.centers - pts[0][None, :]) / model.variances[:, None]
    return w @ g


def log_density_hessian(model: MixtureModel, y) -> np.ndarray:
    """Hessian of log rho at y:

        -sum_i w_i / s_i * I + Cov_w((a_i - y) / s_i),

    the covariance taken over the posterior weights w(y).  Symmetric (dim, dim).
    """
    pts = _as_points(model, y)
    w = softmax(component_log_weights(model, pts), axis=1)[0]
    g = (model.centers - pts[0][None, :]) / model.variances[:, None]
    mean_g = w @ g
    cov = (g.T * w) @ g - np.outer(mean_g, mean_g)
    h = cov - float(w @ (1.0 / model.variances)) * np.eye(model.dim)
    return 0.5 * (h + h.T)


def score_batch(model: MixtureModel, ys: np.ndarray) -> np.ndarray:
    """(log rho)'(y) over a batch of scalar points; dim == 1 only."""
    if model.dim != 1:
        raise UnsupportedModelError("score_batch requires dim == 1")
    pts = _as_points(model, ys)
    w = softmax(component_log_weights(model, pts), axis=1)
    g = (model.centers[:, 0][None, :] - pts[:, 0][:, None]) / model.variances[None, :]
    return (w * g).sum(axis=1)


def log_density_hessian_batch(model: MixtureModel, ys: np.ndarray) -> np.ndarray:
    """(log rho)''(y) over a batch of scalar points; dim == 1 only."""
    if model.dim != 1:
        raise UnsupportedModelError("log_density_hessian_batch requires dim == 1")
    pts = _as_points(model, ys)
    w = softmax(component_log_weights(model, pts), axis=1)
    g = (model.centers[:, 0][None, :] - pts[:, 0][:, None]) / model.variances[None, :]
    mean_g = (w * g).sum(axis=1)
    var_g = (w * g * g).sum(axis=1) - mean_g * mean_g
    return var_g - (w / model.variances[None, :]).sum(axis=1)


# -- posterior over initial positions -----------------------------------------


def posterior_weights(initial: MixtureModel, t: float, y) -> np.ndarray:
    """Weights of the conditional law of the initial component given X_t = y.

    For a point-mass initial this is the posterior of X_0 itself:
    w_i(y) proportional to p_i exp(-|y - a_i|^2 / (2t)).  For a Gaussian
    initial it is the posterior over components, not the law of X_0.
    """
    if t <= 0:
        raise InvalidArgumentError("t must be positive")
    return component_posterior(heat_evolve(initial, t), y)


def posterior_weights_batch(initial: MixtureModel, t: float, ys: np.ndarray) -> np.ndarray:
    if t <= 0:
        raise InvalidArgumentError("t must be positive")
    evolved = heat_evolve(initial, t)
    pts = _as_points(evolved, ys)
    return softmax(component_log_weights(evolved, pts), axis=1)


def conditional_cov(initial: MixtureModel, t: float, y) -> np.ndarray:
    """Covariance matrix of the posterior law of X_0 given X_t = y.

    Only defined here for point-mass initial data, where the posterior is the
    discrete law over centers; for Gaussian components the posterior is a
    distribution over R^n and is not represented.
    """
    if not initial.is_point_mass:
        raise UnsupportedModelError("conditional_cov requires a point-mass initial model")
    w = posterior_weights(initial, t, y)
    mean = w @ initial.centers
    centered = initial.centers - mean[None, :]
    cov = (centered.T * w) @ centered
    return 0.5 * (cov + cov.T)


# -- moments -------------------------------------------------------------------


@dataclass(frozen=True)
class MixtureStats:
    """Closed-form moments and discrete descriptors of a mixture."""

    mean: np.ndarray
    variance: float          # E |X - mu|^2
    fourth_moment: float     # E |X - mu|^4
    diameter: float          # support diameter; inf unless all components are atoms
    min_separation: float    # min_{i != j} |a_i - a_j|; inf for k = 1
    p_inf: float             # max_{i,j} p_i / p_j
    discrete_entropy: float  # -sum p_i log p_i


def center_diameter(model: MixtureModel) -> float:
    """Largest pairwise distance between component centers (0 for k = 1)."""
    if model.k == 1:
        return 0.0
    diffs = model.centers[:, None, :] - model.centers[None, :, :]
    return float(np.sqrt((diffs**2).sum(axis=2)).max())


def stats(model: MixtureModel) -> MixtureStats:
    """Exact moments: E|X - mu|^2 and E|X - mu|^4 expand over components using
    E|Z|^2 = n and E|Z|^4 = n(n + 2) for the n-dimensional standard normal."""
    p = model.weights
    s = model.variances
    n = model.dim
    mean = p @ model.centers
    d2 = ((model.centers - mean[None, :]) ** 2).sum(axis=1)
    variance = float(p @ (d2 + n * s))
    fourth = float(p @ (d2 * d2 + (4.0 + 2.0 * n) * s * d2 + n * (n + 2.0) * s * s))
    if model.k == 1:
        min_sep = math.inf
    else:
        diffs = model.centers[:, None, :] - model.centers[None, :, :]
        dist = np.sqrt((diffs**2).sum(axis=2))
        min_sep = float(dist[~np.eye(model.k, dtype=bool)].min())
    diameter = center_diameter(model) if model.is_point_mass else math.inf
    p_inf = float(p.max() / p.min())
    entropy = float(-(p * np.log(p)).sum())
    return MixtureStats(mean, variance, fourth, diameter, min_sep, p_inf, entropy)


# -- model file format ---------------------------------------------------------

_MODEL_KEYS = ("dim", "weights", "centers", "variances")


def _parse_float(token: str, line_no: int, col: int) -> float:
    try:
        return float(token)
    except ValueError:
        raise ModelParseError(f"bad number {token.strip()!r}", line_no, col) from None


def parse_model_text(text: str) -> MixtureModel:
    """Parse the plain-text model format.

    Grammar (one key=value per line, '#' starts a comment):

        dim=1
        weights=0.5,0.5
        centers=-1;1          # semicolon-separated points, comma within a point
        variances=0,0
    """
    raw: dict[str, tuple[str, int, int]] = {}
    for line_no, line in enumerate(text.splitlines(), start=1):
        stripped = line.split("#", 1)[0].rstrip()
        if not stripped.strip():
            continue
        if "=" not in stripped:
            raise ModelParseError("expected key=value", line_no, 1)
        key, value = stripped.split("=", 1)
        key = key.strip()
        col = stripped.index("=") + 2
        if key not in _MODEL_KEYS:
            raise ModelParseError(f"unknown key {key!r}", line_no, 1)
        if key in raw:
            raise ModelParseError(f"duplicate key {key!r}", line_no, 1)
        raw[key] = (value.strip(), line_no, col)
    for key in _MODEL_KEYS:
        if key not in raw:
            raise ModelParseError(f"missing key {key!r}", len(text.splitlines()) + 1, 1)

    dim_text, dim_line, dim_col = raw["dim"]
    try:
        dim = int(dim_text)
    except ValueError:
        raise ModelParseError(f"bad integer {dim_text!r}", dim_line, dim_col) from None

    def parse_list(key: str) -> list[float]:
        value, line_no, col = raw[key]
        return [_parse_float(tok, line_no, col) for tok in value.split(",")]

    weights = parse_list("weights")
    variances = parse_list("variances")
    value, line_no, col = raw["centers"]
    centers = []
    for point_text in value.split(";"):
        point = [_parse_float(tok, line_no, col) for tok in point_text.split(",")]
        if len(point) != dim:
            raise ModelParseError(
                f"center {point_text.strip()!r} has {len(point)} coordinates, expected {dim}",
                line_no,
                col,
            )
        centers.append(point)
    if not (len(weights) == len(centers) == len(variances)):
        raise ModelParseError(
            f"component counts differ: {len(weights)} weights, "
            f"{len(centers)} centers, {len(variances)} variances",
            line_no,
            1,
        )
    try:
        return MixtureModel(dim, np.array(weights), np.array(centers), np.array(variances))
    except InvalidArgumentError as exc:
        raise ModelParseError(str(exc), line_no, 1) from exc


def load_model(path) -> MixtureModel:
    with open(path, encoding="utf-8") as fh:
        return parse_model_text(fh.read())
