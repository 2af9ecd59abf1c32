"""Fixed Gaussian RBF input layer and its closed-form spatial derivatives.

Each kernel is a 2D Gaussian with center (alpha*, beta*) and per-axis widths
(sigma_x, sigma_y), stored together with the equivalent network parameters

    m = 1/(sqrt(2) sigma_x),  n = 1/(sqrt(2) sigma_y),
    alpha = -m alpha*,        beta = -n beta*,

so that phi(z) = exp(-z^2) with z^2 = (m x + alpha)^2 + (n y + beta)^2 is the
Gaussian itself. For the space-time Burgers problems the second coordinate is
time and the same formulas apply unchanged.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from pielm.ioutil import fmt

SQRT2 = np.sqrt(2.0)


class InvalidWidthError(ValueError):
    """A kernel width is zero or negative."""


@dataclass(frozen=True)
class KernelSet:
    """Immutable kernel bank shared by all output fields of a solve."""

    alpha_star: np.ndarray
    beta_star: np.ndarray
    sigma_x: np.ndarray
    sigma_y: np.ndarray
    m: np.ndarray = field(init=False)
    n: np.ndarray = field(init=False)
    alpha: np.ndarray = field(init=False)
    beta: np.ndarray = field(init=False)

    def __post_init__(self):
        for name in ("alpha_star", "beta_star", "sigma_x", "sigma_y"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n_k = len(self.alpha_star)
        if n_k < 1:
            raise ValueError("need at least one kernel")
        if not (len(self.beta_star) == len(self.sigma_x) == len(self.sigma_y) == n_k):
            raise ValueError("kernel parameter arrays must have equal length")
        if np.any(self.sigma_x <= 0) or np.any(self.sigma_y <= 0):
            raise InvalidWidthError("kernel widths must be positive")
        m = 1.0 / (SQRT2 * self.sigma_x)
        n = 1.0 / (SQRT2 * self.sigma_y)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "alpha", -m * self.alpha_star)
        object.__setattr__(self, "beta", -n * self.beta_star)

    @classmethod
    def from_gaussians(cls, centers, sigma_x, sigma_y=None) -> "KernelSet":
        """Build from centers (N,2) and per-kernel widths."""
        centers = np.atleast_2d(np.asarray(centers, dtype=float))
        sigma_x = np.broadcast_to(np.asarray(sigma_x, dtype=float), (len(centers),)).copy()
        if sigma_y is None:
            sigma_y = sigma_x.copy()
        sigma_y = np.broadcast_to(np.asarray(sigma_y, dtype=float), (len(centers),)).copy()
        return cls(centers[:, 0], centers[:, 1], sigma_x, sigma_y)

    @property
    def n_kernels(self) -> int:
        return len(self.alpha_star)

    @property
    def centers(self) -> np.ndarray:
        return np.column_stack([self.alpha_star, self.beta_star])

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("alpha_star,beta_star,sigma_x,sigma_y\n")
            for a, b, sx, sy in zip(self.alpha_star, self.beta_star, self.sigma_x, self.sigma_y):
                fh.write(f"{fmt(a)},{fmt(b)},{fmt(sx)},{fmt(sy)}\n")

    @classmethod
    def from_csv(cls, path) -> "KernelSet":
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return cls(data[:, 0], data[:, 1], data[:, 2], data[:, 3])


@dataclass(frozen=True)
class FeatureBlock:
    """Feature matrix and derivatives, one row per point, one column per kernel."""

    phi: np.ndarray
    dphi_dx: np.ndarray
    dphi_dy: np.ndarray
    d2phi_dx2: np.ndarray
    d2phi_dy2: np.ndarray

    @property
    def laplacian(self) -> np.ndarray:
        return self.d2phi_dx2 + self.d2phi_dy2


def eval_features(kernels: KernelSet, points) -> FeatureBlock:
    """Evaluate phi and its first/second derivatives at each point.

    With w = m x + alpha and s = n y + beta:
        phi      = exp(-(w^2 + s^2))
        dphi/dx  = -2 phi m w
        dphi/dy  = -2 phi n s
        d2phi/dx2 = -2 phi m^2 (1 - 2 w^2)
        d2phi/dy2 = -2 phi n^2 (1 - 2 s^2)
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    x = pts[:, 0][:, None]
    y = pts[:, 1][:, None]
    m = kernels.m[None, :]
    n = kernels.n[None, :]
    w = m * x + kernels.alpha[None, :]
    s = n * y + kernels.beta[None, :]
    phi = np.exp(-(w**2 + s**2))
    return FeatureBlock(
        phi=phi,
        dphi_dx=-2.0 * phi * m * w,
        dphi_dy=-2.0 * phi * n * s,
        d2phi_dx2=-2.0 * phi * m**2 * (1.0 - 2.0 * w**2),
        d2phi_dy2=-2.0 * phi * n**2 * (1.0 - 2.0 * s**2),
    )


def eval_phi(kernels: KernelSet, points) -> np.ndarray:
    """Feature matrix alone, when no derivatives are needed."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    w = kernels.m[None, :] * pts[:, 0][:, None] + kernels.alpha[None, :]
    s = kernels.n[None, :] * pts[:, 1][:, None] + kernels.beta[None, :]
    return np.exp(-(w**2 + s**2))


def predict_field(kernels: KernelSet, weights, points) -> np.ndarray:
    """Network output Phi @ c at the given points."""
    weights = np.asarray(weights, dtype=float)
    if weights.shape != (kernels.n_kernels,):
        raise ValueError(
            f"weight vector length {weights.shape} does not match {kernels.n_kernels} kernels"
        )
    return eval_phi(kernels, points) @ weights


@dataclass
class FieldWeights:
    """Trained outer-layer weights bound to the kernel set they were fit with."""

    c_u: np.ndarray
    kernels: KernelSet
    c_v: np.ndarray | None = None
    c_p: np.ndarray | None = None
    label: str = ""

    def __post_init__(self):
        n_k = self.kernels.n_kernels
        for name in ("c_u", "c_v", "c_p"):
            c = getattr(self, name)
            if c is not None:
                c = np.asarray(c, dtype=float)
                if c.shape != (n_k,):
                    raise ValueError(f"{name} must have length {n_k}")
                setattr(self, name, c)

    def u(self, points) -> np.ndarray:
        return predict_field(self.kernels, self.c_u, points)

    def v(self, points) -> np.ndarray:
        if self.c_v is None:
            raise ValueError("no v weights on this solution")
        return predict_field(self.kernels, self.c_v, points)

    def p(self, points) -> np.ndarray:
        if self.c_p is None:
            raise ValueError("no p weights on this solution")
        return predict_field(self.kernels, self.c_p, points)

    def velocity(self, points) -> tuple[np.ndarray, np.ndarray]:
        return self.u(points), self.v(points)

    def is_finite(self) -> bool:
        for c in (self.c_u, self.c_v, self.c_p):
            if c is not None and not np.all(np.isfinite(c)):
                return False
        return True

    def weights_to_csv(self, path_prefix) -> None:
        """One single-column CSV per field: <prefix>_u.csv etc."""
        for name, c in (("u", self.c_u), ("v", self.c_v), ("p", self.c_p)):
            if c is None:
                continue
            with open(f"{path_prefix}_{name}.csv", "w") as fh:
                fh.write(f"c_{name}\n")
                for val in c:
                    fh.write(f"{fmt(val)}\n")
