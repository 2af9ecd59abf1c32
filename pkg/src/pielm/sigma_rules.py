"""Physically-motivated kernel width selection.

Widths come from the local length scale each kernel has to resolve: shock
bands get narrow kernels, near-wall kernels shrink with wall distance, and
smooth problems use a constant width.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from pielm.geometry import CavitySquare, Domain, StenoticChannel

# distance from the cavity center to a corner; the wall-distance ratio is
# capped at 1 so widths stay inside [0.2, 0.6]
CAVITY_L_MAX = 0.7071


class CenterOutsideDomainError(ValueError):
    pass


@dataclass(frozen=True)
class BurgersShockSigma:
    """Piecewise-uniform draws: narrow inside the shock band [x_left, x_right].

    sigma_t is drawn relative to the time-block size. x_left=None disables
    the band (every kernel uses the wide outside range).
    """

    x_left: float | None
    x_right: float | None
    dt_block: float
    inside_range: tuple[float, float] = (0.01, 0.04)
    outside_range: tuple[float, float] = (0.02, 0.6)
    t_range_factor: tuple[float, float] = (0.4, 0.6)

    def __post_init__(self):
        if self.x_left is not None and not (self.x_left < self.x_right):
            raise ValueError("need x_left < x_right")
        if self.dt_block <= 0:
            raise ValueError("dt_block must be positive")


@dataclass(frozen=True)
class CavityWallSigma:
    base: float = 0.2
    gain: float = 0.4


@dataclass(frozen=True)
class StenosisWallSigma:
    throat_half_width: float = 0.06
    offset: float = 0.02

    def __post_init__(self):
        if self.throat_half_width <= 0:
            raise ValueError("throat_half_width must be positive")


@dataclass(frozen=True)
class ConstantSigma:
    sigma: float

    def __post_init__(self):
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")


SigmaRule = BurgersShockSigma | CavityWallSigma | StenosisWallSigma | ConstantSigma


def assign_sigmas(rule: SigmaRule, centers, domain: Domain | None = None, rng_seed=0):
    """Per-kernel (sigma_x, sigma_y) arrays for the given centers."""
    centers = np.atleast_2d(np.asarray(centers, dtype=float))
    if domain is not None and not domain.contains(centers).all():
        raise CenterOutsideDomainError("kernel centers must lie inside the domain")
    rng = rng_seed if isinstance(rng_seed, np.random.Generator) else np.random.default_rng(rng_seed)

    if isinstance(rule, ConstantSigma):
        s = np.full(len(centers), rule.sigma)
        return s, s.copy()

    if isinstance(rule, BurgersShockSigma):
        n = len(centers)
        sx = rng.uniform(*rule.outside_range, n)
        if rule.x_left is not None:
            inside = (centers[:, 0] >= rule.x_left) & (centers[:, 0] <= rule.x_right)
            sx_in = rng.uniform(*rule.inside_range, n)
            sx = np.where(inside, sx_in, sx)
        lo, hi = rule.t_range_factor
        st = rng.uniform(lo * rule.dt_block, hi * rule.dt_block, n)
        return sx, st

    if isinstance(rule, CavityWallSigma):
        if domain is not None and not isinstance(domain, CavitySquare):
            raise ValueError("cavity sigma rule needs the cavity domain")
        l_min = _cavity_wall_distance(centers)
        ratio = np.minimum(l_min / CAVITY_L_MAX, 1.0)
        s = rule.base + rule.gain * ratio
        return s, s.copy()

    if isinstance(rule, StenosisWallSigma):
        if not isinstance(domain, StenoticChannel):
            raise ValueError("stenosis sigma rule needs the stenotic channel domain")
        l_min = wall_distance(domain, centers)
        d_c = rule.throat_half_width
        s = np.minimum(d_c, rule.offset + d_c * (l_min / d_c))
        return s, s.copy()

    raise TypeError(f"unknown sigma rule {type(rule).__name__}")


def _cavity_wall_distance(centers):
    x, y = centers[:, 0], centers[:, 1]
    return np.minimum.reduce([x, 1.0 - x, y, 1.0 - y])


def wall_distance(domain: StenoticChannel, centers, n_polyline: int = 2001):
    """Minimum distance from each point to the channel walls (polyline query)."""
    wall = domain.wall_polyline(n_polyline)
    pts = np.atleast_2d(np.asarray(centers, dtype=float))
    # symmetric walls: fold onto the upper half plane
    folded = np.column_stack([pts[:, 0], np.abs(pts[:, 1])])
    return _polyline_distance(folded, wall)


def _polyline_distance(points, polyline):
    a = polyline[:-1]
    b = polyline[1:]
    ab = b - a
    ab_len2 = np.einsum("ij,ij->i", ab, ab)
    out = np.empty(len(points))
    for i, p in enumerate(points):
        ap = p[None, :] - a
        t = np.clip(np.einsum("ij,ij->i", ap, ab) / ab_len2, 0.0, 1.0)
        proj = a + t[:, None] * ab
        d2 = np.einsum("ij,ij->i", (p[None, :] - proj), (p[None, :] - proj))
        out[i] = np.sqrt(d2.min())
    return out
