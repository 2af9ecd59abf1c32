"""Computational domains, collocation sampling and RBF center layouts.

Domains know how to test membership; sampling routines produce PointClouds
(interior collocation points plus tagged boundary points) and kernel-center
layouts, including the gradient-driven shock-window refinement used by the
viscous Burgers cases.
"""

from __future__ import annotations

import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field

import numpy as np

from pielm.ioutil import fmt

MEMBERSHIP_TOL = 1e-12


class DomainMismatchError(ValueError):
    """Operation applied to a domain shape it does not support."""


class InvalidCountError(ValueError):
    """Point or kernel count below the minimum the operation needs."""


# ---------------------------------------------------------------------------
# boundary condition tags


@dataclass(frozen=True)
class BCTag:
    """Boundary condition marker carried by each boundary point.

    ``values`` holds the prescribed data where the condition needs any
    (Dirichlet values, lid velocity, inlet velocity); conditions that are
    purely structural (outlet, initial_profile) carry none.
    """

    kind: str
    values: tuple[float, ...] = ()

    KINDS = (
        "dirichlet_scalar",
        "dirichlet_vector",
        "no_slip",
        "moving_lid",
        "inlet_profile",
        "outlet",
        "pressure_pin",
        "initial_profile",
    )

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ValueError(f"unknown boundary tag kind: {self.kind!r}")

    def encode(self) -> str:
        if not self.values:
            return self.kind
        return self.kind + ":" + ":".join(repr(float(v)) for v in self.values)

    @classmethod
    def decode(cls, text: str) -> "BCTag":
        parts = text.split(":")
        return cls(parts[0], tuple(float(p) for p in parts[1:]))


def dirichlet_scalar(g: float) -> BCTag:
    return BCTag("dirichlet_scalar", (float(g),))


def dirichlet_vector(u: float, v: float) -> BCTag:
    return BCTag("dirichlet_vector", (float(u), float(v)))


def no_slip() -> BCTag:
    return BCTag("no_slip")


def moving_lid(u: float = 1.0, v: float = 0.0) -> BCTag:
    return BCTag("moving_lid", (float(u), float(v)))


def inlet_profile(u: float, v: float = 0.0) -> BCTag:
    return BCTag("inlet_profile", (float(u), float(v)))


def outlet() -> BCTag:
    return BCTag("outlet")


def pressure_pin(g: float = 0.0) -> BCTag:
    return BCTag("pressure_pin", (float(g),))


def initial_profile() -> BCTag:
    return BCTag("initial_profile")


# ---------------------------------------------------------------------------
# domains


class Domain(ABC):
    """A 2D computational domain with membership and boundary predicates."""

    @abstractmethod
    def contains(self, xy: np.ndarray, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        """True for points inside or on the boundary, within tol."""

    @abstractmethod
    def on_boundary(self, xy: np.ndarray, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        """True for points on the boundary, within tol."""

    def strictly_inside(self, xy: np.ndarray, tol: float = MEMBERSHIP_TOL) -> np.ndarray:
        return self.contains(xy, tol) & ~self.on_boundary(xy, tol)


@dataclass(frozen=True)
class Rectangle(Domain):
    x_min: float
    x_max: float
    y_min: float
    y_max: float

    def __post_init__(self):
        if not (self.x_min < self.x_max and self.y_min < self.y_max):
            raise ValueError("rectangle needs x_min < x_max and y_min < y_max")

    def contains(self, xy, tol=MEMBERSHIP_TOL):
        xy = np.atleast_2d(xy)
        return (
            (xy[:, 0] >= self.x_min - tol)
            & (xy[:, 0] <= self.x_max + tol)
            & (xy[:, 1] >= self.y_min - tol)
            & (xy[:, 1] <= self.y_max + tol)
        )

    def on_boundary(self, xy, tol=MEMBERSHIP_TOL):
        xy = np.atleast_2d(xy)
        on_edge = (
            (np.abs(xy[:, 0] - self.x_min) <= tol)
            | (np.abs(xy[:, 0] - self.x_max) <= tol)
            | (np.abs(xy[:, 1] - self.y_min) <= tol)
            | (np.abs(xy[:, 1] - self.y_max) <= tol)
        )
        return on_edge & self.contains(xy, tol)


@dataclass(frozen=True)
class UnitDisk(Domain):
    def contains(self, xy, tol=MEMBERSHIP_TOL):
        xy = np.atleast_2d(xy)
        return xy[:, 0] ** 2 + xy[:, 1] ** 2 <= 1.0 + tol

    def on_boundary(self, xy, tol=MEMBERSHIP_TOL):
        xy = np.atleast_2d(xy)
        return np.abs(xy[:, 0] ** 2 + xy[:, 1] ** 2 - 1.0) <= tol


@dataclass(frozen=True)
class CavitySquare(Domain):
    """Unit square cavity [0,1]^2 with a moving top lid."""

    def contains(self, xy, tol=MEMBERSHIP_TOL):
        return Rectangle(0.0, 1.0, 0.0, 1.0).contains(xy, tol)

    def on_boundary(self, xy, tol=MEMBERSHIP_TOL):
        return Rectangle(0.0, 1.0, 0.0, 1.0).on_boundary(xy, tol)


@dataclass(frozen=True)
class StenoticChannel(Domain):
    """Symmetric constricted channel along y=0.

    Straight inlet/outlet sections flank a cosine-ramp constriction that
    narrows the half-width from ``inlet_half_width`` to ``throat_half_width``
    over the central ``ramp_length`` of the channel.
    """

    length: float = 1.0
    inlet_half_width: float = 0.1
    throat_half_width: float = 0.06
    ramp_length: float = field(default=0.0)

    def __post_init__(self):
        if self.ramp_length == 0.0:
            object.__setattr__(self, "ramp_length", 0.6 * self.length)
        if not (0.0 < self.throat_half_width < self.inlet_half_width):
            raise ValueError("need 0 < throat_half_width < inlet_half_width")
        straight = (self.length - self.ramp_length) / 2.0
        if straight < 0:
            raise ValueError("ramp_length exceeds channel length")

    def wall_half_width(self, x):
        """Channel half-width at station x (vectorized)."""
        x = np.asarray(x, dtype=float)
        mid = self.length / 2.0
        depth = (self.inlet_half_width - self.throat_half_width) / 2.0
        ramp = self.ramp_length
        inside = np.abs(x - mid) <= ramp / 2.0
        w = np.full(x.shape, self.inlet_half_width)
        w = np.where(
            inside,
            self.inlet_half_width - depth * (1.0 + np.cos(2.0 * np.pi * (x - mid) / ramp)),
            w,
        )
        return w

    def contains(self, xy, tol=MEMBERSHIP_TOL):
        xy = np.atleast_2d(xy)
        wall = self.wall_half_width(xy[:, 0])
        return (
            (xy[:, 0] >= -tol)
            & (xy[:, 0] <= self.length + tol)
            & (np.abs(xy[:, 1]) <= wall + tol)
        )

    def on_boundary(self, xy, tol=MEMBERSHIP_TOL):
        xy = np.atleast_2d(xy)
        wall = self.wall_half_width(xy[:, 0])
        on_end = (np.abs(xy[:, 0]) <= tol) | (np.abs(xy[:, 0] - self.length) <= tol)
        on_wall = np.abs(np.abs(xy[:, 1]) - wall) <= tol
        return self.contains(xy, tol) & (on_end | on_wall)

    def wall_polyline(self, n: int = 2001) -> np.ndarray:
        """Dense sampling of the upper wall curve, for distance queries."""
        xs = np.linspace(0.0, self.length, n)
        return np.column_stack([xs, self.wall_half_width(xs)])


# ---------------------------------------------------------------------------
# point cloud


@dataclass
class PointCloud:
    """Interior collocation points plus tagged boundary points."""

    interior: np.ndarray  # (n, 2)
    boundary: np.ndarray  # (m, 2)
    tags: list[BCTag]

    def __post_init__(self):
        self.interior = np.atleast_2d(np.asarray(self.interior, dtype=float))
        self.boundary = np.atleast_2d(np.asarray(self.boundary, dtype=float))
        if self.interior.size == 0:
            self.interior = self.interior.reshape(0, 2)
        if self.boundary.size == 0:
            self.boundary = self.boundary.reshape(0, 2)
        if len(self.tags) != len(self.boundary):
            raise ValueError("one tag per boundary point required")

    @property
    def n_interior(self) -> int:
        return len(self.interior)

    @property
    def n_boundary(self) -> int:
        return len(self.boundary)

    def validate(self, domain: Domain, tol: float = MEMBERSHIP_TOL) -> None:
        """Check every point against the domain membership predicate."""
        if self.n_interior and not domain.strictly_inside(self.interior, tol).all():
            raise ValueError("interior points must lie strictly inside the domain")
        if self.n_boundary and not domain.on_boundary(self.boundary, tol).all():
            raise ValueError("boundary points must lie on the domain boundary")

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write("x,y,tag\n")
            for x, y in self.interior:
                fh.write(f"{fmt(x)},{fmt(y)},interior\n")
            for (x, y), tag in zip(self.boundary, self.tags):
                fh.write(f"{fmt(x)},{fmt(y)},{tag.encode()}\n")

    @classmethod
    def from_csv(cls, path) -> "PointCloud":
        interior, boundary, tags = [], [], []
        with open(path) as fh:
            header = fh.readline().strip()
            if header != "x,y,tag":
                raise ValueError(f"unexpected point cloud header: {header!r}")
            for line in fh:
                x, y, tag = line.strip().split(",", 2)
                if tag == "interior":
                    interior.append((float(x), float(y)))
                else:
                    boundary.append((float(x), float(y)))
                    tags.append(BCTag.decode(tag))
        return cls(np.array(interior).reshape(-1, 2), np.array(boundary).reshape(-1, 2), tags)


# ---------------------------------------------------------------------------
# shock window


@dataclass(frozen=True)
class ShockWindow:
    """High-gradient band: collocation and kernels concentrate inside it."""

    center: float
    half_width: float = 0.05
    fraction: float = 0.30
    no_gradient: bool = False

    def __post_init__(self):
        if not (0.0 < self.fraction < 1.0):
            raise ValueError("fraction must lie in (0, 1)")
        if self.half_width <= 0:
            raise ValueError("half_width must be positive")

    @property
    def left(self) -> float:
        return self.center - self.half_width

    @property
    def right(self) -> float:
        return self.center + self.half_width


def detect_shock_window(
    u: np.ndarray,
    x: np.ndarray,
    window_size: float = 0.1,
    fraction: float = 0.30,
    plateau_tol: float = 0.02,
) -> ShockWindow:
    """Locate the window of width ``window_size`` with the largest summed |du/dx|.

    Candidate windows are anchored at grid points and must lie fully inside
    the grid extent (windows clipped by the boundary are not considered).
    Once a window swallows the whole steep region the gradient sum plateaus,
    so the center is the midpoint of the plateau (the connected run of
    anchors within ``plateau_tol`` of the maximum) rather than a raw argmax,
    which would wobble on sampling noise. A constant profile yields the
    domain-center window flagged no_gradient.
    """
    u = np.asarray(u, dtype=float)
    x = np.asarray(x, dtype=float)
    if len(u) < 3 or len(u) != len(x):
        raise ValueError("profile needs at least 3 samples on a matching grid")
    span = x[-1] - x[0]
    if not (0 < window_size < span):
        raise ValueError("window_size must be smaller than the domain extent")

    sums, anchors = window_gradient_sums(u, x, window_size)
    best = sums.max()
    if best <= 0.0:
        return ShockWindow(
            center=float((x[0] + x[-1]) / 2.0),
            half_width=window_size / 2.0,
            fraction=fraction,
            no_gradient=True,
        )
    i_best = int(np.argmax(sums))
    on_plateau = sums >= best * (1.0 - plateau_tol)
    lo = i_best
    while lo > 0 and on_plateau[lo - 1]:
        lo -= 1
    hi = i_best
    while hi < len(sums) - 1 and on_plateau[hi + 1]:
        hi += 1
    center = (anchors[lo] + anchors[hi]) / 2.0 + window_size / 2.0
    return ShockWindow(center=float(center), half_width=window_size / 2.0, fraction=fraction)


def window_gradient_sums(u, x, window_size):
    """Summed |du/dx| for every admissible window anchored at a grid point.

    Returns (sums, anchors); window i spans [anchors[i], anchors[i] +
    window_size]. Grid intervals only partly inside a window are excluded.
    """
    grads = np.abs(np.diff(u) / np.diff(x))
    csum = np.concatenate([[0.0], np.cumsum(grads)])
    span = x[-1] - x[0]
    tol = 1e-12 * max(1.0, abs(span))
    sums, anchors = [], []
    for i in range(len(x)):
        right_edge = x[i] + window_size
        if right_edge > x[-1] + tol:
            break
        j_end = int(np.searchsorted(x, right_edge + tol, side="right")) - 1
        sums.append(csum[j_end] - csum[i])
        anchors.append(x[i])
    return np.array(sums), np.array(anchors)


# ---------------------------------------------------------------------------
# sampling operations


def sample_rectangle_uniform(domain: Domain, nx: int, ny: int) -> PointCloud:
    """Tensor grid over a rectangle; perimeter tagged homogeneous Dirichlet."""
    if not isinstance(domain, Rectangle):
        raise DomainMismatchError("sample_rectangle_uniform needs a Rectangle domain")
    if nx < 2 or ny < 2:
        raise InvalidCountError("need nx, ny >= 2")
    xs = np.linspace(domain.x_min, domain.x_max, nx)
    ys = np.linspace(domain.y_min, domain.y_max, ny)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    on_edge = (
        (pts[:, 0] == xs[0])
        | (pts[:, 0] == xs[-1])
        | (pts[:, 1] == ys[0])
        | (pts[:, 1] == ys[-1])
    )
    boundary = pts[on_edge]
    return PointCloud(pts[~on_edge], boundary, [dirichlet_scalar(0.0)] * len(boundary))


def chebyshev_nodes(n: int) -> np.ndarray:
    """Chebyshev-Gauss-Lobatto nodes mapped to [0,1], exactly symmetric."""
    if n < 3:
        raise InvalidCountError("need at least 3 nodes per axis")
    k = np.arange(n)
    nodes = (1.0 - np.cos(np.pi * k / (n - 1))) / 2.0
    half = n // 2
    nodes[n - 1 - np.arange(half)] = 1.0 - nodes[:half]  # enforce mirror symmetry
    if n % 2 == 1:
        nodes[half] = 0.5
    return nodes


def sample_chebyshev_square(n_per_axis: int) -> PointCloud:
    """Wall-clustered cavity sampling with lid/no-slip tags and a pressure pin.

    Top edge (excluding the corners) is tagged as the moving lid; the corners
    take the stationary wall value, and p is pinned at the origin.
    """
    nodes = chebyshev_nodes(n_per_axis)
    X, Y = np.meshgrid(nodes, nodes, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    on_edge = (pts[:, 0] == 0.0) | (pts[:, 0] == 1.0) | (pts[:, 1] == 0.0) | (pts[:, 1] == 1.0)
    boundary = pts[on_edge]
    tags = []
    for x, y in boundary:
        is_corner = (x in (0.0, 1.0)) and (y in (0.0, 1.0))
        if y == 1.0 and not is_corner:
            tags.append(moving_lid())
        else:
            tags.append(no_slip())
    boundary = np.vstack([boundary, [[0.0, 0.0]]])
    tags.append(pressure_pin(0.0))
    return PointCloud(pts[~on_edge], boundary, tags)


def sample_disk(n_interior: int, n_boundary: int, rng_seed) -> PointCloud:
    """Uniform-area interior points plus equally spaced circle points."""
    if n_interior < 1 or n_boundary < 1:
        raise InvalidCountError("need at least one interior and one boundary point")
    rng = _as_rng(rng_seed)
    r = np.sqrt(rng.uniform(0.0, 1.0, n_interior))
    theta = rng.uniform(0.0, 2.0 * np.pi, n_interior)
    # keep strictly inside; the area measure of the excluded ring is ~1e-24
    r = np.minimum(r, 1.0 - 1e-12)
    interior = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    phis = 2.0 * np.pi * np.arange(n_boundary) / n_boundary
    boundary = np.column_stack([np.cos(phis), np.sin(phis)])
    return PointCloud(interior, boundary, [dirichlet_scalar(0.0)] * n_boundary)


def place_centers(
    domain: Domain,
    n_kernels: int,
    window: ShockWindow | None = None,
    rng_seed=0,
    mirror_x: bool = False,
) -> np.ndarray:
    """Kernel center layout matched to the domain.

    Rectangles with a shock window put ceil(fraction*n) centers inside the
    window band; the cavity biases centers toward the walls; the stenotic
    channel clusters them exponentially around the throat. Rectangles without
    a window and the disk are uniform.

    ``mirror_x`` (rectangles symmetric about x=0 only, even n_kernels) draws
    half the centers on the positive side and reflects them, so the layout is
    exactly invariant under x -> -x; the first half of the returned rows is
    the positive-side set.
    """
    if n_kernels < 1:
        raise InvalidCountError("need at least one kernel")
    rng = _as_rng(rng_seed)
    if mirror_x:
        if not isinstance(domain, Rectangle) or abs(domain.x_min + domain.x_max) > 1e-12:
            raise DomainMismatchError("mirror_x needs a rectangle symmetric about x = 0")
        if n_kernels % 2:
            raise InvalidCountError("mirror_x needs an even kernel count")
        half_dom, half_win = _positive_half(domain, window)
        pos = _rectangle_centers(half_dom, n_kernels // 2, half_win, rng)
        neg = np.column_stack([-pos[:, 0], pos[:, 1]])
        return np.vstack([pos, neg])
    if isinstance(domain, Rectangle):
        return _rectangle_centers(domain, n_kernels, window, rng)
    if isinstance(domain, UnitDisk):
        r = np.sqrt(rng.uniform(0.0, 1.0, n_kernels))
        theta = rng.uniform(0.0, 2.0 * np.pi, n_kernels)
        return np.column_stack([r * np.cos(theta), r * np.sin(theta)])
    if isinstance(domain, CavitySquare):
        # arcsine marginals: density diverges toward the walls
        x = rng.beta(0.5, 0.5, n_kernels)
        y = rng.beta(0.5, 0.5, n_kernels)
        return np.column_stack([x, y])
    if isinstance(domain, StenoticChannel):
        x = throat_clustered_positions(n_kernels, domain.length, 0.15 * domain.length, rng)
        x = rng.permutation(x)
        wall = domain.wall_half_width(x)
        y = rng.uniform(-1.0, 1.0, n_kernels) * wall
        return np.column_stack([x, y])
    raise DomainMismatchError(f"no center rule for domain type {type(domain).__name__}")


def _rectangle_centers(domain, n, window, rng):
    ys = rng.uniform(domain.y_min, domain.y_max, n)
    if window is None or window.no_gradient:
        xs = rng.uniform(domain.x_min, domain.x_max, n)
        return np.column_stack([xs, ys])
    n_in = math.ceil(window.fraction * n)
    left = max(window.left, domain.x_min)
    right = min(window.right, domain.x_max)
    xs_in = rng.uniform(left, right, n_in)
    xs_out = _uniform_outside(rng, n - n_in, domain.x_min, domain.x_max, left, right)
    xs = np.concatenate([xs_in, xs_out])
    return np.column_stack([xs, ys])


def _uniform_outside(rng, n, lo, hi, band_lo, band_hi):
    """Uniform draws on [lo, hi] excluding the band (band assumed inside)."""
    len_l = max(band_lo - lo, 0.0)
    len_r = max(hi - band_hi, 0.0)
    total = len_l + len_r
    if total <= 0.0:
        return rng.uniform(lo, hi, n)
    u = rng.uniform(0.0, total, n)
    return np.where(u < len_l, lo + u, band_hi + (u - len_l))


def _two_sided_exponential(rng, n, length, scale):
    """Inverse-CDF draws with density ~ exp(-|x - length/2| / scale) on [0, length]."""
    half = length / 2.0
    mass = 1.0 - math.exp(-half / scale)  # each side, up to the common factor
    side = rng.uniform(0.0, 1.0, n) < 0.5
    d = -scale * np.log1p(-rng.uniform(0.0, 1.0, n) * mass)
    return np.where(side, half - d, half + d)


# share of uniform background mixed into the throat-clustered density; a pure
# exponential starves the channel ends of kernels and collocation, letting
# flux leak through the walls between sample points
THROAT_UNIFORM_SHARE = 0.5


def _throat_cdf_table(length, scale, uniform_share=THROAT_UNIFORM_SHARE, n_table=4001):
    xs = np.linspace(0.0, length, n_table)
    half = length / 2.0
    dens = uniform_share / length + (1.0 - uniform_share) * np.exp(
        -np.abs(xs - half) / scale
    ) / (2.0 * scale * (1.0 - math.exp(-half / scale)))
    cdf = np.concatenate([[0.0], np.cumsum((dens[1:] + dens[:-1]) / 2.0 * np.diff(xs))])
    return xs, cdf / cdf[-1]


def throat_clustered_positions(n, length, scale, rng=None, uniform_share=THROAT_UNIFORM_SHARE):
    """Positions on [0, length] denser near the throat but never sparse.

    Density is a uniform/exponential mixture, realized by inverse transform:
    stratified draws when an rng is given, the deterministic quantile grid
    otherwise (used for wall points, where coverage gaps must not occur).
    """
    xs, cdf = _throat_cdf_table(length, scale, uniform_share)
    if rng is None:
        q = (np.arange(n) + 0.5) / n
    else:
        q = _stratified(rng, n, 0.0, 1.0)
    return np.interp(q, cdf, xs)


def exponential_station_positions(rng, n, domain: StenoticChannel):
    """Throat-clustered x positions for stenotic sampling."""
    return throat_clustered_positions(n, domain.length, 0.15 * domain.length, rng)


def sample_stenosis(
    domain: StenoticChannel,
    n_pde: int,
    n_wall: int,
    n_inlet: int,
    n_outlet: int,
    u_max: float,
    rng_seed=0,
) -> PointCloud:
    """Collocation for the constricted channel.

    PDE points cluster exponentially around the throat (uniform across the
    local width); wall points sit on the curved walls with the same
    x-clustering; the inlet carries the parabolic velocity profile and the
    outlet the zero-pressure/zero-x-gradient condition.
    """
    if min(n_pde, n_wall, n_inlet, n_outlet) < 1:
        raise InvalidCountError("stenosis sampling needs positive counts")
    rng = _as_rng(rng_seed)
    L, r_in = domain.length, domain.inlet_half_width

    x = throat_clustered_positions(n_pde, L, 0.15 * L, rng)
    x = np.clip(rng.permutation(x), 1e-9 * L, L * (1.0 - 1e-9))
    wall = domain.wall_half_width(x)
    y = rng.uniform(-1.0, 1.0, n_pde) * wall * (1.0 - 1e-9)
    interior = np.column_stack([x, y])

    n_top = n_wall // 2
    n_bot = n_wall - n_top
    # deterministic quantile placement: wall coverage gaps would let flux leak
    xw_top = throat_clustered_positions(n_top, L, 0.15 * L)
    xw_bot = throat_clustered_positions(n_bot, L, 0.15 * L)
    wall_pts = np.vstack(
        [
            np.column_stack([xw_top, domain.wall_half_width(xw_top)]),
            np.column_stack([xw_bot, -domain.wall_half_width(xw_bot)]),
        ]
    )
    tags = [no_slip()] * len(wall_pts)

    y_in = np.linspace(-r_in, r_in, n_inlet + 2)[1:-1]
    inlet_pts = np.column_stack([np.zeros(n_inlet), y_in])
    tags += [inlet_profile(u_max * (1.0 - (yy / r_in) ** 2), 0.0) for yy in y_in]

    y_out = np.linspace(-r_in, r_in, n_outlet + 2)[1:-1]
    outlet_pts = np.column_stack([np.full(n_outlet, L), y_out])
    tags += [outlet()] * n_outlet

    boundary = np.vstack([wall_pts, inlet_pts, outlet_pts])
    return PointCloud(interior, boundary, tags)


def sample_burgers_block(
    block: Rectangle,
    n_x_per_level: int,
    nt_levels: int,
    n_ic: int,
    n_bc_levels: int,
    window: ShockWindow | None,
    rng_seed=0,
    mirror_x: bool = False,
) -> PointCloud:
    """Space-time collocation for one Burgers time block.

    PDE points sit on nt_levels time levels spanning the block (endpoints
    included), with x positions drawn randomly and concentrated in the shock
    window; initial-condition points sit on a deterministic x grid at the
    block start (window-refined the same way); Dirichlet rows pin u = 0 at
    both x ends.

    ``mirror_x`` makes the point set exactly invariant under x -> -x (for
    odd-symmetric problems; needs even n_x_per_level, odd n_ic, a block
    symmetric about x = 0, and a window centered at 0 if present).
    """
    if n_x_per_level < 1 or nt_levels < 2 or n_ic < 2 or n_bc_levels < 1:
        raise InvalidCountError("burgers block needs positive point counts")
    rng = _as_rng(rng_seed)
    t0, t1 = block.y_min, block.y_max
    pad = 1e-9 * (block.x_max - block.x_min)

    # PDE collocation levels span the block inclusively: anchoring the end
    # time keeps the block-to-block handoff an interpolation, never an
    # extrapolation in time. The x positions are stratified jointly across
    # all levels (kernels are wide in t, so the union x-density is what
    # controls between-point oscillation) and dealt round-robin.
    levels = np.linspace(t0, t1, nt_levels)
    n_total = n_x_per_level * nt_levels
    if mirror_x:
        if n_x_per_level % 2 or n_ic % 2 == 0:
            raise InvalidCountError("mirror_x needs even n_x_per_level and odd n_ic")
        if abs(block.x_min + block.x_max) > 1e-12:
            raise DomainMismatchError("mirror_x needs a block symmetric about x = 0")
        half_block, half_win = _positive_half(block, window)
        xs_pos = _windowed_x_random(rng, n_total // 2, half_block, half_win)
        xs_pos = np.clip(xs_pos, pad, block.x_max - pad)
        ts_pos = np.tile(levels, n_total // (2 * nt_levels))
        xs = np.concatenate([xs_pos, -xs_pos])
        ts = np.concatenate([ts_pos, ts_pos])
    else:
        xs = _windowed_x_random(rng, n_total, block, window)
        xs = np.clip(rng.permutation(xs), block.x_min + pad, block.x_max - pad)
        ts = np.tile(levels, n_total // nt_levels)
    interior = np.column_stack([xs, ts])

    if mirror_x:
        half_block, half_win = _positive_half(block, window)
        k = (n_ic + 1) // 2
        if half_win is None:
            x_pos = np.linspace(0.0, block.x_max, k, endpoint=False)
        else:
            x_pos = _windowed_x_grid(k, half_block, half_win)
        x_ic = np.concatenate([x_pos, -x_pos[x_pos > 0.0]])
    else:
        x_ic = _windowed_x_grid(n_ic, block, window)
    ic_pts = np.column_stack([x_ic, np.full(len(x_ic), t0)])

    t_bc = np.linspace(t0, t1, n_bc_levels)
    bc_pts = np.concatenate(
        [
            np.column_stack([np.full(n_bc_levels, block.x_min), t_bc]),
            np.column_stack([np.full(n_bc_levels, block.x_max), t_bc]),
        ]
    )
    boundary = np.vstack([ic_pts, bc_pts])
    tags = [initial_profile()] * len(ic_pts) + [dirichlet_scalar(0.0)] * len(bc_pts)
    return PointCloud(interior, boundary, tags)


def _windowed_x_random(rng, n, block: Rectangle, window):
    if window is None or window.no_gradient:
        return _stratified(rng, n, block.x_min, block.x_max)
    left = max(window.left, block.x_min)
    right = min(window.right, block.x_max)
    n_in = math.ceil(window.fraction * n)
    xs_in = _stratified(rng, n_in, left, right)
    n_out = n - n_in
    len_l = max(left - block.x_min, 0.0)
    len_r = max(block.x_max - right, 0.0)
    n_l = int(round(n_out * len_l / max(len_l + len_r, 1e-300)))
    xs_l = _stratified(rng, n_l, block.x_min, left)
    xs_r = _stratified(rng, n_out - n_l, right, block.x_max)
    return np.concatenate([xs_in, xs_l, xs_r])


def _stratified(rng, n, lo, hi):
    """One uniform draw per equal stratum: random but without large gaps."""
    if n <= 0:
        return np.empty(0)
    edges = np.linspace(lo, hi, n + 1)
    return edges[:-1] + rng.uniform(0.0, 1.0, n) * np.diff(edges)


def _positive_half(block: Rectangle, window: ShockWindow | None):
    """Right half of an x-symmetric block, with the window folded onto it."""
    half = Rectangle(0.0, block.x_max, block.y_min, block.y_max)
    if window is None or window.no_gradient:
        return half, None
    right = min(window.right, block.x_max)
    folded = ShockWindow(
        center=right / 2.0, half_width=right / 2.0, fraction=window.fraction
    )
    return half, folded


def _windowed_x_grid(n, block: Rectangle, window):
    pad = 1e-9 * (block.x_max - block.x_min)
    if window is None or window.no_gradient:
        return np.linspace(block.x_min, block.x_max, n + 2)[1:-1]
    left = max(window.left, block.x_min)
    right = min(window.right, block.x_max)
    n_in = math.ceil(window.fraction * n)
    n_out = n - n_in
    len_l = max(left - block.x_min, 0.0)
    len_r = max(block.x_max - right, 0.0)
    n_l = int(round(n_out * len_l / max(len_l + len_r, 1e-300)))
    n_r = n_out - n_l
    parts = [
        np.linspace(block.x_min + pad, left, n_l, endpoint=False) if n_l else np.empty(0),
        np.linspace(left, right, n_in),
        np.linspace(right, block.x_max - pad, n_r + 1)[1:] if n_r else np.empty(0),
    ]
    return np.concatenate(parts)


def centers_to_csv(centers: np.ndarray, path) -> None:
    with open(path, "w") as fh:
        fh.write("alpha_star,beta_star\n")
        for a, b in centers:
            fh.write(f"{fmt(a)},{fmt(b)}\n")


def centers_from_csv(path) -> np.ndarray:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return data


def _as_rng(rng_seed) -> np.random.Generator:
    if isinstance(rng_seed, np.random.Generator):
        return rng_seed
    return np.random.default_rng(rng_seed)
