"""Independent ground-truth solvers and conservation audits.

These are deliberately different numerical routes from the RBF solver: a
closed-form Poisson solution, a Crank-Nicolson/Godunov finite-difference
march for viscous Burgers, an under-relaxed streamfunction-vorticity
iteration for the steady cavity, and Simpson-rule flux audits for channel
flow. Oracle fields are cached to CSV under content-addressed names.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse
import scipy.sparse.linalg

from pielm.geometry import StenoticChannel
from pielm.ioutil import fmt


class OracleFailureError(RuntimeError):
    """The oracle integration went unstable or failed to converge."""


class DomainError(ValueError):
    pass


@dataclass
class OracleField:
    """Gridded reference field with provenance."""

    provenance: str  # "exact" | "fd"
    x: np.ndarray
    y: np.ndarray  # second axis: y for spatial grids, snapshot times for Burgers
    values: dict[str, np.ndarray]
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.x = np.asarray(self.x, dtype=float)
        self.y = np.asarray(self.y, dtype=float)
        for axis in (self.x, self.y):
            if len(axis) > 1 and not np.all(np.diff(axis) > 0):
                raise ValueError("oracle grid axes must be strictly increasing")
        for name, arr in self.values.items():
            if not np.all(np.isfinite(arr)):
                raise ValueError(f"oracle field {name!r} contains non-finite values")


def poisson_exact(points) -> np.ndarray:
    """u(x, y) = (1 - x^2 - y^2)/4 on the closed unit disk."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    r2 = pts[:, 0] ** 2 + pts[:, 1] ** 2
    if np.any(r2 > 1.0 + 1e-12):
        raise DomainError("point outside the unit disk")
    return (1.0 - r2) / 4.0


# ---------------------------------------------------------------------------
# viscous Burgers finite differences


def burgers_fd(
    ic,
    nu: float,
    nx: int = 1601,
    t_end: float = 1.0,
    snapshot_times=None,
    nt: int | None = None,
    cfl: float = 0.4,
) -> OracleField:
    """March u_t + u u_x = nu u_xx on [-1,1] with Dirichlet 0 ends.

    Diffusion is Crank-Nicolson (tridiagonal solve per step); advection is an
    explicit Godunov flux, which reduces to plain upwinding on monotone data.
    Snapshot times are hit exactly by shortening the last step of each
    segment. ``nt`` forces a uniform step count instead of the CFL choice.
    """
    if nx < 201 or nx % 2 == 0:
        raise ValueError("need odd nx >= 201")
    x = np.linspace(-1.0, 1.0, nx)
    dx = x[1] - x[0]
    u = np.asarray(ic(x), dtype=float)
    u[0] = u[-1] = 0.0
    u_scale = max(np.abs(u).max(), 1e-12)

    times = sorted(set(float(t) for t in (snapshot_times or [t_end])))
    if times[-1] > t_end + 1e-12:
        raise ValueError("snapshot time beyond t_end")
    if times[-1] < t_end - 1e-12:
        times.append(t_end)

    snapshots = [u.copy()] if times[0] == 0.0 else []
    out_times = [0.0] if times[0] == 0.0 else []
    t_prev = 0.0
    for t_target in times:
        if t_target == 0.0:
            continue
        seg = t_target - t_prev
        if nt is not None:
            steps = max(1, int(round(nt * seg / t_end)))
        else:
            dt_max = cfl * dx / max(np.abs(u).max(), 1e-12)
            steps = max(1, int(np.ceil(seg / dt_max)))
        dt = seg / steps
        u = _burgers_march(u, dx, dt, steps, nu)
        if np.abs(u).max() > 10.0 * u_scale:
            raise OracleFailureError(
                f"burgers oracle unstable: max|u| grew past 10x the initial scale at t={t_target}"
            )
        snapshots.append(u.copy())
        out_times.append(t_target)
        t_prev = t_target

    return OracleField(
        provenance="fd",
        x=x,
        y=np.array(out_times),
        values={"u": np.array(snapshots)},
        meta={"nu": nu, "nx": nx, "cfl": cfl},
    )


def _burgers_march(u, dx, dt, steps, nu):
    nx = len(u)
    r = nu * dt / dx**2
    # (1 + r) on the diagonal, -r/2 off-diagonal: SPD tridiagonal
    ab = np.zeros((2, nx - 2))
    ab[0, 1:] = -r / 2.0
    ab[1, :] = 1.0 + r
    for _ in range(steps):
        flux = _godunov_flux(u[:-1], u[1:])
        div = (flux[1:] - flux[:-1]) / dx
        lap = u[:-2] - 2.0 * u[1:-1] + u[2:]
        rhs = u[1:-1] + 0.5 * r * lap - dt * div
        u[1:-1] = scipy.linalg.solveh_banded(ab, rhs)
        u[0] = u[-1] = 0.0
    return u


def _godunov_flux(ul, ur):
    fl = 0.5 * ul * ul
    fr = 0.5 * ur * ur
    rarefaction = np.where(ul > 0.0, fl, np.where(ur < 0.0, fr, 0.0))
    return np.where(ul > ur, np.maximum(fl, fr), rarefaction)


def burgers_profile(oracle: OracleField, t: float) -> np.ndarray:
    """Snapshot u(x, t) stored in the oracle field."""
    idx = np.where(np.isclose(oracle.y, t, atol=1e-10))[0]
    if len(idx) == 0:
        raise KeyError(f"no snapshot at t={t}; stored times {oracle.y}")
    return oracle.values["u"][idx[0]]


# ---------------------------------------------------------------------------
# steady lid-driven cavity finite differences


def cavity_fd(
    re: float,
    n_grid: int = 129,
    max_outer: int = 200,
    tol: float = 1e-9,
    relax: float = 0.8,
    fixed_iterations: int | None = None,
    lid_speed: float = 1.0,
) -> OracleField:
    """Steady cavity flow by streamfunction-vorticity iteration.

    Each outer iteration solves psi and omega as one coupled sparse linear
    system (Poisson coupling, linearized vorticity transport, and Thom wall
    vorticity rows), with the advecting velocity lagged from the previous
    iterate and under-relaxed. The first iteration is therefore the exact
    Stokes solution. Central differences throughout (cell Reynolds number
    < 2 for Re <= 200 at the default grid).
    """
    if re > 200:
        raise ValueError("cavity oracle validated only up to Re = 200")
    if n_grid < 65:
        raise ValueError("need n_grid >= 65")
    n = n_grid
    h = 1.0 / (n - 1)
    ni = n - 2

    sys = _CavitySystem(n, h, re, lid_speed)
    u = np.zeros((n, n))
    v = np.zeros((n, n))
    u[-1, :] = lid_speed
    u_adv = u.copy()
    v_adv = v.copy()

    psi = np.zeros((n, n))
    omega = np.zeros((n, n))
    iters = fixed_iterations if fixed_iterations is not None else max_outer
    change = np.inf
    for it in range(iters):
        psi, omega = sys.solve(u_adv, v_adv)
        u_new = u.copy()
        v_new = v.copy()
        u_new[1:-1, 1:-1] = (psi[2:, 1:-1] - psi[:-2, 1:-1]) / (2.0 * h)
        v_new[1:-1, 1:-1] = -(psi[1:-1, 2:] - psi[1:-1, :-2]) / (2.0 * h)
        change = max(np.abs(u_new - u).max(), np.abs(v_new - v).max()) / max(
            np.abs(u_new).max(), 1e-30
        )
        u, v = u_new, v_new
        u_adv = (1.0 - relax) * u_adv + relax * u
        v_adv = (1.0 - relax) * v_adv + relax * v
        if fixed_iterations is None and change < tol:
            break
    else:
        if fixed_iterations is None:
            raise OracleFailureError(
                f"cavity oracle did not converge in {max_outer} iterations "
                f"(final relative change {change:.3e})"
            )

    mid = (n - 1) // 2
    grid = np.linspace(0.0, 1.0, n)
    return OracleField(
        provenance="fd",
        x=grid,
        y=grid,
        values={"u": u, "v": v, "psi": psi},
        meta={
            "re": re,
            "iterations": it + 1,
            "final_change": float(change),
            "u_centerline": u[:, mid].copy(),  # u(0.5, y)
            "v_centerline": v[mid, :].copy(),  # v(x, 0.5)
        },
    )


class _CavitySystem:
    """Coupled (psi, omega) sparse system; advection entries refresh per solve.

    Unknown layout: psi on the ni*ni interior nodes first, then omega on all
    n*n nodes. Rows: lap(psi) + omega = 0 (interior), u w_x + v w_y
    - (1/re) lap(omega) = 0 (interior), and Thom wall-vorticity relations on
    the boundary (identity rows at the corners).
    """

    def __init__(self, n, h, re, lid_speed):
        self.n, self.h, self.re = n, h, re
        ni = self.ni = n - 2
        npsi = ni * ni
        self.n_unknowns = npsi + n * n

        iy, ix = np.meshgrid(np.arange(1, n - 1), np.arange(1, n - 1), indexing="ij")
        iy, ix = iy.ravel(), ix.ravel()
        self.iy, self.ix = iy, ix
        pid = np.arange(npsi)  # psi index of interior node (iy, ix)
        wid = npsi + iy * n + ix  # omega index of the same node

        # psi-Poisson rows: lap psi + omega = 0
        inv_h2 = 1.0 / h**2
        rows = [pid]
        cols = [pid]
        data = [np.full(npsi, -4.0 * inv_h2)]
        for dy, dx in ((0, 1), (0, -1), (1, 0), (-1, 0)):
            ny_, nx_ = iy + dy, ix + dx
            interior = (ny_ >= 1) & (ny_ <= ni) & (nx_ >= 1) & (nx_ <= ni)
            nb_pid = (ny_[interior] - 1) * ni + (nx_[interior] - 1)
            rows.append(pid[interior])
            cols.append(nb_pid)
            data.append(np.full(interior.sum(), inv_h2))
        rows.append(pid)
        cols.append(wid)
        data.append(np.ones(npsi))

        # omega transport rows (row id = the centered omega unknown):
        # diffusion part is constant, advection varies
        trow = wid
        nu = 1.0 / re
        rows.append(trow)
        cols.append(wid)
        data.append(np.full(npsi, 4.0 * nu * inv_h2))
        self._adv_rows = []
        self._adv_cols = []
        self._adv_axis = []  # 'x' or 'y'
        self._adv_sign = []
        for dy, dx in ((0, 1), (0, -1), (1, 0), (-1, 0)):
            nb_wid = npsi + (iy + dy) * n + (ix + dx)
            rows.append(trow)
            cols.append(nb_wid)
            data.append(np.full(npsi, -nu * inv_h2))
            self._adv_rows.append(trow)
            self._adv_cols.append(nb_wid)
            self._adv_axis.append("x" if dy == 0 else "y")
            self._adv_sign.append(float(dx + dy))

        # Thom rows on the boundary, identity at corners
        edge = 2.0 * inv_h2
        brow, bcol, bdat, brhs_idx, brhs_val = [], [], [], [], []
        side = np.arange(1, n - 1)
        for wall, w_idx, p_neighbor, rhs_val in (
            ("bottom", npsi + 0 * n + side, (1, side), 0.0),
            ("top", npsi + (n - 1) * n + side, (n - 2, side), -2.0 * lid_speed / h),
            ("left", npsi + side * n + 0, (side, 1), 0.0),
            ("right", npsi + side * n + (n - 1), (side, n - 2), 0.0),
        ):
            brow += [w_idx, w_idx]
            bcol += [w_idx, (p_neighbor[0] - 1) * ni + (np.asarray(p_neighbor[1]) - 1)]
            bdat += [np.ones(n - 2), np.full(n - 2, edge)]
            brhs_idx.append(w_idx)
            brhs_val.append(np.full(n - 2, rhs_val))
        corners = npsi + np.array([0, n - 1, (n - 1) * n, n * n - 1])
        brow.append(corners)
        bcol.append(corners)
        bdat.append(np.ones(4))

        rows += brow
        cols += bcol
        data += bdat
        self._base_rows = np.concatenate(rows)
        self._base_cols = np.concatenate(cols)
        self._base_data = np.concatenate(data)
        self._rhs = np.zeros(self.n_unknowns)
        for idx_arr, val_arr in zip(brhs_idx, brhs_val):
            self._rhs[idx_arr] = val_arr

    def solve(self, u_adv, v_adv):
        n, ni, h = self.n, self.ni, self.h
        ui = u_adv[1:-1, 1:-1].ravel()
        vi = v_adv[1:-1, 1:-1].ravel()
        adv_data = []
        for axis, sign in zip(self._adv_axis, self._adv_sign):
            vel = ui if axis == "x" else vi
            adv_data.append(sign * vel / (2.0 * h))
        A = scipy.sparse.csr_matrix(
            (
                np.concatenate([self._base_data] + adv_data),
                (
                    np.concatenate([self._base_rows] + self._adv_rows),
                    np.concatenate([self._base_cols] + self._adv_cols),
                ),
            ),
            shape=(self.n_unknowns, self.n_unknowns),
        )
        sol = scipy.sparse.linalg.spsolve(A, self._rhs)
        npsi = ni * ni
        psi = np.zeros((n, n))
        psi[1:-1, 1:-1] = sol[:npsi].reshape(ni, ni)
        omega = sol[npsi:].reshape(n, n)
        return psi, omega


# ---------------------------------------------------------------------------
# conservation audit for channel flow


def flux_check(field_weights, domain: StenoticChannel, stations, n_samples: int = 101):
    """Volumetric flux Q(x) = int u dy across the local width at each station."""
    if n_samples < 101:
        n_samples = 101
    if n_samples % 2 == 0:
        n_samples += 1  # Simpson needs an odd sample count
    from scipy.integrate import simpson

    out = {}
    for xs in stations:
        half = float(domain.wall_half_width(xs))
        ys = np.linspace(-half, half, n_samples)
        pts = np.column_stack([np.full(n_samples, xs), ys])
        u = field_weights.u(pts)
        out[float(xs)] = float(simpson(u, x=ys))
    return out


# ---------------------------------------------------------------------------
# content-addressed CSV cache


def cache_dir() -> str:
    return os.environ.get("PIELM_ORACLE_CACHE", os.path.join(os.getcwd(), ".oracle_cache"))


def cache_key(kind: str, params: dict) -> str:
    canon = json.dumps(params, sort_keys=True, separators=(",", ":"), default=repr)
    return f"{kind}_{hashlib.sha256(canon.encode()).hexdigest()[:16]}"


def cached_burgers_fd(params: dict) -> OracleField:
    """burgers_fd memoized on disk; params are the keyword arguments except ic,
    which must be supplied as a named profile under key 'ic_name'."""
    path = os.path.join(cache_dir(), cache_key("burgers", params) + ".csv")
    if os.path.exists(path):
        return _load_burgers_csv(path)
    ic = named_initial_condition(params["ic_name"])
    fd = burgers_fd(
        ic,
        nu=params["nu"],
        nx=params["nx"],
        t_end=params["t_end"],
        snapshot_times=params.get("snapshot_times"),
        cfl=params.get("cfl", 0.4),
    )
    os.makedirs(cache_dir(), exist_ok=True)
    _save_burgers_csv(fd, path)
    return fd


def cached_cavity_fd(params: dict) -> OracleField:
    path = os.path.join(cache_dir(), cache_key("cavity", params) + ".csv")
    if os.path.exists(path):
        return _load_cavity_csv(path)
    fd = cavity_fd(
        re=params["re"],
        n_grid=params.get("n_grid", 129),
        max_outer=params.get("max_outer", 600),
        tol=params.get("tol", 1e-9),
        relax=params.get("relax", 0.5),
    )
    os.makedirs(cache_dir(), exist_ok=True)
    _save_cavity_csv(fd, path)
    return fd


def named_initial_condition(name: str):
    if name == "standing":
        return lambda x: -np.sin(np.pi * x)
    if name == "traveling":
        return lambda x: np.exp(-30.0 * x**2)
    if name == "zero":
        return lambda x: np.zeros_like(x)
    raise KeyError(f"unknown initial condition {name!r}")


def _save_burgers_csv(fd: OracleField, path):
    with open(path, "w") as fh:
        fh.write("x," + ",".join(f"u@{fmt(t)}" for t in fd.y) + "\n")
        for i, xv in enumerate(fd.x):
            row = ",".join(fmt(fd.values["u"][k, i]) for k in range(len(fd.y)))
            fh.write(f"{fmt(xv)},{row}\n")


def _load_burgers_csv(path) -> OracleField:
    with open(path) as fh:
        header = fh.readline().strip().split(",")
        times = np.array([float(col.split("@")[1]) for col in header[1:]])
        data = np.loadtxt(fh, delimiter=",", ndmin=2)
    return OracleField(
        provenance="fd", x=data[:, 0], y=times, values={"u": data[:, 1:].T.copy()}
    )


def _save_cavity_csv(fd: OracleField, path):
    n = len(fd.x)
    with open(path, "w") as fh:
        fh.write("x,y,u,v,psi\n")
        for iy in range(n):
            for ix in range(n):
                fh.write(
                    f"{fmt(fd.x[ix])},{fmt(fd.y[iy])},{fmt(fd.values['u'][iy, ix])},"
                    f"{fmt(fd.values['v'][iy, ix])},{fmt(fd.values['psi'][iy, ix])}\n"
                )


def _load_cavity_csv(path) -> OracleField:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    x = np.unique(data[:, 0])
    y = np.unique(data[:, 1])
    n = len(x)
    u = data[:, 2].reshape(n, n)
    v = data[:, 3].reshape(n, n)
    psi = data[:, 4].reshape(n, n)
    mid = (n - 1) // 2
    return OracleField(
        provenance="fd",
        x=x,
        y=y,
        values={"u": u, "v": v, "psi": psi},
        meta={"u_centerline": u[:, mid].copy(), "v_centerline": v[mid, :].copy()},
    )
