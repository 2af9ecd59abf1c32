"""Assembly of the overdetermined linear residual systems A c = b.

Interior collocation points contribute PDE residual rows (quasi-linearized
where the problem is nonlinear), boundary points contribute rows per their
tag, and the space-time Burgers blocks add initial-condition rows. Unknown
ordering for the coupled system is [c_u; c_v; c_p].
"""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from pielm.basis import FeatureBlock, KernelSet, eval_features
from pielm.geometry import PointCloud

MAGIC = b"PIELMSYS"

# rows contributed per boundary point, by tag kind (coupled u,v,p system)
NS_ROWS_PER_TAG = {
    "no_slip": 2,
    "moving_lid": 2,
    "dirichlet_vector": 2,
    "inlet_profile": 2,
    "outlet": 3,
    "pressure_pin": 1,
}


class AssemblyError(ValueError):
    """Cloud tags or reference data inconsistent with the requested system."""


@dataclass
class ResidualSystem:
    """Dense system with row provenance tags."""

    A: np.ndarray
    b: np.ndarray
    row_tags: np.ndarray  # array of strings, one per row
    n_kernels: int
    fields: tuple[str, ...]

    def __post_init__(self):
        self.A = np.asarray(self.A, dtype=float)
        self.b = np.asarray(self.b, dtype=float)
        self.row_tags = np.asarray(self.row_tags)
        if self.A.shape[0] != len(self.b) or self.A.shape[0] != len(self.row_tags):
            raise AssemblyError("A, b and row_tags must agree on the row count")
        if self.A.shape[1] != self.n_kernels * len(self.fields):
            raise AssemblyError("column count must equal n_kernels * n_fields")
        if not np.all(np.isfinite(self.A)) or not np.all(np.isfinite(self.b)):
            raise AssemblyError("system contains non-finite entries")

    @property
    def n_rows(self) -> int:
        return self.A.shape[0]

    @property
    def n_unknowns(self) -> int:
        return self.A.shape[1]

    def residual(self, c) -> np.ndarray:
        return self.A @ np.asarray(c, dtype=float) - self.b


@dataclass
class ReferenceField:
    """Velocities at the interior points, the quasi-linearization point."""

    u: np.ndarray
    v: np.ndarray | None = None

    def __post_init__(self):
        self.u = np.asarray(self.u, dtype=float)
        if self.v is not None:
            self.v = np.asarray(self.v, dtype=float)
        if not np.all(np.isfinite(self.u)) or (
            self.v is not None and not np.all(np.isfinite(self.v))
        ):
            raise AssemblyError("reference field contains non-finite values")


def assemble_poisson(kernels: KernelSet, cloud: PointCloud, forcing: float = 1.0) -> ResidualSystem:
    """-(u_xx + u_yy) = forcing on interior points, Dirichlet rows on the boundary."""
    for tag in cloud.tags:
        if tag.kind != "dirichlet_scalar":
            raise AssemblyError(f"poisson assembly expects dirichlet_scalar tags, got {tag.kind}")
    fb = eval_features(kernels, cloud.interior)
    rows = [-fb.laplacian]
    rhs = [np.full(cloud.n_interior, float(forcing))]
    tags = ["pde"] * cloud.n_interior
    if cloud.n_boundary:
        phi_b = eval_features(kernels, cloud.boundary).phi
        rows.append(phi_b)
        rhs.append(np.array([tag.values[0] for tag in cloud.tags]))
        tags += ["bc"] * cloud.n_boundary
    return ResidualSystem(np.vstack(rows), np.concatenate(rhs), np.array(tags), kernels.n_kernels, ("u",))


def assemble_burgers(
    kernels: KernelSet,
    cloud: PointCloud,
    u_ref: ReferenceField,
    nu: float,
    ic_profile,
) -> ResidualSystem:
    """Quasi-linear space-time rows u_t + u_ref u_x - nu u_xx = 0.

    The cloud's second coordinate is time. Boundary points tagged
    initial_profile become rows phi c = ic_profile(x); dirichlet_scalar
    points become Dirichlet rows.
    """
    u_ref_vals = np.asarray(u_ref.u, dtype=float)
    if u_ref_vals.shape != (cloud.n_interior,):
        raise AssemblyError("u_ref must supply one value per interior point")
    fb = eval_features(kernels, cloud.interior)
    pde = fb.dphi_dy + u_ref_vals[:, None] * fb.dphi_dx - nu * fb.d2phi_dx2
    rows = [pde]
    rhs = [np.zeros(cloud.n_interior)]
    tags = ["pde"] * cloud.n_interior

    ic_mask = np.array([t.kind == "initial_profile" for t in cloud.tags], dtype=bool)
    if not ic_mask.any():
        raise AssemblyError("burgers assembly needs initial_profile rows")
    bc_mask = np.array([t.kind == "dirichlet_scalar" for t in cloud.tags], dtype=bool)
    if not np.all(ic_mask | bc_mask):
        raise AssemblyError("burgers boundary tags must be initial_profile or dirichlet_scalar")

    ic_pts = cloud.boundary[ic_mask]
    rows.append(eval_features(kernels, ic_pts).phi)
    rhs.append(np.asarray(ic_profile(ic_pts[:, 0]), dtype=float))
    tags += ["ic"] * len(ic_pts)

    if bc_mask.any():
        bc_pts = cloud.boundary[bc_mask]
        rows.append(eval_features(kernels, bc_pts).phi)
        rhs.append(np.array([t.values[0] for t, m in zip(cloud.tags, bc_mask) if m]))
        tags += ["bc"] * len(bc_pts)

    return ResidualSystem(np.vstack(rows), np.concatenate(rhs), np.array(tags), kernels.n_kernels, ("u",))


class NavierStokesAssembler:
    """Caches everything that stays fixed along a continuation ladder.

    A full system template (continuity rows, structural zero blocks,
    pressure-gradient columns, boundary rows) is built once; each stage only
    rewrites the advection+viscosity momentum blocks before solving.
    """

    def __init__(self, kernels: KernelSet, cloud: PointCloud):
        self.kernels = kernels
        self.cloud = cloud
        self.fb = eval_features(kernels, cloud.interior)
        n_int, n_k = cloud.n_interior, kernels.n_kernels
        A_bc, b_bc, tags_bc = assemble_bc_rows(kernels, cloud)
        n_rows = 3 * n_int + len(b_bc)

        template = np.zeros((n_rows, 3 * n_k))
        template[:n_int, :n_k] = self.fb.dphi_dx
        template[:n_int, n_k : 2 * n_k] = self.fb.dphi_dy
        template[n_int : 2 * n_int, 2 * n_k :] = self.fb.dphi_dx
        template[2 * n_int : 3 * n_int, 2 * n_k :] = self.fb.dphi_dy
        template[3 * n_int :, :] = A_bc
        self._template = template
        self._b = np.concatenate([np.zeros(3 * n_int), b_bc])
        self._tags = np.array(
            ["continuity"] * n_int
            + ["x-momentum"] * n_int
            + ["y-momentum"] * n_int
            + list(tags_bc)
        )

    def assemble(self, ref: ReferenceField | None, re: float) -> ResidualSystem:
        if re <= 0:
            raise AssemblyError("re must be positive")
        n_int = self.cloud.n_interior
        n_k = self.kernels.n_kernels
        if ref is None:
            u_ref = v_ref = None
        else:
            if ref.v is None:
                raise AssemblyError("navier-stokes reference needs both velocity components")
            u_ref, v_ref = ref.u, ref.v
            if u_ref.shape != (n_int,) or v_ref.shape != (n_int,):
                raise AssemblyError("reference field must supply one value per interior point")
        fb = self.fb
        advective_visc = -fb.laplacian / re
        if u_ref is not None:
            advective_visc = (
                advective_visc + u_ref[:, None] * fb.dphi_dx + v_ref[:, None] * fb.dphi_dy
            )
        A = self._template.copy()
        A[n_int : 2 * n_int, :n_k] = advective_visc
        A[2 * n_int : 3 * n_int, n_k : 2 * n_k] = advective_visc
        return ResidualSystem(A, self._b.copy(), self._tags, n_k, ("u", "v", "p"))


def assemble_navier_stokes(
    kernels: KernelSet,
    cloud: PointCloud,
    ref: ReferenceField | None,
    re: float,
) -> ResidualSystem:
    """Continuity + quasi-linear momentum rows over unknowns [c_u; c_v; c_p].

    ``ref=None`` selects Stokes mode (advection dropped). ``re`` is the
    reciprocal of the effective kinematic viscosity in the momentum rows.
    """
    return NavierStokesAssembler(kernels, cloud).assemble(ref, re)


def assemble_bc_rows(kernels: KernelSet, cloud: PointCloud):
    """Boundary rows for the coupled (u, v, p) system.

    Velocity Dirichlet tags contribute a phi row on the u block and one on
    the v block; outlets contribute dphi/dx rows for u and v plus a p
    Dirichlet row; pressure pins a single phi row on the p block.
    """
    n_k = kernels.n_kernels
    if cloud.n_boundary == 0:
        return np.zeros((0, 3 * n_k)), np.zeros(0), np.array([], dtype=object)
    fb = eval_features(kernels, cloud.boundary)
    zero = np.zeros(n_k)
    rows, rhs, tags = [], [], []
    for i, tag in enumerate(cloud.tags):
        phi, dphix = fb.phi[i], fb.dphi_dx[i]
        if tag.kind in ("no_slip", "moving_lid", "dirichlet_vector", "inlet_profile"):
            u_val, v_val = tag.values if tag.values else (0.0, 0.0)
            rows.append(np.concatenate([phi, zero, zero]))
            rhs.append(u_val)
            rows.append(np.concatenate([zero, phi, zero]))
            rhs.append(v_val)
            tags += ["bc", "bc"]
        elif tag.kind == "outlet":
            rows.append(np.concatenate([dphix, zero, zero]))
            rows.append(np.concatenate([zero, dphix, zero]))
            rows.append(np.concatenate([zero, zero, phi]))
            rhs += [0.0, 0.0, 0.0]
            tags += ["bc", "bc", "bc"]
        elif tag.kind == "pressure_pin":
            rows.append(np.concatenate([zero, zero, phi]))
            rhs.append(tag.values[0] if tag.values else 0.0)
            tags.append("pressure_pin")
        else:
            raise AssemblyError(f"unsupported boundary tag for coupled system: {tag.kind}")
    return np.array(rows), np.array(rhs), np.array(tags, dtype=object)


def expected_ns_rows(cloud: PointCloud) -> int:
    """Row count bookkeeping for the coupled system."""
    n = 3 * cloud.n_interior
    for tag in cloud.tags:
        try:
            n += NS_ROWS_PER_TAG[tag.kind]
        except KeyError:
            raise AssemblyError(f"unsupported boundary tag for coupled system: {tag.kind}")
    return n


def dump_system(system: ResidualSystem, path, tags_path=None) -> None:
    """Binary dump: 16-byte header (magic, n_rows, n_cols), row-major A, then b."""
    with open(path, "wb") as fh:
        fh.write(MAGIC)
        fh.write(struct.pack("<II", system.n_rows, system.n_unknowns))
        fh.write(np.ascontiguousarray(system.A).tobytes())
        fh.write(system.b.tobytes())
    if tags_path is not None:
        with open(tags_path, "w") as fh:
            fh.write("row,tag\n")
            for i, t in enumerate(system.row_tags):
                fh.write(f"{i},{t}\n")


def load_system(path, tags_path=None, n_kernels=None, fields=("u",)):
    """Inverse of dump_system; tags default to 'pde' when no tags file given."""
    with open(path, "rb") as fh:
        magic = fh.read(8)
        if magic != MAGIC:
            raise AssemblyError("bad magic in system dump")
        n_rows, n_cols = struct.unpack("<II", fh.read(8))
        A = np.frombuffer(fh.read(8 * n_rows * n_cols), dtype=float).reshape(n_rows, n_cols)
        b = np.frombuffer(fh.read(8 * n_rows), dtype=float)
    if tags_path is not None:
        tags = []
        with open(tags_path) as fh:
            fh.readline()
            for line in fh:
                tags.append(line.strip().split(",", 1)[1])
        tags = np.array(tags, dtype=object)
    else:
        tags = np.array(["pde"] * n_rows, dtype=object)
    if n_kernels is None:
        n_kernels = n_cols // len(fields)
    return ResidualSystem(A.copy(), b.copy(), tags, n_kernels, tuple(fields))
