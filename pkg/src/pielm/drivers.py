"""Curriculum drivers: time-block marching for Burgers and the Reynolds
ladder for steady Navier-Stokes.

Each Burgers block runs a predictor solve linearized about the block's
initial profile, then a corrector solve linearized about the predictor
field. The Navier-Stokes ladder starts from a Stokes solve and performs one
quasi-linear solve per Reynolds increment, always linearizing about the
previous stage's velocity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from pielm.assembly import NavierStokesAssembler, ReferenceField, assemble_burgers
from pielm.basis import FieldWeights, KernelSet, predict_field
from pielm.geometry import (
    Domain,
    PointCloud,
    Rectangle,
    ShockWindow,
    detect_shock_window,
    place_centers,
    sample_burgers_block,
)
from pielm.ioutil import fmt
from pielm.lsq import LsqReport, solve_least_squares
from pielm.seeding import substream
from pielm.sigma_rules import BurgersShockSigma, assign_sigmas


class DivergenceError(RuntimeError):
    """A stage produced a non-finite or wildly unresolved solution."""


RESIDUAL_ABORT = 10.0  # relative residual beyond which a stage counts as diverged


@dataclass(frozen=True)
class BurgersSchedule:
    n_blocks: int
    dt_block: float

    def __post_init__(self):
        if self.n_blocks < 1 or self.dt_block <= 0:
            raise ValueError("need n_blocks >= 1 and dt_block > 0")

    @property
    def t_total(self) -> float:
        return self.n_blocks * self.dt_block


@dataclass(frozen=True)
class ReynoldsSchedule:
    re_target: float
    delta: float

    def __post_init__(self):
        if self.re_target <= 0 or self.delta <= 0:
            raise ValueError("need re_target > 0 and delta > 0")


def reynolds_ladder(re_target: float, delta: float) -> list[float]:
    """Ascending Reynolds values delta, 2 delta, ... ending exactly at re_target."""
    if re_target <= 0 or delta <= 0:
        raise ValueError("need re_target > 0 and delta > 0")
    if re_target <= delta * (1.0 + 1e-12):
        return [re_target]
    q = re_target / delta
    n_full = int(round(q)) if abs(q - round(q)) <= 1e-9 * max(1.0, q) else int(math.floor(q))
    vals = [k * delta for k in range(1, n_full + 1)]
    if abs(vals[-1] - re_target) <= 1e-9 * max(1.0, re_target):
        vals[-1] = re_target
    else:
        vals.append(re_target)
    return vals


@dataclass
class StageRecord:
    label: str
    reports: dict[str, LsqReport]
    extras: dict = field(default_factory=dict)

    @property
    def n_solves(self) -> int:
        return len(self.reports)


@dataclass
class SolveTrace:
    records: list[StageRecord] = field(default_factory=list)

    @property
    def n_stages(self) -> int:
        return len(self.records)

    def to_csv(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(
                "stage,label,solve,relative_residual,effective_rank,"
                "sigma_max,sigma_min_kept,solve_time\n"
            )
            for i, rec in enumerate(self.records):
                for name, rep in rec.reports.items():
                    fh.write(
                        f"{i},{rec.label},{name},{fmt(rep.relative_residual)},"
                        f"{rep.effective_rank},{fmt(rep.sigma_max)},"
                        f"{fmt(rep.sigma_min_kept)},{fmt(rep.solve_time)}\n"
                    )

    def serialize(self, include_timing: bool = False) -> str:
        """Deterministic text form (timing excluded unless asked for)."""
        lines = []
        for i, rec in enumerate(self.records):
            for name, rep in rec.reports.items():
                parts = [
                    str(i),
                    str(rec.label),
                    name,
                    fmt(rep.relative_residual),
                    str(rep.effective_rank),
                    fmt(rep.sigma_max),
                    fmt(rep.sigma_min_kept),
                ]
                if include_timing:
                    parts.append(fmt(rep.solve_time))
                lines.append(",".join(parts))
        return "\n".join(lines)


# ---------------------------------------------------------------------------
# Burgers time-block marching


@dataclass(frozen=True)
class BurgersSampling:
    """Per-block collocation and kernel layout knobs.

    ``mirror_x`` enforces an exactly x-symmetric layout (points, kernels and
    widths), for odd-symmetric problems such as the standing shock; the
    detected window is snapped to x = 0 in that mode.
    """

    n_x_per_level: int = 80
    nt_levels: int = 5
    n_ic: int = 161
    n_bc_levels: int = 4
    window_size: float = 0.1
    fraction: float = 0.30
    use_window: bool = True
    detect_n: int = 1001
    mirror_x: bool = False

    @property
    def points_per_block(self) -> int:
        return self.n_x_per_level * self.nt_levels + self.n_ic + 2 * self.n_bc_levels


def run_burgers(
    domain: Rectangle,
    schedule: BurgersSchedule,
    ic,
    nu: float,
    n_kernels: int,
    sampling: BurgersSampling,
    seed: int,
    *,
    sigma_inside=(0.01, 0.04),
    sigma_outside=(0.02, 0.6),
    sigma_t_factor=(0.4, 0.6),
    rank_tol: float = 1e-10,
    probe_x: np.ndarray | None = None,
) -> tuple[list[FieldWeights], SolveTrace]:
    """March the viscous Burgers problem through the block schedule.

    The second domain axis is time; it must span exactly the scheduled
    duration. Returns per-block corrector weights plus the solve trace.
    """
    if abs((domain.y_max - domain.y_min) - schedule.t_total) > 1e-9 * max(1.0, schedule.t_total):
        raise ValueError("domain time extent must equal n_blocks * dt_block")
    x_min, x_max = domain.x_min, domain.x_max
    detect_x = np.linspace(x_min, x_max, sampling.detect_n)
    if probe_x is None:
        probe_x = np.linspace(x_min, x_max, 41)

    profile = ic
    weights_out: list[FieldWeights] = []
    trace = SolveTrace()
    for b in range(schedule.n_blocks):
        t0 = domain.y_min + b * schedule.dt_block
        t1 = t0 + schedule.dt_block
        block = Rectangle(x_min, x_max, t0, t1)

        window = None
        if sampling.use_window:
            window = detect_shock_window(
                np.asarray(profile(detect_x), dtype=float),
                detect_x,
                window_size=sampling.window_size,
                fraction=sampling.fraction,
            )
            if sampling.mirror_x and not window.no_gradient:
                window = ShockWindow(0.0, window.half_width, window.fraction)

        cloud = sample_burgers_block(
            block,
            sampling.n_x_per_level,
            sampling.nt_levels,
            sampling.n_ic,
            sampling.n_bc_levels,
            window,
            substream(seed, "sampling", b),
            mirror_x=sampling.mirror_x,
        )
        centers = place_centers(
            block, n_kernels, window, substream(seed, "centers", b), mirror_x=sampling.mirror_x
        )
        rule = BurgersShockSigma(
            x_left=None if window is None or window.no_gradient else window.left,
            x_right=None if window is None or window.no_gradient else window.right,
            dt_block=schedule.dt_block,
            inside_range=tuple(sigma_inside),
            outside_range=tuple(sigma_outside),
            t_range_factor=tuple(sigma_t_factor),
        )
        if sampling.mirror_x:
            half = n_kernels // 2
            sx_h, st_h = assign_sigmas(rule, centers[:half], block, substream(seed, "sigmas", b))
            sx = np.concatenate([sx_h, sx_h])  # mirror pairs share widths
            st = np.concatenate([st_h, st_h])
        else:
            sx, st = assign_sigmas(rule, centers, block, substream(seed, "sigmas", b))
        kernels = KernelSet.from_gaussians(centers, sx, st)

        # predictor: reference is the block-initial profile, constant in time
        u_ref = ReferenceField(np.asarray(profile(cloud.interior[:, 0]), dtype=float))
        system = assemble_burgers(kernels, cloud, u_ref, nu, profile)
        w_pred, rep_pred = solve_least_squares(system, rank_tol, kernels, label=f"block{b}:pred")
        _check_stage(w_pred, rep_pred, f"block {b} predictor")

        # corrector: reference is the predictor field at each point's own (x, t)
        u_corr = ReferenceField(predict_field(kernels, w_pred.c_u, cloud.interior))
        system = assemble_burgers(kernels, cloud, u_corr, nu, profile)
        w_corr, rep_corr = solve_least_squares(system, rank_tol, kernels, label=f"block{b}")
        _check_stage(w_corr, rep_corr, f"block {b} corrector")

        trace.records.append(
            StageRecord(
                label=str(b),
                reports={"predictor": rep_pred, "corrector": rep_corr},
                extras={
                    "window_center": None if window is None else window.center,
                    "t_end": t1,
                    "snapshot_x": probe_x,
                    "snapshot_u": predict_field(
                        kernels, w_corr.c_u, np.column_stack([probe_x, np.full(len(probe_x), t1)])
                    ),
                },
            )
        )
        weights_out.append(w_corr)
        profile = _end_profile(kernels, w_corr.c_u, t1)

    return weights_out, trace


def _end_profile(kernels, c_u, t_end):
    def profile(x):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        return predict_field(kernels, c_u, np.column_stack([x, np.full(len(x), t_end)]))

    return profile


def burgers_field(weights: list[FieldWeights], schedule: BurgersSchedule, t_start: float = 0.0):
    """Piecewise evaluator u(x, t) stitched from the per-block solutions."""

    def evaluate(x, t):
        x = np.atleast_1d(np.asarray(x, dtype=float))
        b = int(min(max((t - t_start) / schedule.dt_block, 0.0), schedule.n_blocks - 1))
        # fall back to the owning block when t sits on a block boundary
        if b > 0 and abs(t_start + b * schedule.dt_block - t) < 1e-12:
            b -= 1
        w = weights[b]
        return predict_field(w.kernels, w.c_u, np.column_stack([x, np.full(len(x), t)]))

    return evaluate


# ---------------------------------------------------------------------------
# Navier-Stokes Reynolds ladder


def reference_from_weights(kernels: KernelSet, weights: FieldWeights, points) -> ReferenceField:
    """Evaluate the velocity of a previous solve at the interior points."""
    u = predict_field(kernels, weights.c_u, points)
    v = predict_field(kernels, weights.c_v, points) if weights.c_v is not None else None
    return ReferenceField(u, v)


def run_navier_stokes(
    domain: Domain,
    schedule: ReynoldsSchedule,
    cloud: PointCloud,
    kernels: KernelSet,
    *,
    stokes_re: float = 1.0,
    re_to_coeff=None,
    rank_tol: float = 1e-10,
    use_corrector: bool = False,
    probe_points: np.ndarray | None = None,
) -> tuple[FieldWeights, SolveTrace]:
    """Continuation from Stokes flow up the Reynolds ladder.

    ``re_to_coeff`` maps a ladder Reynolds number to the coefficient used in
    the momentum rows (reciprocal effective viscosity); identity by default.
    One solve per stage; ``use_corrector`` adds a second solve linearized
    about the stage's own solution.
    """
    if re_to_coeff is None:
        re_to_coeff = lambda re: re  # noqa: E731
    assembler = NavierStokesAssembler(kernels, cloud)
    trace = SolveTrace()

    system = assembler.assemble(None, stokes_re)
    current, report = solve_least_squares(system, rank_tol, kernels, label="stokes")
    _check_stage(current, report, "stokes stage")
    trace.records.append(
        StageRecord(
            label="stokes",
            reports={"solve": report},
            extras=_ns_extras(current, probe_points, weights=current),
        )
    )

    for re_value in reynolds_ladder(schedule.re_target, schedule.delta):
        ref = reference_from_weights(kernels, current, cloud.interior)
        system = assembler.assemble(ref, re_to_coeff(re_value))
        current, report = solve_least_squares(system, rank_tol, kernels, label=f"Re={re_value:g}")
        _check_stage(current, report, f"Re={re_value:g} stage")
        reports = {"solve": report}
        if use_corrector:
            ref = reference_from_weights(kernels, current, cloud.interior)
            system = assembler.assemble(ref, re_to_coeff(re_value))
            current, rep_corr = solve_least_squares(
                system, rank_tol, kernels, label=f"Re={re_value:g}"
            )
            _check_stage(current, rep_corr, f"Re={re_value:g} corrector")
            reports["corrector"] = rep_corr
        trace.records.append(
            StageRecord(label=f"{re_value:g}", reports=reports, extras=_ns_extras(current, None))
        )

    if probe_points is not None:
        trace.records[-1].extras.update(_ns_extras(current, probe_points))
    return current, trace


def _ns_extras(field: FieldWeights, probe_points, **extra):
    out = dict(extra)
    if probe_points is not None:
        out["snapshot_u"] = field.u(probe_points)
        out["snapshot_v"] = field.v(probe_points)
    return out


def _check_stage(weights: FieldWeights, report: LsqReport, stage: str) -> None:
    if not weights.is_finite():
        raise DivergenceError(f"{stage}: non-finite solution")
    if not np.isfinite(report.relative_residual) or report.relative_residual > RESIDUAL_ABORT:
        raise DivergenceError(
            f"{stage}: relative residual {report.relative_residual:.3e} exceeds {RESIDUAL_ABORT}"
        )
