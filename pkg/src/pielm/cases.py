"""End-to-end case pipelines: sampling -> kernels -> widths -> curriculum ->
metrics and artifacts on disk."""

from __future__ import annotations

import os
import time

import numpy as np

from pielm import geometry
from pielm.basis import FieldWeights, KernelSet
from pielm.assembly import assemble_poisson
from pielm.config import RunConfig
from pielm.drivers import (
    BurgersSampling,
    BurgersSchedule,
    ReynoldsSchedule,
    SolveTrace,
    burgers_field,
    run_burgers,
    run_navier_stokes,
)
from pielm.ioutil import fmt
from pielm.lsq import solve_least_squares
from pielm.metrics import MetricsReport, compare_to_oracle, relative_l2, rmse
from pielm.oracles import (
    cache_dir,
    cache_key,
    cached_burgers_fd,
    cached_cavity_fd,
    flux_check,
    named_initial_condition,
    poisson_exact,
)
from pielm.seeding import substream
from pielm.sigma_rules import (
    CavityWallSigma,
    ConstantSigma,
    StenosisWallSigma,
    assign_sigmas,
)


def run_case(cfg: RunConfig) -> MetricsReport:
    """Execute the configured case and write all artifacts to cfg.out_dir."""
    os.makedirs(cfg.out_dir, exist_ok=True)
    t_start = time.perf_counter()
    runner = {
        "poisson_disk": _run_poisson,
        "burgers_standing": _run_burgers_case,
        "burgers_traveling": _run_burgers_case,
        "cavity": _run_cavity,
        "stenosis": _run_stenosis,
    }[cfg.case]
    report, artifacts = runner(cfg)
    report.wall_clock["total"] = time.perf_counter() - t_start

    metrics_path = os.path.join(cfg.out_dir, "metrics.json")
    with open(metrics_path, "w") as fh:
        fh.write(report.metrics_json())
    with open(os.path.join(cfg.out_dir, "timing.json"), "w") as fh:
        fh.write(report.timing_json())
    artifacts += ["metrics.json", "timing.json"]

    summary = {
        "case": cfg.case,
        "seed": cfg.seed,
        "artifacts": sorted(set(artifacts)),
    }
    import json

    with open(os.path.join(cfg.out_dir, "summary.json"), "w") as fh:
        json.dump(summary, fh, sort_keys=True, indent=2)
    return report


def export_field_grid(weights: FieldWeights, grid_points: np.ndarray, path) -> None:
    """CSV x,y,u[,v,p] at the probe grid points."""
    columns = [grid_points[:, 0], grid_points[:, 1], weights.u(grid_points)]
    header = "x,y,u"
    if weights.c_v is not None:
        columns.append(weights.v(grid_points))
        header += ",v"
    if weights.c_p is not None:
        columns.append(weights.p(grid_points))
        header += ",p"
    _write_table(path, header, columns)


def _write_table(path, header, columns):
    columns = [np.asarray(c) for c in columns]
    with open(path, "w") as fh:
        fh.write(header + "\n")
        for row in zip(*columns):
            fh.write(",".join(fmt(v) for v in row) + "\n")


# ---------------------------------------------------------------------------
# poisson on the unit disk


def _run_poisson(cfg: RunConfig):
    p = cfg.poisson
    domain = geometry.UnitDisk()
    t0 = time.perf_counter()
    cloud = geometry.sample_disk(p.n_interior, p.n_boundary, substream(cfg.seed, "sampling"))
    centers = geometry.place_centers(domain, p.n_kernels, None, substream(cfg.seed, "centers"))
    sx, sy = assign_sigmas(ConstantSigma(p.sigma), centers, domain, substream(cfg.seed, "sigmas"))
    kernels = KernelSet.from_gaussians(centers, sx, sy)
    system = assemble_poisson(kernels, cloud)
    weights, lsq_report = solve_least_squares(system, cfg.rank_tol, kernels, label="poisson")
    solve_time = time.perf_counter() - t0

    probe = _disk_probe_grid(p.probe_n)
    pred = weights.u(probe)
    exact = poisson_exact(probe)

    report = MetricsReport(case=cfg.case, seed=cfg.seed)
    report.field_errors["u"] = {"rmse": rmse(pred, exact), "relative_l2": relative_l2(pred, exact)}
    report.scalars["n_interior"] = cloud.n_interior
    report.scalars["n_boundary"] = cloud.n_boundary
    report.lsq_summary = _lsq_dict(lsq_report)
    report.wall_clock["solve"] = solve_time

    artifacts = _common_artifacts(cfg, cloud, kernels, weights)
    export_field_grid(weights, probe, os.path.join(cfg.out_dir, "fields.csv"))
    artifacts.append("fields.csv")
    return report, artifacts


def _disk_probe_grid(n):
    g = np.linspace(-1.0, 1.0, n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    pts = np.column_stack([X.ravel(), Y.ravel()])
    return pts[pts[:, 0] ** 2 + pts[:, 1] ** 2 <= 1.0]


# ---------------------------------------------------------------------------
# burgers time-block cases


def _run_burgers_case(cfg: RunConfig):
    b = cfg.burgers
    schedule = BurgersSchedule(b.n_blocks, b.dt_block)
    domain = geometry.Rectangle(-1.0, 1.0, 0.0, schedule.t_total)
    sampling = BurgersSampling(
        n_x_per_level=b.n_x_per_level,
        nt_levels=b.nt_levels,
        n_ic=b.n_ic,
        n_bc_levels=b.n_bc_levels,
        window_size=b.window_size,
        fraction=b.fraction,
        use_window=b.use_window,
        detect_n=b.detect_n,
        mirror_x=b.mirror_x,
    )
    ic = named_initial_condition(b.ic)
    t0 = time.perf_counter()
    weights_list, trace = run_burgers(
        domain, schedule, ic, b.nu, b.n_kernels, sampling, cfg.seed, rank_tol=cfg.rank_tol
    )
    solve_time = time.perf_counter() - t0

    probe_times = [t for t in b.probe_times if t <= schedule.t_total + 1e-12]
    oracle = cached_burgers_fd(
        {
            "ic_name": b.ic,
            "nu": b.nu,
            "nx": b.oracle_nx,
            "t_end": schedule.t_total,
            "snapshot_times": probe_times,
            "cfl": b.oracle_cfl,
        }
    )
    evaluate = burgers_field(weights_list, schedule)
    xf = np.linspace(-1.0, 1.0, b.probe_nx)

    report = MetricsReport(case=cfg.case, seed=cfg.seed)
    from pielm.oracles import burgers_profile

    window_centers = np.array(
        [r.extras["window_center"] for r in trace.records], dtype=float
    ) if sampling.use_window else np.array([])
    final_center = float(window_centers[-1]) if len(window_centers) else 0.0

    for t in probe_times:
        pred = evaluate(xf, t)
        ref = np.interp(xf, oracle.x, burgers_profile(oracle, t))
        outside = np.abs(xf - final_center) > b.window_size / 2.0
        report.field_errors[f"u@t={t:g}"] = {
            "rmse": rmse(pred, ref),
            "relative_l2": relative_l2(pred, ref),
            "rmse_outside_window": rmse(pred[outside], ref[outside]),
            "max_error": float(np.abs(pred - ref).max()),
        }
        if b.ic == "standing":
            report.scalars[f"odd_defect@t={t:g}"] = float(np.abs(pred + pred[::-1]).max())

    t_final = probe_times[-1] if probe_times else schedule.t_total
    xg = np.linspace(-1.0, 1.0, 2001)
    ug = evaluate(xg, t_final)
    slopes = np.abs(np.diff(ug) / np.diff(xg))
    report.scalars["shock_location"] = float(xg[np.argmax(slopes)])
    if len(window_centers):
        report.scalars["window_center_first"] = float(window_centers[0])
        report.scalars["window_center_final"] = final_center
        after = window_centers[
            np.array([i * b.dt_block >= 0.05 - 1e-12 for i in range(len(window_centers))])
        ]
        if len(after) > 1:
            report.scalars["window_monotone_after_t05"] = bool(
                np.all(np.diff(after) >= -1e-12)
            )
    report.lsq_summary = _lsq_dict(trace.records[-1].reports["corrector"])
    report.scalars["n_blocks"] = schedule.n_blocks
    report.scalars["points_per_block"] = sampling.points_per_block
    report.wall_clock["solve"] = solve_time

    artifacts = []
    trace.to_csv(os.path.join(cfg.out_dir, "trace.csv"))
    artifacts.append("trace.csv")
    columns_x, columns_t, columns_u = [], [], []
    for t in probe_times:
        columns_x.append(xf)
        columns_t.append(np.full(len(xf), t))
        columns_u.append(evaluate(xf, t))
    _write_table(
        os.path.join(cfg.out_dir, "fields.csv"),
        "x,y,u",
        [np.concatenate(columns_x), np.concatenate(columns_t), np.concatenate(columns_u)],
    )
    artifacts.append("fields.csv")
    final = weights_list[-1]
    final.kernels.to_csv(os.path.join(cfg.out_dir, "kernels.csv"))
    final.weights_to_csv(os.path.join(cfg.out_dir, "weights"))
    artifacts += ["kernels.csv", "weights_u.csv"]
    return report, artifacts


# ---------------------------------------------------------------------------
# lid-driven cavity


def _run_cavity(cfg: RunConfig):
    c = cfg.cavity
    domain = geometry.CavitySquare()
    cloud = geometry.sample_chebyshev_square(c.n_per_axis)
    centers = geometry.place_centers(domain, c.n_kernels, None, substream(cfg.seed, "centers"))
    sx, sy = assign_sigmas(CavityWallSigma(), centers, domain, substream(cfg.seed, "sigmas"))
    kernels = KernelSet.from_gaussians(centers, sx, sy)

    t0 = time.perf_counter()
    weights, trace = run_navier_stokes(
        domain,
        ReynoldsSchedule(c.re_target, c.delta),
        cloud,
        kernels,
        stokes_re=c.stokes_re,
        rank_tol=cfg.rank_tol,
    )
    solve_time = time.perf_counter() - t0

    oracle = cached_cavity_fd({"re": c.re_target, "n_grid": c.oracle_n_grid})
    g = np.linspace(c.probe_margin, 1.0 - c.probe_margin, c.probe_n)
    X, Y = np.meshgrid(g, g, indexing="ij")
    probe = np.column_stack([X.ravel(), Y.ravel()])
    u_p, v_p = weights.velocity(probe)

    report = MetricsReport(case=cfg.case, seed=cfg.seed)
    report.field_errors.update(compare_to_oracle({"u": u_p, "v": v_p}, oracle, probe))
    from pielm.metrics import interpolate_oracle

    speed_p = np.hypot(u_p, v_p)
    speed_o = np.hypot(
        interpolate_oracle(oracle, "u", probe), interpolate_oracle(oracle, "v", probe)
    )
    report.field_errors["velocity_magnitude"] = {
        "rmse": rmse(speed_p, speed_o),
        "relative_l2": relative_l2(speed_p, speed_o),
    }

    ys = oracle.y[1:-1]
    u_cl = weights.u(np.column_stack([np.full(len(ys), 0.5), ys]))
    v_cl = weights.v(np.column_stack([ys, np.full(len(ys), 0.5)]))
    report.centerlines["u_mid_vertical"] = {
        "coord": ys,
        "pielm": u_cl,
        "oracle": oracle.meta["u_centerline"][1:-1],
    }
    report.centerlines["v_mid_horizontal"] = {
        "coord": ys,
        "pielm": v_cl,
        "oracle": oracle.meta["v_centerline"][1:-1],
    }
    report.scalars["centerline_max_du"] = float(
        np.abs(u_cl - oracle.meta["u_centerline"][1:-1]).max()
    )
    report.scalars["centerline_max_dv"] = float(
        np.abs(v_cl - oracle.meta["v_centerline"][1:-1]).max()
    )

    stokes = trace.records[0].extras["weights"]
    us = stokes.u(probe).reshape(c.probe_n, c.probe_n)
    vs = stokes.v(probe).reshape(c.probe_n, c.probe_n)
    report.scalars["stokes_mirror_defect_u"] = float(np.abs(us - us[::-1, :]).max())
    report.scalars["stokes_mirror_defect_v"] = float(np.abs(vs + vs[::-1, :]).max())
    report.scalars["n_stages"] = trace.n_stages
    report.lsq_summary = _lsq_dict(trace.records[-1].reports["solve"])
    report.wall_clock["solve"] = solve_time

    artifacts = _common_artifacts(cfg, cloud, kernels, weights)
    trace.to_csv(os.path.join(cfg.out_dir, "trace.csv"))
    export_field_grid(weights, probe, os.path.join(cfg.out_dir, "fields.csv"))
    _write_table(
        os.path.join(cfg.out_dir, "centerlines.csv"),
        "coord,u_pielm,u_oracle,v_pielm,v_oracle",
        [ys, u_cl, oracle.meta["u_centerline"][1:-1], v_cl, oracle.meta["v_centerline"][1:-1]],
    )
    artifacts += ["trace.csv", "fields.csv", "centerlines.csv"]
    return report, artifacts


# ---------------------------------------------------------------------------
# stenotic channel


def _stenosis_domain(cfg: RunConfig) -> geometry.StenoticChannel:
    s = cfg.stenosis
    return geometry.StenoticChannel(
        length=s.length,
        inlet_half_width=s.inlet_half_width,
        throat_half_width=s.throat_half_width,
    )


def _stenosis_probe(domain, nx, ny):
    pts = []
    for xv in np.linspace(0.01, domain.length - 0.01, nx):
        wl = domain.wall_half_width(xv) * 0.98
        for yv in np.linspace(-wl, wl, ny):
            pts.append((xv, yv))
    return np.array(pts)


def _solve_stenosis(cfg: RunConfig, n_pde, n_wall, n_inlet, n_outlet, n_kernels, stream_tag):
    s = cfg.stenosis
    domain = _stenosis_domain(cfg)
    cloud = geometry.sample_stenosis(
        domain, n_pde, n_wall, n_inlet, n_outlet, s.u_max,
        substream(cfg.seed, "sampling" + stream_tag),
    )
    centers = geometry.place_centers(
        domain, n_kernels, None, substream(cfg.seed, "centers" + stream_tag)
    )
    sx, sy = assign_sigmas(
        StenosisWallSigma(domain.throat_half_width), centers, domain,
        substream(cfg.seed, "sigmas" + stream_tag),
    )
    kernels = KernelSet.from_gaussians(centers, sx, sy)
    coeff = 1.0 / (s.u_max * s.inlet_half_width)  # 1/nu = Re / (U_max R_in)
    weights, trace = run_navier_stokes(
        domain,
        ReynoldsSchedule(s.re_target, s.delta),
        cloud,
        kernels,
        stokes_re=s.stokes_re,
        re_to_coeff=lambda re: re * coeff,
        rank_tol=cfg.rank_tol,
    )
    return domain, cloud, kernels, weights, trace


def _run_stenosis(cfg: RunConfig):
    s = cfg.stenosis
    t0 = time.perf_counter()
    domain, cloud, kernels, weights, trace = _solve_stenosis(
        cfg, s.n_pde, s.n_wall, s.n_inlet, s.n_outlet, s.n_kernels, ""
    )
    solve_time = time.perf_counter() - t0

    report = MetricsReport(case=cfg.case, seed=cfg.seed)
    stations = [0.0] + [x * domain.length for x in s.flux_stations]
    flux = flux_check(weights, domain, stations)
    q_in = flux[0.0]
    report.scalars["flux_inlet"] = q_in
    report.scalars["flux_defect"] = max(
        abs(flux[x] - q_in) / abs(q_in) for x in stations[1:]
    )
    for x, q in flux.items():
        report.scalars[f"flux@x={x:g}"] = q

    ny = 101
    mid = domain.length / 2.0
    ys_t = np.linspace(-domain.wall_half_width(mid), domain.wall_half_width(mid), ny)
    ut, vt = weights.velocity(np.column_stack([np.full(ny, mid), ys_t]))
    ys_i = np.linspace(-s.inlet_half_width, s.inlet_half_width, ny)
    ui, vi = weights.velocity(np.column_stack([np.zeros(ny), ys_i]))
    report.scalars["throat_max_speed"] = float(np.hypot(ut, vt).max())
    report.scalars["inlet_max_speed"] = float(np.hypot(ui, vi).max())
    p_out = weights.p(np.column_stack([np.full(ny, domain.length), ys_i]))
    report.scalars["outlet_pressure_mean"] = float(p_out.mean())

    probe = _stenosis_probe(domain, s.probe_nx, s.probe_ny)
    if s.compare_refined:
        refined = _refined_stenosis_fields(cfg, probe)
        u_p, v_p = weights.velocity(probe)
        p_p = weights.p(probe)
        speed = np.hypot(u_p, v_p)
        speed_ref = np.hypot(refined["u"], refined["v"])
        report.field_errors["velocity_magnitude"] = {
            "rmse": rmse(speed, speed_ref),
            "relative_l2": relative_l2(speed, speed_ref),
        }
        report.field_errors["p"] = {
            "rmse": rmse(p_p, refined["p"]),
            "relative_l2": relative_l2(p_p, refined["p"]),
        }

    report.scalars["n_stages"] = trace.n_stages
    report.lsq_summary = _lsq_dict(trace.records[-1].reports["solve"])
    report.wall_clock["solve"] = solve_time

    artifacts = _common_artifacts(cfg, cloud, kernels, weights)
    trace.to_csv(os.path.join(cfg.out_dir, "trace.csv"))
    export_field_grid(weights, probe, os.path.join(cfg.out_dir, "fields.csv"))
    artifacts += ["trace.csv", "fields.csv"]
    return report, artifacts


def _refined_stenosis_fields(cfg: RunConfig, probe):
    """Self-oracle: a refined solve of the same flow, cached on disk."""
    s = cfg.stenosis
    params = {
        "seed": cfg.seed,
        "re_target": s.re_target,
        "delta": s.delta,
        "scale": s.refined_scale,
        "kernel_scale": s.refined_kernel_scale,
        "n_probe": len(probe),
        "geometry": [s.length, s.inlet_half_width, s.throat_half_width, s.u_max],
    }
    path = os.path.join(cache_dir(), cache_key("stenosis_refined", params) + ".csv")
    if os.path.exists(path):
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
        return {"u": data[:, 2], "v": data[:, 3], "p": data[:, 4]}
    _, _, _, w_ref, _ = _solve_stenosis(
        cfg,
        int(s.n_pde * s.refined_scale),
        int(s.n_wall * s.refined_scale),
        int(s.n_inlet * s.refined_scale),
        int(s.n_outlet * s.refined_scale),
        int(s.n_kernels * s.refined_kernel_scale),
        "refined",
    )
    u, v = w_ref.velocity(probe)
    p = w_ref.p(probe)
    os.makedirs(cache_dir(), exist_ok=True)
    _write_table(path, "x,y,u,v,p", [probe[:, 0], probe[:, 1], u, v, p])
    return {"u": u, "v": v, "p": p}


# ---------------------------------------------------------------------------
# shared helpers


def _common_artifacts(cfg: RunConfig, cloud, kernels, weights) -> list[str]:
    cloud.to_csv(os.path.join(cfg.out_dir, "points.csv"))
    kernels.to_csv(os.path.join(cfg.out_dir, "kernels.csv"))
    weights.weights_to_csv(os.path.join(cfg.out_dir, "weights"))
    names = ["points.csv", "kernels.csv", "weights_u.csv"]
    if weights.c_v is not None:
        names += ["weights_v.csv", "weights_p.csv"]
    return names


def _lsq_dict(report) -> dict:
    return {
        "relative_residual": report.relative_residual,
        "effective_rank": report.effective_rank,
        "sigma_max": report.sigma_max,
        "sigma_min_kept": report.sigma_min_kept,
    }
