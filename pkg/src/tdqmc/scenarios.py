"""Reproduction scenarios behind the CLI: prepare, evolve, compare-fig2,
compare-fig3 and scan-alpha.

Every run writes resolved-config.json plus CSV artifacts (with JSON header
sidecars) into the output directory and returns a summary dict. Compare
modes drive both engines from the same initial walkers and emit paired
series on identical time stamps.
"""

import logging
import os
import time
import numpy as np

from . import io, kernels
from .config import RunConfig
from .grids import Density1D, kde_estimate, l1_distance, silverman_bandwidth
from .observables import (
    ObservableSeries,
    coherence,
    density_matrix_from_wave_array,
    survival_probability,
    trajectory_bundle_compare,
)
from .oracle import (
    TwoBodyState,
    absorbing_mask_1d,
    exact_ground_state,
    exact_real_time_step,
    exact_trajectory_velocity,
    reduced_density_matrix,
)
from .potentials import SoftCoreParams
from .propagation import alpha_scan, prepare_ground_state, real_time_step

log = logging.getLogger(__name__)


def _write_resolved(cfg: RunConfig, out_dir):
    doc = cfg.to_dict()
    doc["kernel_backend"] = kernels.backend_name
    io.write_json(os.path.join(out_dir, "resolved-config.json"), doc)


def _marginal_density(state: TwoBodyState) -> Density1D:
    g = state.psi.grid1
    w = g.trapz_weights()
    vals = np.sum(np.abs(state.psi.values) ** 2 * w[None, :], axis=1)
    return Density1D(g, vals)


def _stratified_replicas(positions, n_select, m):
    """Deterministic stratified pick: quantile representatives of the sorted
    initial cloud, so the fifty-trajectory figure is reproducible."""
    order = np.argsort(positions, kind="stable")
    picks = (np.arange(n_select) + 0.5) * m / n_select
    return np.sort(order[np.clip(picks.astype(np.intp), 0, m - 1)])


def run_prepare(cfg: RunConfig):
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    _write_resolved(cfg, out)
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    t0 = time.time()
    res = prepare_ground_state(cfg, rng)
    io.write_table(
        os.path.join(out, "energies.csv"), ["t", "E_mean", "E_std"],
        [res.tau_series.tolist(), res.e_series.tolist(),
         res.e_std_series.tolist()],
        {"format": "energies", "seed": cfg.seed, "engine": "tdqmc"})
    io.write_walkers(os.path.join(out, "walkers.csv"), res.state.clouds,
                     {"seed": cfg.seed, "t": res.state.t})
    summary = {
        "mode": "prepare",
        "e0": res.energy,
        "e0_std": res.energy_std,
        "e_one_body": res.e_one_body,
        "pair_energy": res.pair_energy,
        "converged": res.converged,
        "iterations": res.n_iterations,
        "sigma": list(res.state.kernel.sigma),
        "alpha": list(cfg.alpha),
        "seed": cfg.seed,
        "runtime_s": time.time() - t0,
    }
    io.write_json(os.path.join(out, "summary.json"), summary)
    return summary


def run_scan_alpha(cfg: RunConfig):
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    _write_resolved(cfg, out)
    t0 = time.time()
    res = alpha_scan(cfg, cfg.alpha_grid)
    io.write_table(
        os.path.join(out, "alpha_scan.csv"), ["alpha", "E0", "E_std"],
        [res.alphas.tolist(), res.energies.tolist(), res.energy_stds.tolist()],
        {"format": "alpha_scan", "seed": cfg.seed,
         "alpha_star": res.alpha_star})
    summary = {
        "mode": "scan-alpha",
        "alpha_star": res.alpha_star,
        "alphas": res.alphas.tolist(),
        "energies": res.energies.tolist(),
        "energy_stds": res.energy_stds.tolist(),
        "e0_at_star": float(res.energies[np.argmin(res.energies)]),
        "seed": cfg.seed,
        "runtime_s": time.time() - t0,
    }
    io.write_json(os.path.join(out, "summary.json"), summary)
    return summary


def _tdqmc_density_matrix(state, electron=0):
    return density_matrix_from_wave_array(state.grid, state.waves[electron])


def run_evolve(cfg: RunConfig):
    """Prepare, then drive the TDQMC ensemble with the laser; emit survival
    and coherence series plus walker dumps."""
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    _write_resolved(cfg, out)
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    t0 = time.time()
    res = prepare_ground_state(cfg, rng)
    state = res.state
    state.t = 0.0
    grid = state.grid
    mask = absorbing_mask_1d(grid, cfg.mask_edge_fraction)
    n_steps = int(round(cfg.steps.t_total / cfg.steps.dt_real))

    times, surv, coh = [], [], []

    def snapshot():
        rho = _tdqmc_density_matrix(state)
        times.append(state.t)
        surv.append(survival_probability(rho, cfg.x_bound))
        coh.append(coherence(rho, mode=cfg.coherence_mode))

    snapshot()
    for s in range(1, n_steps + 1):
        real_time_step(state, cfg.pulse, cfg.model, cfg.steps,
                       veff_mode=cfg.veff_mode, mask=mask)
        if s % cfg.snapshot_stride == 0 or s == n_steps:
            snapshot()

    s0, c0 = surv[0], coh[0]
    series = [
        ObservableSeries(np.array(times), np.array(surv) / s0, "survival", "tdqmc"),
        ObservableSeries(np.array(times), np.array(coh) / c0, "coherence", "tdqmc"),
    ]
    io.write_series(os.path.join(out, "survival.csv"), series[:1],
                    {"x_bound": cfg.x_bound, "seed": cfg.seed})
    io.write_series(os.path.join(out, "coherence.csv"), series[1:],
                    {"seed": cfg.seed, "coherence_mode": cfg.coherence_mode})
    io.write_walkers(os.path.join(out, "walkers.csv"), state.clouds,
                     {"seed": cfg.seed, "t": state.t})
    summary = {
        "mode": "evolve",
        "e0": res.energy,
        "final_survival": surv[-1] / s0,
        "final_coherence": coh[-1] / c0,
        "seed": cfg.seed,
        "runtime_s": time.time() - t0,
    }
    io.write_json(os.path.join(out, "summary.json"), summary)
    return summary


def run_compare_fig2(cfg: RunConfig):
    """Free-diffraction trajectory comparison: prepare the ground state,
    switch the nuclear attraction off, evolve both engines from the same
    initial walkers, and compare bundles and final densities."""
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    _write_resolved(cfg, out)
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    t0 = time.time()

    res = prepare_ground_state(cfg, rng)
    state = res.state
    state.t = 0.0
    grid = state.grid
    released = SoftCoreParams(a=0.0, b=cfg.model.b)

    # exact engine: correlated ground state on the same box, then release
    oracle_state, oracle_e = exact_ground_state(cfg.model, cfg.oracle_grid())
    oracle_state.t = 0.0

    m = state.m
    sel = _stratified_replicas(state.clouds[0].positions, cfg.n_trajectories, m)
    ex_x1 = state.clouds[0].positions.copy()
    ex_x2 = state.clouds[1].positions.copy()

    dt = cfg.steps.dt_real
    v_cap = grid.dx / dt
    n_steps = int(round(cfg.steps.t_total / dt))
    bw0 = silverman_bandwidth(state.clouds[0].positions)
    dens_init_td = kde_estimate(state.clouds[0].positions, bw0, grid)
    dens_init_ex = _marginal_density(oracle_state)

    times = [0.0]
    td_bundle = [state.clouds[0].positions[sel].copy()]
    ex_bundle = [ex_x1[sel].copy()]
    for s in range(1, n_steps + 1):
        # exact trajectories: midpoint rule across the exact step
        v1a, v2a = exact_trajectory_velocity(oracle_state, ex_x1, ex_x2, v_cap=v_cap)
        xm1 = ex_x1 + 0.5 * dt * v1a
        xm2 = ex_x2 + 0.5 * dt * v2a
        v1b, v2b = exact_trajectory_velocity(oracle_state, xm1, xm2, v_cap=v_cap)
        exact_real_time_step(oracle_state, None, released, cfg.steps)
        v1c, v2c = exact_trajectory_velocity(oracle_state, xm1, xm2, v_cap=v_cap)
        ex_x1 = ex_x1 + dt * 0.5 * (v1b + v1c)
        ex_x2 = ex_x2 + dt * 0.5 * (v2b + v2c)

        real_time_step(state, None, released, cfg.steps, veff_mode=cfg.veff_mode)

        if s % cfg.snapshot_stride == 0 or s == n_steps:
            times.append(state.t)
            td_bundle.append(state.clouds[0].positions[sel].copy())
            ex_bundle.append(ex_x1[sel].copy())

    td_bundle = np.asarray(td_bundle)
    ex_bundle = np.asarray(ex_bundle)
    bw = silverman_bandwidth(state.clouds[0].positions)
    metrics = trajectory_bundle_compare(td_bundle, ex_bundle, grid, bw)

    dens_final_td = kde_estimate(state.clouds[0].positions, bw, grid)
    dens_final_ex = _marginal_density(oracle_state)
    final_l1_marginal = l1_distance(dens_final_td, dens_final_ex)

    io.write_trajectories(os.path.join(out, "trajectories_tdqmc.csv"),
                          times, td_bundle, "tdqmc", {"seed": cfg.seed})
    io.write_trajectories(os.path.join(out, "trajectories_exact.csv"),
                          times, ex_bundle, "exact", {"seed": cfg.seed})
    io.write_table(
        os.path.join(out, "densities_initial.csv"), ["x", "tdqmc", "exact"],
        [grid.points.tolist(), dens_init_td.values.tolist(),
         dens_init_ex.values.tolist()],
        {"format": "density_pair", "t": 0.0, "seed": cfg.seed})
    io.write_table(
        os.path.join(out, "densities_final.csv"), ["x", "tdqmc", "exact"],
        [grid.points.tolist(), dens_final_td.values.tolist(),
         dens_final_ex.values.tolist()],
        {"format": "density_pair", "t": float(times[-1]), "seed": cfg.seed})
    io.write_table(
        os.path.join(out, "rms_series.csv"), ["t", "rms"],
        [list(times), metrics["rms_series"].tolist()],
        {"format": "rms_series", "seed": cfg.seed})

    summary = {
        "mode": "compare-fig2",
        "e0_tdqmc": res.energy,
        "e0_exact": oracle_e,
        "final_l1_marginal": final_l1_marginal,
        "final_l1_bundles": metrics["final_l1"],
        "mean_rms": metrics["mean_rms"],
        "final_rms": float(metrics["rms_series"][-1]),
        "grid_dx": grid.dx,
        "t_final": float(times[-1]),
        "n_trajectories": cfg.n_trajectories,
        "seed": cfg.seed,
        "runtime_s": time.time() - t0,
    }
    io.write_json(os.path.join(out, "summary.json"), summary)
    return summary


def run_compare_fig3(cfg: RunConfig):
    """Laser ionization and decoherence, TDQMC vs exact, on shared stamps."""
    out = cfg.output_dir
    os.makedirs(out, exist_ok=True)
    _write_resolved(cfg, out)
    rng = np.random.Generator(np.random.Philox(cfg.seed))
    t0 = time.time()

    res = prepare_ground_state(cfg, rng)
    state = res.state
    state.t = 0.0
    grid = state.grid
    mask1d = absorbing_mask_1d(grid, cfg.mask_edge_fraction)

    g2 = cfg.oracle_grid()
    oracle_state, oracle_e = exact_ground_state(cfg.model, g2)
    oracle_state.t = 0.0
    mask2d = absorbing_mask_1d(g2, cfg.mask_edge_fraction)

    dt = cfg.steps.dt_real
    n_steps = int(round(cfg.steps.t_total / dt))

    rows = {"t": [], "s_td": [], "s_ex": [], "c_td": [], "c_ex": []}

    def snapshot():
        rho_td = _tdqmc_density_matrix(state)
        rho_ex = reduced_density_matrix(oracle_state)
        rows["t"].append(state.t)
        rows["s_td"].append(survival_probability(rho_td, cfg.x_bound))
        rows["s_ex"].append(survival_probability(rho_ex, cfg.x_bound))
        rows["c_td"].append(coherence(rho_td, mode=cfg.coherence_mode))
        rows["c_ex"].append(coherence(rho_ex, mode=cfg.coherence_mode))

    snapshot()
    for s in range(1, n_steps + 1):
        real_time_step(state, cfg.pulse, cfg.model, cfg.steps,
                       veff_mode=cfg.veff_mode, mask=mask1d)
        exact_real_time_step(oracle_state, cfg.pulse, cfg.model, cfg.steps,
                             mask=mask2d)
        if s % cfg.snapshot_stride == 0 or s == n_steps:
            snapshot()

    t_arr = np.asarray(rows["t"])
    series = {}
    for key, label, engine in (("s_td", "survival", "tdqmc"),
                               ("s_ex", "survival", "exact"),
                               ("c_td", "coherence", "tdqmc"),
                               ("c_ex", "coherence", "exact")):
        vals = np.asarray(rows[key]) / rows[key][0]
        series[key] = ObservableSeries(t_arr, vals, label, engine)

    io.write_series(os.path.join(out, "survival.csv"),
                    [series["s_td"], series["s_ex"]],
                    {"x_bound": cfg.x_bound, "seed": cfg.seed})
    io.write_series(os.path.join(out, "coherence.csv"),
                    [series["c_td"], series["c_ex"]],
                    {"seed": cfg.seed, "coherence_mode": cfg.coherence_mode})

    from .observables import count_downward_steps

    dev_s = float(np.max(np.abs(series["s_td"].values - series["s_ex"].values)))
    dev_c = float(np.max(np.abs(series["c_td"].values - series["c_ex"].values)))
    summary = {
        "mode": "compare-fig3",
        "e0_tdqmc": res.energy,
        "e0_exact": oracle_e,
        "max_dev_survival": dev_s,
        "max_dev_coherence": dev_c,
        "final_survival_tdqmc": float(series["s_td"].values[-1]),
        "final_survival_exact": float(series["s_ex"].values[-1]),
        "final_coherence_tdqmc": float(series["c_td"].values[-1]),
        "final_coherence_exact": float(series["c_ex"].values[-1]),
        "survival_steps_tdqmc": count_downward_steps(series["s_td"].values),
        "survival_steps_exact": count_downward_steps(series["s_ex"].values),
        "seed": cfg.seed,
        "runtime_s": time.time() - t0,
    }
    io.write_json(os.path.join(out, "summary.json"), summary)
    return summary


_RUNNERS = {
    "prepare": run_prepare,
    "evolve": run_evolve,
    "compare-fig2": run_compare_fig2,
    "compare-fig3": run_compare_fig3,
    "scan-alpha": run_scan_alpha,
}


def run_scenario(cfg: RunConfig):
    """Dispatch a validated config to its mode pipeline.

    On error, partial outputs stay on disk and a failure marker file is
    written next to them.
    """
    runner = _RUNNERS[cfg.mode]
    try:
        return runner(cfg)
    except Exception as exc:
        os.makedirs(cfg.output_dir, exist_ok=True)
        io.write_json(os.path.join(cfg.output_dir, "failure.json"),
                      {"error": type(exc).__name__, "message": str(exc)})
        raise
