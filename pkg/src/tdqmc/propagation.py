"""Time evolution of the concurrent walker / guide-wave ensembles.

Real-time stepping is Crank-Nicolson per guide wave with its own effective
potential frozen at step start, walkers advance along their paired wave's
Bohmian velocity. Ground-state preparation runs drift-free imaginary-time
diffusion with annealed noise plus birth/death branching of walker-wave
pairs. The variational window parameter alpha is found by scanning the
prepared ground-state energy.
"""

import logging
from dataclasses import dataclass

import numpy as np

from . import ensemble as ens
from . import kernels
from .errors import (
    LinearSolveFailure,
    NoConvergence,
    NodeProximity,
    PopulationCollapse,
    ZeroNorm,
)
from .grids import Grid1D, WaveFn1D, normalize
from .potentials import SoftCoreParams, field_at, v_ee, v_en

log = logging.getLogger(__name__)

AMPLITUDE_FLOOR_FRAC = 1e-8


@dataclass(frozen=True)
class TimeStepConfig:
    """Step sizes and horizons (a.u.). CN is unconditionally stable; accuracy
    still needs dt_real * max|V| well below 1, which the desk defaults honor."""

    dt_real: float = 0.02
    dtau_imag: float = 0.02
    t_total: float = 4.0
    anneal_tau: float = 2.0

    def __post_init__(self):
        for name in ("dt_real", "dtau_imag", "t_total", "anneal_tau"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be > 0")


@dataclass
class EnsembleState:
    """N x M guide waves plus the paired walker clouds at a common time.

    waves[i, k] and clouds[i].positions[k] always advance together; replica
    k of every electron forms one joint configuration.
    """

    grid: Grid1D
    waves: np.ndarray                 # (N, M, n) complex
    clouds: list
    kernel: ens.KernelConfig
    t: float = 0.0

    @property
    def n_electrons(self):
        return self.waves.shape[0]

    @property
    def m(self):
        return self.waves.shape[1]

    def wave(self, i, k) -> WaveFn1D:
        return WaveFn1D(self.grid, self.waves[i, k].copy())

    def wave_norms(self):
        w = self.grid.trapz_weights()
        return np.sqrt(np.sum(np.abs(self.waves) ** 2 * w, axis=2))


# ---------------------------------------------------------------------------
# pointwise wave diagnostics

def _gradient_rows(waves, dx):
    g = np.empty_like(waves)
    g[:, 1:-1] = (waves[:, 2:] - waves[:, :-2]) / (2.0 * dx)
    g[:, 0] = (waves[:, 1] - waves[:, 0]) / dx
    g[:, -1] = (waves[:, -1] - waves[:, -2]) / dx
    return g


def _bracket(xs, grid: Grid1D):
    s = np.clip((xs - grid.x_min) / grid.dx, 0.0, grid.n_points - 1.000001)
    j = s.astype(np.intp)
    return j, s - j


def _log_derivative_rows(waves, xs, grid):
    """(d/dx psi)/psi of each row's wave at its own point, node-guarded."""
    j, f = _bracket(xs, grid)
    rows = np.arange(waves.shape[0])
    grad = _gradient_rows(waves, grid.dx)
    psi_p = (1.0 - f) * waves[rows, j] + f * waves[rows, j + 1]
    grad_p = (1.0 - f) * grad[rows, j] + f * grad[rows, j + 1]
    floor = AMPLITUDE_FLOOR_FRAC * np.max(np.abs(waves), axis=1)
    bad = np.abs(psi_p) < floor
    if np.any(bad):
        log.debug("velocity: %d node-proximity events", int(bad.sum()))
    ratio = grad_p / np.where(bad, 1.0, psi_p)
    return np.where(bad, 0.0, ratio)


def _velocity_rows(waves, xs, grid, v_cap=None):
    """Bohmian velocity of each row's wave at its own point xs[k]."""
    v = np.imag(_log_derivative_rows(waves, xs, grid))
    if v_cap is not None:
        v = np.clip(v, -v_cap, v_cap)
    return v


def _quantum_drift_rows(waves, xs, grid, cap=25.0):
    """DMC quantum force Re[(d/dx psi)/psi]; confines Langevin walkers to
    the |psi|^2 distribution of their own wave."""
    return np.clip(np.real(_log_derivative_rows(waves, xs, grid)), -cap, cap)


def bohmian_velocity(w: WaveFn1D, x, v_cap=None):
    """de Broglie-Bohm guiding velocity Im[(d/dx w)/w] at x (hbar = m = 1).

    Near nodes (|w| under 1e-8 of its max) the ratio is singular: the value
    is capped instead of raised, and the event is logged.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    waves = np.broadcast_to(w.values, (xs.size, w.values.size))
    v = _velocity_rows(np.ascontiguousarray(waves), xs, w.grid, v_cap=v_cap)
    return float(v[0]) if np.isscalar(x) else v


def _local_energy_rows(waves, v_rows, xs, grid, strict=False):
    """Re[(-1/2 w'' + V w)/w] of each row's wave at its own point."""
    dx = grid.dx
    j, f = _bracket(xs, grid)
    j = np.clip(j, 1, grid.n_points - 3)  # need j-1 .. j+2 for both nodes
    rows = np.arange(waves.shape[0])

    def node_energy(idx):
        lap = (waves[rows, idx - 1] - 2.0 * waves[rows, idx]
               + waves[rows, idx + 1]) / dx**2
        psi = waves[rows, idx]
        floor = AMPLITUDE_FLOOR_FRAC * np.max(np.abs(waves), axis=1)
        bad = np.abs(psi) < floor
        if np.any(bad):
            if strict:
                raise NodeProximity("local energy at a node")
            log.debug("local energy: %d node-proximity events", int(bad.sum()))
        psi = np.where(bad, floor, psi)
        return np.real((-0.5 * lap + v_rows[rows, idx] * psi) / psi)

    return (1.0 - f) * node_energy(j) + f * node_energy(j + 1)


def local_energy(w: WaveFn1D, v_total, x):
    """Local energy of one wave under the potential grid v_total, at x.

    Raises NodeProximity when |w(x)| is below the amplitude floor.
    """
    xs = np.atleast_1d(np.asarray(x, dtype=np.float64))
    waves = np.ascontiguousarray(np.broadcast_to(w.values, (xs.size, w.values.size)))
    v_rows = np.broadcast_to(np.asarray(v_total, dtype=np.float64),
                             (xs.size, w.values.size))
    e = _local_energy_rows(waves, v_rows, xs, w.grid, strict=True)
    return float(e[0]) if np.isscalar(x) else e


# ---------------------------------------------------------------------------
# effective-potential plumbing shared by both time directions

def _veff_stack(state: EnsembleState, params: SoftCoreParams, mode):
    """V_eff rows for every electron: (N, M, n)."""
    n = state.grid.n_points
    out = np.zeros((state.n_electrons, state.m, n))
    if params.b == 0.0:
        return out
    for i in range(state.n_electrons):
        out[i] = ens.effective_potential_all(state.grid.points, i, state.clouds,
                                             state.kernel, params, mode=mode)
    return out


def _refresh_sigma(state: EnsembleState):
    cfg = state.kernel
    for cloud in state.clouds:
        cfg = ens.update_sigma(cloud, cfg)
    state.kernel = cfg


def _renormalize_rows(waves, grid):
    w = grid.trapz_weights()
    norms = np.sqrt(np.sum(np.abs(waves) ** 2 * w, axis=1))
    if np.any(norms <= 0.0) or not np.all(np.isfinite(norms)):
        raise ZeroNorm("wave norm collapsed during imaginary-time step")
    return waves / norms[:, None]


# ---------------------------------------------------------------------------
# stepping

def real_time_step(state: EnsembleState, pulse, params: SoftCoreParams,
                   cfg: TimeStepConfig, veff=None, veff_mode="binned",
                   mask=None, update_sigma_after=True):
    """Advance waves and walkers by one dt of real time.

    Each guide wave sees v_en + V_ext + its own V_eff frozen at step start;
    walkers move by an RK2 midpoint rule along their paired wave's velocity.
    Norms are conserved to roundoff unless ``mask`` absorbs at the edges.
    """
    dt = cfg.dt_real
    grid = state.grid
    x = grid.points
    v_cap = grid.dx / dt
    if veff is None:
        veff = _veff_stack(state, params, veff_mode)
    v_static = v_en(x, params)
    e_mid = field_at(state.t + 0.5 * dt, pulse) if pulse is not None else 0.0
    v_ext = -x * e_mid if e_mid != 0.0 else 0.0

    for i in range(state.n_electrons):
        v_rows = veff[i] + (v_static + v_ext)
        old = state.waves[i]
        new = kernels.cn_step_batch(old, v_rows, grid.dx, dt, imag=False)
        if not np.all(np.isfinite(new[:, :: max(1, new.shape[1] // 8)])):
            raise LinearSolveFailure("non-finite wave after CN step")
        if mask is not None:
            new *= mask

        pos = state.clouds[i].positions
        k1 = _velocity_rows(old, pos, grid, v_cap=v_cap)
        xm = pos + 0.5 * dt * k1
        k2 = 0.5 * (_velocity_rows(old, xm, grid, v_cap=v_cap)
                    + _velocity_rows(new, xm, grid, v_cap=v_cap))
        pos_new = pos + dt * np.clip(k2, -v_cap, v_cap)
        np.clip(pos_new, grid.x_min + grid.dx, grid.x_max - grid.dx, out=pos_new)

        state.waves[i] = new
        state.clouds[i] = ens.WalkerCloud(i, pos_new)

    if update_sigma_after:
        _refresh_sigma(state)
    state.t += dt
    return state


def imaginary_time_step(state: EnsembleState, params: SoftCoreParams,
                        cfg: TimeStepConfig, rng, noise_var=None, veff=None,
                        veff_mode="binned", drift=True,
                        update_sigma_after=True):
    """One dtau of imaginary-time relaxation.

    Waves diffuse under CN on the imaginary-time equation and are
    renormalized. Walkers take the Markovian move
    dx = var(tau) v_q dtau + eta sqrt(dtau), with eta zero-mean Gaussian of
    the annealed variance var(tau) and v_q = Re[(d/dx phi)/phi] the quantum
    force of the walker's own wave (the Eq.-(12) velocity itself is zero in
    imaginary time). Scaling drift and noise by the same var(tau) keeps the
    walkers' stationary law at |phi|^2 at every annealing stage, so they
    freeze into a faithful sample of their guide wave; ``drift=False`` gives
    the bare-diffusion move.
    """
    dtau = cfg.dtau_imag
    grid = state.grid
    if noise_var is None:
        noise_var = np.exp(-state.t / cfg.anneal_tau)
    if veff is None:
        veff = _veff_stack(state, params, veff_mode)
    v_static = v_en(grid.points, params)

    for i in range(state.n_electrons):
        v_rows = veff[i] + v_static
        new = kernels.cn_step_batch(state.waves[i], v_rows, grid.dx, dtau,
                                    imag=True)
        state.waves[i] = _renormalize_rows(new, grid)
        if noise_var > 0.0:
            pos = state.clouds[i].positions
            eta = rng.normal(0.0, np.sqrt(noise_var), size=state.m)
            move = eta * np.sqrt(dtau)
            if drift:
                vq = _quantum_drift_rows(state.waves[i], pos, grid)
                move = move + noise_var * vq * dtau
            pos = pos + move
            np.clip(pos, grid.x_min + grid.dx, grid.x_max - grid.dx, out=pos)
            state.clouds[i] = ens.WalkerCloud(i, pos)

    if update_sigma_after:
        _refresh_sigma(state)
    state.t += dtau
    return state


def replica_energies(state: EnsembleState, params: SoftCoreParams, veff=None,
                     veff_mode="binned"):
    """Per-replica energies: (raw, corrected).

    ``raw[k] = sum_i E_L(i, k)`` drives branching (each wave's local energy
    counts its own windowed repulsion). ``corrected`` removes the double
    count of the pair term once, via the bare potential at the walker pair;
    its mean over k is the ground-state estimator.
    """
    if veff is None:
        veff = _veff_stack(state, params, veff_mode)
    v_static = v_en(state.grid.points, params)
    raw = np.zeros(state.m)
    for i in range(state.n_electrons):
        raw += _local_energy_rows(state.waves[i], veff[i] + v_static,
                                  state.clouds[i].positions, state.grid)
    corrected = raw.copy()
    for i in range(state.n_electrons):
        for j in range(i + 1, state.n_electrons):
            corrected -= v_ee(state.clouds[i].positions
                              - state.clouds[j].positions, params)
    return raw, corrected


def pair_interaction_energy(state: EnsembleState, params: SoftCoreParams,
                            veff=None, veff_mode="binned"):
    """Wave-side electron-electron energy: (1/2M) sum_{i,k} <phi_i^k|V_eff|phi_i^k>.

    The 1/2 removes double counting, so the sigma -> infinity limit matches
    the Hartree pair energy.
    """
    if veff is None:
        veff = _veff_stack(state, params, veff_mode)
    w = state.grid.trapz_weights()
    dens = np.abs(state.waves) ** 2
    per_wave = np.sum(dens * veff * w, axis=2)
    return float(np.mean(np.sum(per_wave, axis=0)) / 2.0)


def branch_resample(state: EnsembleState, e_ref, cfg: TimeStepConfig, rng,
                    energies=None, params=None, veff=None):
    """Birth/death resampling of whole walker-wave replicas.

    Multiplicity of replica k is floor(exp(-dtau (E_k - e_ref)) + u) on the
    raw local-energy sum; the population is clamped to [M/2, 2M] and then
    resampled to exactly M. Waves and walkers of all electrons clone or die
    as one unit. Returns the state plus e_ref moved to the new
    population-mean energy.
    """
    if energies is None:
        energies, _ = replica_energies(state, params, veff=veff)
    m = state.m
    u = rng.random(m)
    mult = np.floor(np.exp(-cfg.dtau_imag * (energies - e_ref)) + u).astype(np.intp)
    idx = np.repeat(np.arange(m), mult)
    if idx.size == 0:
        raise PopulationCollapse("all replica multiplicities are zero")
    if idx.size > 2 * m:
        idx = np.sort(rng.choice(idx, size=2 * m, replace=False))
    elif idx.size < m // 2:
        idx = np.sort(rng.choice(idx, size=m // 2, replace=True))
    if idx.size > m:
        idx = np.sort(rng.choice(idx, size=m, replace=False))
    elif idx.size < m:
        extra = rng.choice(idx, size=m - idx.size, replace=True)
        idx = np.sort(np.concatenate([idx, extra]))

    state.waves = state.waves[:, idx, :].copy()
    state.clouds = [ens.WalkerCloud(i, c.positions[idx].copy())
                    for i, c in enumerate(state.clouds)]
    e_ref_new = float(np.mean(energies[idx]))
    return state, e_ref_new


# ---------------------------------------------------------------------------
# ground-state preparation and the alpha scan

def rows_energy(waves, v_rows, grid):
    """<H> per row with the shared 3-point stencil and trapezoid weights."""
    dx = grid.dx
    lap = np.zeros_like(waves)
    lap[:, 1:-1] = (waves[:, :-2] - 2.0 * waves[:, 1:-1] + waves[:, 2:]) / dx**2
    lap[:, 0] = (waves[:, 1] - 2.0 * waves[:, 0]) / dx**2
    lap[:, -1] = (waves[:, -2] - 2.0 * waves[:, -1]) / dx**2
    hpsi = -0.5 * lap + v_rows * waves
    w = grid.trapz_weights()
    num = np.sum(np.conj(waves) * hpsi * w, axis=1).real
    den = np.sum(np.abs(waves) ** 2 * w, axis=1)
    return num / den


def one_body_ground_imagtime(grid: Grid1D, params: SoftCoreParams, dtau=0.05,
                             tol=1e-13, max_steps=200000):
    """Field-free one-body ground state by imaginary-time CN relaxation.

    Self-contained (no eigensolver) so the direct-diagonalization oracle in
    the tests stays an independent route.
    """
    x = grid.points
    psi = np.exp(-0.5 * x**2).astype(np.complex128)[None, :]
    v = v_en(x, params)[None, :]
    e_prev = np.inf
    for _ in range(max_steps):
        psi = kernels.cn_step_batch(psi, v, grid.dx, dtau, imag=True)
        psi = _renormalize_rows(psi, grid)
        e = float(rows_energy(psi, v, grid)[0])
        if abs(e - e_prev) < tol:
            return WaveFn1D(grid, psi[0].copy()), e
        e_prev = e
    raise NoConvergence("one-body imaginary-time relaxation stalled")


def sample_from_density(values, grid: Grid1D, m, rng):
    """Inverse-CDF draw of m points from a tabulated density."""
    f = np.clip(np.asarray(values, dtype=np.float64), 0.0, None)
    cdf = np.concatenate([[0.0], np.cumsum(0.5 * (f[1:] + f[:-1]) * grid.dx)])
    cdf /= cdf[-1]
    return np.interp(rng.random(m), cdf, grid.points)


@dataclass
class PrepResult:
    """Prepared ensemble plus the energy estimate and its diagnostics."""

    state: EnsembleState
    energy: float
    energy_std: float
    e_one_body: float
    tau_series: np.ndarray
    e_series: np.ndarray
    e_std_series: np.ndarray
    pair_energy: float
    converged: bool
    n_iterations: int


def prepare_ground_state(cfg, rng) -> PrepResult:
    """Relax the walker-wave ensemble to the correlated ground state.

    Waves start as identical copies of the one-body ground state (the
    mean-field point the windowing then differentiates); walkers are drawn
    from its density by inverse CDF. The loop iterates imaginary-time steps,
    sigma refreshes, effective-potential refreshes and branching until the
    windowed energy estimate settles within ``cfg.prep.tol_e``.

    The returned energy is the window mean of the per-step estimators
    (1/M) sum_k [sum_i E_L(i,k) - v_ee(x_1^k - x_2^k)].
    """
    grid = cfg.grid1d()
    params = cfg.model
    steps = cfg.steps
    prep = cfg.prep
    m = cfg.m
    n_el = 2

    phi0, e_one = one_body_ground_imagtime(grid, params)
    dens0 = np.abs(phi0.values) ** 2
    waves = np.tile(phi0.values, (n_el, m, 1))
    clouds = [ens.WalkerCloud(i, sample_from_density(dens0, grid, m, rng))
              for i in range(n_el)]
    window_scale = 1.0
    if getattr(cfg, "width_rule", "kde_bandwidth") == "kde_bandwidth":
        window_scale = 1.06 * m ** (-0.2)
    kernel = ens.KernelConfig(alpha=tuple(cfg.alpha),
                              sigma=(1.0,) * n_el,
                              sigma_floor=cfg.sigma_floor,
                              window_scale=window_scale)
    state = EnsembleState(grid, waves, clouds, kernel, t=0.0)
    _refresh_sigma(state)

    e_ref = None
    taus, means, stds = [], [], []
    max_steps = max(int(round(prep.max_tau / steps.dtau_imag)), 1)
    hold = prep.hold_tau if prep.hold_tau is not None else 3.0 * steps.anneal_tau
    if prep.min_tau is not None:
        min_tau = prep.min_tau
    else:
        # noise must be annealed out and the waves relaxed before the
        # window criterion is allowed to fire
        min_tau = max(hold + 2.0 * steps.anneal_tau, 0.5 * prep.max_tau)
    w = prep.window
    converged = False
    veff = None
    for s in range(1, max_steps + 1):
        veff = _veff_stack(state, params, cfg.veff_mode)
        e_raw, e_corr = replica_energies(state, params, veff=veff)
        taus.append(state.t)
        means.append(float(np.mean(e_corr)))
        stds.append(float(np.std(e_corr)))
        if e_ref is None:
            e_ref = float(np.mean(e_raw))
        hold_tau = (prep.hold_tau if prep.hold_tau is not None
                    else 3.0 * steps.anneal_tau)
        branch_stop = (prep.branch_stop_tau if prep.branch_stop_tau is not None
                       else hold_tau)
        if (prep.branch_stride and s % prep.branch_stride == 0
                and state.t <= branch_stop):
            state, e_ref = branch_resample(state, e_ref, steps, rng,
                                           energies=e_raw)
            veff = _veff_stack(state, params, cfg.veff_mode)
        # hold the noise while branching equilibrates, then anneal it out
        noise_var = prep.noise_var0 * np.exp(
            -max(state.t - hold_tau, 0.0) / steps.anneal_tau)
        imaginary_time_step(state, params, steps, rng, noise_var=noise_var,
                            veff=veff, veff_mode=cfg.veff_mode)
        if state.t >= min_tau and len(means) >= 2 * w:
            drift = abs(np.mean(means[-w:]) - np.mean(means[-2 * w : -w]))
            if drift < prep.tol_e:
                converged = True
                break
    if not converged and prep.require_convergence:
        raise NoConvergence(
            f"energy window drift above {prep.tol_e} after {max_steps} steps")

    tail = min(w, len(means))
    veff = _veff_stack(state, params, cfg.veff_mode)
    result = PrepResult(
        state=state,
        energy=float(np.mean(means[-tail:])),
        energy_std=float(np.std(means[-tail:])),
        e_one_body=e_one,
        tau_series=np.asarray(taus),
        e_series=np.asarray(means),
        e_std_series=np.asarray(stds),
        pair_energy=pair_interaction_energy(state, params, veff=veff),
        converged=converged,
        n_iterations=len(means),
    )
    return result


@dataclass
class AlphaScanResult:
    alphas: np.ndarray
    energies: np.ndarray
    energy_stds: np.ndarray
    alpha_star: float


def alpha_scan(cfg, alpha_grid, seed=None) -> AlphaScanResult:
    """Prepared-ground-state energy per alpha, sharing one seed across the
    grid; returns the table and the argmin (ties toward smaller alpha)."""
    alphas = sorted(float(a) for a in alpha_grid)
    if not alphas:
        raise ValueError("alpha_grid must not be empty")
    if any(not a > 0 for a in alphas):
        raise ValueError("alpha values must be > 0")
    seed = cfg.seed if seed is None else seed
    energies, stds = [], []
    for a in alphas:
        rng = np.random.Generator(np.random.Philox(seed))
        res = prepare_ground_state(cfg.with_alpha(a), rng)
        energies.append(res.energy)
        stds.append(res.energy_std)
        log.info("alpha scan: alpha=%.4g -> E0=%.6f", a, res.energy)
    best = int(np.argmin(energies))
    return AlphaScanResult(np.asarray(alphas), np.asarray(energies),
                           np.asarray(stds), alphas[best])
