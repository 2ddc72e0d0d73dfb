"""Run configuration: flat JSON in, validated RunConfig out.

Every run directory gets the fully resolved configuration echoed back as
``resolved-config.json`` so a seed plus that file reproduces the run
byte-for-byte on the same build.
"""

import json
import math
from dataclasses import asdict, dataclass, field, replace

from .errors import ParseError, ValidationError
from .grids import Grid1D
from .potentials import LaserPulse, SoftCoreParams
from .propagation import TimeStepConfig

MODES = ("prepare", "evolve", "compare-fig2", "compare-fig3", "scan-alpha")


@dataclass(frozen=True)
class PrepConfig:
    """Knobs of the imaginary-time preparation loop.

    The noise variance holds at ``noise_var0`` for ``hold_tau`` (branching
    active: selection equilibrates against live diffusion), then anneals
    exponentially with branching off. Left on after the walkers freeze,
    branching keeps reselecting ever-larger pair separations (the replica
    energy decreases monotonically with window distance), so it stops at
    ``branch_stop_tau`` (default: end of the hold phase).
    """

    max_tau: float = 8.0
    tol_e: float = 5e-3
    window: int = 50
    noise_var0: float = 0.5
    hold_tau: float | None = None
    branch_stride: int = 2
    branch_stop_tau: float | None = None
    min_tau: float | None = None
    require_convergence: bool = True


@dataclass(frozen=True)
class RunConfig:
    mode: str
    seed: int
    output_dir: str
    model: SoftCoreParams
    pulse: LaserPulse | None
    grid: tuple          # (x_min, x_max, n_points) for the 1D engine
    grid2d: tuple        # same triple for the exact solver
    steps: TimeStepConfig
    m: int
    alpha: tuple
    snapshot_stride: int = 25
    prep: PrepConfig = field(default_factory=PrepConfig)
    veff_mode: str = "auto"
    width_rule: str = "kde_bandwidth"
    sigma_floor: float = 1e-3
    x_bound: float = 8.0
    coherence_mode: str = "modulus_of_sum"
    n_trajectories: int = 50
    alpha_grid: tuple = ()
    threads: int = 1
    mask_edge_fraction: float = 0.15

    def grid1d(self) -> Grid1D:
        return Grid1D(*self.grid)

    def oracle_grid(self) -> Grid1D:
        return Grid1D(*self.grid2d)

    def with_alpha(self, a):
        return replace(self, alpha=(float(a),) * len(self.alpha))

    def to_dict(self):
        d = asdict(self)
        d["model"] = asdict(self.model)
        d["pulse"] = None if self.pulse is None else asdict(self.pulse)
        d["steps"] = asdict(self.steps)
        d["prep"] = asdict(self.prep)
        return d


_MODE_DEFAULTS = {
    # desk-scale defaults; the fig3 laser box is wider and coarser
    "prepare":      {"grid": (-30.0, 30.0, 401), "t_total": 4.0},
    "scan-alpha":   {"grid": (-30.0, 30.0, 401), "t_total": 4.0},
    "evolve":       {"grid": (-60.0, 60.0, 401), "t_total": None},
    "compare-fig2": {"grid": (-30.0, 30.0, 401), "t_total": 4.0},
    "compare-fig3": {"grid": (-60.0, 60.0, 401), "t_total": None},
}


def _require(cond, fieldname, message):
    if not cond:
        raise ValidationError(fieldname, message)


def _grid_triple(d, fieldname):
    triple = (float(d["x_min"]), float(d["x_max"]), int(d["n_points"]))
    _require(triple[0] < triple[1], fieldname, "x_min must be < x_max")
    _require(triple[2] >= 8, fieldname, "n_points must be >= 8")
    return triple


def build_config(raw: dict) -> RunConfig:
    """Validate a parsed JSON document and fill the documented defaults."""
    mode = raw.get("mode")
    _require(mode in MODES, "mode", f"must be one of {MODES}, got {mode!r}")
    defaults = _MODE_DEFAULTS[mode]

    seed = int(raw.get("seed", 20260810))
    _require(0 <= seed < 2**64, "seed", "must be a 64-bit unsigned integer")

    model_d = raw.get("model", {})
    try:
        model = SoftCoreParams(a=float(model_d.get("a", 2.0)),
                               b=float(model_d.get("b", 1.0)))
    except ValueError as exc:
        raise ValidationError("model", str(exc)) from None

    pulse = None
    if raw.get("pulse") is not None:
        p = raw["pulse"]
        try:
            pulse = LaserPulse(
                e0=float(p.get("e0", 0.16)),
                omega=float(p.get("omega", 0.1)),
                n_cycles=int(p.get("n_cycles", 2)),
                envelope=p.get("envelope", "sin2"),
                t_start=float(p.get("t_start", 0.0)),
            )
        except ValueError as exc:
            raise ValidationError("pulse", str(exc)) from None
    if mode in ("evolve", "compare-fig3"):
        _require(pulse is not None, "pulse",
                 f"mode {mode!r} drives the system with a laser field")

    grid = _grid_triple(raw["grid"], "grid") if "grid" in raw else defaults["grid"]
    grid2d = _grid_triple(raw["grid2d"], "grid2d") if "grid2d" in raw else grid

    s = raw.get("steps", {})
    t_total = s.get("t_total", defaults["t_total"])
    if t_total is None:
        # default horizon: the full pulse
        t_total = pulse.duration if pulse is not None else 4.0
    try:
        steps = TimeStepConfig(
            dt_real=float(s.get("dt_real", 0.02)),
            dtau_imag=float(s.get("dtau_imag", 0.02)),
            t_total=float(t_total),
            anneal_tau=float(s.get("anneal_tau", 1.0)),
        )
    except ValueError as exc:
        raise ValidationError("steps", str(exc)) from None

    m = int(raw.get("M", 2000))
    _require(m >= 2, "M", "need at least two walkers per electron")

    alpha_raw = raw.get("alpha", 1.0)
    if isinstance(alpha_raw, (int, float)):
        alpha = (float(alpha_raw),) * 2
    else:
        alpha = tuple(float(a) for a in alpha_raw)
        _require(len(alpha) == 2, "alpha", "needs one value per electron")
    _require(all(a > 0 for a in alpha), "alpha", "must be > 0")

    p = raw.get("prep", {})
    prep = PrepConfig(
        max_tau=float(p.get("max_tau", 8.0)),
        tol_e=float(p.get("tol_e", 5e-3)),
        window=int(p.get("window", 50)),
        noise_var0=float(p.get("noise_var0", 0.5)),
        hold_tau=(None if p.get("hold_tau") is None else float(p["hold_tau"])),
        branch_stride=int(p.get("branch_stride", 2)),
        branch_stop_tau=(None if p.get("branch_stop_tau") is None
                         else float(p["branch_stop_tau"])),
        min_tau=(None if p.get("min_tau") is None else float(p["min_tau"])),
        require_convergence=bool(p.get("require_convergence", True)),
    )
    _require(prep.max_tau > 0, "prep.max_tau", "must be > 0")
    _require(prep.window >= 1, "prep.window", "must be >= 1")
    _require(prep.noise_var0 >= 0, "prep.noise_var0", "must be >= 0")

    eng = raw.get("engine", {})
    veff_mode = eng.get("veff_mode", "auto")
    _require(veff_mode in ("auto", "binned", "exact"), "engine.veff_mode",
             "must be 'auto', 'binned' or 'exact'")
    width_rule = eng.get("width_rule", "kde_bandwidth")
    _require(width_rule in ("kde_bandwidth", "std"), "engine.width_rule",
             "must be 'kde_bandwidth' or 'std'")
    sigma_floor = float(eng.get("sigma_floor", 1e-3))
    _require(sigma_floor > 0, "engine.sigma_floor", "must be > 0")
    threads = int(eng.get("threads", 1))
    _require(threads >= 1, "engine.threads", "must be >= 1")

    obs = raw.get("observables", {})
    x_bound = float(obs.get("x_bound", 8.0))
    _require(x_bound > 0, "observables.x_bound", "must be > 0")
    coherence_mode = obs.get("coherence_mode", "modulus_of_sum")
    _require(coherence_mode in ("modulus_of_sum", "sum_of_moduli"),
             "observables.coherence_mode", "unknown mode")

    alpha_grid = tuple(float(a) for a in raw.get("alpha_grid", ()))
    if mode == "scan-alpha":
        _require(len(alpha_grid) >= 1, "alpha_grid",
                 "scan-alpha needs a nonempty positive grid")
        _require(all(a > 0 for a in alpha_grid), "alpha_grid", "must be > 0")

    n_traj = int(raw.get("n_trajectories", 50))
    _require(n_traj >= 1, "n_trajectories", "must be >= 1")
    snapshot_stride = int(raw.get("snapshot_stride", 25))
    _require(snapshot_stride >= 1, "snapshot_stride", "must be >= 1")

    mask_edge = float(raw.get("mask_edge_fraction", 0.15))
    _require(0.0 < mask_edge < 0.5, "mask_edge_fraction", "must be in (0, 0.5)")

    _require(math.isfinite(steps.dt_real * m), "steps", "degenerate step setup")

    return RunConfig(
        mode=mode, seed=seed, output_dir=str(raw.get("output_dir", "out")),
        model=model, pulse=pulse, grid=grid, grid2d=grid2d, steps=steps,
        m=m, alpha=alpha, snapshot_stride=snapshot_stride, prep=prep,
        veff_mode=veff_mode, width_rule=width_rule, sigma_floor=sigma_floor,
        x_bound=x_bound,
        coherence_mode=coherence_mode, n_trajectories=n_traj,
        alpha_grid=alpha_grid, threads=threads,
        mask_edge_fraction=mask_edge,
    )


def load_config(path) -> RunConfig:
    """Parse and validate a JSON run configuration file."""
    try:
        with open(path, "r", encoding="utf-8") as fh:
            raw = json.load(fh)
    except OSError as exc:
        raise ParseError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}:{exc.lineno}:{exc.colno}: {exc.msg}") from None
    if not isinstance(raw, dict):
        raise ParseError(f"{path}: top level must be a JSON object")
    return build_config(raw)
