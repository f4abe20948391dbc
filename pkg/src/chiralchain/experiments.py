"""Single runs, decay-constant sweeps, ensembles and figure presets.

Every entry point writes into one output directory and finishes with a single
``manifest.json`` holding the resolved configuration of every sub-run, so a
run can be repeated bit for bit.
"""

from __future__ import annotations

import logging
import math
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import __version__, kernels
from ._backend import BACKEND
from .analysis import HorizonTooShort, detect_plateaus, fit_decay
from .chain import build_coupling_matrix, build_initial_state
from .config import RunConfig
from .disorder import EnsembleConfig, default_workers, run_ensemble
from .dynamics import channel_rates, evolve, step_propagator
from .output import (
    correlation_columns,
    ensemble_columns,
    fit_columns,
    plateau_columns,
    trajectory_columns,
    write_csv,
    write_manifest,
    write_svg,
)
from .spectrum import defectiveness, eigenvalues, non_normality

__all__ = [
    "PRESETS",
    "Recorder",
    "fit_with_extension",
    "sweep",
    "run_simulate",
    "run_sweep",
    "run_disorder",
    "run_spectrum",
    "run_experiment",
]

log = logging.getLogger(__name__)

PRESETS = ("fig2", "fig3", "fig4", "fig5", "fig6", "custom")
MAX_EXTENSIONS = 8


@dataclass
class Recorder:
    """Collects outputs and manifest entries for one invocation."""

    out_dir: Path
    command: str
    svg: bool = False
    echo: bool = True
    outputs: list = field(default_factory=list)
    runs: list = field(default_factory=list)
    notes: list = field(default_factory=list)
    started: float = field(default_factory=time.perf_counter)

    def __post_init__(self):
        self.out_dir = Path(self.out_dir)
        self.out_dir.mkdir(parents=True, exist_ok=True)

    def csv(self, name: str, columns: dict, summary: str) -> Path:
        path = write_csv(columns, self.out_dir / name)
        self._done(path, summary)
        return path

    def plot(self, name: str, x, series: dict, **kw) -> None:
        if self.svg:
            self._done(write_svg(self.out_dir / name, x, series, **kw), "svg")

    def plateaus(self, name: str, plateaus, label: str) -> Path | None:
        pl = list(plateaus)
        if not pl:
            self.note(f"{label}: no plateaus detected")
            return None
        spans = ", ".join(f"[{p.t_start:.1f}, {p.t_end:.1f}]" for p in pl[:4])
        return self.csv(name, plateau_columns(pl), f"{len(pl)} plateaus {spans}{' ...' if len(pl) > 4 else ''}")

    def note(self, text: str) -> None:
        self.notes.append(text)
        if self.echo:
            print(text)

    def _done(self, path: Path, summary: str) -> None:
        self.outputs.append(path.name)
        if self.echo:
            print(f"{path}: {summary}")

    def finish(self, **extra) -> Path:
        manifest = {
            "tool": "chiralchain",
            "version": __version__,
            "command": self.command,
            "backend": BACKEND,
            "gamma_reference": "gamma_R (gamma_L if gamma_R = 0)",
            "time_unit": "1/gamma",
            "runs": self.runs,
            "outputs": self.outputs,
            "notes": self.notes,
            "wall_clock_seconds": round(time.perf_counter() - self.started, 3),
        }
        manifest.update(extra)
        return write_manifest(self.out_dir, manifest)


def _chain(cfg: RunConfig):
    geom = cfg.geometry()
    V = build_coupling_matrix(geom, cfg.rates)
    return geom, V, build_initial_state(cfg.pattern, cfg.N)


def total_population(cfg: RunConfig) -> np.ndarray:
    _, V, a0 = _chain(cfg)
    return kernels.total_population(step_propagator(V, cfg.dt), a0, cfg.grid.n_steps)


def fit_with_extension(cfg: RunConfig, max_extensions: int = MAX_EXTENSIONS):
    """Fit ``gamma_f``, lengthening the horizon until the fit window closes.

    Returns ``(fit, cfg_used)``; ``cfg_used.t_end`` is the horizon that
    sufficed.
    """
    for _ in range(max_extensions + 1):
        p = total_population(cfg)
        try:
            return fit_decay(cfg.grid.times, p), cfg
        except HorizonTooShort as exc:
            target = max(1.2 * exc.suggested_t_end, 1.5 * cfg.t_end)
            steps = math.ceil(target / cfg.dt)
            log.info("extending horizon from %g to %g", cfg.t_end, steps * cfg.dt)
            cfg = cfg.with_overrides(t_end=steps * cfg.dt)
    raise HorizonTooShort(cfg.t_end, 1e-3, float(p.min() / p[0]))


def sweep(base: RunConfig, n_values, ni_values):
    """``(N, Ni, DecayFit, t_end_used)`` for every admissible combination."""
    rows = []
    for ni in ni_values:
        for n in n_values:
            if ni > n or (base.placement == "central" and (n - ni) % 2):
                continue
            cfg = base.with_overrides(N=n, Ni=ni)
            fit, used = fit_with_extension(cfg)
            rows.append((n, ni, fit, used.t_end))
    return rows


# -- single commands ---------------------------------------------------------

def _simulate_into(rec: Recorder, cfg: RunConfig, tag: str = "") -> None:
    geom, V, a0 = _chain(cfg)
    traj = evolve(V, a0, cfg.grid)
    t, p = traj.times, traj.total_population
    sfx = f"_{tag}" if tag else ""
    rec.runs.append({"label": tag or "simulate", "config": cfg.to_dict()})

    rec.csv(f"trajectory{sfx}.csv", trajectory_columns(traj),
            f"N={cfg.N} Ni={cfg.Ni} P_tot({cfg.t_end:g})={p[-1]:.4e}")
    rl, rr = channel_rates(traj, geom, cfg.rates)
    rec.csv(f"rates{sfx}.csv", {"t": t, "R_L": rl, "R_R": rr}, "left/right emission rates")
    if cfg.N > 1:
        rec.csv(f"correlations{sfx}.csv", correlation_columns(traj), "NN and NNN correlations")
    try:
        fit = fit_decay(t, p)
        rec.csv(f"fit{sfx}.csv", fit_columns([(cfg.N, cfg.Ni, fit)]),
                f"gamma_f={fit.gamma_f:.6g} +/- {fit.ci95_half_width:.2g}")
    except HorizonTooShort as exc:
        rec.note(f"fit{sfx}: skipped, {exc}")
    rec.plateaus(f"plateaus{sfx}.csv", detect_plateaus(t, p, cfg.eps_slope, cfg.min_width), f"plateaus{sfx}")
    series = {f"P_{i + 1}": traj.populations[:, i] for i in range(cfg.N)}
    series["P_tot"] = p
    rec.plot(f"trajectory{sfx}.svg", t, series, logy=True, title=f"N={cfg.N}, Ni={cfg.Ni}")


def run_simulate(cfg: RunConfig, out_dir, svg: bool = False, echo: bool = True) -> Path:
    rec = Recorder(out_dir, "simulate", svg, echo)
    _simulate_into(rec, cfg)
    return rec.finish()


def _sweep_into(rec: Recorder, base: RunConfig, n_values, ni_values, name: str = "fits.csv") -> None:
    rows = sweep(base, n_values, ni_values)
    rec.runs.append({
        "label": name,
        "config": base.to_dict(),
        "N": list(n_values),
        "Ni": list(ni_values),
        "t_end_used": {f"N{n}_Ni{ni}": te for n, ni, _, te in rows},
    })
    rec.csv(name, fit_columns([(n, ni, fit) for n, ni, fit, _ in rows]),
            f"{len(rows)} decay fits, Ni in {list(ni_values)}")
    if rows and rec.svg:
        ns = sorted({n for n, *_ in rows})
        series = {}
        for ni in ni_values:
            # NaN where this Ni has no admissible N; the plotter skips those points
            by_n = {n: fit.gamma_f for n, k, fit, _ in rows if k == ni}
            series[f"Ni={ni}"] = [by_n.get(n, np.nan) for n in ns]
        rec.plot(name.replace(".csv", ".svg"), ns, series, title="gamma_f vs N", xlabel="N")


def run_sweep(base: RunConfig, out_dir, n_max: int = 20, ni_values=(1, 2, 3),
              svg: bool = False, echo: bool = True) -> Path:
    rec = Recorder(out_dir, "sweep", svg, echo)
    _sweep_into(rec, base, range(1, n_max + 1), ni_values)
    return rec.finish()


def ensemble_config(cfg: RunConfig) -> EnsembleConfig:
    return EnsembleConfig(
        n_atoms=cfg.N,
        spacing=cfg.xi,
        rates=cfg.rates,
        pattern=cfg.pattern,
        grid=cfg.grid,
        fluctuation=cfg.f,
        distribution=cfg.distribution,
        batch_size=cfg.batch_size,
        max_realizations=cfg.max_realizations,
        convergence_tol=cfg.convergence_tol,
        master_seed=cfg.seed,
    )


def _ensemble_into(rec: Recorder, cfg: RunConfig, tag: str = "", workers: int | None = None):
    workers = default_workers() if workers is None else workers
    res = run_ensemble(ensemble_config(cfg), workers=workers)
    sfx = f"_{tag}" if tag else ""
    rec.runs.append({
        "label": tag or "disorder",
        "config": cfg.to_dict(),
        "realizations_used": res.realizations_used,
        "converged": res.converged,
        "batch_deltas": list(res.batch_deltas),
    })
    rec.csv(f"ensemble{sfx}.csv", ensemble_columns(res),
            f"f={cfg.f:g} Ni={cfg.Ni}: {res.realizations_used} realizations, "
            f"{'converged' if res.converged else 'NOT converged'}")
    rec.plateaus(f"plateaus{sfx}.csv", detect_plateaus(res.times, res.mean, cfg.eps_slope, cfg.min_width),
                 f"ensemble{sfx}")
    try:
        fit = fit_decay(res.times, res.mean)
        rec.csv(f"fit{sfx}.csv", fit_columns([(cfg.N, cfg.Ni, fit)]),
                f"mean gamma_f={fit.gamma_f:.6g} +/- {fit.ci95_half_width:.2g}")
    except HorizonTooShort as exc:
        rec.note(f"fit{sfx}: skipped, {exc}")
    rec.plot(f"ensemble{sfx}.svg", res.times,
             {"mean": res.mean, "mean+std": res.upper, "mean-std": np.clip(res.lower, 1e-300, None)},
             logy=True, title=f"f={cfg.f:g}, Ni={cfg.Ni}")
    return res


def run_disorder(cfg: RunConfig, out_dir, svg: bool = False, echo: bool = True,
                 workers: int | None = None) -> Path:
    rec = Recorder(out_dir, "disorder", svg, echo)
    _ensemble_into(rec, cfg, workers=workers)
    return rec.finish(workers=workers or default_workers())


def run_spectrum(cfg: RunConfig, out_dir, echo: bool = True) -> Path:
    rec = Recorder(out_dir, "spectrum", False, echo)
    _, V, _ = _chain(cfg)
    report = defectiveness(V)
    w = eigenvalues(V)
    rec.runs.append({"label": "spectrum", "config": cfg.to_dict()})
    rec.csv("eigenvalues.csv", {"index": np.arange(len(w)), "re": w.real, "im": w.imag},
            f"{len(w)} eigenvalues, slowest decay {-w.real.max():.6g}, "
            f"{'defective' if report.defective else 'diagonalizable'}")
    return rec.finish(spectrum={
        "defective": report.defective,
        "min_singular_value": report.min_singular_value,
        "tolerance": report.tolerance,
        "trace": [report.trace.real, report.trace.imag],
        "trace_residual": report.trace_residual,
        "non_normality": non_normality(V),
        "directionality": cfg.rates.directionality,
    })


# -- figure presets ----------------------------------------------------------

def _preset_base(overrides: dict, **kw) -> RunConfig:
    return RunConfig(**kw).with_overrides(**overrides)


def _fig_decay(rec, overrides, gamma_left, placement, ni_values, n_values, n_show):
    base = _preset_base(overrides, N=max(ni_values), Ni=1, gammaL=gamma_left, placement=placement)
    _sweep_into(rec, base, n_values, ni_values)
    for ni in ni_values:
        _simulate_into(rec, base.with_overrides(N=n_show, Ni=ni), tag=f"N{n_show}_Ni{ni}")


def run_experiment(preset: str, out_dir, overrides: dict | None = None, config: RunConfig | None = None,
                   svg: bool = False, echo: bool = True, workers: int | None = None) -> Path:
    """Reproduce one figure's data set (or run a custom configuration)."""
    if preset not in PRESETS:
        raise ValueError(f"unknown preset {preset!r}; choose from {', '.join(PRESETS)}")
    overrides = {k: v for k, v in (overrides or {}).items() if v is not None}
    rec = Recorder(out_dir, f"reproduce {preset}", svg, echo)

    if preset == "fig2":
        _fig_decay(rec, overrides, 0.0, "end", (1, 2, 3), range(1, 21), 12)
    elif preset == "fig3":
        _fig_decay(rec, overrides, 0.5, "end", (1, 2, 3), range(1, 21), 12)
    elif preset == "fig5":
        _fig_decay(rec, overrides, 0.5, "central", (1, 3, 5), range(3, 22, 2), 11)
    elif preset == "fig4":
        for name, gl in (("cascaded", 0.0), ("noncascaded", 0.5)):
            _simulate_into(rec, _preset_base(overrides, N=6, Ni=1, gammaL=gl), tag=name)
    elif preset == "fig6":
        for name, gl, f in (("cascaded", 0.0, 0.2), ("noncascaded", 0.5, 0.02)):
            for ni in (2, 3):
                cfg = _preset_base(overrides, N=12, Ni=ni, gammaL=gl, f=f)
                _ensemble_into(rec, cfg, tag=f"{name}_Ni{ni}", workers=workers)
    else:
        if config is None:
            raise ValueError("the custom preset needs a configuration file")
        cfg = config.with_overrides(**overrides)
        if cfg.f > 0:
            _ensemble_into(rec, cfg, workers=workers)
        else:
            _simulate_into(rec, cfg)
    return rec.finish(preset=preset, overrides=overrides)
