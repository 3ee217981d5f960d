"""Ensemble runner: one task per (grid point, realization), merged by key order."""

from __future__ import annotations

import time
from concurrent.futures import FIRST_COMPLETED, ProcessPoolExecutor, wait
from dataclasses import replace
from pathlib import Path
from typing import Optional

import numpy as np

from .. import __version__
from ..diagnostics import (
    entropy_density,
    floquet_mutual_information,
    floquet_reversal_time,
    heating_curve,
    late_time_qfi,
    late_value,
    participation_ratio,
    time_average_sz,
)
from ..evolve import (
    EdsrDrive,
    EvolutionError,
    SquareDrive,
    evolve_edsr,
    evolve_square_drive,
    evolve_static,
    evolve_stroboscopic,
    floquet_eigenstates,
    floquet_operator_delta,
)
from ..models import ModelSpec, build_heisenberg, build_ising, initial_state, sample_fields
from ..spinops import SpinOpsError
from ..swtheory import (
    ResonantDenominatorError,
    build_s1,
    first_order_residual,
    qfi_dressed_twopoint,
    qfi_perturbative,
    spectral_distance,
)
from .config import ExperimentConfig, config_hash, config_to_dict
from .output import ResultTable, emit_plot_data, write_table

MODEL_KEYS = {"L": "L", "J_mhz": "J", "B0_mhz": "B0", "g_mhz": "g",
              "disorder": "disorder", "disorder_width_mhz": "disorder_width",
              "gradient_axis": "gradient_axis"}
DRIVE_KEYS = {"epsilon_rad", "T_ns", "eta", "A_mhz"}


class ParameterDomainError(ValueError):
    """Parameters fall outside the domain of a method (exit code 3)."""


class InvariantBreach(RuntimeError):
    """A numerical invariant failed during a run (exit code 4)."""


def point_config(cfg: ExperimentConfig, point: dict) -> ExperimentConfig:
    """Config with the grid coordinates of ``point`` substituted."""
    model = {k: v for k, v in point.items() if k in MODEL_KEYS}
    drive = {k: v for k, v in point.items() if k in DRIVE_KEYS}
    if "L" in model:
        model["L"] = int(model["L"])
    return replace(cfg, model=replace(cfg.model, **model), drive=replace(cfg.drive, **drive))


def model_spec(cfg: ExperimentConfig) -> ModelSpec:
    m = cfg.model
    return ModelSpec(int(m.L), float(m.J_mhz), float(m.B0_mhz), float(m.g_mhz),
                     m.disorder, float(m.disorder_width_mhz), m.gradient_axis)


def _edsr(cfg: ExperimentConfig) -> tuple[EdsrDrive, Optional[float]]:
    m, d = cfg.model, cfg.drive
    drive = EdsrDrive.for_chain(d.epsilon_rad, d.T_ns, d.eta, int(m.L), m.B0_mhz, m.g_mhz)
    dt = None if d.steps_per_cycle is None else 1e3 / (d.steps_per_cycle * max(drive.frequencies))
    return drive, dt


def _trajectory(cfg, H, psi):
    d, r = cfg.drive, cfg.run
    if d.kind == "delta":
        U = floquet_operator_delta(H, d.epsilon_rad, d.T_ns)
        return evolve_stroboscopic(U, psi, r.n_periods, r.sample_every, d.T_ns)
    if d.kind == "edsr":
        drive, dt = _edsr(cfg)
        return evolve_edsr(H, drive, psi, r.n_periods, r.sample_every, dt)
    if d.kind == "square":
        return evolve_square_drive(H, SquareDrive(d.A_mhz, d.T_ns, d.eta), psi, r.n_periods, r.sample_every)
    times = np.arange(r.n_periods // r.sample_every + 1) * r.sample_every * d.T_ns
    return evolve_static(H, psi, times)


def simulate_one(cfg: ExperimentConfig, realization: int) -> dict:
    """All metrics of one realization at one grid point (already substituted)."""
    spec = model_spec(cfg)
    r, d = cfg.run, cfg.drive
    fields = sample_fields(spec, r.master_seed, realization)
    H = build_heisenberg(spec, fields)
    psi = initial_state(spec.basis, r.initial_state, H)
    kind = cfg.experiment
    if kind == "phase_diagram":
        tr = _trajectory(cfg, H, psi)
        return {f"sz{j}": time_average_sz(tr, j, r.s_max) for j in r.sites}
    if kind == "trajectory":
        tr = _trajectory(cfg, H, psi)
        out = {f"sz{j}": tr.site(j) for j in r.sites}
        if tr.energy is not None:
            out["energy_mhz"] = tr.energy
        out["t_ns"] = tr.times
        return out
    if kind == "reversal_time":
        spectrum = floquet_eigenstates(floquet_operator_delta(H, d.epsilon_rad, d.T_ns))
        t = floquet_reversal_time(spectrum, psi, d.T_ns, r.max_periods, site=r.sites[0], stride=r.sample_every)
        cap = r.max_periods * d.T_ns
        return {"t_r_ns": cap if t is None else t, "unreversed": float(t is None)}
    if kind == "mutual_info":
        spectrum = floquet_eigenstates(floquet_operator_delta(H, d.epsilon_rad, d.T_ns))
        f11 = floquet_mutual_information(spectrum, 1, spec.L)
        return {"F11": f11, "F11_over_ln2": f11 / np.log(2)}
    if kind == "qfi":
        return {"f_Q": late_time_qfi(H, psi, spec.J, r.window_samples, tuple(r.window_jt))}
    if kind == "heating":
        tr = evolve_square_drive(H, SquareDrive(d.A_mhz, d.T_ns, d.eta), psi, r.n_periods, 1)
        q = heating_curve(tr, H)
        marks = r.checkpoints or (r.n_periods,)
        return {f"Q_{c}": late_value(q, c, r.late_fraction) for c in marks}
    if kind == "entropy":
        return {"S_over_L": entropy_density(H, psi, spec.J, r.entropy_mode, r.window_samples, tuple(r.window_jt))}
    if kind == "participation":
        return {"PR": participation_ratio(psi, H)}
    if kind == "sw_checks":
        gen = build_s1(spec, fields)
        return {
            "residual": first_order_residual(H, gen),
            "eta": spectral_distance(H, build_ising(spec, fields)),
            "f_Q_dressed": qfi_dressed_twopoint(gen),
            "f_Q_perturbative": qfi_perturbative(spec.L, gen.lam),
            "S_frobenius": gen.S.frobenius(),
        }
    raise ValueError(f"unknown experiment {kind!r}")


def _where(cfg: ExperimentConfig, realization: int) -> str:
    m = cfg.model
    params = f"L={m.L}, J_mhz={m.J_mhz}, B0_mhz={m.B0_mhz}, g_mhz={m.g_mhz}, disorder_width_mhz={m.disorder_width_mhz}"
    if cfg.drive.kind != "none":
        params += f", epsilon_rad={cfg.drive.epsilon_rad}, T_ns={cfg.drive.T_ns}"
    return f"at {params}, realization {realization}"


def run_task(cfg: ExperimentConfig, point: dict, realization: int) -> dict:
    """Worker entry point; maps library errors onto runner error classes."""
    here = point_config(cfg, point)
    try:
        return simulate_one(here, realization)
    except ResonantDenominatorError as exc:
        raise ParameterDomainError(f"{exc} {_where(here, realization)}") from None
    except (EvolutionError, SpinOpsError) as exc:
        raise InvariantBreach(f"{type(exc).__name__}: {exc} {_where(here, realization)}") from None
    except ValueError as exc:
        raise ParameterDomainError(f"{exc} {_where(here, realization)}") from None


def _execute(cfg: ExperimentConfig, tasks: list, workers: int) -> dict:
    results = {}
    if workers <= 1:
        for key, point, r in tasks:
            results[key] = run_task(cfg, point, r)
        return results
    # at most `workers` tasks in flight so memory stays bounded
    with ProcessPoolExecutor(max_workers=workers) as pool:
        pending = {}
        it = iter(tasks)
        for key, point, r in it:
            pending[pool.submit(run_task, cfg, point, r)] = key
            if len(pending) >= workers:
                break
        while pending:
            done, _ = wait(pending, return_when=FIRST_COMPLETED)
            for fut in done:
                key = pending.pop(fut)
                results[key] = fut.result()
                nxt = next(it, None)
                if nxt is not None:
                    pending[pool.submit(run_task, cfg, nxt[1], nxt[2])] = nxt[0]
    return results


def run_experiment(
    cfg: ExperimentConfig, workers: int = 1, out_dir: str | Path | None = None, write: bool = True,
) -> ResultTable:
    start = time.perf_counter()
    points = cfg.grid_points()
    R = cfg.run.realizations
    tasks = [((i, r), p, r) for i, p in enumerate(points) for r in range(R)]
    results = _execute(cfg, tasks, workers)
    table = reduce_results(cfg, points, results)
    table.metadata.update({
        "wall_time_s": f"{time.perf_counter() - start:.3f}",
    })
    if write:
        directory = Path(out_dir if out_dir is not None else cfg.output.directory)
        directory.mkdir(parents=True, exist_ok=True)
        write_table(table, directory / f"{cfg.output.figure_id}.csv")
        emit_plot_data(table, cfg.output.figure_id, directory)
    return table


def reduce_results(cfg: ExperimentConfig, points: list, results: dict) -> ResultTable:
    """Mean and std over realizations, always in realization-index order."""
    R = cfg.run.realizations
    axes = cfg.axis_names()
    rows = []
    metrics: list[str] = []
    series = cfg.experiment == "trajectory"
    for i, point in enumerate(points):
        per = [results[(i, r)] for r in range(R)]
        names = [k for k in per[0] if k != "t_ns"]
        if not metrics:
            metrics = names
        if series:
            times = per[0]["t_ns"]
            for k, t in enumerate(times):
                row = dict(point, t_ns=float(t))
                for m in names:
                    v = np.array([p[m][k] for p in per])
                    row[f"{m}_mean"], row[f"{m}_std"] = float(v.mean()), float(v.std())
                row["count"] = R
                rows.append(row)
        else:
            row = dict(point)
            for m in names:
                v = np.array([p[m] for p in per], dtype=float)
                row[f"{m}_mean"], row[f"{m}_std"] = float(v.mean()), float(v.std())
            row["count"] = R
            rows.append(row)
    if series:
        axes = axes + ["t_ns"]
    meta = {
        "library": f"gradient_dtc {__version__}",
        "experiment": cfg.experiment,
        "figure_id": cfg.output.figure_id,
        "config_hash": config_hash(cfg),
        "master_seed": str(cfg.run.master_seed),
        "realizations": str(R),
    }
    if cfg.experiment == "heating":
        meta["run_length_periods"] = str(cfg.run.n_periods)
    return ResultTable(cfg.experiment, axes, metrics, rows, meta, config_to_dict(cfg), cfg.description)
