"""Desk-scale experiment presets, one per reproduced figure.

Each entry records how it is scaled down from the full-size run.
"""

from __future__ import annotations

from .config import ExperimentConfig, config_from_dict

_PHASE_BASE = {
    "model": {"L": 6, "J_mhz": 2.5, "B0_mhz": 5000, "g_mhz": 600, "disorder_width_mhz": 9},
    "drive": {"kind": "delta", "epsilon_rad": 0.1, "T_ns": 100},
    "run": {"realizations": 20, "n_periods": 400, "s_max": 200, "sites": [1, 3], "master_seed": 2021},
}


def _phase(g: float) -> dict:
    return {
        "experiment": "phase_diagram",
        "model": dict(_PHASE_BASE["model"], g_mhz=g),
        "drive": dict(_PHASE_BASE["drive"]),
        "grid": [
            {"name": "epsilon_rad", "min": 0.0, "max": 0.6, "points": 7},
            {"name": "J_mhz", "min": 0.0, "max": 20.0, "points": 11},
        ],
        "run": dict(_PHASE_BASE["run"]),
    }


PRESETS: dict[str, dict] = {
    "fig2a": {
        "description": "end/bulk spin phase diagram over (epsilon, J), g = 100 MHz",
        "deviation": "7 x 11 grid and 20 realizations instead of a dense grid with 100",
        "config": _phase(100.0),
    },
    "fig2b": {
        "description": "end/bulk spin phase diagram over (epsilon, J), g = 600 MHz",
        "deviation": "7 x 11 grid and 20 realizations instead of a dense grid with 100",
        "config": _phase(600.0),
    },
    "fig2-dips": {
        "description": "resonance dips of <<sigma^z_1>> and <<sigma^z_3>> versus J at epsilon = 0.1",
        "deviation": "50 realizations instead of 100",
        "config": {
            "experiment": "phase_diagram",
            "model": dict(_PHASE_BASE["model"]),
            "drive": dict(_PHASE_BASE["drive"]),
            "grid": [{"name": "J_mhz", "min": 1.0, "max": 22.0, "points": 43}],
            "run": dict(_PHASE_BASE["run"], realizations=50),
        },
    },
    "fig3a": {
        "description": "stroboscopic spin trajectories (every 2T) for the Neel state",
        "deviation": "20 realizations",
        "config": {
            "experiment": "trajectory",
            "model": dict(_PHASE_BASE["model"]),
            "drive": dict(_PHASE_BASE["drive"]),
            "run": dict(_PHASE_BASE["run"], sites=[1, 2, 3]),
        },
    },
    "fig3-reversal": {
        "description": "disorder-averaged spin-reversal time of the end spin versus L",
        "deviation": "20 realizations; unreversed runs counted at the 2e5-period cap",
        "config": {
            "experiment": "reversal_time",
            "model": dict(_PHASE_BASE["model"]),
            "drive": dict(_PHASE_BASE["drive"]),
            "grid": [{"name": "L", "values": [4, 5, 6, 7]}],
            "run": {"realizations": 20, "max_periods": 200000, "master_seed": 2021},
        },
    },
    "fig4-edsr": {
        "description": "EDSR-driven Neel preservation and the sign-of-epsilon asymmetry",
        "deviation": "L = 4 and B0 = 100 MHz instead of L = 6 at 5 GHz (carrier-resolving cost); 100 periods",
        "config": {
            "experiment": "phase_diagram",
            "model": {"L": 4, "J_mhz": 2.5, "B0_mhz": 100, "g_mhz": 600, "disorder_width_mhz": 9},
            "drive": {"kind": "edsr", "epsilon_rad": 0.1, "T_ns": 100, "eta": 0.1},
            "grid": [{"name": "epsilon_rad", "values": [-0.1, 0.1]}],
            "run": {"realizations": 10, "n_periods": 100, "s_max": 51, "sites": [1, 2, 3, 4], "master_seed": 2021},
        },
    },
    "fig-mutualinfo": {
        "description": "Floquet-eigenstate averaged end-to-end mutual information F11 versus g",
        "deviation": "20 realizations instead of 100",
        "config": {
            "experiment": "mutual_info",
            "model": {"L": 6, "J_mhz": 4, "B0_mhz": 5600, "g_mhz": 0, "disorder_width_mhz": 9},
            "drive": {"kind": "delta", "epsilon_rad": 0.05, "T_ns": 100},
            "grid": [
                {"name": "L", "values": [4, 6]},
                {"name": "g_mhz", "values": [0, 100, 200, 400, 600, 1000]},
            ],
            "run": {"realizations": 20, "master_seed": 2021},
        },
    },
    "fig5-qfi": {
        "description": "late-time QFI of the staggered magnetization versus g/J",
        "deviation": "8 g/J points and 20 realizations",
        "config": {
            "experiment": "qfi",
            "model": {"L": 6, "J_mhz": 1, "B0_mhz": 5000, "g_mhz": 30, "disorder_width_mhz": 0.1},
            "grid": [
                {"name": "L", "values": [6, 8]},
                {"name": "disorder_width_mhz", "values": [0.1, 1.0]},
                {"name": "g_mhz", "min": 30, "max": 300, "points": 8, "spacing": "log"},
            ],
            "run": {"realizations": 20, "master_seed": 2021},
        },
    },
    "fig7-heating": {
        "description": "dimensionless energy Q under square-pulse heating versus g",
        "deviation": "1000 periods (late window = final 125) and 10 realizations instead of 4000 periods",
        "config": {
            "experiment": "heating",
            "model": {"L": 8, "J_mhz": 4, "B0_mhz": 100, "g_mhz": 0, "disorder_width_mhz": 5},
            "drive": {"kind": "square", "A_mhz": 50, "T_ns": 10000, "eta": 0.5},
            "grid": [{"name": "g_mhz", "values": [0, 20, 50, 100, 200]}],
            "run": {"realizations": 10, "n_periods": 1000, "sample_every": 1, "initial_state": "ground",
                    "checkpoints": [250, 500, 1000], "master_seed": 2021},
        },
    },
    "fig8-entropy": {
        "description": "half-chain entanglement entropy density versus g/J",
        "deviation": "L = 6 and 20 realizations",
        "config": {
            "experiment": "entropy",
            "model": {"L": 6, "J_mhz": 1, "B0_mhz": 5000, "g_mhz": 10, "disorder_width_mhz": 0.5},
            "grid": [{"name": "g_mhz", "min": 10, "max": 300, "points": 8, "spacing": "log"}],
            "run": {"realizations": 20, "master_seed": 2021},
        },
    },
    "fig9-pr": {
        "description": "participation ratio of the Neel state versus g/J",
        "deviation": "5 realizations",
        "config": {
            "experiment": "participation",
            "model": {"L": 6, "J_mhz": 1, "B0_mhz": 5000, "g_mhz": 1, "disorder_width_mhz": 0.5},
            "grid": [
                {"name": "L", "values": [6, 8, 10]},
                {"name": "g_mhz", "values": [0.3, 1, 3, 10, 30, 100]},
            ],
            "run": {"realizations": 5, "master_seed": 2021},
        },
    },
    "fig10-sw": {
        "description": "spectral distance between the gradient Heisenberg and Ising models versus g",
        "deviation": "clean chains only, at full size",
        "config": {
            "experiment": "sw_checks",
            "model": {"L": 4, "J_mhz": 1, "B0_mhz": 0, "g_mhz": 10},
            "grid": [
                {"name": "L", "values": [4, 6, 8]},
                {"name": "g_mhz", "min": 10, "max": 200, "points": 6, "spacing": "log"},
            ],
            "run": {"realizations": 1},
        },
    },
}


def preset_config(figure_id: str) -> ExperimentConfig:
    try:
        entry = PRESETS[figure_id]
    except KeyError:
        raise KeyError(f"unknown preset {figure_id!r}; try 'presets list'") from None
    data = dict(entry["config"])
    data["description"] = f"{entry['description']} [desk scale: {entry['deviation']}]"
    data["output"] = {"directory": "results", "figure_id": figure_id}
    return config_from_dict(data)
