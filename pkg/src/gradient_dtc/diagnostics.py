"""Observables and ensemble reductions for driven and undriven chains."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np
from scipy.optimize import curve_fit

from .evolve import FloquetSpectrum, Trajectory, stroboscopic_blocks
from .models import PHASE_RATE, staggered_diagonal
from .spinops import (
    DenseOperator,
    SpinBasis,
    SpinOpsError,
    StateVector,
    diagonal_expectation,
    partial_trace,
    von_neumann_entropy,
)

REVERSAL_FLOOR = 1e-6
# late-time window in units of 1/J (angular), as used for the QFI, entropy and PR scans
WINDOW_JT = (1e3, 1e4)
WINDOW_SAMPLES = 24


@dataclass(frozen=True)
class EnsembleStat:
    mean: float
    std: float
    count: int
    coords: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.count < 1:
            raise ValueError("an ensemble needs at least one realization")
        if self.std < 0:
            raise ValueError("std must be non-negative")


def ensemble_stat(values: Iterable[float], **coords) -> EnsembleStat:
    """Mean and population std over realizations, in the given order."""
    v = np.asarray(list(values), dtype=float)
    if v.size == 0:
        raise ValueError("no realizations to reduce")
    return EnsembleStat(float(v.mean()), float(v.std()), int(v.size), dict(coords))


def time_average_sz(trajectory: Trajectory, site: int, s_max: int) -> float:
    z = trajectory.site(site)
    if len(z) < s_max:
        raise ValueError(f"trajectory has {len(z)} samples, need s_max={s_max}")
    return float(np.mean(z[:s_max]))


def time_disorder_avg_sz(trajectories: Sequence[Trajectory], site: int, s_max: int, **coords) -> EnsembleStat:
    """<<sigma^z_j(2sT)>>: time average over s < s_max, then over realizations."""
    return ensemble_stat((time_average_sz(tr, site, s_max) for tr in trajectories), **coords)


def spin_reversal_time(trajectory: Trajectory, site: int = 1) -> Optional[float]:
    """First sample time at which <sigma^z_site> has the opposite sign to t = 0.

    Samples with magnitude below 1e-6 never count. Returns None when the
    spin is not reversed within the run.
    """
    z = trajectory.site(site)
    s0 = np.sign(z[0])
    if abs(z[0]) < REVERSAL_FLOOR:
        raise ValueError("initial projection too small to define a reversal")
    hit = np.nonzero((np.sign(z) == -s0) & (np.abs(z) >= REVERSAL_FLOOR))[0]
    return float(trajectory.times[hit[0]]) if hit.size else None


def floquet_reversal_time(
    spectrum: FloquetSpectrum, psi0: StateVector, T: float, max_periods: int,
    site: int = 1, stride: int = 2, block: int = 2048,
) -> Optional[float]:
    """Reversal time (ns) for long runs, evaluated in the Floquet basis.

    Same rule as :func:`spin_reversal_time` on the stroboscopic samples
    0, stride, 2 stride, ... periods; None when no reversal within ``max_periods``.
    """
    zdiag = psi0.basis.spin_values(site)
    z0 = float(diagonal_expectation(psi0.amplitudes, zdiag))
    if abs(z0) < REVERSAL_FLOOR:
        raise ValueError("initial projection too small to define a reversal")
    s0 = np.sign(z0)
    for n, v in stroboscopic_blocks(spectrum, psi0, zdiag, stride, block):
        ok = n * stride <= max_periods
        hit = np.nonzero(ok & (np.sign(v) == -s0) & (np.abs(v) >= REVERSAL_FLOOR))[0]
        if hit.size:
            return float(n[hit[0]] * stride * T)
        if not ok[-1]:
            return None


def mutual_information(state: StateVector, A: Sequence[int], B: Sequence[int]) -> float:
    """I(A, B) = S(A) + S(B) - S(A u B) in nats."""
    A, B = list(A), list(B)
    if set(A) & set(B):
        raise SpinOpsError("regions must be disjoint")
    sa = von_neumann_entropy(partial_trace(state, A))
    sb = von_neumann_entropy(partial_trace(state, B))
    sab = von_neumann_entropy(partial_trace(state, A + B))
    return sa + sb - sab


def floquet_mutual_information(spectrum: FloquetSpectrum, a: int = 1, b: int | None = None) -> float:
    """Unweighted mean of I({a}, {b}) over every Floquet eigenstate (b defaults to L)."""
    L = spectrum.basis.L
    b = L if b is None else b
    vals = [mutual_information(spectrum.state(k), [a], [b]) for k in range(spectrum.basis.dimension)]
    return float(np.mean(vals))


def staggered_magnetization(basis: SpinBasis) -> DenseOperator:
    """O = sum_j (-1)^j sigma^z_j (diagonal)."""
    return DenseOperator(basis, np.diag(staggered_diagonal(basis)).astype(complex), True)


def qfi_from_amplitudes(amplitudes: np.ndarray, L: int) -> np.ndarray:
    """f_Q = Var(O) / L for one state (dim,) or many states (dim, n)."""
    o = staggered_diagonal(SpinBasis(L))
    p = np.abs(amplitudes) ** 2
    m1 = o @ p
    m2 = (o**2) @ p
    return np.maximum(m2 - m1**2, 0.0) / L


def qfi_staggered(state: StateVector) -> float:
    return float(qfi_from_amplitudes(state.amplitudes, state.basis.L))


def late_time_window(J: float, n: int = WINDOW_SAMPLES, jt: tuple[float, float] = WINDOW_JT) -> np.ndarray:
    """Sample times (ns) evenly spaced over jt[0] < J t < jt[1], J in angular units."""
    if J <= 0:
        raise ValueError("the window is defined through J > 0")
    x = np.linspace(jt[0], jt[1], n)
    return x / (PHASE_RATE * J)


def evolved_amplitudes(H: DenseOperator, psi0: StateVector, times: np.ndarray) -> np.ndarray:
    """Columns psi(t) for each time, from the cached eigendecomposition."""
    w, v = H.eigh
    c = v.conj().T @ psi0.amplitudes
    return v @ (c[:, None] * np.exp(-1j * PHASE_RATE * np.outer(w, np.asarray(times, dtype=float))))


def late_time_qfi(
    H: DenseOperator, psi0: StateVector, J: float, n: int = WINDOW_SAMPLES, jt: tuple[float, float] = WINDOW_JT,
) -> float:
    """Window-averaged f_Q of the evolved state."""
    amps = evolved_amplitudes(H, psi0, late_time_window(J, n, jt))
    return float(np.mean(qfi_from_amplitudes(amps, H.basis.L)))


def e_infinity(H: DenseOperator) -> float:
    """Infinite-temperature energy Tr[H] / 2^L."""
    return float(np.real(np.trace(H.matrix))) / H.basis.dimension


def dimensionless_energy(E_t, E_0: float, H: DenseOperator):
    """Q = (E(t) - E(0)) / (E_inf - E(0)); accepts scalars or arrays for E_t."""
    e_inf = e_infinity(H)
    scale = max(1.0, float(np.linalg.norm(H.matrix)))
    if abs(e_inf - E_0) < 1e-9 * scale:
        raise ValueError("E(0) is at infinite temperature; Q is undefined")
    return (np.asarray(E_t, dtype=float) - E_0) / (e_inf - E_0)


def heating_curve(trajectory: Trajectory, H: DenseOperator) -> np.ndarray:
    if trajectory.energy is None:
        raise ValueError("trajectory carries no energy samples")
    return dimensionless_energy(trajectory.energy, trajectory.energy[0], H)


def late_value(series: np.ndarray, upto: int, fraction: float = 0.125) -> float:
    """Mean of series[upto - w + 1 .. upto] with w = round(fraction * upto).

    With per-period samples this is the average over the final 1/8 of a run of
    ``upto`` periods (500 of 4000, 125 of 1000).
    """
    w = max(1, int(round(fraction * upto)))
    return float(np.mean(series[upto - w + 1: upto + 1]))


def bipartite_entropy_density(state: StateVector) -> float:
    """S of the left floor(L/2) sites, divided by L."""
    L = state.basis.L
    left = list(range(1, L // 2 + 1))
    if not left:
        return 0.0
    return von_neumann_entropy(partial_trace(state, left)) / L


def entropy_density(
    H: DenseOperator, psi0: StateVector, J: float, mode: str = "evolved",
    n: int = WINDOW_SAMPLES, jt: tuple[float, float] = WINDOW_JT,
) -> float:
    """Half-chain entropy density averaged over the late-time window or over eigenstates."""
    basis = H.basis
    if mode == "evolved":
        amps = evolved_amplitudes(H, psi0, late_time_window(J, n, jt))
    elif mode == "eigen":
        amps = H.eigh[1]
    else:
        raise ValueError("mode must be 'evolved' or 'eigen'")
    return float(np.mean([bipartite_entropy_density(StateVector(basis, amps[:, k])) for k in range(amps.shape[1])]))


def participation_ratio(psi0: StateVector, H: DenseOperator) -> float:
    """1 / sum_k |<E_k|psi0>|^4."""
    _, v = H.eigh
    p = np.abs(v.conj().T @ psi0.amplitudes) ** 2
    return float(1.0 / np.sum(p**2))


def predicted_resonance_J(T: float, site_kind: str, n: int) -> float:
    """Exchange (MHz) of the n-th resonance dip: n 1e3/T for end spins, half that in the bulk."""
    if n < 1:
        raise ValueError("n must be >= 1")
    if site_kind == "end":
        return n * 1e3 / T
    if site_kind == "bulk":
        return n * 1e3 / (2 * T)
    raise ValueError("site_kind must be 'end' or 'bulk'")


def power_law_fit(x, y) -> tuple[float, float]:
    """Least-squares fit y = a x^k on log-log axes; returns (a, k)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("power-law fit needs positive data")
    k, c = np.polyfit(np.log(x), np.log(y), 1)
    return float(np.exp(c)), float(k)


def fixed_exponent_prefactor(x, y, k: float) -> float:
    """Best a for y = a x^k with k held fixed (geometric-mean estimate)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    return float(np.exp(np.mean(np.log(y) - k * np.log(x))))


def first_return_time(times: np.ndarray, values: np.ndarray, dip: float = -0.5) -> Optional[float]:
    """Time of the first maximum after the signal has dipped below ``dip``.

    For a two-level swap this is one full oscillation period. A parabola
    through the three samples around the maximum refines its position.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    below = np.nonzero(values < dip)[0]
    if not below.size:
        return None
    i0 = below[0]
    above = np.nonzero(values[i0:] > -dip)[0]
    if not above.size:
        return None
    i1 = i0 + above[0]
    # walk up to the local maximum
    back = np.nonzero(values[i1:] < -dip)[0]
    stop = i1 + back[0] if back.size else len(values)
    k = i1 + int(np.argmax(values[i1:stop]))
    if 0 < k < len(values) - 1:
        y0, y1, y2 = values[k - 1: k + 2]
        den = y0 - 2 * y1 + y2
        if den != 0:
            shift = 0.5 * (y0 - y2) / den
            return float(times[k] + shift * (times[k + 1] - times[k - 1]) / 2)
    return float(times[k])


def oscillation_period(times: np.ndarray, values: np.ndarray) -> Optional[float]:
    """Period of the dominant slow oscillation, from a least-squares cosine fit.

    The starting guess comes from half-amplitude crossings with hysteresis,
    so fast small-amplitude wiggles on top of the slow swing cannot add
    spurious crossings. Needs about 1.25 periods in the window.
    """
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    mid = 0.5 * (values.max() + values.min())
    amp = 0.5 * (values.max() - values.min())
    if amp == 0:
        return None
    centred = (values - mid) / amp
    marks, state = [], 0
    for k, v in enumerate(centred):
        side = 1 if v > 0.5 else -1 if v < -0.5 else 0
        if side and side != state:
            if state:
                marks.append(times[k])
            state = side
    if len(marks) < 2:
        return None
    guess = 2 * float(np.mean(np.diff(marks)))
    phase0 = float(np.arccos(np.clip(centred[0], -1, 1)))

    def model(t, a, period, phase, offset):
        return a * np.cos(2 * np.pi * t / period + phase) + offset

    params, _ = curve_fit(model, times, values, p0=[amp, guess, phase0, mid])
    return float(abs(params[1]))


def reversal_mean(times: Sequence[Optional[float]], cap: float) -> float:
    """Mean reversal time with unreversed runs counted at the cap."""
    return float(np.mean([cap if t is None else min(t, cap) for t in times]))


def log_slope(x, y) -> float:
    """Slope of log(y) against x."""
    return float(np.polyfit(np.asarray(x, dtype=float), np.log(np.asarray(y, dtype=float)), 1)[0])


def local_minima(x: np.ndarray, y: np.ndarray) -> list[float]:
    """x positions of strict interior local minima of y."""
    y = np.asarray(y)
    idx = [i for i in range(1, len(y) - 1) if y[i] < y[i - 1] and y[i] <= y[i + 1]]
    return [float(x[i]) for i in idx]
