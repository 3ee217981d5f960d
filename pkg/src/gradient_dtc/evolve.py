"""Propagators for the static, delta-kicked, EDSR and square-wave driven chain."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

import numpy as np
import scipy.linalg

from .models import PHASE_RATE, build_heating_operator
from .spinops import (
    DenseOperator,
    SpinBasis,
    SpinOpsError,
    StateVector,
    diagonal_expectation,
    global_rotation_x,
    pauli_string,
)

UNITARY_TOL = 1e-9
EDSR_STEPS_PER_CYCLE = 40
# default is finer than the limit so that halving dt moves the fidelity by < 1e-6
EDSR_DEFAULT_STEPS_PER_CYCLE = 64


class EvolutionError(RuntimeError):
    """A propagator or decomposition broke a numerical invariant."""


@dataclass(frozen=True)
class DeltaDrive:
    epsilon: float
    T: float

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("T must be positive")


@dataclass(frozen=True)
class EdsrDrive:
    """Finite resonant pulses on the last ``eta`` fraction of every period.

    ``frequencies`` are the per-site carriers in MHz (``B0 + g (j - 1)``).
    """

    epsilon: float
    T: float
    eta: float
    frequencies: tuple[float, ...]

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("T must be positive")
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie strictly between 0 and 1")
        if any(f <= 0 for f in self.frequencies):
            raise ValueError("carrier frequencies must be positive")

    @property
    def amplitude(self) -> float:
        """Carrier amplitude in MHz; rotating-wave rotation angle is pi - 2*epsilon."""
        return 2 * (math.pi / 2 - self.epsilon) / (self.eta * self.T) / PHASE_RATE

    @property
    def max_step(self) -> float:
        """Largest allowed step (ns): 40 steps per cycle of the fastest carrier."""
        return 1e3 / (EDSR_STEPS_PER_CYCLE * max(self.frequencies))

    @property
    def default_step(self) -> float:
        return 1e3 / (EDSR_DEFAULT_STEPS_PER_CYCLE * max(self.frequencies))

    @classmethod
    def for_chain(cls, epsilon: float, T: float, eta: float, L: int, B0: float, g: float) -> "EdsrDrive":
        return cls(epsilon, T, eta, tuple(B0 + g * j for j in range(L)))


@dataclass(frozen=True)
class SquareDrive:
    A: float
    T: float
    eta: float

    def __post_init__(self):
        if self.T <= 0:
            raise ValueError("T must be positive")
        if not 0 < self.eta < 1:
            raise ValueError("eta must lie strictly between 0 and 1")


@dataclass(frozen=True)
class NoDrive:
    T: float = 1.0


DriveSpec = Union[DeltaDrive, EdsrDrive, SquareDrive, NoDrive]


@dataclass
class Trajectory:
    times: np.ndarray
    sz: np.ndarray  # (n_samples, L)
    energy: Optional[np.ndarray] = None
    states: Optional[list[StateVector]] = None
    seed: Optional[int] = None
    realization_index: Optional[int] = None

    def __post_init__(self):
        if np.any(np.diff(self.times) <= 0):
            raise EvolutionError("trajectory sample times must increase strictly")
        if self.sz.size and np.max(np.abs(self.sz)) > 1 + 1e-9:
            raise EvolutionError("|<sigma^z>| exceeded 1")

    def site(self, j: int) -> np.ndarray:
        return self.sz[:, j - 1]


@dataclass(frozen=True, eq=False)
class FloquetSpectrum:
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray  # columns
    basis: SpinBasis = field(repr=False)

    @property
    def quasienergies(self) -> np.ndarray:
        """-arg(eigenvalue) mapped into (-pi, pi]."""
        q = -np.angle(self.eigenvalues)
        q[q <= -np.pi] += 2 * np.pi
        return q

    def state(self, k: int) -> StateVector:
        return StateVector(self.basis, self.eigenvectors[:, k])


def _check_unitary(u: np.ndarray, what: str) -> None:
    d = u.shape[0]
    err = np.max(np.abs(u.conj().T @ u - np.eye(d)))
    if err > UNITARY_TOL:
        raise EvolutionError(f"{what} is not unitary (max |U^dag U - I| = {err:.2e})")


def _require_hermitian(H: DenseOperator) -> None:
    if not H.is_hermitian:
        raise SpinOpsError("propagator requires a Hermitian Hamiltonian")


def propagator_matrix(H: DenseOperator, t: float) -> np.ndarray:
    _require_hermitian(H)
    w, v = H.eigh
    return (v * np.exp(-1j * PHASE_RATE * w * t)) @ v.conj().T


def static_propagator(H: DenseOperator, t: float) -> DenseOperator:
    """exp(-i 2 pi 1e-3 H t) from the cached eigendecomposition of ``H``."""
    u = propagator_matrix(H, t)
    _check_unitary(u, "static propagator")
    return DenseOperator(H.basis, u)


def floquet_operator_delta(H: DenseOperator, epsilon: float, T: float) -> DenseOperator:
    """One period: free evolution for ``T`` followed by the kick R_x(pi - 2 epsilon)."""
    kick = global_rotation_x(H.basis, math.pi - 2 * epsilon).matrix
    u = kick @ propagator_matrix(H, T)
    _check_unitary(u, "delta-kick Floquet operator")
    return DenseOperator(H.basis, u)


def _sz_table(basis: SpinBasis) -> np.ndarray:
    return basis.spin_table


def evolve_stroboscopic(
    U_T: DenseOperator,
    psi0: StateVector,
    n_periods: int,
    sample_every: int = 2,
    T: float = 1.0,
    keep_states: bool = False,
    energy_op: DenseOperator | None = None,
) -> Trajectory:
    """Apply ``U_T`` repeatedly, recording <sigma^z_j> every ``sample_every`` periods.

    The t = 0 sample is always included; ``T`` only sets the time axis.
    """
    if sample_every < 1 or n_periods % sample_every:
        raise ValueError("sample_every must divide n_periods")
    step = np.linalg.matrix_power(U_T.matrix, sample_every)
    n_samples = n_periods // sample_every + 1
    amps = np.empty((U_T.basis.dimension, n_samples), dtype=complex)
    amps[:, 0] = psi0.amplitudes
    psi = psi0.amplitudes
    for k in range(1, n_samples):
        psi = step @ psi
        amps[:, k] = psi
    return _trajectory_from_amplitudes(
        U_T.basis, amps, np.arange(n_samples) * sample_every * T, keep_states, energy_op
    )


def _trajectory_from_amplitudes(basis, amps, times, keep_states=False, energy_op=None) -> Trajectory:
    norms = np.linalg.norm(amps, axis=0)
    if np.max(np.abs(norms - 1)) > 1e-9:
        raise EvolutionError("state norm drifted beyond 1e-9")
    sz = diagonal_expectation(amps, _sz_table(basis).T).T
    energy = None
    if energy_op is not None:
        energy = np.real(np.einsum("ik,ik->k", amps.conj(), energy_op.matrix @ amps))
    states = [StateVector(basis, amps[:, k]) for k in range(amps.shape[1])] if keep_states else None
    return Trajectory(np.asarray(times, dtype=float), sz, energy, states)


def floquet_eigenstates(U_T: DenseOperator) -> FloquetSpectrum:
    """Eigen-decomposition of a unitary through its complex Schur form."""
    tri, z = scipy.linalg.schur(U_T.matrix, output="complex")
    lam = np.diag(tri).copy()
    resid = np.max(np.linalg.norm(U_T.matrix @ z - z * lam, axis=0))
    if resid > 1e-7:
        raise EvolutionError(f"Floquet decomposition residual {resid:.2e} too large")
    if np.max(np.abs(np.abs(lam) - 1)) > 1e-8:
        raise EvolutionError("Floquet eigenvalues are not unit modulus")
    return FloquetSpectrum(lam, z, U_T.basis)


def stroboscopic_blocks(
    spectrum: FloquetSpectrum, psi0: StateVector, observable_diag: np.ndarray,
    stride: int, block: int = 4096,
) -> Iterator[tuple[np.ndarray, np.ndarray]]:
    """Yield (sample indices, <D>) at periods 0, stride, 2 stride, ... forever.

    Uses the Floquet basis so a block of samples costs one matrix product;
    callers stop iterating when they have what they need.
    """
    v = spectrum.eigenvectors
    coeff = v.conj().T @ psi0.amplitudes
    phase = spectrum.eigenvalues ** stride
    start = 0
    while True:
        n = np.arange(start, start + block)
        # phase**n through log-angles keeps the error bounded for large n
        ang = np.angle(phase)[:, None] * n[None, :]
        amps = v @ (coeff[:, None] * np.exp(1j * ang))
        yield n, diagonal_expectation(amps, observable_diag)
        start += block


def _carrier_step_unitary(H: np.ndarray, xs: list[np.ndarray], coeffs: np.ndarray, dt: float) -> np.ndarray:
    m = H.copy()
    for x, c in zip(xs, coeffs):
        m += c * x
    w, v = np.linalg.eigh(m)
    return (v * np.exp(-1j * PHASE_RATE * w * dt)) @ v.conj().T


def edsr_pulse_unitary(H: DenseOperator, drive: EdsrDrive, period_index: int = 1, dt: float | None = None) -> np.ndarray:
    """Lab-frame propagator over the pulse window of period ``period_index``.

    Fixed-step midpoint exponential: each step applies
    exp(-i 2 pi 1e-3 (H + V(t_mid)) dt).
    """
    _require_hermitian(H)
    basis = H.basis
    if len(drive.frequencies) != basis.L:
        raise ValueError("need one carrier frequency per site")
    if dt is None:
        dt = drive.default_step
    if dt > drive.max_step * (1 + 1e-12):
        raise ValueError(f"step {dt} ns exceeds the carrier limit {drive.max_step} ns")
    t_end = period_index * drive.T
    t_start = t_end - drive.eta * drive.T
    n_steps = max(1, math.ceil((t_end - t_start) / dt - 1e-9))
    dt = (t_end - t_start) / n_steps
    xs = [pauli_string(basis, [(j, "x")]).matrix for j in basis.sites]
    freqs = np.asarray(drive.frequencies)
    a = drive.amplitude
    u = np.eye(basis.dimension, dtype=complex)
    for k in range(n_steps):
        t_mid = t_start + (k + 0.5) * dt
        coeffs = a * np.cos(PHASE_RATE * freqs * t_mid)
        u = _carrier_step_unitary(H.matrix, xs, coeffs, dt) @ u
    return u


def _carriers_commensurate(drive: EdsrDrive) -> bool:
    cycles = np.asarray(drive.frequencies) * drive.T * 1e-3
    return bool(np.all(np.abs(cycles - np.round(cycles)) < 1e-9))


def edsr_period_unitaries(H: DenseOperator, drive: EdsrDrive, n_periods: int, dt: float | None = None) -> Iterator[np.ndarray]:
    """Yield the one-period propagator for periods 1..n_periods.

    When every carrier completes an integer number of cycles per period the
    pulse unitary is identical each period and is computed once.
    """
    free = propagator_matrix(H, (1 - drive.eta) * drive.T)
    if drive.amplitude == 0:
        full = propagator_matrix(H, drive.T)
        for _ in range(n_periods):
            yield full
        return
    cached = None
    if _carriers_commensurate(drive):
        cached = edsr_pulse_unitary(H, drive, 1, dt) @ free
    for s in range(1, n_periods + 1):
        yield cached if cached is not None else edsr_pulse_unitary(H, drive, s, dt) @ free


def evolve_edsr(
    H: DenseOperator, drive: EdsrDrive, psi0: StateVector, n_periods: int,
    sample_every: int = 2, dt: float | None = None,
) -> Trajectory:
    if n_periods % sample_every:
        raise ValueError("sample_every must divide n_periods")
    psi = psi0.amplitudes
    samples = [psi]
    for s, u in enumerate(edsr_period_unitaries(H, drive, n_periods, dt), start=1):
        psi = u @ psi
        if abs(np.linalg.norm(psi) - 1) > 1e-8 * s:
            raise EvolutionError("EDSR evolution lost norm")
        if s % sample_every == 0:
            samples.append(psi)
    amps = np.stack(samples, axis=1)
    amps /= np.linalg.norm(amps, axis=0)
    times = np.arange(amps.shape[1]) * sample_every * drive.T
    return _trajectory_from_amplitudes(H.basis, amps, times)


def square_drive_propagators(H: DenseOperator, drive: SquareDrive) -> tuple[np.ndarray, np.ndarray]:
    """(free part over (1-eta)T, pulsed part over eta T)."""
    xp = build_heating_operator(H.basis)
    pulsed = H + drive.A * xp
    return propagator_matrix(H, (1 - drive.eta) * drive.T), propagator_matrix(pulsed, drive.eta * drive.T)


def evolve_square_drive(
    H: DenseOperator, drive: SquareDrive, psi0: StateVector, n_periods: int, sample_every: int = 1,
) -> Trajectory:
    """Free evolution for (1-eta)T, then eta T with A sum_j sigma^x_{2j} added; <H> per sample."""
    if n_periods % sample_every:
        raise ValueError("sample_every must divide n_periods")
    free, pulsed = square_drive_propagators(H, drive)
    one = pulsed @ free
    _check_unitary(one, "square-drive period propagator")
    step = np.linalg.matrix_power(one, sample_every)
    n_samples = n_periods // sample_every + 1
    amps = np.empty((H.basis.dimension, n_samples), dtype=complex)
    psi = psi0.amplitudes
    amps[:, 0] = psi
    for k in range(1, n_samples):
        psi = step @ psi
        amps[:, k] = psi
    times = np.arange(n_samples) * sample_every * drive.T
    return _trajectory_from_amplitudes(H.basis, amps, times, energy_op=H)


def evolve_static(H: DenseOperator, psi0: StateVector, times: np.ndarray, keep_states: bool = False) -> Trajectory:
    """Undriven evolution sampled at arbitrary increasing ``times`` (ns)."""
    w, v = H.eigh
    coeff = v.conj().T @ psi0.amplitudes
    times = np.asarray(times, dtype=float)
    amps = v @ (coeff[:, None] * np.exp(-1j * PHASE_RATE * np.outer(w, times)))
    return _trajectory_from_amplitudes(H.basis, amps, times, keep_states)
