"""Hamiltonians and disorder realizations of the gradient-field spin chain.

Energies are in MHz and times in ns. Evolving for ``t`` ns under ``H`` (MHz)
accumulates the phase ``PHASE_RATE * H * t`` with ``PHASE_RATE = 2*pi*1e-3``,
so a spin in a 10 MHz field precesses once every 100 ns.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .spinops import (
    DenseOperator,
    SpinBasis,
    SpinOpsError,
    StateVector,
    basis_state,
    pauli_string,
)

PHASE_RATE = 2 * np.pi * 1e-3

DISORDER_LAWS = ("gaussian", "uniform")


@dataclass(frozen=True)
class ModelSpec:
    """Physical parameters of the chain.

    ``disorder_width`` is the standard deviation for the Gaussian law and the
    half-width of the support ``[-w, w]`` for the uniform law.
    """

    L: int
    J: float = 0.0
    B0: float = 0.0
    g: float = 0.0
    disorder: str = "gaussian"
    disorder_width: float = 0.0
    gradient_axis: str = "z"

    def __post_init__(self):
        if self.L < 1:
            raise ValueError("L must be positive")
        if self.J < 0:
            raise ValueError("J must be non-negative")
        if self.disorder not in DISORDER_LAWS:
            raise ValueError(f"disorder must be one of {DISORDER_LAWS}")
        if self.disorder_width < 0:
            raise ValueError("disorder width must be non-negative")
        if self.gradient_axis not in ("z", "y"):
            raise ValueError("gradient_axis must be 'z' or 'y'")

    @property
    def basis(self) -> SpinBasis:
        return SpinBasis(self.L)

    def clean_fields(self) -> np.ndarray:
        return self.B0 + self.g * np.arange(self.L, dtype=float)

    def gradient_part(self) -> np.ndarray:
        return self.g * np.arange(self.L, dtype=float)


@dataclass(frozen=True)
class FieldProfile:
    B: tuple[float, ...]
    seed: int = 0
    realization_index: int = 0

    @property
    def array(self) -> np.ndarray:
        return np.asarray(self.B, dtype=float)


def _site_generator(master_seed: int, realization_index: int, site: int) -> np.random.Generator:
    # Philox is counter-based: the stream depends only on this key, never on call order.
    ss = np.random.SeedSequence([master_seed & 0xFFFFFFFFFFFFFFFF, realization_index, site])
    return np.random.Generator(np.random.Philox(ss))


def disorder_offsets(spec: ModelSpec, master_seed: int, realization_index: int) -> np.ndarray:
    out = np.zeros(spec.L)
    if spec.disorder_width == 0:
        return out
    for j in range(1, spec.L + 1):
        rng = _site_generator(master_seed, realization_index, j)
        if spec.disorder == "gaussian":
            out[j - 1] = spec.disorder_width * rng.standard_normal()
        else:
            out[j - 1] = rng.uniform(-spec.disorder_width, spec.disorder_width)
    return out


def sample_fields(spec: ModelSpec, master_seed: int, realization_index: int) -> FieldProfile:
    B = spec.clean_fields() + disorder_offsets(spec, master_seed, realization_index)
    return FieldProfile(tuple(float(b) for b in B), master_seed, realization_index)


def clean_profile(spec: ModelSpec) -> FieldProfile:
    return FieldProfile(tuple(float(b) for b in spec.clean_fields()))


@lru_cache(maxsize=32)
def _exchange_parts(L: int) -> tuple[np.ndarray, np.ndarray]:
    """Per unit J: (diagonal of sum_j sz sz / 4, matrix of sum_j (xx + yy) / 4)."""
    basis = SpinBasis(L)
    spins = basis.spin_table
    zz = np.zeros(basis.dimension)
    flip = np.zeros((basis.dimension, basis.dimension), dtype=complex)
    for j in range(1, L):
        zz += spins[:, j - 1] * spins[:, j] / 4
        flip += pauli_string(basis, [(j, "x"), (j + 1, "x")]).matrix / 4
        flip += pauli_string(basis, [(j, "y"), (j + 1, "y")]).matrix / 4
    zz.setflags(write=False)
    flip.setflags(write=False)
    return zz, flip


def zeeman_diagonal(basis: SpinBasis, fields: np.ndarray) -> np.ndarray:
    """Diagonal of (1/2) sum_j B_j sigma^z_j."""
    return basis.spin_table @ np.asarray(fields, dtype=float) / 2


def ising_diagonal(spec: ModelSpec, fields: FieldProfile) -> np.ndarray:
    zz, _ = _exchange_parts(spec.L)
    return spec.J * zz + zeeman_diagonal(spec.basis, fields.array)


def build_ising(spec: ModelSpec, fields: FieldProfile) -> DenseOperator:
    """Open-chain Ising model with the sampled on-site fields (bonds 1..L-1)."""
    if spec.L < 2:
        raise ValueError("Ising model needs L >= 2")
    return DenseOperator(spec.basis, np.diag(ising_diagonal(spec, fields)).astype(complex), True)


def build_heisenberg(spec: ModelSpec, fields: FieldProfile) -> DenseOperator:
    """Gradient-field Heisenberg chain.

    L = 1 is accepted (no bonds) so single-spin drive checks can share the
    same code path.
    """
    basis = spec.basis
    B = fields.array
    if len(B) != spec.L:
        raise ValueError("field profile length does not match L")
    zz, flip = _exchange_parts(spec.L)
    if spec.gradient_axis == "z":
        diag = spec.J * zz + zeeman_diagonal(basis, B)
        m = spec.J * flip
        m[np.diag_indices_from(m)] += diag
        return DenseOperator(basis, m, True)
    grad = spec.gradient_part()
    diag = spec.J * zz + zeeman_diagonal(basis, B - grad)
    m = spec.J * flip
    m[np.diag_indices_from(m)] += diag
    for j in basis.sites:
        if grad[j - 1]:
            m = m + grad[j - 1] / 2 * pauli_string(basis, [(j, "y")]).matrix
    return DenseOperator(basis, m, True)


def build_heating_operator(basis: SpinBasis) -> DenseOperator:
    """sum_j sigma^x_{2j} over the even sites."""
    if basis.L < 2:
        raise ValueError("heating operator needs L >= 2")
    m = sum(pauli_string(basis, [(s, "x")]).matrix for s in range(2, basis.L + 1, 2))
    return DenseOperator(basis, m, True)


def staggered_diagonal(basis: SpinBasis) -> np.ndarray:
    """Diagonal of O = sum_j (-1)^j sigma^z_j."""
    signs = np.array([(-1.0) ** j for j in basis.sites])
    return basis.spin_table @ signs


_ARROWS = {"↑": 1, "u": 1, "U": 1, "0": 1, "+": 1, "↓": -1, "d": -1, "D": -1, "1": -1, "-": -1}


def initial_state(basis: SpinBasis, pattern: str, hamiltonian: DenseOperator | None = None) -> StateVector:
    """Product or ground state named by ``pattern``.

    ``"neel"`` is up-down-up-..., ``"neel_y"`` is the product of sigma^y
    up-eigenstates, ``"ground"`` the lowest eigenvector of ``hamiltonian``,
    and any string of ``L`` arrows (``↑↓`` or ``u``/``d``) an explicit
    configuration.
    """
    if pattern == "neel":
        return basis_state(basis, basis.index_of([1 if s % 2 else -1 for s in basis.sites]))
    if pattern == "neel_y":
        single = np.array([1, 1j]) / np.sqrt(2)
        amps = np.ones(1, dtype=complex)
        for _ in basis.sites:
            amps = np.kron(amps, single)
        return StateVector(basis, amps)
    if pattern == "ground":
        if hamiltonian is None:
            raise ValueError("'ground' pattern needs a Hamiltonian")
        _, v = hamiltonian.eigh
        return StateVector(basis, v[:, 0])
    if len(pattern) != basis.L:
        raise SpinOpsError(f"pattern {pattern!r} has length {len(pattern)}, expected L={basis.L}")
    try:
        spins = [_ARROWS[c] for c in pattern]
    except KeyError as exc:
        raise SpinOpsError(f"unknown spin symbol in {pattern!r}") from exc
    return basis_state(basis, basis.index_of(spins))
