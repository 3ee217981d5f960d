"""Dense spin-1/2 operator algebra over the sigma^z product basis.

Basis convention: site 1 is the most significant bit of the basis index, and
bit value 0 means spin up (sigma^z = +1). Every other module goes through
:class:`SpinBasis` for bit bookkeeping so this convention lives in one place.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import cached_property, reduce
from typing import Iterable, Sequence

import numpy as np

MAX_SITES = 14
HERMITIAN_TOL = 1e-12
ENTROPY_CLIP = 1e-9
ENTROPY_CORRUPT = 1e-6

PAULI = {
    "i": np.eye(2, dtype=complex),
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
}


class SpinOpsError(ValueError):
    """Invalid site labels, shapes or corrupted density matrices."""


@dataclass(frozen=True)
class SpinBasis:
    L: int

    def __post_init__(self):
        if not 1 <= self.L <= MAX_SITES:
            raise SpinOpsError(f"L must be in [1, {MAX_SITES}], got {self.L}")

    @property
    def dimension(self) -> int:
        return 1 << self.L

    @property
    def sites(self) -> range:
        return range(1, self.L + 1)

    def check_site(self, site: int) -> None:
        if not 1 <= site <= self.L:
            raise SpinOpsError(f"site {site} out of range 1..{self.L}")

    def bit(self, site: int) -> int:
        """Bit position (LSB = 0) that stores ``site``."""
        self.check_site(site)
        return self.L - site

    def axis(self, site: int) -> int:
        """Tensor axis of ``site`` after reshaping a vector to ``(2,) * L``."""
        self.check_site(site)
        return site - 1

    def mask(self, sites: Iterable[int]) -> int:
        m = 0
        for s in sites:
            m |= 1 << self.bit(s)
        return m

    @cached_property
    def _indices(self) -> np.ndarray:
        return np.arange(self.dimension, dtype=np.int64)

    def spin_values(self, site: int) -> np.ndarray:
        """sigma^z eigenvalue (+1/-1) of ``site`` for every basis index."""
        bits = (self._indices >> self.bit(site)) & 1
        return (1 - 2 * bits).astype(float)

    @cached_property
    def spin_table(self) -> np.ndarray:
        """Array of shape (dimension, L) with sigma^z values, column j-1 = site j."""
        table = np.stack([self.spin_values(s) for s in self.sites], axis=1)
        table.setflags(write=False)
        return table

    def index_of(self, spins: Sequence[int]) -> int:
        """Basis index of a configuration given as +1/-1 per site."""
        if len(spins) != self.L:
            raise SpinOpsError(f"expected {self.L} spins, got {len(spins)}")
        idx = 0
        for site, s in zip(self.sites, spins):
            if s not in (1, -1):
                raise SpinOpsError(f"spin values must be +1 or -1, got {s}")
            if s == -1:
                idx |= 1 << self.bit(site)
        return idx

    def flip_all(self, index: int | np.ndarray) -> int | np.ndarray:
        return index ^ (self.dimension - 1)


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class DenseOperator:
    basis: SpinBasis
    matrix: np.ndarray
    hermitian_flag: bool | None = field(default=None, compare=False)

    def __post_init__(self):
        m = _frozen(self.matrix)
        d = self.basis.dimension
        if m.shape != (d, d):
            raise SpinOpsError(f"matrix shape {m.shape} does not match dimension {d}")
        object.__setattr__(self, "matrix", m)
        if self.hermitian_flag and not self._hermitian_check(HERMITIAN_TOL):
            raise SpinOpsError("hermitian_flag set on a non-Hermitian matrix")

    def _hermitian_check(self, tol: float) -> bool:
        m = self.matrix
        return bool(np.max(np.abs(m - m.conj().T), initial=0.0) < tol)

    @cached_property
    def is_hermitian(self) -> bool:
        if self.hermitian_flag is not None:
            return self.hermitian_flag
        scale = max(1.0, float(np.max(np.abs(self.matrix), initial=0.0)))
        return self._hermitian_check(HERMITIAN_TOL * scale)

    @cached_property
    def eigh(self) -> tuple[np.ndarray, np.ndarray]:
        """Cached ``(eigenvalues, eigenvectors)`` of a Hermitian operator."""
        if not self.is_hermitian:
            raise SpinOpsError("eigh requested for a non-Hermitian operator")
        w, v = np.linalg.eigh(self.matrix)
        w.setflags(write=False)
        v.setflags(write=False)
        return w, v

    @property
    def dagger(self) -> "DenseOperator":
        return DenseOperator(self.basis, self.matrix.conj().T)

    def is_diagonal(self) -> bool:
        m = self.matrix
        return not np.any(m - np.diag(np.diag(m)))

    def __add__(self, other: "DenseOperator") -> "DenseOperator":
        herm = bool(self.is_hermitian and other.is_hermitian) or None
        return DenseOperator(self.basis, self.matrix + other.matrix, herm)

    def __sub__(self, other: "DenseOperator") -> "DenseOperator":
        herm = bool(self.is_hermitian and other.is_hermitian) or None
        return DenseOperator(self.basis, self.matrix - other.matrix, herm)

    def __neg__(self) -> "DenseOperator":
        return DenseOperator(self.basis, -self.matrix, self.hermitian_flag)

    def __mul__(self, c: complex) -> "DenseOperator":
        herm = True if (np.isreal(c) and self.hermitian_flag) else None
        return DenseOperator(self.basis, c * self.matrix, herm)

    __rmul__ = __mul__

    def __matmul__(self, other):
        if isinstance(other, DenseOperator):
            return DenseOperator(self.basis, self.matrix @ other.matrix)
        if isinstance(other, StateVector):
            return StateVector(self.basis, self.matrix @ other.amplitudes)
        return NotImplemented

    def commutator(self, other: "DenseOperator") -> "DenseOperator":
        return DenseOperator(self.basis, self.matrix @ other.matrix - other.matrix @ self.matrix)

    def frobenius(self) -> float:
        return float(np.linalg.norm(self.matrix))

    def hs_coefficient(self, other: "DenseOperator") -> complex:
        """Hilbert-Schmidt projection Tr[other^dagger self] / 2^L."""
        return complex(np.vdot(other.matrix, self.matrix) / self.basis.dimension)


def identity(basis: SpinBasis) -> DenseOperator:
    return DenseOperator(basis, np.eye(basis.dimension), True)


def diagonal_operator(basis: SpinBasis, diag: np.ndarray) -> DenseOperator:
    diag = np.asarray(diag)
    herm = bool(np.all(np.isreal(diag)))
    return DenseOperator(basis, np.diag(diag.astype(complex)), herm or None)


@dataclass(frozen=True, eq=False)
class StateVector:
    basis: SpinBasis
    amplitudes: np.ndarray

    def __post_init__(self):
        a = _frozen(self.amplitudes)
        if a.shape != (self.basis.dimension,):
            raise SpinOpsError(f"amplitude shape {a.shape} does not match dimension")
        object.__setattr__(self, "amplitudes", a)

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))

    def normalized(self) -> "StateVector":
        return StateVector(self.basis, self.amplitudes / self.norm)

    def overlap(self, other: "StateVector") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


def basis_state(basis: SpinBasis, index: int) -> StateVector:
    a = np.zeros(basis.dimension, dtype=complex)
    a[index] = 1.0
    return StateVector(basis, a)


@dataclass(frozen=True, eq=False)
class DensityMatrix:
    sites: tuple[int, ...]
    matrix: np.ndarray

    def __post_init__(self):
        m = _frozen(self.matrix)
        k = len(self.sites)
        if m.shape != (1 << k, 1 << k):
            raise SpinOpsError("density matrix shape does not match kept sites")
        object.__setattr__(self, "matrix", m)

    @property
    def trace(self) -> float:
        return float(np.real(np.trace(self.matrix)))

    def eigenvalues(self) -> np.ndarray:
        return np.linalg.eigvalsh(self.matrix)


def _check_factors(basis: SpinBasis, factors: Sequence[tuple[int, str]]) -> None:
    seen = set()
    for site, axis in factors:
        basis.check_site(site)
        if site in seen:
            raise SpinOpsError(f"duplicate site {site} in Pauli string")
        if axis not in ("x", "y", "z"):
            raise SpinOpsError(f"unknown Pauli axis {axis!r}")
        seen.add(site)


def pauli_action(basis: SpinBasis, factors: Sequence[tuple[int, str]]) -> tuple[int, np.ndarray]:
    """Pauli string P as ``P|b> = phase[b] |b ^ flip>``.

    Returns the flip mask and the per-column phase array; this is the sparse
    form behind :func:`pauli_string` and :func:`apply_pauli_string`.
    """
    _check_factors(basis, factors)
    idx = basis._indices
    flip = 0
    phase = np.ones(basis.dimension, dtype=complex)
    for site, axis in factors:
        b = (idx >> basis.bit(site)) & 1
        if axis in ("x", "y"):
            flip |= 1 << basis.bit(site)
        if axis == "z":
            phase *= 1 - 2 * b
        elif axis == "y":
            # Y|up> = i|down>, Y|down> = -i|up>
            phase *= 1j * (1 - 2 * b)
    return flip, phase


def pauli_string(basis: SpinBasis, factors: Sequence[tuple[int, str]]) -> DenseOperator:
    flip, phase = pauli_action(basis, factors)
    cols = basis._indices
    m = np.zeros((basis.dimension, basis.dimension), dtype=complex)
    m[cols ^ flip, cols] = phase
    return DenseOperator(basis, m, True)


def apply_pauli_string(basis: SpinBasis, factors: Sequence[tuple[int, str]], vec: np.ndarray) -> np.ndarray:
    """Matrix-free product P @ vec (fast path of :func:`pauli_string`)."""
    flip, phase = pauli_action(basis, factors)
    out = np.empty_like(vec, dtype=complex)
    out[basis._indices ^ flip] = phase * vec
    return out


def pauli_string_kron(basis: SpinBasis, factors: Sequence[tuple[int, str]]) -> np.ndarray:
    """Reference construction by explicit Kronecker products (slow, used in checks)."""
    _check_factors(basis, factors)
    per_site = dict(factors)
    mats = [PAULI[per_site.get(s, "i")] for s in basis.sites]
    return reduce(np.kron, mats)


def sigma(basis: SpinBasis, site: int, axis: str) -> DenseOperator:
    return pauli_string(basis, [(site, axis)])


def sz_diagonal(basis: SpinBasis, site: int) -> np.ndarray:
    return basis.spin_values(site)


def global_rotation_x(basis: SpinBasis, angle: float) -> DenseOperator:
    """Product over all sites of exp(-i * angle * sigma^x / 2)."""
    c, s = np.cos(angle / 2), np.sin(angle / 2)
    single = np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)
    return DenseOperator(basis, reduce(np.kron, [single] * basis.L))


def partial_trace(state: StateVector, keep: Sequence[int]) -> DensityMatrix:
    basis = state.basis
    keep = tuple(keep)
    if not keep:
        raise SpinOpsError("keep list must be nonempty")
    if len(set(keep)) != len(keep):
        raise SpinOpsError("keep list has duplicate sites")
    for s in keep:
        basis.check_site(s)
    keep_axes = [basis.axis(s) for s in keep]
    rest = [a for a in range(basis.L) if a not in keep_axes]
    psi = state.amplitudes.reshape((2,) * basis.L).transpose(keep_axes + rest)
    psi = psi.reshape(1 << len(keep), -1)
    return DensityMatrix(keep, psi @ psi.conj().T)


def von_neumann_entropy(rho: DensityMatrix) -> float:
    """Entropy in nats."""
    p = rho.eigenvalues()
    if p.min() < -ENTROPY_CORRUPT:
        raise SpinOpsError(f"density matrix eigenvalue {p.min():.3e} is negative")
    p = p[p > ENTROPY_CLIP]
    return float(max(0.0, -np.sum(p * np.log(p))))


def expectation(state: StateVector, op: DenseOperator) -> float:
    if not op.is_hermitian:
        raise SpinOpsError("expectation requires a Hermitian operator")
    a = state.amplitudes
    return float(np.real(np.vdot(a, op.matrix @ a)))


def diagonal_expectation(amplitudes: np.ndarray, diag: np.ndarray) -> np.ndarray:
    """<psi|D|psi> for diagonal D; ``amplitudes`` may be (dim,) or (dim, n)."""
    return np.real(diag @ np.abs(amplitudes) ** 2)


def is_unitary(u: np.ndarray, tol: float = 1e-9) -> bool:
    d = u.shape[0]
    return bool(np.max(np.abs(u.conj().T @ u - np.eye(d))) < tol)
