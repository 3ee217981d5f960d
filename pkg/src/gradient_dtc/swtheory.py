"""First-order Schrieffer-Wolff generator for the gradient Heisenberg chain.

The generator removes the flip-flop part of the exchange to first order,
mapping the chain onto an Ising model with the same fields. Everything here
is numeric: denominators are diagonal matrices inverted entrywise, and the
rotated operators are built from dense commutators or exact exponentials.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache, reduce

import numpy as np

from .models import FieldProfile, ModelSpec, build_ising
from .spinops import DenseOperator, SpinBasis, StateVector, pauli_string

DENOMINATOR_MIN = 1e-6


class ResonantDenominatorError(ArithmeticError):
    """A generator denominator vanished for some spin configuration."""

    def __init__(self, bond: int, value: float):
        super().__init__(f"resonant denominator {value:.3e} on bond ({bond}, {bond + 1})")
        self.bond = bond
        self.value = value

    def __reduce__(self):
        return type(self), (self.bond, self.value)


@dataclass(frozen=True, eq=False)
class SwGenerator:
    S: DenseOperator
    lam: float
    fields: tuple[float, ...]
    exact_delta: bool = True

    @property
    def basis(self) -> SpinBasis:
        return self.S.basis


@dataclass(frozen=True, eq=False)
class DressedObservable:
    Z: DenseOperator
    norm: float
    site: int
    mean: float

    @property
    def normalized_mean(self) -> float:
        return self.mean / self.norm


def _sz(basis: SpinBasis, site: int) -> np.ndarray:
    """sigma^z diagonal with the convention sigma^z_m = 0 off the chain."""
    if 1 <= site <= basis.L:
        return basis.spin_values(site)
    return np.zeros(basis.dimension)


@lru_cache(maxsize=16)
def _raise_lower(basis: SpinBasis) -> tuple[dict[int, np.ndarray], dict[int, np.ndarray]]:
    plus, minus = {}, {}
    for j in basis.sites:
        x = pauli_string(basis, [(j, "x")]).matrix
        y = pauli_string(basis, [(j, "y")]).matrix
        plus[j] = (x + 1j * y) / 2
        minus[j] = (x - 1j * y) / 2
    return plus, minus


def flip_operators(basis: SpinBasis, i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
    """(c_ij, kappa_ij): anti-Hermitian and Hermitian two-site flip operators.

    Either is zero when a site lies off the chain.
    """
    d = basis.dimension
    if not (1 <= i <= basis.L and 1 <= j <= basis.L):
        z = np.zeros((d, d), dtype=complex)
        return z, z.copy()
    plus, minus = _raise_lower(basis)
    a = plus[i] @ minus[j]
    b = minus[i] @ plus[j]
    return a - b, a + b


def bond_denominators(spec: ModelSpec, fields: FieldProfile, exact_delta: bool = True) -> list[np.ndarray]:
    """Diagonal of 2 Delta_{j,j+1} - J (sigma^z_{j-1} - sigma^z_{j+2}) for j = 1..L-1."""
    basis = spec.basis
    B = fields.array
    out = []
    for j in range(1, spec.L):
        delta = B[j] - B[j - 1] if exact_delta else spec.g
        out.append(2 * delta - spec.J * (_sz(basis, j - 1) - _sz(basis, j + 2)))
    return out


def build_s1(spec: ModelSpec, fields: FieldProfile, exact_delta: bool = True) -> SwGenerator:
    """S = -J sum_j c_{j,j+1} / (2 Delta_{j,j+1} - J (sigma^z_{j-1} - sigma^z_{j+2})).

    With ``exact_delta`` the field differences include the disorder, which
    makes H1 + [S, H0] vanish identically; otherwise Delta = g.
    """
    if spec.gradient_axis != "z":
        raise ValueError("the generator assumes a gradient along z")
    basis = spec.basis
    d = basis.dimension
    S = np.zeros((d, d), dtype=complex)
    lam = spec.J / spec.g if spec.g else float("inf")
    if spec.J == 0:
        return SwGenerator(DenseOperator(basis, S), 0.0 if spec.g else lam, fields.B, exact_delta)
    for j, den in enumerate(bond_denominators(spec, fields, exact_delta), start=1):
        c, _ = flip_operators(basis, j, j + 1)
        # only configurations the flip actually connects matter
        touched = np.any(c != 0, axis=0)
        worst = np.min(np.abs(den[touched])) if touched.any() else np.inf
        if worst < DENOMINATOR_MIN:
            raise ResonantDenominatorError(j, float(worst))
        safe = np.where(np.abs(den) < DENOMINATOR_MIN, np.inf, den)
        # the denominator commutes with c_{j,j+1}, so the side it multiplies is immaterial
        S -= spec.J * c / safe[None, :]
    return SwGenerator(DenseOperator(basis, S), lam, fields.B, exact_delta)


def split_h0_h1(H: DenseOperator) -> tuple[DenseOperator, DenseOperator]:
    """Split into the z-diagonal part and the off-diagonal remainder."""
    diag = np.diag(np.diag(H.matrix))
    return DenseOperator(H.basis, diag, True), DenseOperator(H.basis, H.matrix - diag, True)


def first_order_residual(H: DenseOperator, gen: SwGenerator) -> float:
    """||H1 + [S, H0]||_F / ||H1||_F."""
    H0, H1 = split_h0_h1(H)
    r = H1.matrix + gen.S.matrix @ H0.matrix - H0.matrix @ gen.S.matrix
    n1 = np.linalg.norm(H1.matrix)
    return float(np.linalg.norm(r) / n1) if n1 else float(np.linalg.norm(r))


def unitary_exp(gen: SwGenerator) -> np.ndarray:
    """exp(S) for anti-Hermitian S through the Hermitian matrix i S."""
    w, v = np.linalg.eigh(1j * gen.S.matrix)
    return (v * np.exp(-1j * w)) @ v.conj().T


def transformed_hamiltonian(H: DenseOperator, gen: SwGenerator) -> DenseOperator:
    """exp(S) H exp(-S) with the exact matrix exponential."""
    u = unitary_exp(gen)
    m = u @ H.matrix @ u.conj().T
    m = (m + m.conj().T) / 2
    return DenseOperator(H.basis, m, True)


def truncated_transform(H: DenseOperator, gen: SwGenerator, order: int) -> DenseOperator:
    """sum_{k <= order} ad_S^k H / k!, for order-counting checks only."""
    S = gen.S.matrix
    term = H.matrix.copy()
    total = term.copy()
    fact = 1.0
    for k in range(1, order + 1):
        term = S @ term - term @ S
        fact *= k
        total = total + term / fact
    return DenseOperator(H.basis, total)


def leading_correction(gen: SwGenerator, H1: DenseOperator) -> DenseOperator:
    """(1/2) [S, H1]."""
    S = gen.S.matrix
    return DenseOperator(H1.basis, (S @ H1.matrix - H1.matrix @ S) / 2)


def leading_correction_first_line(basis: SpinBasis, J: float, g: float) -> DenseOperator:
    """-(J lambda / 8)(sigma^z_1 - sigma^z_L): the end-spin part of (1/2)[S, H1]."""
    lam = J / g
    diag = -(J * lam / 8) * (_sz(basis, 1) - _sz(basis, basis.L))
    return DenseOperator(basis, np.diag(diag).astype(complex), True)


def leading_correction_explicit(basis: SpinBasis, J: float, g: float, as_printed: bool = False) -> DenseOperator:
    """Closed-form (1/2)[S, H1] through order J lambda^2 for a clean gradient.

    Operators on sites outside 1..L are zero. The default coefficients are
    the ones that agree with the numeric commutator to O(J lambda^3);
    ``as_printed`` uses the alternative signs and factors, which leave an
    O(J lambda^2) mismatch at the right chain end and in the zz-kappa terms.
    """
    L = basis.L
    lam = J / g
    d = basis.dimension

    def z(m):
        return np.diag(_sz(basis, m)).astype(complex)

    def c(i, j):
        return flip_operators(basis, i, j)[0]

    def k(i, j):
        return flip_operators(basis, i, j)[1]

    def mm(*ops):
        return reduce(np.matmul, ops)

    # zz-kappa weight, right-end signs and cc sign of the b line
    w, r, cc = (2, -1, -2) if as_printed else (1, 1, 2)
    a = J * lam**2 / (1 - lam**2) / 16
    b = J * lam**2 / (1 - lam**2 / 4) / 16
    out = -(J * lam / 8) * (z(1) - z(L))
    out = out - a * (
        k(1, 3) + k(L - 2, L)
        + mm(z(1), z(2) - z(3)) - mm(z(L - 2) - z(L - 1), z(L))
        - w * mm(z(1), z(3), k(2, 4)) - w * mm(z(L - 2), z(L), k(L - 3, L - 1))
    )
    out = out + b * (
        mm(z(1) - z(2), z(3)) + r * mm(z(L - 2), z(L) - z(L - 1))
        - k(1, 3) - r * k(L - 2, L)
        + cc * mm(c(1, 2), c(3, 4)) + cc * mm(c(L - 3, L - 2), c(L - 1, L))
    )
    bulk = np.zeros((d, d), dtype=complex)
    for j in range(2, L - 2):
        bulk += (
            k(j, j + 2) + mm(z(j), z(j + 1) - z(j + 2))
            - w * mm(z(j), z(j + 2), k(j + 1, j + 3)) - 2 * mm(c(j - 1, j), c(j + 1, j + 2))
        )
        bulk += (
            k(j, j + 2) - mm(z(j) - z(j + 1), z(j + 2))
            - w * mm(z(j), z(j + 2), k(j - 1, j + 1)) - 2 * mm(c(j, j + 1), c(j + 2, j + 3))
        )
    out = out - a * bulk
    return DenseOperator(basis, out)


def spectral_distance(H_heis: DenseOperator, H_ising: DenseOperator) -> float:
    """(1/2^N) sqrt(sum_i (E^H_i - E^I_i)^2) over ascending spectra."""
    if H_heis.basis.dimension != H_ising.basis.dimension:
        raise ValueError("Hamiltonians act on different spaces")
    e_h = np.linalg.eigvalsh(H_heis.matrix)
    e_i = np.sort(np.real(np.diag(H_ising.matrix))) if H_ising.is_diagonal() else np.linalg.eigvalsh(H_ising.matrix)
    return float(np.sqrt(np.sum((e_h - e_i) ** 2)) / H_heis.basis.dimension)


def heisenberg_ising_distance(spec: ModelSpec, fields: FieldProfile) -> float:
    from .models import build_heisenberg

    return spectral_distance(build_heisenberg(spec, fields), build_ising(spec, fields))


def _neel(basis: SpinBasis) -> StateVector:
    from .models import initial_state

    return initial_state(basis, "neel")


ENSEMBLES = ("late", "static")


def late_time_weights(gen: SwGenerator, state: StateVector) -> np.ndarray:
    """Populations |<c| e^S |psi>|^2 of the dressed product configurations.

    The eigenstates of H are e^{-S}|c> up to O(lambda^2), so long-time
    averages of any observable A reduce to sum_c p_c <c| e^S A e^-S |c>.
    """
    return np.abs(unitary_exp(gen) @ state.amplitudes) ** 2


def _ensemble_mean(gen: SwGenerator, state: StateVector, ensemble: str):
    if ensemble == "late":
        p = late_time_weights(gen, state)
        return lambda m: float(np.real(np.diag(m)) @ p)
    if ensemble == "static":
        a = state.amplitudes
        return lambda m: float(np.real(np.vdot(a, m @ a)))
    raise ValueError(f"ensemble must be one of {ENSEMBLES}")


def dressed_matrix(gen: SwGenerator, j: int) -> np.ndarray:
    """sigma^z_j + ad_S sigma^z_j + ad_S^2 sigma^z_j / 2, symmetrized."""
    S = gen.S.matrix
    sz = np.diag(gen.basis.spin_values(j)).astype(complex)
    ad1 = S @ sz - sz @ S
    ad2 = S @ ad1 - ad1 @ S
    m = sz + ad1 + ad2 / 2
    return (m + m.conj().T) / 2


def dressed_sz(
    gen: SwGenerator, j: int, state: StateVector | None = None, ensemble: str = "late"
) -> DressedObservable:
    """Dressed sigma^z_j with its normalization N_j = sqrt(<Z_j^2>).

    ``ensemble="late"`` takes expectations in the dephased long-time state
    reached from ``state`` (Neel by default); ``"static"`` uses the bare
    state itself.
    """
    gen.basis.check_site(j)
    m = dressed_matrix(gen, j)
    psi = state if state is not None else _neel(gen.basis)
    mean = _ensemble_mean(gen, psi, ensemble)
    return DressedObservable(DenseOperator(gen.basis, m, True), float(np.sqrt(mean(m @ m))), j, mean(m))


def predicted_one_point(L: int, j: int, lam: float) -> float:
    """Leading-order normalized one-point function for the Neel state."""
    sign = (-1) ** (j + 1)
    return sign * (1 - lam**2) if j in (1, L) else sign * (1 - 2 * lam**2)


def qfi_alpha(L: int) -> float:
    return 8 - 8 / L


def qfi_perturbative(L: int, lam: float) -> float:
    """(8 - 8/L) lambda^2."""
    return qfi_alpha(L) * lam**2


def dressed_correlations(
    gen: SwGenerator, state: StateVector | None = None, ensemble: str = "late"
) -> tuple[np.ndarray, np.ndarray]:
    """Normalized connected correlators (-1)^{m+n} N_m^-1 N_n^-1 (<Z_m Z_n> - <Z_m><Z_n>).

    Returns the L x L correlator matrix and the normalizations.
    """
    basis = gen.basis
    psi = state if state is not None else _neel(basis)
    mean = _ensemble_mean(gen, psi, ensemble)
    zs = [dressed_matrix(gen, j) for j in basis.sites]
    means = np.array([mean(z) for z in zs])
    two = np.array([[mean(zm @ zn) for zn in zs] for zm in zs])
    norms = np.sqrt(np.diag(two))
    signs = np.array([(-1.0) ** j for j in basis.sites])
    conn = (two - np.outer(means, means)) / np.outer(norms, norms)
    return np.outer(signs, signs) * conn, norms


def qfi_dressed_twopoint(gen: SwGenerator, state: StateVector | None = None, ensemble: str = "late") -> float:
    """(1/L) sum_{m,n} of the normalized dressed connected correlators."""
    corr, _ = dressed_correlations(gen, state, ensemble)
    return float(np.sum(corr) / gen.basis.L)


def resonance_period_l4(g: float, J: float) -> float:
    """Period (ns) of the |udd u> <-> |duud> oscillation for L = 4, no disorder.

    The effective coupling J^3 / (4 g^2) MHz splits the pair, giving
    2e3 g^2 / J^3 ns.
    """
    return 2e3 * g**2 / J**3
