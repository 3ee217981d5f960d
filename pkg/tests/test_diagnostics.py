import numpy as np
import pytest

from gradient_dtc.diagnostics import (
    EnsembleStat,
    bipartite_entropy_density,
    dimensionless_energy,
    e_infinity,
    ensemble_stat,
    first_return_time,
    floquet_mutual_information,
    floquet_reversal_time,
    heating_curve,
    late_time_qfi,
    late_time_window,
    late_value,
    local_minima,
    mutual_information,
    participation_ratio,
    power_law_fit,
    predicted_resonance_J,
    qfi_staggered,
    spin_reversal_time,
    staggered_magnetization,
    time_disorder_avg_sz,
)
from gradient_dtc.evolve import (
    SquareDrive,
    Trajectory,
    evolve_square_drive,
    evolve_static,
    evolve_stroboscopic,
    floquet_eigenstates,
    floquet_operator_delta,
)
from gradient_dtc.models import PHASE_RATE, ModelSpec, build_heisenberg, initial_state, sample_fields
from gradient_dtc.spinops import DenseOperator, SpinBasis, SpinOpsError, StateVector


def traj(z, T=100.0, every=2):
    z = np.asarray(z, dtype=float)
    return Trajectory(np.arange(len(z)) * every * T, z[:, None])


def cat(basis, a="udud", b="dudu"):
    amps = initial_state(basis, a).amplitudes + initial_state(basis, b).amplitudes
    return StateVector(basis, amps / np.sqrt(2))


def random_state(L, seed):
    rng = np.random.default_rng(seed)
    b = SpinBasis(L)
    return StateVector(b, rng.normal(size=b.dimension) + 1j * rng.normal(size=b.dimension)).normalized()


# ensemble averages

def test_ensemble_stat_invariants():
    s = ensemble_stat([1.0, 3.0], eps=0.1)
    assert (s.mean, s.std, s.count, s.coords) == (2.0, 1.0, 2, {"eps": 0.1})
    with pytest.raises(ValueError):
        EnsembleStat(0.0, -1.0, 1)
    with pytest.raises(ValueError):
        ensemble_stat([])


def test_constant_trajectories_average_to_one():
    s = time_disorder_avg_sz([traj(np.ones(10)) for _ in range(3)], 1, 10)
    assert (s.mean, s.std, s.count) == (1.0, 0.0, 3)


def test_alternating_trajectory_averages_to_zero():
    z = np.array([(-1) ** s for s in range(10)])
    assert time_disorder_avg_sz([traj(z)], 1, 10).mean == 0.0


def test_insufficient_samples():
    with pytest.raises(ValueError):
        time_disorder_avg_sz([traj(np.ones(5))], 1, 10)


def phase_point(g, J, eps, realizations=10):
    spec = ModelSpec(6, J, 5000, g, disorder_width=9)
    psi = initial_state(spec.basis, "neel")
    trs = []
    for r in range(realizations):
        H = build_heisenberg(spec, sample_fields(spec, 2021, r))
        trs.append(evolve_stroboscopic(floquet_operator_delta(H, eps, 100), psi, 400, 2, 100))
    return time_disorder_avg_sz(trs, 1, 200).mean


def test_weak_gradient_plateau_and_resonance_dip():
    assert phase_point(100, 2.5, 0.05) == pytest.approx(1, abs=0.1)
    assert phase_point(600, 10.0, 0.1) < phase_point(600, 2.5, 0.1) - 0.2


# spin reversal

def test_constant_trajectory_not_reversed():
    assert spin_reversal_time(traj(np.ones(20))) is None


def test_step_trajectory_reversal_time():
    z = np.r_[np.ones(5), -np.ones(5)]
    assert spin_reversal_time(traj(z)) == pytest.approx(10 * 100)


def test_tiny_values_do_not_trigger():
    z = np.r_[np.ones(3), -1e-8, np.ones(3)]
    assert spin_reversal_time(traj(z)) is None


def test_floquet_reversal_matches_direct_trajectory():
    spec = ModelSpec(4, 2.5, 5000, 0, disorder_width=9)
    H = build_heisenberg(spec, sample_fields(spec, 2021, 0))
    U = floquet_operator_delta(H, 0.1, 100)
    psi = initial_state(spec.basis, "neel")
    direct = spin_reversal_time(evolve_stroboscopic(U, psi, 2000, 2, 100))
    fast = floquet_reversal_time(floquet_eigenstates(U), psi, 100, 2000)
    assert direct is not None and fast == pytest.approx(direct)


# mutual information

def test_product_state_has_no_mutual_information():
    b = SpinBasis(4)
    assert mutual_information(initial_state(b, "neel"), [1], [4]) == pytest.approx(0, abs=1e-12)


def test_cat_state_end_to_end_information():
    assert mutual_information(cat(SpinBasis(4)), [1], [4]) == pytest.approx(np.log(2), abs=1e-12)


def test_overlapping_regions_rejected():
    with pytest.raises(SpinOpsError):
        mutual_information(cat(SpinBasis(4)), [1, 2], [2])


@pytest.mark.parametrize("seed", range(5))
def test_mutual_information_symmetric_and_nonnegative(seed):
    psi = random_state(5, seed)
    ab = mutual_information(psi, [1], [4, 5])
    ba = mutual_information(psi, [4, 5], [1])
    assert ab == pytest.approx(ba, abs=1e-12)
    assert ab >= -1e-8


def test_six_site_eigenstate_mutual_information_near_ln2():
    def f11(L, realizations=4):
        spec = ModelSpec(L, 4, 5600, 600, disorder_width=9)
        vals = []
        for r in range(realizations):
            H = build_heisenberg(spec, sample_fields(spec, 2021, r))
            vals.append(floquet_mutual_information(floquet_eigenstates(floquet_operator_delta(H, 0.05, 100))))
        return np.mean(vals)

    assert abs(f11(6) - np.log(2)) < 0.1 * np.log(2)


# QFI

def test_qfi_of_neel_is_zero():
    assert qfi_staggered(initial_state(SpinBasis(6), "neel")) == pytest.approx(0, abs=1e-12)


def test_qfi_of_cat_is_L():
    assert qfi_staggered(cat(SpinBasis(4))) == pytest.approx(4)


def test_staggered_operator_spectrum():
    for L in (3, 4, 5):
        o = np.real(np.diag(staggered_magnetization(SpinBasis(L)).matrix))
        assert np.all(np.abs(o) <= L)
        assert np.all((o - L) % 2 == 0)


@pytest.mark.parametrize("seed", range(3))
def test_qfi_global_phase_and_reflection_invariance(seed):
    psi = random_state(6, seed)
    b = psi.basis
    f = qfi_staggered(psi)
    assert qfi_staggered(StateVector(b, np.exp(0.7j) * psi.amplitudes)) == pytest.approx(f, abs=1e-12)
    spins = b.spin_table
    reflected = np.array([b.index_of(s[::-1]) for s in spins])
    amps = np.empty_like(psi.amplitudes)
    amps[reflected] = psi.amplitudes
    assert qfi_staggered(StateVector(b, amps)) == pytest.approx(f, abs=1e-12)


def test_late_time_window():
    t = late_time_window(4.0)
    assert len(t) == 24
    jt = PHASE_RATE * 4.0 * t
    assert jt[0] == pytest.approx(1e3) and jt[-1] == pytest.approx(1e4)


def test_late_time_qfi_follows_perturbative_law():
    L, J, g = 8, 4.0, 200.0
    spec = ModelSpec(L, J, 5000, g, disorder_width=0.4)
    psi = initial_state(spec.basis, "neel")
    vals = [late_time_qfi(build_heisenberg(spec, sample_fields(spec, 2021, r)), psi, J) for r in range(4)]
    assert np.mean(vals) == pytest.approx((8 - 8 / L) * (J / g) ** 2, rel=0.2)


# heating

def test_q_trivial_values():
    spec = ModelSpec(4, 4, 100, 0, disorder_width=5)
    H = build_heisenberg(spec, sample_fields(spec, 1, 0))
    e0 = -3.0
    assert dimensionless_energy(e0, e0, H) == 0
    assert dimensionless_energy(e_infinity(H), e0, H) == pytest.approx(1)
    assert e_infinity(H) == pytest.approx(0, abs=1e-12)


def test_q_rejects_infinite_temperature_start():
    spec = ModelSpec(4, 4, 100, 0)
    H = build_heisenberg(spec, sample_fields(spec, 1, 0))
    with pytest.raises(ValueError):
        dimensionless_energy(1.0, 0.0, H)


@pytest.mark.parametrize("c", [-7.3, 2.0, 55.5])
def test_q_shift_invariance(c):
    spec = ModelSpec(4, 4, 100, 0, disorder_width=5)
    H = build_heisenberg(spec, sample_fields(spec, 1, 0))
    shifted = H + DenseOperator(H.basis, c * np.eye(16, dtype=complex), True)
    q = dimensionless_energy(-1.0, -2.5, H)
    assert dimensionless_energy(-1.0 + c, -2.5 + c, shifted) == pytest.approx(q, abs=1e-12)


def test_late_value_window():
    series = np.arange(1001, dtype=float)
    assert late_value(series, 1000) == pytest.approx(np.mean(np.arange(876, 1001)))
    assert late_value(series, 4000 // 4, fraction=0.125) == late_value(series, 1000)


@pytest.mark.slow
def test_heating_at_zero_gradient_grows_with_length():
    def q(L, realizations=2):
        spec = ModelSpec(L, 4, 100, 0, disorder_width=5)
        out = []
        for r in range(realizations):
            H = build_heisenberg(spec, sample_fields(spec, 2021, r))
            psi = initial_state(spec.basis, "ground", H)
            tr = evolve_square_drive(H, SquareDrive(50, 1e4, 0.5), psi, 1000)
            out.append(late_value(heating_curve(tr, H), 1000))
        return np.mean(out)

    q8, q10 = q(8), q(10)
    assert q8 > 0.5
    assert abs(1 - q10) < abs(1 - q8)


# entropy and participation

def test_entropy_density_examples():
    assert bipartite_entropy_density(initial_state(SpinBasis(4), "neel")) == pytest.approx(0, abs=1e-12)
    b = SpinBasis(2)
    bell = StateVector(b, np.array([1, 0, 0, 1]) / np.sqrt(2))
    assert bipartite_entropy_density(bell) == pytest.approx(np.log(2) / 2)


def test_participation_ratio_limits():
    spec = ModelSpec(4, 1, 50, 10, disorder_width=0.5)
    H = build_heisenberg(spec, sample_fields(spec, 1, 0))
    _, v = H.eigh
    assert participation_ratio(StateVector(spec.basis, v[:, 3]), H) == pytest.approx(1)
    uniform = StateVector(spec.basis, v.sum(axis=1) / 4)
    assert participation_ratio(uniform, H) == pytest.approx(16)


def test_participation_ratio_tends_to_one_at_strong_gradient():
    spec = ModelSpec(10, 1, 5000, 30, disorder_width=0.5)
    H = build_heisenberg(spec, sample_fields(spec, 2021, 0))
    assert participation_ratio(initial_state(spec.basis, "neel"), H) == pytest.approx(1, abs=0.05)


@pytest.mark.parametrize("g", [20.0, 60.0, 200.0])
def test_unit_participation_keeps_entropy_at_initial_value(g):
    spec = ModelSpec(6, 1, 5000, g, disorder_width=0.5)
    H = build_heisenberg(spec, sample_fields(spec, 3, 0))
    _, v = H.eigh
    psi = StateVector(spec.basis, v[:, 7])
    assert participation_ratio(psi, H) == pytest.approx(1)
    tr = evolve_static(H, psi, np.linspace(0, 5e3, 6), keep_states=True)
    s = [bipartite_entropy_density(st) for st in tr.states]
    assert np.allclose(s, s[0], atol=1e-9)


# resonance prediction and fitting helpers

def test_predicted_resonances():
    assert predicted_resonance_J(100, "end", 1) == pytest.approx(10)
    assert predicted_resonance_J(100, "bulk", 1) == pytest.approx(5)
    assert predicted_resonance_J(200, "end", 1) == pytest.approx(5)
    with pytest.raises(ValueError):
        predicted_resonance_J(100, "end", 0)


def test_power_law_fit_recovers_exponent():
    x = np.logspace(1, 2.5, 8)
    a, k = power_law_fit(x, 3.0 * x**-1.84)
    assert (a, k) == pytest.approx((3.0, -1.84))


def test_first_return_time_of_cosine():
    t = np.linspace(0, 30, 3001)
    assert first_return_time(t, np.cos(2 * np.pi * t / 7.0)) == pytest.approx(7.0, abs=1e-3)


def test_local_minima():
    x = np.arange(7.0)
    assert local_minima(x, [3, 2, 1, 2, 3, 0, 1]) == [2.0, 5.0]
