import math

import numpy as np
import pytest

from nvbath.linops import DensityMatrix, InvariantViolation, maximally_mixed, pure_state, space
from nvbath.metrics import (
    NonMarkovReport,
    Revival,
    TimeSeries,
    concurrence,
    fidelity,
    non_markovianity,
    purity,
    total_variation,
)

SP = space(("a", 2), ("b", 2))


def phi_minus():
    v = np.zeros(4, dtype=complex)
    v[0], v[3] = 1 / math.sqrt(2), -1 / math.sqrt(2)
    return pure_state(SP, v)


def random_density(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / rho.trace()


def random_unitary(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    q, r = np.linalg.qr(g)
    return q * (np.diag(r) / np.abs(np.diag(r)))


def test_concurrence_bell_state():
    assert abs(concurrence(phi_minus()) - 1.0) <= 1e-12


def test_concurrence_maximally_mixed():
    assert concurrence(maximally_mixed(SP)) == 0.0


def test_concurrence_werner_family():
    # Symbolic oracle: Werner state concurrence is max(0, (3p-1)/2).
    bell = phi_minus().entries
    for p in np.arange(0.0, 1.0001, 0.1):
        rho = DensityMatrix(SP, p * bell + (1 - p) * np.eye(4) / 4)
        expected = max(0.0, (3 * p - 1) / 2)
        assert abs(concurrence(rho) - expected) <= 1e-10


def test_concurrence_local_unitary_invariance():
    rng = np.random.default_rng(31)
    for _ in range(20):
        rho = random_density(rng, 4)
        c0 = concurrence(DensityMatrix(SP, rho))
        u = np.kron(random_unitary(rng, 2), random_unitary(rng, 2))
        c1 = concurrence(DensityMatrix(SP, u @ rho @ u.conj().T))
        assert abs(c0 - c1) <= 1e-9


def test_concurrence_product_states_zero():
    rng = np.random.default_rng(37)
    for _ in range(200):
        rho = np.kron(random_density(rng, 2), random_density(rng, 2))
        assert concurrence(DensityMatrix(SP, rho)) <= 1e-10


def test_concurrence_wrong_dimension():
    with pytest.raises(InvariantViolation):
        concurrence(maximally_mixed(space(("a", 2))))


def test_fidelity_pure_self_overlap():
    rho = phi_minus()
    assert abs(fidelity(rho, rho) - 1.0) <= 1e-12


def test_fidelity_orthogonal_states():
    sp2 = space(("q", 2))
    zero = pure_state(sp2, np.array([1.0, 0.0]))
    one = pure_state(sp2, np.array([0.0, 1.0]))
    assert abs(fidelity(zero, one)) <= 1e-15


def test_fidelity_maximally_mixed_is_quarter():
    rng = np.random.default_rng(41)
    for _ in range(5):
        sigma = DensityMatrix(SP, random_density(rng, 4))
        assert abs(fidelity(maximally_mixed(SP), sigma) - 0.25) <= 1e-12


def test_fidelity_symmetric():
    rng = np.random.default_rng(43)
    a = DensityMatrix(SP, random_density(rng, 4))
    b = DensityMatrix(SP, random_density(rng, 4))
    assert fidelity(a, b) == fidelity(b, a)


def test_fidelity_space_mismatch():
    with pytest.raises(InvariantViolation):
        fidelity(maximally_mixed(SP), maximally_mixed(space(("q", 4))))


def test_purity():
    assert abs(purity(phi_minus()) - 1.0) <= 1e-12
    assert abs(purity(maximally_mixed(SP)) - 0.25) <= 1e-12


def test_purity_mixture_bounded_by_components():
    rng = np.random.default_rng(47)
    r1, r2 = random_density(rng, 4), random_density(rng, 4)
    lam = 0.6
    mix = purity(DensityMatrix(SP, lam * r1 + (1 - lam) * r2))
    parts = max(purity(DensityMatrix(SP, r1)), purity(DensityMatrix(SP, r2)))
    assert mix <= parts + 1e-12


def test_total_variation_monotone():
    t = np.linspace(0, 1, 50)
    v = np.exp(-3 * t)
    ts = TimeSeries(t, v)
    assert abs(total_variation(ts) - (v[0] - v[-1])) <= 1e-12


def test_total_variation_constant():
    ts = TimeSeries(np.linspace(0, 1, 10), np.full(10, 0.4))
    assert total_variation(ts) == 0.0


def test_total_variation_piecewise():
    ts = TimeSeries(np.array([0.0, 1.0, 2.0, 3.0]), np.array([1.0, 0.0, 0.5, 0.0]))
    assert abs(total_variation(ts) - 2.0) <= 1e-15


def test_total_variation_additive_over_splits():
    rng = np.random.default_rng(53)
    t = np.linspace(0, 1, 101)
    v = rng.random(101)
    full = total_variation(TimeSeries(t, v))
    left = total_variation(TimeSeries(t[:51], v[:51]))
    right = total_variation(TimeSeries(t[50:], v[50:]))
    assert abs(full - (left + right)) <= 1e-12


def test_non_markovianity_monotone_decay_exactly_zero():
    t = np.linspace(0, 10e-6, 200)
    ts = TimeSeries(t, np.exp(-t / 2e-6))
    rep = non_markovianity(ts, 0.0, 10e-6)
    assert rep.measure == 0.0
    assert rep.revivals == ()


def test_non_markovianity_collapse_revival():
    # Oracle by total-variation arithmetic: decay E0 -> 0, revive to h, decay
    # to 0 gives TV = E0 + 2h, dE = E0, measure = 2h.
    e0, h = 0.8, 0.35
    t = np.array([0.0, 1.0, 2.0, 3.0, 4.0])
    v = np.array([e0, 0.0, h, 0.0, 0.0])
    rep = non_markovianity(TimeSeries(t, v), 0.0, 4.0)
    assert abs(rep.measure - 2 * h) <= 1e-6 * 2 * h
    assert abs(rep.total_variation - (e0 + 2 * h)) <= 1e-12
    assert abs(rep.delta_e - e0) <= 1e-12
    assert len(rep.revivals) == 1
    r = rep.revivals[0]
    assert r == Revival(start=1.0, peak_time=2.0, height=h)


def test_non_markovianity_equal_endpoints():
    t = np.array([0.0, 1.0, 2.0])
    v = np.array([0.5, 0.1, 0.5])
    rep = non_markovianity(TimeSeries(t, v), 0.0, 2.0)
    assert abs(rep.delta_e) <= 1e-15
    assert abs(rep.measure - rep.total_variation) <= 1e-12


def test_non_markovianity_window_interpolation():
    t = np.array([0.0, 1.0, 2.0, 3.0])
    v = np.array([1.0, 0.5, 0.75, 0.25])
    rep = non_markovianity(TimeSeries(t, v), 0.5, 2.5)
    # interpolated endpoints: 0.75 at t=0.5 and 0.5 at t=2.5
    assert abs(rep.delta_e - 0.25) <= 1e-12
    assert abs(rep.measure - 2 * 0.25) <= 1e-12  # one rise 0.5 -> 0.75


def test_non_markovianity_nonnegative_random():
    rng = np.random.default_rng(59)
    for _ in range(50):
        n = rng.integers(5, 40)
        t = np.sort(rng.random(n) * 10)
        t = np.unique(t)
        if t.size < 3:
            continue
        v = rng.random(t.size)
        rep = non_markovianity(TimeSeries(t, v), float(t[0]), float(t[-1]))
        assert rep.measure >= 0.0
        # zero iff non-increasing
        assert (rep.measure == 0.0) == bool(np.all(np.diff(v) <= 0))


def test_non_markovianity_bad_window():
    ts = TimeSeries(np.array([0.0, 1.0]), np.array([1.0, 0.0]))
    with pytest.raises(InvariantViolation):
        non_markovianity(ts, 0.5, 0.5)
    with pytest.raises(InvariantViolation):
        non_markovianity(ts, -1.0, 0.5)


def test_time_series_validation():
    with pytest.raises(InvariantViolation):
        TimeSeries(np.array([0.0, 0.0]), np.array([1.0, 2.0]))
    with pytest.raises(InvariantViolation):
        TimeSeries(np.array([0.0]), np.array([1.0]))
    with pytest.raises(InvariantViolation):
        TimeSeries(np.array([0.0, 1.0]), np.array([np.nan, 1.0]))


def test_report_invariant_enforced():
    with pytest.raises(InvariantViolation):
        NonMarkovReport(measure=-1.0, total_variation=0.0, delta_e=1.0, revivals=())
    with pytest.raises(InvariantViolation):
        NonMarkovReport(measure=0.5, total_variation=1.0, delta_e=1.0, revivals=())
