import numpy as np
import pytest
import scipy.linalg

from nvbath import linops
from nvbath.linops import (
    DensityMatrix,
    InvariantViolation,
    Operator,
    eig_hermitian,
    expm_hermitian,
    identity,
    kron,
    maximally_mixed,
    partial_trace,
    pure_state,
    space,
    spin_operators,
)

SIGMA_Y = np.array([[0, -1j], [1j, 0]])


def random_hermitian(rng, dim, scale=1.0):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return scale * (g + g.conj().T) / 2


def random_density(rng, dim):
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    rho = g @ g.conj().T
    return rho / rho.trace()


def test_spin_half_sz_diagonal():
    _, _, sz = spin_operators(0.5)
    assert np.allclose(np.diag(sz.entries), [0.5, -0.5])


def test_spin_one_sz_diagonal():
    _, _, sz = spin_operators(1)
    assert np.allclose(np.diag(sz.entries), [1.0, 0.0, -1.0])


@pytest.mark.parametrize("s", [0.5, 1])
def test_commutation_relations(s):
    sx, sy, sz = (op.entries for op in spin_operators(s))
    assert np.max(np.abs(sx @ sy - sy @ sx - 1j * sz)) <= 1e-12
    assert np.max(np.abs(sy @ sz - sz @ sy - 1j * sx)) <= 1e-12
    assert np.max(np.abs(sz @ sx - sx @ sz - 1j * sy)) <= 1e-12


def test_unsupported_spin_rejected():
    with pytest.raises(ValueError):
        spin_operators(1.5)


def test_kron_identity():
    a = identity(space(("a", 2)))
    b = identity(space(("b", 2)))
    out = kron(a, b)
    assert np.array_equal(out.entries, np.eye(4))
    assert out.space.names == ("a", "b")


def test_kron_sigma_y_pair_matches_bruteforce_expansion():
    # Independent oracle: tensor product written out by index arithmetic.
    expected = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            for k in range(2):
                for l in range(2):
                    expected[2 * i + k, 2 * j + l] = SIGMA_Y[i, j] * SIGMA_Y[k, l]
    a = Operator(space(("a", 2)), SIGMA_Y, hermitian=True)
    b = Operator(space(("b", 2)), SIGMA_Y, hermitian=True)
    assert np.array_equal(kron(a, b).entries, expected)


def test_kron_basis_ordering_convention():
    # kron(diag(1,0), diag(0,1)) = diag(0,1,0,0) in ordering |00>,|01>,|10>,|11>
    a = Operator(space(("a", 2)), np.diag([1.0, 0.0]))
    b = Operator(space(("b", 2)), np.diag([0.0, 1.0]))
    assert np.allclose(np.diag(kron(a, b).entries), [0, 1, 0, 0])


def test_kron_name_collision():
    a = identity(space(("a", 2)))
    with pytest.raises(InvariantViolation):
        kron(a, a)


def test_expm_zero_time_is_identity():
    rng = np.random.default_rng(7)
    h = Operator(space(("s", 4)), random_hermitian(rng, 4), hermitian=True)
    u = expm_hermitian(h, 0.0)
    assert np.max(np.abs(u.entries - np.eye(4))) <= 1e-12


def test_expm_diagonal_closed_form():
    # exp(-i 2*pi nu Sz t) on spin-1/2 has diagonal phases e^{-/+ i pi nu t}
    _, _, sz = spin_operators(0.5)
    nu, t = 3.2e6, 1.7e-7
    u = expm_hermitian(Operator(sz.space, nu * sz.entries, hermitian=True), t)
    expected = np.diag([np.exp(-1j * np.pi * nu * t), np.exp(1j * np.pi * nu * t)])
    assert np.max(np.abs(u.entries - expected)) <= 1e-12


def test_expm_group_property_and_scipy_cross_check():
    rng = np.random.default_rng(11)
    sp = space(("s", 5))
    h = Operator(sp, random_hermitian(rng, 5, scale=2.5e5), hermitian=True)
    t1, t2 = 3.1e-6, 0.9e-6
    u1 = expm_hermitian(h, t1).entries
    u2 = expm_hermitian(h, t2).entries
    u12 = expm_hermitian(h, t1 + t2).entries
    assert np.max(np.abs(u1 @ u2 - u12)) <= 1e-10
    # independent oracle: scipy's general matrix exponential
    ref = scipy.linalg.expm(-2j * np.pi * h.entries * t1)
    assert np.max(np.abs(u1 - ref)) <= 1e-9


def test_expm_norm_preserving():
    rng = np.random.default_rng(13)
    sp = space(("s", 6))
    h = Operator(sp, random_hermitian(rng, 6, scale=1e6), hermitian=True)
    u = expm_hermitian(h, 2.3e-6).entries
    for _ in range(5):
        v = rng.standard_normal(6) + 1j * rng.standard_normal(6)
        assert abs(np.linalg.norm(u @ v) - np.linalg.norm(v)) <= 1e-10 * np.linalg.norm(v)


def test_expm_rejects_non_hermitian():
    sp = space(("s", 2))
    bad = Operator(sp, np.array([[0.0, 1.0], [0.0, 0.0]]))
    with pytest.raises(InvariantViolation):
        expm_hermitian(bad, 1.0)


def test_partial_trace_product_state():
    rng = np.random.default_rng(17)
    sp = space(("a", 2), ("b", 3))
    ra = random_density(rng, 2)
    rb = random_density(rng, 3)
    rho = DensityMatrix(sp, np.kron(ra, rb))
    out = partial_trace(rho, ["a"])
    assert out.space.names == ("a",)
    assert np.max(np.abs(out.entries - ra)) <= 1e-12
    out_b = partial_trace(rho, ["b"])
    assert np.max(np.abs(out_b.entries - rb)) <= 1e-12


def test_partial_trace_bell_state_is_maximally_mixed():
    sp = space(("a", 2), ("b", 2))
    phi_minus = np.zeros(4, dtype=complex)
    phi_minus[0] = 1 / np.sqrt(2)
    phi_minus[3] = -1 / np.sqrt(2)
    rho = pure_state(sp, phi_minus)
    out = partial_trace(rho, ["b"])
    assert np.max(np.abs(out.entries - np.eye(2) / 2)) <= 1e-12


def test_partial_trace_preserves_trace_and_linearity():
    rng = np.random.default_rng(19)
    sp = space(("a", 2), ("b", 2), ("c", 2))
    r1 = random_density(rng, 8)
    r2 = random_density(rng, 8)
    lam = 0.37
    mix = DensityMatrix(sp, lam * r1 + (1 - lam) * r2)
    out = partial_trace(mix, ["b"])
    assert abs(out.entries.trace() - 1.0) <= 1e-12
    lhs = out.entries
    rhs = (
        lam * partial_trace(DensityMatrix(sp, r1), ["b"]).entries
        + (1 - lam) * partial_trace(DensityMatrix(sp, r2), ["b"]).entries
    )
    assert np.max(np.abs(lhs - rhs)) <= 1e-12


def test_partial_trace_unknown_name():
    rho = maximally_mixed(space(("a", 2)))
    with pytest.raises(KeyError):
        partial_trace(rho, ["nope"])


def test_eig_diagonal_case():
    sp = space(("s", 3))
    h = Operator(sp, np.diag([3.0, 1.0, 2.0]), hermitian=True)
    evals, _ = eig_hermitian(h)
    assert np.allclose(evals, [3.0, 2.0, 1.0])


def test_eig_pauli_x_spectrum():
    sp = space(("s", 2))
    h = Operator(sp, np.array([[0.0, 1.0], [1.0, 0.0]]), hermitian=True)
    evals, vecs = eig_hermitian(h)
    assert np.allclose(evals, [1.0, -1.0])
    assert vecs.unitary


def test_eig_reconstruction_residual():
    rng = np.random.default_rng(23)
    sp = space(("s", 12))
    h = Operator(sp, random_hermitian(rng, 12), hermitian=True)
    evals, vecs = eig_hermitian(h)
    v = vecs.entries
    recon = (v * evals) @ v.conj().T
    assert np.max(np.abs(recon - h.entries)) <= 1e-10
    assert np.all(np.diff(evals) <= 0)


def test_density_matrix_invariants_enforced():
    sp = space(("a", 2))
    with pytest.raises(InvariantViolation):
        DensityMatrix(sp, np.array([[0.9, 0.2], [0.3, 0.1]]))  # not Hermitian
    with pytest.raises(InvariantViolation):
        DensityMatrix(sp, np.diag([0.7, 0.7]))  # trace != 1
    with pytest.raises(InvariantViolation):
        DensityMatrix(sp, np.diag([1.2, -0.2]))  # negative eigenvalue


def test_operator_flag_validation():
    sp = space(("a", 2))
    with pytest.raises(InvariantViolation):
        Operator(sp, np.array([[0, 1], [0, 0]]), hermitian=True)
    with pytest.raises(InvariantViolation):
        Operator(sp, 2 * np.eye(2), unitary=True)
