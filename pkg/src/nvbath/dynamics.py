"""Pulse sequences and time evolution.

Pulses are ideal instantaneous rotations; a systematic over/under-rotation
knob on the Bell preparation models pulse imperfection.  Free evolution is
piecewise-constant Hamiltonian propagation (exp(-i 2 pi H t), H in Hz).

The working frame for trajectory simulations is the interaction picture of
the Ms in {0, +1} two-level electron subspace: the constant zero-field and
Zeeman offsets are dropped and only electron-state-conditioned bath/ancilla
terms are kept.  Deterministic phases on the retained levels do not affect
concurrence or |L|, so every reported quantity is frame-independent.

Concurrency: all functions are pure; a single trajectory is propagated
sequentially (state threading), while independent trajectories (different
seeds or sequences) can run concurrently without coordination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import metrics
from .linops import (
    DensityMatrix,
    InvariantViolation,
    Operator,
    SpaceLabel,
    partial_trace_matrix,
    pure_state,
    spin_operators,
)
from .model import (
    ANCILLA,
    ELECTRON,
    BathConfiguration,
    N14Params,
    SystemParams,
    basis_index,
    bell_phi_minus,
    two_qubit_space,
)

MAX_EXACT_BATH = 8

_PAULI = {
    "x": np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex),
    "y": np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex),
    "z": np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex),
}
_SPIN_HALF = {k: v / 2 for k, v in _PAULI.items()}
_IZ3 = np.diag([1.0, 0.0, -1.0]).astype(complex)


@dataclass(frozen=True)
class Pulse:
    """Instantaneous rotation exp(-i angle (axis . S)) on a named subsystem."""

    time: float
    target: str
    axis: tuple[float, float, float]
    angle: float

    def __post_init__(self):
        ax = np.asarray(self.axis, dtype=float)
        if abs(np.linalg.norm(ax) - 1.0) > 1e-12:
            raise InvariantViolation("pulse axis must be a unit vector")
        if self.time < 0:
            raise InvariantViolation("pulse time must be >= 0")
        object.__setattr__(self, "axis", (float(ax[0]), float(ax[1]), float(ax[2])))


@dataclass(frozen=True)
class PulseSequence:
    duration: float
    pulses: tuple[Pulse, ...]
    label: str = ""

    def __post_init__(self):
        if self.duration <= 0:
            raise InvariantViolation("sequence duration must be > 0")
        times = [p.time for p in self.pulses]
        if any(t2 <= t1 for t1, t2 in zip(times, times[1:])):
            raise InvariantViolation("pulses must be strictly sorted in time")
        if times and (times[0] < 0 or times[-1] > self.duration):
            raise InvariantViolation("pulse times must lie in [0, duration]")
        object.__setattr__(self, "pulses", tuple(self.pulses))


def make_fid(duration: float) -> PulseSequence:
    """Free induction: no pulses."""
    return PulseSequence(duration=duration, pulses=(), label="fid")


def pdd_fractions(n_pulses: int) -> tuple[float, ...]:
    """Symmetric pi-pulse positions (k - 1/2)/n as fractions of the total time."""
    if n_pulses < 1:
        raise InvariantViolation("n_pulses must be >= 1")
    return tuple((k - 0.5) / n_pulses for k in range(1, n_pulses + 1))


def make_pdd(n_pulses: int, duration: float) -> PulseSequence:
    """Periodic dynamical decoupling: n pi-x pulses on the electron.

    Symmetric placement tau/2 - pi - tau - ... - pi - tau/2, so n=1 is a Hahn
    echo and n=2 has pulses at T/4 and 3T/4.
    """
    pulses = tuple(
        Pulse(time=f * duration, target=ELECTRON, axis=(1.0, 0.0, 0.0), angle=math.pi)
        for f in pdd_fractions(n_pulses)
    )
    return PulseSequence(duration=duration, pulses=pulses, label=f"pdd{n_pulses}")


def make_hahn(duration: float) -> PulseSequence:
    seq = make_pdd(1, duration)
    return PulseSequence(duration=seq.duration, pulses=seq.pulses, label="hahn")


def sequence_fractions(kind: str, n_pulses: int) -> tuple[float, ...]:
    """Pulse positions of a named sequence family as fractions of total time."""
    if kind == "fid":
        return ()
    if kind == "hahn":
        return pdd_fractions(1)
    if kind == "pdd":
        return pdd_fractions(n_pulses)
    raise InvariantViolation(f"unknown sequence kind {kind!r}")


def build_sequence(kind: str, n_pulses: int, duration: float) -> PulseSequence:
    if kind == "fid":
        return make_fid(duration)
    if kind == "hahn":
        return make_hahn(duration)
    if kind == "pdd":
        return make_pdd(n_pulses, duration)
    raise InvariantViolation(f"unknown sequence kind {kind!r}")


# ---------------------------------------------------------------------------
# generic propagation
# ---------------------------------------------------------------------------

def _kron_embed(space_: SpaceLabel, mats: dict[int, np.ndarray]) -> np.ndarray:
    out = np.eye(1, dtype=complex)
    for ax, (_, d) in enumerate(space_.subsystems):
        m = mats.get(ax)
        out = np.kron(out, m if m is not None else np.eye(d, dtype=complex))
    return out


def rotation_unitary(space_: SpaceLabel, pulse: Pulse) -> np.ndarray:
    """Full-space unitary of one ideal pulse (spin-1/2 or spin-1 target)."""
    ax = space_.axis(pulse.target)
    d = space_.dims[ax]
    if d == 2:
        nx, ny, nz = pulse.axis
        gen = nx * _SPIN_HALF["x"] + ny * _SPIN_HALF["y"] + nz * _SPIN_HALF["z"]
    elif d == 3:
        sx, sy, sz = (op.entries for op in spin_operators(1, pulse.target))
        gen = pulse.axis[0] * sx + pulse.axis[1] * sy + pulse.axis[2] * sz
    else:
        raise InvariantViolation(f"no rotation generator for subsystem dim {d}")
    evals, vecs = np.linalg.eigh(gen)
    u_small = (vecs * np.exp(-1j * pulse.angle * evals)) @ vecs.conj().T
    return _kron_embed(space_, {ax: u_small})


def _propagate(
    rho: np.ndarray,
    h: np.ndarray,
    pulse_ops: list[tuple[float, np.ndarray]],
    sample_times: np.ndarray,
):
    """Yield the raw state at each sample time (pulses at t apply before the sample)."""
    evals, vecs = np.linalg.eigh(h)
    vch = vecs.conj().T

    def free(state, dt):
        if dt == 0.0:
            return state
        u = (vecs * np.exp(-2j * np.pi * evals * dt)) @ vch
        return u @ state @ u.conj().T

    cur = np.array(rho, dtype=complex)
    t_cur = 0.0
    k = 0
    for t in sample_times:
        while k < len(pulse_ops) and pulse_ops[k][0] <= t:
            pt, u = pulse_ops[k]
            cur = free(cur, pt - t_cur)
            t_cur = pt
            cur = u @ cur @ u.conj().T
            k += 1
        cur = free(cur, t - t_cur)
        t_cur = t
        yield cur


def _check_sample_times(sample_times, duration) -> np.ndarray:
    ts = np.asarray(sample_times, dtype=float)
    if ts.ndim != 1 or ts.size == 0:
        raise InvariantViolation("sample_times must be a non-empty 1-d list")
    if np.any(np.diff(ts) < 0):
        raise InvariantViolation("sample_times must be sorted")
    if ts[0] < -1e-15 or ts[-1] > duration * (1 + 1e-12) + 1e-15:
        raise InvariantViolation("sample_times must lie within [0, duration]")
    return ts


def evolve(
    rho0: DensityMatrix,
    h: Operator,
    seq: PulseSequence,
    sample_times,
) -> list[DensityMatrix]:
    """Piecewise free evolution under h interleaved with the sequence's pulses.

    Returns validated states at the requested times.  A pulse whose time
    coincides with a sample time is applied before the state is recorded.
    """
    if rho0.space.subsystems != h.space.subsystems:
        raise InvariantViolation("state and Hamiltonian spaces differ")
    ts = _check_sample_times(sample_times, seq.duration)
    pulse_ops = [(p.time, rotation_unitary(h.space, p)) for p in seq.pulses]
    return [
        DensityMatrix(rho0.space, m)
        for m in _propagate(rho0.entries, h.entries, pulse_ops, ts)
    ]


# ---------------------------------------------------------------------------
# exact system (x) bath evolution
# ---------------------------------------------------------------------------

def bath_space(system_space: SpaceLabel, n_spins: int) -> SpaceLabel:
    subs = system_space.subsystems + tuple((f"bath{i}", 2) for i in range(n_spins))
    return SpaceLabel(subs)


def joint_hamiltonian(
    system_space: SpaceLabel, params: SystemParams, bath: BathConfiguration
) -> Operator:
    """Rotating-frame Hamiltonian of the working system plus the bath (Hz).

    Keeps the 13C Zeeman terms, the electron-state-conditioned secular
    hyperfine couplings (for the ancilla and every bath spin) and the secular
    intra-bath dipolar interaction b_ij (3 Iz Iz - I . I).
    """
    n = len(bath)
    sp = bath_space(system_space, n)
    e_ax = sp.axis(ELECTRON)
    if sp.dims[e_ax] != 2:
        raise InvariantViolation("joint dynamics needs the two-level electron subspace")
    p1 = np.diag([1.0, 0.0]).astype(complex)  # |Ms=1><Ms=1|
    omega_l = params.larmor_c13
    dim = sp.dim
    h = np.zeros((dim, dim), dtype=complex)

    def add_spin_terms(ax: int, hyperfine_row: np.ndarray):
        nonlocal h
        h = h + omega_l * _kron_embed(sp, {ax: _SPIN_HALF["z"]})
        coupling = (
            hyperfine_row[0] * _SPIN_HALF["x"]
            + hyperfine_row[1] * _SPIN_HALF["y"]
            + hyperfine_row[2] * _SPIN_HALF["z"]
        )
        h = h + _kron_embed(sp, {e_ax: p1, ax: coupling})

    if ANCILLA in sp.names:
        add_spin_terms(sp.axis(ANCILLA), params.ancilla_hyperfine[2, :])
    for j, spin in enumerate(bath.spins):
        add_spin_terms(sp.axis(f"bath{j}"), spin.hyperfine)
    for (i, j), b in bath.pair_couplings.items():
        ai, aj = sp.axis(f"bath{i}"), sp.axis(f"bath{j}")
        zz = _kron_embed(sp, {ai: _SPIN_HALF["z"], aj: _SPIN_HALF["z"]})
        xx = _kron_embed(sp, {ai: _SPIN_HALF["x"], aj: _SPIN_HALF["x"]})
        yy = _kron_embed(sp, {ai: _SPIN_HALF["y"], aj: _SPIN_HALF["y"]})
        h = h + b * (2.0 * zz - xx - yy)
    return Operator(sp, h, hermitian=True)


def evolve_with_bath(
    rho0: DensityMatrix,
    params: SystemParams,
    bath: BathConfiguration,
    seq: PulseSequence,
    sample_times,
) -> list[DensityMatrix]:
    """Exact unitary evolution of system (x) bath, reduced to the system.

    The bath starts maximally mixed (room temperature).  Exact diagonalization
    limits the bath to 8 spins; use the CCE module beyond that.
    """
    n = len(bath)
    if n > MAX_EXACT_BATH:
        raise InvariantViolation(f"bath of {n} spins exceeds exact limit {MAX_EXACT_BATH}")
    ts = _check_sample_times(sample_times, seq.duration)
    h = joint_hamiltonian(rho0.space, params, bath)
    rho_joint = np.kron(rho0.entries, np.eye(2**n) / 2**n)
    pulse_ops = [(p.time, rotation_unitary(h.space, p)) for p in seq.pulses]
    keep = rho0.space.names
    out = []
    for m in _propagate(rho_joint, h.entries, pulse_ops, ts):
        reduced = partial_trace_matrix(m, h.space, keep)
        out.append(DensityMatrix(rho0.space, reduced))
    return out


# ---------------------------------------------------------------------------
# conditional (toggling-frame) coherence
# ---------------------------------------------------------------------------

def _toggling_pulse_times(seq: PulseSequence) -> tuple[float, ...]:
    for p in seq.pulses:
        if p.target != ELECTRON:
            raise InvariantViolation("toggling coherence supports electron pulses only")
        if abs(p.angle - math.pi) > 1e-9:
            raise InvariantViolation("toggling coherence supports pi pulses only")
    return tuple(p.time for p in seq.pulses)


def conditional_coherence(
    h0: np.ndarray,
    h1: np.ndarray,
    seq: PulseSequence,
    times,
    rho: np.ndarray | None = None,
) -> np.ndarray:
    """L(t) = tr[W0(t) rho W1(t)^dag] for electron-conditioned generators h0/h1.

    W0/W1 are the toggled propagators of the electron-0 / electron-1 branch:
    each pi pulse on the electron swaps which generator drives each branch.
    rho defaults to the maximally mixed state.  Pulse rotation axes do not
    enter (only the population swap matters for pure-dephasing couplings).
    """
    pulse_times = _toggling_pulse_times(seq)
    ts = _check_sample_times(times, seq.duration)
    d = h0.shape[0]
    eig0 = np.linalg.eigh(h0)
    eig1 = np.linalg.eigh(h1)

    def u(branch, dt):
        lam, v = (eig0, eig1)[branch]
        return (v * np.exp(-2j * np.pi * lam * dt)) @ v.conj().T

    out = np.empty(ts.size, dtype=complex)
    for idx, t in enumerate(ts):
        active = [p for p in pulse_times if p <= t]
        bounds = [0.0, *active, t]
        wa = np.eye(d, dtype=complex)
        wb = np.eye(d, dtype=complex)
        branch = 0
        for k in range(len(bounds) - 1):
            dt = bounds[k + 1] - bounds[k]
            if dt > 0:
                wa = u(branch, dt) @ wa
                wb = u(1 - branch, dt) @ wb
            branch ^= 1
        if rho is None:
            out[idx] = np.einsum("ij,ij->", wa, wb.conj()) / d
        else:
            out[idx] = np.einsum("ij,jk,ik->", wa, rho, wb.conj())
    return out


def conditional_coherence_scaled(
    h0: np.ndarray,
    h1: np.ndarray,
    fractions: tuple[float, ...],
    total_times,
    rho: np.ndarray | None = None,
) -> np.ndarray:
    """As conditional_coherence, but each total time T gets its own sequence
    with pi pulses at the given fractions of T (vectorized over T)."""
    ts = np.asarray(total_times, dtype=float)
    if np.any(ts < 0):
        raise InvariantViolation("total times must be >= 0")
    d = h0.shape[0]
    lam0, v0 = np.linalg.eigh(h0)
    lam1, v1 = np.linalg.eigh(h1)
    bounds = np.array([0.0, *fractions, 1.0])
    seg = np.diff(bounds)
    if np.any(seg < 0):
        raise InvariantViolation("pulse fractions must be sorted within [0, 1]")
    nt = ts.size
    wa = np.broadcast_to(np.eye(d, dtype=complex), (nt, d, d)).copy()
    wb = wa.copy()

    def apply(w, lam, v, dts):
        phases = np.exp(-2j * np.pi * np.outer(dts, lam))
        u = np.einsum("ij,tj,kj->tik", v, phases, v.conj())
        return u @ w

    branch = 0
    for f in seg:
        if f == 0.0:
            branch ^= 1
            continue
        dts = f * ts
        if branch == 0:
            wa = apply(wa, lam0, v0, dts)
            wb = apply(wb, lam1, v1, dts)
        else:
            wa = apply(wa, lam1, v1, dts)
            wb = apply(wb, lam0, v0, dts)
        branch ^= 1
    if rho is None:
        return np.einsum("tij,tij->t", wa, wb.conj()) / d
    return np.einsum("tij,jk,tik->t", wa, rho, wb.conj())


def n14_coherence_factor(
    n14: N14Params, seq: PulseSequence, times
) -> np.ndarray:
    """Electron-coherence factor from the secular spin-1 14N spectator."""
    h1 = n14.a_parallel * _IZ3
    return conditional_coherence(np.zeros((3, 3), dtype=complex), h1, seq, times)


def n14_coherence_factor_scaled(
    n14: N14Params, fractions: tuple[float, ...], total_times
) -> np.ndarray:
    h1 = n14.a_parallel * _IZ3
    return conditional_coherence_scaled(
        np.zeros((3, 3), dtype=complex), h1, fractions, total_times
    )


def exact_electron_coherence(
    params: SystemParams,
    bath: BathConfiguration,
    fractions: tuple[float, ...],
    total_times,
) -> np.ndarray:
    """Bath-induced electron coherence from exact diagonalization (oracle path).

    Evolves a bare electron prepared in |+x> jointly with the bath, one full
    scaled sequence per total time, and reads the normalized coherence.  For
    odd pulse counts the ideal pi pulses swap the coherence element, which for
    the |+x> start shows up as a complex conjugate.
    """
    sp = SpaceLabel(((ELECTRON, 2),))
    plus = pure_state(sp, np.array([1.0, 1.0]) / math.sqrt(2.0))
    out = np.empty(len(total_times), dtype=complex)
    odd = len(fractions) % 2 == 1
    for k, t_total in enumerate(total_times):
        if t_total == 0.0:
            out[k] = 1.0
            continue
        pulses = tuple(
            Pulse(time=f * t_total, target=ELECTRON, axis=(1.0, 0.0, 0.0), angle=math.pi)
            for f in fractions
        )
        seq = PulseSequence(duration=t_total, pulses=pulses, label="scaled")
        rho_t = evolve_with_bath(plus, params, bath, seq, [t_total])[0]
        coh = 2.0 * rho_t.entries[1, 0]  # <Ms=0| rho |Ms=1> over its initial 1/2
        out[k] = np.conj(coh) if odd else coh
    return out


# ---------------------------------------------------------------------------
# Bell-state preparation
# ---------------------------------------------------------------------------

# Calibrated to sit closest to the experiment's quoted initial-state figures
# (overlap fidelity ~0.88, concurrence ~0.67); see calibrate_preparation.
# The quoted pair itself violates F <= (1 + C)/2 and is not exactly reachable
# by any physical two-qubit state; the grid search lands at F ~ 0.817,
# C ~ 0.740 for this preparation model.
CALIBRATED_POLARIZATION = 0.9742
CALIBRATED_ANGLE_ERROR = 1.0136


@dataclass(frozen=True)
class PreparationSpec:
    """Entangling-preparation settings: |00> weight and systematic rotation error.

    ``pulse_angle_error`` is a systematic over/under-rotation in radians,
    added to the nominal angle of every preparation pulse.
    """

    polarization: float = CALIBRATED_POLARIZATION
    pulse_angle_error: float = CALIBRATED_ANGLE_ERROR
    target: str = "phi-minus"

    def __post_init__(self):
        if not (0.0 <= self.polarization <= 1.0):
            raise InvariantViolation("polarization must be in [0, 1]")
        if self.target != "phi-minus":
            raise InvariantViolation("only the phi-minus target is implemented")


def _transition_rotation(i: int, j: int, axis: str, angle: float, sign: float = 1.0):
    """Rotation about +/-x or +/-y on the span of basis states i, j (4x4)."""
    u2 = math.cos(angle / 2) * np.eye(2) - 1j * math.sin(angle / 2) * sign * _PAULI[axis]
    u = np.eye(4, dtype=complex)
    u[i, i], u[i, j] = u2[0, 0], u2[0, 1]
    u[j, i], u[j, j] = u2[1, 0], u2[1, 1]
    return u


def preparation_unitary(pulse_angle_error: float = 0.0) -> np.ndarray:
    """Two conditional electron pi pulses flanking a nuclear pi/2 pulse.

    Drives |00> to (|00> - |11>)/sqrt(2) exactly at zero error.  The electron
    pulses act on the |00> <-> |10> transition and the nuclear pulse on
    |10> <-> |11>; each executes its nominal angle plus the systematic error.
    """
    e = pulse_angle_error
    i00, i10, i11 = basis_index("00"), basis_index("10"), basis_index("11")
    mw_first = _transition_rotation(i00, i10, "x", math.pi + e)
    rf_mid = _transition_rotation(i10, i11, "x", math.pi / 2 + e)
    mw_last = _transition_rotation(i00, i10, "x", math.pi + e, sign=-1.0)
    return mw_last @ rf_mid @ mw_first


def prepare_bell(spec: PreparationSpec) -> DensityMatrix:
    """Imperfectly prepared phi-minus state on the working two-qubit space.

    The pre-pulse state mixes |00><00| (weight = polarization) with the
    electron-polarized, nuclear-unpolarized residual |0><0| (x) I/2.
    """
    sp = two_qubit_space()
    q = (1.0 + spec.polarization) / 2.0
    rho0 = np.zeros((4, 4), dtype=complex)
    rho0[basis_index("00"), basis_index("00")] = q
    rho0[basis_index("01"), basis_index("01")] = 1.0 - q
    u = preparation_unitary(spec.pulse_angle_error)
    return DensityMatrix(sp, u @ rho0 @ u.conj().T)


@dataclass(frozen=True)
class CalibrationResult:
    polarization: float
    pulse_angle_error: float
    fidelity: float
    concurrence: float


def calibrate_preparation(
    fidelity_target: float = 0.88,
    concurrence_target: float = 0.67,
    polarizations=None,
    angle_errors=None,
) -> CalibrationResult:
    """Grid-search (polarization, angle error) closest to the target pair.

    Minimizes (F - F_target)^2 + (C - C_target)^2 over the grid.  Because
    F <= (1 + C)/2 for any state, the target pair (0.88, 0.67) itself is
    unphysical and the optimum sits near that boundary.
    """
    if polarizations is None:
        polarizations = np.linspace(0.5, 1.0, 101)
    if angle_errors is None:
        angle_errors = np.linspace(0.0, 1.2, 121)
    target = bell_phi_minus()
    best = None
    for p in polarizations:
        for e in angle_errors:
            rho = prepare_bell(PreparationSpec(polarization=float(p), pulse_angle_error=float(e)))
            f = metrics.fidelity(rho, target)
            c = metrics.concurrence(rho)
            cost = (f - fidelity_target) ** 2 + (c - concurrence_target) ** 2
            if best is None or cost < best[0]:
                best = (cost, float(p), float(e), f, c)
    _, p, e, f, c = best
    return CalibrationResult(polarization=p, pulse_angle_error=e, fidelity=f, concurrence=c)
