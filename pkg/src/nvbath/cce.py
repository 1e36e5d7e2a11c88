"""Cluster correlation expansion (CCE) of the electron coherence function.

The bath-induced coherence L(t) of the electron under a pi-pulse sequence is
factorized as a product of cluster cumulants,

    L(t) = prod_C Ltilde_C(t),   Ltilde_C = L_C / prod_{S proper subset of C} Ltilde_S,

where L_C is the exactly evolved coherence of cluster C alone (maximally
mixed cluster state, electron-conditioned secular couplings, toggling-frame
pi pulses).  With every subset of the bath enumerated the factorization is
exact; truncation at low order is accurate because intra-bath couplings are
weak.  Where a cumulant denominator magnitude falls below 1e-8 (coherence
zeros, the standard CCE breakdown) the cumulant is set to 1 at that time
point and a CCEConvergenceWarning is emitted.

Determinism: clusters are enumerated and multiplied in a fixed lexicographic
order, so outputs are bit-stable; cluster computations are independent and
could run concurrently provided the final combination keeps that order.
"""

from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass

import numpy as np

from .dynamics import (
    PulseSequence,
    _check_sample_times,
    _toggling_pulse_times,
    conditional_coherence,
    conditional_coherence_scaled,
)
from .linops import DensityMatrix, InvariantViolation
from .model import BathConfiguration, SystemParams

DEFAULT_MAX_ORDER = 2
DEFAULT_PAIR_CUTOFF = 10.0  # Hz
DIVISION_GUARD = 1e-8
MAX_CLUSTER_SPINS = 3       # public cluster_coherence contract
_MAX_INTERNAL_CLUSTER = 8   # exact-evolution ceiling used by full-order CCE

_SX = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex) / 2
_SY = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex) / 2
_SZ = np.diag([0.5, -0.5]).astype(complex)


class CCEConvergenceWarning(UserWarning):
    """Cumulant division guarded near a coherence zero."""


@dataclass(frozen=True)
class Cluster:
    """A sorted set of bath-spin indices."""

    members: tuple[int, ...]

    def __post_init__(self):
        m = tuple(int(i) for i in self.members)
        if len(m) == 0 or sorted(set(m)) != list(m):
            raise InvariantViolation("members must be sorted, unique and non-empty")
        object.__setattr__(self, "members", m)

    @property
    def order(self) -> int:
        return len(self.members)


@dataclass(frozen=True)
class CoherenceCurve:
    """Electron coherence samples; |L| <= 1 (+1e-9) and L(0) = 1."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        v = np.array(self.values, dtype=complex)
        t.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        if t.ndim != 1 or t.shape != v.shape or t.size == 0:
            raise InvariantViolation("times/values must be matching 1-d arrays")
        if np.any(np.diff(t) <= 0):
            raise InvariantViolation("times must be strictly increasing")
        if np.max(np.abs(v)) > 1.0 + 1e-9:
            raise InvariantViolation(f"|L| exceeds 1: {np.max(np.abs(v)):.12f}")
        if t[0] == 0.0 and abs(v[0] - 1.0) > 1e-10:
            raise InvariantViolation("L(0) != 1")


def _adjacency(bath: BathConfiguration, pair_cutoff: float) -> dict[int, set[int]]:
    adj: dict[int, set[int]] = {i: set() for i in range(len(bath))}
    for (i, j), b in bath.pair_couplings.items():
        if abs(b) > pair_cutoff:
            adj[i].add(j)
            adj[j].add(i)
    return adj


def enumerate_clusters(
    bath: BathConfiguration, max_order: int, pair_cutoff: float = DEFAULT_PAIR_CUTOFF
) -> list[Cluster]:
    """All singletons plus connected subsets (under |b_ij| > pair_cutoff edges)
    of size up to max_order, in deterministic lexicographic order.

    The production expansion uses max_order in {1, 2, 3}; higher orders (up to
    the bath size) exist for the exact-factorization cross-check against
    direct diagonalization on small baths.
    """
    n = len(bath)
    if max_order < 1:
        raise InvariantViolation("max_order must be >= 1")
    adj = _adjacency(bath, pair_cutoff)
    levels: list[set[tuple[int, ...]]] = [{(i,) for i in range(n)}]
    for _ in range(2, max_order + 1):
        grown: set[tuple[int, ...]] = set()
        for sub in levels[-1]:
            neighbours = set().union(*(adj[i] for i in sub)) - set(sub)
            for w in neighbours:
                grown.add(tuple(sorted((*sub, w))))
        if not grown:
            break
        levels.append(grown)
    out: list[Cluster] = []
    for level in levels:
        out.extend(Cluster(members=m) for m in sorted(level))
    return out


def cluster_hamiltonians(
    members: tuple[int, ...], bath: BathConfiguration, params: SystemParams
) -> tuple[np.ndarray, np.ndarray]:
    """Electron-conditioned cluster generators (h0, h1) in Hz.

    h_alpha = sum_j [omega_L Iz_j + alpha (A_j . I_j)]
              + sum_{i<j} b_ij (3 Iz_i Iz_j - I_i . I_j)
    with alpha = 0, 1 the electron state, matching dynamics.joint_hamiltonian.
    """
    k = len(members)
    dim = 2**k
    omega_l = params.larmor_c13

    def embed(mats: dict[int, np.ndarray]) -> np.ndarray:
        out = np.eye(1, dtype=complex)
        for pos in range(k):
            out = np.kron(out, mats.get(pos, np.eye(2, dtype=complex)))
        return out

    h0 = np.zeros((dim, dim), dtype=complex)
    h1 = np.zeros((dim, dim), dtype=complex)
    for pos, j in enumerate(members):
        hf = bath.spins[j].hyperfine
        h0 += omega_l * embed({pos: _SZ})
        h1 += omega_l * embed({pos: _SZ})
        h1 += embed({pos: hf[0] * _SX + hf[1] * _SY + hf[2] * _SZ})
    for a, b_idx in itertools.combinations(range(k), 2):
        b = bath.coupling(members[a], members[b_idx])
        if b == 0.0:
            continue
        pair = b * (
            2.0 * embed({a: _SZ, b_idx: _SZ})
            - embed({a: _SX, b_idx: _SX})
            - embed({a: _SY, b_idx: _SY})
        )
        h0 += pair
        h1 += pair
    return h0, h1


def _raw_cluster_values(
    clusters: list[Cluster],
    bath: BathConfiguration,
    params: SystemParams,
    *,
    seq: PulseSequence | None = None,
    fractions: tuple[float, ...] | None = None,
    times: np.ndarray,
) -> dict[tuple[int, ...], np.ndarray]:
    raw: dict[tuple[int, ...], np.ndarray] = {}
    for c in clusters:
        if c.order > _MAX_INTERNAL_CLUSTER:
            raise InvariantViolation(f"cluster of {c.order} spins exceeds exact limit")
        h0, h1 = cluster_hamiltonians(c.members, bath, params)
        if seq is not None:
            raw[c.members] = conditional_coherence(h0, h1, seq, times)
        else:
            raw[c.members] = conditional_coherence_scaled(h0, h1, fractions, times)
    return raw


def _combine_cumulants(
    clusters: list[Cluster],
    raw: dict[tuple[int, ...], np.ndarray],
    n_times: int,
) -> np.ndarray:
    ltilde: dict[tuple[int, ...], np.ndarray] = {}
    total = np.ones(n_times, dtype=complex)
    guarded = 0
    for c in sorted(clusters, key=lambda c: (c.order, c.members)):
        denom = np.ones(n_times, dtype=complex)
        for size in range(1, c.order):
            for sub in itertools.combinations(c.members, size):
                if sub in ltilde:
                    denom = denom * ltilde[sub]
        safe = np.abs(denom) >= DIVISION_GUARD
        lt = np.where(safe, raw[c.members] / np.where(safe, denom, 1.0), 1.0)
        guarded += int(np.count_nonzero(~safe))
        ltilde[c.members] = lt
        total = total * lt
    if guarded:
        warnings.warn(
            f"cumulant division guarded at {guarded} cluster/time points",
            CCEConvergenceWarning,
            stacklevel=3,
        )
    return total


def cluster_coherence(
    cluster: Cluster,
    bath: BathConfiguration,
    params: SystemParams,
    seq: PulseSequence,
    times,
) -> CoherenceCurve:
    """Exact coherence L_C(t) = tr[W0 rho_C W1^dag] of one small cluster."""
    if cluster.order > MAX_CLUSTER_SPINS:
        raise InvariantViolation(
            f"cluster of {cluster.order} spins exceeds the {MAX_CLUSTER_SPINS}-spin contract"
        )
    ts = _check_sample_times(times, seq.duration)
    h0, h1 = cluster_hamiltonians(cluster.members, bath, params)
    return CoherenceCurve(ts, conditional_coherence(h0, h1, seq, ts))


def cce_coherence(
    bath: BathConfiguration,
    params: SystemParams,
    seq: PulseSequence,
    times,
    max_order: int = DEFAULT_MAX_ORDER,
    pair_cutoff: float = DEFAULT_PAIR_CUTOFF,
) -> CoherenceCurve:
    """CCE coherence under one fixed pulse sequence, sampled inside it."""
    ts = _check_sample_times(times, seq.duration)
    _toggling_pulse_times(seq)  # validate pulse kinds up front
    if len(bath) == 0:
        return CoherenceCurve(ts, np.ones(ts.size, dtype=complex))
    clusters = enumerate_clusters(bath, max_order, pair_cutoff)
    raw = _raw_cluster_values(clusters, bath, params, seq=seq, times=ts)
    return CoherenceCurve(ts, _combine_cumulants(clusters, raw, ts.size))


def cce_coherence_scaled(
    bath: BathConfiguration,
    params: SystemParams,
    fractions: tuple[float, ...],
    total_times,
    max_order: int = DEFAULT_MAX_ORDER,
    pair_cutoff: float = DEFAULT_PAIR_CUTOFF,
) -> CoherenceCurve:
    """CCE coherence where each total time T runs its own sequence scaled to T.

    This matches an experiment whose x axis is the total evolution time of a
    fixed pulse pattern (pi pulses at the given fractions of T).
    """
    ts = np.asarray(total_times, dtype=float)
    if ts.ndim != 1 or ts.size == 0 or np.any(np.diff(ts) <= 0) or ts[0] < 0:
        raise InvariantViolation("total_times must be non-negative and increasing")
    if len(bath) == 0:
        return CoherenceCurve(ts, np.ones(ts.size, dtype=complex))
    clusters = enumerate_clusters(bath, max_order, pair_cutoff)
    raw = _raw_cluster_values(clusters, bath, params, fractions=tuple(fractions), times=ts)
    return CoherenceCurve(ts, _combine_cumulants(clusters, raw, ts.size))


# ---------------------------------------------------------------------------
# coherence -> two-qubit state decay
# ---------------------------------------------------------------------------

ANCILLA_DECAY_PROFILES = ("gaussian", "exponential", "none")


def apply_decay(
    rho0: DensityMatrix,
    coherence: CoherenceCurve,
    t2n_star: float,
    times,
    ancilla_profile: str = "gaussian",
) -> list[DensityMatrix]:
    """Dephase a two-qubit state by the electron coherence and ancilla decay.

    At each time the electron Ms=0 <-> Ms=1 coherence blocks are multiplied by
    L(t) (conjugate on the opposite block) and every ancilla-off-diagonal
    element by the chosen T2n* envelope (default Gaussian exp(-(t/T2n*)^2)).
    This is a Schur product with a PSD mask, hence completely positive and
    trace preserving; deterministic single-state phases are dropped with the
    rotating frame and do not affect concurrence or |L|.
    """
    if rho0.entries.shape != (4, 4):
        raise InvariantViolation("apply_decay expects the two-qubit working state")
    if ancilla_profile not in ANCILLA_DECAY_PROFILES:
        raise InvariantViolation(f"unknown ancilla decay profile {ancilla_profile!r}")
    ts = np.asarray(times, dtype=float)
    if ts.size == 0:
        return []
    if np.min(ts) < coherence.times[0] - 1e-15 or np.max(ts) > coherence.times[-1] + 1e-15:
        raise InvariantViolation("requested times outside the coherence curve")
    lre = np.interp(ts, coherence.times, coherence.values.real)
    lim = np.interp(ts, coherence.times, coherence.values.imag)
    lvals = lre + 1j * lim
    # the curve invariant allows |L| <= 1 + 1e-9; pull the excess onto the
    # unit disk so the dephasing mask stays PSD
    mags = np.abs(lvals)
    lvals = np.where(mags > 1.0, lvals / np.where(mags > 1.0, mags, 1.0), lvals)
    if ancilla_profile == "gaussian":
        g = np.exp(-((ts / t2n_star) ** 2))
    elif ancilla_profile == "exponential":
        g = np.exp(-ts / t2n_star)
    else:
        g = np.ones_like(ts)
    out = []
    for lv, gv in zip(lvals, g):
        # electron basis index 0 = Ms=1 ("1"), index 1 = Ms=0 ("0");
        # <0|rho|1> block gets L, <1|rho|0> its conjugate
        mask_e = np.array([[1.0, np.conj(lv)], [lv, 1.0]])
        mask_n = np.array([[1.0, gv], [gv, 1.0]])
        out.append(DensityMatrix(rho0.space, rho0.entries * np.kron(mask_e, mask_n)))
    return out
