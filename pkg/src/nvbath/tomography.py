"""Shot-limited state tomography: readout simulation, linear-inversion
reconstruction with projection onto physical states, and Monte Carlo
(bootstrap) error bars.

The measurement chain is abstracted to its informational content: an
informationally complete set of two-qubit observables, each estimated from
``shots`` binomial draws with a fluorescence-contrast scale factor.  The
per-element working-transition microsequence of the hardware is out of scope;
its correlated-error structure is deliberately simplified to independent
per-setting shot noise.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linops import DensityMatrix, InvariantViolation, Operator
from .metrics import concurrence
from .model import two_qubit_space

DEFAULT_SHOTS = 1_000_000
DEFAULT_CONTRAST = 0.3  # typical NV fluorescence contrast; model default, not a measured value

_PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.diag([1.0, -1.0]).astype(complex),
}


@dataclass(frozen=True)
class TomographySetting:
    """One measured observable (Hermitian, two-qubit)."""

    label: str
    observable: Operator

    def __post_init__(self):
        m = self.observable.entries
        if m.shape != (4, 4):
            raise InvariantViolation("tomography observables must be two-qubit")
        if np.max(np.abs(m - m.conj().T)) > 1e-12:
            raise InvariantViolation("tomography observables must be Hermitian")


@dataclass(frozen=True)
class TomographyRecord:
    """Per-setting expectation estimates with their shot counts."""

    labels: tuple[str, ...]
    estimates: tuple[float, ...]
    shots: tuple[int, ...]
    contrast: float
    seed: int

    def __post_init__(self):
        if not (len(self.labels) == len(self.estimates) == len(self.shots)):
            raise InvariantViolation("labels/estimates/shots lengths differ")
        if any(s <= 0 for s in self.shots):
            raise InvariantViolation("shots must be positive")
        if not all(np.isfinite(e) for e in self.estimates):
            raise InvariantViolation("non-finite estimate")
        if not (0.0 < self.contrast <= 1.0):
            raise InvariantViolation("contrast must be in (0, 1]")


def default_settings() -> list[TomographySetting]:
    """The 15 products (I,X,Y,Z) x (I,X,Y,Z) without the identity.

    Together with tr(rho) = 1 they are informationally complete.
    """
    sp = two_qubit_space()
    out = []
    for a in "IXYZ":
        for b in "IXYZ":
            if a == b == "I":
                continue
            mat = np.kron(_PAULI_1Q[a], _PAULI_1Q[b])
            out.append(
                TomographySetting(
                    label=a + b, observable=Operator(sp, mat, hermitian=True)
                )
            )
    return out


def simulate_readout(
    rho: DensityMatrix,
    settings: list[TomographySetting],
    shots: int = DEFAULT_SHOTS,
    contrast: float = DEFAULT_CONTRAST,
    seed: int = 0,
) -> TomographyRecord:
    """Binomial shot noise around contrast-scaled expectations.

    Each setting's bright-state probability is p = (1 + contrast tr(rho O))/2;
    the estimate inverts the scaling: (2 k/shots - 1)/contrast.
    """
    if shots < 1:
        raise InvariantViolation("shots must be >= 1")
    if contrast == 0:
        raise InvariantViolation("contrast must be nonzero")
    rng = np.random.default_rng(seed)
    labels, estimates, shot_list = [], [], []
    for s in settings:
        expectation = float(np.trace(rho.entries @ s.observable.entries).real)
        p = (1.0 + contrast * expectation) / 2.0
        p = min(1.0, max(0.0, p))
        k = rng.binomial(shots, p)
        estimates.append((2.0 * k / shots - 1.0) / contrast)
        labels.append(s.label)
        shot_list.append(shots)
    return TomographyRecord(
        labels=tuple(labels),
        estimates=tuple(estimates),
        shots=tuple(shot_list),
        contrast=contrast,
        seed=seed,
    )


def _traceless_basis() -> np.ndarray:
    out = []
    for a in "IXYZ":
        for b in "IXYZ":
            if a == b == "I":
                continue
            out.append(np.kron(_PAULI_1Q[a], _PAULI_1Q[b]))
    return np.stack(out)


_BASIS = _traceless_basis()  # (15, 4, 4) traceless Pauli products


def project_to_physical(hermitian: np.ndarray) -> np.ndarray:
    """Frobenius-nearest unit-trace PSD matrix to a Hermitian input.

    Eigenvalues are projected onto the probability simplex (uniform level
    shift, clip at zero: the water-filling adjustment); eigenvectors are kept.
    Ties break deterministically by eigenvalue order.
    """
    evals, vecs = np.linalg.eigh(hermitian)
    mu = evals[::-1]  # descending
    cumsum = np.cumsum(mu)
    ks = np.arange(1, mu.size + 1)
    feasible = mu - (cumsum - 1.0) / ks > 0
    k = int(np.nonzero(feasible)[0][-1]) + 1
    theta = (cumsum[k - 1] - 1.0) / k
    lam = np.clip(mu - theta, 0.0, None)[::-1]  # back to ascending
    return (vecs * lam) @ vecs.conj().T


def reconstruct(
    record: TomographyRecord, settings: list[TomographySetting]
) -> DensityMatrix:
    """Linear inversion through the settings' dual frame, then projection.

    rho is parametrized as I/4 + sum_k x_k P_k over the 15 traceless Pauli
    products (the unit trace is built in); the settings must determine every
    x_k or the inversion is rejected as rank deficient.
    """
    if len(record.labels) != len(settings) or any(
        rl != s.label for rl, s in zip(record.labels, settings)
    ):
        raise InvariantViolation("record and settings are not aligned")
    obs = np.stack([s.observable.entries for s in settings])
    m = np.einsum("sij,kji->sk", obs, _BASIS).real
    b = np.asarray(record.estimates) - np.trace(obs, axis1=1, axis2=2).real / 4.0
    x, _, rank, _ = np.linalg.lstsq(m, b, rcond=None)
    if rank < _BASIS.shape[0]:
        raise InvariantViolation("rank-deficient setting set (not informationally complete)")
    rho_lin = np.eye(4, dtype=complex) / 4.0 + np.einsum("k,kij->ij", x, _BASIS)
    rho_lin = (rho_lin + rho_lin.conj().T) / 2.0
    return DensityMatrix(two_qubit_space(), project_to_physical(rho_lin))


@dataclass(frozen=True)
class BootstrapErrors:
    """Element-wise and concurrence standard deviations over resamples."""

    element_sigma_real: np.ndarray  # 4x4
    element_sigma_imag: np.ndarray  # 4x4
    concurrence_sigma: float
    n_resamples: int

    def __post_init__(self):
        for name in ("element_sigma_real", "element_sigma_imag"):
            arr = np.array(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)


def _resampled_record(record: TomographyRecord, rng: np.random.Generator) -> TomographyRecord:
    shots = np.asarray(record.shots)
    p = np.clip((1.0 + record.contrast * np.asarray(record.estimates)) / 2.0, 0.0, 1.0)
    k = rng.binomial(shots, p)
    estimates = tuple((2.0 * k / shots - 1.0) / record.contrast)
    return TomographyRecord(
        labels=record.labels,
        estimates=tuple(estimates),
        shots=record.shots,
        contrast=record.contrast,
        seed=record.seed,
    )


def bootstrap_errors(
    record: TomographyRecord,
    settings: list[TomographySetting],
    n_resamples: int = 200,
    seed: int = 0,
) -> BootstrapErrors:
    """Parametric bootstrap: re-draw each setting's counts binomially around
    its estimate, reconstruct every resample, report standard deviations.

    Each resample r uses the deterministic sub-seed (seed, r), so results do
    not depend on evaluation order and resamples may run concurrently.
    """
    if n_resamples < 100:
        raise InvariantViolation("n_resamples must be >= 100")
    entries = np.empty((n_resamples, 4, 4), dtype=complex)
    concs = np.empty(n_resamples)
    for r in range(n_resamples):
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(r,)))
        rho = reconstruct(_resampled_record(record, rng), settings)
        entries[r] = rho.entries
        concs[r] = concurrence(rho)
    return BootstrapErrors(
        element_sigma_real=entries.real.std(axis=0, ddof=1),
        element_sigma_imag=entries.imag.std(axis=0, ddof=1),
        concurrence_sigma=float(concs.std(ddof=1)),
        n_resamples=n_resamples,
    )
