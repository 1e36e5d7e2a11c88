"""Entanglement and non-Markovianity measures.

``concurrence`` is the two-qubit Wootters measure.  ``fidelity`` is the linear
state overlap tr(sigma rho), NOT the Uhlmann fidelity; the two differ for
pairs of mixed states, and the linear form is used deliberately because that
is how the experiment's figure of merit is defined.

``non_markovianity`` quantifies information backflow in an entanglement
trajectory E(t) on a window [t0, tmax] as the excess of the total variation
over the net decrease:

    measure = integral |dE/dt| dt - (E(t0) - E(tmax))

evaluated piecewise-linearly on the samples.  The measure is computed as
2 * sum(positive increments), which is algebraically identical and exactly
zero (in floating point too) for monotone non-increasing data.  It is
positive exactly when the sampled series revives.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linops import DensityMatrix, InvariantViolation

_SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]])
_YY = np.kron(_SIGMA_Y, _SIGMA_Y)

#: eigenvalues of rho * rho_tilde more negative than this indicate a broken state
CONCURRENCE_EIG_FLOOR = -1e-10


def concurrence(rho: DensityMatrix) -> float:
    """Wootters concurrence C = max(0, l1 - l2 - l3 - l4) of a two-qubit state.

    The l_i are the descending square roots of the eigenvalues of
    rho * (sy x sy) rho^* (sy x sy); small negative eigenvalues down to
    -1e-10 (numerical PSD jitter) are clipped to zero before the square root.
    """
    m = rho.entries
    if m.shape != (4, 4):
        raise InvariantViolation("concurrence requires a two-qubit (4x4) state")
    rho_tilde = _YY @ m.conj() @ _YY
    ev = np.linalg.eigvals(m @ rho_tilde).real
    if ev.min() < CONCURRENCE_EIG_FLOOR:
        raise InvariantViolation(f"rho*rho_tilde eigenvalue {ev.min():.3e} below floor")
    lam = np.sqrt(np.clip(ev, 0.0, None))
    lam[::-1].sort()
    return float(max(0.0, lam[0] - lam[1] - lam[2] - lam[3]))


def fidelity(rho: DensityMatrix, sigma: DensityMatrix) -> float:
    """Linear overlap F = tr(sigma rho); the standard overlap when sigma is pure."""
    if rho.space.subsystems != sigma.space.subsystems:
        raise InvariantViolation("fidelity requires states on the same space")
    val = np.trace(sigma.entries @ rho.entries)
    if abs(val.imag) > 1e-12:
        raise InvariantViolation(f"fidelity has imaginary residue {val.imag:.3e}")
    return float(val.real)


def purity(rho: DensityMatrix) -> float:
    """tr(rho^2), in (0, 1]."""
    return float(np.trace(rho.entries @ rho.entries).real)


@dataclass(frozen=True)
class TimeSeries:
    """Real samples on a strictly increasing time grid (seconds)."""

    times: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        t = np.array(self.times, dtype=float)
        v = np.array(self.values, dtype=float)
        t.flags.writeable = False
        v.flags.writeable = False
        object.__setattr__(self, "times", t)
        object.__setattr__(self, "values", v)
        if t.ndim != 1 or t.shape != v.shape or t.size < 2:
            raise InvariantViolation("need matching 1-d arrays with >= 2 samples")
        if not np.all(np.diff(t) > 0):
            raise InvariantViolation("times must be strictly increasing")
        if not (np.all(np.isfinite(t)) and np.all(np.isfinite(v))):
            raise InvariantViolation("non-finite entries in time series")


@dataclass(frozen=True)
class Revival:
    """One maximal rising stretch: minimum at ``start``, peak at ``peak_time``."""

    start: float
    peak_time: float
    height: float


@dataclass(frozen=True)
class NonMarkovReport:
    measure: float          # the non-Markovianity (>= 0)
    total_variation: float
    delta_e: float          # E(t0) - E(tmax)
    revivals: tuple[Revival, ...]

    def __post_init__(self):
        if self.measure < -1e-12:
            raise InvariantViolation("negative non-Markovianity measure")
        if abs(self.measure - (self.total_variation - self.delta_e)) > 1e-12:
            raise InvariantViolation("measure != total_variation - delta_e")


def total_variation(ts: TimeSeries) -> float:
    """Sum of |v_{k+1} - v_k|: the piecewise-linear integral of |dE/dt|."""
    return float(np.sum(np.abs(np.diff(ts.values))))


def _restrict(ts: TimeSeries, t0: float, tmax: float) -> tuple[np.ndarray, np.ndarray]:
    if not (t0 < tmax):
        raise InvariantViolation("need t0 < tmax")
    if t0 < ts.times[0] - 1e-15 or tmax > ts.times[-1] + 1e-15:
        raise InvariantViolation("window [t0, tmax] outside the sampled range")
    inside = (ts.times > t0) & (ts.times < tmax)
    t = np.concatenate(([t0], ts.times[inside], [tmax]))
    v = np.concatenate(
        (
            [np.interp(t0, ts.times, ts.values)],
            ts.values[inside],
            [np.interp(tmax, ts.times, ts.values)],
        )
    )
    return t, v


def _find_revivals(t: np.ndarray, v: np.ndarray) -> tuple[Revival, ...]:
    # maximal strictly-increasing runs; the run start is by construction a
    # local minimum (or the window edge, which counts as one)
    out = []
    k = 0
    n = v.size
    while k < n - 1:
        if v[k + 1] > v[k]:
            start = k
            while k < n - 1 and v[k + 1] > v[k]:
                k += 1
            out.append(
                Revival(
                    start=float(t[start]),
                    peak_time=float(t[k]),
                    height=float(v[k] - v[start]),
                )
            )
        else:
            k += 1
    return tuple(out)


def non_markovianity(ts: TimeSeries, t0: float, tmax: float) -> NonMarkovReport:
    """Backflow measure of the series restricted to [t0, tmax].

    Endpoint values are obtained by linear interpolation.  The measure is
    exactly zero iff the restricted sample sequence is non-increasing.
    """
    t, v = _restrict(ts, t0, tmax)
    d = np.diff(v)
    measure = float(2.0 * np.sum(d[d > 0]))
    tv = float(np.sum(np.abs(d)))
    delta_e = float(v[0] - v[-1])
    return NonMarkovReport(
        measure=measure,
        total_variation=tv,
        delta_e=delta_e,
        revivals=_find_revivals(t, v),
    )
