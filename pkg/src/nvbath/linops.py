"""Dense complex linear-operator primitives over labeled tensor-product spaces.

Everything downstream (Hamiltonians, propagators, states) is built from the
three value types defined here.  All values are immutable after construction
and every operation is a pure function, so they are safe to share between
concurrent workers without coordination.

Units convention: Hamiltonian entries are in Hz and the free-evolution
propagator is exp(-i 2*pi H t) with t in seconds (the 2*pi lives in the
propagator, not in the Hamiltonian).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Centralized numerical tolerances.
HERMITICITY_TOL = 1e-12
UNITARITY_TOL = 1e-10
TRACE_TOL = 1e-10
PSD_TOL = 1e-10


class InvariantViolation(Exception):
    """A constructed value failed one of its numerical invariants."""


def _frozen(a: np.ndarray) -> np.ndarray:
    out = np.array(a, dtype=complex)
    out.flags.writeable = False
    return out


@dataclass(frozen=True)
class SpaceLabel:
    """Ordered list of named subsystems; list order is tensor order."""

    subsystems: tuple[tuple[str, int], ...]

    def __post_init__(self):
        subs = tuple((str(n), int(d)) for n, d in self.subsystems)
        object.__setattr__(self, "subsystems", subs)
        names = [n for n, _ in subs]
        if len(set(names)) != len(names):
            raise InvariantViolation(f"duplicate subsystem names in {names}")
        if any(d <= 0 for _, d in subs):
            raise InvariantViolation("subsystem dimensions must be positive")

    @property
    def dim(self) -> int:
        out = 1
        for _, d in self.subsystems:
            out *= d
        return out

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.subsystems)

    @property
    def dims(self) -> tuple[int, ...]:
        return tuple(d for _, d in self.subsystems)

    def axis(self, name: str) -> int:
        try:
            return self.names.index(name)
        except ValueError:
            raise KeyError(f"unknown subsystem {name!r} (have {self.names})") from None

    def dimension_of(self, name: str) -> int:
        return self.dims[self.axis(name)]


def space(*subsystems: tuple[str, int]) -> SpaceLabel:
    """Convenience constructor: space(("electron", 2), ("ancilla", 2))."""
    return SpaceLabel(tuple(subsystems))


@dataclass(frozen=True)
class Operator:
    """Square complex matrix attached to a SpaceLabel.

    ``hermitian``/``unitary`` flags are promises checked at construction
    (max |A - A^dag| <= 1e-12, max |U U^dag - 1| <= 1e-10).
    """

    space: SpaceLabel
    entries: np.ndarray
    hermitian: bool = False
    unitary: bool = False

    def __post_init__(self):
        m = _frozen(self.entries)
        object.__setattr__(self, "entries", m)
        d = self.space.dim
        if m.shape != (d, d):
            raise InvariantViolation(f"entries shape {m.shape} != space dim {d}")
        if self.hermitian:
            dev = np.max(np.abs(m - m.conj().T))
            if dev > HERMITICITY_TOL:
                raise InvariantViolation(f"hermiticity violated by {dev:.3e}")
        if self.unitary:
            dev = np.max(np.abs(m @ m.conj().T - np.eye(d)))
            if dev > UNITARITY_TOL:
                raise InvariantViolation(f"unitarity violated by {dev:.3e}")


@dataclass(frozen=True)
class DensityMatrix:
    """Validated quantum state: Hermitian, unit trace, positive semidefinite."""

    space: SpaceLabel
    entries: np.ndarray
    #: smallest eigenvalue found at validation time (diagnostic)
    min_eigenvalue: float = field(init=False, compare=False, default=0.0)

    def __post_init__(self):
        m = _frozen(self.entries)
        object.__setattr__(self, "entries", m)
        d = self.space.dim
        if m.shape != (d, d):
            raise InvariantViolation(f"entries shape {m.shape} != space dim {d}")
        herm_dev = np.max(np.abs(m - m.conj().T))
        if herm_dev > HERMITICITY_TOL:
            raise InvariantViolation(f"state not Hermitian: deviation {herm_dev:.3e}")
        tr = m.trace()
        if abs(tr - 1.0) > TRACE_TOL:
            raise InvariantViolation(f"state trace {tr} != 1")
        lo = float(np.linalg.eigvalsh(m)[0])
        if lo < -PSD_TOL:
            raise InvariantViolation(f"state not PSD: min eigenvalue {lo:.3e}")
        object.__setattr__(self, "min_eigenvalue", lo)


def pure_state(space_: SpaceLabel, ket: np.ndarray) -> DensityMatrix:
    """|psi><psi| from a (normalized or unnormalized, nonzero) ket."""
    v = np.asarray(ket, dtype=complex).reshape(-1)
    if v.shape[0] != space_.dim:
        raise InvariantViolation("ket length does not match space dimension")
    norm = np.linalg.norm(v)
    if norm == 0:
        raise InvariantViolation("zero ket")
    v = v / norm
    return DensityMatrix(space_, np.outer(v, v.conj()))


def identity(space_: SpaceLabel) -> Operator:
    return Operator(space_, np.eye(space_.dim), hermitian=True, unitary=True)


def maximally_mixed(space_: SpaceLabel) -> DensityMatrix:
    d = space_.dim
    return DensityMatrix(space_, np.eye(d) / d)


def spin_operators(spin: float, name: str = "spin") -> tuple[Operator, Operator, Operator]:
    """Angular-momentum matrices (Sx, Sy, Sz) for spin 1/2 or 1.

    Basis ordering is descending magnetic quantum number (m = s, s-1, ..., -s),
    so Sz = diag(1/2, -1/2) for spin 1/2 and diag(1, 0, -1) for spin 1.
    Satisfy [Sx, Sy] = i Sz and cyclic permutations.
    """
    if spin not in (0.5, 1, 1.0):
        raise ValueError(f"unsupported spin {spin}; expected 1/2 or 1")
    s = float(spin)
    dim = int(round(2 * s + 1))
    m = s - np.arange(dim)  # descending
    sz = np.diag(m).astype(complex)
    # <m+1| S+ |m> = sqrt(s(s+1) - m(m+1)); with descending basis the raising
    # operator sits on the superdiagonal.
    sp = np.zeros((dim, dim), dtype=complex)
    for col in range(1, dim):
        mm = m[col]
        sp[col - 1, col] = np.sqrt(s * (s + 1) - mm * (mm + 1))
    sm = sp.conj().T
    sx = (sp + sm) / 2
    sy = (sp - sm) / 2j
    sp_label = space((name, dim))
    return (
        Operator(sp_label, sx, hermitian=True),
        Operator(sp_label, sy, hermitian=True),
        Operator(sp_label, sz, hermitian=True),
    )


def kron(a: Operator, b: Operator) -> Operator:
    """Tensor product; the result space is the concatenation of both spaces."""
    common = set(a.space.names) & set(b.space.names)
    if common:
        raise InvariantViolation(f"subsystem name collision: {sorted(common)}")
    sp = SpaceLabel(a.space.subsystems + b.space.subsystems)
    return Operator(
        sp,
        np.kron(a.entries, b.entries),
        hermitian=a.hermitian and b.hermitian,
        unitary=a.unitary and b.unitary,
    )


def _check_hermitian(h: Operator, who: str) -> np.ndarray:
    m = h.entries
    dev = np.max(np.abs(m - m.conj().T))
    if dev > HERMITICITY_TOL and not h.hermitian:
        raise InvariantViolation(f"{who} requires a Hermitian operator (deviation {dev:.3e})")
    return m


def expm_hermitian(h: Operator, t: float) -> Operator:
    """Propagator exp(-i 2*pi h t) for a Hermitian h in Hz, t in seconds.

    Computed by eigendecomposition; the result carries the unitary flag and is
    re-validated against the 1e-10 unitarity tolerance.
    """
    m = _check_hermitian(h, "expm_hermitian")
    evals, vecs = np.linalg.eigh(m)
    phases = np.exp(-2j * np.pi * evals * t)
    u = (vecs * phases) @ vecs.conj().T
    return Operator(h.space, u, unitary=True)


def eig_hermitian(h: Operator) -> tuple[np.ndarray, Operator]:
    """Eigenvalues (real, descending) and eigenvector columns of a Hermitian operator."""
    m = _check_hermitian(h, "eig_hermitian")
    evals, vecs = np.linalg.eigh(m)  # ascending
    order = np.argsort(evals)[::-1]
    return evals[order].copy(), Operator(h.space, vecs[:, order], unitary=True)


def partial_trace(rho: DensityMatrix, keep: list[str] | tuple[str, ...]) -> DensityMatrix:
    """Reduce a state to the named subsystems (kept in their original order)."""
    entries = partial_trace_matrix(rho.entries, rho.space, keep)
    keep_set = set(keep)
    sub = tuple(s for s in rho.space.subsystems if s[0] in keep_set)
    return DensityMatrix(SpaceLabel(sub), entries)


def partial_trace_matrix(
    m: np.ndarray, space_: SpaceLabel, keep: list[str] | tuple[str, ...]
) -> np.ndarray:
    """partial_trace on a raw matrix (no state validation of input or output)."""
    if len(keep) == 0:
        raise InvariantViolation("keep must name at least one subsystem")
    axes_keep = sorted(space_.axis(name) for name in keep)  # validates names
    n = len(space_.subsystems)
    dims = space_.dims
    t = np.asarray(m).reshape(dims + dims)
    # einsum with one (row, col) letter pair per kept subsystem and a single
    # repeated letter per traced subsystem.
    letters = "abcdefghijklmnopqrstuvwxyzABCDEFGHIJKLMNOPQRSTUVWXYZ"
    it = iter(letters)
    row, col, out_row, out_col = [], [], [], []
    for ax in range(n):
        if ax in axes_keep:
            r, c = next(it), next(it)
            row.append(r)
            col.append(c)
            out_row.append(r)
            out_col.append(c)
        else:
            s = next(it)
            row.append(s)
            col.append(s)
    subscript = "".join(row + col) + "->" + "".join(out_row + out_col)
    reduced = np.einsum(subscript, t)
    d_keep = 1
    for ax in axes_keep:
        d_keep *= dims[ax]
    return np.ascontiguousarray(reduced.reshape(d_keep, d_keep))
