"""Physical model: central-spin Hamiltonians, the working two-qubit subspace,
and random 13C bath configurations on the diamond lattice.

Units: energies/couplings in Hz, magnetic field in Gauss, gyromagnetic ratios
in Hz/Gauss, distances in Angstrom, times in seconds.

Geometry: the vacancy sits at the origin on a carbon site, the nitrogen on one
nearest-neighbour site, and the N-V bond direction ([111] of the conventional
cube) is the z axis.  All hyperfine/dipolar angles are measured from that axis.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .linops import (
    DensityMatrix,
    InvariantViolation,
    Operator,
    SpaceLabel,
    kron,
    pure_state,
    space,
    spin_operators,
)

# SI constants
PLANCK = 6.62607015e-34  # J s (exact)
MU0_OVER_4PI = 1e-7      # T m / A

# Default system constants (Hz, Hz/Gauss, Gauss, s)
ZERO_FIELD_SPLITTING = 2.87e9
GAMMA_E = 2.802e6
GAMMA_C = 1.071e3
B_FIELD = 60.0
T2N_STAR = 56e-6
C13_ABUNDANCE = 0.011

# Diamond conventional cell constant, Angstrom.
LATTICE_CONSTANT = 3.567

# Placeholder ancilla hyperfine tensor (Hz): axially symmetric about the NV
# axis at the ~130 MHz scale typical of a first-shell 13C.  These numbers are
# a stand-in, not a literature tensor; override via SystemParams for a
# specific center.
ANCILLA_HYPERFINE_DEFAULT = np.diag([0.0, 0.0, 130e6])

# Placeholder 14N coupling (Hz), used only when the optional spectator spin is
# enabled; same stand-in status as above.
N14_A_PARALLEL_DEFAULT = 2.16e6

DEFAULT_R_MIN = 2.0   # Angstrom; removes first-shell sites (those are the ancilla)
DEFAULT_R_MAX = 30.0  # Angstrom; ~220 spins at natural abundance

_SITE_EPS = 1e-6  # Angstrom; tolerance for identifying the vacancy/N sites


@dataclass(frozen=True)
class N14Params:
    """Optional spectator nitrogen nuclear spin (spin 1).

    Only the secular a_parallel * Sz Iz coupling enters the dynamics;
    a_perp is carried for completeness but unused in this model.
    """

    a_parallel: float = N14_A_PARALLEL_DEFAULT
    a_perp: float = 0.0


@dataclass(frozen=True)
class SystemParams:
    """Central-system parameters; defaults reproduce the experiment settings."""

    zero_field_splitting: float = ZERO_FIELD_SPLITTING  # Hz
    gamma_e: float = GAMMA_E    # Hz/Gauss
    gamma_c: float = GAMMA_C    # Hz/Gauss
    b_field: float = B_FIELD    # Gauss, along the NV axis
    ancilla_hyperfine: np.ndarray = field(
        default_factory=lambda: ANCILLA_HYPERFINE_DEFAULT.copy()
    )  # 3x3 real, Hz
    t2n_star: float = T2N_STAR  # s
    n14: N14Params | None = None

    def __post_init__(self):
        a = np.array(self.ancilla_hyperfine, dtype=float)
        a.flags.writeable = False
        object.__setattr__(self, "ancilla_hyperfine", a)
        if self.zero_field_splitting <= 0:
            raise InvariantViolation("zero_field_splitting must be > 0")
        if self.b_field < 0:
            raise InvariantViolation("b_field must be >= 0")
        if self.t2n_star <= 0:
            raise InvariantViolation("t2n_star must be > 0")
        if a.shape != (3, 3) or not np.all(np.isfinite(a)):
            raise InvariantViolation("ancilla_hyperfine must be a finite real 3x3 tensor")

    @property
    def larmor_c13(self) -> float:
        """13C Larmor frequency gamma_c * B in Hz."""
        return self.gamma_c * self.b_field


# ---------------------------------------------------------------------------
# Working two-qubit space and basis labels
# ---------------------------------------------------------------------------
#
# Basis ordering is descending magnetic quantum number within each subsystem.
# Electron (restricted to Ms in {0, +1}): index 0 = Ms=+1 (label "1"),
# index 1 = Ms=0 (label "0").  Ancilla 13C: index 0 = MI=+1/2 (label "1"),
# index 1 = MI=-1/2 (label "0").  So |01> = |Ms=0, MI=+1/2>.

ELECTRON = "electron"
ANCILLA = "ancilla"
N14 = "n14"

_LABEL_TO_INDEX = {"1": 0, "0": 1}


def two_qubit_space() -> SpaceLabel:
    return space((ELECTRON, 2), (ANCILLA, 2))


def basis_index(label: str) -> int:
    """Flat index of a two-qubit basis label like "01" (electron digit first)."""
    if len(label) != 2 or any(c not in _LABEL_TO_INDEX for c in label):
        raise ValueError(f"bad basis label {label!r}")
    return 2 * _LABEL_TO_INDEX[label[0]] + _LABEL_TO_INDEX[label[1]]


def basis_ket(label: str) -> np.ndarray:
    v = np.zeros(4, dtype=complex)
    v[basis_index(label)] = 1.0
    return v


def bell_phi_minus() -> DensityMatrix:
    """The target Bell state (|00> - |11>)/sqrt(2) on the working space."""
    return pure_state(two_qubit_space(), (basis_ket("00") - basis_ket("11")) / math.sqrt(2))


# ---------------------------------------------------------------------------
# Hamiltonians
# ---------------------------------------------------------------------------

def build_central_hamiltonian(
    params: SystemParams,
    include_ancilla: bool = True,
    include_n14: bool = False,
) -> Operator:
    """Lab-frame Hamiltonian of the central system, in Hz.

    H = gamma_e B Sz + D Sz^2 + S.A.I + gamma_c B Iz  on the spin-1 electron
    (tensor the spin-1/2 ancilla when included), plus the optional secular
    a_parallel Sz Iz coupling to a spin-1 14N spectator.
    """
    ex, ey, ez = spin_operators(1, ELECTRON)
    subsystems = [(ELECTRON, 3)]
    if include_ancilla:
        subsystems.append((ANCILLA, 2))
    if include_n14:
        if params.n14 is None:
            raise InvariantViolation("include_n14 requires params.n14")
        subsystems.append((N14, 3))
    sp = SpaceLabel(tuple(subsystems))
    dim = sp.dim

    def embed(op: Operator) -> np.ndarray:
        out = op
        for name, d in subsystems:
            if name in out.space.names:
                continue
            eye = Operator(space((name, d)), np.eye(d), hermitian=True)
            out = kron(out, eye)
        # subsystems were appended in order, so the space order already matches
        return out.entries

    h = params.gamma_e * params.b_field * embed(ez)
    h = h + params.zero_field_splitting * embed(
        Operator(ez.space, ez.entries @ ez.entries, hermitian=True)
    )
    if include_ancilla:
        ix, iy, iz = spin_operators(0.5, ANCILLA)
        a = params.ancilla_hyperfine
        es = (ex, ey, ez)
        ns = (ix, iy, iz)
        for i in range(3):
            for j in range(3):
                if a[i, j] != 0.0:
                    h = h + a[i, j] * embed(kron(es[i], ns[j]))
        h = h + params.gamma_c * params.b_field * embed(iz)
    if include_n14:
        nx, ny, nz = spin_operators(1, N14)
        h = h + params.n14.a_parallel * embed(kron(ez, nz))
    assert h.shape == (dim, dim)
    return Operator(sp, h, hermitian=True)


def project_two_level(h: Operator) -> Operator:
    """Restrict the spin-1 electron to span{Ms=+1, Ms=0} (basis indices 0, 1).

    Works on operators over any space containing a dim-3 "electron" subsystem;
    the other subsystems are untouched.
    """
    try:
        ax = h.space.axis(ELECTRON)
    except KeyError:
        raise InvariantViolation("operator space has no electron subsystem") from None
    if h.space.dims[ax] != 3:
        raise InvariantViolation("electron subsystem is not spin-1 (dim 3)")
    dims = h.space.dims
    n = len(dims)
    t = h.entries.reshape(dims + dims)
    sl = [slice(None)] * (2 * n)
    sl[ax] = slice(0, 2)
    sl[ax + n] = slice(0, 2)
    t = t[tuple(sl)]
    new_subs = list(h.space.subsystems)
    new_subs[ax] = (ELECTRON, 2)
    sp = SpaceLabel(tuple(new_subs))
    return Operator(sp, t.reshape(sp.dim, sp.dim), hermitian=h.hermitian)


# ---------------------------------------------------------------------------
# Dipolar couplings
# ---------------------------------------------------------------------------

def _dipolar_prefactor(gamma1: float, gamma2: float) -> float:
    """(mu0/4pi) h gamma1 gamma2 in Hz Angstrom^3 for gammas in Hz/Gauss."""
    return MU0_OVER_4PI * PLANCK * (gamma1 * 1e4) * (gamma2 * 1e4) * 1e30


def hyperfine_prefactor(params: SystemParams) -> float:
    """Electron-13C point-dipole prefactor, Hz Angstrom^3."""
    return _dipolar_prefactor(params.gamma_e, params.gamma_c)


def nuclear_prefactor(params: SystemParams) -> float:
    """13C-13C secular dipolar prefactor (mu0/4pi) h gamma_c^2 / 2, Hz Angstrom^3.

    The 1/2 makes b_ij the coefficient of the standard secular pair form
    H = b_ij (3 Iz Iz - I.I); on-axis nearest neighbours then come out at the
    textbook ~1 kHz scale.
    """
    return _dipolar_prefactor(params.gamma_c, params.gamma_c) / 2


def dipolar_hyperfine(position: np.ndarray, params: SystemParams) -> np.ndarray:
    """Secular point-dipole hyperfine components (A_zx, A_zy, A_zz) in Hz.

    A_z_alpha = prefactor * (delta_z_alpha - 3 (z.rhat) rhat_alpha) / r^3,
    position in Angstrom relative to the NV site, NV axis = z.
    """
    p = np.asarray(position, dtype=float)
    r = np.linalg.norm(p)
    if r == 0:
        raise InvariantViolation("zero-length position")
    rhat = p / r
    pref = hyperfine_prefactor(params) / r**3
    delta_z = np.array([0.0, 0.0, 1.0])
    return pref * (delta_z - 3.0 * rhat[2] * rhat)


def nuclear_dipolar(p_i: np.ndarray, p_j: np.ndarray, params: SystemParams) -> float:
    """Secular homonuclear dipolar coefficient b_ij = pref_cc (1 - 3 cos^2 theta)/r^3.

    theta is the angle between the internuclear vector and the NV axis (z).
    """
    d = np.asarray(p_j, dtype=float) - np.asarray(p_i, dtype=float)
    r = np.linalg.norm(d)
    if r == 0:
        raise InvariantViolation("coincident nuclear positions")
    cos_t = d[2] / r
    return nuclear_prefactor(params) * (1.0 - 3.0 * cos_t**2) / r**3


# ---------------------------------------------------------------------------
# Diamond lattice and bath sampling
# ---------------------------------------------------------------------------

def _nv_frame_rotation() -> np.ndarray:
    """Rows are the NV-frame axes expressed in cube coordinates ([111] -> z)."""
    z = np.array([1.0, 1.0, 1.0]) / math.sqrt(3.0)
    x = np.array([1.0, -1.0, 0.0]) / math.sqrt(2.0)
    y = np.cross(z, x)
    return np.vstack([x, y, z])


def enumerate_lattice_sites(r_min: float, r_max: float) -> np.ndarray:
    """Carbon sites of the diamond lattice with r_min <= |r| <= r_max (NV frame).

    Excludes the vacancy site (origin) and the nitrogen site on the +z
    nearest-neighbour position.  Deterministic ordering: sorted by (|r|, x, y, z).
    """
    if not (0 < r_min < r_max):
        raise InvariantViolation("need 0 < r_min < r_max")
    a = LATTICE_CONSTANT
    prim = (a / 2.0) * np.array([[0, 1, 1], [1, 0, 1], [1, 1, 0]], dtype=float)
    basis = np.array([[0, 0, 0], [a / 4, a / 4, a / 4]])
    m = int(math.ceil(r_max / (a / 2.0))) + 2
    rng_idx = np.arange(-m, m + 1)
    n1, n2, n3 = np.meshgrid(rng_idx, rng_idx, rng_idx, indexing="ij")
    cells = np.stack([n1.ravel(), n2.ravel(), n3.ravel()], axis=1).astype(float) @ prim
    sites = np.concatenate([cells + basis[0], cells + basis[1]], axis=0)
    rot = _nv_frame_rotation()
    sites = sites @ rot.T
    r = np.linalg.norm(sites, axis=1)
    n_site = np.array([0.0, 0.0, a * math.sqrt(3.0) / 4.0])
    keep = (r >= r_min) & (r <= r_max) & (r > _SITE_EPS)
    keep &= np.linalg.norm(sites - n_site, axis=1) > _SITE_EPS
    sites = sites[keep]
    r = r[keep]
    order = np.lexsort((sites[:, 2], sites[:, 1], sites[:, 0], np.round(r, 9)))
    return sites[order]


@dataclass(frozen=True)
class BathSpin:
    """One 13C bath nucleus: position (Angstrom, NV frame) and secular hyperfine."""

    position: np.ndarray            # shape (3,), Angstrom
    hyperfine: np.ndarray           # (A_zx, A_zy, A_zz), Hz
    species: str = "13C"

    def __post_init__(self):
        p = np.array(self.position, dtype=float)
        hf = np.array(self.hyperfine, dtype=float)
        p.flags.writeable = False
        hf.flags.writeable = False
        object.__setattr__(self, "position", p)
        object.__setattr__(self, "hyperfine", hf)
        if not np.all(np.isfinite(hf)):
            raise InvariantViolation("non-finite hyperfine vector")


@dataclass(frozen=True)
class BathConfiguration:
    """Sampled bath: spins, pairwise secular dipolar couplings and provenance."""

    spins: tuple[BathSpin, ...]
    pair_couplings: dict[tuple[int, int], float]  # keys i < j, Hz
    seed: int
    abundance: float
    r_min: float
    r_max: float

    def __post_init__(self):
        for (i, j) in self.pair_couplings:
            if not (0 <= i < j < len(self.spins)):
                raise InvariantViolation(f"bad pair key ({i}, {j})")
        for s in self.spins:
            r = float(np.linalg.norm(s.position))
            if r < self.r_min - 1e-9 or r > self.r_max + 1e-9:
                raise InvariantViolation("bath spin outside [r_min, r_max]")

    def __len__(self) -> int:
        return len(self.spins)

    def coupling(self, i: int, j: int) -> float:
        if i == j:
            raise KeyError("no self coupling")
        key = (i, j) if i < j else (j, i)
        return self.pair_couplings[key]


def _pairwise_couplings(
    positions: np.ndarray, params: SystemParams
) -> dict[tuple[int, int], float]:
    """All i<j secular dipolar couplings, vectorized (agrees with nuclear_dipolar)."""
    n = positions.shape[0]
    if n < 2:
        return {}
    diff = positions[None, :, :] - positions[:, None, :]
    r = np.linalg.norm(diff, axis=2)
    iu, ju = np.triu_indices(n, k=1)
    rr = r[iu, ju]
    cos_t = diff[iu, ju, 2] / rr
    b = nuclear_prefactor(params) * (1.0 - 3.0 * cos_t**2) / rr**3
    return {(int(i), int(j)): float(v) for i, j, v in zip(iu, ju, b)}


def sample_bath(
    seed: int,
    abundance: float = C13_ABUNDANCE,
    r_min: float = DEFAULT_R_MIN,
    r_max: float = DEFAULT_R_MAX,
    params: SystemParams | None = None,
) -> BathConfiguration:
    """Occupy each lattice site independently with probability ``abundance``.

    Deterministic for a given (seed, abundance, r_min, r_max) window.  The
    spec-level precondition 0 < abundance < 1 is relaxed to the closed
    interval: 0 gives an empty bath, 1 the fully occupied neighbourhood.
    """
    if not (0.0 <= abundance <= 1.0):
        raise InvariantViolation("abundance must be in [0, 1]")
    if params is None:
        params = SystemParams()
    sites = enumerate_lattice_sites(r_min, r_max)
    if sites.shape[0] == 0:
        raise InvariantViolation("empty lattice window")
    rng = np.random.default_rng(seed)
    occupied = sites[rng.random(sites.shape[0]) < abundance]
    spins = tuple(
        BathSpin(position=pos, hyperfine=dipolar_hyperfine(pos, params))
        for pos in occupied
    )
    couplings = _pairwise_couplings(occupied, params)
    return BathConfiguration(
        spins=spins,
        pair_couplings=couplings,
        seed=seed,
        abundance=abundance,
        r_min=r_min,
        r_max=r_max,
    )
