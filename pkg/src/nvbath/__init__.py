"""nvbath: entanglement dynamics of an NV electron spin + ancilla nuclear spin
pair coupled to a 13C nuclear spin bath.

Modules
-------
linops      labeled tensor-product linear algebra (operators, states)
model       Hamiltonians, working two-qubit subspace, bath sampling
dynamics    pulse sequences, Bell preparation, exact (system x bath) evolution
cce         cluster correlation expansion of the electron coherence
metrics     concurrence, overlap fidelity, non-Markovianity of a trajectory
tomography  shot-limited readout simulation, reconstruction, bootstrap errors
config      run configuration schema and defaults
simulate    end-to-end trajectory orchestration used by the CLI and demos
cli         nvbath run | sweep | validate | oracle
"""

from .cce import apply_decay, cce_coherence, cce_coherence_scaled, enumerate_clusters
from .config import RunConfig, build_config
from .dynamics import (
    PreparationSpec,
    evolve,
    evolve_with_bath,
    make_fid,
    make_hahn,
    make_pdd,
    prepare_bell,
)
from .linops import DensityMatrix, Operator, SpaceLabel
from .metrics import TimeSeries, concurrence, fidelity, non_markovianity, purity, total_variation
from .model import SystemParams, build_central_hamiltonian, project_two_level, sample_bath
from .simulate import RunResult, simulate_trajectory
from .tomography import bootstrap_errors, default_settings, reconstruct, simulate_readout

__version__ = "0.1.0"

__all__ = [
    "DensityMatrix",
    "Operator",
    "PreparationSpec",
    "RunConfig",
    "RunResult",
    "SpaceLabel",
    "SystemParams",
    "TimeSeries",
    "apply_decay",
    "bootstrap_errors",
    "build_central_hamiltonian",
    "build_config",
    "cce_coherence",
    "cce_coherence_scaled",
    "concurrence",
    "default_settings",
    "enumerate_clusters",
    "evolve",
    "evolve_with_bath",
    "fidelity",
    "make_fid",
    "make_hahn",
    "make_pdd",
    "non_markovianity",
    "prepare_bell",
    "project_two_level",
    "purity",
    "reconstruct",
    "sample_bath",
    "simulate_readout",
    "simulate_trajectory",
    "total_variation",
]
