"""End-to-end trajectory simulation driven by a RunConfig.

Pipeline: sample the bath, compute the electron coherence L(T) (CCE, or
exact diagonalization for small baths) with one pulse sequence scaled to each
total evolution time T, fold in the optional 14N spectator factor, dephase
the prepared two-qubit state, and analyse the concurrence trajectory for
information backflow.  When tomography is enabled every sampled state is
additionally pushed through the simulated measurement chain and the
reported concurrence/error bars come from the reconstructions.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import metrics
from .cce import CoherenceCurve, apply_decay, cce_coherence_scaled
from .config import ConfigError, RunConfig
from .dynamics import (
    exact_electron_coherence,
    n14_coherence_factor_scaled,
    prepare_bell,
    sequence_fractions,
)
from .linops import DensityMatrix
from .metrics import NonMarkovReport, TimeSeries, non_markovianity
from .model import BathConfiguration, bell_phi_minus, sample_bath
from .tomography import bootstrap_errors, default_settings, reconstruct, simulate_readout

MAX_EXACT_SPINS = 8


@dataclass(frozen=True)
class TomographyTrajectory:
    concurrence: np.ndarray          # reconstructed concurrence per sample
    sigma: np.ndarray                # bootstrap std per sample
    initial_state: DensityMatrix     # reconstruction at the first sample


@dataclass(frozen=True)
class RunResult:
    times: np.ndarray
    coherence: np.ndarray            # complex L(T), 14N factor included
    concurrence: np.ndarray          # simulated (true) concurrence
    states: list[DensityMatrix]
    report: NonMarkovReport
    bath: BathConfiguration
    prepared_fidelity: float
    prepared_concurrence: float
    tomography: TomographyTrajectory | None

    @property
    def reported_concurrence(self) -> np.ndarray:
        """The trajectory the report is computed on (tomographic if enabled)."""
        if self.tomography is not None:
            return self.tomography.concurrence
        return self.concurrence


def _sub_seed(seed: int, *key: int) -> int:
    return int(np.random.SeedSequence(entropy=seed, spawn_key=key).generate_state(1)[0])


def coherence_curve(cfg: RunConfig, bath: BathConfiguration) -> CoherenceCurve:
    """Electron coherence for the configured sequence family, scaled per point."""
    totals = np.linspace(0.0, cfg.sequence.duration, cfg.sequence.n_samples)
    fractions = sequence_fractions(cfg.sequence.kind, cfg.sequence.n_pulses)
    if cfg.bath.method == "exact":
        if len(bath) > MAX_EXACT_SPINS:
            raise ConfigError(
                f"bath.method=exact needs <= {MAX_EXACT_SPINS} spins, got {len(bath)}"
            )
        values = exact_electron_coherence(cfg.system, bath, fractions, totals)
        curve = CoherenceCurve(totals, values)
    else:
        curve = cce_coherence_scaled(
            bath,
            cfg.system,
            fractions,
            totals,
            max_order=cfg.bath.max_order,
            pair_cutoff=cfg.bath.pair_cutoff,
        )
    if cfg.n14_enabled:
        factor = n14_coherence_factor_scaled(cfg.system.n14, fractions, totals)
        curve = CoherenceCurve(totals, curve.values * factor)
    return curve


def simulate_trajectory(cfg: RunConfig) -> RunResult:
    bath = sample_bath(
        seed=cfg.bath.seed,
        abundance=cfg.bath.abundance,
        r_min=cfg.bath.r_min,
        r_max=cfg.bath.r_max,
        params=cfg.system,
    )
    curve = coherence_curve(cfg, bath)
    rho0 = prepare_bell(cfg.preparation)
    states = apply_decay(
        rho0,
        curve,
        cfg.system.t2n_star,
        curve.times,
        ancilla_profile=cfg.analysis.ancilla_decay,
    )
    conc = np.array([metrics.concurrence(s) for s in states])

    tomo = None
    if cfg.tomography.enabled:
        settings = default_settings()
        meas = np.empty(conc.size)
        sigma = np.empty(conc.size)
        initial = None
        for k, state in enumerate(states):
            record = simulate_readout(
                state,
                settings,
                shots=cfg.tomography.shots,
                contrast=cfg.tomography.contrast,
                seed=_sub_seed(cfg.bath.seed, 2, k),
            )
            rho_hat = reconstruct(record, settings)
            if initial is None:
                initial = rho_hat
            meas[k] = metrics.concurrence(rho_hat)
            sigma[k] = bootstrap_errors(
                record,
                settings,
                n_resamples=cfg.tomography.n_resamples,
                seed=_sub_seed(cfg.bath.seed, 3, k),
            ).concurrence_sigma
        tomo = TomographyTrajectory(concurrence=meas, sigma=sigma, initial_state=initial)

    series = tomo.concurrence if tomo is not None else conc
    tmax = cfg.analysis.tmax if cfg.analysis.tmax is not None else cfg.sequence.duration
    report = non_markovianity(TimeSeries(curve.times, series), cfg.analysis.t0, tmax)

    return RunResult(
        times=curve.times,
        coherence=curve.values,
        concurrence=conc,
        states=states,
        report=report,
        bath=bath,
        prepared_fidelity=metrics.fidelity(rho0, bell_phi_minus()),
        prepared_concurrence=metrics.concurrence(rho0),
        tomography=tomo,
    )
