"""Command-line entry point.

Subcommands:
  run       simulate one trajectory, write trajectory + report files
  sweep     repeat run over a numeric config axis, write a merged summary
  validate  parse and validate a config, print the effective configuration
  oracle    run the exact-diagonalization and closed-form cross-checks

Exit codes: 0 success, 2 configuration error, 3 numerical failure
(invariant violation or failed oracle), 4 I/O error.

All file writes are whole-file atomic (write to a temp name in the target
directory, then rename), and a fixed (config, seed) pair produces
byte-identical outputs, also under concurrent sweep execution.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from .config import (
    ConfigError,
    RunConfig,
    build_config,
    effective_raw,
    load_config,
    set_by_path,
)
from .linops import InvariantViolation
from .simulate import RunResult, simulate_trajectory

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_NUMERICAL = 3
EXIT_IO = 4


def _atomic_write_text(path: Path, text: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(text)
    os.replace(tmp, path)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _apply_overrides(raw: dict, args) -> dict:
    if getattr(args, "seed", None) is not None:
        raw = set_by_path(raw, "bath.seed", int(args.seed))
    if getattr(args, "output", None) is not None:
        raw = set_by_path(raw, "output.path", str(args.output))
    if getattr(args, "format", None) is not None:
        raw = set_by_path(raw, "output.format", str(args.format))
    return raw


def _trajectory_rows(result: RunResult):
    header = ["time_s", "concurrence", "coherence_abs"]
    cols = [
        result.times,
        result.reported_concurrence,
        np.abs(result.coherence),
    ]
    if result.tomography is not None:
        header.append("concurrence_sigma")
        cols.append(result.tomography.sigma)
    rows = [[float(c[i]) for c in cols] for i in range(result.times.size)]
    return header, rows


def _report_dict(result: RunResult, cfg: RunConfig) -> dict:
    tmax = cfg.analysis.tmax if cfg.analysis.tmax is not None else cfg.sequence.duration
    return {
        "non_markovianity": {
            "measure": float(result.report.measure),
            "total_variation": float(result.report.total_variation),
            "delta_e": float(result.report.delta_e),
            "revivals": [
                {
                    "start": float(r.start),
                    "peak_time": float(r.peak_time),
                    "height": float(r.height),
                }
                for r in result.report.revivals
            ],
        },
        "window": {"t0": float(cfg.analysis.t0), "tmax": float(tmax)},
        "bath": {
            "seed": cfg.bath.seed,
            "n_spins": len(result.bath),
            "abundance": cfg.bath.abundance,
            "r_min": cfg.bath.r_min,
            "r_max": cfg.bath.r_max,
            "method": cfg.bath.method,
            "max_order": cfg.bath.max_order,
            "pair_cutoff": cfg.bath.pair_cutoff,
        },
        "sequence": {
            "kind": cfg.sequence.kind,
            "n_pulses": cfg.sequence.n_pulses,
            "duration": cfg.sequence.duration,
            "n_samples": cfg.sequence.n_samples,
        },
        "prepared_state": {
            "fidelity": float(result.prepared_fidelity),
            "concurrence": float(result.prepared_concurrence),
        },
        "tomography_enabled": result.tomography is not None,
    }


def _state_dict(state) -> dict:
    return {
        "space": list(state.space.names),
        "entries_row_major_re_im": [
            [[float(x.real), float(x.imag)] for x in row] for row in state.entries
        ],
    }


def write_run_outputs(result: RunResult, cfg: RunConfig, outdir: Path) -> None:
    outdir.mkdir(parents=True, exist_ok=True)
    header, rows = _trajectory_rows(result)
    if cfg.output.format == "csv":
        lines = [",".join(header)]
        lines += [",".join(repr(v) for v in row) for row in rows]
        _atomic_write_text(outdir / "trajectory.csv", "\n".join(lines) + "\n")
    else:
        _atomic_write_text(
            outdir / "trajectory.json", _json_text({"columns": header, "rows": rows})
        )
    _atomic_write_text(outdir / "report.json", _json_text(_report_dict(result, cfg)))
    _atomic_write_text(outdir / "effective_config.json", _json_text(effective_raw(cfg)))
    if result.tomography is not None:
        _atomic_write_text(
            outdir / "reconstructed_initial_state.json",
            _json_text(_state_dict(result.tomography.initial_state)),
        )


def cmd_run(args) -> int:
    raw = _apply_overrides(load_config(args.config), args)
    cfg = build_config(raw)
    result = simulate_trajectory(cfg)
    outdir = Path(cfg.output.path)
    write_run_outputs(result, cfg, outdir)
    print(f"bath: {len(result.bath)} spins (seed {cfg.bath.seed})")
    print(f"non-Markovianity measure: {result.report.measure:.6g}")
    print(f"outputs written to {outdir}")
    return EXIT_OK


def _parse_values(text: str) -> list:
    out = []
    for token in text.split(","):
        token = token.strip()
        if not token:
            continue
        try:
            out.append(int(token))
        except ValueError:
            try:
                out.append(float(token))
            except ValueError:
                raise ConfigError(f"sweep value {token!r} is not numeric") from None
    if not out:
        raise ConfigError("sweep needs at least one value")
    return out


def cmd_sweep(args) -> int:
    base = _apply_overrides(load_config(args.config), args)
    values = _parse_values(args.values)
    configs = []
    for v in values:
        cfg = build_config(set_by_path(base, args.axis, v))
        configs.append(cfg)
    outdir = Path(configs[0].output.path)
    outdir.mkdir(parents=True, exist_ok=True)

    def one(idx_cfg):
        idx, cfg = idx_cfg
        result = simulate_trajectory(cfg)
        write_run_outputs(result, cfg, outdir / f"value_{idx:03d}")
        return result

    with ThreadPoolExecutor(max_workers=max(1, args.threads)) as pool:
        results = list(pool.map(one, enumerate(configs)))

    rows = []
    for v, result in zip(values, results):
        revivals = result.report.revivals
        if revivals:
            tallest = max(revivals, key=lambda r: r.height)
            height, peak = float(tallest.height), float(tallest.peak_time)
        else:
            height, peak = 0.0, None
        rows.append(
            {
                "value": v,
                "measure": float(result.report.measure),
                "max_revival_height": height,
                "revival_peak_time": peak,
            }
        )
    if configs[0].output.format == "csv":
        lines = ["value,measure,max_revival_height,revival_peak_time"]
        for r in rows:
            peak = "" if r["revival_peak_time"] is None else repr(r["revival_peak_time"])
            lines.append(
                f"{r['value']!r},{r['measure']!r},{r['max_revival_height']!r},{peak}"
            )
        _atomic_write_text(outdir / "summary.csv", "\n".join(lines) + "\n")
    else:
        _atomic_write_text(
            outdir / "summary.json", _json_text({"axis": args.axis, "rows": rows})
        )
    print(f"swept {args.axis} over {len(values)} values; outputs in {outdir}")
    return EXIT_OK


def cmd_validate(args) -> int:
    cfg = build_config(_apply_overrides(load_config(args.config), args))
    sys.stdout.write(_json_text(effective_raw(cfg)))
    return EXIT_OK


def cmd_oracle(args) -> int:
    failures = 0
    for name, fn in _ORACLE_CHECKS:
        try:
            detail = fn()
            print(f"PASS {name}: {detail}")
        except AssertionError as exc:
            failures += 1
            print(f"FAIL {name}: {exc}")
    if failures:
        print(f"{failures} oracle check(s) failed")
        return EXIT_NUMERICAL
    print("all oracle checks passed")
    return EXIT_OK


# ---------------------------------------------------------------------------
# oracle checks (exact-diagonalization and closed-form cross-validation)
# ---------------------------------------------------------------------------

def _check_werner():
    from .linops import DensityMatrix
    from .metrics import concurrence
    from .model import bell_phi_minus, two_qubit_space

    bell = bell_phi_minus().entries
    worst = 0.0
    for p in np.arange(0.0, 1.0001, 0.1):
        rho = DensityMatrix(two_qubit_space(), p * bell + (1 - p) * np.eye(4) / 4)
        worst = max(worst, abs(concurrence(rho) - max(0.0, (3 * p - 1) / 2)))
    assert worst <= 1e-10, f"Werner concurrence error {worst:.2e}"
    return f"max error {worst:.2e}"


def _check_backflow_arithmetic():
    from .metrics import TimeSeries, non_markovianity

    t = np.linspace(0.0, 1.0, 200)
    mono = non_markovianity(TimeSeries(t, np.exp(-4 * t)), 0.0, 1.0)
    assert mono.measure == 0.0, f"monotone series gave {mono.measure}"
    h = 0.31
    rep = non_markovianity(
        TimeSeries(np.array([0.0, 1.0, 2.0, 3.0]), np.array([0.9, 0.0, h, 0.0])),
        0.0,
        3.0,
    )
    assert abs(rep.measure - 2 * h) <= 1e-6 * 2 * h, f"revival measure {rep.measure}"
    return "monotone I = 0, synthetic revival I = 2h"


def _check_cce_vs_exact():
    from .cce import cce_coherence_scaled
    from .dynamics import exact_electron_coherence
    from .model import SystemParams, sample_bath

    params = SystemParams(ancilla_hyperfine=np.zeros((3, 3)))
    totals = np.linspace(0.0, 35e-6, 8)[1:]
    worst = 0.0
    found = 0
    seed = 0
    while found < 3:
        bath = sample_bath(seed=seed, abundance=0.011, r_min=2.0, r_max=8.0)
        seed += 1
        if not (1 <= len(bath) <= 5):
            continue
        found += 1
        for fractions in ((0.5,), (0.25, 0.75)):
            exact = exact_electron_coherence(params, bath, fractions, totals)
            curve = cce_coherence_scaled(
                bath, params, fractions, totals, max_order=len(bath), pair_cutoff=0.0
            )
            worst = max(worst, float(np.max(np.abs(curve.values - exact))))
    assert worst <= 1e-8, f"CCE vs exact deviation {worst:.2e}"
    return f"3 baths, Hahn+PDD2, max deviation {worst:.2e}"


def _check_larmor_echo_revival():
    from .dynamics import exact_electron_coherence
    from .model import BathConfiguration, BathSpin, SystemParams

    params = SystemParams(ancilla_hyperfine=np.zeros((3, 3)))
    spin = BathSpin(
        position=np.array([0.0, 0.0, 6.0]), hyperfine=np.array([40e3, -25e3, 90e3])
    )
    bath = BathConfiguration(
        spins=(spin,), pair_couplings={}, seed=0, abundance=0.5, r_min=2.0, r_max=30.0
    )
    total = 2.0 / params.larmor_c13
    coh = exact_electron_coherence(params, bath, (0.5,), [total])
    dev = abs(abs(coh[0]) - 1.0)
    assert dev <= 1e-6, f"echo revival deviation {dev:.2e}"
    return f"|L(2 T_Larmor)| - 1 = {dev:.2e}"


_ORACLE_CHECKS = [
    ("werner-concurrence", _check_werner),
    ("backflow-arithmetic", _check_backflow_arithmetic),
    ("cce-vs-exact-diagonalization", _check_cce_vs_exact),
    ("larmor-echo-revival", _check_larmor_echo_revival),
]


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="nvbath",
        description="NV electron + ancilla 13C entanglement dynamics simulator",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", type=str, default=None, help="JSON config path")
        p.add_argument("--seed", type=int, default=None, help="override bath.seed")
        p.add_argument("--output", type=str, default=None, help="override output.path")
        p.add_argument(
            "--format", choices=("csv", "json"), default=None, help="trajectory format"
        )
        p.add_argument("--threads", type=int, default=1, help="worker threads (sweep)")

    p_run = sub.add_parser("run", help="simulate one trajectory")
    common(p_run)
    p_run.set_defaults(func=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run over a numeric config axis")
    common(p_sweep)
    p_sweep.add_argument("--axis", required=True, help="dotted path, e.g. sequence.duration")
    p_sweep.add_argument("--values", required=True, help="comma-separated numbers")
    p_sweep.set_defaults(func=cmd_sweep)

    p_val = sub.add_parser("validate", help="validate a config and print it")
    common(p_val)
    p_val.set_defaults(func=cmd_validate)

    p_orc = sub.add_parser("oracle", help="run cross-check oracles")
    common(p_orc)
    p_orc.set_defaults(func=cmd_oracle)
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantViolation as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
