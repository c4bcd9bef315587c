"""Command-line front end for the simulation, sweep, Ramsey, and scoring
pipelines.

Subcommands: simulate | sweep | ramsey | score | circuits.  Every run is
driven by an optional JSON config file plus flag overrides, and every output
file embeds a SHA-256 of the effective configuration and the seed, so a rerun
with the same inputs reproduces byte-identical bodies.  The hash deliberately
excludes the output directory and the thread count: neither is allowed to
change a single number.

Config file keys (all optional):

    {
      "noise": {"sigma1": 0.03, "sigma2": 0.03, "c": 1.0}
               | {"sigmas": [...], "correlations": [[...]]}
               | "path/to/model.json",
      "static_fields": [0.0, 0.0],
      "ensemble": {"n_realizations_initial": 1000, "convergence_tol": 0.02,
                   "max_realizations": 16000, "time_samples_per_gate": 8},
      "time_grid": {"gate_durations": {"CNOT": 2.0}},
      "seed": 0,
      "output_dir": ".",
      "dfs": "auto",
      "initial_amps": [[0.0, 0.0], [0.7071, 0.0], [0.7071, 0.0], [0.0, 0.0]],
      "wait_times": [0.0, 0.1, ...],
      "shots": null
    }

Exit codes: 0 success, 2 input error, 3 numerical/convergence warning (output
files are still written).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import os
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .circuits import Circuit, CircuitError, canonical_circuits, format_circuit, parse_circuit
from .core import StateVector
from .measures import DfsSpec, pair_dfs
from .noise import NoiseModel, two_qubit_model
from .ramsey import RamseyResult, classify_dfs, extract_correlation, run_qubit_ramsey, run_ramsey
from .scoring import rank_circuits
from .simulate import EnsembleConfig, run_ensemble, sweep_rc

EXIT_OK = 0
EXIT_INPUT = 2
EXIT_NUMERIC = 3

_SCHEMA_VERSION = "v1"


class InputError(Exception):
    """User-facing input problem; maps to exit code 2."""


# ---------------------------------------------------------------------------
# config plumbing


def _load_config(path: str | None) -> dict:
    if path is None:
        return {}
    p = Path(path)
    if not p.is_file():
        raise InputError(f"config file not found: {path}")
    try:
        data = json.loads(p.read_text())
    except json.JSONDecodeError as exc:
        raise InputError(f"config file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise InputError(f"config file {path} must hold a JSON object")
    return data


def _parse_floats(text: str, flag: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError as exc:
        raise InputError(f"{flag} expects comma-separated numbers, got {text!r}") from exc


def _resolve_noise(config: dict, args: argparse.Namespace) -> NoiseModel:
    if getattr(args, "sigma1", None) is not None:
        sigma2 = args.sigma2 if args.sigma2 is not None else args.sigma1
        return two_qubit_model(args.sigma1, sigma2, args.corr if args.corr is not None else 0.0)
    spec = config.get("noise")
    if spec is None:
        raise InputError("no noise model: give --sigma1/--sigma2/--corr or a config 'noise' entry")
    if isinstance(spec, str):
        path = Path(spec)
        if not path.is_file():
            raise InputError(f"noise model file not found: {spec}")
        return NoiseModel.load(path)
    if isinstance(spec, dict):
        if "sigma1" in spec:
            return two_qubit_model(spec["sigma1"], spec.get("sigma2", spec["sigma1"]), spec.get("c", 0.0))
        return NoiseModel.from_dict(spec)
    raise InputError("config 'noise' must be an object or a file path")


def _resolve_fields(config: dict, args: argparse.Namespace, n_qubits: int) -> list[float]:
    if getattr(args, "static_fields", None) is not None:
        fields = _parse_floats(args.static_fields, "--static-fields")
    else:
        fields = [float(x) for x in config.get("static_fields", [0.0] * n_qubits)]
    if len(fields) != n_qubits:
        raise InputError(f"static_fields needs {n_qubits} entries, got {len(fields)}")
    return fields


def _resolve_ensemble(config: dict, args: argparse.Namespace) -> EnsembleConfig:
    ens = dict(config.get("ensemble", {}))
    grid = config.get("time_grid", {})
    if "time_samples_per_gate" in grid:
        ens.setdefault("time_samples_per_gate", grid["time_samples_per_gate"])
    for flag, key in (
        ("realizations", "n_realizations_initial"),
        ("max_realizations", "max_realizations"),
        ("tolerance", "convergence_tol"),
        ("time_samples", "time_samples_per_gate"),
    ):
        val = getattr(args, flag, None)
        if val is not None:
            ens[key] = val
    seed = args.seed if getattr(args, "seed", None) is not None else config.get("seed", 0)
    ens["rng_seed"] = int(seed)
    if ens.get("max_realizations") is None and "n_realizations_initial" in ens:
        ens.setdefault("max_realizations", max(16000, ens["n_realizations_initial"]))
    try:
        return EnsembleConfig(**ens)
    except (TypeError, ValueError) as exc:
        raise InputError(f"bad ensemble config: {exc}") from exc


def _resolve_circuit(spec: str, config: dict) -> Circuit:
    durations = config.get("time_grid", {}).get("gate_durations")
    named = canonical_circuits(durations)
    if spec in named:
        return named[spec]
    path = Path(spec)
    if not path.is_file():
        raise InputError(
            f"circuit {spec!r} is neither a canonical label ({', '.join(named)}) nor an existing file"
        )
    return parse_circuit(path.read_text())


def _resolve_dfs(config: dict, args: argparse.Namespace) -> DfsSpec | None:
    choice = getattr(args, "dfs", None) or config.get("dfs", "auto")
    if choice == "auto":
        return None
    if choice in ("+", "-"):
        return pair_dfs(choice)
    raise InputError(f"dfs must be '+', '-', or 'auto', got {choice!r}")


def _resolve_initial(config: dict, n_qubits: int) -> StateVector | None:
    amps = config.get("initial_amps")
    if amps is None:
        return None
    vec = []
    for entry in amps:
        if isinstance(entry, (list, tuple)):
            if len(entry) != 2:
                raise InputError("initial_amps entries must be numbers or [re, im] pairs")
            vec.append(complex(entry[0], entry[1]))
        else:
            vec.append(complex(entry))
    try:
        return StateVector(n_qubits, np.asarray(vec)).normalized()
    except ValueError as exc:
        raise InputError(f"bad initial_amps: {exc}") from exc


def _threads(args: argparse.Namespace) -> int:
    if args.threads is not None:
        return max(1, args.threads)
    env = os.environ.get("CORRNOISE_THREADS")
    if env:
        try:
            return max(1, int(env))
        except ValueError as exc:
            raise InputError(f"CORRNOISE_THREADS must be an integer, got {env!r}") from exc
    return 1


def _config_hash(effective: dict) -> str:
    blob = json.dumps(effective, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()


def _out_dir(config: dict, args: argparse.Namespace) -> Path:
    out = getattr(args, "output_dir", None) or config.get("output_dir", ".")
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


# ---------------------------------------------------------------------------
# output writers


def _fmt(value: float) -> str:
    return repr(float(value))


def _write_csv(
    path: Path, kind: str, cfg_hash: str, seed: int, header: Sequence[str], rows: Sequence[Sequence]
) -> None:
    lines = [f"# schema=corrnoise.{kind}.{_SCHEMA_VERSION} config_sha256={cfg_hash} seed={seed}"]
    lines.append(",".join(header))
    for row in rows:
        lines.append(",".join(cell if isinstance(cell, str) else _fmt(cell) for cell in row))
    path.write_text("\n".join(lines) + "\n")


def _write_json(path: Path, kind: str, cfg_hash: str, seed: int, payload: dict) -> None:
    doc = {"schema": f"corrnoise.{kind}.{_SCHEMA_VERSION}", "config_sha256": cfg_hash, "seed": seed}
    doc.update(payload)
    path.write_text(json.dumps(doc, indent=2, sort_keys=True) + "\n")


# ---------------------------------------------------------------------------
# subcommands


def cmd_simulate(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    circuit = _resolve_circuit(args.circuit, config)
    model = _resolve_noise(config, args)
    if model.n_qubits != circuit.n_qubits:
        raise InputError(f"noise model is {model.n_qubits}-qubit but circuit needs {circuit.n_qubits}")
    fields = _resolve_fields(config, args, circuit.n_qubits)
    cfg = _resolve_ensemble(config, args)
    dfs = _resolve_dfs(config, args)
    initial = _resolve_initial(config, circuit.n_qubits)
    threads = _threads(args)

    effective = {
        "command": "simulate",
        "circuit": format_circuit(circuit),
        "noise": model.to_dict(),
        "static_fields": fields,
        "ensemble": asdict(cfg),
        "dfs": dfs.sign_label if dfs else "auto",
        "initial_amps": config.get("initial_amps"),
    }
    cfg_hash = _config_hash(effective)

    report = run_ensemble(circuit, initial, fields, model, cfg, dfs=dfs, threads=threads)

    out = _out_dir(config, args)
    label = circuit.label or "circuit"
    rows = [
        (t, f, i, g, dg, dc)
        for t, f, i, g, dg, dc in zip(
            report.times, report.fidelity, report.infidelity, report.purity, report.d_g, report.d_c
        )
    ]
    _write_csv(
        out / f"{label}_trajectory.csv",
        "trajectory",
        cfg_hash,
        cfg.rng_seed,
        ("t", "fidelity", "infidelity", "purity", "d_g", "d_c"),
        rows,
    )
    _write_json(
        out / f"{label}_run.json",
        "run",
        cfg_hash,
        cfg.rng_seed,
        {
            "circuit_label": label,
            "n_realizations_used": report.n_realizations_used,
            "converged": report.converged,
            "final_fidelity": report.final_fidelity,
            "final_infidelity": report.final_infidelity,
            "final_purity": report.final_purity,
            "metadata": {k: v for k, v in report.metadata.items() if not isinstance(v, np.ndarray)},
        },
    )
    print(
        f"{label}: final infidelity {report.final_infidelity:.6g}, purity {report.final_purity:.6g}, "
        f"{report.n_realizations_used} realizations, converged={report.converged}"
    )
    return EXIT_OK if report.converged else EXIT_NUMERIC


def cmd_sweep(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    circuit = _resolve_circuit(args.circuit, config)
    if circuit.n_qubits != 2:
        raise InputError("sweep runs on two-qubit circuits")
    r_values = _parse_floats(args.r_list, "--r-list")
    c_values = _parse_floats(args.c_list, "--c-list")
    if not r_values or not c_values:
        raise InputError("need at least one r and one c value")
    fields = _resolve_fields(config, args, circuit.n_qubits)
    cfg = _resolve_ensemble(config, args)
    dfs = _resolve_dfs(config, args)
    initial = _resolve_initial(config, circuit.n_qubits)
    threads = _threads(args)

    effective = {
        "command": "sweep",
        "circuit": format_circuit(circuit),
        "r_values": r_values,
        "c_values": c_values,
        "base_sigma": args.base_sigma,
        "static_fields": fields,
        "ensemble": asdict(cfg),
        "dfs": dfs.sign_label if dfs else "auto",
        "initial_amps": config.get("initial_amps"),
    }
    cfg_hash = _config_hash(effective)

    result = sweep_rc(circuit, r_values, c_values, args.base_sigma, cfg, initial, fields, dfs, threads)

    out = _out_dir(config, args)
    label = circuit.label or "circuit"
    rows = [
        (cell.r, cell.c, cell.final_infidelity, cell.integrated_dc, str(cell.n_realizations_used),
         str(cell.converged).lower(), cell.error)
        for cell in result.cells
    ]
    _write_csv(
        out / f"{label}_sweep.csv",
        "sweep",
        cfg_hash,
        cfg.rng_seed,
        ("r", "c", "final_infidelity", "integrated_dc", "n_realizations", "converged", "error"),
        rows,
    )
    bad = [cell for cell in result.cells if cell.error or not cell.converged]
    print(f"{label}: {len(result.cells)} cells, {len(bad)} flagged")
    return EXIT_OK if not bad else EXIT_NUMERIC


def _auto_wait_grid(model: NoiseModel, n_points: int) -> np.ndarray:
    scale = float(np.sum(model.sigmas**2))
    if scale <= 0:
        return np.linspace(0.0, 1.0, n_points)
    t_max = 1.6 / math.sqrt(2.0 * scale)
    return np.linspace(0.0, t_max, n_points)


def _resolve_wait_grid(config: dict, args: argparse.Namespace, model: NoiseModel) -> np.ndarray:
    if args.t_max is not None:
        if args.t_max <= 0:
            raise InputError("--t-max must be positive")
        return np.linspace(0.0, args.t_max, args.n_points)
    if "wait_times" in config:
        return np.asarray(config["wait_times"], dtype=np.float64)
    return _auto_wait_grid(model, args.n_points)


def _fit_payload(res: RamseyResult) -> dict:
    return {
        "envelope_rate": res.fit.envelope_rate,
        "frequency": res.fit.frequency,
        "amplitude": res.fit.amplitude,
        "residual_rms": res.fit.residual_rms,
        "rate_stderr": res.fit.rate_stderr,
        "decay_resolved": res.fit.decay_resolved,
        "t2_effective": res.fit.t2_effective,
        "n_oscillations": res.fit.n_oscillations,
        "converged_all": all(res.converged),
        "n_realizations": [min(res.n_realizations), max(res.n_realizations)],
    }


def cmd_ramsey(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    model = _resolve_noise(config, args)
    if model.n_qubits != 2:
        raise InputError("the Ramsey pipeline runs on the two-qubit register")
    fields = _resolve_fields(config, args, 2)
    cfg = _resolve_ensemble(config, args)
    threads = _threads(args)
    grid = _resolve_wait_grid(config, args, model)
    shots = config.get("shots")

    variants = {"both": ("plus", "minus"), "all": ("plus", "minus", "q1", "q2")}.get(
        args.variant, (args.variant,)
    )

    effective = {
        "command": "ramsey",
        "variants": list(variants),
        "wait_times": [float(t) for t in grid],
        "noise": model.to_dict(),
        "static_fields": fields,
        "ensemble": asdict(cfg),
        "shots": shots,
        "ratio_threshold": args.ratio_threshold,
    }
    cfg_hash = _config_hash(effective)
    out = _out_dir(config, args)

    results: dict[str, RamseyResult] = {}
    for variant in variants:
        if variant.startswith("q"):
            res = run_qubit_ramsey(int(variant[1]), grid, fields, model, cfg, threads, shots)
        else:
            res = run_ramsey(variant, grid, fields, model, cfg, threads, shots)
        results[variant] = res
        rows = [
            (t, p, str(n), str(conv).lower())
            for t, p, n, conv in zip(res.wait_times, res.probabilities, res.n_realizations, res.converged)
        ]
        _write_csv(
            out / f"ramsey_{variant}.csv",
            "ramsey",
            cfg_hash,
            cfg.rng_seed,
            ("t", "probability", "n_realizations", "converged"),
            rows,
        )

    payload: dict = {"variants": {name: _fit_payload(res) for name, res in results.items()}}
    verdict = None
    if "plus" in results and "minus" in results:
        verdict = classify_dfs(
            results["plus"].t2_effective, results["minus"].t2_effective, args.ratio_threshold
        )
        payload["verdict"] = verdict
    if len(results) == 4:
        est = extract_correlation(
            results["plus"].fitted_envelope_rate,
            results["minus"].fitted_envelope_rate,
            results["q1"].fitted_envelope_rate,
            results["q2"].fitted_envelope_rate,
            rate_uncertainties=tuple(results[v].fit.rate_stderr for v in ("plus", "minus", "q1", "q2")),
        )
        payload["correlation_estimate"] = {
            "cross_rate": est.cross_rate,
            "correlation": est.correlation,
            "sum_rule_residual": est.sum_rule_residual,
            "sum_rule_ok": est.sum_rule_ok,
        }
    _write_json(out / "ramsey_fit.json", "ramsey_fit", cfg_hash, cfg.rng_seed, payload)

    for name, res in results.items():
        t2 = res.t2_effective
        print(f"{name}: rate {res.fitted_envelope_rate:.6g}, T2 {'inf' if math.isinf(t2) else f'{t2:.6g}'}")
    if verdict is not None:
        print(f"verdict: {verdict}")
    flagged = any(not all(res.converged) for res in results.values())
    return EXIT_OK if not flagged else EXIT_NUMERIC


def cmd_score(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    if args.dfs_file:
        path = Path(args.dfs_file)
        if not path.is_file():
            raise InputError(f"DFS spec file not found: {args.dfs_file}")
        data = json.loads(path.read_text())
        try:
            dfs = DfsSpec(int(data["n_qubits"]), tuple(data["basis_states"]), data.get("sign_label", ""))
        except (KeyError, TypeError, ValueError) as exc:
            raise InputError(f"bad DFS spec in {args.dfs_file}: {exc}") from exc
    else:
        dfs = pair_dfs(args.dfs)

    circuits = [_resolve_circuit(spec, config) for spec in args.circuits]
    scores = rank_circuits(circuits, dfs, check_equivalence=args.check_equivalence)

    effective = {
        "command": "score",
        "circuits": [format_circuit(c) for c in circuits],
        "dfs": {"n_qubits": dfs.n_qubits, "basis_states": list(dfs.basis_states), "sign_label": dfs.sign_label},
    }
    cfg_hash = _config_hash(effective)
    out = _out_dir(config, args)

    rank_rows = [
        (str(i + 1), sc.label, sc.total_badness, str(sc.n_gates)) for i, sc in enumerate(scores)
    ]
    _write_csv(
        out / "score_ranking.csv", "score", cfg_hash, 0, ("rank", "label", "total_badness", "n_gates"), rank_rows
    )
    gate_rows = []
    for sc in scores:
        for k, gs in enumerate(sc.gate_scores):
            gate_rows.append(
                (
                    sc.label,
                    str(k),
                    gs.op.name,
                    " ".join(str(q) for q in gs.op.qubits),
                    "" if gs.op.theta is None else _fmt(gs.op.theta),
                    gs.badness,
                    gs.block_weights[0],
                    gs.block_weights[1],
                )
            )
    _write_csv(
        out / "score_gates.csv",
        "score_gates",
        cfg_hash,
        0,
        ("label", "gate_index", "gate", "qubits", "theta", "badness", "weight_in_out", "weight_out_in"),
        gate_rows,
    )

    width = max(len(sc.label) for sc in scores)
    print(f"{'rank':<5} {'label':<{width}} {'total_badness':>14} {'gates':>6}")
    for i, sc in enumerate(scores):
        print(f"{i + 1:<5} {sc.label:<{width}} {sc.total_badness:>14.6f} {sc.n_gates:>6}")
    return EXIT_OK


def cmd_circuits(args: argparse.Namespace) -> int:
    config = _load_config(args.config)
    durations = config.get("time_grid", {}).get("gate_durations")
    named = canonical_circuits(durations)
    for label, circuit in named.items():
        print(f"{label}: {circuit.n_gates} gates, total duration {circuit.total_duration:g}")
    if args.emit:
        out = Path(args.emit)
        out.mkdir(parents=True, exist_ok=True)
        for label, circuit in named.items():
            (out / f"{label}.circ").write_text(format_circuit(circuit))
        print(f"wrote {len(named)} circuit files to {out}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# parser


def _add_common(p: argparse.ArgumentParser, ensemble: bool = True) -> None:
    p.add_argument("--config", help="JSON config file")
    p.add_argument("--output-dir", help="directory for output files (default from config, else .)")
    p.add_argument("--seed", type=int, help="RNG seed (overrides config)")
    p.add_argument("--threads", type=int, help="worker threads (default CORRNOISE_THREADS or 1)")
    p.add_argument("--sigma1", type=float, help="qubit-1 noise amplitude (with --sigma2/--corr)")
    p.add_argument("--sigma2", type=float, help="qubit-2 noise amplitude")
    p.add_argument("--corr", type=float, help="noise correlation coefficient in [-1, 1]")
    p.add_argument("--static-fields", help="comma-separated static field offsets, e.g. '1.1,0.4'")
    if ensemble:
        p.add_argument("--realizations", type=int, help="initial ensemble size")
        p.add_argument("--max-realizations", type=int, help="ensemble size cap for the doubling loop")
        p.add_argument("--tolerance", type=float, help="relative convergence tolerance")
        p.add_argument("--time-samples", type=int, help="record slices per gate interval")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="corrnoise",
        description="Simulate and score few-qubit circuits under correlated quasi-static dephasing.",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sim = sub.add_parser("simulate", help="ensemble-average one circuit and write its trajectory")
    p_sim.add_argument("--circuit", required=True, help="canonical label or circuit DSL file")
    p_sim.add_argument("--dfs", choices=["+", "-", "auto"], help="protected pair for diagnostics")
    _add_common(p_sim)
    p_sim.set_defaults(handler=cmd_simulate)

    p_sweep = sub.add_parser("sweep", help="grid over noise asymmetry r and correlation c")
    p_sweep.add_argument("--circuit", required=True, help="canonical label or circuit DSL file")
    p_sweep.add_argument("--r-list", required=True, help="comma-separated r values (sigma1 = r*base)")
    p_sweep.add_argument("--c-list", required=True, help="comma-separated correlation values")
    p_sweep.add_argument("--base-sigma", type=float, required=True, help="sigma2 baseline")
    p_sweep.add_argument("--dfs", choices=["+", "-", "auto"], help="protected pair for diagnostics")
    _add_common(p_sweep)
    p_sweep.set_defaults(handler=cmd_sweep)

    p_ram = sub.add_parser("ramsey", help="run Ramsey experiments, fit envelopes, classify the DFS")
    p_ram.add_argument(
        "--variant",
        choices=["plus", "minus", "q1", "q2", "both", "all"],
        default="both",
        help="which experiments to run; 'both' adds the verdict, 'all' adds the correlation estimate",
    )
    p_ram.add_argument("--t-max", type=float, help="wait-time window (default scaled to the noise)")
    p_ram.add_argument("--n-points", type=int, default=24, help="wait-time grid size")
    p_ram.add_argument("--ratio-threshold", type=float, default=2.0, help="T2 ratio for the verdict")
    _add_common(p_ram)
    p_ram.set_defaults(handler=cmd_ramsey)

    p_score = sub.add_parser("score", help="rank circuits by accumulated gate badness")
    p_score.add_argument("circuits", nargs="+", help="canonical labels or circuit DSL files")
    p_score.add_argument("--dfs", choices=["+", "-"], default="-", help="protected pair")
    p_score.add_argument("--dfs-file", help="JSON DfsSpec file (overrides --dfs)")
    p_score.add_argument("--check-equivalence", action="store_true", help="warn on final-state mismatches")
    p_score.add_argument("--config", help="JSON config file")
    p_score.add_argument("--output-dir", help="directory for output files")
    p_score.set_defaults(handler=cmd_score)

    p_circ = sub.add_parser("circuits", help="list canonical circuits; optionally write DSL files")
    p_circ.add_argument("--emit", help="directory to write <label>.circ files into")
    p_circ.add_argument("--config", help="JSON config file (for gate_durations)")
    p_circ.set_defaults(handler=cmd_circuits)

    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.handler(args)
    except (InputError, CircuitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (FileNotFoundError, json.JSONDecodeError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except RuntimeError as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
