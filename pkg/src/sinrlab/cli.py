"""Batch experiment runner.

Experiments are described by a single YAML file (nested key-value); the
schema is validated before any sampling, and every run writes two files
into the output directory: results.json with one record per grid point and
plot.tsv with a header row for plotting tools. Both embed the config hash
and tool version, and re-running the same config and seed reproduces them
byte for byte, for any worker count. Wall-clock time goes to the console
only, so it never perturbs the output files.

Exit codes: 0 success, 2 unreadable config or schema violation, 3
invariant violation during the run (partial results are written with a
failure marker).
"""
from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
import yaml

from . import __version__
from .estimators import (
    BracketError,
    Estimate,
    ModelConfig,
    crossing_sweep,
    degree_sweep,
    estimate_gamma_star,
    estimate_lambda_c_gilbert,
    theorem1_experiment,
    theorem2_experiment,
    theorem3_experiment,
)
from .graphs import label_clusters
from .measures import DirectingMeasureSpec
from .pathloss import PathLossModel
from .pointproc import PowerDistribution
from .renorm import RenormParams, nice_site_scan
from .rng import substream
from .sinr import SinrParams, sinr_pair_table

__all__ = ["main", "run_config", "SchemaError", "EXPERIMENTS"]


class SchemaError(ValueError):
    """Config validation failure, carrying the offending field path."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}")


# ---------------------------------------------------------------------------
# schema helpers


def _as_map(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise SchemaError(path, "expected a mapping")
    return value


def _get(mapping: dict, key: str, path: str):
    if key not in mapping:
        raise SchemaError(f"{path}.{key}", "missing required field")
    return mapping[key]


def _as_number(value, path: str, positive=False, nonneg=False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise SchemaError(path, "expected a number")
    v = float(value)
    if positive and not v > 0:
        raise SchemaError(path, "expected a positive number")
    if nonneg and v < 0:
        raise SchemaError(path, "expected a nonnegative number")
    return v


def _as_int(value, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise SchemaError(path, "expected an integer")
    if minimum is not None and value < minimum:
        raise SchemaError(path, f"expected an integer >= {minimum}")
    return value


def _as_str(value, path: str) -> str:
    if not isinstance(value, str):
        raise SchemaError(path, "expected a string")
    return value


def _as_number_list(value, path: str, positive=False, nonneg=False) -> tuple[float, ...]:
    if not isinstance(value, list) or not value:
        raise SchemaError(path, "expected a nonempty list of numbers")
    return tuple(
        _as_number(v, f"{path}[{i}]", positive=positive, nonneg=nonneg)
        for i, v in enumerate(value)
    )


def _check_unknown(mapping: dict, allowed: set[str], path: str) -> None:
    for key in mapping:
        if key not in allowed:
            raise SchemaError(f"{path}.{key}", "unknown field")


# ---------------------------------------------------------------------------
# model block


def parse_model(block, path: str = "model") -> ModelConfig:
    block = _as_map(block, path)
    _check_unknown(
        block, {"dimension", "pathloss", "powers", "measure", "tau", "noise", "margin"}, path
    )
    dimension = _as_int(block.get("dimension", 2), f"{path}.dimension", minimum=1)
    tau = _as_number(_get(block, "tau", path), f"{path}.tau", positive=True)
    noise = _as_number(_get(block, "noise", path), f"{path}.noise", nonneg=True)
    margin = block.get("margin")
    if margin is not None:
        margin = _as_number(margin, f"{path}.margin", nonneg=True)
    try:
        pathloss = _parse_pathloss(
            _get(block, "pathloss", path), dimension, f"{path}.pathloss"
        )
        powers = _parse_powers(_get(block, "powers", path), f"{path}.powers")
        measure = _parse_measure(
            _get(block, "measure", path), dimension, f"{path}.measure"
        )
        return ModelConfig(
            measure=measure,
            powers=powers,
            pathloss=pathloss,
            tau=tau,
            noise=noise,
            margin=margin,
        )
    except SchemaError:
        raise
    except ValueError as exc:
        raise SchemaError(path, str(exc)) from exc


def _parse_pathloss(block, dimension: int, path: str) -> PathLossModel:
    block = _as_map(block, path)
    kind = _as_str(_get(block, "kind", path), f"{path}.kind")
    if kind == "truncated-power-law":
        _check_unknown(block, {"kind", "d_o", "alpha"}, path)
        return PathLossModel.power_law(
            d_o=_as_number(_get(block, "d_o", path), f"{path}.d_o", positive=True),
            alpha=_as_number(_get(block, "alpha", path), f"{path}.alpha", positive=True),
            dimension=dimension,
        )
    if kind == "bounded-cone":
        _check_unknown(block, {"kind", "d_o", "rho", "ell0"}, path)
        return PathLossModel.cone(
            d_o=_as_number(_get(block, "d_o", path), f"{path}.d_o", positive=True),
            rho=_as_number(_get(block, "rho", path), f"{path}.rho", positive=True),
            ell0=_as_number(block.get("ell0", 1.0), f"{path}.ell0", positive=True),
            dimension=dimension,
        )
    raise SchemaError(
        f"{path}.kind", "expected 'truncated-power-law' or 'bounded-cone'"
    )


def _parse_powers(block, path: str) -> PowerDistribution:
    block = _as_map(block, path)
    kind = _as_str(_get(block, "kind", path), f"{path}.kind")
    if kind == "dirac":
        _check_unknown(block, {"kind", "p"}, path)
        return PowerDistribution.dirac(
            _as_number(_get(block, "p", path), f"{path}.p", positive=True)
        )
    if kind == "exponential":
        _check_unknown(block, {"kind", "mean"}, path)
        return PowerDistribution.exponential(
            _as_number(_get(block, "mean", path), f"{path}.mean", positive=True)
        )
    if kind == "pareto":
        _check_unknown(block, {"kind", "shape", "scale"}, path)
        return PowerDistribution.pareto(
            shape=_as_number(_get(block, "shape", path), f"{path}.shape", positive=True),
            scale=_as_number(_get(block, "scale", path), f"{path}.scale", positive=True),
        )
    if kind == "uniform":
        _check_unknown(block, {"kind", "lo", "hi"}, path)
        return PowerDistribution.uniform(
            lo=_as_number(_get(block, "lo", path), f"{path}.lo", nonneg=True),
            hi=_as_number(_get(block, "hi", path), f"{path}.hi", positive=True),
        )
    raise SchemaError(
        f"{path}.kind", "expected 'dirac', 'exponential', 'pareto' or 'uniform'"
    )


def _parse_measure(block, dimension: int, path: str) -> DirectingMeasureSpec:
    block = _as_map(block, path)
    kind = _as_str(_get(block, "kind", path), f"{path}.kind")
    if kind == "lebesgue":
        _check_unknown(block, {"kind"}, path)
        return DirectingMeasureSpec.lebesgue(dimension=dimension)
    if kind == "modulated":
        _check_unknown(
            block, {"kind", "lam_in", "lam_out", "nucleus_intensity", "ball_radius"}, path
        )
        return DirectingMeasureSpec.modulated(
            lam_in=_as_number(_get(block, "lam_in", path), f"{path}.lam_in", nonneg=True),
            lam_out=_as_number(_get(block, "lam_out", path), f"{path}.lam_out", nonneg=True),
            nucleus_intensity=_as_number(
                _get(block, "nucleus_intensity", path),
                f"{path}.nucleus_intensity",
                positive=True,
            ),
            ball_radius=_as_number(
                _get(block, "ball_radius", path), f"{path}.ball_radius", positive=True
            ),
            dimension=dimension,
        )
    if kind == "shot-noise":
        _check_unknown(block, {"kind", "nucleus_intensity", "kernel_radius"}, path)
        return DirectingMeasureSpec.shot_noise(
            nucleus_intensity=_as_number(
                _get(block, "nucleus_intensity", path),
                f"{path}.nucleus_intensity",
                positive=True,
            ),
            kernel_radius=_as_number(
                _get(block, "kernel_radius", path), f"{path}.kernel_radius", positive=True
            ),
            dimension=dimension,
        )
    if kind == "voronoi-edge":
        _check_unknown(block, {"kind", "nucleus_intensity"}, path)
        return DirectingMeasureSpec.voronoi_edge(
            nucleus_intensity=_as_number(
                _get(block, "nucleus_intensity", path),
                f"{path}.nucleus_intensity",
                positive=True,
            ),
            dimension=dimension,
        )
    raise SchemaError(
        f"{path}.kind",
        "expected 'lebesgue', 'modulated', 'shot-noise' or 'voronoi-edge'",
    )


# ---------------------------------------------------------------------------
# experiment registry


@dataclass(frozen=True)
class RunOutput:
    records: list[dict]
    plot_header: list[str]
    plot_rows: list[list]
    meta: dict = field(default_factory=dict)
    failure: str | None = None


def _flat(record: dict) -> dict:
    """Flatten Estimate values into estimate / ci_lo / ci_hi / replicas."""
    out = {}
    for key, value in record.items():
        if isinstance(value, Estimate):
            prefix = "" if key in ("estimate", "crossing") else key + "_"
            out[prefix + "estimate"] = value.value
            out[prefix + "ci_lo"] = value.ci_lo
            out[prefix + "ci_hi"] = value.ci_hi
            out[prefix + "replicas"] = value.replicas
        else:
            out[key] = value
    return out


def _coord_names(dimension: int, suffix: str = "") -> list[str]:
    base = ["x", "y", "z"] + [f"x{k}" for k in range(3, dimension)]
    return [c + suffix for c in base[:dimension]]


def _run_graph_sample(model: ModelConfig, params: dict, ctx: dict) -> RunOutput:
    intensity = params["intensity"]
    side = params["window"]
    gamma = params["gamma"]
    rng = substream(ctx["seed"], "sample")
    config = model.sample(intensity, side, rng)
    table = sinr_pair_table(config, model.pathloss, model.tau, model.noise)
    graph = label_clusters(table.graph_at(gamma))
    degrees = graph.degrees()
    records = []
    for v in range(graph.n_vertices):
        rec = {"vertex": v, "cluster": int(graph.labels[v]), "degree": int(degrees[v])}
        for name, coord in zip(_coord_names(config.dimension), graph.positions[v]):
            rec[name] = float(coord)
        src = graph.source_indices[v] if graph.source_indices is not None else v
        rec["power"] = float(config.powers[src])
        records.append(rec)
    header = ["i", "j"] + _coord_names(config.dimension, "_i") + _coord_names(
        config.dimension, "_j"
    )
    rows = []
    for i, j in graph.edges:
        rows.append(
            [int(i), int(j)]
            + [float(c) for c in graph.positions[i]]
            + [float(c) for c in graph.positions[j]]
        )
    meta = {"n_vertices": graph.n_vertices, "n_edges": graph.n_edges}
    return RunOutput(records=records, plot_header=header, plot_rows=rows, meta=meta)


def _run_degree_sweep(model: ModelConfig, params: dict, ctx: dict) -> RunOutput:
    records = degree_sweep(
        model,
        params["intensity"],
        params["gammas"],
        params["window"],
        ctx["replicas"],
        ctx["seed"],
        workers=ctx["workers"],
    )
    header = ["gamma", "max_degree", "mean_degree", "mean_edges", "degree_bound"]
    rows = [[r[h] for h in header] for r in records]
    return RunOutput(records=[_flat(r) for r in records], plot_header=header, plot_rows=rows)


def _run_crossing_sweep(model: ModelConfig, params: dict, ctx: dict) -> RunOutput:
    records = crossing_sweep(
        model,
        params["intensities"],
        params["gammas"],
        params["windows"],
        ctx["replicas"],
        ctx["seed"],
        workers=ctx["workers"],
    )
    flat = [_flat(r) for r in records]
    header = ["side", "intensity", "gamma", "estimate", "ci_lo", "ci_hi"]
    rows = [[r[h] for h in header] for r in flat]
    return RunOutput(records=flat, plot_header=header, plot_rows=rows)


def _run_lambda_c(model: ModelConfig, params: dict, ctx: dict) -> RunOutput:
    result = estimate_lambda_c_gilbert(
        params["r"],
        params["windows"],
        ctx["replicas"],
        ctx["seed"],
        dimension=model.dimension,
        lam_hint=params.get("hint"),
        workers=ctx["workers"],
    )
    records = [
        {"side": side, "estimate": value, "replicas": result.replicas}
        for side, value in sorted(result.per_window.items())
    ]
    meta = {"value": result.value, "spread": result.spread}
    header = ["side", "estimate"]
    rows = [[r["side"], r["estimate"]] for r in records]
    return RunOutput(records=records, plot_header=header, plot_rows=rows, meta=meta)


def _run_gamma_star(model: ModelConfig, params: dict, ctx: dict) -> RunOutput:
    result = estimate_gamma_star(
        params["intensity"],
        model,
        params["windows"],
        ctx["replicas"],
        ctx["seed"],
        workers=ctx["workers"],
    )
    records = [
        {"side": side, "estimate": value, "replicas": result.replicas}
        for side, value in sorted(result.per_window.items())
    ]
    meta = {
        "value": result.value,
        "spread": result.spread,
        "below_threshold": result.below_threshold,
    }
    header = ["side", "gamma", "crossing_probability"]
    rows = []
    for side in sorted(result.diagnostics):
        for gamma, p in result.diagnostics[side]:
            rows.append([side, gamma, p])
    return RunOutput(records=records, plot_header=header, plot_rows=rows, meta=meta)


def _run_theorem1(model: ModelConfig, params: dict, ctx: dict) -> RunOutput:
    report = theorem1_experiment(
        model,
        ctx["seed"],
        windows=params["windows"],
        replicas=ctx["replicas"],
        intensities=params.get("intensities"),
        attach_renorm=params.get("attach_renorm", True),
        workers=ctx["workers"],
    )
    records = [dict(entry) for entry in report.trace]
    meta = {
        "route": report.route,
        "assumption_violations": report.assumption_violations,
        "witness": _plain(report.witness),
        "renorm_diagnostics": _plain(report.renorm_diagnostics),
    }
    header = ["intensity", "p_zero_gamma", "gamma_witness"]
    rows = [
        [e["intensity"], e["p_zero_gamma"], e.get("gamma", "")] for e in report.trace
    ]
    return RunOutput(records=records, plot_header=header, plot_rows=rows, meta=meta)


def _run_theorem2(model: ModelConfig, params: dict, ctx: dict) -> RunOutput:
    report = theorem2_experiment(
        params["intensities"],
        model,
        params["windows"],
        ctx["replicas"],
        ctx["seed"],
        workers=ctx["workers"],
    )
    flat = [_flat(r) for r in report.grid]
    meta = {
        "gamma": report.gamma,
        "degree_violations": report.degree_violations,
        "crossing_monotone_in_window": report.crossing_monotone_in_window,
        "largest_cluster_sublinear": report.largest_cluster_sublinear,
    }
    header = [
        "intensity",
        "side",
        "estimate",
        "ci_lo",
        "ci_hi",
        "max_degree",
        "mean_largest",
        "paths",
        "cycles",
    ]
    rows = [[r[h] for h in header] for r in flat]
    failure = None
    if report.degree_violations:
        failure = f"degree bound violated in {report.degree_violations} replicas"
    return RunOutput(
        records=flat, plot_header=header, plot_rows=rows, meta=meta, failure=failure
    )


def _run_theorem3(model: ModelConfig, params: dict, ctx: dict) -> RunOutput:
    report = theorem3_experiment(
        model,
        params["windows"],
        ctx["replicas"],
        ctx["seed"],
        multipliers=tuple(params.get("multipliers", (1.05, 1.2, 1.5))),
        subcritical_factor=params.get("subcritical_factor", 0.8),
        workers=ctx["workers"],
    )
    records = []
    header = ["role", "multiplier", "intensity", "gamma", "estimate", "ci_lo", "ci_hi"]
    rows = []
    for w in report.witnesses:
        rec = {
            "role": "witness",
            "multiplier": w["multiplier"],
            "intensity": w["intensity"],
            "p_zero_gamma": w["p_zero_gamma"],
        }
        if w["witness"] is not None:
            rec["gamma"] = w["witness"]["gamma"]
            rec["crossing"] = w["witness"]["crossing"]
            est = w["witness"]["crossing"]
            rows.append(
                [
                    "witness",
                    w["multiplier"],
                    w["intensity"],
                    w["witness"]["gamma"],
                    est.value,
                    est.ci_lo,
                    est.ci_hi,
                ]
            )
        else:
            rows.append(
                ["witness", w["multiplier"], w["intensity"], "", "", "", ""]
            )
        records.append(_flat(rec))
    sub = report.subcritical
    est = sub["crossing"]
    records.append(
        _flat(
            {
                "role": "subcritical",
                "multiplier": sub["multiplier"],
                "intensity": sub["intensity"],
                "gamma": 0.0,
                "crossing": est,
            }
        )
    )
    rows.append(
        [
            "subcritical",
            sub["multiplier"],
            sub["intensity"],
            0.0,
            est.value,
            est.ci_lo,
            est.ci_hi,
        ]
    )
    meta = {
        "r_b": report.r_b,
        "lambda_c": report.lambda_c.value,
        "lambda_c_per_window": {
            repr(k): v for k, v in sorted(report.lambda_c.per_window.items())
        },
        "stability": report.stability,
        "bracket": list(report.bracket) if report.bracket else None,
        "bracket_deviation": report.bracket_deviation,
    }
    return RunOutput(records=records, plot_header=header, plot_rows=rows, meta=meta)


def _run_renorm_scan(model: ModelConfig, params: dict, ctx: dict) -> RunOutput:
    rng = substream(ctx["seed"], "sample")
    config = model.sample(params["intensity"], params["window"], rng)
    rp = RenormParams(
        n=params.get("n", 1),
        r=params["r"],
        r_o=params["r_o"],
        cap=params["cap"],
        intensity=params["intensity"],
    )
    sinr = SinrParams(tau=model.tau, noise=model.noise, gamma=params["gamma"])
    report = nice_site_scan(
        rp, config, params["gamma"], model.pathloss, sinr, measure=model.measure
    )
    lattice = report.lattice
    records = []
    for s in range(len(lattice.sites)):
        rec = {
            "good": bool(lattice.good[s]),
            "tame": bool(lattice.tame[s]),
            "nice": bool(lattice.nice[s]),
        }
        for name, coord in zip(_coord_names(config.dimension, "_site"), lattice.sites[s]):
            rec[name] = int(coord)
        records.append(rec)
    meta = {
        "sites": len(lattice.sites),
        "good_count": int(lattice.good.sum()),
        "tame_count": int(lattice.tame.sum()),
        "nice_count": int(lattice.nice.sum()),
        "stabilization_evaluated": lattice.stabilization_evaluated,
        "lattice_crossing": report.crossing,
        "checked_pairs": report.checked_pairs,
        "violations": report.violations,
    }
    header = _coord_names(config.dimension, "_site") + ["good", "tame", "nice"]
    rows = [
        [int(c) for c in lattice.sites[s]]
        + [int(lattice.good[s]), int(lattice.tame[s]), int(lattice.nice[s])]
        for s in range(len(lattice.sites))
    ]
    failure = None
    if report.violations:
        failure = f"edge preservation violated for {report.violations} pairs"
    return RunOutput(
        records=records, plot_header=header, plot_rows=rows, meta=meta, failure=failure
    )


@dataclass(frozen=True)
class ExperimentKind:
    name: str
    description: str
    required: dict
    optional: dict
    runner: object


def _params_schema(kind: ExperimentKind, block, path: str = "params") -> dict:
    block = _as_map(block, path)
    _check_unknown(block, set(kind.required) | set(kind.optional), path)
    out: dict = {}
    for key, check in kind.required.items():
        out[key] = check(_get(block, key, path), f"{path}.{key}")
    for key, check in kind.optional.items():
        if key in block and block[key] is not None:
            out[key] = check(block[key], f"{path}.{key}")
    return out


def _pos(value, path):
    return _as_number(value, path, positive=True)


def _nonneg(value, path):
    return _as_number(value, path, nonneg=True)


def _pos_list(value, path):
    return _as_number_list(value, path, positive=True)


def _nonneg_list(value, path):
    return _as_number_list(value, path, nonneg=True)


def _posint(value, path):
    return _as_int(value, path, minimum=1)


def _bool(value, path):
    if not isinstance(value, bool):
        raise SchemaError(path, "expected a boolean")
    return value


EXPERIMENTS: dict[str, ExperimentKind] = {
    kind.name: kind
    for kind in [
        ExperimentKind(
            "graph-sample",
            "one realization's interference graph: vertices, clusters, edge list",
            {"intensity": _pos, "window": _pos, "gamma": _nonneg},
            {},
            _run_graph_sample,
        ),
        ExperimentKind(
            "degree-sweep",
            "degree statistics along a gamma grid on one window",
            {"intensity": _pos, "window": _pos, "gammas": _nonneg_list},
            {},
            _run_degree_sweep,
        ),
        ExperimentKind(
            "crossing-sweep",
            "crossing probability over an intensity x gamma x window grid",
            {"intensities": _pos_list, "gammas": _nonneg_list, "windows": _pos_list},
            {},
            _run_crossing_sweep,
        ),
        ExperimentKind(
            "lambda-c",
            "critical intensity of the constant-radius distance graph",
            {"r": _pos, "windows": _pos_list},
            {"hint": _pos},
            _run_lambda_c,
        ),
        ExperimentKind(
            "gamma-star",
            "bisection for the half-crossing cancellation factor at fixed intensity",
            {"intensity": _pos, "windows": _pos_list},
            {},
            _run_gamma_star,
        ),
        ExperimentKind(
            "theorem1",
            "search for a supercritical intensity with positive cancellation",
            {"windows": _pos_list},
            {"intensities": _pos_list, "attach_renorm": _bool},
            _run_theorem1,
        ),
        ExperimentKind(
            "theorem2",
            "degree census and cluster growth at the factor 1/(2 tau)",
            {"intensities": _pos_list, "windows": _pos_list},
            {},
            _run_theorem2,
        ),
        ExperimentKind(
            "theorem3",
            "threshold continuity against the distance-graph critical intensity",
            {"windows": _pos_list},
            {"multipliers": _pos_list, "subcritical_factor": _pos},
            _run_theorem3,
        ),
        ExperimentKind(
            "renorm-scan",
            "good/tame/nice block lattice and edge-preservation audit",
            {
                "intensity": _pos,
                "window": _pos,
                "r": _pos,
                "r_o": _pos,
                "cap": _pos,
                "gamma": _nonneg,
            },
            {"n": _posint},
            _run_renorm_scan,
        ),
    ]
}


# ---------------------------------------------------------------------------
# output serialization


def _plain(obj):
    """Recursively convert to JSON-safe builtins with finite-float discipline."""
    if obj is None or isinstance(obj, (bool, int, str)):
        return obj
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else repr(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return _plain(float(obj))
    if isinstance(obj, np.ndarray):
        return [_plain(v) for v in obj.tolist()]
    if isinstance(obj, Estimate):
        return {
            "estimate": obj.value,
            "ci_lo": obj.ci_lo,
            "ci_hi": obj.ci_hi,
            "replicas": obj.replicas,
        }
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    raise TypeError(f"cannot serialize {type(obj).__name__}")


def _fmt_cell(value) -> str:
    if isinstance(value, bool):
        return "1" if value else "0"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _write_outputs(out_dir: Path, config: dict, output: RunOutput) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    config_blob = json.dumps(_plain(config), sort_keys=True, separators=(",", ":"))
    config_hash = hashlib.sha256(config_blob.encode()).hexdigest()
    results = {
        "tool_version": __version__,
        "config_sha256": config_hash,
        "config": _plain(config),
        "seed": config["seed"],
        "seed_scheme": "per-replica substreams derived from the master seed",
        "meta": _plain(output.meta),
        "failure": output.failure,
        "records": _plain(output.records),
    }
    blob = json.dumps(results, sort_keys=True, indent=2)
    (out_dir / "results.json").write_text(blob + "\n", newline="\n")
    lines = [
        f"# tool_version: {__version__}",
        f"# config_sha256: {config_hash}",
        "\t".join(output.plot_header),
    ]
    for row in output.plot_rows:
        lines.append("\t".join(_fmt_cell(v) for v in row))
    (out_dir / "plot.tsv").write_text("\n".join(lines) + "\n", newline="\n")


# ---------------------------------------------------------------------------
# entry points


def run_config(config: dict, out_dir: Path) -> int:
    """Validate, run, and write outputs; returns the process exit code."""
    try:
        top = _as_map(config, "config")
        _check_unknown(
            top,
            {"experiment", "seed", "replicas", "workers", "out", "model", "params"},
            "config",
        )
        name = _as_str(_get(top, "experiment", "config"), "config.experiment")
        if name not in EXPERIMENTS:
            known = ", ".join(sorted(EXPERIMENTS))
            raise SchemaError(
                "config.experiment", f"unknown experiment kind '{name}'; valid kinds: {known}"
            )
        kind = EXPERIMENTS[name]
        seed = _as_int(_get(top, "seed", "config"), "config.seed", minimum=0)
        replicas = _as_int(top.get("replicas", 100), "config.replicas", minimum=1)
        # worker count is an execution detail: it never affects results, so
        # it stays out of the config echo and hash
        workers = _as_int(top.pop("workers", 1), "config.workers", minimum=1)
        model = parse_model(_get(top, "model", "config"))
        params = _params_schema(kind, top.get("params", {}))
    except SchemaError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    ctx = {"seed": seed, "replicas": replicas, "workers": workers}
    started = time.perf_counter()
    try:
        output = kind.runner(model, params, ctx)
    except (ValueError, AssertionError, BracketError) as exc:
        output = RunOutput(
            records=[],
            plot_header=["empty"],
            plot_rows=[],
            failure=f"{type(exc).__name__}: {exc}",
        )
    elapsed = time.perf_counter() - started
    _write_outputs(out_dir, config, output)
    print(f"{name}: wrote {out_dir / 'results.json'} and {out_dir / 'plot.tsv'}")
    print(f"wall-clock: {elapsed:.2f} s")
    if output.failure is not None:
        print(f"invariant violation: {output.failure}", file=sys.stderr)
        return 3
    return 0


def _cmd_run(args) -> int:
    path = Path(args.config)
    try:
        text = path.read_text()
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return 2
    try:
        config = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        print(f"config parse error: {exc}", file=sys.stderr)
        return 2
    if not isinstance(config, dict):
        print("config error: top level must be a mapping", file=sys.stderr)
        return 2
    if args.seed is not None:
        config["seed"] = args.seed
    if args.replicas is not None:
        config["replicas"] = args.replicas
    out_dir = Path(args.out) if args.out is not None else Path(config.get("out", "."))
    config.pop("out", None)  # location never affects results content
    return run_config(config, out_dir)


def _cmd_list(_args) -> int:
    for name in sorted(EXPERIMENTS):
        kind = EXPERIMENTS[name]
        req = ", ".join(sorted(kind.required)) or "-"
        opt = ", ".join(sorted(kind.optional))
        line = f"{name}: {kind.description} (params: {req}"
        if opt:
            line += f"; optional: {opt}"
        print(line + ")")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="sinrlab", description="interference-graph percolation experiments"
    )
    sub = parser.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run an experiment described by a YAML config")
    runp.add_argument("config", help="path to the YAML experiment config")
    runp.add_argument("--seed", type=int, default=None, help="override the master seed")
    runp.add_argument("--out", default=None, help="override the output directory")
    runp.add_argument(
        "--replicas", type=int, default=None, help="override the replica count"
    )
    runp.set_defaults(func=_cmd_run)
    listp = sub.add_parser("list", help="list available experiment kinds")
    listp.set_defaults(func=_cmd_list)
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
