"""Configuration-driven command line front end.

One JSON document describes an experiment: the domain (a named preset or
four CSV point files), the grid, the generation method and the training
settings.  Subcommands reproduce the standard experiment shapes:

    elastimesh generate --config run.json [--profile desk|paper] [--seed N]
    elastimesh compare  --config run.json
    elastimesh ablate   --config run.json --axis governing|activation
    elastimesh export   --config run.json     (mesh_csv + format fields)
    elastimesh report   --config run.json     (mesh_csv field)

Exit codes: 0 success, 2 configuration or input error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from . import geometry, hardbc, meshcore, network, presets, tfi, training
from .errors import ElastimeshError, NumericError
from .pde import GOVERNING_EQUATIONS, LameConstants

METHODS = ("tfi", "pinn", "pinn+hardbc")
ACTIVATION_ORDER = ("sigmoid", "relu", "leakyrelu", "tanh", "elu", "selu")
COMPARE_COLUMNS = ("model", "method", "avg_min_angle", "avg_max_angle",
                   "gen_time_s", "avg_cell_area", "inverted_cells")


class ConfigError(Exception):
    """Invalid configuration; carries the dotted field path."""

    def __init__(self, path: str, message: str):
        self.field_path = path
        super().__init__(f"{path}: {message}")


# ---------------------------------------------------------------------------
# Config parsing
# ---------------------------------------------------------------------------

def load_config(path) -> dict:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError("(file)", f"cannot read config: {exc}") from exc
    try:
        cfg = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("(file)", f"invalid JSON: {exc}") from exc
    if not isinstance(cfg, dict):
        raise ConfigError("(root)", "config must be a JSON object")
    return cfg


def _field(cfg: dict, path: str, typ, default=...):
    node = cfg
    parts = path.split(".")
    for p in parts[:-1]:
        node = node.get(p, {}) if isinstance(node, dict) else {}
    if not isinstance(node, dict) or parts[-1] not in node:
        if default is ...:
            raise ConfigError(path, "required field is missing")
        return default
    value = node[parts[-1]]
    if typ is float and isinstance(value, int):
        value = float(value)
    if not isinstance(value, typ):
        raise ConfigError(path, f"expected {typ.__name__}, got {type(value).__name__}")
    return value


def build_domain(cfg: dict):
    """DomainSpec plus a short model label from the config's domain section."""
    dom = _field(cfg, "domain", dict)
    if "preset" in dom:
        name = _field(cfg, "domain.preset", str)
        params = _field(cfg, "domain.params", dict, {})
        try:
            return presets.make_domain(name, **params), name
        except TypeError as exc:
            raise ConfigError("domain.params", str(exc)) from exc
        except ElastimeshError as exc:
            raise ConfigError("domain", str(exc)) from exc
    if "csv" in dom:
        files = _field(cfg, "domain.csv", dict)
        fit = _field(cfg, "domain.fit", dict, {})
        curves = {}
        for side in geometry.CURVE_ORDER:
            path = _field(cfg, f"domain.csv.{side}", str)
            if not Path(path).exists():
                raise ConfigError(f"domain.csv.{side}", f"file not found: {path}")
            pts = geometry.read_points_csv(path)
            if fit.get("mode", "fit") == "polyline":
                curves[side] = geometry.polyline_curve(pts)
            else:
                curves[side] = geometry.fit_boundary_curve(
                    pts,
                    kernel_width=_field(cfg, "domain.fit.kernel_width", float, 0.2),
                    regularization=_field(cfg, "domain.fit.regularization", float, 1e-6),
                    epsilon=_field(cfg, "domain.fit.epsilon", float, 0.0),
                )
        spec = geometry.DomainSpec(names=tuple(files.get(s, s) for s in geometry.CURVE_ORDER),
                                   **curves)
        return spec, "custom"
    raise ConfigError("domain", "must contain either 'preset' or 'csv'")


def build_train_config(cfg: dict, profile: str | None, seed: int | None) -> training.TrainConfig:
    ni = _field(cfg, "grid.ni", int)
    nj = _field(cfg, "grid.nj", int)
    if ni < 2 or nj < 2:
        raise ConfigError("grid", "ni and nj must be >= 2")
    tcfg = training.TrainConfig(ni=ni, nj=nj)
    if profile is not None:
        tcfg = training.apply_profile(tcfg, profile)
    tr = _field(cfg, "train", dict, {})
    scalars = {
        "epochs": int, "lr0": float, "decay": float, "optimizer": str,
        "beta1": float, "beta2": float, "eps": float, "governing": str,
        "interior_weight": float, "seed": int, "depth": int, "width": int,
        "activation": str, "history_stride": int,
    }
    updates = {}
    for key, typ in scalars.items():
        if key in tr:
            updates[key] = _field(cfg, f"train.{key}", typ)
    if "lame" in tr:
        updates["lame"] = LameConstants(
            lam=_field(cfg, "train.lame.lam", float, 1.0),
            mu=_field(cfg, "train.lame.mu", float, 0.35),
        )
    if seed is not None:
        updates["seed"] = seed
    try:
        return replace(tcfg, **updates)
    except ElastimeshError as exc:
        raise ConfigError("train", str(exc)) from exc


def _output_dir(cfg: dict) -> Path:
    out = Path(_field(cfg, "output_dir", str, "elastimesh_out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


# ---------------------------------------------------------------------------
# Shared steps
# ---------------------------------------------------------------------------

def _produce_mesh(method: str, domain, tcfg: training.TrainConfig):
    """Mesh plus timing for one method; pinn timings split train/generate."""
    grid = meshcore.uniform_comp_grid(tcfg.ni, tcfg.nj)
    if method == "tfi":
        t0 = time.perf_counter()
        mesh = tfi.tfi_generate(domain, tcfg.ni, tcfg.nj)
        return mesh, {"gen_time_s": time.perf_counter() - t0,
                      "train_time_s": 0.0, "history": None, "model": None}
    t0 = time.perf_counter()
    model, weights, history = training.train(domain, tcfg)
    train_time = time.perf_counter() - t0
    t1 = time.perf_counter()
    mesh = training.generate_mesh(model, grid)
    if method == "pinn+hardbc":
        mesh = hardbc.apply_hard_bc(mesh, domain)
    gen_time = time.perf_counter() - t1
    return mesh, {"gen_time_s": gen_time, "train_time_s": train_time,
                  "history": history, "model": model, "boundary_weights": weights}


def _report_dict(report: meshcore.QualityReport) -> dict:
    return {
        "avg_min_angle": report.avg_min_angle,
        "avg_max_angle": report.avg_max_angle,
        "avg_cell_area": report.avg_cell_area,
        "inverted_cells": report.inverted_cells,
        "generation_time": report.generation_time,
    }


def _format_table(header: list[str], rows: list[list[str]]) -> str:
    widths = [max(len(h), *(len(r[i]) for r in rows)) if rows else len(h)
              for i, h in enumerate(header)]
    def fmt(row):
        return "  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip()
    lines = [fmt(header), fmt(["-" * w for w in widths])]
    lines.extend(fmt(r) for r in rows)
    return "\n".join(lines)


def _g(v: float) -> str:
    return format(float(v), ".10g")


# ---------------------------------------------------------------------------
# Commands
# ---------------------------------------------------------------------------

def run_generate(cfg: dict, profile: str | None, seed: int | None) -> dict:
    domain, label = build_domain(cfg)
    tcfg = build_train_config(cfg, profile, seed)
    method = _field(cfg, "method", str, "pinn+hardbc")
    if method not in METHODS:
        raise ConfigError("method", f"must be one of {', '.join(METHODS)}")
    out = _output_dir(cfg)

    mesh, info = _produce_mesh(method, domain, tcfg)
    tag = method.replace("+", "_")
    artifacts = {}

    vtk_path = out / f"mesh_{tag}.vtk"
    csv_path = out / f"mesh_{tag}.csv"
    meshcore.export_vtk(mesh, vtk_path)
    meshcore.export_csv(mesh, csv_path)
    artifacts["vtk"] = vtk_path
    artifacts["csv"] = csv_path

    report = meshcore.quality_report(mesh, elapsed=info["gen_time_s"])
    payload = {"model": label, "method": method, "ni": tcfg.ni, "nj": tcfg.nj,
               "train_time_s": info["train_time_s"], **_report_dict(report)}
    report_path = out / f"quality_{tag}.json"
    report_path.write_text(json.dumps(payload, indent=2) + "\n", encoding="utf-8")
    artifacts["report"] = report_path

    if info["history"] is not None:
        loss_path = out / f"loss_{tag}.csv"
        training.write_loss_history(info["history"], loss_path)
        artifacts["loss"] = loss_path
        model_path = out / f"model_{tag}.npz"
        network.save_model(info["model"], model_path)
        artifacts["model"] = model_path

    print(f"{label} [{method}]  min/max angle {report.avg_min_angle:.2f}/"
          f"{report.avg_max_angle:.2f}  inverted {report.inverted_cells}  -> {out}")
    return artifacts


def run_compare(cfg: dict, profile: str | None, seed: int | None) -> list[dict]:
    domain, label = build_domain(cfg)
    tcfg = build_train_config(cfg, profile, seed)
    methods = cfg.get("compare", {}).get("methods", ["tfi", "pinn+hardbc"])
    for m in methods:
        if m not in METHODS:
            raise ConfigError("compare.methods", f"unknown method {m!r}")
    out = _output_dir(cfg)

    rows = []
    for method in methods:
        mesh, info = _produce_mesh(method, domain, tcfg)
        report = meshcore.quality_report(mesh, elapsed=info["gen_time_s"])
        rows.append({"model": label, "method": method,
                     "train_time_s": info["train_time_s"], **_report_dict(report)})

    csv_lines = [",".join(COMPARE_COLUMNS)]
    table_rows = []
    for r in rows:
        values = [r["model"], r["method"], _g(r["avg_min_angle"]), _g(r["avg_max_angle"]),
                  f"{r['generation_time']:.6f}", _g(r["avg_cell_area"]),
                  str(r["inverted_cells"])]
        csv_lines.append(",".join(values))
        table_rows.append(values)
    (out / "compare.csv").write_text("\n".join(csv_lines) + "\n", encoding="utf-8")

    print(_format_table(list(COMPARE_COLUMNS), table_rows))
    for r in rows:
        if r["train_time_s"]:
            print(f"# {r['method']} training time: {r['train_time_s']:.3f} s")
    return rows


def run_ablate(cfg: dict, axis: str, profile: str | None, seed: int | None) -> list[dict]:
    if axis not in ("governing", "activation"):
        raise ConfigError("axis", "must be 'governing' or 'activation'")
    domain, label = build_domain(cfg)
    tcfg = build_train_config(cfg, profile, seed)
    out = _output_dir(cfg)

    variants = GOVERNING_EQUATIONS if axis == "governing" else ACTIVATION_ORDER
    rows = []
    for variant in variants:
        run_cfg = replace(tcfg, **{axis: variant})
        row = {"model": label, axis: variant}
        try:
            model, _, history = training.train(domain, run_cfg)
            row["final_loss"] = history[-1].total
            if axis == "activation":
                grid = meshcore.uniform_comp_grid(run_cfg.ni, run_cfg.nj)
                mesh = hardbc.apply_hard_bc(training.generate_mesh(model, grid), domain)
                row["avg_max_angle"] = meshcore.quality_report(mesh).avg_max_angle
        except NumericError:
            row["final_loss"] = float("nan")
            if axis == "activation":
                row["avg_max_angle"] = float("nan")
            row["note"] = "diverged"
        rows.append(row)

    columns = [axis, "final_loss"] + (["avg_max_angle"] if axis == "activation" else [])
    csv_lines = [",".join(columns)]
    table_rows = []
    for r in rows:
        values = [str(r[axis])] + [_g(r[c]) for c in columns[1:]]
        csv_lines.append(",".join(values))
        table_rows.append(values)
    (out / f"ablation_{axis}.csv").write_text("\n".join(csv_lines) + "\n", encoding="utf-8")
    print(_format_table(columns, table_rows))
    best = min(rows, key=lambda r: r["final_loss"] if np.isfinite(r["final_loss"]) else np.inf)
    print(f"# lowest final loss: {best[axis]} ({_g(best['final_loss'])}); "
          "ordering is reported, not asserted")
    return rows


def run_export(cfg: dict) -> Path:
    mesh_csv = _field(cfg, "mesh_csv", str)
    fmt = _field(cfg, "format", str)
    if fmt not in ("vtk", "csv"):
        raise ConfigError("format", f"unknown format {fmt!r} (expected 'vtk' or 'csv')")
    if not Path(mesh_csv).exists():
        raise ConfigError("mesh_csv", f"file not found: {mesh_csv}")
    mesh = meshcore.import_mesh_csv(mesh_csv)
    out = _output_dir(cfg) / (Path(mesh_csv).stem + "." + fmt)
    if fmt == "vtk":
        meshcore.export_vtk(mesh, out)
    else:
        meshcore.export_csv(mesh, out)
    print(f"wrote {out}")
    return out


def run_report(cfg: dict) -> meshcore.QualityReport:
    mesh_csv = _field(cfg, "mesh_csv", str)
    if not Path(mesh_csv).exists():
        raise ConfigError("mesh_csv", f"file not found: {mesh_csv}")
    mesh = meshcore.import_mesh_csv(mesh_csv)
    report = meshcore.quality_report(mesh)
    print(_format_table(
        ["nodes", "cells", "avg_min_angle", "avg_max_angle", "avg_cell_area", "inverted"],
        [[str(mesh.ni * mesh.nj), str((mesh.ni - 1) * (mesh.nj - 1)),
          _g(report.avg_min_angle), _g(report.avg_max_angle),
          _g(report.avg_cell_area), str(report.inverted_cells)]]))
    return report


# ---------------------------------------------------------------------------
# Entry point
# ---------------------------------------------------------------------------

def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="elastimesh",
        description="Structured quad mesh generation for 2D domains.")
    sub = parser.add_subparsers(dest="command", required=True)
    for name, help_text in (
            ("generate", "generate a mesh and its quality report"),
            ("compare", "compare the algebraic and trained generators"),
            ("ablate", "sweep governing equations or activations"),
            ("export", "convert a mesh CSV to another format"),
            ("report", "quality report of a mesh CSV")):
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", required=True, help="path to the JSON config")
        p.add_argument("--profile", choices=sorted(training.PROFILES), default=None,
                       help="training size profile override")
        p.add_argument("--seed", type=int, default=None, help="seed override")
        if name == "ablate":
            p.add_argument("--axis", required=True, choices=["governing", "activation"])
    return parser


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        cfg = load_config(args.config)
        if args.command == "generate":
            run_generate(cfg, args.profile, args.seed)
        elif args.command == "compare":
            run_compare(cfg, args.profile, args.seed)
        elif args.command == "ablate":
            run_ablate(cfg, args.axis, args.profile, args.seed)
        elif args.command == "export":
            run_export(cfg)
        elif args.command == "report":
            run_report(cfg)
        return 0
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except NumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 3
    except ElastimeshError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
