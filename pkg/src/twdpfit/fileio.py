"""File formats and report serialization.

Formats (all plain text, byte-order independent):

* envelope file: CSV, one nonnegative real per line, optional header line;
* spatial grid: CSV with columns ix,iy,iz,ifreq,re,im plus a JSON header
  sidecar (same stem, .json) carrying spacing, frequency axis and optional
  direction metadata;
* directional scan: CSV with columns idir,ifreq,re,im plus a JSON header
  listing per-direction azimuth/elevation/noise power and the frequency
  axis;
* fit report: versioned JSON validated against REPORT_SCHEMA;
* correlation map: CSV value matrix plus a JSON header with lag axes and
  axis cuts;
* BER curve: CSV (snr_db, ber) plus a JSON metadata sidecar.

All writes are atomic (temp file + rename in the target directory).
"""

from __future__ import annotations

import json
import os
import tempfile
from dataclasses import asdict
from pathlib import Path

import numpy as np
import jsonschema

from .errors import ParseError
from .inference import FitReport, GridConfig, GTestResult, ModelFit
from .linksim import BerCurve
from .measurement import CorrelationMap, DirectionalScan, SpatialGrid

__all__ = [
    "REPORT_SCHEMA",
    "write_text_atomic",
    "read_envelopes",
    "write_envelopes",
    "read_grid",
    "write_grid",
    "read_scan",
    "write_scan",
    "report_to_dict",
    "report_from_dict",
    "write_report",
    "read_report",
    "write_overlay",
    "write_correlation_map",
    "write_ber_curve",
]

_MODEL_FIT_SCHEMA = {
    "type": "object",
    "properties": {
        "model": {"type": "string", "enum": ["rice", "twdp"]},
        "k_hat": {"type": "number", "minimum": 0},
        "delta_hat": {"type": "number", "minimum": 0, "maximum": 1},
        "loglik": {"type": "number"},
        "aicc": {"type": ["number", "null"]},
        "boundary_hit": {"type": "boolean"},
    },
    "required": ["model", "k_hat", "delta_hat", "loglik", "aicc", "boundary_hit"],
    "additionalProperties": False,
}

REPORT_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "properties": {
        "schema_version": {"type": "integer", "const": 1},
        "omega_hat": {"type": "number", "exclusiveMinimum": 0},
        "n_fit": {"type": "integer", "minimum": 1},
        "n_moment": {"type": "integer", "minimum": 1},
        "rice": _MODEL_FIT_SCHEMA,
        "twdp": _MODEL_FIT_SCHEMA,
        "chosen": {"type": "string", "enum": ["rice", "twdp"]},
        "gtest": {
            "type": ["object", "null"],
            "properties": {
                "statistic": {"type": "number"},
                "dof": {"type": "integer", "minimum": 1},
                "threshold": {"type": "number"},
                "verdict": {"type": "string", "enum": ["accepted", "rejected"]},
                "n_cells": {"type": "integer", "minimum": 1},
                "alpha": {"type": "number"},
                "per_cell": {"type": "integer", "minimum": 1},
            },
            "required": ["statistic", "dof", "threshold", "verdict",
                         "n_cells", "alpha", "per_cell"],
            "additionalProperties": False,
        },
        "grid": {
            "type": "object",
            "properties": {
                "k_min": {"type": "number"},
                "k_max": {"type": "number"},
                "k_step": {"type": "number"},
                "delta_step": {"type": "number"},
            },
            "required": ["k_min", "k_max", "k_step", "delta_step"],
            "additionalProperties": False,
        },
    },
    "required": ["schema_version", "omega_hat", "n_fit", "n_moment",
                 "rice", "twdp", "chosen", "gtest", "grid"],
    "additionalProperties": False,
}


# ---------------------------------------------------------------------------
# atomic text output
# ---------------------------------------------------------------------------

def write_text_atomic(path: str | Path, text: str) -> None:
    path = Path(path)
    fd, tmp = tempfile.mkstemp(dir=path.parent or Path("."), prefix=path.name, suffix=".tmp")
    try:
        with os.fdopen(fd, "w") as handle:
            handle.write(text)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def _sidecar(path: str | Path) -> Path:
    return Path(path).with_suffix(".json")


def _load_json(path: Path) -> dict:
    try:
        with open(path) as handle:
            return json.load(handle)
    except FileNotFoundError:
        raise ParseError(f"{path}: missing header file")
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: invalid JSON ({exc})")


# ---------------------------------------------------------------------------
# envelopes
# ---------------------------------------------------------------------------

def read_envelopes(path: str | Path) -> np.ndarray:
    """One nonnegative real per line; a single leading non-numeric line is
    treated as a header."""
    path = Path(path)
    try:
        lines = path.read_text().splitlines()
    except OSError as exc:
        raise ParseError(f"{path}: {exc}")
    values = []
    for lineno, raw in enumerate(lines, start=1):
        text = raw.strip()
        if not text:
            continue
        try:
            val = float(text)
        except ValueError:
            if lineno == 1:
                continue  # header
            raise ParseError(f"{path}:{lineno}: not a number: {text!r}")
        if not np.isfinite(val) or val < 0:
            raise ParseError(f"{path}:{lineno}: envelope must be finite and >= 0")
        values.append(val)
    if not values:
        raise ParseError(f"{path}: no envelope samples found")
    return np.asarray(values)


def write_envelopes(path: str | Path, values: np.ndarray) -> None:
    body = "envelope\n" + "\n".join(repr(float(v)) for v in values) + "\n"
    write_text_atomic(path, body)


# ---------------------------------------------------------------------------
# spatial grid
# ---------------------------------------------------------------------------

def write_grid(path: str | Path, grid: SpatialGrid) -> None:
    nx, ny, nz, nf = grid.shape
    header = {
        "kind": "spatial_grid",
        "shape": [nx, ny, nz, nf],
        "spacing": grid.spacing,
        "freq_axis": (list(map(float, grid.freq_axis))
                      if grid.freq_axis is not None else None),
        "direction": (list(grid.direction) if grid.direction is not None else None),
    }
    write_text_atomic(_sidecar(path), json.dumps(header, sort_keys=True, indent=2) + "\n")
    rows = ["ix,iy,iz,ifreq,re,im"]
    for ix in range(nx):
        for iy in range(ny):
            for iz in range(nz):
                for jf in range(nf):
                    val = grid.h[ix, iy, iz, jf]
                    rows.append(f"{ix},{iy},{iz},{jf},{float(val.real)!r},{float(val.imag)!r}")
    write_text_atomic(path, "\n".join(rows) + "\n")


def read_grid(path: str | Path) -> SpatialGrid:
    path = Path(path)
    header = _load_json(_sidecar(path))
    try:
        nx, ny, nz, nf = header["shape"]
        spacing = float(header["spacing"])
        freq_axis = header.get("freq_axis")
        direction = header.get("direction")
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{_sidecar(path)}: bad grid header ({exc})")
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}")
    if data.shape[1] != 6:
        raise ParseError(f"{path}: expected 6 columns ix,iy,iz,ifreq,re,im")
    if data.shape[0] != nx * ny * nz * nf:
        raise ParseError(f"{path}: row count does not match the header shape")
    h = np.zeros((nx, ny, nz, nf), dtype=complex)
    idx = data[:, :4].astype(int)
    if (idx < 0).any() or (idx >= [nx, ny, nz, nf]).any():
        raise ParseError(f"{path}: index outside the header shape")
    h[idx[:, 0], idx[:, 1], idx[:, 2], idx[:, 3]] = data[:, 4] + 1j * data[:, 5]
    return SpatialGrid(
        h, spacing=spacing,
        freq_axis=np.asarray(freq_axis, dtype=float) if freq_axis is not None else None,
        direction=tuple(direction) if direction is not None else None,
    )


# ---------------------------------------------------------------------------
# directional scan
# ---------------------------------------------------------------------------

def write_scan(path: str | Path, scan: DirectionalScan) -> None:
    header = {
        "kind": "directional_scan",
        "directions": [
            {"azimuth": float(a), "elevation": float(e), "noise_power": float(p)}
            for a, e, p in zip(scan.azimuth, scan.elevation, scan.noise_power)
        ],
        "n_freq": int(scan.samples.shape[1]),
        "freq_axis": (list(map(float, scan.freq_axis))
                      if scan.freq_axis is not None else None),
    }
    write_text_atomic(_sidecar(path), json.dumps(header, sort_keys=True, indent=2) + "\n")
    rows = ["idir,ifreq,re,im"]
    for i in range(scan.n_directions):
        for jf in range(scan.samples.shape[1]):
            val = scan.samples[i, jf]
            rows.append(f"{i},{jf},{float(val.real)!r},{float(val.imag)!r}")
    write_text_atomic(path, "\n".join(rows) + "\n")


def read_scan(path: str | Path) -> DirectionalScan:
    path = Path(path)
    header = _load_json(_sidecar(path))
    try:
        dirs = header["directions"]
        n_freq = int(header["n_freq"])
        azimuth = np.array([d["azimuth"] for d in dirs], dtype=float)
        elevation = np.array([d["elevation"] for d in dirs], dtype=float)
        noise = np.array([d["noise_power"] for d in dirs], dtype=float)
        freq_axis = header.get("freq_axis")
    except (KeyError, TypeError, ValueError) as exc:
        raise ParseError(f"{_sidecar(path)}: bad scan header ({exc})")
    try:
        data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    except (OSError, ValueError) as exc:
        raise ParseError(f"{path}: {exc}")
    if data.shape[1] != 4:
        raise ParseError(f"{path}: expected 4 columns idir,ifreq,re,im")
    if data.shape[0] != len(dirs) * n_freq:
        raise ParseError(f"{path}: row count does not match the header")
    samples = np.zeros((len(dirs), n_freq), dtype=complex)
    idx = data[:, :2].astype(int)
    if (idx < 0).any() or (idx >= [len(dirs), n_freq]).any():
        raise ParseError(f"{path}: index outside the header shape")
    samples[idx[:, 0], idx[:, 1]] = data[:, 2] + 1j * data[:, 3]
    return DirectionalScan(azimuth, elevation, samples, noise,
                           freq_axis=(np.asarray(freq_axis, dtype=float)
                                      if freq_axis is not None else None))


# ---------------------------------------------------------------------------
# fit reports
# ---------------------------------------------------------------------------

def report_to_dict(report: FitReport) -> dict:
    doc = {
        "schema_version": report.schema_version,
        "omega_hat": report.omega_hat,
        "n_fit": report.n_fit,
        "n_moment": report.n_moment,
        "rice": asdict(report.rice),
        "twdp": asdict(report.twdp),
        "chosen": report.chosen,
        "gtest": asdict(report.gtest) if report.gtest is not None else None,
        "grid": asdict(report.grid),
    }
    jsonschema.validate(doc, REPORT_SCHEMA)
    return doc


def report_from_dict(doc: dict) -> FitReport:
    jsonschema.validate(doc, REPORT_SCHEMA)
    return FitReport(
        omega_hat=doc["omega_hat"],
        n_fit=doc["n_fit"],
        n_moment=doc["n_moment"],
        rice=ModelFit(**doc["rice"]),
        twdp=ModelFit(**doc["twdp"]),
        chosen=doc["chosen"],
        gtest=GTestResult(**doc["gtest"]) if doc["gtest"] is not None else None,
        grid=GridConfig(**doc["grid"]),
        schema_version=doc["schema_version"],
    )


def write_report(path: str | Path, report: FitReport) -> None:
    doc = report_to_dict(report)
    write_text_atomic(path, json.dumps(doc, sort_keys=True, indent=2) + "\n")


def read_report(path: str | Path) -> FitReport:
    doc = _load_json(Path(path))
    try:
        return report_from_dict(doc)
    except jsonschema.ValidationError as exc:
        raise ParseError(f"{path}: report does not match the schema ({exc.message})")


# ---------------------------------------------------------------------------
# plot-ready tables
# ---------------------------------------------------------------------------

def write_overlay(path: str | Path, table: dict[str, np.ndarray]) -> None:
    """CDF overlay table: column name -> column values, equal lengths."""
    names = list(table)
    columns = [np.asarray(table[name], dtype=float) for name in names]
    n = len(columns[0])
    rows = [",".join(names)]
    for i in range(n):
        rows.append(",".join(repr(float(col[i])) for col in columns))
    write_text_atomic(path, "\n".join(rows) + "\n")


def write_correlation_map(path: str | Path, cmap: CorrelationMap) -> None:
    header = {
        "kind": "correlation_map",
        "lag_unit": "wavelengths",
        "lag_x": list(map(float, cmap.lag_x)),
        "lag_y": list(map(float, cmap.lag_y)),
        "cut_x": list(map(float, cmap.cut_x)),
        "cut_y": list(map(float, cmap.cut_y)),
    }
    write_text_atomic(_sidecar(path), json.dumps(header, sort_keys=True, indent=2) + "\n")
    rows = [",".join(repr(float(v)) for v in row) for row in cmap.values]
    write_text_atomic(path, "\n".join(rows) + "\n")


def write_ber_curve(path: str | Path, curve: BerCurve) -> None:
    meta = {
        "kind": "ber_curve",
        "k": curve.params.k,
        "delta": curve.params.delta,
        "omega": curve.params.omega,
        "n_symbols": curve.n_symbols,
        "seed": curve.seed,
    }
    write_text_atomic(_sidecar(path), json.dumps(meta, sort_keys=True, indent=2) + "\n")
    rows = ["snr_db,ber"]
    for s, b in zip(curve.snr_db, curve.ber):
        rows.append(f"{float(s)!r},{float(b)!r}")
    write_text_atomic(path, "\n".join(rows) + "\n")
