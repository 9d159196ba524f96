"""Result files: tables, P-function grids, density matrices and the run manifest.

CSV files have a header row and LF line endings, floats are written with 17
significant digits. JSON files use the shortest repr that round-trips, so
repeated runs produce identical bytes.
"""

import csv
import json
from pathlib import Path
from typing import Any, Dict, Iterable, List, Literal, Sequence

import numpy as np

from . import __version__, _log
from .convert import format_number
from .pfunc import GridSpec, PhaseSpaceMixture

Format = Literal["csv", "json"]
FORMATS = ("csv", "json")


def _cell(value: Any) -> Any:
    if isinstance(value, (float, np.floating)):
        return format_number(float(value))
    return value


def _json_value(value: Any) -> Any:
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, complex):
        return [value.real, value.imag]
    return value


def _dump_json(path: Path, document: Dict[str, Any]) -> None:
    with path.open("w") as f:
        json.dump(document, f, indent=2, default=_json_value)
        f.write("\n")


def write_table(
    path: Path, header: Sequence[str], rows: Iterable[Sequence[Any]], fmt: Format
) -> Path:
    """Write rows under `header`; `path` gets the suffix of the format."""
    target = path.with_suffix(f".{fmt}")
    materialized = [list(row) for row in rows]
    if fmt == "csv":
        with target.open("w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(header)
            writer.writerows([_cell(v) for v in row] for row in materialized)
    else:
        records = [
            {name: _json_value(v) for name, v in zip(header, row)}
            for row in materialized
        ]
        _dump_json(target, {"columns": list(header), "rows": records})
    _log.info("wrote %(path)s", {"path": target})
    return target


def write_grid(
    path: Path,
    grid: GridSpec,
    values: np.ndarray,
    P: PhaseSpaceMixture,
    fmt: Format,
) -> Path:
    """Write P on the grid, plus its delta terms which are not rasterized."""
    target = path.with_suffix(f".{fmt}")
    deltas = [
        {"c": d.c, "re": d.z.real, "im": d.z.imag} for d in P.deltas
    ]
    if fmt == "csv":
        with target.open("w", newline="") as f:
            writer = csv.writer(f, lineterminator="\n")
            writer.writerow(["re", "im", "value"])
            for im, row in zip(grid.im_axis, values):
                for re, value in zip(grid.re_axis, row):
                    writer.writerow([_cell(re), _cell(im), _cell(value)])
        if deltas:
            write_table(
                path.with_name(f"{path.name}_deltas"),
                ["c", "re", "im"],
                [[d["c"], d["re"], d["im"]] for d in deltas],
                fmt,
            )
    else:
        _dump_json(
            target,
            {
                "grid": {
                    "re": [grid.re_min, grid.re_max],
                    "im": [grid.im_min, grid.im_max],
                    "n_re": grid.n_re,
                    "n_im": grid.n_im,
                },
                "values": values.tolist(),
                "deltas": deltas,
            },
        )
    _log.info("wrote %(path)s", {"path": target})
    return target


def matrix_document(entries: np.ndarray) -> Dict[str, Any]:
    """Row-major [real, imag] pairs of a complex matrix."""
    pairs: List[List[List[float]]] = [
        [[float(v.real), float(v.imag)] for v in row] for row in entries
    ]
    return {"shape": list(entries.shape), "entries": pairs}


def write_matrix(path: Path, entries: np.ndarray) -> Path:
    target = path.with_suffix(".json")
    _dump_json(target, matrix_document(entries))
    _log.info("wrote %(path)s", {"path": target})
    return target


def write_manifest(path: Path, protocol: str, parameters: Dict[str, Any]) -> Path:
    """Echo the resolved parameters of a run together with the library version."""
    target = path / "manifest.json"
    _dump_json(
        target,
        {"clickcraft": __version__, "protocol": protocol, "parameters": parameters},
    )
    _log.info("wrote %(path)s", {"path": target})
    return target
