"""
CSV and VTK writers for run outputs.

CSV files carry one header row and numbers with 17 significant digits,
enough to round-trip a double. VTK output is legacy ASCII on the mesh
obtained by splitting every cubic cell into nine P1 triangles.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Any, Dict, Iterable, List, Sequence, Union

import meshio
import numpy as np

from ..fem.forms import bracket
from ..fem.space import PlateState
from ..models.report import Profile
from ..performance import track_performance
from .fields import nodal_derivatives, radial_stress_from_hessian, subsampled_triangles

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


def format_number(value: Any) -> str:
    if isinstance(value, (bool, np.bool_)):
        return str(bool(value)).lower()
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return format(float(value), ".17g")
    return "" if value is None else str(value)


def write_csv(path: PathLike, header: Sequence[str], rows: Iterable[Sequence[Any]]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as f:
        writer = csv.writer(f)
        writer.writerow(list(header))
        for row in rows:
            writer.writerow([format_number(x) for x in row])
    logger.debug("wrote %s", path)
    return path


def write_records_csv(path: PathLike, records: List[Dict[str, Any]]) -> Path:
    """One row per record; the header is the key order of the first record."""
    header = list(records[0].keys()) if records else []
    return write_csv(path, header, ([record.get(k) for k in header] for record in records))


def write_profiles_csv(path: PathLike, profiles: Sequence[Profile]) -> Path:
    """Profiles sharing one abscissa column ``xi1``."""
    if not profiles:
        return write_csv(path, ["xi1"], [])
    s = profiles[0].abscissae
    header = ["xi1"] + [p.name or f"profile_{k}" for k, p in enumerate(profiles)]
    columns = [s] + [p.values for p in profiles]
    return write_csv(path, header, zip(*columns))


def write_grid_csv(path: PathLike, maps: Dict[str, np.ndarray], names: Sequence[str]) -> Path:
    """Heat-map samples in long form: x, y and one column per map; NaN outside the disc."""
    x, y = maps["x"].ravel(), maps["y"].ravel()
    columns = [x, y] + [maps[name].ravel() for name in names]
    return write_csv(path, ["x", "y"] + list(names), zip(*columns))


def write_json(path: PathLike, data: Dict[str, Any]) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        json.dump(data, f, indent=2, ensure_ascii=False, default=_json_default)
    return path


def _json_default(value):
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"{type(value).__name__} is not JSON serializable")


@track_performance("export")
def write_vtk(path: PathLike, state: PlateState) -> Path:
    """w, v, [w,w] and σ_rr as point data on the P1-subsampled mesh."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    dofmap = state.dofmap
    coords = dofmap.dof_coordinates
    v_hess, _ = nodal_derivatives(state.v)
    w_hess, _ = nodal_derivatives(state.w)

    mesh = meshio.Mesh(
        points=np.column_stack([coords, np.zeros(len(coords))]),
        cells=[("triangle", subsampled_triangles(dofmap))],
        point_data={
            "w": state.w.full(),
            "v": state.v.full(),
            "ww": bracket(w_hess, w_hess),
            "sigma_rr": radial_stress_from_hessian(coords, v_hess),
        },
    )
    meshio.write(str(path), mesh, file_format="vtk", binary=False)
    logger.debug("wrote %s (%d points)", path, len(coords))
    return path
