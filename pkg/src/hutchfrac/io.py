"""JSON configs, cloud CSV, PPM rasters and JSON reports.

Config schema (top level)::

    {"name": str, "dim": int, "domain": {"lo": [...], "hi": [...]},
     "self_mapping": bool, "letters": [str, ...] | null,
     "maps": [map, ...], "metrics": [metric, ...], "options": {...}}

Map objects carry a ``type`` discriminator: ``affine`` (``matrix``,
``offset``), ``clamp1d`` (``slope``, ``shift``, ``lo``, ``hi``; ``null`` for
an infinite bound) or ``builtin`` (``name``, ``params``, ``dim``).  Metric
objects are ``euclidean``, ``sup``, ``coordinate`` (``index``),
``weighted_max`` (``terms``: ``[[index, weight], ...]``) or ``max``
(``members``).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Union

import numpy as np

from .errors import ConfigError, DomainEscape, DimensionError
from .metrics import (
    Cloud, Coordinate, Euclidean, MaxOf, Multimetric, PseudometricDescriptor, SupNorm,
    WeightedMax,
)
from .spaces import Affine, Builtin, Clamp1D, DomainBox, IfsSystem, MapDescriptor


@dataclass
class RunConfig:
    name: str
    system: IfsSystem
    multimetric: Multimetric
    options: Dict[str, Any] = field(default_factory=dict)


def _bound(x):
    return None if math.isinf(x) else float(x)


def map_to_dict(f: MapDescriptor) -> dict:
    if isinstance(f, Affine):
        return {"type": "affine", "matrix": f.matrix.tolist(), "offset": f.offset.tolist()}
    if isinstance(f, Clamp1D):
        return {"type": "clamp1d", "slope": float(f.slope), "shift": float(f.shift),
                "lo": _bound(f.lo), "hi": _bound(f.hi)}
    if isinstance(f, Builtin):
        return {"type": "builtin", "name": f.name, "params": list(f.params), "dim": f.dim}
    raise ConfigError(f"map kind {type(f).__name__} cannot be serialized")


def map_from_dict(obj: dict) -> MapDescriptor:
    kind = obj.get("type")
    if kind == "affine":
        return Affine(obj["matrix"], obj["offset"])
    if kind == "clamp1d":
        lo = -math.inf if obj.get("lo") is None else obj["lo"]
        hi = math.inf if obj.get("hi") is None else obj["hi"]
        return Clamp1D(float(obj["slope"]), float(obj["shift"]), float(lo), float(hi))
    if kind == "builtin":
        return Builtin(obj["name"], tuple(obj.get("params", ())), int(obj.get("dim", 1)))
    raise ConfigError(f"unknown map type {kind!r}")


def metric_to_dict(d: PseudometricDescriptor) -> dict:
    if isinstance(d, Euclidean):
        return {"type": "euclidean"}
    if isinstance(d, SupNorm):
        return {"type": "sup"}
    if isinstance(d, Coordinate):
        return {"type": "coordinate", "index": d.index}
    if isinstance(d, WeightedMax):
        return {"type": "weighted_max", "terms": [[i, w] for i, w in d.terms]}
    if isinstance(d, MaxOf):
        return {"type": "max", "members": [metric_to_dict(m) for m in d.members]}
    raise ConfigError(f"metric {d.label()} cannot be serialized")


def metric_from_dict(obj: dict) -> PseudometricDescriptor:
    kind = obj.get("type")
    if kind == "euclidean":
        return Euclidean()
    if kind == "sup":
        return SupNorm()
    if kind == "coordinate":
        return Coordinate(int(obj["index"]))
    if kind == "weighted_max":
        return WeightedMax(tuple((int(i), float(w)) for i, w in obj["terms"]))
    if kind == "max":
        return MaxOf(tuple(metric_from_dict(m) for m in obj["members"]))
    raise ConfigError(f"unknown metric type {kind!r}")


def config_to_dict(cfg: RunConfig) -> dict:
    ifs = cfg.system
    return {
        "name": cfg.name,
        "dim": ifs.dim,
        "domain": {"lo": ifs.domain.lo.tolist(), "hi": ifs.domain.hi.tolist()},
        "self_mapping": ifs.self_mapping_declared,
        "letters": list(ifs.letters) if ifs.letters else None,
        "maps": [map_to_dict(f) for f in ifs.maps],
        "metrics": [metric_to_dict(d) for d in cfg.multimetric.members],
        "options": cfg.options,
    }


def config_from_dict(obj: dict) -> RunConfig:
    """Validate and build a :class:`RunConfig`; any problem becomes :class:`ConfigError`."""
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    try:
        dim = int(obj["dim"])
        box = DomainBox(obj["domain"]["lo"], obj["domain"]["hi"])
        if box.dim != dim:
            raise ConfigError(f"domain has dim {box.dim}, config says {dim}")
        maps = tuple(map_from_dict(m) for m in obj["maps"])
        letters = obj.get("letters")
        ifs = IfsSystem(maps, box, bool(obj.get("self_mapping", True)),
                        tuple(letters) if letters else None)
        metrics = [metric_from_dict(m) for m in obj.get("metrics", [{"type": "euclidean"}])]
        mm = Multimetric(tuple(metrics))
        options = obj.get("options", {}) or {}
        if not isinstance(options, dict):
            raise ConfigError("options must be an object")
    except ConfigError:
        raise
    except DomainEscape as exc:
        raise ConfigError(f"maps do not keep the domain box: {exc}") from exc
    except (KeyError, TypeError, ValueError, IndexError, DimensionError) as exc:
        raise ConfigError(f"invalid config: {exc!r}") from exc
    return RunConfig(str(obj.get("name", "config")), ifs, mm, options)


def dumps_json(obj: Any) -> str:
    """Stable JSON text: insertion-ordered keys, two-space indent, trailing newline."""
    return json.dumps(sanitize(obj), indent=2, allow_nan=False) + "\n"


def sanitize(obj: Any) -> Any:
    """Replace non-finite floats by strings and numpy scalars by Python ones."""
    if isinstance(obj, dict):
        return {str(k): sanitize(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [sanitize(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return sanitize(obj.tolist())
    if isinstance(obj, (np.floating, float)):
        x = float(obj)
        if math.isnan(x):
            return "nan"
        if math.isinf(x):
            return "inf" if x > 0 else "-inf"
        return x
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    return obj


def load_config(path: Union[str, Path]) -> RunConfig:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from exc
    return config_from_dict(obj)


def save_config(cfg: RunConfig, path: Union[str, Path]) -> None:
    Path(path).write_text(dumps_json(config_to_dict(cfg)))


def cloud_to_csv(cloud: Union[Cloud, np.ndarray]) -> str:
    pts = cloud.points if isinstance(cloud, Cloud) else np.asarray(cloud, float)
    lines = [",".join(f"x{i}" for i in range(pts.shape[1]))]
    lines.extend(",".join(format(v, ".17g") for v in row) for row in pts.tolist())
    return "\n".join(lines) + "\n"


def write_csv(cloud, path: Union[str, Path]) -> None:
    Path(path).write_text(cloud_to_csv(cloud))


def read_csv(path: Union[str, Path]) -> np.ndarray:
    rows = Path(path).read_text().splitlines()[1:]
    return np.array([[float(v) for v in r.split(",")] for r in rows if r])


def rasterize(cloud, box: DomainBox, width: int, height: int) -> np.ndarray:
    """Boolean occupancy grid (row 0 at the top of the box).

    One-dimensional clouds fill whole columns; extra dimensions beyond the
    first two are ignored.
    """
    if width < 1 or height < 1:
        raise ValueError("raster size must be positive")
    pts = cloud.points if isinstance(cloud, Cloud) else np.asarray(cloud, float)
    occ = np.zeros((height, width), dtype=bool)

    def bins(vals, lo, hi, n):
        span = hi - lo
        if span <= 0:
            return np.zeros(len(vals), dtype=int)
        return np.clip(np.floor((vals - lo) / span * n).astype(int), 0, n - 1)

    cols = bins(pts[:, 0], box.lo[0], box.hi[0], width)
    if pts.shape[1] == 1:
        occ[:, np.unique(cols)] = True
        return occ
    rows = height - 1 - bins(pts[:, 1], box.lo[1], box.hi[1], height)
    occ[rows, cols] = True
    return occ


def ppm_bytes(occupancy: np.ndarray) -> bytes:
    """Binary P6 image, maxval 255: occupied pixels black on white."""
    h, w = occupancy.shape
    pix = np.where(occupancy, 0, 255).astype(np.uint8)
    rgb = np.repeat(pix[:, :, None], 3, axis=2)
    return f"P6\n{w} {h}\n255\n".encode("ascii") + rgb.tobytes()


def write_ppm(cloud, box: DomainBox, path: Union[str, Path], width: int = 512,
              height: int = 512) -> None:
    Path(path).write_bytes(ppm_bytes(rasterize(cloud, box, width, height)))


def read_ppm(path: Union[str, Path]) -> np.ndarray:
    """Inverse of :func:`write_ppm` for our own files: the occupancy grid."""
    data = Path(path).read_bytes()
    parts = data.split(b"\n", 3)
    if parts[0] != b"P6" or parts[2] != b"255":
        raise ValueError("not a P6/255 file")
    w, h = map(int, parts[1].split())
    rgb = np.frombuffer(parts[3], dtype=np.uint8).reshape(h, w, 3)
    return rgb[:, :, 0] == 0
