"""JSON/CSV formats and run manifests."""
from __future__ import annotations

import hashlib
import json
import math
import sys
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone
from pathlib import Path

import numpy as np

from .prob import DiscreteMeasure
from .sphere import Configuration

CSV_FORMAT = "%.17g"


class InputError(ValueError):
    """Malformed or inconsistent user input (exit code 2)."""


def _clean(obj):
    # JSON has no NaN or infinity; emit null instead
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def dumps(obj) -> str:
    return json.dumps(_clean(obj), indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_json(path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj))
    return path


def read_json(path) -> dict:
    try:
        with open(path) as fh:
            return json.load(fh)
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise InputError(f"{path}: invalid JSON ({exc.msg} at line {exc.lineno})") from None


def format_number(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return "true" if v else "false"
    if v is None:
        return ""
    return CSV_FORMAT % float(v)


def write_csv(path, header, rows) -> Path:
    path = Path(path)
    lines = [",".join(header)]
    lines += [",".join(format_number(v) for v in row) for row in rows]
    path.write_text("\n".join(lines) + "\n")
    return path


def configuration_to_dict(cfg: Configuration) -> dict:
    return {"d": cfg.dim, "points": cfg.points.tolist()}


def configuration_from_dict(data) -> Configuration:
    if not isinstance(data, dict) or "points" not in data:
        raise InputError('configuration needs a "points" array')
    try:
        cfg = Configuration(data["points"])
    except (ValueError, TypeError) as exc:
        raise InputError(f"bad configuration: {exc}") from None
    if "d" in data and data["d"] != cfg.dim:
        raise InputError(f"declared d = {data['d']} but points have dimension {cfg.dim}")
    return cfg


def write_configuration_csv(path, cfg: Configuration) -> Path:
    return write_csv(path, [f"x{i}" for i in range(cfg.dim)], cfg.points.tolist())


def measure_from_dict(data) -> DiscreteMeasure:
    if not isinstance(data, dict) or "atoms" not in data:
        raise InputError('measure needs an "atoms" array')
    try:
        return DiscreteMeasure.from_dict(data)
    except (ValueError, TypeError) as exc:
        raise InputError(f"bad measure: {exc}") from None


def resolve(entry, base: Path):
    """An inline object, or a path (relative to ``base``) to a JSON file."""
    if isinstance(entry, str):
        return read_json(base / entry)
    return entry


def sha256(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


@dataclass
class RunManifest:
    command: str
    config_path: str
    output_dir: str
    seed: int
    timestamp: str = ""
    argv: list = field(default_factory=list)
    artifact_hashes: list = field(default_factory=list)
    summary: dict = field(default_factory=dict)

    def add(self, path) -> None:
        path = Path(path)
        self.artifact_hashes.append({"path": path.name, "sha256": sha256(path)})

    def write(self, out_dir) -> Path:
        if not self.timestamp:
            self.timestamp = datetime.now(timezone.utc).isoformat(timespec="seconds")
        if not self.argv:
            self.argv = list(sys.argv[1:])
        return write_json(Path(out_dir) / f"{self.command}_manifest.json", asdict(self))
