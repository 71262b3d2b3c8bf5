"""Config files, region files, and the manifest embedded in every output."""

from __future__ import annotations

import datetime as _dt
import hashlib
import json
import sys
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import __version__, lattice

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

MANIFEST_PREFIX = "# manifest: "


def load_config(path) -> dict:
    """TOML or JSON mapping, chosen by suffix (.json is JSON, anything else TOML)."""
    path = Path(path)
    raw = path.read_bytes()
    if path.suffix.lower() == ".json":
        return json.loads(raw.decode())
    return tomllib.loads(raw.decode())


def file_hash(path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


# ------------------------------------------------------------------ regions


def read_region(path) -> frozenset:
    """JSON array of coordinate arrays, or text with one point per line."""
    text = Path(path).read_text()
    return parse_region(text)


def parse_region(text: str) -> frozenset:
    s = text.strip()
    if not s:
        return frozenset()
    if s.startswith("["):
        pts = json.loads(s)
        return frozenset(tuple(int(c) for c in q) for q in pts)
    out = []
    for line in s.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(tuple(int(c) for c in line.split()))
    if len({len(q) for q in out}) > 1:
        raise lattice.GeometryError("points of mixed dimension")
    return frozenset(out)


def region_to_json(region: Iterable) -> list:
    return lattice.as_array(region).tolist() if region else []


def format_region_text(region: Iterable) -> str:
    return "".join(" ".join(str(c) for c in q) + "\n" for q in region_to_json(region))


# ------------------------------------------------------------------ manifest


def to_jsonable(obj):
    """Recursively convert numpy scalars/arrays, tuples, sets and frozensets."""
    if isinstance(obj, Mapping):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (frozenset, set)):
        return [to_jsonable(v) for v in sorted(obj)]
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_jsonable(obj.tolist())
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, np.floating):
        return float(obj)
    if isinstance(obj, np.bool_):
        return bool(obj)
    if isinstance(obj, float) and not np.isfinite(obj):
        return repr(obj)
    return obj


def make_manifest(command: str, argv: Sequence[str], params: Mapping, inputs: Sequence = ()) -> dict:
    return {
        "command": command,
        "argv": list(argv),
        "parameters": to_jsonable(params),
        "version": __version__,
        "created": _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds"),
        "inputs": {str(p): file_hash(p) for p in inputs},
    }


def dumps_data(data) -> str:
    return json.dumps(to_jsonable(data), indent=2, sort_keys=True)


def write_json(path, manifest: Mapping, data) -> None:
    text = json.dumps({"manifest": to_jsonable(manifest), "data": to_jsonable(data)}, indent=2, sort_keys=True)
    _write(path, text + "\n")


def _write(path, text: str) -> None:
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        Path(path).write_text(text)


def manifest_line(manifest: Mapping) -> str:
    return MANIFEST_PREFIX + json.dumps(to_jsonable(manifest), sort_keys=True)


def read_manifest(path) -> dict:
    """Manifest of a JSON output or of a '#'-commented CSV/.dat/.gp output."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return json.loads(text)["manifest"]
    for line in text.splitlines():
        if line.startswith(MANIFEST_PREFIX):
            return json.loads(line[len(MANIFEST_PREFIX) :])
    raise ValueError(f"{path}: no manifest found")


def data_section(path) -> str:
    """The part of an output that must reproduce byte for byte."""
    text = Path(path).read_text()
    if text.lstrip().startswith("{"):
        return dumps_data(json.loads(text)["data"])
    return "".join(line + "\n" for line in text.splitlines() if not line.startswith("#"))
