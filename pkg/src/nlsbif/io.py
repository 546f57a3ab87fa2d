"""Byte-stable CSV/JSON writers and potential descriptor loading."""
from __future__ import annotations

import csv
import json
import math
import sys
from dataclasses import asdict
from pathlib import Path
from typing import Iterable, Sequence

from .config import tolerances
from .errors import ConfigError
from .potential import PotentialSpec, from_descriptor

if sys.version_info >= (3, 11):
    import tomllib
else:  # pragma: no cover - exercised on 3.10 only
    import tomli as tomllib

FLOAT_FMT = "%.17g"


def _fmt(v) -> str:
    if isinstance(v, bool):
        return str(int(v))
    if isinstance(v, int):
        return str(v)
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return FLOAT_FMT % v
    return str(v)


def meta_block(spec: PotentialSpec | None = None, **extra) -> dict:
    from . import __version__

    meta = {"tool": "nlsbif", "version": __version__, "tolerances": asdict(tolerances())}
    if spec is not None:
        meta["potential"] = spec.descriptor()
        meta["potential_digest"] = spec.digest()
    meta.update(extra)
    return meta


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence], meta: dict | None = None,
              sort: bool = True) -> Path:
    """Write one header line and ``%.17g``-formatted rows with LF endings.

    Metadata goes to ``<path>.meta.json`` so the CSV itself stays a plain table.
    """
    path = Path(path)
    rows = [list(r) for r in rows]
    if sort:
        rows.sort(key=lambda r: tuple((0, v) if isinstance(v, (int, float)) else (1, str(v)) for v in r))
    with path.open("w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for r in rows:
            writer.writerow([_fmt(v) for v in r])
    if meta is not None:
        write_json(path.with_name(path.name + ".meta.json"), meta)
    return path


def dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, indent=1, allow_nan=True, ensure_ascii=False) + "\n"


def write_json(path: Path, obj) -> Path:
    path = Path(path)
    path.write_text(dumps(obj), encoding="utf-8", newline="\n")
    return path


def load_descriptor(path: str | None = None, inline: str | None = None) -> dict:
    if (path is None) == (inline is None):
        raise ConfigError("give exactly one of --potential FILE or --inline JSON")
    try:
        if inline is not None:
            return json.loads(inline)
        p = Path(path)
        text = p.read_text(encoding="utf-8")
        if p.suffix.lower() == ".toml":
            d = tomllib.loads(text)
            return d.get("potential", d)
        return json.loads(text)
    except (OSError, ValueError) as exc:
        raise ConfigError(f"cannot read potential descriptor: {exc}") from exc


def load_potential(path: str | None = None, inline: str | None = None) -> PotentialSpec:
    return from_descriptor(load_descriptor(path, inline))
