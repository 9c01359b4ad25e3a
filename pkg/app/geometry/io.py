import csv
import json
import logging
from pathlib import Path
from typing import List

from app.errors import ConfigError
from app.schemas.configs import RHO_NAMES, RhoPoint

"""
POINT IMPORT
- CSV: a header row naming rho12..rho34 (six squared distances per row), or
  rows of coordinates "point,x1,x2,..." with four consecutive rows per configuration
- JSON: a list of objects, each {"rho12": ..., ...} or {"coordinates": [[...] x4]}
"""

logger = logging.getLogger(__name__)


def _from_record(record) -> RhoPoint:
    if "coordinates" in record:
        return RhoPoint.from_coordinates(record["coordinates"])
    return RhoPoint(**{k: record[k] for k in RHO_NAMES})


def load_points(path: Path) -> List[RhoPoint]:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"{path} does not exist")
    try:
        if path.suffix.lower() == ".json":
            data = json.loads(path.read_text())
            if isinstance(data, dict):
                data = [data]
            points = [_from_record(r) for r in data]
        else:
            points = _load_csv(path)
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"cannot read points from {path}: {exc}") from exc
    logger.info("[EXACT] loaded %d points from %s", len(points), path)
    return points


def _load_csv(path: Path) -> List[RhoPoint]:
    with path.open(newline="") as fh:
        rows = [r for r in csv.reader(fh) if r and not r[0].startswith("#")]
    if not rows:
        return []
    header = [h.strip() for h in rows[0]]
    if set(RHO_NAMES) <= set(header):
        return [RhoPoint(**{h: v.strip() for h, v in zip(header, r) if h in RHO_NAMES}) for r in rows[1:]]
    body = rows[1:] if header[0] == "point" else rows
    coords = [[v.strip() for v in r[1:]] for r in body]
    if len(coords) % 4:
        raise ValueError("coordinate rows must come in groups of four")
    return [RhoPoint.from_coordinates(coords[k : k + 4]) for k in range(0, len(coords), 4)]
