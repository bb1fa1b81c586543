"""
CSV and JSON writers for every subcommand. Each written file gets a `<name>.meta.json`
sidecar with the config hash and tool version; nothing time-dependent is recorded so
identical runs give identical bytes.
"""

import csv
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence

from config import VERSION

logger = logging.getLogger(__name__)

BRANCH_HEADER = ("K", "re", "im", "sheet", "residual")
SERIES_HEADER = ("t", "re_eta1", "im_eta1", "re_eta2", "im_eta2")
TRAJECTORY_HEADER = ("t", "re_alpha_plus", "im_alpha_plus", "re_alpha_minus", "im_alpha_minus")
POLAR_HEADER = ("t", "psi", "r_plus", "r_minus")
AVERAGED_HEADER = ("t", "r_plus", "r_minus")
SWEEP_HEADER = ("K", "epsilon", "amp_measured", "amp_predicted", "freq_measured", "freq_predicted", "source")


def _cell(value: object) -> object:
    # plain Python scalars so numpy types never change the text form
    if isinstance(value, bool):
        return int(value)
    if isinstance(value, (int, str)):
        return value
    try:
        return float(value)
    except (TypeError, ValueError):
        return str(value)


def _write_sidecar(path: Path, config_hash: str, kind: str, extra: Optional[Dict[str, object]] = None) -> Path:
    meta = {"file": path.name, "kind": kind, "config_hash": config_hash, "version": VERSION}
    if extra:
        meta.update(extra)
    sidecar = path.with_name(path.name + ".meta.json")
    sidecar.write_text(json.dumps(meta, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return sidecar


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]],
              config_hash: str, kind: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    count = 0
    with path.open("w", newline="", encoding="utf-8") as f:
        writer = csv.writer(f, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            if len(row) != len(header):
                raise ValueError(f"row of width {len(row)} does not match header {header}")
            writer.writerow([_cell(v) for v in row])
            count += 1
    _write_sidecar(path, config_hash, kind, {"rows": count, "columns": list(header)})
    logger.info("wrote %s (%d rows)", path, count)
    return path


def write_json(path: Path, record: Dict[str, object], config_hash: str, kind: str) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(record, indent=2, sort_keys=True, default=_cell) + "\n", encoding="utf-8")
    _write_sidecar(path, config_hash, kind)
    logger.info("wrote %s", path)
    return path


class ArtifactWriter:
    """Writes into one output directory, honouring the configured formats"""

    def __init__(self, directory: str, config_hash: str, formats: Sequence[str] = ("csv", "json")):
        self.directory = Path(directory)
        self.config_hash = config_hash
        self.formats = set(formats)
        self.written: List[Path] = []

    def csv(self, name: str, header: Sequence[str], rows: Iterable[Sequence[object]], kind: str) -> Optional[Path]:
        if "csv" not in self.formats:
            return None
        path = write_csv(self.directory / name, header, rows, self.config_hash, kind)
        self.written.append(path)
        return path

    def json(self, name: str, record: Dict[str, object], kind: str) -> Optional[Path]:
        if "json" not in self.formats:
            return None
        path = write_json(self.directory / name, record, self.config_hash, kind)
        self.written.append(path)
        return path
