"""File-pair containers and CSV writers.

Every binary artifact (surrogates, snapshot sets) is a file pair sharing one
stem: ``<stem>.yaml`` holds a human-readable metadata document including a
shape table, ``<stem>.bin`` holds the arrays as raw little-endian float64,
column-major, back to back in table order. Identical inputs give
byte-identical pairs.

CSV outputs start with ``# key: value`` comment lines (config hash, seed,
artifact version) followed by a pandas-written table with a fixed float
format.
"""

import logging
from pathlib import Path
from typing import Any

import numpy as np
import pandas as pd
import yaml

from config import CSV_FLOAT_FORMAT, METADATA_SUFFIX, PAYLOAD_DTYPE, PAYLOAD_SUFFIX
from exceptions import SnapshotFormatError, SurrogateFormatError

logger = logging.getLogger(__name__)

FormatError = type[SnapshotFormatError] | type[SurrogateFormatError]

_ITEM_SIZE = np.dtype(PAYLOAD_DTYPE).itemsize


def metadata_path(stem: Path | str) -> Path:
    return Path(f"{stem}{METADATA_SUFFIX}")


def payload_path(stem: Path | str) -> Path:
    return Path(f"{stem}{PAYLOAD_SUFFIX}")


def to_plain(value: Any) -> Any:
    """Convert numpy scalars/arrays and tuples into YAML-safe builtins."""
    if isinstance(value, dict):
        return {str(k): to_plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_plain(v) for v in value]
    if isinstance(value, np.ndarray):
        return to_plain(value.tolist())
    if isinstance(value, np.generic):
        return value.item()
    if isinstance(value, Path):
        return str(value)
    return value


def dump_yaml(document: dict[str, Any]) -> str:
    """Deterministic YAML text of *document* (insertion order kept)."""
    return yaml.safe_dump(to_plain(document), sort_keys=False, default_flow_style=None)


def write_file_pair(
    stem: Path | str,
    metadata: dict[str, Any],
    arrays: dict[str, np.ndarray],
) -> tuple[Path, Path]:
    """Write *arrays* and *metadata* as a ``.yaml`` / ``.bin`` pair.

    A ``payload`` entry (file name, dtype, layout, shape table) is appended to
    *metadata*.

    Returns:
        The metadata and payload paths.
    """
    meta_file = metadata_path(stem)
    data_file = payload_path(stem)
    meta_file.parent.mkdir(parents=True, exist_ok=True)

    table = []
    offset = 0
    chunks = []
    for name, array in arrays.items():
        array = np.asarray(array, dtype=float)
        raw = array.astype(PAYLOAD_DTYPE).tobytes(order="F")
        table.append({
            "name": name,
            "shape": list(array.shape),
            "offset": offset,
            "nbytes": len(raw),
        })
        chunks.append(raw)
        offset += len(raw)

    document = dict(metadata)
    document["payload"] = {
        "file": data_file.name,
        "dtype": "float64",
        "endianness": "little",
        "layout": "column-major",
        "nbytes": offset,
        "arrays": table,
    }
    data_file.write_bytes(b"".join(chunks))
    meta_file.write_text(dump_yaml(document), encoding="utf-8")
    logger.debug("Wrote %s (%d arrays, %d bytes)", meta_file, len(table), offset)
    return meta_file, data_file


def read_metadata(stem: Path | str, error: FormatError) -> dict[str, Any]:
    """Load and minimally validate the metadata document of a file pair.

    Raises:
        SnapshotFormatError | SurrogateFormatError: (the class given as
            *error*) if the document is missing, unparsable or lacks a payload
            table.
    """
    meta_file = metadata_path(stem)
    if not meta_file.is_file():
        raise error(meta_file, "metadata file not found")
    try:
        document = yaml.safe_load(meta_file.read_text(encoding="utf-8"))
    except yaml.YAMLError as exc:
        raise error(meta_file, f"metadata is not valid YAML ({exc})") from exc
    if not isinstance(document, dict) or not isinstance(document.get("payload"), dict):
        raise error(meta_file, "metadata lacks a 'payload' table")
    return document


def read_file_pair(
    stem: Path | str,
    error: FormatError,
) -> tuple[dict[str, Any], dict[str, np.ndarray]]:
    """Read a file pair written by ``write_file_pair``.

    Raises:
        SnapshotFormatError | SurrogateFormatError: (the class given as
            *error*) on missing files, malformed tables or a payload whose
            byte length differs from the declared one.
    """
    document = read_metadata(stem, error)
    payload = document["payload"]
    data_file = payload_path(stem)
    if not data_file.is_file():
        raise error(data_file, "payload file not found")
    raw = data_file.read_bytes()

    try:
        table = list(payload["arrays"])
        declared = sum(int(np.prod(entry["shape"])) for entry in table) * _ITEM_SIZE
    except (KeyError, TypeError) as exc:
        raise error(metadata_path(stem), f"malformed shape table ({exc})") from exc
    if len(raw) != declared:
        raise error(
            data_file,
            f"payload holds {len(raw)} bytes, expected {declared} bytes "
            f"from the declared shapes",
        )

    arrays: dict[str, np.ndarray] = {}
    offset = 0
    for entry in table:
        shape = tuple(int(n) for n in entry["shape"])
        count = int(np.prod(shape))
        flat = np.frombuffer(raw, dtype=PAYLOAD_DTYPE, count=count, offset=offset)
        arrays[entry["name"]] = np.ascontiguousarray(flat.reshape(shape, order="F"), dtype=float)
        offset += count * _ITEM_SIZE
    return document, arrays


# ---------------------------------------------------------------------------
# CSV
# ---------------------------------------------------------------------------


def write_csv(path: Path, frame: pd.DataFrame, header: dict[str, Any]) -> Path:
    """Write *frame* to *path* after ``# key: value`` comment lines.

    Args:
        path: Destination CSV path (parents are created).
        frame: The table; written without index.
        header: Provenance entries (config hash, seed, version, ...).

    Returns:
        The written path.
    """
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8", newline="") as handle:
        for key, value in header.items():
            handle.write(f"# {key}: {value}\n")
        frame.to_csv(handle, index=False, float_format=CSV_FLOAT_FORMAT, lineterminator="\n")
    logger.info("Wrote %s (%d rows)", path, len(frame))
    return path


def read_csv(path: Path) -> pd.DataFrame:
    """Read a CSV written by ``write_csv``, skipping its comment header."""
    return pd.read_csv(path, comment="#")
