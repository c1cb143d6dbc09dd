"""
Result emission: fixed-format CSVs plus a manifest of content digests.

Floats are written with six significant digits and '.' as the decimal
separator; lines end with a single newline on every platform.
"""

from __future__ import annotations

import hashlib
import json
import logging
from pathlib import Path
from typing import Dict, List, Mapping, Optional, Union

import pandas as pd

from src.models.errors import SimulationError


LOGGER = logging.getLogger(__name__)

FLOAT_FORMAT = "%.6g"
MANIFEST_NAME = "manifest.json"


def file_digest(path: Path) -> str:
	digest = hashlib.sha256()
	with path.open("rb") as handle:
		for block in iter(lambda: handle.read(1 << 16), b""):
			digest.update(block)
	return digest.hexdigest()


def write_table(table: pd.DataFrame, path: Path) -> None:
	table.to_csv(path, index=False, float_format=FLOAT_FORMAT, lineterminator="\n", encoding="utf-8")


def write_results(
	tables: Mapping[str, pd.DataFrame],
	out_dir: Union[str, Path],
	extra_files: Optional[Mapping[str, bytes]] = None,
) -> Dict[str, str]:
	"""
	Write every table as `<name>.csv` plus any extra files, then the manifest.

	Returns the manifest, a mapping of file name to sha256 digest. Files are
	listed in sorted order so identical inputs give an identical manifest.
	Anything written before an IO failure is removed again.
	"""
	out_dir = Path(out_dir)
	extra_files = extra_files or {}
	written: List[Path] = []
	try:
		out_dir.mkdir(parents=True, exist_ok=True)
		for name in sorted(tables):
			path = out_dir / f"{name}.csv"
			write_table(tables[name], path)
			written.append(path)
		for name in sorted(extra_files):
			path = out_dir / name
			path.write_bytes(extra_files[name])
			written.append(path)
		manifest = {path.name: file_digest(path) for path in sorted(written, key=lambda p: p.name)}
		manifest_path = out_dir / MANIFEST_NAME
		manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")
		written.append(manifest_path)
	except OSError as exc:
		remove_files(written)
		raise SimulationError(f"cannot write results to {exc.filename or out_dir}: {exc.strerror or exc}") from exc
	LOGGER.info("Wrote %d files to %s", len(written), out_dir)
	return manifest


def remove_files(paths: List[Path]) -> None:
	for path in paths:
		try:
			path.unlink()
		except FileNotFoundError:
			pass
