"""
Experiment artifacts: CSV with comment headers, JSON mirrors and the run
manifest. Every file is written to a temporary name in its destination
directory and renamed into place, so a final path never holds a partial
file.
"""

import json
import logging
import os
import tempfile
from dataclasses import asdict, dataclass, field
from typing import Dict, List, Optional

import pandas as pd

MANIFEST_NAME = "manifest.json"


@dataclass
class RunManifest:
    """
    Record of one experiment run.

    Attributes:
        kind: Experiment kind
        config_hash: SHA-256 of the canonical config
        seed: Master seed
        toolkit_version: Package version that produced the files
        duration_s: Wall-clock duration of the run
        files: Output file names relative to the output directory
        summary: Headline numbers of the run
    """
    kind: str
    config_hash: str
    seed: int
    toolkit_version: str
    duration_s: float = 0.0
    files: List[str] = field(default_factory=list)
    summary: Dict[str, object] = field(default_factory=dict)

    def to_dict(self) -> Dict:
        return asdict(self)

    def header(self) -> Dict[str, object]:
        """Comment-header fields embedded in every CSV."""
        return {
            "config_hash": self.config_hash,
            "seed": self.seed,
            "toolkit_version": self.toolkit_version,
            "kind": self.kind,
        }


def write_atomic(path: str, text: str) -> None:
    """
    Write text to path via a temporary sibling file and os.replace.

    Raises:
        OSError: If the directory is not writable
    """
    directory = os.path.dirname(os.path.abspath(path))
    fd, tmp_path = tempfile.mkstemp(prefix=f".{os.path.basename(path)}.", suffix=".tmp",
                                    dir=directory)
    try:
        with os.fdopen(fd, "w", newline="") as f:
            f.write(text)
            f.flush()
            os.fsync(f.fileno())
        os.replace(tmp_path, path)
    except BaseException:
        if os.path.exists(tmp_path):
            os.unlink(tmp_path)
        raise


def comment_header(fields: Dict[str, object]) -> str:
    return "".join(f"# {key}: {value}\n" for key, value in fields.items())


def frame_to_csv_text(frame: pd.DataFrame, header: Optional[Dict[str, object]] = None) -> str:
    return comment_header(header or {}) + frame.to_csv(index=False, lineterminator="\n")


def frame_to_json_text(frame: pd.DataFrame, header: Optional[Dict[str, object]] = None) -> str:
    """JSON mirror: {"metadata": header, "records": rows}."""
    records = json.loads(frame.to_json(orient="records", double_precision=15))
    return json.dumps({"metadata": header or {}, "records": records}, indent=2) + "\n"


def read_csv_artifact(file_name: str) -> pd.DataFrame:
    """Load a CSV written by ArtifactWriter, skipping its comment header."""
    return pd.read_csv(file_name, comment="#")


def read_csv_header(file_name: str) -> Dict[str, str]:
    header = {}
    with open(file_name) as f:
        for line in f:
            if not line.startswith("#"):
                break
            key, _, value = line[1:].partition(":")
            header[key.strip()] = value.strip()
    return header


class ArtifactWriter:
    """
    Writes the files of one run into an output directory and tracks them
    for the manifest.
    """

    def __init__(self, out_dir: str, manifest: RunManifest, json_mirror: bool = False):
        self.out_dir = out_dir
        self.manifest = manifest
        self.json_mirror = json_mirror
        os.makedirs(out_dir, exist_ok=True)

    def _path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def _record(self, name: str) -> None:
        if name not in self.manifest.files:
            self.manifest.files.append(name)

    def write_frame(self, name: str, frame: pd.DataFrame) -> str:
        """CSV (plus JSON mirror when enabled) with the run's comment header."""
        header = self.manifest.header()
        write_atomic(self._path(name), frame_to_csv_text(frame, header))
        self._record(name)
        logging.info(f"Saved {name} to {self.out_dir}")
        if self.json_mirror:
            json_name = os.path.splitext(name)[0] + ".json"
            write_atomic(self._path(json_name), frame_to_json_text(frame, header))
            self._record(json_name)
            logging.info(f"Saved {json_name} to {self.out_dir}")
        return self._path(name)

    def write_text(self, name: str, text: str) -> str:
        """Plain-text artifact prefixed with the comment header."""
        write_atomic(self._path(name), comment_header(self.manifest.header()) + text)
        self._record(name)
        logging.info(f"Saved {name} to {self.out_dir}")
        return self._path(name)

    def write_manifest(self) -> str:
        path = self._path(MANIFEST_NAME)
        write_atomic(path, json.dumps(self.manifest.to_dict(), indent=2, default=str) + "\n")
        logging.info(f"Saved run manifest to {path}")
        return path


def summary_frame(summary: Dict[str, object]) -> pd.DataFrame:
    """Key-value table: quantity, value."""
    return pd.DataFrame(list(summary.items()), columns=["quantity", "value"])
