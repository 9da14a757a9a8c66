"""
Append-only provenance manifest of stage executions.
"""
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Optional, Sequence, Union

from casecontext.errors import MissingArtifactError
from casecontext.utils.helpers import file_hash, read_jsonl

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class ManifestEntry:
    """
    One stage execution: hashes of what it read and wrote.

    Keys of ``inputs`` and ``outputs`` are workspace-relative paths, or
    ``config:<sections>`` for the config sections the stage depends on.
    """
    stage: str
    inputs: Dict[str, str]
    outputs: Dict[str, str]
    duration: float = 0.0

    @classmethod
    def from_record(cls, data: Dict[str, Any]) -> 'ManifestEntry':
        return cls(
            stage=data["stage"],
            inputs=dict(data.get("inputs", {})),
            outputs=dict(data.get("outputs", {})),
            duration=float(data.get("duration", 0.0))
        )

    def to_record(self) -> Dict[str, Any]:
        return {
            "stage": self.stage,
            "inputs": dict(sorted(self.inputs.items())),
            "outputs": dict(sorted(self.outputs.items())),
            "duration": round(self.duration, 3),
        }


def relative_name(workspace: Path, path: Path) -> str:
    try:
        return path.resolve().relative_to(workspace.resolve()).as_posix()
    except ValueError:
        return path.resolve().as_posix()


def hash_files(workspace: Path, paths: Sequence[Path], stage: Optional[str] = None) -> Dict[str, str]:
    """
    Hash files by workspace-relative name.

    Args:
        workspace (Path): Workspace root.
        paths (Sequence[Path]): Files to hash.
        stage (Optional[str]): Stage producing missing files; when given a
            missing file raises ``MissingArtifactError`` naming it.

    Returns:
        Dict[str, str]: Name to sha256 hex digest.
    """
    hashes = {}
    for path in paths:
        if not path.is_file():
            if stage is None:
                continue
            raise MissingArtifactError(relative_name(workspace, path), stage)
        hashes[relative_name(workspace, path)] = file_hash(path)
    return hashes


@dataclass
class Manifest:
    """
    The ``manifest.jsonl`` file of a workspace.
    """
    path: Path
    entries: List[ManifestEntry] = field(default_factory=list)

    @classmethod
    def load(cls, path: Union[str, Path]) -> 'Manifest':
        path = Path(path)
        entries = [ManifestEntry.from_record(r) for r in read_jsonl(path)] if path.is_file() else []
        return cls(path, entries)

    def last(self, stage: str) -> Optional[ManifestEntry]:
        for entry in reversed(self.entries):
            if entry.stage == stage:
                return entry
        return None

    def append(self, entry: ManifestEntry) -> None:
        self.path.parent.mkdir(parents=True, exist_ok=True)
        with open(self.path, "a", encoding="utf-8", newline="\n") as handle:
            handle.write(json.dumps(entry.to_record(), sort_keys=False))
            handle.write("\n")
        self.entries.append(entry)

    def is_up_to_date(self, stage: str, inputs: Dict[str, str], workspace: Path) -> bool:
        """
        Whether the stage's last run read the same inputs and its outputs
        are still on disk unchanged.
        """
        entry = self.last(stage)
        if entry is None or entry.inputs != inputs:
            return False
        for name, digest in entry.outputs.items():
            path = workspace / name
            if not path.is_file() or file_hash(path) != digest:
                logger.debug("Output %s of stage %s changed", name, stage)
                return False
        return True
