"""JSONL dataset persistence plus reproducibility manifests."""

from __future__ import annotations

import hashlib
import json
import time
from pathlib import Path
from typing import Any, Iterable, Sequence

from ..core.types import CandidateSolution, LabeledDataset, LabeledEntry, PreferencePair, Problem


def write_jsonl(path: Path | str, records: Iterable[dict[str, Any]]) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for record in records:
            f.write(json.dumps(record, sort_keys=True, separators=(",", ":")) + "\n")


def read_jsonl(path: Path | str) -> list[dict[str, Any]]:
    records = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            line = line.strip()
            if line:
                records.append(json.loads(line))
    return records


def write_problems(path: Path | str, problems: Sequence[Problem]) -> None:
    write_jsonl(path, (p.to_dict() for p in problems))


def read_problems(path: Path | str) -> list[Problem]:
    return [Problem.from_dict(d) for d in read_jsonl(path)]


def write_solutions(path: Path | str, solutions: Sequence[CandidateSolution]) -> None:
    write_jsonl(path, (s.to_dict() for s in solutions))


def read_solutions(path: Path | str) -> list[CandidateSolution]:
    return [CandidateSolution.from_dict(d) for d in read_jsonl(path)]


def write_dataset(path: Path | str, dataset: LabeledDataset) -> None:
    write_jsonl(path, (e.to_dict() for e in dataset.entries))


def read_dataset(path: Path | str, kind: str) -> LabeledDataset:
    from ..core.types import DatasetKind

    entries = tuple(LabeledEntry.from_dict(d) for d in read_jsonl(path))
    return LabeledDataset(kind=DatasetKind(kind), entries=entries)


def write_pairs(path: Path | str, pairs: Sequence[PreferencePair]) -> None:
    write_jsonl(path, (p.to_dict() for p in pairs))


def read_pairs(path: Path | str) -> list[PreferencePair]:
    return [PreferencePair.from_dict(d) for d in read_jsonl(path)]


def file_sha256(path: Path | str) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def dataset_manifest(
    kind: str,
    seed: int,
    config: dict[str, Any],
    sources: Sequence[Path | str],
) -> dict[str, Any]:
    """Manifest recording kind, seed, config, and source hashes."""
    return {
        "kind": kind,
        "seed": seed,
        "config": config,
        "sources": {str(p): file_sha256(p) for p in sources},
        "created_unix": time.time(),
    }
