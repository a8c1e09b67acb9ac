"""Run manifests and atomic output writing.

Every command writes its data files first to a temp name and renames them
into place, then records a manifest listing input digests, configuration,
per-stage timings and a sha256 digest per output. Data outputs are
deterministic under fixed seeds; the manifest carries wall-clock timings and
is therefore not itself byte-stable.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path


def sha256_bytes(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def sha256_file(path: str | Path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 20), b""):
            h.update(chunk)
    return h.hexdigest()


def atomic_write_text(path: str | Path, text: str) -> str:
    """Write via temp file + rename; returns the content digest."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    data = text.encode("utf-8")
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=f".{path.name}.", suffix=".tmp")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise
    return sha256_bytes(data)


@dataclass
class RunManifest:
    command: str
    version: str
    config: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)
    result: dict = field(default_factory=dict)

    def add_input(self, path: str | Path) -> None:
        self.inputs[str(path)] = sha256_file(path)

    def write_output(self, path: str | Path, text: str) -> None:
        self.outputs[str(path)] = atomic_write_text(path, text)

    def write(self, path: str | Path) -> None:
        atomic_write_text(path, json.dumps(self.__dict__, indent=2, sort_keys=True) + "\n")


class StageTimer:
    """Accumulates wall-clock seconds per named stage."""

    def __init__(self, manifest: RunManifest):
        self.manifest = manifest
        self._start: float | None = None
        self._stage: str | None = None

    def stage(self, name: str) -> "StageTimer":
        self.stop()
        self._stage = name
        self._start = time.perf_counter()
        return self

    def stop(self) -> None:
        if self._stage is not None and self._start is not None:
            elapsed = time.perf_counter() - self._start
            self.manifest.timings[self._stage] = round(
                self.manifest.timings.get(self._stage, 0.0) + elapsed, 6
            )
        self._stage = None
        self._start = None
