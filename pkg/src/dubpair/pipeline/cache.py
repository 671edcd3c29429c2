"""Content-hash stage caching.

Every stage writes its result under ``output_root/cache/<stage>/<key>/``
where the key hashes the stage's inputs and the config values it depends on.
Re-running with unchanged inputs loads the stored payload instead of
recomputing; editing any input or relevant config key changes the hash and
invalidates exactly the affected work.
"""

from __future__ import annotations

import hashlib
import json
import os
from pathlib import Path

PAYLOAD_NAME = "payload.json"


def material_key(material: dict) -> str:
    canonical = json.dumps(material, sort_keys=True, ensure_ascii=False)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()[:16]


class StageCache:
    def __init__(self, root: str | Path):
        self.root = Path(root)

    def dir(self, stage: str, key: str) -> Path:
        return self.root / stage / key

    def load(self, stage: str, key: str) -> dict | None:
        payload_path = self.dir(stage, key) / PAYLOAD_NAME
        if not payload_path.is_file():
            return None
        return json.loads(payload_path.read_text(encoding="utf-8"))

    def store(self, stage: str, key: str, payload: dict) -> None:
        directory = self.dir(stage, key)
        directory.mkdir(parents=True, exist_ok=True)
        tmp = directory / (PAYLOAD_NAME + ".tmp")
        tmp.write_text(
            json.dumps(payload, sort_keys=True, ensure_ascii=False), encoding="utf-8"
        )
        os.replace(tmp, directory / PAYLOAD_NAME)

    def artifact_dir(self, stage: str, key: str) -> Path:
        directory = self.dir(stage, key)
        directory.mkdir(parents=True, exist_ok=True)
        return directory
