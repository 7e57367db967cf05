"""File-backed document store with optimistic versioning.

One JSON file per document, written atomically (temp file + rename) before
any response is produced, so a crash or restart never loses an
acknowledged mutation. Writers pass the version they read; a mismatch
raises VersionConflictError and leaves the stored document untouched.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass
from pathlib import Path

from .errors import VersionConflictError


@dataclass(frozen=True)
class StoreRecord:
    document: dict
    version: int
    updated_at: float


class DocumentStore:
    def __init__(self, root: str | Path):
        self.root = Path(root)
        self.root.mkdir(parents=True, exist_ok=True)
        self._lock = threading.Lock()

    def _path(self, kind: str, doc_id: str) -> Path:
        safe = "".join(ch for ch in doc_id if ch.isalnum() or ch in "-_")
        if not safe or safe != doc_id:
            raise KeyError(doc_id)
        return self.root / kind / f"{safe}.json"

    def get(self, kind: str, doc_id: str) -> StoreRecord | None:
        path = self._path(kind, doc_id)
        if not path.exists():
            return None
        wrapper = json.loads(path.read_text("utf-8"))
        return StoreRecord(
            document=wrapper["document"],
            version=wrapper["version"],
            updated_at=wrapper["updated_at"],
        )

    def put(
        self,
        kind: str,
        doc_id: str,
        document: dict,
        expected_version: int | None = None,
    ) -> StoreRecord:
        """Write a document; None expected_version means create-or-replace.

        With an expected_version, the write succeeds only if the stored
        version still matches, and the stored version then increments.
        """
        with self._lock:
            current = self.get(kind, doc_id)
            current_version = current.version if current else 0
            if expected_version is not None and expected_version != current_version:
                raise VersionConflictError(
                    f"{kind}/{doc_id}: expected version {expected_version}, "
                    f"found {current_version}"
                )
            record = StoreRecord(
                document=document,
                version=current_version + 1,
                updated_at=time.time(),
            )
            path = self._path(kind, doc_id)
            path.parent.mkdir(parents=True, exist_ok=True)
            tmp = path.with_suffix(".json.tmp")
            wrapper = {
                "version": record.version,
                "updated_at": record.updated_at,
                "document": record.document,
            }
            tmp.write_text(json.dumps(wrapper, ensure_ascii=False), "utf-8")
            os.replace(tmp, path)
            return record

    def list_ids(self, kind: str) -> list[str]:
        directory = self.root / kind
        if not directory.exists():
            return []
        return sorted(p.stem for p in directory.glob("*.json"))
