"""Embedded document store on sqlite3.

One table of JSON documents keyed by (collection, id). Writes are
last-writer-wins. Annotations carry an extra uniqueness key so that at
most one document exists per (source, session_id, utterance_index); a
conflicting write atomically replaces the older document.

The maskmaps collection is privileged: reads must say so explicitly,
which keeps re-identification data out of ordinary code paths.
"""

from __future__ import annotations

import json
import sqlite3
import threading
from pathlib import Path

from .errors import InvalidInput, NotFound, PermissionDenied
from .schema import canonical_json

COLLECTIONS = ("sessions", "maskmaps", "prompts", "runs", "annotations", "runsets")
PRIVILEGED_COLLECTIONS = ("maskmaps",)

_SINGULAR = {
    "sessions": "session",
    "maskmaps": "mask map",
    "prompts": "prompt",
    "runs": "run",
    "annotations": "annotation",
    "runsets": "run set",
}

_SCHEMA_SQL = """
CREATE TABLE IF NOT EXISTS documents (
    collection TEXT NOT NULL,
    id TEXT NOT NULL,
    doc TEXT NOT NULL,
    uniq_key TEXT,
    PRIMARY KEY (collection, id)
);
CREATE UNIQUE INDEX IF NOT EXISTS documents_uniq
    ON documents (collection, uniq_key) WHERE uniq_key IS NOT NULL;
"""


def annotation_uniq_key(doc: dict) -> str:
    try:
        return f"{doc['source']}|{doc['session_id']}|{doc['utterance_index']}"
    except KeyError as exc:
        raise InvalidInput(f"annotation document missing {exc}") from exc


class Store:
    """Thread-safe document store. Safe to share across worker threads."""

    def __init__(self, path: str | Path = ":memory:"):
        self.path = str(path)
        self._conn = sqlite3.connect(self.path, check_same_thread=False)
        self._lock = threading.RLock()
        with self._lock:
            self._conn.executescript(_SCHEMA_SQL)
            self._conn.commit()

    def close(self) -> None:
        with self._lock:
            self._conn.close()

    @staticmethod
    def _check_collection(collection: str) -> None:
        if collection not in COLLECTIONS:
            raise InvalidInput(f"unknown collection {collection!r}")

    @staticmethod
    def _check_privilege(collection: str, privileged: bool) -> None:
        if collection in PRIVILEGED_COLLECTIONS and not privileged:
            raise PermissionDenied(
                f"collection {collection!r} requires privileged access"
            )

    def put(self, collection: str, doc_id: str, doc: dict,
            *, uniq_key: str | None = None) -> None:
        self._check_collection(collection)
        if not isinstance(doc_id, str) or not doc_id:
            raise InvalidInput("document id must be a non-empty string")
        if not isinstance(doc, dict):
            raise InvalidInput("document must be an object")
        text = canonical_json(doc)
        with self._lock:
            # OR REPLACE also evicts a row holding the same uniq_key, which
            # is the annotation replacement policy.
            self._conn.execute(
                "INSERT OR REPLACE INTO documents (collection, id, doc, uniq_key) "
                "VALUES (?, ?, ?, ?)",
                (collection, doc_id, text, uniq_key),
            )
            self._conn.commit()

    def put_annotation(self, doc: dict) -> None:
        self.put("annotations", doc["id"], doc, uniq_key=annotation_uniq_key(doc))

    def get(self, collection: str, doc_id: str, *, privileged: bool = False) -> dict | None:
        self._check_collection(collection)
        self._check_privilege(collection, privileged)
        with self._lock:
            row = self._conn.execute(
                "SELECT doc FROM documents WHERE collection = ? AND id = ?",
                (collection, doc_id),
            ).fetchone()
        return json.loads(row[0]) if row else None

    def require(self, collection: str, doc_id: str, *, privileged: bool = False) -> dict:
        doc = self.get(collection, doc_id, privileged=privileged)
        if doc is None:
            raise NotFound(f"{_SINGULAR[collection]} {doc_id} not found")
        return doc

    def exists(self, collection: str, doc_id: str) -> bool:
        self._check_collection(collection)
        with self._lock:
            row = self._conn.execute(
                "SELECT 1 FROM documents WHERE collection = ? AND id = ?",
                (collection, doc_id),
            ).fetchone()
        return row is not None

    def delete(self, collection: str, doc_id: str, *, privileged: bool = False) -> bool:
        self._check_collection(collection)
        self._check_privilege(collection, privileged)
        with self._lock:
            cur = self._conn.execute(
                "DELETE FROM documents WHERE collection = ? AND id = ?",
                (collection, doc_id),
            )
            self._conn.commit()
        return cur.rowcount > 0

    def query(self, collection: str, where: dict | None = None,
              *, privileged: bool = False) -> list[dict]:
        """All documents in a collection, id order, optionally filtered by
        top-level field equality. Collections stay desk sized, so the
        filter runs in Python rather than in SQL."""
        self._check_collection(collection)
        self._check_privilege(collection, privileged)
        with self._lock:
            rows = self._conn.execute(
                "SELECT doc FROM documents WHERE collection = ? ORDER BY id",
                (collection,),
            ).fetchall()
        docs = [json.loads(r[0]) for r in rows]
        if where:
            docs = [d for d in docs
                    if all(d.get(k) == v for k, v in where.items())]
        return docs

    def count(self, collection: str) -> int:
        self._check_collection(collection)
        with self._lock:
            row = self._conn.execute(
                "SELECT COUNT(*) FROM documents WHERE collection = ?",
                (collection,),
            ).fetchone()
        return int(row[0])

    def dump(self, path: str | Path) -> int:
        """Full backup as JSON lines, privileged collections included.
        Dumping is an operator action on the local machine."""
        with self._lock:
            rows = self._conn.execute(
                "SELECT collection, id, doc, uniq_key FROM documents "
                "ORDER BY collection, id"
            ).fetchall()
        out = Path(path)
        with out.open("w", encoding="utf-8") as fh:
            for collection, doc_id, doc, uniq_key in rows:
                record = {"collection": collection, "id": doc_id,
                          "doc": json.loads(doc), "uniq_key": uniq_key}
                fh.write(canonical_json(record) + "\n")
        return len(rows)

    def load(self, path: str | Path) -> int:
        """Restore from a dump, replacing current contents."""
        records = []
        with Path(path).open("r", encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    rec = json.loads(line)
                    collection = rec["collection"]
                    doc_id = rec["id"]
                    doc = rec["doc"]
                except (json.JSONDecodeError, KeyError, TypeError) as exc:
                    raise InvalidInput(f"bad dump record on line {line_no}: {exc}") from exc
                self._check_collection(collection)
                if not isinstance(doc, dict):
                    raise InvalidInput(f"bad dump record on line {line_no}: doc is not an object")
                records.append((collection, doc_id, canonical_json(doc),
                                rec.get("uniq_key")))
        with self._lock:
            self._conn.execute("DELETE FROM documents")
            self._conn.executemany(
                "INSERT OR REPLACE INTO documents (collection, id, doc, uniq_key) "
                "VALUES (?, ?, ?, ?)",
                records,
            )
            self._conn.commit()
        return len(records)
