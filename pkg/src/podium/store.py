"""File-backed corpus store.

Layout under the corpus root:

    index.json                      id -> meta, content hash, ingest time
    <id>/bundle.json                the canonical serialized bundle
    <id>/factors.json               cached whole-speech factor vector
    <id>/sentences.factors.json     cached per-sentence factors + embeddings

Writes go through an advisory lock and a write-temp-then-rename step, so a
crash mid-ingest never corrupts the index. Snapshots are immutable: they copy
the index and all cached factor vectors up front and pin bundle content by
hash, so later ingests stay invisible.
"""

from __future__ import annotations

import hashlib
import json
import os
import shutil
import tempfile
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Mapping

import numpy as np
from filelock import FileLock

from .bundle import FeatureBundle, SpeechMeta, dump_bundle, load_bundle
from .corpus import CorpusSentence, CorpusSpeech, speech_entry
from .errors import DuplicateId, NotFound, StorageError
from .factors import FactorVector

INDEX_NAME = "index.json"
LOCK_NAME = ".lock"


def bundle_sha256(raw: bytes) -> str:
    return hashlib.sha256(raw).hexdigest()


def meta_to_doc(meta: SpeechMeta) -> dict:
    return {
        "speech_id": meta.speech_id,
        "title": meta.title,
        "year": meta.year,
        "region": meta.region,
        "level": meta.level,
        "rank": meta.rank,
        "online": meta.online,
        "fps": meta.fps,
        "duration_s": meta.duration_s,
        "video_url": meta.video_url,
    }


def meta_from_doc(doc: Mapping) -> SpeechMeta:
    return SpeechMeta(
        speech_id=doc["speech_id"], title=doc["title"], year=doc["year"],
        region=doc["region"], level=doc["level"], rank=doc.get("rank"),
        online=doc["online"], fps=doc["fps"], duration_s=doc["duration_s"],
        video_url=doc.get("video_url"),
    )


def _write_atomic(path: Path, data: bytes) -> None:
    fd, tmp = tempfile.mkstemp(dir=path.parent, prefix=".tmp.")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


@dataclass(frozen=True)
class Snapshot:
    """Point-in-time corpus view: metadata and factor caches are loaded
    eagerly; bundles load lazily and verify the pinned content hash."""

    root: Path
    entries: tuple[CorpusSpeech, ...]
    hashes: Mapping[str, str]

    def __post_init__(self):
        object.__setattr__(self, "_bundle_cache", {})

    def speeches(self) -> tuple[CorpusSpeech, ...]:
        return self.entries

    def ids(self) -> tuple[str, ...]:
        return tuple(e.speech_id for e in self.entries)

    def __len__(self) -> int:
        return len(self.entries)

    def speech(self, speech_id: str) -> CorpusSpeech:
        for e in self.entries:
            if e.speech_id == speech_id:
                return e
        raise NotFound(f"unknown speech id {speech_id!r}")

    def bundle(self, speech_id: str) -> FeatureBundle:
        cache = self._bundle_cache
        if speech_id not in cache:
            if speech_id not in self.hashes:
                raise NotFound(f"unknown speech id {speech_id!r}")
            path = self.root / speech_id / "bundle.json"
            try:
                raw = path.read_bytes()
            except OSError as e:
                raise StorageError(f"cannot read {path}: {e}") from e
            if bundle_sha256(raw) != self.hashes[speech_id]:
                raise StorageError(f"content hash mismatch for {speech_id!r}; bundle changed after snapshot")
            cache[speech_id] = load_bundle(raw)
        return cache[speech_id]


class CorpusStore:
    """Single-writer, multi-reader directory store."""

    def __init__(self, root: str | Path, create: bool = True):
        self.root = Path(root)
        if create:
            self.root.mkdir(parents=True, exist_ok=True)
        elif not self.root.is_dir():
            raise StorageError(f"corpus root {self.root} does not exist")
        self._lock = FileLock(str(self.root / LOCK_NAME))

    # -- index ------------------------------------------------------------

    def _read_index(self) -> dict:
        path = self.root / INDEX_NAME
        if not path.exists():
            return {"schema_version": 1, "speeches": {}}
        try:
            doc = json.loads(path.read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise StorageError(f"corrupt index at {path}: {e}") from e
        if "speeches" not in doc:
            raise StorageError(f"corrupt index at {path}: no speeches key")
        return doc

    def _write_index(self, doc: dict) -> None:
        _write_atomic(self.root / INDEX_NAME, json.dumps(doc, indent=1).encode())

    def ids(self) -> tuple[str, ...]:
        return tuple(sorted(self._read_index()["speeches"]))

    def __len__(self) -> int:
        return len(self._read_index()["speeches"])

    # -- write path ---------------------------------------------------------

    def ingest(self, bundle: FeatureBundle, *, force: bool = False) -> str:
        """Persist a bundle plus its derived factor caches; atomic per speech."""
        speech_id = bundle.meta.speech_id
        raw = dump_bundle(bundle)
        sha = bundle_sha256(raw)
        entry = speech_entry(bundle)

        factors_doc = {
            "schema_version": 1,
            "bundle_sha256": sha,
            "factors": entry.factors.to_doc(),
        }
        sentences_doc = {
            "schema_version": 1,
            "bundle_sha256": sha,
            "sentences": [
                {
                    "index": s.index,
                    "start_s": s.start_s,
                    "end_s": s.end_s,
                    "text": s.text,
                    "embedding": [float(v) for v in s.embedding],
                    "factors": s.factors.to_doc(),
                }
                for s in entry.sentences
            ],
        }

        with self._lock:
            index = self._read_index()
            if speech_id in index["speeches"] and not force:
                raise DuplicateId(f"speech id {speech_id!r} already ingested")

            final_dir = self.root / speech_id
            tmp_dir = Path(tempfile.mkdtemp(dir=self.root, prefix=f".tmp.{speech_id}."))
            try:
                (tmp_dir / "bundle.json").write_bytes(raw)
                (tmp_dir / "factors.json").write_text(json.dumps(factors_doc))
                (tmp_dir / "sentences.factors.json").write_text(json.dumps(sentences_doc))
                old_dir = None
                if final_dir.exists():
                    old_dir = Path(tempfile.mkdtemp(dir=self.root, prefix=".old."))
                    os.replace(final_dir, old_dir / "gone")
                os.replace(tmp_dir, final_dir)
                if old_dir is not None:
                    shutil.rmtree(old_dir, ignore_errors=True)
            except BaseException:
                shutil.rmtree(tmp_dir, ignore_errors=True)
                raise

            index["speeches"][speech_id] = {
                "meta": meta_to_doc(bundle.meta),
                "bundle_sha256": sha,
                "ingested_at": time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime()),
            }
            self._write_index(index)
        return speech_id

    # -- read path ----------------------------------------------------------

    def get_bundle(self, speech_id: str) -> FeatureBundle:
        index = self._read_index()
        if speech_id not in index["speeches"]:
            raise NotFound(f"unknown speech id {speech_id!r}")
        path = self.root / speech_id / "bundle.json"
        try:
            raw = path.read_bytes()
        except OSError as e:
            raise StorageError(f"cannot read {path}: {e}") from e
        if bundle_sha256(raw) != index["speeches"][speech_id]["bundle_sha256"]:
            raise StorageError(f"content hash mismatch for {speech_id!r}")
        return load_bundle(raw)

    def _load_entry(self, speech_id: str, rec: Mapping) -> CorpusSpeech:
        sha = rec["bundle_sha256"]
        fpath = self.root / speech_id / "factors.json"
        spath = self.root / speech_id / "sentences.factors.json"
        try:
            fdoc = json.loads(fpath.read_text())
            sdoc = json.loads(spath.read_text())
        except (OSError, json.JSONDecodeError) as e:
            raise StorageError(f"corrupt cache for {speech_id!r}: {e}") from e

        if fdoc.get("bundle_sha256") != sha or sdoc.get("bundle_sha256") != sha:
            # stale cache (e.g. written by an older code path): recompute
            return speech_entry(self.get_bundle(speech_id))

        sentences = tuple(
            CorpusSentence(
                index=s["index"], start_s=s["start_s"], end_s=s["end_s"], text=s["text"],
                factors=FactorVector.from_doc(s["factors"]),
                embedding=np.asarray(s["embedding"], dtype=float),
            )
            for s in sdoc["sentences"]
        )
        return CorpusSpeech(
            speech_id=speech_id,
            meta=meta_from_doc(rec["meta"]),
            factors=FactorVector.from_doc(fdoc["factors"]),
            sentences=sentences,
        )

    def snapshot(self) -> Snapshot:
        index = self._read_index()
        entries = []
        hashes = {}
        for speech_id in sorted(index["speeches"]):
            rec = index["speeches"][speech_id]
            entries.append(self._load_entry(speech_id, rec))
            hashes[speech_id] = rec["bundle_sha256"]
        return Snapshot(root=self.root, entries=tuple(entries), hashes=hashes)
