"""Readers and writers for the on-disk formats (see docs/formats.md)."""

from __future__ import annotations

import csv
import json
import os
import shutil
import tempfile
from dataclasses import dataclass, field
from datetime import datetime
from pathlib import Path

import numpy as np

from lifecap.alignment import RegionSet
from lifecap.errors import InvalidInputError, ManifestError


@dataclass
class Candidate:
    text: str
    log_score: float = 0.0
    round: int | None = None


@dataclass
class ImageRecord:
    image_id: str
    timestamp: str
    regions: RegionSet | None = None
    feature: np.ndarray | None = None
    candidates: list[Candidate] | None = None

    @property
    def time(self) -> datetime:
        return parse_timestamp(self.timestamp)


@dataclass
class StreamManifest:
    records: list[ImageRecord]
    stream_id: str = ""
    source: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.records)

    def __iter__(self):
        return iter(self.records)


def parse_timestamp(value: str) -> datetime:
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    return datetime.fromisoformat(value)


def dumps(obj) -> str:
    """Compact, key-sorted JSON so repeated runs produce identical bytes."""
    return json.dumps(obj, sort_keys=True, ensure_ascii=False, allow_nan=False)


def _record_from_json(obj, lineno) -> ImageRecord:
    if not isinstance(obj, dict):
        raise ManifestError("record must be a JSON object", lineno)
    image_id = obj.get("image_id")
    if not isinstance(image_id, str) or not image_id:
        raise ManifestError("record lacks a string 'image_id'", lineno)
    ts = obj.get("timestamp")
    if not isinstance(ts, str):
        raise ManifestError(f"record {image_id!r} lacks a 'timestamp'", lineno)
    try:
        parse_timestamp(ts)
    except ValueError:
        raise ManifestError(f"record {image_id!r}: unparsable timestamp {ts!r}", lineno) from None

    regions = feature = candidates = None
    try:
        if obj.get("regions") is not None:
            regions = RegionSet(np.asarray(obj["regions"], dtype=float), image_id)
        if obj.get("feature") is not None:
            feature = np.asarray(obj["feature"], dtype=float)
            if feature.ndim != 1:
                raise ValueError("feature must be a flat list of numbers")
        if obj.get("candidates") is not None:
            candidates = []
            for c in obj["candidates"]:
                if isinstance(c, str):
                    candidates.append(Candidate(c))
                else:
                    candidates.append(Candidate(str(c["text"]), float(c.get("log_score", 0.0)), c.get("round")))
    except (ValueError, TypeError, KeyError, InvalidInputError) as exc:
        raise ManifestError(f"record {image_id!r}: {exc}", lineno) from None

    if not candidates and not (regions is not None and feature is not None):
        raise ManifestError(f"record {image_id!r} has neither regions+feature nor precomputed candidates", lineno)
    return ImageRecord(image_id, ts, regions, feature, candidates)


def load_manifest(path) -> StreamManifest:
    """Parse a JSON-lines manifest, validate it and sort by timestamp.

    Lines starting with ``#`` and blank lines are ignored.
    """
    path = Path(path)
    records = []
    seen = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ManifestError(f"invalid JSON ({exc.msg})", lineno) from None
            rec = _record_from_json(obj, lineno)
            if rec.image_id in seen:
                raise ManifestError(f"duplicate image_id {rec.image_id!r} (first seen on line {seen[rec.image_id]})", lineno)
            seen[rec.image_id] = lineno
            records.append(rec)
    if not records:
        raise ManifestError(f"{path}: manifest is empty")
    try:
        records.sort(key=lambda r: r.time)
    except TypeError:
        raise ManifestError(f"{path}: mixes timezone-aware and naive timestamps") from None
    return StreamManifest(records, stream_id=path.stem, source={"path": str(path)})


def record_to_json(rec: ImageRecord) -> dict:
    obj = {"image_id": rec.image_id, "timestamp": rec.timestamp}
    if rec.regions is not None:
        obj["regions"] = rec.regions.vectors.tolist()
    if rec.feature is not None:
        obj["feature"] = rec.feature.tolist()
    if rec.candidates is not None:
        obj["candidates"] = [candidate_to_json(c) for c in rec.candidates]
    return obj


def candidate_to_json(c: Candidate) -> dict:
    obj = {"text": c.text, "log_score": c.log_score}
    if c.round is not None:
        obj["round"] = c.round
    return obj


def write_manifest(manifest: StreamManifest, path):
    with open(path, "w", encoding="utf-8") as fh:
        for rec in manifest:
            fh.write(dumps(record_to_json(rec)) + "\n")


def read_jsonl(path) -> list[dict]:
    out = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            line = line.strip()
            if not line or line.startswith("#"):
                continue
            try:
                out.append(json.loads(line))
            except json.JSONDecodeError as exc:
                raise InvalidInputError(f"{path}:{lineno}: invalid JSON ({exc.msg})") from None
    return out


def load_references(path) -> dict[str, list[str]]:
    """``{"image_id": ..., "references": [...]}`` per line."""
    refs = {}
    for obj in read_jsonl(path):
        try:
            refs[str(obj["image_id"])] = [str(r) for r in obj["references"]]
        except (KeyError, TypeError):
            raise InvalidInputError(f"{path}: each line needs 'image_id' and 'references'") from None
    return refs


def load_labels(path) -> dict[str, str]:
    """Ground-truth classes from a JSON object or a two-column CSV."""
    path = Path(path)
    if path.suffix.lower() == ".json":
        with open(path, encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise InvalidInputError(f"{path}: expected an object mapping image id to class")
        return {str(k): str(v) for k, v in data.items()}
    labels = {}
    with open(path, newline="", encoding="utf-8") as fh:
        for row in csv.reader(fh):
            if not row or row[0] == "image_id":
                continue
            if len(row) < 2:
                raise InvalidInputError(f"{path}: expected 'image_id,label' rows")
            labels[row[0]] = row[1]
    return labels


def selected_sentences(path) -> dict[str, str]:
    """Image id -> sentence from a selection or candidates JSON-lines file.

    Selection lines carry ``text``; candidate lines carry a ``candidates``
    list whose first entry is used.
    """
    out = {}
    for obj in read_jsonl(path):
        img = str(obj.get("image_id", ""))
        if "text" in obj:
            out[img] = str(obj["text"])
        elif obj.get("candidates"):
            c = obj["candidates"][0]
            out[img] = c if isinstance(c, str) else str(c["text"])
        else:
            raise InvalidInputError(f"{path}: line for {img!r} has neither 'text' nor 'candidates'")
    return out


def write_atomically(outdir, files: dict[str, str]):
    """Write every file or none: stage in a temp dir, then move into place."""
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    stage = Path(tempfile.mkdtemp(prefix=".stage-", dir=outdir))
    try:
        for name, content in files.items():
            (stage / name).write_text(content, encoding="utf-8")
        for name in files:
            os.replace(stage / name, outdir / name)
    finally:
        shutil.rmtree(stage, ignore_errors=True)
