"""Persistence: strand files, caption sidecars, database and index files.

Strand file layout, little-endian throughout:
    "HAIR" | version u32 = 1 | strand_count u32
    per strand: vertex_count u32 | vertex_count x 3 float32

Index file layout:
    "HIDX" | version u32 = 1 | provider_id (u32 length + utf8)
    N u32 | D u32 | N x D float32 | N ids (u32 length + utf8)

Coordinates are stored as float32; in-memory strands are float64, so a
file-to-file round trip is always byte-exact and an object round trip is
bit-exact whenever coordinates are float32-representable (all shipped
assets are).
"""

from __future__ import annotations

import json
import logging
import struct
from pathlib import Path

import numpy as np

from .errors import BadMagic, DuplicateId, HairforgeError, TruncatedFile, VersionUnsupported
from .model import Hairstyle, Strand

logger = logging.getLogger(__name__)

_HAIR_MAGIC = b"HAIR"
_INDEX_MAGIC = b"HIDX"
_VERSION = 1


def write_hairstyle(h: Hairstyle, path) -> None:
    """Serialize a hairstyle to the strand file layout."""
    path = Path(path)
    parts = [_HAIR_MAGIC, struct.pack("<II", _VERSION, h.strand_count)]
    for s in h.strands:
        verts = np.ascontiguousarray(s.vertices, dtype="<f4")
        parts.append(struct.pack("<I", verts.shape[0]))
        parts.append(verts.tobytes())
    path.write_bytes(b"".join(parts))


def read_hairstyle(path) -> Hairstyle:
    """Load a strand file; the id defaults to the file stem.

    Raises
    ------
    BadMagic, VersionUnsupported, TruncatedFile
    """
    path = Path(path)
    blob = path.read_bytes()
    if blob[:4] != _HAIR_MAGIC:
        raise BadMagic(f"{path.name}: expected HAIR magic")
    if len(blob) < 12:
        raise TruncatedFile(f"{path.name}: header incomplete")
    version, count = struct.unpack_from("<II", blob, 4)
    if version != _VERSION:
        raise VersionUnsupported(f"{path.name}: version {version}")
    offset = 12
    strands = []
    for i in range(count):
        if offset + 4 > len(blob):
            raise TruncatedFile(f"{path.name}: strand {i} count missing")
        (n,) = struct.unpack_from("<I", blob, offset)
        offset += 4
        nbytes = n * 12
        if offset + nbytes > len(blob):
            raise TruncatedFile(f"{path.name}: strand {i} vertices missing")
        verts = np.frombuffer(blob, dtype="<f4", count=n * 3, offset=offset)
        offset += nbytes
        strands.append(Strand(vertices=verts.reshape(n, 3).astype(np.float64)))
    return Hairstyle(id=path.stem, strands=strands, source="database")


def write_sidecar(style_id: str, caption: str, path) -> None:
    Path(path).write_text(json.dumps({"id": style_id, "caption": caption}, indent=0))


def load_database(directory) -> list:
    """Load every *.hair with its *.json sidecar.

    Entries missing a sidecar are warned about and skipped. Captions
    beyond 60 words get a convention warning. Duplicate ids abort.

    Raises
    ------
    DuplicateId
    """
    directory = Path(directory)
    styles = []
    seen = {}
    for hair_path in sorted(directory.glob("*.hair")):
        sidecar = hair_path.with_suffix(".json")
        if not sidecar.exists():
            logger.warning("skipping %s: no caption sidecar", hair_path.name)
            continue
        meta = json.loads(sidecar.read_text())
        style_id = str(meta["id"])
        caption = str(meta.get("caption", ""))
        if style_id in seen:
            raise DuplicateId(f"id {style_id!r} in {hair_path.name} and {seen[style_id]}")
        seen[style_id] = hair_path.name
        if len(caption.split()) > 60:
            logger.warning("caption of %s exceeds 60 words", style_id)
        loaded = read_hairstyle(hair_path)
        styles.append(Hairstyle(id=style_id, strands=loaded.strands,
                                caption=caption, source="database"))
    return styles


def thumbnail_path(directory, style_id: str) -> Path:
    return Path(directory) / f"{style_id}.thumb.png"


def save_index(index, path) -> None:
    """Serialize an EmbeddingIndex (see retrieval module) to disk."""
    path = Path(path)
    pid = index.provider_id.encode("utf-8")
    n, d = index.matrix.shape
    parts = [_INDEX_MAGIC, struct.pack("<I", _VERSION),
             struct.pack("<I", len(pid)), pid,
             struct.pack("<II", n, d),
             np.ascontiguousarray(index.matrix, dtype="<f4").tobytes()]
    for sid in index.ids:
        raw = sid.encode("utf-8")
        parts.append(struct.pack("<I", len(raw)))
        parts.append(raw)
    path.write_bytes(b"".join(parts))


def load_index(path):
    """Load an index file, re-normalizing rows defensively.

    Raises
    ------
    BadMagic, VersionUnsupported, TruncatedFile
    HairforgeError
        If any stored row is further than 1e-4 from unit norm.
    """
    from .retrieval import EmbeddingIndex

    path = Path(path)
    blob = path.read_bytes()
    if blob[:4] != _INDEX_MAGIC:
        raise BadMagic(f"{path.name}: expected HIDX magic")
    try:
        (version,) = struct.unpack_from("<I", blob, 4)
        if version != _VERSION:
            raise VersionUnsupported(f"{path.name}: version {version}")
        (pid_len,) = struct.unpack_from("<I", blob, 8)
        offset = 12
        provider_id = blob[offset:offset + pid_len].decode("utf-8")
        offset += pid_len
        n, d = struct.unpack_from("<II", blob, offset)
        offset += 8
        need = n * d * 4
        if offset + need > len(blob):
            raise TruncatedFile(f"{path.name}: matrix missing")
        matrix = np.frombuffer(blob, dtype="<f4", count=n * d,
                               offset=offset).reshape(n, d).astype(np.float64)
        offset += need
        ids = []
        for i in range(n):
            if offset + 4 > len(blob):
                raise TruncatedFile(f"{path.name}: id {i} missing")
            (id_len,) = struct.unpack_from("<I", blob, offset)
            offset += 4
            if offset + id_len > len(blob):
                raise TruncatedFile(f"{path.name}: id {i} bytes missing")
            ids.append(blob[offset:offset + id_len].decode("utf-8"))
            offset += id_len
    except struct.error as exc:
        raise TruncatedFile(f"{path.name}: {exc}") from exc

    if n:
        norms = np.linalg.norm(matrix, axis=1)
        deviation = float(np.abs(norms - 1.0).max())
        if deviation > 1e-4:
            raise HairforgeError(f"{path.name}: index rows not unit norm")
        if deviation > 1e-6:
            # renormalize only when beyond float32 storage noise, so a
            # save/load/save cycle of our own files stays byte-exact
            matrix = matrix / norms[:, None]
    return EmbeddingIndex(matrix=matrix, ids=tuple(ids), provider_id=provider_id)
