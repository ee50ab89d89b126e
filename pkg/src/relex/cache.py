"""On-disk caches: one JSON header line followed by raw little-endian arrays.

The header records the family, its parameters, the generators as canonical
strings and a hash of those strings, plus a sha256 of the binary payload.
Loading re-derives the generators from a freshly built representation, so a
cache written for a different generating tuple is refused.
"""
from __future__ import annotations

import hashlib
import json
import os
import tempfile

import numpy as np

from . import groups as G
from .errors import CorruptCache, VersionMismatch

FORMAT = "relex-cache"
VERSION = 1
SPOT_CHECKS = 1000


def generator_strings(rep, gens) -> list:
    gens = np.asarray(gens, dtype=np.int64).reshape(-1, rep.width)
    return [f"{rep.name}:" + ",".join(str(int(v)) for v in row) for row in gens]


def generator_hash(strings) -> str:
    return hashlib.sha256("\n".join(strings).encode()).hexdigest()


def atomic_write(path, data: bytes):
    path = os.fspath(path)
    d = os.path.dirname(os.path.abspath(path))
    os.makedirs(d, exist_ok=True)
    fd, tmp = tempfile.mkstemp(dir=d, prefix=".tmp-")
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(data)
        os.replace(tmp, path)
    except BaseException:
        if os.path.exists(tmp):
            os.unlink(tmp)
        raise


def write_arrays(path, header: dict, arrays: dict):
    specs, chunks, offset = [], [], 0
    for name, a in arrays.items():
        a = np.ascontiguousarray(a)
        dt = a.dtype.newbyteorder("<")
        b = a.astype(dt, copy=False).tobytes()
        specs.append(dict(name=name, dtype=dt.str, shape=list(a.shape), offset=offset, nbytes=len(b)))
        chunks.append(b)
        offset += len(b)
    payload = b"".join(chunks)
    head = dict(header, format=FORMAT, version=VERSION, arrays=specs,
                payload_sha256=hashlib.sha256(payload).hexdigest())
    line = json.dumps(head, sort_keys=True, separators=(",", ":")).encode() + b"\n"
    atomic_write(path, line + payload)


def read_arrays(path):
    try:
        with open(path, "rb") as fh:
            raw = fh.read()
    except OSError as exc:
        raise CorruptCache(f"cannot read cache {path}: {exc}") from exc
    nl = raw.find(b"\n")
    if nl < 0:
        raise CorruptCache("cache header is not terminated")
    try:
        head = json.loads(raw[:nl])
    except ValueError as exc:
        raise CorruptCache("cache header is not valid JSON") from exc
    if head.get("format") != FORMAT:
        raise CorruptCache("not a relex cache")
    if head.get("version") != VERSION:
        raise VersionMismatch(f"cache version {head.get('version')} != {VERSION}")
    payload = raw[nl + 1:]
    if hashlib.sha256(payload).hexdigest() != head.get("payload_sha256"):
        raise CorruptCache("payload checksum mismatch (truncated or modified file)")
    arrays = {}
    for s in head["arrays"]:
        chunk = payload[s["offset"]:s["offset"] + s["nbytes"]]
        if len(chunk) != s["nbytes"]:
            raise CorruptCache(f"array {s['name']} is truncated")
        arrays[s["name"]] = np.frombuffer(chunk, dtype=np.dtype(s["dtype"])).reshape(s["shape"]).copy()
    return head, arrays


# ---------------------------------------------------------------------------
# group indices


def save_group(path, idx: G.GroupIndex, family: str, params: dict):
    strings = generator_strings(idx.rep, idx.gens)
    header = dict(kind="group", family=family, params=params, order=idx.order, group=idx.rep.name,
                  generators=strings, generator_hash=generator_hash(strings),
                  label_names=list(idx.label_names))
    write_arrays(path, header, dict(gens=idx.gens, keys=idx.keys, parent=idx.parent,
                                    parent_label=idx.parent_label, word_length=idx.word_length,
                                    table=idx.table))


def load_group(path, rep: G.ArrayGroup, gens=None, spot_checks: int = SPOT_CHECKS, seed: int = 0) -> G.GroupIndex:
    """Load a cached index for ``rep`` (generators default to the cached ones' expected value)."""
    head, a = read_arrays(path)
    if head.get("kind") != "group":
        raise CorruptCache(f"expected a group cache, found {head.get('kind')!r}")
    gens = rep.gen_rows if gens is None else np.asarray(gens, dtype=np.int64)
    expected = generator_hash(generator_strings(rep, gens))
    if head["generator_hash"] != expected or generator_hash(head["generators"]) != head["generator_hash"]:
        raise VersionMismatch("cache was written for a different generating tuple")
    keys = a["keys"].astype(np.int64)
    if keys.size != head["order"]:
        raise CorruptCache("element count disagrees with the header")
    idx = G.GroupIndex(rep=rep, gens=a["gens"].astype(np.int64), elements=rep.rows(keys), keys=keys,
                       parent=a["parent"].astype(np.int64), parent_label=a["parent_label"].astype(np.int64),
                       word_length=a["word_length"].astype(np.int32), table=a["table"].astype(np.int32),
                       label_names=tuple(head["label_names"]))
    verify_products(idx, spot_checks, seed)
    return idx


def verify_products(idx: G.GroupIndex, samples: int = SPOT_CHECKS, seed: int = 0):
    """Recompute ``samples`` random table entries and random products."""
    if np.unique(idx.keys).size != idx.keys.size:
        raise CorruptCache("duplicate element keys")
    rng = np.random.default_rng(seed)
    labels, _ = G.symmetrize(idx.gens, idx.rep, None)
    i = rng.integers(idx.order, size=samples)
    j = rng.integers(labels.shape[0], size=samples)
    got = idx.index_of(idx.rep.bmul(idx.elements[i], labels[j]), strict=False)
    if np.any(got != idx.table[i, j]):
        raise CorruptCache("cached multiplication table disagrees with recomputation")
    a, b = rng.integers(idx.order, size=(2, samples))
    if np.any(idx.index_of(idx.rep.bmul(idx.elements[a], idx.elements[b]), strict=False) < 0):
        raise CorruptCache("cached element set is not closed under multiplication")


# ---------------------------------------------------------------------------
# tower data


def save_tower(path, sd, params: dict):
    """Transversal words, the non-tree arc index and the Schreier rank."""
    words = [sd.transversal(z) for z in range(sd.base.order)]
    lengths = np.array([len(w) for w in words], dtype=np.int64)
    flat = np.array([c for w in words for c in w], dtype=np.int64)
    strings = generator_strings(sd.base.rep, sd.base.gens)
    header = dict(kind="tower", family="h-tower", params=params, order=sd.base.order, rank=sd.rank, m=sd.m,
                  group=sd.base.rep.name, generators=strings, generator_hash=generator_hash(strings))
    write_arrays(path, header, dict(word_lengths=lengths, words=flat, arcs=sd.arcs, tree=sd.tree.astype(np.uint8)))


def load_tower(path, sd=None):
    """Return (header, arrays); with ``sd`` also compare against a rebuilt SchreierData."""
    head, a = read_arrays(path)
    if head.get("kind") != "tower":
        raise CorruptCache(f"expected a tower cache, found {head.get('kind')!r}")
    if a["arcs"].size != head["rank"]:
        raise CorruptCache("rank disagrees with the stored arc index")
    if sd is not None:
        expected = generator_hash(generator_strings(sd.base.rep, sd.base.gens))
        if head["generator_hash"] != expected:
            raise VersionMismatch("tower cache was written for a different base generating tuple")
        if not np.array_equal(a["arcs"], sd.arcs):
            raise CorruptCache("non-tree arc index disagrees with recomputation")
    return head, a
