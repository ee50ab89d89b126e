import json

import numpy as np
import pytest

from relex import cache as K
from relex import groups as G
from relex import tower as T
from relex.config import ExperimentConfig, child_seed, parse_range, stream
from relex.errors import CorruptCache, ValidationError, VersionMismatch


def test_group_cache_roundtrip(surrogate2, tmp_path):
    inst, idx, _ = surrogate2
    p = tmp_path / "s.cache"
    K.save_group(p, idx, inst.family, dict(n=2))
    back = K.load_group(p, inst.rep, gens=inst.gens)
    for name in ("keys", "parent", "parent_label", "word_length", "table", "elements"):
        assert np.array_equal(getattr(back, name), getattr(idx, name))
    rng = np.random.default_rng(0)
    a, b = rng.integers(idx.order, size=(2, 1000))
    assert np.array_equal(back.mul_idx(a, b), idx.mul_idx(a, b))


def test_cache_is_bit_exact(surrogate2, tmp_path):
    inst, idx, _ = surrogate2
    K.save_group(tmp_path / "a", idx, inst.family, dict(n=2))
    K.save_group(tmp_path / "b", K.load_group(tmp_path / "a", inst.rep, gens=inst.gens), inst.family, dict(n=2))
    assert (tmp_path / "a").read_bytes() == (tmp_path / "b").read_bytes()


def test_truncated_cache(surrogate2, tmp_path):
    inst, idx, _ = surrogate2
    p = tmp_path / "s.cache"
    K.save_group(p, idx, inst.family, dict(n=2))
    raw = p.read_bytes()
    p.write_bytes(raw[:-100])
    with pytest.raises(CorruptCache):
        K.load_group(p, inst.rep, gens=inst.gens)
    p.write_bytes(b"garbage")
    with pytest.raises(CorruptCache):
        K.load_group(p, inst.rep, gens=inst.gens)


def test_tampered_table_detected(surrogate2, tmp_path, monkeypatch):
    inst, idx, _ = surrogate2
    bad = G.GroupIndex(idx.rep, idx.gens, idx.elements, idx.keys, idx.parent, idx.parent_label,
                       idx.word_length, np.roll(idx.table, 1, axis=0), idx.label_names)
    p = tmp_path / "t.cache"
    K.save_group(p, bad, inst.family, dict(n=2))
    with pytest.raises(CorruptCache):
        K.load_group(p, inst.rep, gens=inst.gens)


def test_generator_order_mismatch(tmp_path):
    rep = G.DihedralGroup(4)
    idx = G.enumerate_group(rep)
    p = tmp_path / "d.cache"
    K.save_group(p, idx, "dihedral", {})
    swapped = np.asarray(rep.gens)[::-1]
    with pytest.raises(VersionMismatch):
        K.load_group(p, rep, gens=swapped)


def test_version_mismatch(tmp_path):
    rep = G.ResidueGroup(2)
    idx = G.enumerate_group(rep)
    p = tmp_path / "z.cache"
    K.save_group(p, idx, "z4", {})
    raw = p.read_bytes()
    nl = raw.index(b"\n")
    head = json.loads(raw[:nl])
    head["version"] = 99
    p.write_bytes(json.dumps(head).encode() + raw[nl:])
    with pytest.raises(VersionMismatch):
        K.load_group(p, rep)


def test_tower_cache(tmp_path):
    t = T.build_tower(2, 2)
    sd = T.SchreierData.build(t.indices[1], 2)
    p = tmp_path / "h.cache"
    K.save_tower(p, sd, dict(m=2, level=2))
    head, arrays = K.load_tower(p, sd)
    assert head["rank"] == 5 and np.array_equal(arrays["arcs"], sd.arcs)
    off = 0
    for z, n in enumerate(arrays["word_lengths"]):
        assert arrays["words"][off:off + n].tolist() == sd.transversal(z)
        off += n


def test_config_roundtrip():
    cfg = ExperimentConfig(family="sl2-surrogate", n=[2, 3], lazy=True, seed=7)
    assert ExperimentConfig.loads(cfg.dumps()) == cfg


@pytest.mark.parametrize("text", [
    '{"family": "sl2-surrogate", "colour": 1}',
    '{"family": "nope"}',
    '{"family": "sl2-surrogate", "tol": NaN}',
    '{"family": "sl2-surrogate", "family": "sl2-surrogate"}',
    '[1, 2]',
    '{"n": [2]}',
])
def test_bad_configs_rejected(text):
    with pytest.raises(ValidationError):
        ExperimentConfig.loads(text)


def test_parse_range():
    assert parse_range("2..4") == [2, 3, 4]
    assert parse_range("1,3") == [1, 3]
    assert parse_range("5") == [5]
    with pytest.raises(ValidationError):
        parse_range("4..2")


def test_seed_streams_are_reproducible_and_distinct():
    a = stream(7, 1, 2).random(5)
    assert np.array_equal(a, stream(7, 1, 2).random(5))
    assert not np.array_equal(a, stream(7, 1, 3).random(5))
    assert child_seed(7, 11, 0) == child_seed(7, 11, 0) != child_seed(7, 11, 1)
