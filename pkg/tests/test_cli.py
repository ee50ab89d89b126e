import json

import pytest

from relex.cli import run


def read(capsys):
    return json.loads(capsys.readouterr().out)


def test_group_order(capsys):
    assert run(["group", "--family", "sl2-kernel", "--n", "3"]) == 0
    out = read(capsys)
    assert out["instances"][0]["order"] == 64


def test_unknown_flag_writes_nothing(tmp_path, capsys):
    target = tmp_path / "r.json"
    assert run(["spectra", "relgap", "--n", "2", "--bogus", "-o", str(target)]) == 2
    assert list(tmp_path.iterdir()) == []


def test_beyond_cap_exit_3(capsys):
    assert run(["spectra", "relgap", "--n", "9"]) == 3
    assert "largest feasible n = 4" in capsys.readouterr().err


def test_relgap_report_fields(tmp_path):
    target = tmp_path / "r.json"
    assert run(["spectra", "relgap", "--family", "sl2-surrogate", "--n", "2", "--lazy", "-o", str(target)]) == 0
    row = json.loads(target.read_text())["instances"][0]
    for key in ("family", "n", "convention", "operator", "theta", "witness_hash", "residual"):
        assert key in row
    assert row["lazy"] is True and row["operator"] == "(I+M_S)/2"


def test_poincare_report(capsys):
    assert run(["spectra", "poincare", "--family", "sl2-surrogate", "--n", "2", "--form", "element"]) == 0
    row = read(capsys)["instances"][0]
    assert row["C_star"] > 0 and row["convention"] == "ordered"


def test_cayley_export(tmp_path, capsys):
    target = tmp_path / "edges.txt"
    assert run(["cayley", "--family", "sl2-surrogate", "--n", "2", "--export", str(target)]) == 0
    assert read(capsys)["instances"][0]["degree"] == 10
    assert len(target.read_text().splitlines()) == 128 * 5


def test_cache_dir_env(tmp_path, monkeypatch, capsys):
    monkeypatch.setenv("RELEX_CACHE_DIR", str(tmp_path))
    assert run(["group", "--family", "sl2-surrogate", "--n", "2", "--emit", "cache", "--cache-dir", "elsewhere"]) == 0
    capsys.readouterr()
    assert any(p.suffix == ".cache" for p in tmp_path.iterdir())
    assert run(["group", "--family", "sl2-surrogate", "--n", "2"]) == 0
    assert read(capsys)["instances"][0]["order"] == 128


def test_tower_cache(tmp_path, capsys):
    assert run(["tower", "--m", "2", "--levels", "2", "--emit", "cache", "--cache-dir", str(tmp_path)]) == 0
    out = read(capsys)
    assert [r.get("order") for r in out["tower"][:2]] == [1, 4]
    assert out["tower"][2]["log2_order"] == 7


def test_detect_fiber_jsonl(tmp_path):
    target = tmp_path / "trials.jsonl"
    args = ["detect", "fiber", "--family", "sl2-surrogate", "--n", "2", "--expander-n", "256", "--trials", "3",
            "--seed", "7", "-o", str(target)]
    assert run(args) == 0
    rows = [json.loads(line) for line in target.read_text().splitlines()]
    assert len(rows) == 3
    for r in rows:
        assert set(["seed", "|X|", "bound", "fiber_size", "fiber_diam", "y"]) <= set(r)
        assert r["fiber_size"] >= r["bound"]


def test_embed_compression(capsys):
    assert run(["embed", "compression", "--family", "sl2-wreath-haagerup", "--n", "1", "--lamp", "z2"]) == 0
    row = read(capsys)["instances"][0]
    assert row["lipschitz"] <= 1 + 1e-12


def test_embed_sandwich_and_refute(capsys):
    assert run(["embed", "sandwich", "--family", "sl2-wreath-haagerup", "--n", "2", "--lamp", "z2",
                "--samples", "10000"]) == 0
    assert read(capsys)["instances"][0]["violations"] == 0
    assert run(["detect", "refute"]) == 0
    assert read(capsys)["strictly_increasing"] is True


def test_calculators(capsys):
    assert run(["spectra", "interpolate", "--p", "4", "--theta", "0.5", "--c", "0.5"]) == 0
    assert read(capsys)["n0"] == 3
    assert run(["spectra", "curved", "--theta", "0.5"]) == 0
    assert read(capsys)["n0"] == 3
    assert run(["spectra", "cheeger", "--graph", "cycle:8"]) == 0
    assert read(capsys)["h"] == 0.5


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"family": "sl2-kernel", "n": [2]}))
    assert run(["group", "--config", str(cfg)]) == 0
    assert read(capsys)["instances"][0]["order"] == 8
    cfg.write_text(json.dumps({"family": "sl2-kernel", "extra": 1}))
    assert run(["group", "--config", str(cfg)]) == 2


def test_property_violation_exit_4(monkeypatch):
    from relex import embed

    def boom(*a, **k):
        raise embed.SandwichViolation("forced")

    monkeypatch.setattr(embed, "sandwich_check", boom)
    assert run(["embed", "sandwich", "--family", "sl2-wreath-haagerup", "--n", "1", "--lamp", "z2"]) == 4
