import json

import pytest

from aircanyon.cli import main
from aircanyon.config import ENV_VAR, ConfigError, RunConfig, config_from_snapshot, load_config
from conftest import corpus_path


def write(tmp_path, doc, name="cfg.json"):
    p = tmp_path / name
    p.write_text(json.dumps(doc) if not isinstance(doc, str) else doc)
    return str(p)


def test_defaults(monkeypatch):
    monkeypatch.delenv(ENV_VAR, raising=False)
    cfg = load_config()
    assert cfg.geometry.border_distance_max == 3.0
    assert cfg.geometry.gap_max == 5.0
    assert cfg.flow.wake_max == 0.70
    assert cfg.shape.narrow_min == 1.5
    assert cfg.albedo_table["concrete"] == 0.30


@pytest.mark.parametrize("doc", [{"gap_max": 10}, {"geometry": {"gap_max": 10}}])
def test_partial_override(tmp_path, doc):
    cfg = load_config(write(tmp_path, doc))
    assert cfg.geometry.gap_max == 10
    assert cfg.geometry.border_distance_max == 3.0
    assert cfg.flow == RunConfig().flow


@pytest.mark.parametrize("doc", [{"gap_max": -1}, {"flow": {"isolated_max": 0.9}}, {"mystery": 1},
                                 {"geometry": {"nope": 1}}, "{not json", [1, 2]])
def test_bad_config_raises(tmp_path, doc):
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, doc))


def test_bad_config_exit_78(tmp_path, capsys):
    code = main(["extract", "--city", corpus_path("canyon_80_40"), "--config",
                 write(tmp_path, {"border_distance_max": -3}), "--out", str(tmp_path / "inv.json")])
    assert code == 78
    assert "border_distance_max" in capsys.readouterr().err
    assert not (tmp_path / "inv.json").exists()


def test_missing_config_file_exit_78(tmp_path):
    assert main(["extract", "--city", corpus_path("canyon_80_40"), "--config",
                 str(tmp_path / "absent.json"), "--out", str(tmp_path / "inv.json")]) == 78


def test_env_fallback(tmp_path, monkeypatch):
    monkeypatch.setenv(ENV_VAR, write(tmp_path, {"coverage_min": 0.5}))
    assert load_config().geometry.coverage_min == 0.5
    # an explicit path wins over the environment
    assert load_config(write(tmp_path, {"coverage_min": 0.9}, "other.json")).geometry.coverage_min == 0.9


def test_albedo_table_path(tmp_path):
    write(tmp_path, {"albedo": {"concrete": 0.4, "glass": 0.08}}, "albedo.json")
    cfg = load_config(write(tmp_path, {"albedo_table": "albedo.json"}))
    assert cfg.albedo_table == {"concrete": 0.4, "glass": 0.08}
    with pytest.raises(ConfigError, match="not found"):
        load_config(write(tmp_path, {"albedo_table": "missing.json"}))
    write(tmp_path, {"concrete": 4}, "bad.json")
    with pytest.raises(ConfigError):
        load_config(write(tmp_path, {"albedo_table": "bad.json"}))


def test_snapshot_round_trip(tmp_path):
    cfg = load_config(write(tmp_path, {"gap_max": 7, "flow": {"strong_intensity_min": 6}}))
    back = config_from_snapshot(json.loads(json.dumps(cfg.snapshot())))
    assert back.geometry == cfg.geometry and back.flow == cfg.flow and back.shape == cfg.shape
    assert back.albedo_table == cfg.albedo_table


def test_output_paths_from_config(tmp_path):
    out = tmp_path / "inv.json"
    cfg = write(tmp_path, {"output": {"inventory": str(out)}})
    assert main(["extract", "--city", corpus_path("canyon_80_40"), "--config", cfg]) == 0
    assert json.loads(out.read_text())["kind"] == "canyon-inventory"
