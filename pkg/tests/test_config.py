import pytest

from hsmd.config import ConfigError, PipelineConfig, load_config, parse_overrides, source_kind
from hsmd.synthetic import MovingSquare, write_cdnet_video


def test_empty_file_gives_defaults(tmp_path):
    path = tmp_path / "empty.yaml"
    path.write_text("")
    cfg = load_config(path)
    assert cfg == PipelineConfig()
    assert cfg.c == 17.5 and cfg.kernel == (3, 3) and cfg.bs.threshold == 15
    assert cfg.neuron.v_th == -55.0 and cfg.weights.w_syn == 1555.0


def test_no_file_gives_defaults():
    assert load_config(None) == PipelineConfig()


def test_flag_overrides_file(tmp_path):
    path = tmp_path / "c.yaml"
    path.write_text("c: 10\nbs:\n  threshold: 30\n")
    cfg = load_config(path, parse_overrides(["c=17.5"]))
    assert cfg.c == 17.5
    assert cfg.bs.threshold == 30


def test_nested_override():
    cfg = load_config(None, parse_overrides(["neuron.v_th=-50", "bs.mode=frame-diff"]))
    assert cfg.neuron.v_th == -50.0 and cfg.bs.mode == "frame-diff"


def test_vth_not_above_reset_names_both(tmp_path):
    path = tmp_path / "bad.yaml"
    path.write_text("neuron:\n  v_th: -75\n  v_reset: -70\n")
    with pytest.raises(ConfigError) as info:
        load_config(path)
    message = str(info.value)
    assert "neuron.v_th" in message and "neuron.v_reset" in message


def test_parse_error_has_line(tmp_path):
    path = tmp_path / "broken.yaml"
    path.write_text("c: 1\nbs:\n  threshold: [1, 2\n")
    with pytest.raises(ConfigError, match="line"):
        load_config(path)


def test_unknown_key_rejected():
    with pytest.raises(ConfigError, match="bogus"):
        load_config(None, {"bogus": 1})


def test_every_bad_field_listed():
    with pytest.raises(ConfigError) as info:
        load_config(None, {"threads": 0, "substeps": 0, "kernel": [2, 3]})
    assert len(info.value.errors) == 3


def test_wrong_type_rejected():
    with pytest.raises(ConfigError, match="c"):
        load_config(None, {"c": "lots"})


def test_bad_override_syntax():
    with pytest.raises(ConfigError):
        parse_overrides(["novalue"])


def test_seed_flows_to_background_model():
    assert load_config(None, {"seed": 7}).bs.seed == 7


def test_source_kinds(tmp_path):
    assert source_kind(0) == "device"
    assert source_kind("0") == "device"
    assert source_kind(str(tmp_path / "clip.avi")) == "video"
    assert source_kind(str(tmp_path)) == "sequence"
    rgb, gts = MovingSquare(size=16, frames=2, square=4).generate()
    write_cdnet_video(tmp_path / "ds", "baseline", "v", rgb, gts)
    assert source_kind(str(tmp_path / "ds")) == "dataset"


def test_to_dict_roundtrip():
    cfg = load_config(None, {"c": 12.0, "bs": {"mode": "frame-diff"}})
    assert load_config(None, cfg.to_dict()) == cfg
