import pytest
from hypothesis import given, strategies as st

import telegraphsim as ts
from telegraphsim.config import RunConfig, parse_config, with_overrides
from telegraphsim.errors import ConfigError


def test_empty_document_gives_defaults():
    cfg = parse_config("")
    assert cfg == RunConfig()
    assert cfg.kind == "v"
    assert cfg.k_strong_absorb == 1.0
    assert cfg.k_weak_absorb == 1e-3
    assert cfg.mode == "nurules"
    assert cfg.duration == 2e6
    assert cfg.dt_max == 0.01
    assert cfg.trajectories == 1
    assert cfg.threshold_gap is None  # auto


def test_direct_mapping():
    cfg = parse_config("kind = lambda\nmode = original_no_observer\n")
    assert cfg.config_kind().configuration is ts.Configuration.LAMBDA
    assert cfg.mode_enum() is ts.Mode.ORIGINAL_NO_OBSERVER


def test_negative_rate_names_line():
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("k_weak_absorb = -1")


def test_unknown_key_names_line():
    with pytest.raises(ConfigError, match="line 2"):
        parse_config("kind = v\nfrobnicate = 3\n")


def test_malformed_line():
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("just some words")


def test_bad_enum_value():
    with pytest.raises(ConfigError, match="line 1"):
        parse_config("kind = w")


def test_comments_and_blanks_ignored():
    cfg = parse_config("# a comment\n\nkind = v  # trailing comment\n")
    assert cfg.kind == "v"


def test_threshold_auto_and_explicit():
    assert parse_config("threshold_gap = auto").threshold_gap is None
    assert parse_config("threshold_gap = 55.5").threshold_gap == 55.5
    # auto resolves to 20x the strong cycle time
    cfg = parse_config("k_strong_absorb = 2.0\nk_strong_emit = 2.0")
    assert cfg.resolved_threshold() == pytest.approx(20.0)


def test_seed_range():
    assert parse_config("master_seed = 0").master_seed == 0
    assert parse_config(f"master_seed = {2**64 - 1}").master_seed == 2**64 - 1
    with pytest.raises(ConfigError):
        parse_config(f"master_seed = {2**64}")
    with pytest.raises(ConfigError):
        parse_config("master_seed = -1")


def test_depth_constraints():
    with pytest.raises(ConfigError):
        parse_config("depth = 0")
    with pytest.raises(ConfigError):
        parse_config("depth = 5\nmax_depth = 3")


def test_flag_overrides_file_values():
    cfg = parse_config("kind = lambda\nduration = 10\n")
    out = with_overrides(cfg, kind="v", master_seed=9)
    assert out.kind == "v"
    assert out.duration == 10.0
    assert out.master_seed == 9


@given(
    ksa=st.floats(min_value=1e-6, max_value=1e6),
    kwe=st.floats(min_value=1e-6, max_value=1e6),
    seed=st.integers(min_value=0, max_value=2**64 - 1),
)
def test_roundtrip_of_valid_documents(ksa, kwe, seed):
    text = f"k_strong_absorb = {ksa!r}\nk_weak_emit = {kwe!r}\nmaster_seed = {seed}\n"
    cfg = parse_config(text)
    assert cfg.k_strong_absorb == ksa
    assert cfg.k_weak_emit == kwe
    assert cfg.master_seed == seed
