import pytest

from artinv.config import ENV_OUTPUT_DIR, ConfigError, load_config, parse_config_text


@pytest.fixture
def table(tmp_path):
    p = tmp_path / "frames.csv"
    p.write_text("speaker_id,gender,age,period,vowel,f1,f2,f3,f4,duration_ms,source\n")
    return p


def write(tmp_path, text):
    p = tmp_path / "run.cfg"
    p.write_text(text)
    return p


def test_minimal_file_gets_defaults(tmp_path, table, monkeypatch):
    monkeypatch.delenv(ENV_OUTPUT_DIR, raising=False)
    cfg = load_config(write(tmp_path, "input = frames.csv\noutput_dir = out\n"))
    assert cfg.input == table
    assert cfg.output_dir == tmp_path / "out"
    assert cfg.inversion.restarts == 20
    assert cfg.inversion.max_iter == 500
    assert cfg.acoustics.loss_model == "lossless"
    assert cfg.ceiling.ceilings[0] == 4500.0 and cfg.ceiling.ceilings[-1] == 6500.0
    assert cfg.bootstrap.resamples == 2000
    assert cfg.seed == 0


def test_values_are_applied(tmp_path, table):
    cfg = load_config(write(tmp_path, """
        # comment
        input = frames.csv
        output_dir = out
        restarts = 7   # fewer for speed
        seed = 42
        loss_model = lossy
        ceiling_min = 5000
        ceiling_max = 5500
        ceiling_step = 100
        workers = 1
    """))
    assert cfg.inversion.restarts == 7 and cfg.inversion.seed == 42 and cfg.seed == 42
    assert cfg.acoustics.lossy
    assert cfg.ceiling.ceilings == (5000.0, 5100.0, 5200.0, 5300.0, 5400.0, 5500.0)
    assert cfg.worker_count == 1


def test_zero_restarts_rejected(tmp_path, table):
    with pytest.raises(ConfigError, match="restarts"):
        load_config(write(tmp_path, "input = frames.csv\noutput_dir = out\nrestarts = 0\n"))


def test_unknown_key_named(tmp_path, table):
    with pytest.raises(ConfigError, match="'restart_count'"):
        load_config(write(tmp_path, "input = frames.csv\noutput_dir = out\nrestart_count = 3\n"))


def test_all_problems_reported(tmp_path):
    with pytest.raises(ConfigError) as exc:
        load_config(write(tmp_path, "seed = abc\nftol = x\n"))
    keys = " ".join(exc.value.problems)
    assert "seed" in keys and "ftol" in keys


def test_missing_paths(tmp_path, monkeypatch):
    monkeypatch.delenv(ENV_OUTPUT_DIR, raising=False)
    with pytest.raises(ConfigError) as exc:
        load_config(write(tmp_path, "input = nope.csv\n"))
    text = str(exc.value)
    assert "input" in text and "output_dir" in text


def test_environment_overrides_output_dir(tmp_path, table, monkeypatch):
    monkeypatch.setenv(ENV_OUTPUT_DIR, str(tmp_path / "elsewhere"))
    cfg = load_config(write(tmp_path, "input = frames.csv\noutput_dir = out\n"))
    assert cfg.output_dir == tmp_path / "elsewhere"


def test_malformed_line():
    with pytest.raises(ConfigError, match="line 1"):
        parse_config_text("just words\n")


def test_config_hash_tracks_settings(tmp_path, table):
    a = load_config(write(tmp_path, "input = frames.csv\noutput_dir = out\n"))
    b = load_config(write(tmp_path, "input = frames.csv\noutput_dir = other\n"))
    c = load_config(write(tmp_path, "input = frames.csv\noutput_dir = out\nseed = 1\n"))
    assert a.config_hash() == b.config_hash() != c.config_hash()
