import json

import pytest

from torusop.config import (ConfigError, ExperimentConfig, from_dict, load_config, norm_ps,
                            orbit_alphas, recover_beta)

BASE = {"experiment": {"n": 1, "N": 64, "J": 8, "K": 8}, "symbol": {"catalog": "constant"}}


def with_(section, **kv):
    raw = json.loads(json.dumps(BASE))
    raw.setdefault(section, {}).update(kv)
    return raw


def test_defaults_and_roundtrip():
    cfg = from_dict(BASE)
    assert cfg.experiment.A_max == 10 and cfg.tolerances.slope == 0.05
    assert from_dict(cfg.to_dict()) == cfg


def test_toml_file(tmp_path):
    p = tmp_path / "c.toml"
    p.write_text('[experiment]\nn = 2\nN = 32\nJ = 4\nK = 4\n[symbol]\nspec = "exp(i*x1)"\n')
    cfg = load_config(p)
    assert (cfg.experiment.n, cfg.experiment.K, cfg.symbol.spec) == (2, 4, "exp(i*x1)")


def test_json_envelope_reloads(tmp_path):
    cfg = from_dict(BASE)
    p = tmp_path / "r.json"
    p.write_text(json.dumps({"schema": "x", "config": cfg.to_dict(), "records": []}))
    assert load_config(p) == cfg


@pytest.mark.parametrize("raw,path", [
    (with_("experiment", K=9), "experiment.K"),
    (with_("experiment", J=20), "experiment.J"),
    (with_("experiment", N=48), "experiment.N"),
    (with_("experiment", n=4), "experiment.n"),
    (with_("experiment", A_max=3), "experiment.A_max"),
    (with_("experiment", p=[0]), "experiment.p[0]"),
    (with_("experiment", seed=-1), "experiment.seed"),
    (with_("experiment", n="one"), "experiment.n"),
    (with_("symbol", spec="1"), "symbol"),
    (with_("symbol", catalog="nope"), "symbol.catalog"),
    (with_("tolerances", norm=0.0), "tolerances.norm"),
    (with_("tolerances", richardson_low=30.0), "tolerances.richardson_low"),
    (with_("orbit", h=1.0), "orbit.h"),
    (with_("orbit", alphas=[[5]]), "orbit.alphas[0]"),
    (with_("invert", J_out=5), "invert.J_out"),
    (with_("invert", lam=0.0), "invert.lam"),
    (with_("recover", beta=[0]), "recover.beta"),
    (with_("bogus", x=1), "bogus"),
    (with_("experiment", typo=1), "experiment.typo"),
])
def test_field_path_errors(raw, path):
    with pytest.raises(ConfigError) as info:
        from_dict(raw)
    assert info.value.path == path
    assert str(info.value).startswith(path)


def test_bad_spec_reports_position():
    raw = {"experiment": {"n": 1, "N": 64, "J": 4, "K": 4}, "symbol": {"spec": "exp(i*x1"}}
    with pytest.raises(ConfigError, match="symbol.spec"):
        from_dict(raw)


def test_unreadable_and_malformed(tmp_path):
    with pytest.raises(ConfigError, match="cannot read"):
        load_config(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("[experiment\n")
    with pytest.raises(ConfigError):
        load_config(bad)
    badj = tmp_path / "bad.json"
    badj.write_text("{")
    with pytest.raises(ConfigError, match="invalid JSON"):
        load_config(badj)


def test_replace_validates():
    cfg = from_dict(BASE)
    assert cfg.replace("experiment", seed=7).experiment.seed == 7
    with pytest.raises(ConfigError):
        cfg.replace("experiment", K=99)


def test_derived_defaults():
    cfg = from_dict(with_("experiment", n=2, N=32, J=4, K=4))
    assert orbit_alphas(cfg) == [(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)] or \
        sorted(orbit_alphas(cfg)) == sorted([(1, 0), (0, 1), (2, 0), (1, 1), (0, 2)])
    assert recover_beta(cfg) == (2, 2)
    assert norm_ps(cfg) == (2, 3)
    assert norm_ps(from_dict(BASE)) == (1, 2)


def test_shipped_configs_load():
    from pathlib import Path
    root = Path(__file__).resolve().parents[1] / "configs"
    files = sorted(root.glob("*.toml"))
    assert files
    for f in files:
        assert isinstance(load_config(f), ExperimentConfig)
