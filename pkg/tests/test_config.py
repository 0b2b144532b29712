import json

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from duavsim.config import (ConfigError, Scenario, SimConfig, Strategy, SweepSpec,
                            apply_overrides, expand_sweep, load_config, save_config,
                            preset, validate)

FLYING_BS_TOML = """
area_m2 = 1e6
bandwidth_hz = 2e9
bs_density_per_m2 = 0.0
uav_density_per_m2 = 1e-4
ue_density_per_m2 = 0.2
eaves_density_per_m2 = 0.001
uav_altitude_m = 300
uav_tx_mw = 200
ue_tx_mw = 230
beta_dbm = -120
eta = 0.6
noise_dbm = -130
alpha_air = 2
alpha_ground = 4
scenario = "flying-bs"
"""


def test_load_table_flying_bs_column(tmp_path):
    path = tmp_path / "fbs.toml"
    path.write_text(FLYING_BS_TOML)
    cfg = load_config(path)
    assert cfg.area_m2 == 1e6
    assert cfg.bandwidth_hz == 2e9
    assert cfg.uav_density_per_m2 == 1e-4
    assert cfg.ue_density_per_m2 == 0.2
    assert cfg.uav_altitude_m == 300
    assert (cfg.uav_tx_mw, cfg.ue_tx_mw) == (200, 230)
    assert (cfg.beta_dbm, cfg.eta, cfg.noise_dbm) == (-120, 0.6, -130)
    assert (cfg.alpha_air, cfg.alpha_ground) == (2, 4)
    # defaults for what the table omits
    assert cfg.jammer_power_mw == 230
    assert cfg.rician_k_db == 10.0
    assert cfg.underlay_prob == 0.5
    assert cfg.min_link_distance_m == 1.0
    assert cfg.strategy is Strategy.NEW
    assert cfg == preset("flying-bs").with_(n_drops=200)


def test_empty_file_reports_required_keys(tmp_path):
    path = tmp_path / "empty.toml"
    path.write_text("")
    with pytest.raises(ConfigError, match="required keys absent"):
        load_config(path)


def test_eta_out_of_range_rejected(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text(FLYING_BS_TOML.replace("eta = 0.6", "eta = 1.4"))
    with pytest.raises(ConfigError) as err:
        load_config(path)
    assert "eta out of [0,1]" in err.value.violations


def test_unknown_key_rejected(tmp_path):
    path = tmp_path / "bad.toml"
    path.write_text(FLYING_BS_TOML + "lambda_A = 0.2\n")
    with pytest.raises(ConfigError, match="unknown"):
        load_config(path)


def test_missing_and_unparseable(tmp_path):
    with pytest.raises(ConfigError, match="not found"):
        load_config(tmp_path / "nope.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("eta = = 3")
    with pytest.raises(ConfigError, match="cannot parse"):
        load_config(bad)
    nested = tmp_path / "nested.json"
    nested.write_text(json.dumps({"channel": {"alpha": 2}}))
    with pytest.raises(ConfigError, match="flat"):
        load_config(nested)


def test_validate_aerial_ue_column_ok():
    cfg = preset("aerial-ue")
    assert (cfg.bs_density_per_m2, cfg.uav_density_per_m2, cfg.ue_density_per_m2) == (4e-5, 1e-3, 0.01)
    assert (cfg.eaves_density_per_m2, cfg.uav_altitude_m, cfg.ue_tx_mw, cfg.eta) == (0.098, 200, 300, 0.5)
    assert validate(cfg) == []
    assert validate(preset("flying-bs")) == []


def test_validate_collects_every_violation():
    cfg = preset("flying-bs").with_(eta=-0.1, uav_density_per_m2=0.0, alpha_air=1.5)
    bad = validate(cfg)
    assert "eta out of [0,1]" in bad
    assert any(v.startswith("no flying BSs") for v in bad)
    assert any("alpha_air" in v for v in bad)
    assert len(bad) == 3
    assert any(v.startswith("no ground BSs")
               for v in validate(preset("aerial-ue").with_(bs_density_per_m2=0.0)))


@pytest.mark.parametrize("suffix", [".toml", ".json"])
def test_round_trip(tmp_path, suffix):
    cfg = preset("aerial-ue", jammer_tx_mw=150.0, master_seed=2**64 - 1,
                  strategy=Strategy.TRADITIONAL, rician_k_db=float("inf"))
    path = tmp_path / f"c{suffix}"
    save_config(cfg, path)
    assert load_config(path) == cfg


@settings(max_examples=60, deadline=None)
@given(eta=st.floats(0, 1), k=st.floats(-20, 40), seed=st.integers(0, 2**64 - 1),
       dens=st.floats(1e-6, 1.0), scenario=st.sampled_from(list(Scenario)))
def test_round_trip_property(tmp_path_factory, eta, k, seed, dens, scenario):
    cfg = preset(scenario, eta=eta, rician_k_db=k, master_seed=seed, eaves_density_per_m2=dens)
    path = tmp_path_factory.mktemp("rt") / "c.toml"
    save_config(cfg, path)
    assert load_config(path) == cfg


def test_expand_sweep_eaves():
    cfg = preset("flying-bs")
    out = expand_sweep(cfg, SweepSpec("eaves_density_per_m2", (0.001, 0.05, 0.1, 0.154)))
    assert [c.eaves_density_per_m2 for c in out] == [0.001, 0.05, 0.1, 0.154]
    for c in out:
        assert c.with_(eaves_density_per_m2=cfg.eaves_density_per_m2) == cfg


def test_expand_sweep_single_and_uav():
    cfg = preset("aerial-ue")
    assert expand_sweep(cfg, SweepSpec("eta", (0.3,))) == [cfg.with_(eta=0.3)]
    out = expand_sweep(cfg, SweepSpec.parse("uav_density_per_m2=1e-3,5.5e-3"))
    assert [c.uav_density_per_m2 for c in out] == [1e-3, 5.5e-3]


def test_expand_sweep_errors():
    cfg = preset("aerial-ue")
    with pytest.raises(ConfigError, match="not a numeric"):
        expand_sweep(cfg, SweepSpec("scenario", (1.0,)))
    with pytest.raises(ConfigError, match="monotone"):
        expand_sweep(cfg, SweepSpec("eta", (0.1, 0.3, 0.2)))
    with pytest.raises(ConfigError, match="empty"):
        expand_sweep(cfg, SweepSpec("eta", ()))


@settings(max_examples=40, deadline=None)
@given(st.lists(st.floats(0, 1), min_size=1, max_size=8, unique=True))
def test_expand_sweep_property(values):
    values = sorted(values)
    cfg = preset("flying-bs")
    out = expand_sweep(cfg, SweepSpec("eta", values))
    assert len(out) == len(values)
    assert all(c.with_(eta=cfg.eta) == cfg for c in out)


def test_overrides():
    cfg = apply_overrides(preset("flying-bs"), ["eta=0.3", "beta_interpretation=sinr-db", "n_drops=7"])
    assert cfg.eta == 0.3 and cfg.n_drops == 7
    assert cfg.beta_interpretation.value == "sinr-db"
    with pytest.raises(ConfigError):
        apply_overrides(cfg, ["nonsense=1"])
    with pytest.raises(ConfigError):
        apply_overrides(cfg, ["scenario=moon"])


def test_config_is_frozen():
    cfg = preset("flying-bs")
    with pytest.raises(Exception):
        cfg.eta = 0.1
    assert isinstance(cfg, SimConfig)
