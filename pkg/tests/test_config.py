import math

import pytest

from irsbeam.config import ConfigError, ScenarioConfig, dbm_to_watts, parse_config

GOOD = """
K = 4
N = 10
sigma2_o_dbm = -70
sigma2_f_dbm = -70
sigma2_e_dbm = -70
p_t_dbm = 30
eta = 1
seed = 99
"""


def test_parse_roundtrip():
    cfg = parse_config(GOOD)
    assert cfg.K == 4 and cfg.N == 10 and cfg.seed == 99
    assert cfg.p_t == pytest.approx(1.0)
    assert cfg.sigma2_o == pytest.approx(1e-10)


def test_dbm_conversion():
    assert dbm_to_watts(-70.0) == pytest.approx(1e-10)
    assert dbm_to_watts(30.0) == pytest.approx(1.0)


def test_defaults_match_reference_geometry():
    cfg = ScenarioConfig()
    assert cfg.irs_pos == (60.0, 20.0)
    assert cfg.fc_pos == (65.0, 25.0)
    assert cfg.ed_pos == (70.0, 15.0)
    assert cfg.mu_db == -30.0 and cfg.d0 == 1.0
    assert cfg.nu_irs_links == 2.0 and cfg.nu_direct_links == 3.0
    assert cfg.epsilon == 0.01


def test_unknown_key_is_hard_error():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config(GOOD + "\nbogus_key = 3\n")


def test_duplicate_and_conflicting_keys():
    with pytest.raises(ConfigError, match="duplicate"):
        parse_config(GOOD + "\nK = 5\n")
    with pytest.raises(ConfigError, match="conflicts"):
        parse_config(GOOD + "\np_t = 2.0\n")


def test_comments_and_pairs():
    cfg = parse_config(GOOD + "\nirs_pos = 1, 2  # comment\n")
    assert cfg.irs_pos == (1.0, 2.0)


def test_eta_inf_allowed():
    cfg = parse_config(GOOD.replace("eta = 1", "eta = inf"))
    assert math.isinf(cfg.eta)


def test_alpha_spec_parsing_and_length():
    cfg = parse_config(GOOD + "\nalpha_spec = 1, 1+1j, 2, 0.5j\n")
    assert cfg.alpha_spec == (1 + 0j, 1 + 1j, 2 + 0j, 0.5j)
    with pytest.raises(ConfigError, match="exactly K"):
        parse_config(GOOD + "\nalpha_spec = 1, 2\n")


@pytest.mark.parametrize("field,value", [
    ("K", 0), ("N", -1), ("p_t", 0.0), ("eta", 0.0), ("epsilon", 0.0),
    ("sigma2_o", -1e-10), ("n_iter", 0), ("phi_init", "sideways"),
])
def test_invariants_rejected(field, value):
    with pytest.raises(ConfigError):
        ScenarioConfig(**{field: value})
