import math

import pytest

from continuum_cap.config import ConfigError, load_config, parse_config
from continuum_cap.scenario import RadialProfile, UniformDensity


def base(**over):
    raw = {
        "radius_m": 500.0,
        "alpha": 3.65,
        "h0": 1.0,
        "sigma2": 1e-13,
        "power_budget": 1.0,
        "density": {"kind": "uniform", "u0": 1e-4},
    }
    raw.update(over)
    return raw


def test_parse_uniform():
    cfg = parse_config(base())
    assert isinstance(cfg.scenario.density, UniformDensity)
    assert cfg.scenario.total_users == pytest.approx(1e-4 * math.pi * 500.0**2)
    assert cfg.channel == "real" and cfg.rate_factor == 1.0
    assert cfg.user_distribution().kind == "analytic-disk"
    assert "alpha=3.65" in cfg.echo()


def test_parse_table_and_traffic():
    cfg = parse_config(base(
        density={"kind": "table", "table": [[0.0, 2e-4], [500.0, 5e-5]]},
        traffic={"kind": "uniform"},
        channel="complex",
        grid_size=64,
    ))
    assert isinstance(cfg.scenario.density, RadialProfile)
    assert cfg.rate_factor == 2.0
    assert cfg.user_distribution().kind == "tabulated"
    assert cfg.traffic_distribution().kind == "analytic-disk"
    assert cfg.normalized_scenario().nu_edge == pytest.approx(1.0)


@pytest.mark.parametrize(
    "raw,key",
    [
        ({k: v for k, v in base().items() if k != "alpha"}, "alpha"),
        (base(radius_m=-1.0), "radius_m"),
        (base(sigma2="x"), "sigma2"),
        (base(power_budget=-1.0), "power_budget"),
        (base(channel="quantum"), "channel"),
        (base(grid_size=4), "grid_size"),
        (base(colour="red"), "colour"),
        (base(density={"kind": "blob"}), "density.kind"),
        (base(density={"kind": "uniform"}), "u0"),
        (base(density={"kind": "table", "table": [[0.0, 1.0]]}), "density.table"),
        (base(total_users=3.0), "total_users"),
        ({k: v for k, v in base().items() if k != "density"}, "density.kind"),
    ],
)
def test_errors_name_the_key(raw, key):
    with pytest.raises(ConfigError, match=key.replace(".", r"\.")):
        parse_config(raw)


def test_zero_power_accepted():
    assert parse_config(base(power_budget=0.0)).scenario.edge_snr == 0.0


def test_load_config_errors(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.toml")
    bad = tmp_path / "bad.toml"
    bad.write_text("radius_m = = 3")
    with pytest.raises(ConfigError):
        load_config(bad)


def test_load_config_file(cell_config):
    cfg = load_config(cell_config(power=2.0))
    assert cfg.scenario.power_budget == 2.0
