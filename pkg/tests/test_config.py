import copy
import json

import pytest

from indsense.circuit import STAINLESS_14301
from indsense.config import (ProjectConfig, config_from_dict, estimate_tx_resistance,
                             load_config)
from indsense.errors import ConfigError
from indsense.reference import reference_design


@pytest.fixture(scope="module")
def sample_doc():
    return load_config().to_dict()


def test_bundled_config_is_the_sample_design():
    cfg = load_config()
    assert cfg.design == reference_design()
    assert cfg.design.target.material == STAINLESS_14301
    assert cfg.sweep.count == 360 and len(cfg.sweep.angles()) == 360
    assert cfg.optimize.budget == 40


def test_round_trip(sample_doc, tmp_path):
    path = tmp_path / "c.json"
    path.write_text(json.dumps(sample_doc))
    again = load_config(path)
    assert again == config_from_dict(sample_doc)
    assert again.to_dict() == sample_doc
    assert json.loads(again.dumps()) == sample_doc


def test_sweep_angles():
    cfg = config_from_dict({**load_config().to_dict(),
                            "sweep": {"start_deg": 10.0, "stop_deg": 20.0, "count": 4}})
    assert cfg.sweep.angles_deg() == [10.0, 12.5, 15.0, 17.5]


@pytest.mark.parametrize("path, value, fragment", [
    (("geometry", "tx", "N"), 0, "geometry.tx.N"),
    (("geometry", "rx", "p"), "five", "geometry.rx.p"),
    (("geometry", "target", "material"), "unobtainium", "geometry.target.material"),
    (("circuit", "R_tx"), -1.0, "circuit.R_tx"),
    (("circuit", "e_series"), "E7", "circuit.e_series"),
    (("analysis", "objective"), "H_2p", "analysis.objective"),
    (("geometry", "rx", "colour"), "red", "geometry.rx"),
])
def test_schema_errors_name_the_field(sample_doc, path, value, fragment):
    doc = copy.deepcopy(sample_doc)
    node = doc
    for key in path[:-1]:
        node = node[key]
    node[path[-1]] = value
    with pytest.raises(ConfigError, match=fragment.replace(".", r"\.")):
        config_from_dict(doc)


def test_missing_required_field(sample_doc):
    doc = copy.deepcopy(sample_doc)
    del doc["geometry"]["tx"]["r_start"]
    with pytest.raises(ConfigError, match="r_start"):
        config_from_dict(doc)


def test_physical_errors(sample_doc):
    doc = copy.deepcopy(sample_doc)
    doc["geometry"]["rx"]["r_inner"] = 0.03
    with pytest.raises(ConfigError, match="geometry.rx"):
        config_from_dict(doc)
    doc = copy.deepcopy(sample_doc)
    doc["geometry"]["tx"]["r_start"] = 0.02
    with pytest.raises(ConfigError, match="r_start"):
        config_from_dict(doc)


def test_custom_material_and_estimated_resistance(sample_doc):
    doc = copy.deepcopy(sample_doc)
    doc["geometry"]["target"]["material"] = {"name": "brass", "sigma": 1.5e7}
    doc["circuit"]["R_tx"] = "estimate"
    cfg = config_from_dict(doc)
    assert cfg.design.target.material.sigma == 1.5e7
    assert cfg.design.R_tx == estimate_tx_resistance(cfg.design.tx, 5e6)
    assert 0 < cfg.design.R_tx < 5
    assert cfg.to_dict()["circuit"]["R_tx"] == "estimate"
    assert cfg.to_dict()["geometry"]["target"]["material"]["sigma"] == 1.5e7


def test_unreadable_files(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{\n  'x': 1\n}")
    with pytest.raises(ConfigError, match="line 2"):
        load_config(bad)


def test_empty_sweep_range(sample_doc):
    doc = copy.deepcopy(sample_doc)
    doc["sweep"]["stop_deg"] = doc["sweep"]["start_deg"]
    with pytest.raises(ConfigError):
        config_from_dict(doc)


def test_defaults_for_optional_sections(sample_doc):
    doc = {k: sample_doc[k] for k in ("geometry", "circuit")}
    cfg = config_from_dict(doc)
    assert isinstance(cfg, ProjectConfig)
    assert cfg.seed == 0 and cfg.analysis.max_order == 60
