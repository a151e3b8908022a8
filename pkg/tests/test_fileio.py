import logging

import pytest
import yaml

from termmodal.errors import ModelError, ParseError, TermModalError
from termmodal.fileio import (
    action_to_data, dump_action, dump_model, load_action, load_hybrid, load_kdl, load_model,
    load_update, model_to_data,
)
from termmodal.kdl import DynamicTransformation, LearningUpdate


@pytest.mark.parametrize("path", ["server_error/office.model", "thieves/heist.model"])
def test_model_round_trip(fixtures, path, tmp_path):
    pm = load_model(fixtures / path)
    out = tmp_path / "m.model"
    out.write_text(dump_model(pm.model, pm.actual))
    again = load_model(out)
    assert again.model == pm.model and again.actual == pm.actual
    assert load_model(model_to_data(pm.model, pm.actual)).model == pm.model


@pytest.mark.parametrize("path", ["server_error/log.action", "server_error/fired.action",
                                  "thieves/criminal.action", "thieves/reveal.action"])
def test_action_round_trip(fixtures, path, tmp_path):
    scenario = path.split("/")[0]
    model = {"server_error": "office.model", "thieves": "heist.model"}[scenario]
    sig = load_model(fixtures / scenario / model).model.signature
    d = load_action(fixtures / path, sig)
    out = tmp_path / "a.action"
    out.write_text(dump_action(d))
    assert load_action(out, sig) == d
    assert load_action(action_to_data(d), sig) == d


def test_edges_are_closed_with_warning(caplog):
    data = {"agents": ["a"], "worlds": ["w", "v", "u"], "edges": {"a": [["w", "v"], ["v", "u"]]}}
    with caplog.at_level(logging.WARNING):
        pm = load_model(data)
    assert pm.model.cell("a", "w") == {"w", "v", "u"}
    assert "closed" in caplog.text


def test_default_partition_is_discrete():
    pm = load_model({"agents": ["a"], "worlds": ["w", "v"]})
    assert pm.model.cell("a", "w") == {"w"} and pm.actual == "w"


def test_bad_yaml_position(tmp_path):
    bad = tmp_path / "bad.model"
    bad.write_text("agents: [a, b\nworlds: [w]\n")
    with pytest.raises(ParseError) as err:
        load_model(bad)
    assert err.value.line >= 2


def test_missing_file():
    with pytest.raises(TermModalError, match="cannot read"):
        load_model("/nonexistent/x.model")


def test_invalid_model_diagnostics():
    data = {"agents": ["a"], "worlds": ["w"], "signature": {"constants": ["a_"]}, "actual": "w"}
    with pytest.raises(ModelError, match="a_ undenoted"):
        load_model(data)
    with pytest.raises(ModelError, match="unknown world"):
        load_model({"agents": ["a"], "worlds": ["w"], "network": {"z": []}})


def test_equality_post_key_rejected():
    data = {"name": "x", "events": ["e"], "post": {"e": {"a_ = a_": "false"}}}
    with pytest.raises(TermModalError):
        load_action(data)


def test_kdl_and_updates(fixtures):
    base = fixtures / "kdl"
    km = load_kdl(base / "triangle.kdl")
    assert km.values["w2"]["b"]["s"] == "0"
    d = load_update(base / "spread.update", nominals=set(km.nominals))
    ell = load_update(base / "learn.update", nominals=set(km.nominals))
    assert isinstance(d, DynamicTransformation) and d.name == "d"
    assert isinstance(ell, LearningUpdate) and len(ell.formulas) == 1


def test_kdl_rejects_asymmetric_network():
    data = {"agents": ["a", "b"], "worlds": ["w"], "network": [["a", "b"]],
            "features": {"f": [0, 1]}, "values": {"*": {"a": {"f": 0}, "b": {"f": 0}}}}
    with pytest.raises(ModelError, match="not symmetric"):
        load_kdl(data)


def test_hybrid_loader():
    hm = load_hybrid({"agents": ["a", "b"], "worlds": ["w"], "nominals": {"i": "a"},
                      "network": [["a", "b"]], "valuation": {"p": [["w", "a"]]}})
    assert hm.valuation["p"] == {("w", "a")} and hm.nominals == {"i": "a"}


def test_dumps_are_yaml(fixtures):
    pm = load_model(fixtures / "server_error" / "office.model")
    assert yaml.safe_load(dump_model(pm.model, pm.actual))["actual"] == "u"
