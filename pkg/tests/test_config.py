import pytest

from actnet.config import ConfigError, load_config, parse_config

BASE = {
    "problem": {"name": "poisson", "w": 1},
    "model": {"family": "actnet", "d_in": 2, "d_out": 1, "m": 8, "N": 4, "L": 1},
    "train": {"steps": 10, "lr": {"warmup_steps": 2}},
}


def doc(**updates):
    import copy
    d = copy.deepcopy(BASE)
    for path, value in updates.items():
        node = d
        keys = path.split("__")
        for k in keys[:-1]:
            node = node.setdefault(k, {})
        if value is None:
            node.pop(keys[-1])
        else:
            node[keys[-1]] = value
    return d


class TestParsing:
    def test_defaults_are_resolved(self):
        cfg = parse_config(doc())
        r = cfg.resolve()
        assert r["train"]["batch_size"] == 1024 and r["train"]["lr"]["decay_rate"] == 0.75
        assert r["model"]["omega0"] == 1.0 and r["output"]["metrics"] == "metrics.csv"

    @pytest.mark.parametrize("updates,field", [
        ({"model__N": None}, "model.N"),
        ({"problem__w": None}, "problem.w"),
        ({"model__family": None}, "model.family"),
        ({"train__lr__bogus": 1}, "train.lr.bogus"),
        ({"train__epochs": 5}, "train.epochs"),
        ({"extra": {}}, "extra"),
    ])
    def test_errors_name_the_field(self, updates, field):
        with pytest.raises(ConfigError, match=field.replace(".", r"\.")):
            parse_config(doc(**updates))

    def test_unknown_problem_and_family(self):
        with pytest.raises(ConfigError, match="problem.name"):
            parse_config(doc(problem__name="burgers"))
        with pytest.raises(ConfigError, match="model.family"):
            parse_config(doc(model__family="kan"))

    def test_input_size_must_match_problem(self):
        with pytest.raises(ConfigError, match="input size"):
            parse_config(doc(model__d_in=3))

    def test_agc_switch_off(self):
        cfg = parse_config(doc(train__agc_lambda=0))
        assert cfg.train.agc_lambda is None

    def test_siren_and_causal(self):
        d = doc(problem={"name": "allen_cahn"}, model={"family": "siren", "widths": [2, 16, 1]})
        d["train"]["causal"] = {"epsilons": [1.0, 10.0]}
        cfg = parse_config(d)
        assert cfg.family == "siren" and cfg.train.causal.epsilons == (1.0, 10.0)

    def test_march_requires_windowed_problem(self):
        with pytest.raises(ConfigError, match="march"):
            parse_config(doc(march={"windows": 2}))
        d = doc(problem={"name": "ks"}, model__d_in=3, march={"windows": 2, "steps": [5]})
        with pytest.raises(ConfigError, match="march.steps"):
            parse_config(d)

    def test_invalid_values(self):
        with pytest.raises(ConfigError):
            parse_config(doc(train__steps=1))   # warmup longer than the run
        with pytest.raises(ConfigError):
            parse_config(doc(model__m=0))


class TestFiles:
    def test_toml_syntax_error(self, tmp_path):
        p = tmp_path / "bad.toml"
        p.write_text("[problem\nname = 1\n")
        with pytest.raises(ConfigError, match="line"):
            load_config(p)

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config(tmp_path / "nope.toml")

    def test_shipped_configs_parse(self):
        from pathlib import Path
        root = Path(__file__).resolve().parents[1] / "configs"
        files = sorted(root.glob("*.toml"))
        assert files
        for f in files:
            load_config(f)
