"""Run configuration schema: JSON with nesting, unknown keys rejected.

``resolve`` validates a raw config dict and returns a fully-resolved copy
with every default filled in; the resolved form is what gets written to
the run manifest, so a manifest alone reproduces the run.
"""
import copy
import json

STRATEGIES = ("ses", "bon", "zon", "random_subspace")

GENERATOR_DEFAULTS = {
    "kind": "flowsim",
    "shape": [4, 64, 64],
    "beta": 1.3,
    "amplitude": 1.0,
    "steps": 50,
    "clip": 1e-3,
    "target_seed": None,
}

REWARD_DEFAULTS = {
    "kind": "template_lowfreq",
    "level": 4,
    "band": None,
    "command": None,
}

CEM_DEFAULTS = {
    "n_per_gen": 10,
    "elite_k": 5,
    "gamma": 1e-5,
    "level": 4,
    "finalize_mode": "sample_distribution",
    "variance_floor": 1e-8,
}

ZO_DEFAULTS = {
    "n_iter": 20,
    "batch": 10,
    "step_lambda": 0.25,
}

TOP_DEFAULTS = {
    "strategy": "ses",
    "budget_nre": 200,
    "seed": None,
    "workers": 1,
    "record_chunk": 10,
    "generator": GENERATOR_DEFAULTS,
    "reward": REWARD_DEFAULTS,
    "eval": {"steps": None},
    "cem": CEM_DEFAULTS,
    "zo": ZO_DEFAULTS,
}


class ConfigError(ValueError):
    pass


def _merge_section(name, raw, defaults):
    if not isinstance(raw, dict):
        raise ConfigError(f"section {name!r} must be a mapping, got {type(raw).__name__}")
    unknown = set(raw) - set(defaults)
    if unknown:
        raise ConfigError(f"unknown key(s) in {name!r}: {sorted(unknown)}")
    merged = copy.deepcopy(defaults)
    merged.update(raw)
    return merged


def _require(cond, message):
    if not cond:
        raise ConfigError(message)


def resolve(raw):
    """Validate a raw config mapping and fill in all defaults."""
    if not isinstance(raw, dict):
        raise ConfigError("config must be a mapping")
    unknown = set(raw) - set(TOP_DEFAULTS)
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {sorted(unknown)}")

    cfg = {k: copy.deepcopy(v) for k, v in TOP_DEFAULTS.items() if not isinstance(v, dict)}
    for key, value in raw.items():
        if not isinstance(TOP_DEFAULTS[key], dict):
            cfg[key] = value
    cfg["generator"] = _merge_section("generator", raw.get("generator", {}), GENERATOR_DEFAULTS)
    cfg["reward"] = _merge_section("reward", raw.get("reward", {}), REWARD_DEFAULTS)
    cfg["eval"] = _merge_section("eval", raw.get("eval", {}), {"steps": None})
    cfg["cem"] = _merge_section("cem", raw.get("cem", {}), CEM_DEFAULTS)
    cfg["zo"] = _merge_section("zo", raw.get("zo", {}), ZO_DEFAULTS)

    _require(cfg["strategy"] in STRATEGIES,
             f"strategy must be one of {STRATEGIES}, got {cfg['strategy']!r}")
    _require(isinstance(cfg["budget_nre"], int) and cfg["budget_nre"] >= 1,
             f"budget_nre must be a positive integer, got {cfg['budget_nre']!r}")
    _require(isinstance(cfg["seed"], int),
             "seed is mandatory and must be an integer")
    _require(isinstance(cfg["workers"], int) and cfg["workers"] >= 1,
             "workers must be a positive integer")
    _require(isinstance(cfg["record_chunk"], int) and cfg["record_chunk"] >= 1,
             "record_chunk must be a positive integer")

    gen = cfg["generator"]
    _require(gen["kind"] == "flowsim", f"unknown generator kind {gen['kind']!r}")
    _require(isinstance(gen["shape"], list) and len(gen["shape"]) == 3
             and all(isinstance(v, int) and v >= 1 for v in gen["shape"]),
             f"generator.shape must be [C, H, W] positive integers, got {gen['shape']!r}")
    _require(gen["beta"] > 0, "generator.beta must be positive")
    _require(gen["amplitude"] > 0, "generator.amplitude must be positive")
    _require(isinstance(gen["steps"], int) and gen["steps"] >= 1,
             "generator.steps must be a positive integer")
    _require(0 < gen["clip"] <= 0.1, "generator.clip must lie in (0, 0.1]")
    _require(gen["target_seed"] is None or isinstance(gen["target_seed"], int),
             "generator.target_seed must be an integer or null")

    rew = cfg["reward"]
    _require(rew["kind"] in ("template_lowfreq", "band_energy", "neg_l2", "external"),
             f"unknown reward kind {rew['kind']!r}")
    if rew["kind"] == "template_lowfreq":
        _require(isinstance(rew["level"], int) and rew["level"] >= 1,
                 "reward.level must be a positive integer")
    if rew["kind"] == "band_energy":
        _require(isinstance(rew["band"], list) and len(rew["band"]) == 2
                 and 0 < rew["band"][0] < rew["band"][1],
                 "reward.band must be [lo, hi] with 0 < lo < hi")
    if rew["kind"] == "external":
        _require(isinstance(rew["command"], list) and rew["command"],
                 "reward.command must be a non-empty argv list")

    if cfg["eval"]["steps"] is None:
        cfg["eval"]["steps"] = gen["steps"]
    _require(isinstance(cfg["eval"]["steps"], int) and cfg["eval"]["steps"] >= 1,
             "eval.steps must be a positive integer")

    cem = cfg["cem"]
    _require(isinstance(cem["n_per_gen"], int) and cem["n_per_gen"] >= 1,
             "cem.n_per_gen must be a positive integer")
    _require(isinstance(cem["elite_k"], int) and 1 <= cem["elite_k"] <= cem["n_per_gen"],
             "cem.elite_k must lie in [1, n_per_gen]")
    _require(0.0 <= cem["gamma"] <= 1.0, "cem.gamma must lie in [0, 1]")
    _require(isinstance(cem["level"], int) and cem["level"] >= 1,
             "cem.level must be a positive integer")
    _require(cem["finalize_mode"] in ("sample_distribution", "best_seen"),
             f"unknown finalize mode {cem['finalize_mode']!r}")
    _require(cem["variance_floor"] > 0, "cem.variance_floor must be positive")

    zo = cfg["zo"]
    _require(isinstance(zo["n_iter"], int) and zo["n_iter"] >= 1,
             "zo.n_iter must be a positive integer")
    _require(isinstance(zo["batch"], int) and zo["batch"] >= 1,
             "zo.batch must be a positive integer")
    _require(0.0 < zo["step_lambda"] <= 1.0, "zo.step_lambda must lie in (0, 1]")
    if cfg["strategy"] == "zon":
        _require(zo["n_iter"] * zo["batch"] <= cfg["budget_nre"],
                 f"zo schedule needs {zo['n_iter'] * zo['batch']} evaluations, "
                 f"budget holds {cfg['budget_nre']}")

    _, height, width = gen["shape"]
    level = cem["level"]
    if cfg["strategy"] in ("ses", "random_subspace"):
        div = 2 ** level
        _require(height % div == 0 and width % div == 0,
                 f"shape {gen['shape']} not divisible by 2^{level}")
    if rew["kind"] == "template_lowfreq":
        div = 2 ** rew["level"]
        _require(height % div == 0 and width % div == 0,
                 f"shape {gen['shape']} not divisible by 2^{rew['level']} for the template reward")
    return cfg


def load(path):
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}: not valid JSON ({exc})") from exc
    return resolve(raw)
