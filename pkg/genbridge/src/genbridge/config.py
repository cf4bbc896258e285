"""Bridge configuration: mirrors one flow-generator + reward setup."""
import json

REWARD_KINDS = ("template_lowfreq", "band_energy", "neg_l2")

DEFAULTS = {
    "shape": None,
    "schedule": "rectified",
    "beta": None,
    "amplitude": 1.0,
    "clip": 1e-3,
    "default_steps": 50,
    "target_seed": None,
    "reward": None,
}

REWARD_DEFAULTS = {
    "kind": None,
    "level": 4,
    "band": None,
    "target": "sampled",
}


class BridgeConfigError(ValueError):
    pass


def _fail(message):
    raise BridgeConfigError(message)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        raw = json.load(fh)
    return validate(raw)


def validate(raw):
    if not isinstance(raw, dict):
        _fail("bridge config must be a mapping")
    unknown = set(raw) - set(DEFAULTS)
    if unknown:
        _fail(f"unknown key(s): {sorted(unknown)}")
    cfg = dict(DEFAULTS)
    cfg.update(raw)

    shape = cfg["shape"]
    if (not isinstance(shape, list) or len(shape) != 3
            or not all(isinstance(v, int) and v >= 1 for v in shape)):
        _fail(f"shape must be [C, H, W] positive integers, got {shape!r}")
    if cfg["schedule"] != "rectified":
        _fail(f"only the rectified schedule is mirrored, got {cfg['schedule']!r}")
    if not isinstance(cfg["beta"], (int, float)) or cfg["beta"] <= 0:
        _fail("beta must be a positive number")
    if cfg["amplitude"] <= 0:
        _fail("amplitude must be positive")
    if not (0 < cfg["clip"] <= 0.1):
        _fail("clip must lie in (0, 0.1]")
    if not isinstance(cfg["default_steps"], int) or cfg["default_steps"] < 1:
        _fail("default_steps must be a positive integer")

    reward = cfg["reward"]
    if not isinstance(reward, dict):
        _fail("reward section is required")
    unknown = set(reward) - set(REWARD_DEFAULTS)
    if unknown:
        _fail(f"unknown reward key(s): {sorted(unknown)}")
    merged = dict(REWARD_DEFAULTS)
    merged.update(reward)
    cfg["reward"] = merged
    if merged["kind"] not in REWARD_KINDS:
        _fail(f"reward kind must be one of {REWARD_KINDS}, got {merged['kind']!r}")
    if merged["kind"] == "template_lowfreq":
        if not isinstance(merged["level"], int) or merged["level"] < 1:
            _fail("reward.level must be a positive integer")
        _, h, w = shape
        div = 2 ** merged["level"]
        if h % div or w % div:
            _fail(f"shape {shape} not divisible by 2^{merged['level']}")
    if merged["kind"] == "band_energy":
        band = merged["band"]
        if (not isinstance(band, list) or len(band) != 2
                or not 0 < band[0] < band[1]):
            _fail("reward.band must be [lo, hi] with 0 < lo < hi")
    if merged["target"] not in ("sampled", "zero"):
        _fail(f"reward.target must be 'sampled' or 'zero', got {merged['target']!r}")
    if merged["kind"] in ("template_lowfreq", "neg_l2") and merged["target"] == "sampled":
        if not isinstance(cfg["target_seed"], int):
            _fail(f"reward kind {merged['kind']!r} needs an integer target_seed")
    return cfg
