"""CLI, configuration, orchestration, persistence, and the wire protocol."""
from .config import ConfigError, load, resolve
from .protocol import BridgeClient, BridgeError, decode_noise, encode_noise, protocol_spec_text
from .runner import bench, build_generator, psd_report, run, validate_theory

__all__ = [
    "ConfigError",
    "load",
    "resolve",
    "BridgeClient",
    "BridgeError",
    "decode_noise",
    "encode_noise",
    "protocol_spec_text",
    "bench",
    "build_generator",
    "psd_report",
    "run",
    "validate_theory",
]
