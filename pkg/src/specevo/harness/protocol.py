"""Wire protocol for external generator/scorer processes.

Messages are single JSON objects, one per line, over the child process's
standard input/output. The parent speaks first:

    -> {"op": "hello", "version": 1}
    <- {"op": "hello", "version": 1, "shape": [C, H, W]}

    -> {"op": "generate_and_score", "id": 7, "noise_b64": "...", "steps": 50}
    <- {"id": 7, "score": -3.25}            (or {"id": 7, "error": "..."})

    -> {"op": "bye"}

``noise_b64`` is the base64 encoding of exactly ``4*C*H*W`` bytes: the
noise field as float32, little-endian, row-major (channel-major then
row-major within each channel). One request is in flight per connection;
responses are matched by ``id``. Any malformed line terminates the
session. Diagnostics from the child must go to stderr so the message
channel stays parseable.
"""
import base64
import json
import subprocess

import numpy as np

PROTOCOL_VERSION = 1


class BridgeError(RuntimeError):
    pass


def encode_noise(field):
    """Base64 of the float32 little-endian row-major payload."""
    arr = np.ascontiguousarray(field, dtype="<f4")
    return base64.b64encode(arr.tobytes()).decode("ascii")


def decode_noise(payload_b64, shape):
    """Inverse of :func:`encode_noise`, promoted to float64."""
    try:
        raw = base64.b64decode(payload_b64, validate=True)
    except Exception as exc:
        raise ValueError(f"invalid base64 payload: {exc}") from exc
    expected = 4 * int(np.prod(shape))
    if len(raw) != expected:
        raise ValueError(f"payload holds {len(raw)} bytes, expected {expected} for shape {tuple(shape)}")
    return np.frombuffer(raw, dtype="<f4").reshape(shape).astype(np.float64)


def protocol_spec_text():
    """The canonical protocol description (for bridge authors)."""
    return __doc__


class BridgeClient:
    """Parent-side endpoint: spawns the bridge and speaks the protocol."""

    def __init__(self, command):
        self._proc = subprocess.Popen(
            list(command),
            stdin=subprocess.PIPE,
            stdout=subprocess.PIPE,
            text=True,
            bufsize=1,
        )
        self._next_id = 0
        self.shape = None

    def _send(self, obj):
        if self._proc.stdin is None or self._proc.poll() is not None:
            raise BridgeError("bridge process is not running")
        self._proc.stdin.write(json.dumps(obj) + "\n")
        self._proc.stdin.flush()

    def _recv(self):
        line = self._proc.stdout.readline()
        if not line:
            raise BridgeError("bridge closed its message channel")
        try:
            return json.loads(line)
        except json.JSONDecodeError as exc:
            raise BridgeError(f"unparseable bridge response: {line!r}") from exc

    def handshake(self, expect_shape=None):
        self._send({"op": "hello", "version": PROTOCOL_VERSION})
        reply = self._recv()
        if reply.get("op") != "hello" or reply.get("version") != PROTOCOL_VERSION:
            raise BridgeError(f"bad handshake reply: {reply}")
        self.shape = tuple(reply["shape"])
        if expect_shape is not None and self.shape != tuple(expect_shape):
            raise BridgeError(f"bridge serves shape {self.shape}, expected {tuple(expect_shape)}")
        return self.shape

    def score(self, noise, steps):
        request_id = self._next_id
        self._next_id += 1
        self._send(
            {
                "op": "generate_and_score",
                "id": request_id,
                "noise_b64": encode_noise(noise),
                "steps": int(steps),
            }
        )
        reply = self._recv()
        if reply.get("id") != request_id:
            raise BridgeError(f"response id {reply.get('id')} does not match request {request_id}")
        if "error" in reply:
            raise BridgeError(f"bridge error for request {request_id}: {reply['error']}")
        return float(reply["score"])

    def close(self):
        if self._proc.poll() is None:
            try:
                self._send({"op": "bye"})
            except (BridgeError, BrokenPipeError, OSError):
                pass
            try:
                self._proc.wait(timeout=5)
            except subprocess.TimeoutExpired:
                self._proc.kill()
        if self._proc.stdin:
            self._proc.stdin.close()
        if self._proc.stdout:
            self._proc.stdout.close()

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()
