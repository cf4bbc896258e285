"""Request loop: line-delimited JSON over stdin/stdout.

One request in flight per process; every response carries the request's
id. Diagnostics go to stderr only, so the message channel stays
parseable. Well-formed requests with bad payloads get an error response
and the session continues; malformed traffic gets an error response when
an id is recoverable and then terminates the session.
"""
import json
import sys

from .config import BridgeConfigError, load_config
from .flow import MirrorGenerator, decode_noise

PROTOCOL_VERSION = 1


def _reply(out, obj):
    out.write(json.dumps(obj) + "\n")
    out.flush()


def serve(cfg, stdin=None, stdout=None):
    """Answer handshake then loop on scoring requests until bye/EOF."""
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout
    generator = MirrorGenerator(cfg)
    for line in stdin:
        if not line.strip():
            continue
        try:
            msg = json.loads(line)
        except json.JSONDecodeError:
            print(f"genbridge: malformed line, terminating: {line!r}", file=sys.stderr)
            _reply(stdout, {"error": "malformed message"})
            return 1
        op = msg.get("op")
        if op == "hello":
            if msg.get("version") != PROTOCOL_VERSION:
                _reply(stdout, {"error": f"unsupported version {msg.get('version')}"})
                return 1
            _reply(stdout, {"op": "hello", "version": PROTOCOL_VERSION,
                            "shape": list(generator.shape)})
        elif op == "generate_and_score":
            request_id = msg.get("id")
            if not isinstance(request_id, int):
                _reply(stdout, {"error": "generate_and_score without integer id"})
                return 1
            try:
                noise = decode_noise(msg["noise_b64"], generator.shape)
                steps = msg.get("steps")
                score = generator.score(noise, steps)
            except (KeyError, ValueError, TypeError) as exc:
                _reply(stdout, {"id": request_id, "error": str(exc)})
                continue
            _reply(stdout, {"id": request_id, "score": score})
        elif op == "bye":
            return 0
        else:
            request_id = msg.get("id")
            if isinstance(request_id, int):
                _reply(stdout, {"id": request_id, "error": f"unknown op {op!r}"})
            else:
                _reply(stdout, {"error": f"unknown op {op!r}"})
            return 1
    return 0


def main(argv=None):
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: genbridge <config.json>", file=sys.stderr)
        return 2
    try:
        cfg = load_config(argv[0])
    except (OSError, BridgeConfigError, json.JSONDecodeError) as exc:
        print(f"genbridge: bad config: {exc}", file=sys.stderr)
        return 2
    return serve(cfg)


if __name__ == "__main__":
    sys.exit(main())
