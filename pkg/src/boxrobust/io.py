"""JSON helpers shared by the CLI and the certificate digests."""

import json
import math


def _clean(obj):
    if isinstance(obj, float):
        if not math.isfinite(obj):
            raise ValueError(f"cannot serialize non-finite float {obj!r}")
        return 0.0 if obj == 0.0 else obj  # drop the sign of -0.0
    if isinstance(obj, dict):
        return {k: _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    return obj


def canonical_json(obj, indent=None):
    """Sorted keys, shortest round-trip floats, no trailing whitespace."""
    return json.dumps(_clean(obj), sort_keys=True, indent=indent, separators=(",", ": ") if indent else (",", ":"))


def load_json(path):
    with open(path) as fh:
        return json.load(fh)


def dump_json(obj, path):
    text = canonical_json(obj, indent=2) + "\n"
    if path in (None, "-"):
        return text
    with open(path, "w") as fh:
        fh.write(text)
    return text
