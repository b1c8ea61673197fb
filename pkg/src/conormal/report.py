"""JSON reports.

Schema (version 1)::

    {"schema_version": 1, "tool": "conormal", "version": str,
     "command": str, "config": {...}, "exit_code": int,
     "records": [{"label", "constructor", "parameters", "seed", "seed_used",
                  "fingerprint", "status", "dims", "verdicts", "primes",
                  "flags", "details", "timings"}]}

``dims`` holds integers only, keyed by quantity and then by degree (as a
string).  Everything except ``timings`` is a deterministic function of the
configuration and seed.
"""

from __future__ import annotations

import json

from . import __version__

SCHEMA_VERSION = 1
RECORD_FIELDS = ("label", "constructor", "parameters", "seed", "seed_used", "fingerprint", "status",
                 "dims", "verdicts", "primes", "flags", "details", "timings")


def new_record(spec, X=None) -> dict:
    rec = {k: None for k in RECORD_FIELDS}
    rec.update(label=spec.label, constructor=spec.constructor, parameters=dict(spec.params), seed=spec.seed,
               status="OK", dims={}, verdicts={}, primes={}, flags=[], details={}, timings={})
    if X is not None:
        rec["seed_used"] = X.seed_used
        rec["fingerprint"] = X.fingerprint()
    return rec


def make_report(command: str, config: dict, records: list[dict], exit_code: int) -> dict:
    return {"schema_version": SCHEMA_VERSION, "tool": "conormal", "version": __version__, "command": command,
            "config": config, "exit_code": exit_code, "records": records}


def _plain(obj):
    if isinstance(obj, dict):
        return {str(k): _plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_plain(v) for v in obj]
    if hasattr(obj, "item") and callable(obj.item):  # numpy scalars
        return obj.item()
    return obj


def dumps(report: dict) -> str:
    return json.dumps(_plain(report), indent=2) + "\n"


def strip_timings(report: dict) -> dict:
    """The deterministic part of a report."""
    out = dict(report)
    out["records"] = [{k: v for k, v in r.items() if k != "timings"} for r in report["records"]]
    return _plain(out)
