"""Variety specs: the ``name:params`` mini-grammar and the JSON spec file.

Grammar::

    name[:item,item,...]

Each item is either a positional integer or ``key=value``; items without
``=`` that follow a keyword continue that keyword's list, so
``tetragonal:2,2,1,b=1,2`` means e = (2, 2, 1) and b = (1, 2).  ``seed=s``
is accepted by every constructor.

    veronese:n,r            segre:n,m             scroll:e1,...,ed
    ci:N,d1,...,dc          genus4                genus5
    plane-canonical:d       plane-extension:d
    tetragonal:e1,e2,e3,b=b1,b2
    pentagonal:g=G   or   pentagonal:e=e1,..,e4,b=b1,..,b5
    g25[:realization=points|symbolic]             points5
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

from .varieties import catalog

# name -> (positional parameter name or None, allowed keywords)
_GRAMMAR = {
    "veronese": ("nr", set()),
    "segre": ("nm", set()),
    "scroll": ("e", set()),
    "ci": ("Nd", set()),
    "genus4": (None, set()),
    "genus5": (None, set()),
    "plane-canonical": ("d", set()),
    "plane-extension": ("d", set()),
    "tetragonal": ("e", {"b"}),
    "pentagonal": ("e", {"e", "b", "g"}),
    "g25": (None, {"realization"}),
    "points5": (None, set()),
}


class SpecError(ValueError):
    pass


@dataclass(frozen=True)
class VarietySpec:
    constructor: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    @property
    def label(self) -> str:
        return self.to_string()

    def to_string(self) -> str:
        items = []
        for k, v in self.params.items():
            if k == "_pos":
                items += [str(x) for x in v]
            elif isinstance(v, list):
                items.append(f"{k}=" + ",".join(str(x) for x in v))
            else:
                items.append(f"{k}={v}")
        body = ",".join(items)
        return self.constructor + (":" + body if body else "")

    def to_json(self) -> str:
        doc = {"constructor": self.constructor, "label": self.label, "params": self.params, "seed": self.seed}
        return json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "VarietySpec":
        doc = json.loads(text)
        unknown = set(doc) - {"constructor", "label", "params", "seed"}
        if unknown:
            raise SpecError(f"unknown spec file fields {sorted(unknown)}")
        spec = cls(doc["constructor"], _check_params(doc["constructor"], doc.get("params", {})), int(doc.get("seed", 0)))
        if "label" in doc and doc["label"] != spec.label:
            raise SpecError(f"label {doc['label']!r} does not match parameters ({spec.label!r})")
        return spec

    def build(self, p: int | None = None, retries: int | None = None):
        return build_variety(self, p, retries)


def _int(tok: str) -> int:
    try:
        return int(tok)
    except ValueError:
        raise SpecError(f"expected an integer, got {tok!r}") from None


def _check_params(name: str, params: dict) -> dict:
    if name not in _GRAMMAR:
        raise SpecError(f"unknown variety {name!r}; known: {', '.join(sorted(_GRAMMAR))}")
    pos, keys = _GRAMMAR[name]
    for k in params:
        if k == "_pos":
            if pos is None:
                raise SpecError(f"{name} takes no positional parameters")
        elif k not in keys:
            raise SpecError(f"unknown key {k!r} for {name}")
    return params


def parse_spec(text: str, seed: int = 0) -> VarietySpec:
    """Parse ``name:items``; a ``seed=`` item overrides the given seed."""
    text = text.strip()
    name, _, body = text.partition(":")
    params: dict = {}
    current = None
    if body:
        for tok in body.split(","):
            tok = tok.strip()
            if not tok:
                raise SpecError(f"empty item in {text!r}")
            if "=" in tok:
                key, _, val = tok.partition("=")
                if key in params:
                    raise SpecError(f"duplicate key {key!r}")
                current = key
                params[key] = [val]
            elif current is None:
                params.setdefault("_pos", []).append(tok)
            else:
                params[current].append(tok)
    if "seed" in params:
        vals = params.pop("seed")
        if len(vals) != 1:
            raise SpecError("seed takes one value")
        seed = _int(vals[0])
    _check_params(name, params)
    clean: dict = {}
    for k, vals in params.items():
        if k == "realization":
            if len(vals) != 1 or vals[0] not in ("points", "symbolic"):
                raise SpecError("realization must be points or symbolic")
            clean[k] = vals[0]
        elif k == "g":
            if len(vals) != 1:
                raise SpecError("g takes one value")
            clean[k] = _int(vals[0])
        else:
            clean[k] = [_int(v) for v in vals]
    return VarietySpec(name, clean, seed)


def load_spec_file(path) -> VarietySpec:
    return VarietySpec.from_json(Path(path).read_text())


def save_spec_file(spec: VarietySpec, path) -> None:
    Path(path).write_text(spec.to_json())


def resolve(text: str, seed: int = 0) -> VarietySpec:
    """A grammar string, or a path to a spec file."""
    if text.endswith(".json") and Path(text).exists():
        return load_spec_file(text)
    return parse_spec(text, seed)


def _need(params, key, n=None, name=""):
    v = params.get(key)
    if v is None or (n is not None and len(v) != n):
        raise SpecError(f"{name} needs {n if n else 'some'} values for {key!r}")
    return v


def build_variety(spec: VarietySpec, p: int | None = None, retries: int | None = None):
    name, prm, seed = spec.constructor, spec.params, spec.seed
    kw = {}
    if p is not None:
        kw["p"] = p
    if retries is not None:
        kw["retries"] = retries
    pos = prm.get("_pos", [])
    if name == "veronese":
        n, r = _need(prm, "_pos", 2, name)
        return catalog.veronese(n, r)
    if name == "segre":
        n, m = _need(prm, "_pos", 2, name)
        return catalog.segre(n, m)
    if name == "scroll":
        return catalog.scroll(_need(prm, "_pos", None, name))
    if name == "ci":
        if len(pos) < 2:
            raise SpecError("ci needs N and at least one degree")
        return catalog.complete_intersection(pos[0], pos[1:], seed, **kw)
    if name == "genus4":
        return catalog.genus4_canonical(seed, **kw)
    if name == "genus5":
        return catalog.genus5_canonical(seed, **kw)
    if name == "plane-canonical":
        (d,) = _need(prm, "_pos", 1, name)
        return catalog.plane_curve_canonical(d, seed, **kw)
    if name == "plane-extension":
        from .deform import plane_curve_extension

        (d,) = _need(prm, "_pos", 1, name)
        return plane_curve_extension(d, seed, **kw)
    if name == "tetragonal":
        e = _need(prm, "_pos", 3, name)
        b1, b2 = _need(prm, "b", 2, name)
        return catalog.tetragonal_curve(e, b1, b2, seed, **kw)
    if name == "pentagonal":
        if "g" in prm:
            if "b" in prm or "e" in prm or pos:
                raise SpecError("pentagonal takes either g= or e/b, not both")
            return catalog.pentagonal_curve(seed=seed, g=prm["g"], **kw)
        e = prm.get("e", pos)
        if len(e) != 4:
            raise SpecError("pentagonal needs four scroll twists")
        return catalog.pentagonal_curve(e, _need(prm, "b", 5, name), seed, **kw)
    if name == "g25":
        return catalog.grassmannian_g25(prm.get("realization", "points"), seed)
    if name == "points5":
        return catalog.gorenstein_points5(seed, **kw)
    raise SpecError(f"unknown variety {name!r}")
