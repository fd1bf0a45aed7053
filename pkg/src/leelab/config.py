"""JSON run configuration: loading, validation and hashing.

A configuration file holds one run. Every block is optional; missing keys take
the desk-scale defaults (torus of side ``2 pi``, ``m = 1``, ``mu_p = 0.5``,
``lambda = 1``, ``n = 1``, cutoff 10 with uncoupled modes pruned, i.e. 19
modes). Unknown keys are rejected.
"""

from __future__ import annotations

import copy
import hashlib
import json
import math
import re
from dataclasses import dataclass

from .errors import LeeLabError

__all__ = ["ConfigError", "RunConfig", "DEFAULTS", "load_config", "config_from_dict", "config_hash"]

DEFAULTS = {
    "manifold": {"kind": "torus", "L1": 2 * math.pi, "L2": 2 * math.pi, "radius": 1.0,
                 "impurity": [0.0, 0.0]},
    "model": {"m": 1.0, "mu_p": 0.5, "lambda": 1.0, "n": 1},
    "truncation": {"lambda_cutoff": 10.0, "mode_ceiling": 5000, "dense_ceiling": 5000,
                   "dim_ceiling": 200000, "prune_uncoupled": True},
    "scan": {
        "E_grid": {"points": 50, "lower": None, "upper": None},
        "lambda_k": {"start": 1e2, "stop": 1e6, "num": 9},
        "cutoffs": {"start": 100.0, "stop": 1000.0, "num": 10},
        "pairs": 20,
        "seed": 0,
    },
    "output": {"directory": None, "formats": ["json", "csv"]},
}

_TYPES = {
    "manifold.kind": str, "manifold.L1": float, "manifold.L2": float, "manifold.radius": float,
    "manifold.impurity": list,
    "model.m": float, "model.mu_p": float, "model.lambda": float, "model.n": int,
    "truncation.lambda_cutoff": float, "truncation.mode_ceiling": int,
    "truncation.dense_ceiling": int, "truncation.dim_ceiling": int,
    "truncation.prune_uncoupled": bool,
    "scan.E_grid.points": int, "scan.E_grid.lower": (float, type(None)),
    "scan.E_grid.upper": (float, type(None)),
    "scan.lambda_k.start": float, "scan.lambda_k.stop": float, "scan.lambda_k.num": int,
    "scan.cutoffs.start": float, "scan.cutoffs.stop": float, "scan.cutoffs.num": int,
    "scan.pairs": int, "scan.seed": int,
    "output.directory": (str, type(None)), "output.formats": list,
}


class ConfigError(LeeLabError):
    """Invalid configuration; ``field`` and ``line`` locate the problem when known."""

    def __init__(self, message, field=None, line=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field {field!r}")
        super().__init__(f"{', '.join(loc)}: {message}" if loc else message)
        self.field = field
        self.line = line


@dataclass(frozen=True)
class RunConfig:
    """Validated configuration; ``data`` is the fully populated nested dict."""

    data: dict

    def __getitem__(self, key):
        return self.data[key]

    @property
    def manifold(self):
        from .manifold import ManifoldSpec
        b = self.data["manifold"]
        return ManifoldSpec(kind=b["kind"], L1=b["L1"], L2=b["L2"], radius=b["radius"],
                            impurity=tuple(b["impurity"]))

    def catalog(self):
        from .manifold import build_catalog
        t = self.data["truncation"]
        return build_catalog(self.manifold, t["lambda_cutoff"], self.data["model"]["m"],
                             prune_uncoupled=t["prune_uncoupled"], mode_ceiling=t["mode_ceiling"])

    def params(self, catalog=None, n=None):
        from .fock import ModelParams
        mdl = self.data["model"]
        cat = self.catalog() if catalog is None else catalog
        return ModelParams(mdl["m"], mdl["mu_p"], mdl["lambda"], mdl["n"] if n is None else n, cat)

    def canonical(self) -> str:
        """Sorted compact JSON; the basis of :func:`config_hash`."""
        d = copy.deepcopy(self.data)
        d["output"].pop("directory", None)
        return json.dumps(d, sort_keys=True, separators=(",", ":"))


def config_hash(config: RunConfig, command: str, extra: dict | None = None, version: str = "") -> str:
    blob = json.dumps({"config": json.loads(config.canonical()), "command": command,
                       "extra": extra or {}, "version": version}, sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(blob.encode()).hexdigest()[:16]


def _line_of(text, key):
    if text is None:
        return None
    m = re.search(r'"%s"\s*:' % re.escape(key), text)
    return text.count("\n", 0, m.start()) + 1 if m else None


def _merge(defaults, user, path, text):
    out = copy.deepcopy(defaults)
    if not isinstance(user, dict):
        raise ConfigError("expected a JSON object", field=path or "<root>", line=_line_of(text, path.split(".")[-1]) if path else 1)
    for key, val in user.items():
        field = f"{path}.{key}" if path else key
        if key not in defaults:
            raise ConfigError("unknown key", field=field, line=_line_of(text, key))
        if isinstance(defaults[key], dict):
            out[key] = _merge(defaults[key], val, field, text)
        else:
            out[key] = _coerce(val, field, text)
    return out


def _coerce(val, field, text):
    want = _TYPES[field]
    line = _line_of(text, field.split(".")[-1])
    kinds = want if isinstance(want, tuple) else (want,)
    if val is None and type(None) in kinds:
        return None
    if bool in kinds:
        if isinstance(val, bool):
            return val
    elif int in kinds and isinstance(val, int) and not isinstance(val, bool):
        return int(val)
    elif float in kinds and isinstance(val, (int, float)) and not isinstance(val, bool):
        return float(val)
    elif str in kinds and isinstance(val, str):
        return val
    elif list in kinds and isinstance(val, list):
        return list(val)
    names = "/".join(k.__name__ if k is not type(None) else "null" for k in kinds)
    raise ConfigError(f"expected {names}, got {type(val).__name__}", field=field, line=line)


def _validate(d, text):
    def fail(msg, field):
        raise ConfigError(msg, field=field, line=_line_of(text, field.split(".")[-1]))

    mf, md, tr, sc = d["manifold"], d["model"], d["truncation"], d["scan"]
    if mf["kind"] not in ("torus", "sphere"):
        fail("kind must be 'torus' or 'sphere'", "manifold.kind")
    if len(mf["impurity"]) != 2 or not all(isinstance(v, (int, float)) for v in mf["impurity"]):
        fail("impurity must be two numbers", "manifold.impurity")
    for key in ("L1", "L2", "radius"):
        if not mf[key] > 0:
            fail("must be positive", f"manifold.{key}")
    if not md["m"] > 0:
        fail("boson mass must be positive", "model.m")
    if not 0 < md["mu_p"] < md["m"]:
        fail("must satisfy 0 < mu_p < m", "model.mu_p")
    if not md["lambda"] >= 0:
        fail("must be non-negative", "model.lambda")
    if md["n"] < 0:
        fail("must be non-negative", "model.n")
    if not tr["lambda_cutoff"] >= 0:
        fail("must be non-negative", "truncation.lambda_cutoff")
    for key in ("mode_ceiling", "dense_ceiling", "dim_ceiling"):
        if tr[key] < 1:
            fail("must be positive", f"truncation.{key}")
    if sc["E_grid"]["points"] < 2:
        fail("need at least two points", "scan.E_grid.points")
    lk = sc["lambda_k"]
    if not (0 < lk["start"] < lk["stop"]) or lk["num"] < 2:
        fail("need 0 < start < stop and num >= 2", "scan.lambda_k")
    cu = sc["cutoffs"]
    if not (0 < cu["start"] < cu["stop"]) or cu["num"] < 2:
        fail("need 0 < start < stop and num >= 2", "scan.cutoffs")
    if sc["pairs"] < 1:
        fail("must be positive", "scan.pairs")
    bad = [f for f in d["output"]["formats"] if f not in ("json", "csv")]
    if bad:
        fail(f"unsupported formats {bad}", "output.formats")
    try:
        RunConfig(d).manifold
    except LeeLabError as exc:
        raise ConfigError(str(exc), field="manifold") from exc


def config_from_dict(user: dict | None = None, text: str | None = None) -> RunConfig:
    d = _merge(DEFAULTS, user or {}, "", text)
    _validate(d, text)
    return RunConfig(d)


def load_config(path) -> RunConfig:
    """Read and validate a JSON configuration file."""
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read configuration: {exc.strerror}") from exc
    try:
        user = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(exc.msg, line=exc.lineno) from exc
    return config_from_dict(user, text)
