"""Declarative experiment specs (TOML) with dotted-key overrides."""

from __future__ import annotations

import copy
from dataclasses import dataclass, field
from pathlib import Path

try:
    import tomllib
except ModuleNotFoundError:  # Python 3.10
    import tomli as tomllib

from ..estimators import EstimatorConfig
from ..sampler import Scheme

DEFAULTS = {
    "experiment": {"mode": "synthetic", "seed": 0, "graphs": 1, "workers": 1,
                   "output": "results", "include_train": False},
    "model": {"n": 50, "n0": 10, "p0": 0.6, "p": 0.3, "r": 1.0},
    "sampler": {"scheme": "local-unif", "tries": 1000},
    "evaluation": {"alphas": [0.0], "epsilons": []},
    "real": {"edges": "", "times": ""},
    "estimator": [{"variant": "sort-by-puv-sum"}],
}


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentSpec:
    mode: str
    seed: int
    graphs: int
    n: int
    n0: int
    p0: float
    p: float
    r: float
    scheme: Scheme
    tries: int
    estimators: list[EstimatorConfig]
    alphas: list[float]
    epsilons: list[float] = field(default_factory=list)
    output: Path = Path("results")
    workers: int = 1
    include_train: bool = False
    edges: str = ""
    times: str = ""

    def __post_init__(self):
        if self.mode not in ("synthetic", "real"):
            raise ConfigError(f"mode must be 'synthetic' or 'real', got {self.mode!r}")
        if self.graphs < 1:
            raise ConfigError("graphs must be >= 1")
        if self.tries < 1:
            raise ConfigError("tries must be >= 1")
        if not self.alphas or any(not 0.0 <= a < 1.0 for a in self.alphas):
            raise ConfigError("alphas must be a non-empty list in [0, 1)")
        if self.mode == "real" and not self.edges:
            raise ConfigError("real mode needs real.edges")
        if not self.estimators:
            raise ConfigError("at least one [[estimator]] is required")

    @classmethod
    def from_dict(cls, raw: dict) -> ExperimentSpec:
        d = _merge(copy.deepcopy(DEFAULTS), raw)
        unknown = set(d) - set(DEFAULTS)
        if unknown:
            raise ConfigError(f"unknown sections: {sorted(unknown)}")
        ex, mo, sa, ev, re = d["experiment"], d["model"], d["sampler"], d["evaluation"], d["real"]
        try:
            ests = [EstimatorConfig(**e) for e in d["estimator"]]
            scheme = Scheme(sa["scheme"])
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from None
        return cls(mode=ex["mode"], seed=int(ex["seed"]), graphs=int(ex["graphs"]),
                   n=int(mo["n"]), n0=int(mo["n0"]), p0=float(mo["p0"]), p=float(mo["p"]),
                   r=float(mo["r"]), scheme=scheme, tries=int(sa["tries"]), estimators=ests,
                   alphas=[float(a) for a in ev["alphas"]],
                   epsilons=[float(e) for e in ev["epsilons"]], output=Path(ex["output"]),
                   workers=int(ex["workers"]), include_train=bool(ex["include_train"]),
                   edges=str(re["edges"]), times=str(re["times"]))


def _merge(base: dict, over: dict) -> dict:
    for key, val in over.items():
        if isinstance(val, dict) and isinstance(base.get(key), dict):
            _merge(base[key], val)
        else:
            base[key] = val
    return base


def parse_override(text: str) -> dict:
    """``section.key=value`` -> nested dict; the value is parsed as a TOML value."""
    if "=" not in text:
        raise ConfigError(f"override {text!r} is not key=value")
    key, val = text.split("=", 1)
    parts = key.strip().split(".")
    try:
        value = tomllib.loads(f"v = {val.strip()}")["v"]
    except tomllib.TOMLDecodeError:
        value = val.strip()   # bare strings
    out: dict = {}
    cur = out
    for p in parts[:-1]:
        cur = cur.setdefault(p, {})
    cur[parts[-1]] = value
    return out


def load_spec(path: str | Path | None, overrides=()) -> ExperimentSpec:
    raw: dict = {}
    if path is not None:
        with open(path, "rb") as fh:
            try:
                raw = tomllib.load(fh)
            except tomllib.TOMLDecodeError as exc:
                raise ConfigError(f"{path}: {exc}") from None
    for ov in overrides:
        _merge(raw, parse_override(ov))
    return ExperimentSpec.from_dict(raw)
