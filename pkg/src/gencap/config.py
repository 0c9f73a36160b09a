"""Line-oriented experiment configuration.

One ``key = value`` per line; ``#`` starts a comment; repeating a key (or
giving several whitespace-separated values) builds a list.  Example::

    experiment = gc_vs_sigma
    d = 8
    sigma_linspace = 0.1 10 30
    beta_min = 0.01
    beta_max = 20
    beta_count = 100
    method = exhaustive
    m = 200
    seed = 20240101
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from gencap.costs import COSTS
from gencap.gc import CRN_SCHEMES, METHODS, BetaGrid

EXPERIMENTS = ("gibbs_marginals", "ic_vs_beta", "gc_vs_sigma", "gc_vs_d",
               "cost_comparison", "correlated_elogz")

_LIST_KEYS = {"d", "k", "sigma", "method", "r", "crn", "cost", "beta"}
_SCALAR_KEYS = {"experiment", "n", "m", "p", "seed", "beta_min", "beta_max", "beta_count",
                "beta_spacing", "sigma_linspace", "sigma_logspace", "output", "name",
                "correlation", "yh", "workers"}


class ConfigError(ValueError):
    def __init__(self, diagnostics):
        self.diagnostics = list(diagnostics)
        super().__init__("\n".join(self.diagnostics))


@dataclass
class ExperimentConfig:
    experiment: str
    d: list
    k: list
    sigma: list
    seed: int
    grid: BetaGrid
    method: list = field(default_factory=lambda: ["exhaustive"])
    r: list = field(default_factory=lambda: [100])
    crn: list = field(default_factory=lambda: ["CRN3"])
    cost: list = field(default_factory=lambda: ["sq"])
    n: int = 100
    m: int = 100
    p: int = 50
    correlation: float = 0.0
    yh: str = "exact"
    workers: int = 1
    output: str | None = None
    name: str | None = None
    source: list = field(default_factory=list)

    def sweep(self):
        """Sweep points in deterministic config order."""
        return list(itertools.product(self.d, self.k, self.sigma, self.method, self.r,
                                      self.crn, self.cost))

    @property
    def stem(self) -> str:
        return self.name or self.experiment


def _tokens(raw):
    entries = {}
    diags = []
    for lineno, line in enumerate(raw.splitlines(), start=1):
        text = line.split("#", 1)[0].strip()
        if not text:
            continue
        if "=" not in text:
            diags.append(f"line {lineno}: expected 'key = value', got {text!r}")
            continue
        key, value = (s.strip() for s in text.split("=", 1))
        if key not in _LIST_KEYS and key not in _SCALAR_KEYS:
            diags.append(f"line {lineno}: unknown key {key!r}")
            continue
        if key in _SCALAR_KEYS and key in entries:
            diags.append(f"line {lineno}: key {key!r} given more than once")
            continue
        entries.setdefault(key, []).append((lineno, value))
    return entries, diags


def _convert(entries, key, kind, diags, default=None):
    """Parse a list key into typed values, reporting bad tokens by line."""
    if key not in entries:
        return default
    out = []
    for lineno, value in entries[key]:
        for tok in value.split():
            try:
                out.append(kind(tok))
            except ValueError:
                diags.append(f"line {lineno}: {key}: cannot parse {tok!r}")
    return out


def _line(entries, key):
    return entries[key][0][0] if key in entries else 0


def _scalar(entries, key, kind, diags, default=None):
    if key not in entries:
        return default
    lineno, value = entries[key][0]
    try:
        return kind(value)
    except ValueError:
        diags.append(f"line {lineno}: {key}: cannot parse {value!r}")
        return default


def _opt_int(tok):
    return None if tok.lower() in ("none", "full") else int(tok)


def parse_config(text: str):
    """Parse config text; returns ``(config or None, diagnostics)``."""
    entries, diags = _tokens(text)

    experiment = _scalar(entries, "experiment", str, diags)
    if experiment is None:
        diags.append("line 0: missing required key 'experiment'")
    elif experiment not in EXPERIMENTS:
        diags.append(f"line {_line(entries, 'experiment')}: unknown experiment {experiment!r}")

    d = _convert(entries, "d", int, diags)
    if not d:
        diags.append(f"line {_line(entries, 'd')}: d: no values")
        d = []
    for v in d:
        if v < 1:
            diags.append(f"line {_line(entries, 'd')}: d must be positive, got {v}")
    k = _convert(entries, "k", _opt_int, diags, default=[None])
    if not k:
        diags.append(f"line {_line(entries, 'k')}: k: no values")
    for kv in k:
        if kv is None:
            continue
        if kv < 0:
            diags.append(f"line {_line(entries, 'k')}: k must be non-negative, got {kv}")
        for dv in d:
            if dv >= 1 and kv > dv:
                diags.append(f"line {_line(entries, 'k')}: k={kv} exceeds d={dv}")

    sigma = _convert(entries, "sigma", float, diags, default=[])
    for key, maker in (("sigma_linspace", np.linspace), ("sigma_logspace", np.geomspace)):
        if key in entries:
            parts = entries[key][0][1].split()
            try:
                lo, hi, cnt = float(parts[0]), float(parts[1]), int(parts[2])
                if len(parts) != 3 or cnt < 1:
                    raise ValueError
                sigma = sigma + [float(x) for x in maker(lo, hi, cnt)]
            except (ValueError, IndexError):
                diags.append(f"line {_line(entries, key)}: {key} needs 'low high count'")
    if not sigma:
        line = _line(entries, "sigma") or _line(entries, "sigma_linspace")
        diags.append(f"line {line}: sigma: no values")
    for s in sigma:
        if not s > 0:
            diags.append(f"line {_line(entries, 'sigma')}: sigma must be positive, got {s}")

    method = _convert(entries, "method", str, diags, default=["exhaustive"])
    for v in method:
        if v not in METHODS:
            diags.append(f"line {_line(entries, 'method')}: unknown method {v!r}")
    crn = _convert(entries, "crn", str, diags, default=["CRN3"])
    crn = [c.upper().replace("-", "") for c in crn]
    for v in crn:
        if v not in CRN_SCHEMES:
            diags.append(f"line {_line(entries, 'crn')}: unknown CRN scheme {v!r}")
    cost = _convert(entries, "cost", str, diags, default=["sq"])
    for v in cost:
        if v not in COSTS:
            diags.append(f"line {_line(entries, 'cost')}: unknown cost {v!r}")
    r = _convert(entries, "r", int, diags, default=[100])
    for v in r:
        if v < 1:
            diags.append(f"line {_line(entries, 'r')}: r must be at least 1")
    for name, values in (("method", method), ("crn", crn), ("cost", cost), ("r", r)):
        if not values:
            diags.append(f"line {_line(entries, name)}: {name}: no values")

    n = _scalar(entries, "n", int, diags, 100)
    m = _scalar(entries, "m", int, diags, 100)
    p = _scalar(entries, "p", int, diags, 50)
    if n < 1:
        diags.append(f"line {_line(entries, 'n')}: n must be positive")
    if m < 2:
        diags.append(f"line {_line(entries, 'm')}: m must be at least 2")
    if p < 1:
        diags.append(f"line {_line(entries, 'p')}: p must be positive")

    seed = _scalar(entries, "seed", int, diags)
    if seed is None and "seed" not in entries:
        diags.append("line 0: missing required key 'seed'")
    elif seed is not None and not 0 <= seed < 2**64:
        diags.append(f"line {_line(entries, 'seed')}: seed must be an unsigned 64-bit integer")

    grid = None
    explicit = _convert(entries, "beta", float, diags)
    try:
        if explicit:
            grid = BetaGrid(tuple(explicit))
        else:
            lo = _scalar(entries, "beta_min", float, diags, 0.01)
            hi = _scalar(entries, "beta_max", float, diags, 20.0)
            cnt = _scalar(entries, "beta_count", int, diags, 100)
            spacing = _scalar(entries, "beta_spacing", str, diags, "log")
            if spacing not in ("log", "linear"):
                diags.append(f"line {_line(entries, 'beta_spacing')}: beta_spacing must be log or linear")
            elif cnt >= 1 and 0 < lo and (lo < hi or cnt == 1):
                grid = (BetaGrid.logspace if spacing == "log" else BetaGrid.linspace)(lo, hi, cnt)
            else:
                diags.append(f"line {_line(entries, 'beta_min')}: need 0 < beta_min < beta_max and beta_count >= 1")
    except ValueError as exc:
        diags.append(f"line {_line(entries, 'beta')}: {exc}")

    correlation = _scalar(entries, "correlation", float, diags, 0.0)
    yh = _scalar(entries, "yh", str, diags, "exact")
    if yh not in ("exact", "eta_h"):
        diags.append(f"line {_line(entries, 'yh')}: yh must be exact or eta_h")
    if experiment == "correlated_elogz":
        if any(kv is None for kv in k):
            diags.append(f"line {_line(entries, 'k')}: correlated_elogz needs a sparsity k")
        for dv in d:
            if dv > 1 and not -1.0 / (dv - 1) < correlation < 1.0:
                diags.append(f"line {_line(entries, 'correlation')}: correlation {correlation} "
                             f"is not positive definite for d={dv}")
    if "importance" in method and any(kv is None for kv in k):
        diags.append(f"line {_line(entries, 'method')}: importance sampling needs a sparsity k")

    workers = _scalar(entries, "workers", int, diags, 1)
    if workers < 1:
        diags.append(f"line {_line(entries, 'workers')}: workers must be at least 1")
    if diags:
        return None, sorted(diags, key=lambda s: int(s.split(":", 1)[0].split()[1]))
    cfg = ExperimentConfig(
        experiment=experiment, d=d, k=k, sigma=sigma, seed=seed, grid=grid, method=method,
        r=r, crn=crn, cost=cost, n=n, m=m, p=p, correlation=correlation, yh=yh,
        workers=workers, output=_scalar(entries, "output", str, diags),
        name=_scalar(entries, "name", str, diags), source=text.splitlines(),
    )
    return cfg, []


def validate_config(path) -> list[str]:
    """All problems with a config file; empty means it can be run."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    return parse_config(text)[1]


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        cfg, diags = parse_config(fh.read())
    if diags:
        raise ConfigError(diags)
    return cfg
