"""Experiment configuration: JSON schema, validation and named presets."""

import copy
import hashlib
import itertools
import json
import math
import re
import sys
from dataclasses import asdict, dataclass, field
from typing import List, Optional

from .errors import InvalidConfigurationError
from .precoding import check_outer_dimensions
from .simulate import HRS_SCHEMES, SCHEMES

SCHEMA_VERSION = 1

DEFAULTS = {
    "schema_version": SCHEMA_VERSION,
    "M": 100,
    "layout": "uniform",
    "K": 5,
    "group_sizes": None,
    "b": None,
    "r_d": None,
    "tau2": [0.4],
    "spread": ["pi/6"],
    "snr_db": {"start": 0, "stop": 35, "step": 5},
    "schemes": ["BC_RZF", "RS_CLF"],
    "trials": 500,
    "seed": 2024,
    "mu": 0.9,
    "grid_step": 0.01,
    "quadrature_points": 200,
    "inner_gamma": "exact",
    "strong_rule": "aggregate",
    "weak_threshold": 0.01,
    "literal_group_indices": True,
    "asymptotic": True,
    "output_dir": "results",
}

_ANGLE = re.compile(r"^\s*(?:([0-9.]+)\s*\*?\s*)?pi\s*(?:/\s*([0-9.]+))?\s*$")


@dataclass(frozen=True)
class Variant:
    """One point of the sweep over user count, CSIT quality and angular spread."""

    K: int
    tau2: float
    spread: float

    def slug(self) -> str:
        return f"K{self.K}_tau2-{self.tau2:g}_spread-{self.spread:.6g}"


@dataclass
class ExperimentConfig:
    name: str
    M: int
    layout: str
    K: List[int]
    group_sizes: Optional[List[int]]
    b: Optional[List[int]]
    r_d: Optional[List[int]]
    tau2: List[float]
    spread: List[float]
    snr_db: List[float]
    schemes: List[str]
    trials: int
    seed: int
    mu: float
    grid_step: float
    quadrature_points: int
    inner_gamma: str
    strong_rule: str
    weak_threshold: float
    literal_group_indices: bool
    asymptotic: bool
    output_dir: str
    schema_version: int = SCHEMA_VERSION
    raw: dict = field(default_factory=dict, repr=False, compare=False)

    @property
    def grouped(self) -> bool:
        return self.layout == "grouped"

    @property
    def G(self) -> Optional[int]:
        return len(self.group_sizes) if self.grouped else None

    def variants(self) -> List[Variant]:
        return [Variant(k, t, s) for k, t, s in itertools.product(self.K, self.tau2, self.spread)]

    def to_dict(self) -> dict:
        d = asdict(self)
        d.pop("raw")
        return d

    def digest(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(blob.encode()).hexdigest()


def parse_angle(value) -> float:
    """Radians from a number or a string such as ``"pi/8"`` or ``"2*pi/3"``."""
    if isinstance(value, bool):
        raise ValueError(f"not an angle: {value!r}")
    if isinstance(value, (int, float)):
        return float(value)
    m = _ANGLE.match(str(value))
    if not m:
        return float(value)
    num = float(m.group(1)) if m.group(1) else 1.0
    den = float(m.group(2)) if m.group(2) else 1.0
    return num * math.pi / den


def parse_snr_grid(value) -> List[float]:
    """SNR list from a list, a ``{"start", "stop", "step"}`` dict or ``"A:B:STEP"``.

    Ranges include the stop value when it lies on the grid.
    """
    if isinstance(value, str):
        parts = value.split(":")
        if len(parts) != 3:
            raise ValueError(f"expected A:B:STEP, got {value!r}")
        value = dict(zip(("start", "stop", "step"), (float(p) for p in parts)))
    if isinstance(value, dict):
        start, stop, step = float(value["start"]), float(value["stop"]), float(value["step"])
        if step <= 0:
            raise ValueError("SNR step must be positive")
        n = int(math.floor((stop - start) / step + 1e-9)) + 1
        return [round(start + i * step, 10) for i in range(max(n, 0))]
    if isinstance(value, (int, float)):
        return [float(value)]
    return [float(v) for v in value]


def _as_list(value):
    return list(value) if isinstance(value, (list, tuple)) else [value]


def _check(errors, cond, msg):
    if not cond:
        errors.append(msg)


def build_config(raw: dict, name: str = "custom") -> ExperimentConfig:
    """Apply defaults and validate. All problems are reported together."""
    if not isinstance(raw, dict):
        raise InvalidConfigurationError("config must be a JSON object")
    unknown = set(raw) - set(DEFAULTS) - {"name"}
    errors = [f"unknown field {k!r}" for k in sorted(unknown)]
    d = copy.deepcopy(DEFAULTS)
    d.update(copy.deepcopy(raw))
    name = str(d.pop("name", name))

    def parse(key, fn):
        try:
            return fn(d[key])
        except (TypeError, ValueError, KeyError) as exc:
            errors.append(f"{key}: {exc}")
            return None

    version = d["schema_version"]
    _check(errors, version == SCHEMA_VERSION, f"schema_version: expected {SCHEMA_VERSION}, got {version!r}")
    M = parse("M", int)
    layout = d["layout"]
    _check(errors, layout in ("uniform", "grouped"), f"layout: must be 'uniform' or 'grouped', got {layout!r}")
    tau2 = parse("tau2", lambda v: [float(x) for x in _as_list(v)])
    spread = parse("spread", lambda v: [parse_angle(x) for x in _as_list(v)])
    snr = parse("snr_db", parse_snr_grid)
    schemes = parse("schemes", lambda v: [str(x) for x in _as_list(v)])
    trials = parse("trials", int)
    seed = parse("seed", int)
    mu = parse("mu", float)
    step = parse("grid_step", float)
    quad = parse("quadrature_points", int)

    group_sizes = b = r_d = None
    if layout == "grouped":
        group_sizes = parse("group_sizes", lambda v: [int(x) for x in v])
        b = parse("b", lambda v: [int(x) for x in v])
        r_d = parse("r_d", lambda v: [int(x) for x in v])
        K = [sum(group_sizes)] if group_sizes else None
        if K and "K" in raw and _as_list(raw["K"]) != K:
            errors.append(f"K: must equal sum(group_sizes) = {K[0]} for layout 'grouped'")
    else:
        K = parse("K", lambda v: [int(x) for x in _as_list(v)])

    if M is not None:
        _check(errors, M >= 2, f"M: need at least 2 antennas, got {M}")
    if tau2 is not None:
        _check(errors, len(tau2) > 0 and all(0 <= t <= 1 for t in tau2), "tau2: values must lie in [0, 1]")
    if spread is not None:
        _check(errors, len(spread) > 0 and all(0 <= s <= math.pi for s in spread), "spread: values must lie in [0, pi]")
    if snr is not None:
        _check(errors, len(snr) > 0, "snr_db: grid is empty")
        _check(errors, all(b2 > a for a, b2 in zip(snr, snr[1:])), "snr_db: grid must be strictly increasing")
    if schemes is not None:
        _check(errors, len(schemes) > 0, "schemes: list is empty")
        for s in schemes:
            _check(errors, s in SCHEMES, f"schemes: unknown scheme {s!r}")
        _check(errors, len(set(schemes)) == len(schemes), "schemes: duplicate entries")
        if layout == "uniform":
            bad = sorted(HRS_SCHEMES.intersection(schemes))
            _check(errors, not bad, f"schemes: {bad} need layout 'grouped'")
    if trials is not None:
        _check(errors, trials >= 1, "trials: must be >= 1")
    if mu is not None:
        _check(errors, 0 < mu <= 1, "mu: must lie in (0, 1]")
    if step is not None:
        _check(errors, 0 < step < 1, "grid_step: must lie in (0, 1)")
    if quad is not None:
        _check(errors, quad >= 1, "quadrature_points: must be >= 1")
    _check(errors, d["inner_gamma"] in ("exact", "approx"), "inner_gamma: must be 'exact' or 'approx'")
    _check(errors, d["strong_rule"] in ("aggregate", "all"), "strong_rule: must be 'aggregate' or 'all'")
    _check(errors, isinstance(d["asymptotic"], bool), "asymptotic: must be true or false")
    _check(errors, isinstance(d["literal_group_indices"], bool), "literal_group_indices: must be true or false")
    wt = parse("weak_threshold", float)
    if wt is not None:
        _check(errors, wt > 0, "weak_threshold: must be positive")

    if K is not None and M is not None and layout == "uniform":
        for k in K:
            _check(errors, 1 <= k <= M, f"K: need 1 <= K <= M, got K={k}")
    if layout == "grouped" and None not in (group_sizes, b, r_d, M):
        G = len(group_sizes)
        if not (len(b) == G and len(r_d) == G):
            errors.append("group_sizes, b and r_d must have one entry per group")
        elif G == 0:
            errors.append("group_sizes: need at least one group")
        else:
            _check(errors, all(k >= 1 for k in group_sizes), "group_sizes: every group needs a user")
            try:
                check_outer_dimensions(M, r_d, b, group_sizes)
            except InvalidConfigurationError as exc:
                errors.append(str(exc))

    if errors:
        raise InvalidConfigurationError("invalid configuration:\n  " + "\n  ".join(errors))
    return ExperimentConfig(
        name=name, M=M, layout=layout, K=K, group_sizes=group_sizes, b=b, r_d=r_d,
        tau2=tau2, spread=spread, snr_db=snr, schemes=schemes, trials=trials, seed=seed,
        mu=mu, grid_step=step, quadrature_points=quad, inner_gamma=d["inner_gamma"],
        strong_rule=d["strong_rule"], weak_threshold=wt,
        literal_group_indices=d["literal_group_indices"], asymptotic=d["asymptotic"],
        output_dir=str(d["output_dir"]), raw=raw,
    )


_GROUPED = {
    "M": 100,
    "layout": "grouped",
    "group_sizes": [3, 3, 3, 3],
    "b": [15, 15, 15, 15],
    "r_d": [20, 20, 20, 20],
}

PRESETS = {
    "fig_rs_validation": {
        "K": 5, "tau2": [0.0, 0.4], "spread": ["pi/6"],
        "snr_db": {"start": 0, "stop": 35, "step": 5},
        "schemes": ["BC_RZF", "RS_CLF"],
    },
    "fig_rs_vs_bc": {
        "K": 5, "tau2": [0.4], "spread": ["pi/6"],
        "snr_db": {"start": 0, "stop": 35, "step": 5},
        "schemes": ["BC_RZF", "TDMA", "RS_CLF", "RS_EXS"],
    },
    "fig_gain_vs_eta": {
        "K": [2, 4, 5, 10, 20, 25], "tau2": [0.5], "spread": ["pi/6"],
        "snr_db": [10, 20, 30],
        "schemes": ["BC_RZF", "RS_CLF"],
    },
    "fig_rs_mbf": {
        "K": 5, "tau2": [0.5], "spread": ["pi/6"],
        "snr_db": {"start": 0, "stop": 35, "step": 5},
        "schemes": ["BC_RZF", "RS_MBF"],
    },
    "fig_hrs_as": dict(_GROUPED, **{
        "tau2": [0.0, 0.4], "spread": ["pi/8", "pi/3"],
        "snr_db": {"start": 0, "stop": 35, "step": 5},
        "schemes": ["TTP", "HRS_CLF"],
    }),
    "fig_hrs_baselines": dict(_GROUPED, **{
        "tau2": [0.4], "spread": ["pi/8", "pi/3"],
        "snr_db": {"start": 0, "stop": 35, "step": 5},
        "schemes": ["TTP", "HRS_CLF", "HRS_EXS", "BASELINE2", "BASELINE3"],
    }),
    "fig_hrs": dict(_GROUPED, **{
        "tau2": [0.4], "spread": ["pi/8", "pi/3"],
        "snr_db": {"start": 0, "stop": 35, "step": 5},
        "schemes": ["TTP", "HRS_CLF"],
    }),
    "fig_tau_sweep": dict(_GROUPED, **{
        "tau2": [0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8],
        "spread": ["pi/8"],
        "snr_db": [30],
        "schemes": ["BC_RZF", "RS_CLF", "TTP", "HRS_CLF"],
    }),
}

PRESET_DESCRIPTIONS = {
    "fig_rs_validation": "RS asymptote vs Monte Carlo, K=5, tau2 in {0, 0.4}",
    "fig_rs_vs_bc": "RS (closed form and exhaustive split) vs RZF broadcast and TDMA, tau2=0.4",
    "fig_gain_vs_eta": "RS gain over RZF broadcast versus M/K, tau2=0.5",
    "fig_rs_mbf": "RS with matched-filter private beams vs RZF broadcast, tau2=0.5",
    "fig_hrs_as": "HRS asymptote vs Monte Carlo, disjoint and overlapping groups",
    "fig_hrs_baselines": "HRS vs two-tier broadcast and user-scheduling baselines, tau2=0.4",
    "fig_hrs": "HRS vs two-tier broadcast, disjoint and overlapping groups",
    "fig_tau_sweep": "one-tier vs two-tier schemes across CSIT quality at 30 dB",
}


def preset_catalog() -> List[str]:
    return sorted(PRESETS)


def preset_config(name: str) -> ExperimentConfig:
    if name not in PRESETS:
        raise InvalidConfigurationError(f"unknown preset {name!r}; available: {', '.join(preset_catalog())}")
    return build_config(copy.deepcopy(PRESETS[name]), name=name)


def load_config(source) -> ExperimentConfig:
    """Read a JSON config from a path, ``"-"`` (stdin) or an open file."""
    if source == "-":
        text, name = sys.stdin.read(), "stdin"
    elif hasattr(source, "read"):
        text, name = source.read(), "custom"
    else:
        try:
            with open(source) as fh:
                text = fh.read()
        except OSError as exc:
            raise InvalidConfigurationError(f"cannot read config {source!r}: {exc}") from exc
        name = re.sub(r"\.json$", "", str(source).replace("\\", "/").split("/")[-1])
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InvalidConfigurationError(f"config is not valid JSON: {exc}") from exc
    return build_config(raw, name=name)


def with_overrides(cfg: ExperimentConfig, **overrides) -> ExperimentConfig:
    """Rebuild ``cfg`` with some raw fields replaced; ``None`` values are ignored."""
    raw = dict(cfg.raw)
    raw.update({k: v for k, v in overrides.items() if v is not None})
    return build_config(raw, name=cfg.name)


def resolve_config(target: str) -> ExperimentConfig:
    """A preset name or a config path."""
    return preset_config(target) if target in PRESETS else load_config(target)
