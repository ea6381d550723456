"""YAML scenario configs: strict parsing with path-qualified errors.

Every key is checked; unknown or misspelled keys are rejected with the full
key path rather than silently ignored.  ``scenario_to_mapping`` inverts the
parse so a scenario can be round-tripped through its config form.

Schema (scalars marked * may instead be a per-agent list):

    network:        {type: cycle, agents: int, self_weight: float}
                    or {type: explicit, weights: [[...], ...]}
    truth:          {mu: float*, precision: float*}
    hypotheses:     [{name: str, mu: float*, precision: float*}, ...]
    evidence:       {<hypothesis name>: {count: int*}
                                        | {range: [lo, hi]}
                                        | {dogmatic: true}, ...}
    prior:          {mu, kappa, alpha, beta}        (optional)
    horizon:        int >= 1
    seed:           int >= 0
    runs:           int >= 1                        (optional, default 1)
    upsilon:        float > 1                       (optional, default 10)
    fixed_evidence: bool                            (optional, default false)
    output:         {results: str, summary: str}    (optional)
"""

from __future__ import annotations

from typing import Any

import yaml

from .core import GaussGammaParams, GaussianParams, NONINFORMATIVE_PRIOR
from .simulate import (
    CycleNetworkSpec,
    DogmaticEvidence,
    ExplicitNetworkSpec,
    FixedEvidence,
    RangeEvidence,
    Scenario,
)

__all__ = [
    "ConfigError",
    "ParseError",
    "UnknownKeyError",
    "InvalidValueError",
    "parse_config",
    "parse_mapping",
    "scenario_to_mapping",
]


class ConfigError(Exception):
    """Base class for anything wrong with a scenario config."""


class ParseError(ConfigError):
    """The file is not a YAML mapping at all."""


class UnknownKeyError(ConfigError):
    def __init__(self, path: str):
        super().__init__(f"unknown config key: {path}")
        self.path = path


class InvalidValueError(ConfigError):
    def __init__(self, path: str, reason: str):
        super().__init__(f"invalid value at {path}: {reason}")
        self.path = path
        self.reason = reason


def _require_mapping(value, path: str) -> dict:
    if not isinstance(value, dict):
        raise InvalidValueError(path, f"expected a mapping, got {type(value).__name__}")
    return value


def _check_keys(mapping: dict, allowed: set[str], path: str) -> None:
    for key in mapping:
        if key not in allowed:
            raise UnknownKeyError(f"{path}.{key}" if path else str(key))


def _get(mapping: dict, key: str, path: str, required: bool = True, default=None):
    if key not in mapping:
        if required:
            raise InvalidValueError(path or "<top level>", f"missing required key '{key}'")
        return default
    return mapping[key]


def _as_int(value, path: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise InvalidValueError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise InvalidValueError(path, f"must be >= {minimum}, got {value}")
    return value


def _as_float(value, path: str) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise InvalidValueError(path, f"expected a number, got {value!r}")
    return float(value)


def _as_bool(value, path: str) -> bool:
    if not isinstance(value, bool):
        raise InvalidValueError(path, f"expected true or false, got {value!r}")
    return value


def _as_str(value, path: str) -> str:
    if not isinstance(value, str) or not value:
        raise InvalidValueError(path, f"expected a nonempty string, got {value!r}")
    return value


def _per_agent_floats(value, m: int, path: str) -> tuple[float, ...]:
    if isinstance(value, list):
        if len(value) != m:
            raise InvalidValueError(path, f"expected {m} entries, got {len(value)}")
        return tuple(_as_float(v, f"{path}[{i}]") for i, v in enumerate(value))
    return (_as_float(value, path),) * m


def _per_agent_ints(value, m: int, path: str) -> tuple[int, ...]:
    if isinstance(value, list):
        if len(value) != m:
            raise InvalidValueError(path, f"expected {m} entries, got {len(value)}")
        return tuple(_as_int(v, f"{path}[{i}]", minimum=0) for i, v in enumerate(value))
    return (_as_int(value, path, minimum=0),) * m


def _parse_network(data, path: str):
    mapping = _require_mapping(data, path)
    kind = _as_str(_get(mapping, "type", path), f"{path}.type")
    if kind == "cycle":
        _check_keys(mapping, {"type", "agents", "self_weight"}, path)
        agents = _as_int(_get(mapping, "agents", path), f"{path}.agents", minimum=2)
        self_weight = _as_float(
            _get(mapping, "self_weight", path, required=False, default=0.5),
            f"{path}.self_weight",
        )
        if not 0.0 < self_weight < 1.0:
            raise InvalidValueError(f"{path}.self_weight", f"must lie in (0, 1), got {self_weight}")
        return CycleNetworkSpec(agents=agents, self_weight=self_weight)
    if kind == "explicit":
        _check_keys(mapping, {"type", "weights"}, path)
        rows = _get(mapping, "weights", path)
        if not isinstance(rows, list) or not rows:
            raise InvalidValueError(f"{path}.weights", "expected a list of rows")
        m = len(rows)
        weights = []
        for i, row in enumerate(rows):
            if not isinstance(row, list) or len(row) != m:
                raise InvalidValueError(f"{path}.weights[{i}]", f"expected a row of {m} numbers")
            weights.append(tuple(_as_float(v, f"{path}.weights[{i}][{j}]") for j, v in enumerate(row)))
        return ExplicitNetworkSpec(weights=tuple(weights))
    raise InvalidValueError(f"{path}.type", f"expected 'cycle' or 'explicit', got {kind!r}")


def _parse_gaussian_columns(data, m: int, path: str) -> tuple[tuple[float, ...], tuple[float, ...]]:
    mapping = _require_mapping(data, path)
    _check_keys(mapping, {"mu", "precision", "name"}, path)
    mus = _per_agent_floats(_get(mapping, "mu", path), m, f"{path}.mu")
    lams = _per_agent_floats(_get(mapping, "precision", path), m, f"{path}.precision")
    for i, lam in enumerate(lams):
        if not lam > 0.0:
            raise InvalidValueError(f"{path}.precision", f"must be positive, got {lam}")
    return mus, lams


def _parse_evidence_entry(data, m: int, path: str):
    mapping = _require_mapping(data, path)
    _check_keys(mapping, {"count", "range", "dogmatic"}, path)
    given = [k for k in ("count", "range", "dogmatic") if k in mapping]
    if len(given) != 1:
        raise InvalidValueError(path, "give exactly one of count, range or dogmatic")
    if "count" in mapping:
        return FixedEvidence(counts=_per_agent_ints(mapping["count"], m, f"{path}.count"))
    if "range" in mapping:
        pair = mapping["range"]
        if not isinstance(pair, list) or len(pair) != 2:
            raise InvalidValueError(f"{path}.range", "expected [lo, hi]")
        lo = _as_int(pair[0], f"{path}.range[0]", minimum=0)
        hi = _as_int(pair[1], f"{path}.range[1]", minimum=0)
        if hi < lo:
            raise InvalidValueError(f"{path}.range", f"need lo <= hi, got [{lo}, {hi}]")
        return RangeEvidence(lo=lo, hi=hi)
    if not _as_bool(mapping["dogmatic"], f"{path}.dogmatic"):
        raise InvalidValueError(f"{path}.dogmatic", "only 'dogmatic: true' makes sense")
    return DogmaticEvidence()


def _parse_prior(data, path: str) -> GaussGammaParams:
    mapping = _require_mapping(data, path)
    _check_keys(mapping, {"mu", "kappa", "alpha", "beta"}, path)
    kwargs = {}
    for key in ("mu", "kappa", "alpha", "beta"):
        if key in mapping:
            kwargs[key] = _as_float(mapping[key], f"{path}.{key}")
    try:
        return GaussGammaParams(**kwargs)
    except ValueError as err:
        raise InvalidValueError(path, str(err)) from err


TOP_KEYS = {
    "network",
    "truth",
    "hypotheses",
    "evidence",
    "prior",
    "horizon",
    "seed",
    "runs",
    "upsilon",
    "fixed_evidence",
    "output",
}


def parse_mapping(data: Any) -> Scenario:
    """Build a Scenario from an already-loaded config mapping."""
    if data is None:
        raise ParseError("the config is empty")
    if not isinstance(data, dict):
        raise ParseError(f"the top level must be a mapping, got {type(data).__name__}")
    _check_keys(data, TOP_KEYS, "")

    network = _parse_network(_get(data, "network", ""), "network")
    m = network.m

    truth_mu, truth_lam = _parse_gaussian_columns(_get(data, "truth", ""), m, "truth")
    truth = tuple(GaussianParams(mu, lam) for mu, lam in zip(truth_mu, truth_lam))

    hyp_list = _get(data, "hypotheses", "")
    if not isinstance(hyp_list, list) or not hyp_list:
        raise InvalidValueError("hypotheses", "expected a nonempty list")
    names = []
    columns = []
    for k, entry in enumerate(hyp_list):
        path = f"hypotheses[{k}]"
        mapping = _require_mapping(entry, path)
        name = _as_str(_get(mapping, "name", path), f"{path}.name")
        if name in names:
            raise InvalidValueError(f"{path}.name", f"duplicate hypothesis name {name!r}")
        names.append(name)
        columns.append(_parse_gaussian_columns(mapping, m, path))
    hypotheses = tuple(
        tuple(GaussianParams(columns[k][0][i], columns[k][1][i]) for k in range(len(names)))
        for i in range(m)
    )

    ev_map = _require_mapping(_get(data, "evidence", ""), "evidence")
    for key in ev_map:
        if key not in names:
            raise UnknownKeyError(f"evidence.{key}")
    regimes = []
    for name in names:
        if name not in ev_map:
            raise InvalidValueError("evidence", f"missing entry for hypothesis {name!r}")
        regimes.append(_parse_evidence_entry(ev_map[name], m, f"evidence.{name}"))

    prior = NONINFORMATIVE_PRIOR
    if "prior" in data:
        prior = _parse_prior(data["prior"], "prior")

    horizon = _as_int(_get(data, "horizon", ""), "horizon", minimum=1)
    seed = _as_int(_get(data, "seed", ""), "seed", minimum=0)
    runs = _as_int(_get(data, "runs", "", required=False, default=1), "runs", minimum=1)
    upsilon = _as_float(_get(data, "upsilon", "", required=False, default=10.0), "upsilon")
    if not upsilon > 1.0:
        raise InvalidValueError("upsilon", f"must exceed 1, got {upsilon}")
    fixed_evidence = _as_bool(
        _get(data, "fixed_evidence", "", required=False, default=False), "fixed_evidence"
    )

    results_path = summary_path = None
    if "output" in data:
        out = _require_mapping(data["output"], "output")
        _check_keys(out, {"results", "summary"}, "output")
        if "results" in out:
            results_path = _as_str(out["results"], "output.results")
        if "summary" in out:
            summary_path = _as_str(out["summary"], "output.summary")

    try:
        return Scenario(
            network=network,
            hypothesis_names=tuple(names),
            hypotheses=hypotheses,
            truth=truth,
            evidence=tuple(regimes),
            prior=prior,
            horizon=horizon,
            seed=seed,
            runs=runs,
            upsilon=upsilon,
            fixed_evidence=fixed_evidence,
            results_path=results_path,
            summary_path=summary_path,
        )
    except ValueError as err:
        raise InvalidValueError("<scenario>", str(err)) from err


def parse_config(path) -> Scenario:
    """Load and validate a scenario config file."""
    with open(path, "r", encoding="utf-8") as fh:
        text = fh.read()
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as err:
        raise ParseError(f"not valid YAML: {err}") from err
    return parse_mapping(data)


def _compress(values: tuple) -> Any:
    """Collapse a uniform per-agent tuple back to its scalar form."""
    first = values[0]
    if all(v == first for v in values):
        return first
    return list(values)


def scenario_to_mapping(scenario: Scenario) -> dict:
    """Emit the config mapping equivalent of a scenario (parse's inverse)."""
    if isinstance(scenario.network, CycleNetworkSpec):
        network = {
            "type": "cycle",
            "agents": scenario.network.agents,
            "self_weight": scenario.network.self_weight,
        }
    else:
        network = {
            "type": "explicit",
            "weights": [list(row) for row in scenario.network.weights],
        }

    hypotheses = []
    for k, name in enumerate(scenario.hypothesis_names):
        hypotheses.append(
            {
                "name": name,
                "mu": _compress(tuple(row[k].mu for row in scenario.hypotheses)),
                "precision": _compress(tuple(row[k].lam for row in scenario.hypotheses)),
            }
        )

    evidence = {}
    for name, regime in zip(scenario.hypothesis_names, scenario.evidence):
        if isinstance(regime, FixedEvidence):
            evidence[name] = {"count": _compress(regime.counts)}
        elif isinstance(regime, RangeEvidence):
            evidence[name] = {"range": [regime.lo, regime.hi]}
        else:
            evidence[name] = {"dogmatic": True}

    mapping = {
        "network": network,
        "truth": {
            "mu": _compress(tuple(g.mu for g in scenario.truth)),
            "precision": _compress(tuple(g.lam for g in scenario.truth)),
        },
        "hypotheses": hypotheses,
        "evidence": evidence,
        "prior": {
            "mu": scenario.prior.mu,
            "kappa": scenario.prior.kappa,
            "alpha": scenario.prior.alpha,
            "beta": scenario.prior.beta,
        },
        "horizon": scenario.horizon,
        "seed": scenario.seed,
        "runs": scenario.runs,
        "upsilon": scenario.upsilon,
        "fixed_evidence": scenario.fixed_evidence,
    }
    if scenario.results_path is not None or scenario.summary_path is not None:
        output = {}
        if scenario.results_path is not None:
            output["results"] = scenario.results_path
        if scenario.summary_path is not None:
            output["summary"] = scenario.summary_path
        mapping["output"] = output
    return mapping
