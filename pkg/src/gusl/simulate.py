"""Scenario description, seeded simulation runs and Monte Carlo ensembles.

A :class:`Scenario` is a plain-data description of one experiment: the
network, the hypothesis table, each agent's true signal source, how much
training evidence backs each hypothesis, the shared prior, and the run
parameters (horizon, seed, number of runs, decision threshold).

Randomness is split into named substreams so results are reproducible and
insensitive to execution order: substream (purpose, run, agent) is a PCG64
generator seeded through ``SeedSequence(seed, spawn_key=(purpose, run,
agent))``.  Purpose 0 draws evidence, purpose 1 draws measurements.
Gaussian variates come from the inverse normal CDF applied to uniforms of
the form (k + 1/2) / 2^53, which keeps every draw strictly inside (0, 1)
and makes the variate stream a pure function of the PCG64 bit stream.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field, replace
from enum import Enum
from typing import Sequence, Union

import numpy as np
from scipy.special import ndtri

from .backends import load_kernels
from .core import (
    EvidenceSummary,
    GaussGammaParams,
    GaussianParams,
    NONINFORMATIVE_PRIOR,
    log_asymptotic_ulr,
    posterior_params,
)
from .network import (
    AgentModel,
    IdentifiabilityReport,
    Network,
    check_global_identifiability,
    directed_cycle,
    validate_network,
)

__all__ = [
    "EVIDENCE_STREAM",
    "MEASUREMENT_STREAM",
    "CycleNetworkSpec",
    "ExplicitNetworkSpec",
    "FixedEvidence",
    "RangeEvidence",
    "DogmaticEvidence",
    "Scenario",
    "RunResult",
    "EnsembleDiagnostics",
    "Verdict",
    "substream",
    "normal_variates",
    "checkpoint_grid",
    "generate_evidence",
    "identifiability_report",
    "run_simulation",
    "ensemble",
    "verdict",
]

log = logging.getLogger(__name__)

EVIDENCE_STREAM = 0
MEASUREMENT_STREAM = 1

# Observations are generated and consumed in slabs of this many rounds so
# that horizons in the millions never materialise a (T, m) array at once.
CHUNK_STEPS = 65536


def substream(seed: int, purpose: int, run: int, agent: int) -> np.random.Generator:
    """The named PCG64 substream for one (purpose, run, agent) triple."""
    seq = np.random.SeedSequence(entropy=seed, spawn_key=(purpose, run, agent))
    return np.random.Generator(np.random.PCG64(seq))


def normal_variates(rng: np.random.Generator, mu: float, sigma: float, size: int) -> np.ndarray:
    """Gaussian draws via the inverse CDF on open-interval uniforms."""
    u = (rng.integers(0, 1 << 53, size=size).astype(np.float64) + 0.5) * 2.0**-53
    return mu + sigma * ndtri(u)


@dataclass(frozen=True)
class CycleNetworkSpec:
    """Directed cycle on ``agents`` nodes with a common self-weight."""

    agents: int
    self_weight: float = 0.5

    def build(self) -> Network:
        return directed_cycle(self.agents, self.self_weight)

    @property
    def m(self) -> int:
        return self.agents


@dataclass(frozen=True)
class ExplicitNetworkSpec:
    """A weight matrix given row by row."""

    weights: tuple[tuple[float, ...], ...]

    def build(self) -> Network:
        return validate_network(np.array(self.weights, dtype=np.float64))

    @property
    def m(self) -> int:
        return len(self.weights)


NetworkSpec = Union[CycleNetworkSpec, ExplicitNetworkSpec]


@dataclass(frozen=True)
class FixedEvidence:
    """Exactly ``counts[i]`` evidence samples for agent i."""

    counts: tuple[int, ...]

    def __post_init__(self) -> None:
        if any(c < 0 for c in self.counts):
            raise ValueError("evidence counts must be >= 0")


@dataclass(frozen=True)
class RangeEvidence:
    """Per-agent counts drawn uniformly from the integers [lo, hi]."""

    lo: int
    hi: int

    def __post_init__(self) -> None:
        if self.lo < 0 or self.hi < self.lo:
            raise ValueError(f"need 0 <= lo <= hi, got [{self.lo}, {self.hi}]")


@dataclass(frozen=True)
class DogmaticEvidence:
    """The infinite-evidence limit: hypothesis parameters taken as exact."""


EvidenceRegime = Union[FixedEvidence, RangeEvidence, DogmaticEvidence]


@dataclass(frozen=True)
class Scenario:
    """Plain-data description of one experiment.

    ``hypotheses[i][k]`` are the Gaussian parameters agent i assigns to
    hypothesis k, and ``truth[i]`` is agent i's actual signal source.
    ``evidence[k]`` says how much training evidence every agent holds for
    hypothesis k.  ``results_path``/``summary_path`` are carried along for
    the command line front end and ignored by the harness itself.
    """

    network: NetworkSpec
    hypothesis_names: tuple[str, ...]
    hypotheses: tuple[tuple[GaussianParams, ...], ...]
    truth: tuple[GaussianParams, ...]
    evidence: tuple[EvidenceRegime, ...]
    prior: GaussGammaParams = NONINFORMATIVE_PRIOR
    horizon: int = 10_000
    seed: int = 0
    runs: int = 1
    upsilon: float = 10.0
    fixed_evidence: bool = False
    results_path: str | None = None
    summary_path: str | None = None

    def __post_init__(self) -> None:
        m = self.network.m
        h = len(self.hypothesis_names)
        if h < 1:
            raise ValueError("need at least one hypothesis")
        if len(set(self.hypothesis_names)) != h:
            raise ValueError("hypothesis names must be unique")
        if len(self.hypotheses) != m or any(len(row) != h for row in self.hypotheses):
            raise ValueError(f"hypotheses must be an {m} x {h} table")
        if len(self.truth) != m:
            raise ValueError(f"need one truth per agent, got {len(self.truth)} for {m}")
        if len(self.evidence) != h:
            raise ValueError(f"need one evidence regime per hypothesis, got {len(self.evidence)}")
        for reg in self.evidence:
            if isinstance(reg, FixedEvidence) and len(reg.counts) != m:
                raise ValueError(f"fixed evidence needs {m} counts, got {len(reg.counts)}")
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.runs < 1:
            raise ValueError(f"runs must be >= 1, got {self.runs}")
        if not self.upsilon > 1.0:
            raise ValueError(f"upsilon must exceed 1, got {self.upsilon!r}")
        if self.seed < 0:
            raise ValueError(f"seed must be a nonnegative integer, got {self.seed}")

    @property
    def m(self) -> int:
        return self.network.m

    @property
    def n_hypotheses(self) -> int:
        return len(self.hypothesis_names)

    @classmethod
    def uniform(
        cls,
        network: NetworkSpec,
        hypotheses: Sequence[GaussianParams],
        truth: GaussianParams,
        evidence: Sequence[EvidenceRegime],
        names: Sequence[str] | None = None,
        **kwargs,
    ) -> "Scenario":
        """Scenario where every agent shares the same hypothesis table and truth."""
        m = network.m
        hyp_row = tuple(hypotheses)
        if names is None:
            names = tuple(f"theta{k + 1}" for k in range(len(hyp_row)))
        return cls(
            network=network,
            hypothesis_names=tuple(names),
            hypotheses=tuple(hyp_row for _ in range(m)),
            truth=tuple(truth for _ in range(m)),
            evidence=tuple(evidence),
            **kwargs,
        )


def checkpoint_grid(horizon: int, per_decade: int = 100) -> np.ndarray:
    """Strictly increasing integer times on a geometric grid up to ``horizon``.

    Rounds a log-spaced grid of about ``per_decade`` points per decade to
    integers; exact powers of ten and the horizon itself always appear.
    """
    if horizon < 1:
        raise ValueError(f"horizon must be >= 1, got {horizon}")
    if horizon == 1:
        return np.array([1], dtype=np.int64)
    decades = math.log10(horizon)
    n = max(1, math.ceil(decades * per_decade))
    pts = np.rint(np.logspace(0.0, decades, n + 1)).astype(np.int64)
    tens = 10 ** np.arange(0, math.floor(decades) + 1, dtype=np.int64)
    pts = np.unique(np.concatenate([pts, tens, [horizon]]))
    return pts[(pts >= 1) & (pts <= horizon)]


def generate_evidence(
    scenario: Scenario, run_index: int = 0
) -> tuple[tuple[EvidenceSummary, ...], ...]:
    """Realise the evidence summaries for one run, deterministically.

    Evidence for hypothesis k is drawn from that hypothesis's own
    distribution, one substream per (run, agent).  Within a substream the
    hypotheses are visited in table order; a range regime first draws the
    count, then the samples.  With ``scenario.fixed_evidence`` every run
    reuses the run-0 realisation.
    """
    evkey = 0 if scenario.fixed_evidence else run_index
    out = []
    for i in range(scenario.m):
        rng = substream(scenario.seed, EVIDENCE_STREAM, evkey, i)
        row = []
        for k, regime in enumerate(scenario.evidence):
            hyp = scenario.hypotheses[i][k]
            if isinstance(regime, DogmaticEvidence):
                row.append(EvidenceSummary.dogmatic_from(hyp))
                continue
            if isinstance(regime, FixedEvidence):
                r = regime.counts[i]
            else:
                r = int(rng.integers(regime.lo, regime.hi, endpoint=True))
            if r == 0:
                row.append(EvidenceSummary())
                continue
            x = normal_variates(rng, hyp.mu, 1.0 / math.sqrt(hyp.lam), r)
            row.append(EvidenceSummary(count=r, mean=float(np.mean(x)), var=float(np.var(x))))
        out.append(tuple(row))
    return tuple(out)


class Verdict(Enum):
    ACCEPT = "accept"
    REJECT = "reject"
    UNSURE = "unsure"


def verdict(log_belief: float, upsilon: float = 10.0) -> Verdict:
    """Threshold test on a final log belief.

    Accept when the belief is at least upsilon, reject when it is below
    1/upsilon, otherwise remain unsure.  ``upsilon`` must exceed 1 or the
    accept and reject regions would overlap.
    """
    if not upsilon > 1.0:
        raise ValueError(f"upsilon must exceed 1, got {upsilon!r}")
    bound = math.log(upsilon)
    if log_belief >= bound:
        return Verdict.ACCEPT
    if log_belief < -bound:
        return Verdict.REJECT
    return Verdict.UNSURE


def _agent_asymptote(ev: EvidenceSummary, truth: GaussianParams, prior: GaussGammaParams) -> float:
    if ev.dogmatic:
        exact = ev.mean == truth.mu and ev.var == 1.0 / truth.lam
        return math.inf if exact else -math.inf
    return log_asymptotic_ulr(ev, truth, prior)


def centralized_targets(
    evidence: Sequence[Sequence[EvidenceSummary]],
    truth: Sequence[GaussianParams],
    prior: GaussGammaParams = NONINFORMATIVE_PRIOR,
) -> np.ndarray:
    """Network-average asymptotic log ULR per hypothesis.

    This is the level every agent's log belief converges to (with finite
    evidence).  Dogmatic evidence pushes the average to +-infinity; when a
    hypothesis mixes exactly-matching and mismatching dogmatic agents the
    limit is indeterminate and reported as NaN.
    """
    m = len(evidence)
    h = len(evidence[0])
    targets = np.empty(h)
    for k in range(h):
        vals = [_agent_asymptote(evidence[i][k], truth[i], prior) for i in range(m)]
        has_pos = any(v == math.inf for v in vals)
        has_neg = any(v == -math.inf for v in vals)
        if has_pos and has_neg:
            targets[k] = math.nan
        elif has_pos:
            targets[k] = math.inf
        elif has_neg:
            targets[k] = -math.inf
        else:
            targets[k] = math.fsum(vals) / m
    return targets


@dataclass(frozen=True, eq=False)
class RunResult:
    """Everything recorded from one seeded run.

    ``log_beliefs`` and ``cumulative_log_ell`` have shape (checkpoints,
    agents, hypotheses); the latter is the running sum of one-step log
    likelihood ratios, kept so conservation of the network total can be
    audited at every checkpoint.
    """

    run_index: int
    checkpoints: np.ndarray
    log_beliefs: np.ndarray
    cumulative_log_ell: np.ndarray
    centralized_target: np.ndarray
    evidence: tuple[tuple[EvidenceSummary, ...], ...]
    verdicts: tuple[tuple[Verdict, ...], ...]


def _pack_evidence(scenario: Scenario, evidence) -> dict:
    m, h = scenario.m, scenario.n_hypotheses
    p = scenario.prior
    kinds = np.zeros((m, h), dtype=np.int8)
    post_mu = np.full((m, h), p.mu)
    post_kappa = np.full((m, h), p.kappa)
    post_alpha = np.full((m, h), p.alpha)
    post_beta = np.full((m, h), p.beta)
    dog_mu = np.zeros((m, h))
    dog_lam = np.ones((m, h))
    for i in range(m):
        for k in range(h):
            ev = evidence[i][k]
            if ev.dogmatic:
                kinds[i, k] = 2
                dog_mu[i, k] = ev.mean
                dog_lam[i, k] = 1.0 / ev.var
            elif ev.count > 0:
                kinds[i, k] = 1
                post = posterior_params(p, ev)
                post_mu[i, k] = post.mu
                post_kappa[i, k] = post.kappa
                post_alpha[i, k] = post.alpha
                post_beta[i, k] = post.beta
    return {
        "kinds": kinds,
        "post_mu": post_mu,
        "post_kappa": post_kappa,
        "post_alpha": post_alpha,
        "post_beta": post_beta,
        "dog_mu": dog_mu,
        "dog_lam": dog_lam,
    }


def run_simulation(scenario: Scenario, run_index: int = 0, *, backend: str | None = None) -> RunResult:
    """Play one run to the horizon and record the checkpointed trajectory.

    Deterministic: the same scenario and run index always give the same
    RunResult bit for bit (on a given backend).
    """
    kernels = load_kernels(backend)
    net = scenario.network.build()
    m, h = scenario.m, scenario.n_hypotheses
    evidence = generate_evidence(scenario, run_index)
    packed = _pack_evidence(scenario, evidence)
    ckpts = checkpoint_grid(scenario.horizon)

    log_mu = np.zeros((m, h))
    ell_acc = np.zeros((m, h))
    stream_mean = np.zeros(m)
    stream_m2 = np.zeros(m)
    out_log = np.empty((len(ckpts), m, h))
    out_acc = np.empty((len(ckpts), m, h))

    gens = [substream(scenario.seed, MEASUREMENT_STREAM, run_index, i) for i in range(m)]
    truth_mu = np.array([g.mu for g in scenario.truth])
    truth_sigma = np.array([1.0 / math.sqrt(g.lam) for g in scenario.truth])
    prior = scenario.prior

    t0 = 0
    ci = 0
    while t0 < scenario.horizon:
        steps = min(CHUNK_STEPS, scenario.horizon - t0)
        obs = np.empty((steps, m))
        for i in range(m):
            obs[:, i] = normal_variates(gens[i], truth_mu[i], truth_sigma[i], steps)
        in_chunk = ckpts[(ckpts > t0) & (ckpts <= t0 + steps)]
        wrote = kernels.advance_chunk(
            net.weights,
            log_mu,
            ell_acc,
            stream_mean,
            stream_m2,
            t0,
            obs,
            packed["kinds"],
            packed["post_mu"],
            packed["post_kappa"],
            packed["post_alpha"],
            packed["post_beta"],
            packed["dog_mu"],
            packed["dog_lam"],
            prior.mu,
            prior.kappa,
            prior.alpha,
            prior.beta,
            in_chunk,
            out_log[ci : ci + len(in_chunk)],
            out_acc[ci : ci + len(in_chunk)],
        )
        if wrote != len(in_chunk):
            raise RuntimeError(f"kernel wrote {wrote} of {len(in_chunk)} checkpoints")
        ci += wrote
        t0 += steps

    targets = centralized_targets(evidence, scenario.truth, prior)
    verdicts = tuple(
        tuple(verdict(float(log_mu[i, k]), scenario.upsilon) for k in range(h))
        for i in range(m)
    )
    return RunResult(
        run_index=run_index,
        checkpoints=ckpts,
        log_beliefs=out_log,
        cumulative_log_ell=out_acc,
        centralized_target=targets,
        evidence=evidence,
        verdicts=verdicts,
    )


def identifiability_report(scenario: Scenario) -> IdentifiabilityReport:
    """Collective distinguishability check for a scenario's configuration."""
    placeholder = tuple(EvidenceSummary() for _ in range(scenario.n_hypotheses))
    agents = [AgentModel(truth=g, evidence=placeholder) for g in scenario.truth]
    return check_global_identifiability(agents, [list(row) for row in scenario.hypotheses])


@dataclass(frozen=True, eq=False)
class EnsembleDiagnostics:
    """Aggregate view over the runs of one scenario.

    ``run_gaps[r, c, k]`` is run r's average over agents of the absolute
    difference between log beliefs and that run's centralized target for
    hypothesis k at checkpoint c; ``mean_abs_log_gap`` averages this over
    runs.  Dogmatic regimes have infinite targets and therefore infinite
    gaps.
    """

    checkpoints: np.ndarray
    mean_abs_log_gap: np.ndarray
    run_gaps: np.ndarray
    runs: tuple[RunResult, ...]
    identifiability: IdentifiabilityReport


def ensemble(scenario: Scenario, *, backend: str | None = None) -> EnsembleDiagnostics:
    """Run every seed of the scenario and aggregate convergence diagnostics."""
    report = identifiability_report(scenario)
    if not report.passed:
        log.warning(
            "collective distinguishability fails: intersection %s; "
            "beliefs need not single out one hypothesis",
            report.intersection,
        )
    results = [run_simulation(scenario, r, backend=backend) for r in range(scenario.runs)]
    gaps = np.stack(
        [
            np.mean(np.abs(res.log_beliefs - res.centralized_target[None, None, :]), axis=1)
            for res in results
        ]
    )
    return EnsembleDiagnostics(
        checkpoints=results[0].checkpoints,
        mean_abs_log_gap=gaps.mean(axis=0),
        run_gaps=gaps,
        runs=tuple(results),
        identifiability=report,
    )
