"""Weighted digraphs of agents and synchronous log-domain belief updates.

The combination step is a geometric average: each agent's new belief in a
hypothesis is the weighted product of its neighbours' current beliefs times
its own fresh likelihood ratio, which in the log domain is a matrix-vector
product plus an additive term.  The update is well behaved when the weight
matrix satisfies the model's standing assumptions:

* 1a: every row and column sums to one (doubly stochastic);
* 1b: every self-weight is strictly positive;
* 1c: the directed graph of nonzero weights is strongly connected;
* 2: pooling everyone's training evidence leaves exactly one hypothesis
  that no agent can distinguish from its true signal source.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .core import EvidenceSummary, GaussianParams, ObservationStream

__all__ = [
    "STOCHASTIC_TOL",
    "NetworkValidationError",
    "NotDoublyStochastic",
    "ZeroDiagonal",
    "Disconnected",
    "Network",
    "BeliefMatrix",
    "AgentModel",
    "IdentifiabilityReport",
    "validate_network",
    "describe_assumptions",
    "directed_cycle",
    "belief_step",
    "distinguishable_set",
    "check_global_identifiability",
]

# Row/column sums may be off by accumulated float rounding, nothing more.
STOCHASTIC_TOL = 1e-12


class NetworkValidationError(ValueError):
    """A weight matrix violates one of the standing assumptions."""

    assumption = "1"


class NotDoublyStochastic(NetworkValidationError):
    assumption = "1a"


class ZeroDiagonal(NetworkValidationError):
    assumption = "1b"


class Disconnected(NetworkValidationError):
    assumption = "1c"


@dataclass(frozen=True, eq=False)
class Network:
    """A validated weight matrix.  ``weights[i, j]`` is the weight agent i
    places on agent j's belief, so row i holds agent i's incoming mixture."""

    weights: np.ndarray

    @property
    def m(self) -> int:
        return self.weights.shape[0]


def _check_square_nonnegative(w: np.ndarray) -> None:
    if w.ndim != 2 or w.shape[0] != w.shape[1]:
        raise NetworkValidationError(f"weight matrix must be square, got shape {w.shape}")
    if w.shape[0] < 1:
        raise NetworkValidationError("weight matrix must have at least one agent")
    if not np.all(np.isfinite(w)):
        raise NetworkValidationError("weight matrix entries must be finite")
    if np.any(w < 0.0):
        i, j = np.argwhere(w < 0.0)[0]
        raise NetworkValidationError(f"negative weight at ({i}, {j})")


def _check_doubly_stochastic(w: np.ndarray) -> None:
    rows = w.sum(axis=1)
    cols = w.sum(axis=0)
    bad_row = np.argmax(np.abs(rows - 1.0))
    if abs(rows[bad_row] - 1.0) > STOCHASTIC_TOL:
        raise NotDoublyStochastic(
            f"assumption 1a violated: row {bad_row} sums to {rows[bad_row]!r}"
        )
    bad_col = np.argmax(np.abs(cols - 1.0))
    if abs(cols[bad_col] - 1.0) > STOCHASTIC_TOL:
        raise NotDoublyStochastic(
            f"assumption 1a violated: column {bad_col} sums to {cols[bad_col]!r}"
        )


def _check_positive_diagonal(w: np.ndarray) -> None:
    diag = np.diag(w)
    if np.any(diag <= 0.0):
        i = int(np.argmax(diag <= 0.0))
        raise ZeroDiagonal(
            f"assumption 1b violated: agent {i} has self-weight {diag[i]!r}"
        )


def _reachable(adj: np.ndarray, start: int) -> np.ndarray:
    seen = np.zeros(adj.shape[0], dtype=bool)
    seen[start] = True
    frontier = [start]
    while frontier:
        nxt = []
        for i in frontier:
            for j in np.nonzero(adj[i])[0]:
                if not seen[j]:
                    seen[j] = True
                    nxt.append(int(j))
        frontier = nxt
    return seen


def _check_strongly_connected(w: np.ndarray) -> None:
    adj = w > 0.0
    if not _reachable(adj, 0).all() or not _reachable(adj.T, 0).all():
        raise Disconnected(
            "assumption 1c violated: the weighted digraph is not strongly connected"
        )


def validate_network(weights) -> Network:
    """Validate a weight matrix against assumptions 1a, 1b and 1c.

    Returns a :class:`Network` wrapping a read-only float copy of the
    matrix, or raises the exception naming the first violated assumption.
    """
    w = np.array(weights, dtype=np.float64, copy=True)
    _check_square_nonnegative(w)
    _check_doubly_stochastic(w)
    _check_positive_diagonal(w)
    _check_strongly_connected(w)
    w.setflags(write=False)
    return Network(weights=w)


def describe_assumptions(weights) -> list[tuple[str, str, bool, str]]:
    """Run each structural check independently and report the outcomes.

    Returns a list of (code, description, passed, detail) tuples, one per
    assumption 1a/1b/1c, for diagnostic output.  Unlike
    :func:`validate_network` this never raises on a failed assumption.
    """
    w = np.array(weights, dtype=np.float64, copy=True)
    _check_square_nonnegative(w)
    results = []
    for code, desc, check in (
        ("1a", "doubly stochastic weights", _check_doubly_stochastic),
        ("1b", "strictly positive self-weights", _check_positive_diagonal),
        ("1c", "strongly connected digraph", _check_strongly_connected),
    ):
        try:
            check(w)
        except NetworkValidationError as err:
            results.append((code, desc, False, str(err)))
        else:
            results.append((code, desc, True, "ok"))
    return results


def directed_cycle(m: int, self_weight: float = 0.5) -> Network:
    """The m-agent directed cycle where each agent listens to one neighbour.

    Agent i keeps ``self_weight`` on itself and ``1 - self_weight`` on
    agent i-1 (mod m).  Doubly stochastic by construction for any
    ``self_weight`` in (0, 1); needs at least two agents.
    """
    if m < 2:
        raise ValueError(f"a directed cycle needs m >= 2 agents, got {m}")
    if not 0.0 < self_weight < 1.0:
        raise ValueError(f"self_weight must lie in (0, 1), got {self_weight!r}")
    w = np.zeros((m, m))
    for i in range(m):
        w[i, i] = self_weight
        w[i, (i - 1) % m] = 1.0 - self_weight
    return validate_network(w)


@dataclass(frozen=True, eq=False)
class BeliefMatrix:
    """Log beliefs of every agent in every hypothesis at one instant.

    ``log_beliefs`` has shape (agents, hypotheses); ``t`` counts the
    synchronous update rounds applied so far.
    """

    log_beliefs: np.ndarray
    t: int = 0

    @classmethod
    def initial(cls, m: int, h: int) -> "BeliefMatrix":
        """Uniform starting point: every log belief is zero."""
        return cls(log_beliefs=np.zeros((m, h)), t=0)


def belief_step(net: Network, beliefs: BeliefMatrix, log_ell) -> BeliefMatrix:
    """One synchronous round: geometric pooling plus fresh likelihood ratios.

    Computes ``W @ log_beliefs + log_ell`` and advances the round counter.
    ``log_ell`` must be finite with one entry per (agent, hypothesis).
    """
    le = np.asarray(log_ell, dtype=np.float64)
    if le.shape != beliefs.log_beliefs.shape:
        raise ValueError(
            f"log_ell shape {le.shape} does not match beliefs {beliefs.log_beliefs.shape}"
        )
    if net.m != beliefs.log_beliefs.shape[0]:
        raise ValueError(
            f"network has {net.m} agents but beliefs have {beliefs.log_beliefs.shape[0]}"
        )
    if not np.all(np.isfinite(le)):
        raise ValueError("log_ell entries must be finite")
    return BeliefMatrix(
        log_beliefs=net.weights @ beliefs.log_beliefs + le,
        t=beliefs.t + 1,
    )


@dataclass(frozen=True)
class AgentModel:
    """One agent's view of the world: its true signal source, the evidence
    it holds for each hypothesis, and the measurements seen so far.

    Measurements do not depend on which hypothesis is being scored, so a
    single stream is shared across hypotheses.
    """

    truth: GaussianParams
    evidence: tuple[EvidenceSummary, ...]
    stream: ObservationStream = field(default_factory=ObservationStream)


def distinguishable_set(agent: AgentModel, hyp_truths: Sequence[GaussianParams]) -> set[int]:
    """Indices of hypotheses this agent cannot tell apart from its truth.

    Comparison is exact equality of configured parameters: a hypothesis is
    indistinguishable precisely when its stated mean and precision coincide
    with the agent's true source.
    """
    return {
        k
        for k, hyp in enumerate(hyp_truths)
        if hyp.mu == agent.truth.mu and hyp.lam == agent.truth.lam
    }


@dataclass(frozen=True)
class IdentifiabilityReport:
    """Outcome of the collective distinguishability check (assumption 2)."""

    passed: bool
    intersection: tuple[int, ...]
    per_agent: tuple[tuple[int, ...], ...]

    def lines(self, names: Sequence[str] | None = None) -> list[str]:
        def fmt(ks: Iterable[int]) -> str:
            items = [names[k] if names else str(k) for k in sorted(ks)]
            return "{" + ", ".join(items) + "}"

        out = [f"assumption 2 (collective distinguishability): {'pass' if self.passed else 'FAIL'}"]
        out.append(f"  intersection over agents: {fmt(self.intersection)}")
        for i, ks in enumerate(self.per_agent):
            out.append(f"  agent {i}: indistinguishable from its truth: {fmt(ks)}")
        return out


def check_global_identifiability(
    agents: Sequence[AgentModel],
    hyp_truths,
) -> IdentifiabilityReport:
    """Check that pooling all agents isolates a single surviving hypothesis.

    Parameters
    ----------
    agents : sequence of AgentModel
    hyp_truths : sequence of GaussianParams, or one sequence per agent
        The configured hypothesis parameters.  A flat sequence is shared by
        every agent; a nested one gives each agent its own table.

    Returns
    -------
    IdentifiabilityReport
        ``passed`` is true iff the intersection of per-agent
        indistinguishable sets contains exactly one hypothesis.
    """
    if len(agents) == 0:
        raise ValueError("need at least one agent")
    first = hyp_truths[0]
    if isinstance(first, GaussianParams):
        tables = [list(hyp_truths)] * len(agents)
    else:
        tables = [list(row) for row in hyp_truths]
        if len(tables) != len(agents):
            raise ValueError(
                f"got {len(tables)} hypothesis tables for {len(agents)} agents"
            )
    per_agent = [distinguishable_set(a, tbl) for a, tbl in zip(agents, tables)]
    common = set(per_agent[0])
    for s in per_agent[1:]:
        common &= s
    return IdentifiabilityReport(
        passed=len(common) == 1,
        intersection=tuple(sorted(common)),
        per_agent=tuple(tuple(sorted(s)) for s in per_agent),
    )
