"""Results files: a flat CSV of checkpointed log beliefs plus a JSON summary.

Floats are written with ``repr``, the shortest string that parses back to
the identical double, so files round-trip at full precision.  Infinite
centralized targets (dogmatic regimes) appear in the summary as the JSON
extension tokens ``Infinity``/``-Infinity``, which Python's json module
reads back natively.
"""

from __future__ import annotations

import json
from typing import Sequence

import numpy as np

from .network import IdentifiabilityReport
from .simulate import RunResult, Scenario

__all__ = ["RESULTS_HEADER", "write_results", "read_results", "write_summary"]

RESULTS_HEADER = "run,t,agent,hypothesis,log_belief"


def write_results(path, results: Sequence[RunResult]) -> None:
    """One record per (run, checkpoint, agent, hypothesis)."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(RESULTS_HEADER + "\n")
        for res in results:
            ckpts = res.checkpoints.tolist()
            beliefs = res.log_beliefs.tolist()
            m = res.log_beliefs.shape[1]
            h = res.log_beliefs.shape[2]
            for c, t in enumerate(ckpts):
                block = beliefs[c]
                for i in range(m):
                    row = block[i]
                    for k in range(h):
                        fh.write(f"{res.run_index},{t},{i},{k},{row[k]!r}\n")


def read_results(path) -> dict[str, np.ndarray]:
    """Read a results CSV back into parallel column arrays."""
    runs, ts, agents, hyps, values = [], [], [], [], []
    with open(path, "r", encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n")
        if header != RESULTS_HEADER:
            raise ValueError(f"unexpected results header: {header!r}")
        for line in fh:
            r, t, i, k, v = line.rstrip("\n").split(",")
            runs.append(int(r))
            ts.append(int(t))
            agents.append(int(i))
            hyps.append(int(k))
            values.append(float(v))
    return {
        "run": np.array(runs, dtype=np.int64),
        "t": np.array(ts, dtype=np.int64),
        "agent": np.array(agents, dtype=np.int64),
        "hypothesis": np.array(hyps, dtype=np.int64),
        "log_belief": np.array(values, dtype=np.float64),
    }


def _evidence_entry(ev) -> dict:
    if ev.dogmatic:
        return {"dogmatic": True, "mean": ev.mean, "var": ev.var}
    return {"count": ev.count, "mean": ev.mean, "var": ev.var}


def write_summary(
    path,
    scenario: Scenario,
    results: Sequence[RunResult],
    report: IdentifiabilityReport,
    config_mapping: dict | None = None,
) -> None:
    names = scenario.hypothesis_names
    payload = {
        "upsilon": scenario.upsilon,
        "horizon": scenario.horizon,
        "seed": scenario.seed,
        "hypotheses": list(names),
        "identifiability": {
            "passed": report.passed,
            "intersection": [names[k] for k in report.intersection],
            "per_agent": [[names[k] for k in row] for row in report.per_agent],
        },
        "runs": [
            {
                "run": res.run_index,
                "centralized_target": {
                    names[k]: float(res.centralized_target[k]) for k in range(len(names))
                },
                "verdicts": {
                    names[k]: [res.verdicts[i][k].value for i in range(len(res.verdicts))]
                    for k in range(len(names))
                },
                "evidence": {
                    names[k]: [_evidence_entry(res.evidence[i][k]) for i in range(len(res.evidence))]
                    for k in range(len(names))
                },
            }
            for res in results
        ],
    }
    if config_mapping is not None:
        payload["scenario"] = config_mapping
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
