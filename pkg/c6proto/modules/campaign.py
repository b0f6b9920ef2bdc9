"""
Campaign Module
Seeded protocol trials run in batches over a thread pool.
"""
from __future__ import annotations

import logging
from collections import Counter
from concurrent.futures import ThreadPoolExecutor, as_completed
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

import numpy as np

import config
from ..errors import C6Error, ProtocolError
from .protocols import PROTOCOLS, ProtocolTranscript, prepare, run_protocol

logger = logging.getLogger(__name__)


def trial_seeds(seed: int, trials: int) -> List[int]:
    """Independent per-trial seeds spawned from one root seed."""
    children = np.random.SeedSequence(seed).spawn(trials)
    return [int(child.generate_state(1, dtype=np.uint64)[0]) for child in children]


@dataclass
class CampaignSummary:
    protocol: str
    seed: int
    trials: int
    min_fidelity: float
    mean_fidelity: float
    cbits: Dict[int, int]
    outcomes: Dict[str, int]
    failures: List[Dict] = field(default_factory=list)
    tol: float = config.EIGEN_TOL

    @property
    def passed(self) -> bool:
        return not self.failures and self.min_fidelity >= 1.0 - self.tol

    def to_dict(self) -> Dict:
        return {
            "protocol": self.protocol,
            "seed": self.seed,
            "trials": self.trials,
            "min_fidelity": self.min_fidelity,
            "mean_fidelity": self.mean_fidelity,
            "cbits": {str(k): v for k, v in sorted(self.cbits.items())},
            "outcomes": dict(sorted(self.outcomes.items())),
            "failures": self.failures,
            "passed": self.passed,
        }


class FuzzCampaign:
    """
    Run many seeded trials of one protocol concurrently.

    Each trial gets its own seed spawned from the campaign seed, so results
    do not depend on worker count or completion order.
    """

    def __init__(self, workers: int = config.MAX_WORKERS, batch_size: int = config.BATCH_SIZE,
                 tol: float = config.EIGEN_TOL):
        self.workers = max(1, min(int(workers), 32))
        self.batch_size = max(1, int(batch_size))
        self.tol = tol
        self._stats = {'trials': 0, 'batches': 0, 'failures': 0}

    def _trial(self, protocol: str, index: int, seed: int) -> Tuple[int, int, Optional[ProtocolTranscript], str]:
        try:
            return index, seed, run_protocol(protocol, seed), ""
        except C6Error as e:
            logger.warning("trial %d (seed %d) of %s failed: %s", index, seed, protocol, e)
            return index, seed, None, str(e)

    def run_batch(self, protocol: str, seeds: List[Tuple[int, int]]) -> List[Tuple[int, int, Optional[ProtocolTranscript], str]]:
        results = []
        with ThreadPoolExecutor(max_workers=self.workers) as executor:
            futures = {executor.submit(self._trial, protocol, i, s): i for i, s in seeds}
            for future in as_completed(futures):
                results.append(future.result())
        self._stats['batches'] += 1
        return results

    def run(self, protocol: str, trials: int = config.ACCEPTANCE_TRIALS,
            seed: int = config.DEFAULT_SEED) -> CampaignSummary:
        if protocol not in PROTOCOLS:
            raise ProtocolError(f"Unknown protocol: {protocol!r}")
        if trials < 1:
            raise ValueError(f"Invalid trial count: {trials}")
        # corrections are cached lazily; build them before threads share the caches
        prepare(protocol)

        indexed = list(enumerate(trial_seeds(seed, trials)))
        results = []
        for start in range(0, trials, self.batch_size):
            results.extend(self.run_batch(protocol, indexed[start:start + self.batch_size]))
        results.sort(key=lambda r: r[0])

        fidelities, cbits, outcomes, failures = [], Counter(), Counter(), []
        for index, trial_seed, transcript, error in results:
            if transcript is None:
                failures.append({"trial": index, "seed": trial_seed, "error": error})
                continue
            fidelities.append(transcript.fidelity)
            cbits[transcript.cbits] += 1
            outcomes["/".join(str(o) for o in transcript.outcomes)] += 1
            if transcript.fidelity < 1.0 - self.tol:
                failures.append({"trial": index, "seed": trial_seed,
                                 "error": f"fidelity {transcript.fidelity!r} below 1 - {self.tol}"})

        self._stats['trials'] += trials
        self._stats['failures'] += len(failures)
        summary = CampaignSummary(
            protocol=protocol,
            seed=seed,
            trials=trials,
            min_fidelity=float(min(fidelities)) if fidelities else 0.0,
            mean_fidelity=float(np.mean(fidelities)) if fidelities else 0.0,
            cbits=dict(cbits),
            outcomes=dict(outcomes),
            failures=failures,
            tol=self.tol,
        )
        logger.info("%s campaign: %d trials, min fidelity %.15f, %d failures",
                    protocol, trials, summary.min_fidelity, len(failures))
        return summary

    def get_statistics(self) -> Dict:
        return {
            'trials': self._stats['trials'],
            'batches': self._stats['batches'],
            'failures': self._stats['failures'],
            'workers': self.workers,
            'batch_size': self.batch_size,
        }

    def reset_statistics(self) -> None:
        self._stats = {'trials': 0, 'batches': 0, 'failures': 0}
