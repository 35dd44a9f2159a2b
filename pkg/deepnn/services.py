"""
Service layer for repeated network training.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from typing import List

from core.logging import log_training_run
from .models import DEFAULT_HIDDEN_LAYERS, MlpNetwork, TrainingTrace
from .network import init_network, train


@dataclass
class RunOutcome:
    """One trained restart."""
    seed: int
    network: MlpNetwork
    trace: TrainingTrace


class TrainingService:
    """Random-restart training and argmin model selection."""

    @staticmethod
    def train_once(samples, labels, params, seed, hidden_layers=DEFAULT_HIDDEN_LAYERS,
                   variant='deepnn'):
        """Initialise and train one network; the seed drives both steps."""
        network = init_network(samples.shape[1], seed, hidden_layers=hidden_layers)
        network, trace = train(network, samples, labels, replace(params, rng_seed=seed))
        log_training_run(variant, seed, trace)
        return RunOutcome(seed=seed, network=network, trace=trace)

    @staticmethod
    def train_restarts(samples, labels, params, seeds, hidden_layers=DEFAULT_HIDDEN_LAYERS,
                       workers=1, variant='deepnn') -> List[RunOutcome]:
        """
        Train one network per seed. Runs are independent, so they may run in
        a thread pool; results always come back in seed order.
        """
        def run(seed):
            return TrainingService.train_once(samples, labels, params, seed,
                                              hidden_layers=hidden_layers, variant=variant)

        if workers > 1 and len(seeds) > 1:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                return list(pool.map(run, seeds))
        return [run(seed) for seed in seeds]

    @staticmethod
    def select_argmin(outcomes):
        """Restart with the smallest training residual norm; ties go to the earlier seed."""
        return min(outcomes, key=lambda outcome: (outcome.trace.error_norm, outcome.seed))
