"""
Population evaluation with an optional process pool and a chromosome cache.

Results are returned in input order and do not depend on the number of
workers: every worker rebuilds the same DesignEvaluator from the same
immutable design.
"""
from concurrent.futures import ProcessPoolExecutor

from moeda.config import logger
from moeda.core.errors import EvaluationError, MoedaError
from moeda.core.evaluator import DesignEvaluator
from moeda.core.netlist import check_chromosome

# Per-process evaluator, set by the pool initializer
_WORKER = None


def _init_worker(design, scenario):
    global _WORKER
    _WORKER = DesignEvaluator(design, scenario)


def _evaluate_genes(genes):
    """Must stay top-level so the pool can pickle it"""
    return _WORKER.evaluate_assignment(genes)


class PopulationEvaluator:
    def __init__(self, design, scenario, jobs=1):
        self.design = design
        self.scenario = scenario
        self.jobs = max(1, int(jobs))
        self.local = DesignEvaluator(design, scenario)
        self.cache = {}
        self.hits = 0
        self._pool = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def close(self):
        if self._pool is not None:
            self._pool.shutdown()
            self._pool = None

    def _executor(self):
        if self._pool is None:
            logger.debug(f"Starting evaluation pool with {self.jobs} workers")
            self._pool = ProcessPoolExecutor(
                max_workers=self.jobs,
                initializer=_init_worker,
                initargs=(self.design, self.scenario),
            )
        return self._pool

    def evaluate(self, chromosomes, generation=None):
        """Evaluation for every chromosome, in input order"""
        keys = []
        for i, c in enumerate(chromosomes):
            try:
                keys.append(check_chromosome(self.design, c))
            except MoedaError as e:
                raise EvaluationError(str(e), generation=generation, individual=i) from e

        pending = list(dict.fromkeys(k for k in keys if k not in self.cache))
        self.hits += len(keys) - len(pending)

        if pending:
            results = []
            current = pending[0]
            try:
                if self.jobs == 1 or len(pending) < 2:
                    for current in pending:
                        results.append(self.local.evaluate_assignment(current))
                else:
                    chunk = max(1, len(pending) // (4 * self.jobs))
                    outcomes = self._executor().map(_evaluate_genes, pending, chunksize=chunk)
                    # map re-raises a worker error when its position is reached
                    for current in pending:
                        results.append(next(outcomes))
            except Exception as e:
                failed = keys.index(current)
                logger.error(f"Evaluation failed in generation {generation}, "
                             f"individual {failed}: {e}")
                raise EvaluationError(str(e), generation=generation, individual=failed) from e
            self.cache.update(zip(pending, results))

        return [self.cache[k] for k in keys]
