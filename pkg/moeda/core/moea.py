"""
Mutation-only NSGA-II over drive-strength chromosomes.

P0 is built from seed chromosomes, Q(t) = Mutation(P(t)), and P(t+1) keeps
the best N of P(t) + Q(t) by front rank, then by crowding distance.
"""
import math
from dataclasses import dataclass

import numpy as np

from moeda.config import (
    DEFAULT_POPULATION, DEFAULT_GENERATIONS, DEFAULT_MUTATION_RATE,
    DEFAULT_RNG_SEED, logger
)
from moeda.core.errors import InvalidConfigError, InvalidReferenceError
from moeda.core.netlist import Chromosome, check_chromosome
from moeda.core.parallel import PopulationEvaluator
from moeda.evaluation.metrics import hypervolume, reference_point


# ============================================================================
# TYPES
# ============================================================================

@dataclass
class Individual:
    chromosome: Chromosome
    evaluation: object = None
    rank: int | None = None
    crowding: float | None = None
    provenance: str = ""
    seed_id: int | None = None

    @property
    def objectives(self):
        return self.evaluation.objectives if self.evaluation is not None else None


@dataclass(frozen=True)
class MoeaConfig:
    population_size: int = DEFAULT_POPULATION
    generations: int = DEFAULT_GENERATIONS
    mutation_rate: float = DEFAULT_MUTATION_RATE
    rng_seed: int = DEFAULT_RNG_SEED
    normalization: tuple | None = None

    def __post_init__(self):
        if self.population_size < 2 or self.population_size % 2:
            raise InvalidConfigError(
                f"Population size must be even and >= 2, got {self.population_size}"
            )
        if self.generations < 1:
            raise InvalidConfigError(f"Generations must be >= 1, got {self.generations}")
        if not 0 < self.mutation_rate <= 1:
            raise InvalidConfigError(
                f"Mutation rate must be in (0, 1], got {self.mutation_rate}"
            )
        if not 0 <= self.rng_seed < 2 ** 64:
            raise InvalidConfigError("RNG seed must be a 64-bit unsigned integer")
        if self.normalization is not None and (
                len(self.normalization) != 3 or min(self.normalization) <= 0):
            raise InvalidConfigError("Normalization needs three positive references")


@dataclass(frozen=True)
class GenerationStats:
    generation: int
    min_d_wc: float
    min_p_total: float
    min_a_gate: float
    front_size: int
    hypervolume: float


HISTORY_COLUMNS = ["generation", "min_d_wc", "min_p_total", "min_a_gate",
                   "front_size", "hypervolume"]


# ============================================================================
# DOMINANCE
# ============================================================================

def dominates(a, b):
    """a is no worse than b everywhere and strictly better somewhere"""
    better = False
    for x, y in zip(a, b):
        if x > y:
            return False
        if x < y:
            better = True
    return better


def _points(population):
    return np.asarray([tuple(getattr(p, "objectives", p)) for p in population],
                      dtype=float).reshape(-1, 3)


def dominance_matrix(points):
    """D[i, j] is True when point i dominates point j"""
    le = np.all(points[:, None, :] <= points[None, :, :], axis=2)
    lt = np.any(points[:, None, :] < points[None, :, :], axis=2)
    return le & lt


def fast_non_dominated_sort(population):
    """
    Fronts as lists of indices into `population` (Individuals or objective
    triples). Fronts partition the input; members keep input order.
    """
    points = _points(population)
    n = len(points)
    if n == 0:
        return []
    dom = dominance_matrix(points)
    counts = dom.sum(axis=0)
    fronts = []
    current = np.flatnonzero(counts == 0)
    while current.size:
        fronts.append(current.tolist())
        counts = counts - dom[current].sum(axis=0)
        counts[current] = -1
        current = np.flatnonzero(counts == 0)
    return fronts


def crowding_distance(front):
    """Crowding distance per member of one front, in front order"""
    points = _points(front)
    n = len(points)
    distance = np.zeros(n)
    if n <= 2:
        distance[:] = math.inf
        return distance
    for k in range(points.shape[1]):
        values = points[:, k]
        order = np.argsort(values, kind="stable")
        span = values[order[-1]] - values[order[0]]
        if span == 0:
            continue
        distance[order[0]] = math.inf
        distance[order[-1]] = math.inf
        interior = order[1:-1]
        distance[interior] += (values[order[2:]] - values[order[:-2]]) / span
    return distance


def _extreme_holders(points):
    """Members holding a per-objective minimum (first in input order)"""
    holders = set()
    for k in range(points.shape[1]):
        values = points[:, k]
        if values.max() > values.min():
            holders.add(int(np.argmin(values)))
    return holders


def assign_ranks(population):
    """Set rank and crowding on every member; returns the fronts"""
    fronts = fast_non_dominated_sort(population)
    for r, front in enumerate(fronts, start=1):
        members = [population[i] for i in front]
        for ind, d in zip(members, crowding_distance(members)):
            ind.rank = r
            ind.crowding = float(d)
    return fronts


def select_survivors(population, size):
    """Elitist truncation: whole fronts while they fit, then by crowding"""
    fronts = assign_ranks(population)
    survivors = []
    for front in fronts:
        if len(survivors) + len(front) <= size:
            survivors.extend(population[i] for i in front)
            continue
        members = [population[i] for i in front]
        holders = _extreme_holders(_points(members))
        order = sorted(range(len(members)),
                       key=lambda j: (-members[j].crowding, j not in holders, j))
        survivors.extend(members[j] for j in order[:size - len(survivors)])
        break
    return survivors


# ============================================================================
# VARIATION
# ============================================================================

def rng_stream(root_seed, generation, index):
    """Independent stream for one (generation, individual) slot"""
    return np.random.default_rng(
        np.random.SeedSequence(root_seed, spawn_key=(generation, index))
    )


def mutate(chromosome, design, rate, rng):
    """
    Each mutable gene, with probability `rate`, moves to a different
    variant of the same cell chosen uniformly.
    """
    genes = np.asarray(tuple(chromosome), dtype=np.int64)
    counts = np.asarray(design.variant_counts, dtype=np.int64)
    free = np.asarray(design.mutable, dtype=bool) & (counts > 1)
    hit = (rng.random(len(genes)) < rate) & free
    if hit.any():
        old = genes[hit]
        draw = rng.integers(0, counts[hit] - 1)
        genes[hit] = draw + (draw >= old)
    return Chromosome(tuple(int(g) for g in genes))


def make_initial_population(seeds, size, design=None):
    """`size` individuals cycling through the seeds in order"""
    if not seeds:
        raise InvalidConfigError("At least one seed chromosome is required")
    chromosomes = []
    for s in seeds:
        genes = check_chromosome(design, s) if design is not None else tuple(s)
        chromosomes.append(Chromosome(genes))
    return [Individual(chromosome=chromosomes[i % len(seeds)],
                       provenance=f"seed:{i % len(seeds)}",
                       seed_id=i % len(seeds))
            for i in range(size)]


def make_offspring(parents, design, config, generation):
    offspring = []
    for i, parent in enumerate(parents):
        rng = rng_stream(config.rng_seed, generation, i)
        child = mutate(parent.chromosome, design, config.mutation_rate, rng)
        offspring.append(Individual(chromosome=child,
                                    provenance=f"g{generation}:p{i}",
                                    seed_id=parent.seed_id))
    return offspring


# ============================================================================
# EVOLUTION
# ============================================================================

def _evaluate(population, evaluator, generation):
    todo = [ind for ind in population if ind.evaluation is None]
    if todo:
        results = evaluator.evaluate([ind.chromosome for ind in todo], generation)
        for ind, ev in zip(todo, results):
            ind.evaluation = ev


def generation_stats(population, generation, reference):
    points = _points(population)
    fronts = fast_non_dominated_sort(population)
    first = points[fronts[0]]
    inside = first[np.all(first < np.asarray(reference), axis=1)]
    hv = hypervolume(inside, reference) if len(inside) else 0.0
    mins = points.min(axis=0)
    return GenerationStats(generation, float(mins[0]), float(mins[1]), float(mins[2]),
                           len(fronts[0]), hv)


def format_progress(stats, generations):
    return (f"gen {stats.generation}/{generations} | "
            f"min D={stats.min_d_wc * 1e9:.4f}ns "
            f"P={stats.min_p_total * 1e6:.4f}uW "
            f"A={stats.min_a_gate:.2f}um2 | "
            f"front={stats.front_size} | HV={stats.hypervolume:.4g}")


def evolve(design, scenario, config, seeds, evaluator=None, jobs=1, callback=None):
    """
    Mutation-only elitist evolution from seeded chromosomes.

    Args:
        design: MappedDesign whose mutable genes are remapped
        scenario: TimingScenario every individual is evaluated under
        config: MoeaConfig (population size, generations, rate, RNG seed)
        seeds: Chromosomes copied round-robin into the initial population
        evaluator: shared PopulationEvaluator; one is created when omitted
        jobs: worker processes for a created evaluator
        callback: called with the GenerationStats after each generation

    Returns:
        final: population with rank and crowding set
        history: list of GenerationStats, one per generation
    """
    owns_evaluator = evaluator is None
    if owns_evaluator:
        evaluator = PopulationEvaluator(design, scenario, jobs=jobs)

    try:
        population = make_initial_population(seeds, config.population_size, design)
        _evaluate(population, evaluator, 0)
        offspring = make_offspring(population, design, config, 0)
        _evaluate(offspring, evaluator, 0)
        reference = reference_point([ind.objectives for ind in population + offspring])
        logger.info(f"Evolving {config.population_size} x {config.generations} "
                    f"(rho={config.mutation_rate}, seeds={len(seeds)})")

        history = []
        for t in range(1, config.generations + 1):
            population = select_survivors(population + offspring,
                                          config.population_size)
            stats = generation_stats(population, t, reference)
            history.append(stats)
            logger.info(format_progress(stats, config.generations))
            if callback is not None:
                callback(stats)
            if t < config.generations:
                offspring = make_offspring(population, design, config, t)
                _evaluate(offspring, evaluator, t)

        assign_ranks(population)
        return population, history
    finally:
        if owns_evaluator:
            evaluator.close()


def pareto_front(population):
    """Members of rank 1, in population order"""
    return [population[i] for i in fast_non_dominated_sort(population)[0]]


def trade_off_solution(front, normalization):
    """Member closest to the origin after dividing each objective by its reference"""
    if not front:
        raise InvalidConfigError("Cannot pick a trade-off from an empty front")
    ref = np.asarray(tuple(normalization), dtype=float)
    if ref.shape != (3,) or np.any(ref <= 0):
        raise InvalidReferenceError(f"Normalization references must be > 0, got {tuple(ref)}")
    distances = np.sqrt(((_points(front) / ref) ** 2).sum(axis=1))
    return front[int(np.argmin(distances))]
