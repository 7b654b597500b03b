"""
Seed generation for the optimiser.

A greedy timing-driven sizer followed by greedy power recovery plays the
role of the synthesis tool: run across a range of required times it yields
a set of realistic, diverse starting solutions.
"""
from dataclasses import dataclass

import numpy as np

from moeda.config import (
    DEFAULT_CLOCK_PERIOD, DEFAULT_SWEEP_STEPS, TIMING_LIMIT_STEPS, logger
)
from moeda.core.errors import InvalidConstraintError, InvalidConfigError, TimingNotMetError
from moeda.core.evaluator import DesignEvaluator, DesignModel, IncrementalTimer, TimingScenario
from moeda.core.library import variants_of
from moeda.core.moea import fast_non_dominated_sort
from moeda.core.netlist import Chromosome, check_chromosome, extract_chromosome

LOAD_LABELS = ("NONE", "D1", "D8")


def required_time(clock_period, output_delay):
    """T_r = T_c - T_od"""
    if not clock_period > 0:
        raise InvalidConstraintError(f"Clock period must be > 0, got {clock_period}")
    if not 0 <= output_delay < clock_period:
        raise InvalidConstraintError(
            f"Output delay must satisfy 0 <= T_od < T_c, got {output_delay} vs {clock_period}"
        )
    return clock_period - output_delay


def resolve_output_load(label, library):
    """
    Output load in farads: NONE, the input cap of the D1 or D8 inverter,
    or an explicit capacitance.
    """
    if isinstance(label, str):
        key = label.strip().upper()
        if key == "NONE":
            return 0.0
        if key in ("D1", "D8"):
            for v in variants_of(library, "NOT", 1):
                if v.strength_label == key:
                    return v.input_cap_per_pin
            raise InvalidConfigError(f"Library '{library.name}' has no NOT/1 {key}")
        raise InvalidConfigError(f"Unknown output load {label!r}")
    load = float(label)
    if load < 0:
        raise InvalidConfigError(f"Output load must be >= 0, got {load}")
    return load


@dataclass(frozen=True)
class SweepConfig:
    tr_max: float
    tr_min: float
    steps: int = DEFAULT_SWEEP_STEPS
    output_load_scenario: object = "NONE"

    def __post_init__(self):
        if not self.tr_max > self.tr_min > 0:
            raise InvalidConfigError(
                f"Sweep needs tr_max > tr_min > 0, got {self.tr_max} / {self.tr_min}"
            )
        if self.steps < 2:
            raise InvalidConfigError(f"Sweep needs at least 2 steps, got {self.steps}")

    def required_times(self):
        """Evenly spaced, from the relaxed end to the tight end"""
        return [float(t) for t in np.linspace(self.tr_max, self.tr_min, self.steps)]


@dataclass(frozen=True)
class SeedSolution:
    required_time: float
    chromosome: Chromosome
    evaluation: object
    timing_met: bool
    seed_id: int = 0
    sized_chromosome: Chromosome | None = None

    @property
    def objectives(self):
        return self.evaluation.objectives


# ============================================================================
# GREEDY SIZING
# ============================================================================

def _area_step(design, gi, k_from, k_to):
    variants = design.cells[gi].variants
    return variants[k_to].area - variants[k_from].area


def _best_single(design, timer, candidates):
    worst = timer.worst_arrival
    best, best_ratio = None, None
    for gi in candidates:
        k = timer.assignment[gi]
        gain = worst - timer.trial(gi, k + 1)
        if gain <= 0:
            continue
        d_area = _area_step(design, gi, k, k + 1)
        ratio = gain / d_area if d_area > 0 else np.inf
        if best_ratio is None or ratio > best_ratio:
            best, best_ratio = (gi,), ratio
    return best


def _best_pair(design, timer, candidates):
    # Tied paths (reconvergent fanin, several latest outputs) only move together
    worst = timer.worst_arrival
    best, best_ratio = None, None
    for i, a in enumerate(candidates):
        ka = timer.assignment[a]
        for b in candidates[i + 1:]:
            kb = timer.assignment[b]
            gain = worst - timer.trial_pair(a, ka + 1, b, kb + 1)
            if gain <= 0:
                continue
            d_area = _area_step(design, a, ka, ka + 1) + _area_step(design, b, kb, kb + 1)
            ratio = gain / d_area if d_area > 0 else np.inf
            if best_ratio is None or ratio > best_ratio:
                best, best_ratio = (a, b), ratio
    return best


def greedy_timing_sizer(design, required_time, scenario, model=None):
    """
    Upsize gates on the critical paths until timing is met.

    Every gate on a worst path is a candidate, over all outputs that share
    the worst arrival. Each move takes the single up-step with the best WNS
    gain per unit of added area; when no single up-step improves WNS, the
    best pair of up-steps is taken instead. Ties go to the lowest gate
    index. Every accepted move strictly improves WNS.

    Args:
        design: MappedDesign, normally at its all-minimum assignment
        required_time: T_r in seconds
        scenario: TimingScenario giving the clock and output load

    Returns:
        SeedSolution; timing_met is False when neither a single nor a
        paired up-step improves WNS any more.
    """
    scenario = scenario.with_required_time(required_time)
    model = model or DesignModel(design)
    timer = IncrementalTimer(design, scenario, model=model)
    counts = design.variant_counts
    moves = 0

    while required_time - timer.worst_arrival < 0:
        candidates = [gi for gi in timer.critical_gates()
                      if design.mutable[gi] and timer.assignment[gi] + 1 < counts[gi]]
        move = (_best_single(design, timer, candidates)
                or _best_pair(design, timer, candidates))
        if move is None:
            break
        for gi in move:
            timer.commit(gi, timer.assignment[gi] + 1)
        moves += 1

    chromosome = Chromosome(tuple(timer.assignment))
    evaluation = DesignEvaluator(design, scenario, model=model)(chromosome)
    logger.debug(f"Sizer at T_r={required_time * 1e9:.3f}ns: {moves} moves, "
                 f"WNS={evaluation.wns * 1e9:.4f}ns")
    return SeedSolution(required_time=required_time, chromosome=chromosome,
                        evaluation=evaluation, timing_met=evaluation.timing_met,
                        sized_chromosome=chromosome)


def power_recovery(design, chromosome, required_time, scenario, model=None):
    """
    Repeatedly take the down-step with the largest power saving that keeps
    WNS >= 0, until no such step is left.
    """
    scenario = scenario.with_required_time(required_time)
    genes = check_chromosome(design, chromosome)
    model = model or DesignModel(design)
    timer = IncrementalTimer(design, scenario, assignment=genes, model=model)
    if required_time - timer.worst_arrival < 0:
        raise TimingNotMetError(
            f"Power recovery needs a timing-clean input, WNS = "
            f"{(required_time - timer.worst_arrival) * 1e9:.4f}ns"
        )
    frequency = scenario.frequency
    voltage = design.library.voltage
    moves = 0

    while True:
        candidates = []
        for gi, k in enumerate(timer.assignment):
            if design.mutable[gi] and k > 0:
                delta = timer.power_delta(gi, k - 1, frequency, voltage)
                if delta < 0:
                    candidates.append((delta, gi))
        candidates.sort()
        for _, gi in candidates:
            k = timer.assignment[gi]
            if required_time - timer.trial(gi, k - 1) >= 0:
                timer.commit(gi, k - 1)
                moves += 1
                break
        else:
            break

    logger.debug(f"Power recovery at T_r={required_time * 1e9:.3f}ns: {moves} down-steps")
    return Chromosome(tuple(timer.assignment))


def size_for(design, required_time, scenario, seed_id=0, model=None):
    """Sizer, then recovery when timing is met; one SeedSolution"""
    model = model or DesignModel(design)
    sized = greedy_timing_sizer(design, required_time, scenario, model=model)
    if not sized.timing_met:
        return SeedSolution(required_time, sized.chromosome, sized.evaluation,
                            False, seed_id, sized.chromosome)
    recovered = power_recovery(design, sized.chromosome, required_time, scenario,
                               model=model)
    evaluation = DesignEvaluator(design, scenario.with_required_time(required_time),
                                 model=model)(recovered)
    return SeedSolution(required_time, recovered, evaluation, evaluation.timing_met,
                        seed_id, sized.chromosome)


# ============================================================================
# SWEEPS
# ============================================================================

def constraint_sweep(design, sweep, clock_period=DEFAULT_CLOCK_PERIOD):
    """
    One seed per required time, relaxed to tight; failures are kept and flagged.

    Args:
        design: MappedDesign at its all-minimum assignment
        sweep: SweepConfig with the T_r range, step count and output load
        clock_period: T_c in seconds, sets the switching frequency

    Returns:
        List of SeedSolution with seed_id in sweep order
    """
    load = resolve_output_load(sweep.output_load_scenario, design.library)
    model = DesignModel(design)
    seeds = []
    for i, tr in enumerate(sweep.required_times()):
        scenario = TimingScenario(clock_period, tr, load)
        seed = size_for(design, tr, scenario, seed_id=i, model=model)
        if not seed.timing_met:
            logger.warning(f"Seed {i}: timing not met at T_r={tr * 1e9:.3f}ns "
                           f"(WNS={seed.evaluation.wns * 1e9:.4f}ns)")
        seeds.append(seed)
    met = sum(s.timing_met for s in seeds)
    logger.info(f"Constraint sweep {sweep.tr_max * 1e9:.3f}->{sweep.tr_min * 1e9:.3f}ns: "
                f"{len(seeds)} seeds, {met} meet timing")
    return seeds


def syn_frontier(seeds):
    """Rank-1 seeds, one per distinct objective triple, by ascending D_wc"""
    if not seeds:
        return []
    seen = {}
    for s in seeds:
        seen.setdefault(tuple(s.objectives), s)
    unique = list(seen.values())
    first = [unique[i] for i in fast_non_dominated_sort([s.objectives for s in unique])[0]]
    return sorted(first, key=lambda s: s.objectives.d_wc)


def find_timing_limit(design, scenario, step=None):
    """
    Tightest met seed: start at the all-minimum delay and tighten the
    required time by `step` until the sizer fails.

    Args:
        design: MappedDesign
        scenario: TimingScenario; its required time is replaced per trial
        step: tightening increment in seconds; by default the relaxed
            delay divided by TIMING_LIMIT_STEPS

    Returns:
        SeedSolution of the tightest required time that was met
    """
    if step is not None and not step > 0:
        raise InvalidConfigError(f"Tightening step must be > 0, got {step}")
    model = DesignModel(design)
    relaxed = DesignEvaluator(design, scenario, model=model)(extract_chromosome(design))
    tr = relaxed.d_wc
    if not tr > 0:
        raise InvalidConstraintError(f"{design.netlist.name} has no timed path")
    if step is None:
        step = tr / TIMING_LIMIT_STEPS
    best = size_for(design, tr, scenario, model=model)
    while tr - step > 0:
        trial = size_for(design, tr - step, scenario, model=model)
        if not trial.timing_met:
            break
        tr -= step
        best = trial
    logger.info(f"Timing limit for {design.netlist.name}: T_r={best.required_time * 1e9:.3f}ns "
                f"(relaxed {relaxed.d_wc * 1e9:.3f}ns, step {step * 1e12:.2f}ps)")
    return best
