"""
End-to-end experiments: single-seed optimisation, multi-seed design-space
exploration and the three-cluster variant, plus their result archives.
"""
import json
from dataclasses import dataclass, field, fields, asdict, replace
from pathlib import Path

from moeda.config import (
    DEFAULT_CLOCK_PERIOD, DEFAULT_OUTPUT_DELAY, DEFAULT_POPULATION,
    DEFAULT_GENERATIONS, DEFAULT_MUTATION_RATE, DEFAULT_RNG_SEED,
    DEFAULT_SWEEP_STEPS, DEFAULT_SEED_COPIES, logger
)
from moeda.core.archive import (
    write_csv, read_csv, seeds_frame, seeds_from_frame, population_frame,
    population_from_frame, history_frame, history_from_frame, projection_frame
)
from moeda.core.errors import InvalidConfigError
from moeda.core.evaluator import DesignEvaluator, DesignModel, TimingScenario
from moeda.core.library import (
    ScalingProfile, generate_synthetic_library, read_library, reduced_library
)
from moeda.core.moea import MoeaConfig, evolve, trade_off_solution, pareto_front
from moeda.core.netlist import (
    read_bench, required_cells, map_to_library, gene_count, apply_chromosome,
    format_assignment, extract_chromosome
)
from moeda.core.seeding import (
    SweepConfig, constraint_sweep, syn_frontier, find_timing_limit, size_for,
    resolve_output_load
)
from moeda.evaluation.metrics import (
    hypervolume, reference_point, best_improvements, relative_change, improves_all
)

SINGLE_SEED = "single"
MULTI_SEED = "multi"
THREE_SEED = "three"
MODES = (SINGLE_SEED, MULTI_SEED, THREE_SEED)
CLUSTERS = ("a", "b", "c")


# ============================================================================
# EXPERIMENT DEFINITION
# ============================================================================

@dataclass
class ExperimentSpec:
    """One experiment. Times are in seconds, explicit loads in farads."""
    benchmark: str
    mode: str = SINGLE_SEED
    library: str | None = None
    reduced_library: bool = False
    parameterised: list | None = None
    clock_period: float = DEFAULT_CLOCK_PERIOD
    output_delay: float = DEFAULT_OUTPUT_DELAY
    output_load: object = "NONE"
    required_time: float | None = None
    timing_step: float | None = None
    tr_max: float | None = None
    tr_min: float | None = None
    steps: int = DEFAULT_SWEEP_STEPS
    seed_copies: int = DEFAULT_SEED_COPIES
    population_size: int = DEFAULT_POPULATION
    generations: int = DEFAULT_GENERATIONS
    mutation_rate: float = DEFAULT_MUTATION_RATE
    rng_seed: int = DEFAULT_RNG_SEED
    jobs: int = 1
    out_dir: str | None = None

    def __post_init__(self):
        self.validate()

    def validate(self):
        if self.mode not in MODES:
            raise InvalidConfigError(f"Unknown mode {self.mode!r}, expected one of {MODES}")
        if self.mode == MULTI_SEED:
            if self.tr_max is None or self.tr_min is None:
                raise InvalidConfigError("Multi-seed mode needs tr_max and tr_min")
            self.sweep_config()
            if self.seed_copies < 1:
                raise InvalidConfigError(f"seed_copies must be >= 1, got {self.seed_copies}")
        if self.timing_step is not None and not self.timing_step > 0:
            raise InvalidConfigError(f"timing_step must be > 0, got {self.timing_step}")
        if self.jobs < 1:
            raise InvalidConfigError(f"jobs must be >= 1, got {self.jobs}")
        self.moea_config()

    def moea_config(self, population_size=None):
        return MoeaConfig(population_size=population_size or self.population_size,
                          generations=self.generations,
                          mutation_rate=self.mutation_rate,
                          rng_seed=self.rng_seed)

    def sweep_config(self):
        return SweepConfig(self.tr_max, self.tr_min, self.steps, self.output_load)

    def to_dict(self):
        return asdict(self)

    @classmethod
    def from_dict(cls, values):
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(values) - known)
        if unknown:
            raise InvalidConfigError(f"Unknown experiment keys: {', '.join(unknown)}")
        if "benchmark" not in values:
            raise InvalidConfigError("Experiment needs a benchmark")
        return cls(**values)


@dataclass
class ResultArchive:
    config: dict
    seeds: list
    frontier: list
    history: list
    final: list
    tradeoff_id: int | None = None
    summary: dict = field(default_factory=dict)
    assignments: dict = field(default_factory=dict)

    @property
    def pareto_ids(self):
        return [i for i, ind in enumerate(self.final) if ind.rank == 1]

    @property
    def tradeoff(self):
        return self.final[self.tradeoff_id] if self.tradeoff_id is not None else None


# ============================================================================
# BUILDING BLOCKS
# ============================================================================

def build_design(spec):
    """Parse the bench, obtain the library and map every gate to its smallest variant"""
    netlist = read_bench(spec.benchmark)
    if spec.library:
        lib = read_library(spec.library)
    else:
        lib = generate_synthetic_library(ScalingProfile(),
                                         required_cells(netlist) | {("NOT", 1)})
    if spec.reduced_library:
        lib = reduced_library(lib)
    return map_to_library(netlist, lib, parameterised=spec.parameterised)


def build_scenario(spec, design):
    load = resolve_output_load(spec.output_load, design.library)
    return TimingScenario.from_constraints(spec.clock_period, spec.output_delay, load)


def _index_of(population, individual):
    return next(i for i, ind in enumerate(population) if ind is individual)


def _summarise(spec, design, seeds, frontier, final, reference_objectives, tradeoff_id):
    pareto = pareto_front(final)
    hv_ref = reference_point([s.objectives for s in seeds],
                             [ind.objectives for ind in final])
    hv_frontier = hypervolume([s.objectives for s in frontier], hv_ref)
    hv_final = hypervolume([ind.objectives for ind in pareto], hv_ref)

    seed_of = {}
    for s in seeds:
        seed_of.setdefault(s.chromosome, s.seed_id)
    survivors = sorted({seed_of[ind.chromosome] for ind in final
                        if ind.chromosome in seed_of})
    frontier_ids = {s.seed_id for s in frontier}

    best = best_improvements(final, reference_objectives)
    tradeoff = final[tradeoff_id]
    summary = {
        "benchmark": design.netlist.name,
        "library": design.library.name,
        "mode": spec.mode,
        "gates": len(design.netlist.gates),
        "genes": gene_count(design),
        "population_size": len(final),
        "generations": spec.generations,
        "reference_objectives": list(reference_objectives),
        "best": {name: (None if hit is None else {"id": hit[0], "improvement": hit[1]})
                 for name, hit in best.items()},
        "tradeoff": {
            "id": tradeoff_id,
            "change": relative_change(tradeoff.objectives, reference_objectives),
            "improves_all": improves_all(tradeoff.objectives, reference_objectives),
        },
        "hv_reference": list(hv_ref),
        "hv_frontier": hv_frontier,
        "hv_final": hv_final,
        "survivors": survivors,
        "survivor_fraction": len(survivors) / len(seeds),
        "survivors_on_frontier": sum(1 for s in survivors if s in frontier_ids),
    }
    logger.info(f"HV frontier={hv_frontier:.6g} final={hv_final:.6g}; "
                f"{len(survivors)}/{len(seeds)} seeds survive")
    return summary


def _optimise(spec, design, scenario, seeds, population_size, reference_objectives):
    """evolve() from the given seeds and package the result"""
    frontier = syn_frontier(seeds)
    config = spec.moea_config(population_size)
    final, history = evolve(design, scenario, config,
                            [s.chromosome for s in seeds], jobs=spec.jobs)
    tradeoff = trade_off_solution(pareto_front(final), reference_objectives)
    tradeoff_id = _index_of(final, tradeoff)
    summary = _summarise(spec, design, seeds, frontier, final, reference_objectives,
                         tradeoff_id)
    assignments = {
        i: format_assignment(apply_chromosome(design, final[i].chromosome))
        for i, ind in enumerate(final) if ind.rank == 1
    }
    return ResultArchive(config=spec.to_dict(), seeds=seeds, frontier=frontier,
                         history=history, final=final, tradeoff_id=tradeoff_id,
                         summary=summary, assignments=assignments)


# ============================================================================
# EXPERIMENTS
# ============================================================================

def run_single_seed(spec):
    """
    Optimise from the tightest met seed (or the seed sized for a given
    required time) with N copies of it in the initial population.

    Args:
        spec: ExperimentSpec in single-seed mode

    Returns:
        ResultArchive; reference objectives are the seed's
    """
    if spec.mode != SINGLE_SEED:
        raise InvalidConfigError(f"run_single_seed needs mode '{SINGLE_SEED}'")
    design = build_design(spec)
    scenario = build_scenario(spec, design)
    if spec.required_time is not None:
        seed = size_for(design, spec.required_time, scenario)
    else:
        seed = find_timing_limit(design, scenario, spec.timing_step)
    scenario = scenario.with_required_time(seed.required_time)
    logger.info(f"Seed at T_r={seed.required_time * 1e9:.3f}ns: "
                f"D={seed.objectives.d_wc * 1e9:.4f}ns timing_met={seed.timing_met}")
    return _optimise(spec, design, scenario, [seed], spec.population_size,
                     seed.objectives)


def _reassess(design, scenario, seeds):
    # Archived objectives may come from another load or clock
    model = DesignModel(design)
    evaluated = []
    for s in seeds:
        timing = scenario.with_required_time(s.required_time)
        evaluation = DesignEvaluator(design, timing, model=model)(s.chromosome)
        evaluated.append(replace(s, evaluation=evaluation, timing_met=evaluation.timing_met))
    return evaluated


def run_multi_seed(spec, seeds=None):
    """
    Sweep, Syn-Frontier, then evolve copies of every seed together.

    Args:
        spec: ExperimentSpec in multi-seed mode
        seeds: SeedSolutions from an earlier sweep (see read_seed_archive);
            they are re-evaluated under this spec and replace the sweep

    Returns:
        ResultArchive; reference objectives are the per-objective minima
        of the Syn-Frontier
    """
    if spec.mode != MULTI_SEED:
        raise InvalidConfigError(f"run_multi_seed needs mode '{MULTI_SEED}'")
    design = build_design(spec)
    scenario = build_scenario(spec, design)
    if seeds is None:
        seeds = constraint_sweep(design, spec.sweep_config(), spec.clock_period)
    elif not seeds:
        raise InvalidConfigError("Multi-seed run given an empty seed archive")
    else:
        seeds = _reassess(design, scenario, seeds)
        logger.info(f"Using {len(seeds)} archived seeds instead of a sweep")
    size = spec.seed_copies * len(seeds)
    size += size % 2
    frontier = syn_frontier(seeds)
    normalisation = tuple(min(getattr(s.objectives, k) for s in frontier)
                          for k in ("d_wc", "p_total", "a_gate"))
    scenario = scenario.with_required_time(spec.tr_min)
    return _optimise(spec, design, scenario, seeds, size, normalisation)


def run_three_seed(spec):
    """
    Three independent runs seeded at the tight limit (a), the relaxed
    all-minimum point (b) and midway between them (c).
    """
    if spec.mode != THREE_SEED:
        raise InvalidConfigError(f"run_three_seed needs mode '{THREE_SEED}'")
    design = build_design(spec)
    scenario = build_scenario(spec, design)
    tight = find_timing_limit(design, scenario, spec.timing_step)
    relaxed_tr = DesignEvaluator(design, scenario)(extract_chromosome(design)).d_wc
    relaxed = size_for(design, relaxed_tr, scenario, seed_id=1)
    middle = size_for(design, (tight.required_time + relaxed_tr) / 2, scenario, seed_id=2)

    archives = {}
    for cluster, seed in zip(CLUSTERS, (tight, relaxed, middle)):
        logger.info(f"Cluster {cluster}: T_r={seed.required_time * 1e9:.3f}ns")
        archives[cluster] = _optimise(spec, design,
                                      scenario.with_required_time(seed.required_time),
                                      [seed], spec.population_size, seed.objectives)
    return archives


def run_experiment(spec):
    runners = {SINGLE_SEED: run_single_seed, MULTI_SEED: run_multi_seed,
               THREE_SEED: run_three_seed}
    return runners[spec.mode](spec)


# ============================================================================
# EXPORT / RELOAD
# ============================================================================

def _dump_json(obj):
    return json.dumps(obj, indent=2) + "\n"


def _tradeoff_text(archive):
    ind = archive.tradeoff
    if ind is None:
        return "none\n"
    ev = ind.evaluation
    lines = [
        f"id {archive.tradeoff_id}",
        f"provenance {ind.provenance}",
        f"d_wc {ev.d_wc!r}",
        f"p_total {ev.p_total!r}",
        f"a_gate {ev.a_gate!r}",
    ]
    change = archive.summary.get("tradeoff", {}).get("change", {})
    for name in ("d_wc", "p_total", "a_gate"):
        if name in change:
            lines.append(f"change_{name} {change[name] * 100:+.3f}%")
    lines.append(f"chromosome {ind.chromosome.to_text()}")
    return "\n".join(lines) + "\n"


def _projections(archive):
    final = list(enumerate(archive.final))
    sources = [("seed", [(s.seed_id, s) for s in archive.seeds]),
               ("frontier", [(s.seed_id, s) for s in archive.frontier]),
               ("final", final),
               ("pareto", [(i, ind) for i, ind in final if ind.rank == 1])]
    return {"delay_power": projection_frame(sources, "p_total"),
            "delay_area": projection_frame(sources, "a_gate")}


def archive_tables(archive):
    final = population_frame(archive.final)
    tables = {
        "seeds": seeds_frame(archive.seeds),
        "frontier": seeds_frame(archive.frontier),
        "history": history_frame(archive.history),
        "final": final,
        "pareto": final.iloc[archive.pareto_ids],
    }
    tables.update(_projections(archive))
    return tables


def export_results(archive, out_dir, fmt="csv"):
    """
    Write the archive under out_dir.

    Args:
        archive: ResultArchive
        out_dir: target directory, created when missing
        fmt: "csv" for the table-per-file layout, "json" for archive.json

    Returns:
        List of written paths
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    tables = archive_tables(archive)
    written = []
    try:
        if fmt == "json":
            document = {
                "config": archive.config,
                "summary": archive.summary,
                "tables": {name: frame.to_dict("records") for name, frame in tables.items()},
            }
            path = out / "archive.json"
            path.write_text(json.dumps(document, indent=2, default=str) + "\n",
                            encoding="utf-8")
            written.append(path)
        elif fmt == "csv":
            (out / "config.json").write_text(_dump_json(archive.config), encoding="utf-8")
            written.append(out / "config.json")
            for name, frame in tables.items():
                written.append(write_csv(frame, out / f"{name}.csv"))
            (out / "tradeoff.txt").write_text(_tradeoff_text(archive), encoding="utf-8")
            (out / "summary.json").write_text(_dump_json(archive.summary), encoding="utf-8")
            written += [out / "tradeoff.txt", out / "summary.json"]
            assignment_dir = out / "assignment"
            assignment_dir.mkdir(exist_ok=True)
            for ident, text in sorted(archive.assignments.items()):
                path = assignment_dir / f"{ident}.txt"
                path.write_text(text, encoding="utf-8")
                written.append(path)
        else:
            raise InvalidConfigError(f"Unknown export format {fmt!r}")
    except OSError as e:
        logger.error(f"Export to {out} failed: {e}")
        raise
    logger.info(f"Exported {len(written)} files to {out}")
    return written


def export_experiment(result, out_dir, fmt="csv"):
    """export_results for one archive or a dict of cluster archives"""
    if isinstance(result, ResultArchive):
        return export_results(result, out_dir, fmt)
    written = []
    for cluster, archive in sorted(result.items()):
        written += export_results(archive, Path(out_dir) / cluster, fmt)
    return written


def load_archive(out_dir):
    """ResultArchive back from a CSV export"""
    out = Path(out_dir)
    if not (out / "final.csv").exists():
        raise InvalidConfigError(f"{out} does not hold an exported archive")
    summary = json.loads((out / "summary.json").read_text(encoding="utf-8"))
    assignments = {int(p.stem): p.read_text(encoding="utf-8")
                   for p in (out / "assignment").glob("*.txt")}
    return ResultArchive(
        config=json.loads((out / "config.json").read_text(encoding="utf-8")),
        seeds=seeds_from_frame(read_csv(out / "seeds.csv")),
        frontier=seeds_from_frame(read_csv(out / "frontier.csv")),
        history=history_from_frame(read_csv(out / "history.csv")),
        final=population_from_frame(read_csv(out / "final.csv")),
        tradeoff_id=summary.get("tradeoff", {}).get("id"),
        summary=summary,
        assignments=assignments,
    )
