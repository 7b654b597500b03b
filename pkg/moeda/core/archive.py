"""
Tabular persistence for seeds, populations and generation history.

Every table is a pandas DataFrame with a fixed column order; floats are
written in shortest round-trip form and read back with
float_precision="round_trip", so a reload reproduces the exact values.
"""
from dataclasses import asdict
from pathlib import Path

import pandas as pd

from moeda.config import logger
from moeda.core.evaluator import EVALUATION_COLUMNS, Evaluation
from moeda.core.moea import HISTORY_COLUMNS, GenerationStats, Individual
from moeda.core.netlist import Chromosome

SEED_COLUMNS = ["seed_id", "required_time"] + EVALUATION_COLUMNS + ["chromosome"]
POPULATION_COLUMNS = (["id", "provenance", "seed_id", "rank", "crowding"]
                      + EVALUATION_COLUMNS + ["chromosome"])
PROJECTION_COLUMNS = ["source", "id", "d_wc", "value", "timing_met"]


def _evaluation_row(evaluation):
    return {name: getattr(evaluation, name) for name in EVALUATION_COLUMNS}


def _evaluation_of(row):
    values = {name: row[name] for name in EVALUATION_COLUMNS}
    values = {k: (bool(v) if k == "timing_met" else float(v)) for k, v in values.items()}
    return Evaluation(**values)


def write_csv(frame, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    try:
        frame.to_csv(path, index=False, lineterminator="\n")
    except OSError as e:
        logger.error(f"Cannot write {path}: {e}")
        raise
    return path


def read_csv(path):
    path = Path(path)
    try:
        return pd.read_csv(path, float_precision="round_trip",
                           dtype={"chromosome": str, "provenance": str},
                           keep_default_na=False, na_values=[""])
    except OSError as e:
        logger.error(f"Cannot read {path}: {e}")
        raise


# ============================================================================
# SEEDS
# ============================================================================

def seeds_frame(seeds):
    rows = []
    for s in seeds:
        row = {"seed_id": s.seed_id, "required_time": s.required_time}
        row.update(_evaluation_row(s.evaluation))
        row["chromosome"] = s.chromosome.to_text()
        rows.append(row)
    return pd.DataFrame(rows, columns=SEED_COLUMNS)


def seeds_from_frame(frame):
    from moeda.core.seeding import SeedSolution

    seeds = []
    for row in frame.to_dict("records"):
        evaluation = _evaluation_of(row)
        seeds.append(SeedSolution(
            required_time=float(row["required_time"]),
            chromosome=Chromosome.from_text(row["chromosome"]),
            evaluation=evaluation,
            timing_met=evaluation.timing_met,
            seed_id=int(row["seed_id"]),
        ))
    return seeds


def read_seed_archive(path):
    """Seeds previously written with write_csv(seeds_frame(...))"""
    seeds = seeds_from_frame(read_csv(path))
    logger.info(f"Loaded {len(seeds)} seeds from {path}")
    return seeds


# ============================================================================
# POPULATIONS
# ============================================================================

def population_frame(population):
    rows = []
    for i, ind in enumerate(population):
        row = {"id": i, "provenance": ind.provenance, "seed_id": ind.seed_id,
               "rank": ind.rank, "crowding": ind.crowding}
        row.update(_evaluation_row(ind.evaluation))
        row["chromosome"] = ind.chromosome.to_text()
        rows.append(row)
    return pd.DataFrame(rows, columns=POPULATION_COLUMNS)


def population_from_frame(frame):
    population = []
    for row in frame.to_dict("records"):
        population.append(Individual(
            chromosome=Chromosome.from_text(row["chromosome"]),
            evaluation=_evaluation_of(row),
            rank=int(row["rank"]),
            crowding=float(row["crowding"]),
            provenance=str(row["provenance"]),
            seed_id=int(row["seed_id"]),
        ))
    return population


# ============================================================================
# HISTORY
# ============================================================================

def history_frame(history):
    return pd.DataFrame([asdict(s) for s in history], columns=HISTORY_COLUMNS)


def history_from_frame(frame):
    return [GenerationStats(int(r["generation"]), float(r["min_d_wc"]),
                            float(r["min_p_total"]), float(r["min_a_gate"]),
                            int(r["front_size"]), float(r["hypervolume"]))
            for r in frame.to_dict("records")]


def projection_frame(sources, value):
    """
    D_wc against `value` over labelled solution sets; `sources` is a list of
    (label, [(id, item), ...]) with items carrying an `evaluation`.
    """
    rows = []
    for label, items in sources:
        for ident, item in items:
            ev = item.evaluation
            rows.append({"source": label, "id": ident, "d_wc": ev.d_wc,
                         "value": getattr(ev, value), "timing_met": ev.timing_met})
    frame = pd.DataFrame(rows, columns=PROJECTION_COLUMNS)
    return frame.rename(columns={"value": value})
