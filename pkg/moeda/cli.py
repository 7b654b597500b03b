"""
moeda command line: genlib | eval | optimize | sweep | report | fetch

Times are given in nanoseconds, explicit loads in femtofarads. Any
subcommand accepts --config <file.json> whose keys are the long flag names
(dashes as underscores); flags given on the command line win.
"""
import argparse
import json
import sys
from pathlib import Path

import pandas as pd

from moeda.config import (
    DEFAULT_CLOCK_PERIOD, DEFAULT_POPULATION, DEFAULT_GENERATIONS,
    DEFAULT_MUTATION_RATE, DEFAULT_RNG_SEED, DEFAULT_SWEEP_STEPS,
    DEFAULT_SEED_COPIES, DSE_GENERATIONS, TIMING_LIMIT_STEPS, DEFAULT_LIBRARY_NAME,
    DEFAULT_VOLTAGE, ARITY_FACTOR, STRENGTH_LABELS, ISCAS85_BENCHMARKS,
    BENCH_DIR, default_jobs, logger
)
from moeda.core.errors import MoedaError, NetlistError
from moeda.core.evaluator import DesignEvaluator, EVALUATION_COLUMNS
from moeda.core.library import (
    ScalingProfile, generate_synthetic_library, write_library, reduced_library
)
from moeda.core.netlist import (
    read_bench, required_cells, parse_assignment, extract_chromosome
)
from moeda.core.archive import read_seed_archive, write_csv, seeds_frame
from moeda.core.seeding import constraint_sweep, syn_frontier
from moeda.pipelines.explorer import (
    ExperimentSpec, SINGLE_SEED, MULTI_SEED, THREE_SEED, build_design,
    build_scenario, run_experiment, run_multi_seed, export_experiment, export_results,
    load_archive
)

NS = 1e-9
FF = 1e-15


# ============================================================================
# ARGUMENT TYPES
# ============================================================================

def _load(text):
    """NONE | D1 | D8 | capacitance in fF"""
    label = str(text).strip().upper()
    if label in ("NONE", "D1", "D8"):
        return label
    try:
        value = float(label.removesuffix("FF"))
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected NONE, D1, D8 or fF, got {text!r}")
    if value < 0:
        raise argparse.ArgumentTypeError(f"load must be >= 0 fF, got {value}")
    return value * FF


def _rate(text):
    value = float(text)
    if not 0 < value <= 1:
        raise argparse.ArgumentTypeError(f"mutation rate must be in (0, 1], got {value}")
    return value


def _positive_int(text):
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError(f"expected an integer >= 1, got {value}")
    return value


def _even_population(text):
    value = _positive_int(text)
    if value < 2 or value % 2:
        raise argparse.ArgumentTypeError(f"population must be even and >= 2, got {value}")
    return value


# ============================================================================
# PARSER
# ============================================================================

def _add_design_flags(p):
    p.add_argument("--bench", help="ISCAS-85 .bench netlist")
    p.add_argument("--lib", help="library document (default: synthetic, generated on the fly)")
    p.add_argument("--reduced", action="store_true",
                   help="restrict to NAND2 at its smallest drive plus all inverters")
    p.add_argument("--load", type=_load, default="NONE",
                   help="primary-output load: NONE, D1, D8 or a value in fF (default NONE)")
    p.add_argument("--clock", type=float, default=DEFAULT_CLOCK_PERIOD / NS,
                   help="clock period T_c in ns (default %(default)s)")
    p.add_argument("--output-delay", type=float, default=0.0,
                   help="output delay constraint T_od in ns (default 0)")
    p.add_argument("--config", help="JSON file with defaults for these flags")


def _add_moea_flags(p, population=True, generations=DEFAULT_GENERATIONS):
    if population:
        p.add_argument("--pop", type=_even_population, default=DEFAULT_POPULATION,
                       help="population size N (default %(default)s)")
    p.add_argument("--gen", type=int, default=generations,
                   help="generations M (default %(default)s)")
    p.add_argument("--rho", type=_rate, default=DEFAULT_MUTATION_RATE,
                   help="per-gene mutation probability in (0, 1] (default %(default)s)")
    p.add_argument("--seed-rng", type=int, default=DEFAULT_RNG_SEED,
                   help="root RNG seed (default %(default)s)")
    p.add_argument("--jobs", type=_positive_int, default=None,
                   help="concurrent evaluations (default MOEDA_JOBS or CPU count)")
    p.add_argument("--out", help="output directory for the archive")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="moeda",
        description="Multi-objective drive-strength remapping of gate-level netlists",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("genlib", help="generate a synthetic library document")
    p.add_argument("--functions-from", dest="functions_from",
                   help="bench whose (function, arity) pairs the library must cover")
    p.add_argument("--out", help="library file to write")
    p.add_argument("--name", default=DEFAULT_LIBRARY_NAME, help="library name")
    p.add_argument("--voltage", type=float, default=DEFAULT_VOLTAGE,
                   help="supply voltage in V (default %(default)s)")
    p.add_argument("--arity-factor", type=float, default=ARITY_FACTOR,
                   help="per-extra-input scaling of R, area, power (default %(default)s)")
    p.add_argument("--strengths", default=",".join(STRENGTH_LABELS),
                   help="comma-separated strength labels, ascending")
    p.add_argument("--reduced", action="store_true",
                   help="write only NAND2 at the smallest drive plus all inverters")
    p.add_argument("--config", help="JSON file with defaults for these flags")

    p = sub.add_parser("eval", help="evaluate one assignment, CSV row on stdout")
    _add_design_flags(p)
    p.add_argument("--assignment", help="assignment file (default: all minimum strengths)")
    p.add_argument("--tr", type=float, help="required time T_r in ns (default T_c - T_od)")

    p = sub.add_parser("optimize", help="single-seed optimisation")
    _add_design_flags(p)
    p.add_argument("--tr", type=float,
                   help="required time for the seed in ns (default: tightest met)")
    p.add_argument("--step", type=float,
                   help="tightening increment in ns for the seed search "
                        f"(default: relaxed delay / {TIMING_LIMIT_STEPS})")
    p.add_argument("--mode", choices=[SINGLE_SEED, THREE_SEED], default=SINGLE_SEED,
                   help="one seed, or three clusters seeded tight/relaxed/middle")
    _add_moea_flags(p)

    p = sub.add_parser("sweep", help="constraint sweep, optionally multi-seed optimisation")
    _add_design_flags(p)
    p.add_argument("--tr-max", type=float, help="relaxed end of the sweep in ns")
    p.add_argument("--tr-min", type=float, help="tight end of the sweep in ns")
    p.add_argument("--steps", type=int, default=DEFAULT_SWEEP_STEPS,
                   help="number of sweep points (default %(default)s)")
    p.add_argument("--optimize", action="store_true",
                   help="continue into multi-seed optimisation")
    p.add_argument("--seeds",
                   help="seeds.csv from an earlier sweep to optimise instead of sweeping "
                        "(implies --optimize)")
    p.add_argument("--copies", type=_positive_int, default=DEFAULT_SEED_COPIES,
                   help="copies of each seed in the initial population (default %(default)s)")
    _add_moea_flags(p, population=False, generations=DSE_GENERATIONS)

    p = sub.add_parser("report", help="re-export an archive")
    p.add_argument("--archive", help="archive directory written by optimize or sweep")
    p.add_argument("--format", choices=["json", "csv"], default="json")
    p.add_argument("--out", help="target directory (default: the archive directory)")
    p.add_argument("--config", help="JSON file with defaults for these flags")

    p = sub.add_parser("fetch", help="download ISCAS-85 benches")
    p.add_argument("names", nargs="*", help=f"benchmarks (default: all of {ISCAS85_BENCHMARKS})")
    p.add_argument("--dest", default=str(BENCH_DIR), help="target directory")
    p.add_argument("--config", help="JSON file with defaults for these flags")

    return parser, sub.choices


def _config_value(sub, action, value):
    """A --config value, converted and checked as if given on the command line"""
    key = action.dest
    if action.nargs == 0:
        if not isinstance(value, bool):
            sub.error(f"config key {key!r} must be true or false, got {value!r}")
        return value
    if value is None:
        return value
    items = value if isinstance(value, list) else [value]
    if not isinstance(value, list) and action.nargs not in (None, "?"):
        sub.error(f"config key {key!r} expects a list, got {value!r}")
    converted = []
    for item in items:
        if action.type is not None:
            try:
                item = action.type(item if isinstance(item, str) else str(item))
            except (argparse.ArgumentTypeError, TypeError, ValueError) as e:
                sub.error(f"config key {key!r}: {e}")
        if action.choices is not None and item not in action.choices:
            sub.error(f"config key {key!r}: {item!r} not one of {list(action.choices)}")
        converted.append(item)
    return converted if isinstance(value, list) else converted[0]


def parse_arguments(argv=None):
    """Parse, then merge a --config file underneath the explicit flags"""
    parser, subparsers = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        sub = subparsers[args.command]
        try:
            values = json.loads(Path(args.config).read_text(encoding="utf-8"))
        except (OSError, ValueError) as e:
            sub.error(f"cannot read config {args.config}: {e}")
        if not isinstance(values, dict):
            sub.error(f"config {args.config} must hold a JSON object")
        known = set(vars(args)) - {"command", "config"}
        unknown = sorted(set(values) - known)
        if unknown:
            sub.error(f"unknown config keys: {', '.join(unknown)}")
        actions = {a.dest: a for a in sub._actions}
        values = {key: _config_value(sub, actions[key], value) for key, value in values.items()}
        sub.set_defaults(**values)
        args = parser.parse_args(argv)
    return parser, subparsers, args


# ============================================================================
# COMMANDS
# ============================================================================

def _echo(resolved):
    logger.info("Resolved config: " + json.dumps(resolved, sort_keys=True, default=str))


def _spec_from(args, mode, **extra):
    values = dict(
        benchmark=args.bench,
        mode=mode,
        library=args.lib,
        reduced_library=args.reduced,
        clock_period=args.clock * NS,
        output_delay=args.output_delay * NS,
        output_load=args.load,
    )
    values.update(extra)
    return ExperimentSpec(**values)


def cmd_genlib(args, sub):
    if not args.functions_from:
        sub.error("--functions-from is required")
    if not args.out:
        sub.error("--out is required")
    netlist = read_bench(args.functions_from)
    profile = ScalingProfile(arity_factor=args.arity_factor,
                             strength_labels=tuple(s.strip() for s in args.strengths.split(",")))
    required = required_cells(netlist) | {("NOT", 1)}
    if args.reduced:
        required |= {("NAND", 2)}
    lib = generate_synthetic_library(profile, required, name=args.name, voltage=args.voltage)
    if args.reduced:
        lib = reduced_library(lib)
    write_library(lib, args.out)
    print(args.out)
    return 0


def cmd_eval(args, sub):
    if not args.bench:
        sub.error("--bench is required")
    spec = _spec_from(args, SINGLE_SEED)
    _echo(spec.to_dict())
    design = build_design(spec)
    scenario = build_scenario(spec, design)
    if args.tr is not None:
        scenario = scenario.with_required_time(args.tr * NS)
    if args.assignment:
        chromosome = parse_assignment(Path(args.assignment).read_text(encoding="utf-8"), design)
    else:
        chromosome = extract_chromosome(design)
    evaluation = DesignEvaluator(design, scenario)(chromosome)
    row = {"id": 0}
    row.update({name: getattr(evaluation, name) for name in EVALUATION_COLUMNS})
    pd.DataFrame([row]).to_csv(sys.stdout, index=False, lineterminator="\n")
    return 0


def cmd_optimize(args, sub):
    if not args.bench:
        sub.error("--bench is required")
    if args.gen < 1:
        sub.error("--gen must be >= 1")
    spec = _spec_from(
        args, args.mode,
        required_time=None if args.tr is None else args.tr * NS,
        timing_step=None if args.step is None else args.step * NS,
        population_size=args.pop,
        generations=args.gen,
        mutation_rate=args.rho,
        rng_seed=args.seed_rng,
        jobs=args.jobs or default_jobs(),
        out_dir=args.out or str(Path("results") / f"{Path(args.bench).stem}-{args.mode}"),
    )
    _echo(spec.to_dict())
    result = run_experiment(spec)
    export_experiment(result, spec.out_dir)
    print(spec.out_dir)
    return 0


def cmd_sweep(args, sub):
    if not args.bench:
        sub.error("--bench is required")
    seeds = None
    if args.seeds:
        seeds = read_seed_archive(args.seeds)
        if not seeds:
            sub.error(f"{args.seeds} holds no seeds")
        times = [s.required_time / NS for s in seeds]
        if args.tr_max is None:
            args.tr_max = max(times)
        if args.tr_min is None:
            args.tr_min = min(times)
        args.optimize = True
    if args.tr_max is None or args.tr_min is None:
        sub.error("--tr-max and --tr-min are required")
    if not args.tr_max > args.tr_min > 0:
        sub.error("need --tr-max > --tr-min > 0")
    if args.steps < 2:
        sub.error("--steps must be >= 2")
    if args.gen < 1:
        sub.error("--gen must be >= 1")
    spec = _spec_from(
        args, MULTI_SEED,
        tr_max=args.tr_max * NS,
        tr_min=args.tr_min * NS,
        steps=args.steps,
        seed_copies=args.copies,
        generations=args.gen,
        mutation_rate=args.rho,
        rng_seed=args.seed_rng,
        jobs=args.jobs or default_jobs(),
        out_dir=args.out or str(Path("results") / f"{Path(args.bench).stem}-sweep"),
    )
    _echo(spec.to_dict())
    out = Path(spec.out_dir)

    if not args.optimize:
        design = build_design(spec)
        seeds = constraint_sweep(design, spec.sweep_config(), spec.clock_period)
        out.mkdir(parents=True, exist_ok=True)
        (out / "config.json").write_text(json.dumps(spec.to_dict(), indent=2) + "\n",
                                         encoding="utf-8")
        write_csv(seeds_frame(seeds), out / "seeds.csv")
        write_csv(seeds_frame(syn_frontier(seeds)), out / "frontier.csv")
        print(out)
        return 0

    archive = run_multi_seed(spec, seeds)
    export_results(archive, out)
    print(f"hv_frontier {archive.summary['hv_frontier']!r}")
    print(f"hv_final {archive.summary['hv_final']!r}")
    print(f"survivor_fraction {archive.summary['survivor_fraction']!r}")
    return 0


def cmd_report(args, sub):
    if not args.archive:
        sub.error("--archive is required")
    archive = load_archive(args.archive)
    written = export_results(archive, args.out or args.archive, args.format)
    for path in written:
        print(path)
    return 0


def cmd_fetch(args, sub):
    from moeda.benchmarks import fetch_benchmarks

    for path in fetch_benchmarks(args.names or ISCAS85_BENCHMARKS, args.dest):
        print(path)
    return 0


COMMANDS = {
    "genlib": cmd_genlib,
    "eval": cmd_eval,
    "optimize": cmd_optimize,
    "sweep": cmd_sweep,
    "report": cmd_report,
    "fetch": cmd_fetch,
}


def main(argv=None):
    _, subparsers, args = parse_arguments(argv)
    sub = subparsers[args.command]
    try:
        return COMMANDS[args.command](args, sub)
    except NetlistError as e:
        for d in e.diagnostics:
            print(f"error: {d}", file=sys.stderr)
        return 1
    except MoedaError as e:
        print(f"error: {e}", file=sys.stderr)
        return 1
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        missing = Path(e.filename).stem if e.filename else None
        if isinstance(e, FileNotFoundError) and missing in ISCAS85_BENCHMARKS:
            print(f"hint: `moeda fetch {missing}` downloads it", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
