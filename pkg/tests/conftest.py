"""Shared fixtures: small benches, synthetic libraries and random DAGs."""
from pathlib import Path

import numpy as np
import pytest

from moeda.core.evaluator import TimingScenario
from moeda.core.library import ScalingProfile, generate_synthetic_library
from moeda.core.netlist import Gate, Netlist, map_to_library, read_bench, required_cells

BENCH_DIR = Path(__file__).resolve().parent.parent / "data" / "benchmarks"

RANDOM_FUNCTIONS = ["AND", "NAND", "OR", "NOR", "XOR", "XNOR", "NOT", "BUF"]


def library_for(netlist, labels=None):
    """Synthetic library covering the netlist plus the inverter"""
    profile = ScalingProfile() if labels is None else ScalingProfile(strength_labels=tuple(labels))
    return generate_synthetic_library(profile, required_cells(netlist) | {("NOT", 1)})


def random_dag(rng, n_gates, n_inputs=4):
    """Random combinational netlist; gate i reads only earlier nets"""
    inputs = tuple(f"i{k}" for k in range(n_inputs))
    nets = list(inputs)
    gates = []
    for i in range(n_gates):
        function_id = RANDOM_FUNCTIONS[rng.integers(len(RANDOM_FUNCTIONS))]
        arity = 1 if function_id in ("NOT", "BUF") else int(rng.integers(2, 4))
        picks = rng.choice(len(nets), size=arity, replace=len(nets) < arity)
        out = f"n{i}"
        gates.append(Gate(out, function_id, tuple(nets[p] for p in picks), out))
        nets.append(out)
    read = {n for g in gates for n in g.inputs}
    outputs = tuple(g.output for g in gates if g.output not in read) or (gates[-1].output,)
    return Netlist(inputs, outputs, tuple(gates), name=f"dag{n_gates}")


def single_inverter():
    gate = Gate("y", "NOT", ("a",), "y")
    return Netlist(("a",), ("y",), (gate,), name="inv")


@pytest.fixture
def c17():
    return read_bench(BENCH_DIR / "c17.bench")


@pytest.fixture
def rca2():
    return read_bench(BENCH_DIR / "rca2.bench")


@pytest.fixture
def c17_design(c17):
    return map_to_library(c17, library_for(c17))


@pytest.fixture
def rca2_design(rca2):
    return map_to_library(rca2, library_for(rca2))


@pytest.fixture
def scenario():
    return TimingScenario(clock_period=4e-9, required_time=4e-9, output_load=0.0)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def iscas_bench(name):
    """Path of an ISCAS-85 bench, skipping the test when it is not available"""
    path = BENCH_DIR / f"{name}.bench"
    if not path.exists():
        pytest.skip(f"{name}.bench not present (run `moeda fetch {name}`)")
    return path
