"""
ISCAS-85 .bench netlists, technology mapping and the parametric
(chromosome) form of a mapped design.

Gene i always belongs to gate i in file order; instance names are the
output net names and are kept for reporting.
"""
import re
from numbers import Integral
from dataclasses import dataclass, field, replace
from functools import cached_property
from pathlib import Path

import networkx as nx

from moeda.config import logger
from moeda.core.errors import (
    Diagnostic, BenchParseError, CycleError, UnmappedGateError,
    InvalidChromosomeError
)

BENCH_FUNCTIONS = {
    "AND": "AND", "NAND": "NAND", "OR": "OR", "NOR": "NOR",
    "XOR": "XOR", "XNOR": "XNOR", "NOT": "NOT", "BUFF": "BUF", "BUF": "BUF",
}

_IO_RE = re.compile(r"^(INPUT|OUTPUT)\s*\(\s*([^\s()]+)\s*\)$", re.IGNORECASE)
_GATE_RE = re.compile(r"^([^\s=()]+)\s*=\s*([A-Za-z_][A-Za-z0-9_]*)\s*\(([^()]*)\)$")


@dataclass(frozen=True)
class Gate:
    name: str
    function_id: str
    inputs: tuple
    output: str
    line: int | None = field(default=None, compare=False)

    @property
    def arity(self):
        return len(self.inputs)

    @property
    def cell_key(self):
        return (self.function_id, self.arity)


@dataclass(frozen=True)
class Netlist:
    primary_inputs: tuple
    primary_outputs: tuple
    gates: tuple
    name: str = field(default="netlist", compare=False)

    def __len__(self):
        return len(self.gates)

    @cached_property
    def driver_of(self):
        """net -> index of the (first) gate driving it"""
        drivers = {}
        for i, g in enumerate(self.gates):
            drivers.setdefault(g.output, i)
        return drivers

    @cached_property
    def readers_of(self):
        """net -> list of (gate index, pin index)"""
        readers = {}
        for i, g in enumerate(self.gates):
            for pin, net in enumerate(g.inputs):
                readers.setdefault(net, []).append((i, pin))
        return readers

    @cached_property
    def nets(self):
        """Every net once: primary inputs first, then gate outputs in file order"""
        ordered = list(dict.fromkeys(self.primary_inputs))
        seen = set(ordered)
        for g in self.gates:
            if g.output not in seen:
                seen.add(g.output)
                ordered.append(g.output)
        return tuple(ordered)

    @cached_property
    def output_set(self):
        return frozenset(self.primary_outputs)


# ============================================================================
# PARSING AND VALIDATION
# ============================================================================

def parse_bench(document, name="netlist", validate_netlist=True):
    """
    Parse a .bench document.

    Gate order follows the file; BUFF is normalised to BUF. Syntax and
    unknown-function problems, and (when validate_netlist) every validate()
    diagnostic, are raised together as a BenchParseError.
    """
    inputs, outputs, gates = [], [], []
    diagnostics = []

    for lineno, raw in enumerate(document.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue

        m = _IO_RE.match(line)
        if m:
            (inputs if m.group(1).upper() == "INPUT" else outputs).append(
                (m.group(2), lineno)
            )
            continue

        m = _GATE_RE.match(line)
        if not m:
            diagnostics.append(Diagnostic("syntax", f"Cannot parse {line!r}", lineno))
            continue

        out_net, keyword, args = m.group(1), m.group(2).upper(), m.group(3)
        function_id = BENCH_FUNCTIONS.get(keyword)
        if function_id is None:
            diagnostics.append(Diagnostic(
                "unknown-function", f"Unknown gate function {m.group(2)!r}",
                lineno, (out_net,)
            ))
            continue
        in_nets = tuple(a.strip() for a in args.split(",") if a.strip())
        if not in_nets:
            diagnostics.append(Diagnostic(
                "syntax", f"Gate {out_net} has no inputs", lineno, (out_net,)
            ))
            continue
        gates.append(Gate(out_net, function_id, in_nets, out_net, lineno))

    netlist = Netlist(
        primary_inputs=tuple(n for n, _ in inputs),
        primary_outputs=tuple(n for n, _ in outputs),
        gates=tuple(gates),
        name=name,
    )

    if validate_netlist:
        diagnostics.extend(validate(netlist, _io_lines=dict(inputs)))
    if diagnostics:
        diagnostics.sort(key=lambda d: (d.line is None, d.line or 0))
        for d in diagnostics:
            logger.error(f"{name}: {d}")
        raise BenchParseError(diagnostics)

    logger.info(f"Parsed {name}: {len(netlist.primary_inputs)} inputs, "
                f"{len(netlist.primary_outputs)} outputs, {len(gates)} gates")
    return netlist


def read_bench(path, validate_netlist=True):
    path = Path(path)
    return parse_bench(path.read_text(encoding="utf-8"), name=path.stem,
                       validate_netlist=validate_netlist)


def gate_graph(netlist):
    """DiGraph over gate indices with an edge driver -> reader per connection"""
    graph = nx.DiGraph()
    graph.add_nodes_from(range(len(netlist.gates)))
    driver_of = netlist.driver_of
    for i, g in enumerate(netlist.gates):
        for net in g.inputs:
            d = driver_of.get(net)
            if d is not None:
                graph.add_edge(d, i)
    return graph


def validate(netlist, _io_lines=None):
    """One Diagnostic per violated netlist invariant; empty when valid"""
    diagnostics = []
    _io_lines = _io_lines or {}

    driven = {}
    for net in netlist.primary_inputs:
        if net in driven:
            diagnostics.append(Diagnostic(
                "redefined-net", f"Input {net} declared twice", _io_lines.get(net)
            ))
        driven[net] = None
    for g in netlist.gates:
        if g.output in driven:
            previous = driven[g.output]
            what = "a primary input" if previous is None else f"gate {previous}"
            diagnostics.append(Diagnostic(
                "redefined-net", f"Net {g.output} already driven by {what}",
                g.line, (g.name,)
            ))
            continue
        driven[g.output] = g.name

    for g in netlist.gates:
        for net in g.inputs:
            if net not in driven:
                diagnostics.append(Diagnostic(
                    "undriven-net", f"Gate {g.name} reads undriven net {net}",
                    g.line, (g.name,)
                ))
    for net in netlist.primary_outputs:
        if net not in driven:
            diagnostics.append(Diagnostic(
                "undriven-net", f"Primary output {net} is not driven"
            ))

    graph = gate_graph(netlist)
    for component in nx.strongly_connected_components(graph):
        members = sorted(component)
        if len(members) == 1 and not graph.has_edge(members[0], members[0]):
            continue
        names = tuple(netlist.gates[i].name for i in members)
        diagnostics.append(Diagnostic(
            "cycle", f"Combinational cycle through gates {', '.join(names)}",
            netlist.gates[members[0]].line, names
        ))

    return diagnostics


def topological_order(netlist):
    """
    Kahn's order with the ready set ordered by gate position: every gate
    comes after the gates driving its inputs.
    """
    graph = gate_graph(netlist)
    try:
        return list(nx.lexicographical_topological_sort(graph))
    except nx.NetworkXUnfeasible:
        cycles = [d for d in validate(netlist) if d.kind == "cycle"]
        raise CycleError(cycles or [Diagnostic("cycle", "Netlist is cyclic")]) from None


def required_cells(netlist):
    """Set of (function_id, arity) pairs the netlist uses"""
    return {g.cell_key for g in netlist.gates}


# ============================================================================
# MAPPING AND CHROMOSOMES
# ============================================================================

@dataclass(frozen=True)
class Chromosome:
    genes: tuple

    def __len__(self):
        return len(self.genes)

    def __iter__(self):
        return iter(self.genes)

    def __getitem__(self, i):
        return self.genes[i]

    def to_text(self):
        return " ".join(str(g) for g in self.genes)

    @classmethod
    def from_text(cls, text):
        text = str(text).strip()
        if not text:
            return cls(())
        try:
            return cls(tuple(int(t) for t in text.split()))
        except ValueError:
            raise InvalidChromosomeError(f"Malformed chromosome text {text[:40]!r}")


@dataclass(frozen=True)
class MappedDesign:
    """A netlist bound to a library with one variant index per gate.

    `mutable[i]` is False for gates outside the parameterisation mask.
    """
    netlist: Netlist
    library: object
    assignment: tuple
    topo_order: tuple
    mutable: tuple

    @cached_property
    def cells(self):
        """CellFunction of every gate, in gate order"""
        return tuple(self.library.functions[g.cell_key] for g in self.netlist.gates)

    @cached_property
    def variant_counts(self):
        return tuple(len(cf.variants) for cf in self.cells)

    def variant(self, gate_index):
        return self.cells[gate_index].variants[self.assignment[gate_index]]


def map_to_library(netlist, lib, parameterised=None):
    """
    Bind every gate to the lowest-strength variant of its cell.

    `parameterised` optionally names the function ids whose genes may be
    changed by the optimiser; other gates keep their assignment.
    """
    for g in netlist.gates:
        if g.cell_key not in lib.functions:
            raise UnmappedGateError(g.name, g.function_id, g.arity)

    order = tuple(topological_order(netlist))
    if parameterised is None:
        mutable = (True,) * len(netlist.gates)
    else:
        allowed = set(parameterised)
        mutable = tuple(g.function_id in allowed for g in netlist.gates)

    design = MappedDesign(
        netlist=netlist,
        library=lib,
        assignment=(0,) * len(netlist.gates),
        topo_order=order,
        mutable=mutable,
    )
    logger.debug(f"Mapped {netlist.name} onto '{lib.name}': "
                 f"{gene_count(design)} free genes")
    return design


def gene_count(design):
    """Genes the optimiser can actually change"""
    return sum(1 for m, n in zip(design.mutable, design.variant_counts)
               if m and n > 1)


def extract_chromosome(design):
    return Chromosome(tuple(design.assignment))


def check_chromosome(design, chromosome):
    genes = tuple(chromosome)
    if len(genes) != len(design.netlist.gates):
        raise InvalidChromosomeError(
            f"Chromosome has {len(genes)} genes, design has "
            f"{len(design.netlist.gates)} gates"
        )
    for i, (gene, n) in enumerate(zip(genes, design.variant_counts)):
        if not isinstance(gene, Integral) or not 0 <= gene < n:
            raise InvalidChromosomeError(
                f"Gene {i} ({design.netlist.gates[i].name}) = {gene!r} "
                f"outside 0..{n - 1}", index=i
            )
    return tuple(int(g) for g in genes)


def apply_chromosome(design, chromosome):
    """New design with the chromosome's variant choices; topology untouched"""
    genes = check_chromosome(design, chromosome)
    if genes == design.assignment:
        return design
    return replace(design, assignment=genes)


# ============================================================================
# ASSIGNMENT EXPORT
# ============================================================================

def format_assignment(design):
    """One line per gate: '<instance> <FUNC><arity> <label>'"""
    lines = []
    for i, g in enumerate(design.netlist.gates):
        v = design.variant(i)
        lines.append(f"{g.name} {g.function_id}{g.arity} {v.strength_label}")
    return "\n".join(lines) + "\n"


def parse_assignment(document, design):
    """Chromosome from an assignment document; unlisted gates keep gene 0"""
    index = {g.name: i for i, g in enumerate(design.netlist.gates)}
    genes = list(design.assignment)
    for lineno, raw in enumerate(document.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) != 3:
            raise InvalidChromosomeError(f"Line {lineno}: expected 3 fields, got {line!r}")
        name, _, label = parts
        if name not in index:
            raise InvalidChromosomeError(f"Line {lineno}: unknown instance {name}")
        i = index[name]
        genes[i] = design.cells[i].index_of(label)
    return Chromosome(tuple(genes))
