"""
First-order PPA evaluation of a mapped design.

Delay: lumped RC stage delay per gate, longest-path arrival over a DAG.
Power: switching (0.5 C V^2 F alpha) + internal (E F alpha) + leakage.
Area: sum of cell areas.

The module-level functions are the readable reference routines. The
DesignEvaluator class precomputes a design's structure once and evaluates
chromosomes with numpy; IncrementalTimer serves single-gate what-if
queries for the greedy sizer.
"""
import heapq
import math
from dataclasses import dataclass, replace
from typing import NamedTuple

import numpy as np

from moeda.config import PRIMARY_INPUT_PROBABILITY, logger
from moeda.core.errors import InvalidConstraintError
from moeda.core.netlist import apply_chromosome, check_chromosome


# ============================================================================
# TYPES
# ============================================================================

@dataclass(frozen=True)
class TimingScenario:
    clock_period: float
    required_time: float
    output_load: float = 0.0

    def __post_init__(self):
        if not self.clock_period > 0:
            raise InvalidConstraintError(
                f"Clock period must be > 0, got {self.clock_period}"
            )
        if not self.required_time > 0:
            raise InvalidConstraintError(
                f"Required time must be > 0, got {self.required_time}"
            )
        if self.output_load < 0:
            raise InvalidConstraintError(
                f"Output load must be >= 0, got {self.output_load}"
            )

    @classmethod
    def from_constraints(cls, clock_period, output_delay=0.0, output_load=0.0):
        from moeda.core.seeding import required_time
        return cls(clock_period, required_time(clock_period, output_delay),
                   output_load)

    @property
    def output_delay(self):
        return self.clock_period - self.required_time

    @property
    def frequency(self):
        return 1.0 / self.clock_period

    def with_required_time(self, required_time):
        return replace(self, required_time=required_time)


@dataclass(frozen=True)
class TimingReport:
    arrival: dict
    worst_arrival: float
    wns: float
    critical_path: tuple
    required_time: float


@dataclass(frozen=True)
class PowerReport:
    switching: float
    internal: float
    leakage: float
    total: float

    @classmethod
    def of(cls, switching, internal, leakage):
        return cls(switching, internal, leakage, switching + internal + leakage)


class ObjectiveVector(NamedTuple):
    d_wc: float
    p_total: float
    a_gate: float


@dataclass(frozen=True)
class Evaluation:
    """Everything one evaluation reports; `objectives` is the minimised triple"""
    d_wc: float
    wns: float
    timing_met: bool
    switching: float
    internal: float
    leakage: float
    p_total: float
    a_gate: float

    @property
    def objectives(self):
        return ObjectiveVector(self.d_wc, self.p_total, self.a_gate)


EVALUATION_COLUMNS = ["d_wc", "wns", "timing_met", "switching", "internal",
                      "leakage", "p_total", "a_gate"]


# ============================================================================
# REFERENCE ROUTINES
# ============================================================================

def net_load(design, net, scenario):
    """Reader pin caps + per-fanout wire cap + output load on primary outputs"""
    readers = design.netlist.readers_of.get(net, [])
    load = sum(design.variant(g).input_cap_per_pin for g, _ in readers)
    load += design.library.wire_cap_per_fanout * len(readers)
    if net in design.netlist.output_set:
        load += scenario.output_load
    return load


def gate_delay(variant, load):
    return variant.intrinsic_delay + variant.drive_resistance * load


def compute_arrival_times(design, scenario):
    """
    Longest-path arrival times with primary inputs at t=0.

    The critical path is the lexicographically smallest gate-index sequence
    among the paths reaching the worst primary output.
    """
    netlist = design.netlist
    arrival = {net: 0.0 for net in netlist.primary_inputs}
    paths = {net: () for net in netlist.primary_inputs}

    for gi in design.topo_order:
        gate = netlist.gates[gi]
        best_arrival, best_path = None, None
        for net in gate.inputs:
            a, p = arrival[net], paths[net]
            if best_arrival is None or a > best_arrival or (
                    a == best_arrival and p < best_path):
                best_arrival, best_path = a, p
        delay = gate_delay(design.variant(gi), net_load(design, gate.output, scenario))
        arrival[gate.output] = best_arrival + delay
        paths[gate.output] = best_path + (gi,)

    worst, critical = 0.0, ()
    first = True
    for net in netlist.primary_outputs:
        a, p = arrival[net], paths[net]
        if first or a > worst or (a == worst and p < critical):
            worst, critical = a, p
            first = False

    return TimingReport(
        arrival=arrival,
        worst_arrival=worst,
        wns=scenario.required_time - worst,
        critical_path=critical,
        required_time=scenario.required_time,
    )


def worst_case_delay(report, scenario):
    """(D_wc, timing_met) with D_wc = T_r - WNS = worst arrival"""
    return report.worst_arrival, report.wns >= 0


_TRUTH = {
    "NOT": lambda ps: 1.0 - ps[0],
    "BUF": lambda ps: ps[0],
    "AND": lambda ps: math.prod(ps),
    "NAND": lambda ps: 1.0 - math.prod(ps),
    "OR": lambda ps: 1.0 - math.prod(1.0 - p for p in ps),
    "NOR": lambda ps: math.prod(1.0 - p for p in ps),
}


def _xor_probability(ps):
    p = ps[0]
    for q in ps[1:]:
        p = p * (1.0 - q) + q * (1.0 - p)
    return p


_TRUTH["XOR"] = _xor_probability
_TRUTH["XNOR"] = lambda ps: 1.0 - _xor_probability(ps)


def propagate_probabilities(design):
    """
    net -> (static probability p, toggle rate alpha = 2p(1-p)) under the
    zero-delay, spatially independent model.
    """
    netlist = design.netlist
    result = {}
    p_in = PRIMARY_INPUT_PROBABILITY
    for net in netlist.primary_inputs:
        result[net] = (p_in, 2.0 * p_in * (1.0 - p_in))
    for gi in design.topo_order:
        gate = netlist.gates[gi]
        ps = [result[net][0] for net in gate.inputs]
        p = min(1.0, max(0.0, _TRUTH[gate.function_id](ps)))
        result[gate.output] = (p, 2.0 * p * (1.0 - p))
    return result


def total_power(design, scenario, probabilities=None):
    """PowerReport; switching is charged on gate-driven nets only"""
    if probabilities is None:
        probabilities = propagate_probabilities(design)
    v2 = design.library.voltage ** 2
    f = scenario.frequency
    switching_cv = 0.0
    internal_e = 0.0
    leakage = 0.0
    for gi, gate in enumerate(design.netlist.gates):
        v = design.variant(gi)
        alpha = probabilities[gate.output][1]
        switching_cv += 0.5 * net_load(design, gate.output, scenario) * v2 * alpha
        internal_e += v.internal_energy * alpha
        leakage += v.leakage_power
    return PowerReport.of(switching_cv * f, internal_e * f, leakage)


def total_area(design):
    return math.fsum(design.variant(gi).area for gi in range(len(design.netlist.gates)))


def evaluate(design, chromosome, scenario):
    """Objective triple (D_wc, P_total, A_gate) of a chromosome"""
    return DesignEvaluator(design, scenario)(chromosome).objectives


def assess(design, chromosome, scenario):
    """Full Evaluation record of a chromosome via the reference routines"""
    mapped = apply_chromosome(design, chromosome)
    report = compute_arrival_times(mapped, scenario)
    d_wc, met = worst_case_delay(report, scenario)
    power = total_power(mapped, scenario)
    return Evaluation(d_wc=d_wc, wns=report.wns, timing_met=met,
                      switching=power.switching, internal=power.internal,
                      leakage=power.leakage, p_total=power.total,
                      a_gate=total_area(mapped))


# ============================================================================
# FAST EVALUATION
# ============================================================================

class DesignModel:
    """Static integer structure of a mapped design (independent of sizing)"""

    def __init__(self, design):
        netlist = design.netlist
        self.design = design
        self.nets = netlist.nets
        self.net_id = {net: i for i, net in enumerate(self.nets)}
        n_gates = len(netlist.gates)

        self.gate_out = [self.net_id[g.output] for g in netlist.gates]
        self.gate_in = [[self.net_id[n] for n in g.inputs] for g in netlist.gates]
        self.driver = [-1] * len(self.nets)
        for gi in range(n_gates - 1, -1, -1):
            self.driver[self.gate_out[gi]] = gi
        self.readers = [[] for _ in self.nets]
        for gi, ins in enumerate(self.gate_in):
            for n in ins:
                self.readers[n].append(gi)
        self.fanout = np.array([len(r) for r in self.readers], dtype=float)
        self.po_ids = [self.net_id[n] for n in netlist.primary_outputs]
        self.po_mask = np.zeros(len(self.nets))
        self.po_mask[self.po_ids] = 1.0
        self.topo_pos = [0] * n_gates
        for pos, gi in enumerate(design.topo_order):
            self.topo_pos[gi] = pos

        # Flattened variant tables, gate gi's variant k lives at offset[gi] + k
        counts = design.variant_counts
        self.offset = np.concatenate(([0], np.cumsum(counts)[:-1])).astype(np.int64) \
            if n_gates else np.zeros(0, dtype=np.int64)
        flat = [v for cf in design.cells for v in cf.variants]
        self.cap = np.array([v.input_cap_per_pin for v in flat])
        self.res = np.array([v.drive_resistance for v in flat])
        self.d0 = np.array([v.intrinsic_delay for v in flat])
        self.area = np.array([v.area for v in flat])
        self.leak = np.array([v.leakage_power for v in flat])
        self.energy = np.array([v.internal_energy for v in flat])

        self.pin_gate = np.array([gi for gi, ins in enumerate(self.gate_in) for _ in ins],
                                 dtype=np.int64)
        self.pin_net = np.array([n for ins in self.gate_in for n in ins], dtype=np.int64)
        self.gate_out_arr = np.array(self.gate_out, dtype=np.int64)

        # Levelisation for vectorised arrival propagation
        level = [0] * n_gates
        for gi in design.topo_order:
            drivers = [self.driver[n] for n in self.gate_in[gi] if self.driver[n] >= 0]
            level[gi] = 1 + max((level[d] for d in drivers), default=0)
        by_level = {}
        for gi in range(n_gates):
            by_level.setdefault(level[gi], []).append(gi)
        self.levels = []
        for lv in sorted(by_level):
            gates = np.array(by_level[lv], dtype=np.int64)
            local = np.array([k for k, gi in enumerate(by_level[lv])
                              for _ in self.gate_in[gi]], dtype=np.int64)
            nets = np.array([n for gi in by_level[lv] for n in self.gate_in[gi]],
                            dtype=np.int64)
            self.levels.append((gates, local, nets))
        logger.debug(f"{netlist.name}: {n_gates} gates in {len(self.levels)} levels")

        probabilities = propagate_probabilities(design)
        self.alpha = np.array([probabilities[net][1] for net in self.nets])
        self.driven_mask = np.array([d >= 0 for d in self.driver], dtype=float)

    def flat_index(self, assignment):
        return self.offset + np.asarray(assignment, dtype=np.int64)

    def net_loads(self, flat, output_load):
        wire = self.design.library.wire_cap_per_fanout
        caps = np.bincount(self.pin_net, weights=self.cap[flat][self.pin_gate],
                           minlength=len(self.nets)) if len(self.pin_net) else \
            np.zeros(len(self.nets))
        return caps + wire * self.fanout + output_load * self.po_mask


class DesignEvaluator:
    """
    Evaluates chromosomes of one design under one scenario.

    Pure: holds only immutable data, so instances can be shared by threads
    or rebuilt in worker processes with identical results.
    """

    def __init__(self, design, scenario, model=None):
        self.design = design
        self.scenario = scenario
        self.model = model or DesignModel(design)

    def __call__(self, chromosome):
        genes = check_chromosome(self.design, chromosome)
        return self.evaluate_assignment(genes)

    def evaluate_assignment(self, genes):
        m = self.model
        sc = self.scenario
        flat = m.flat_index(genes)
        load = m.net_loads(flat, sc.output_load)
        delay = m.d0[flat] + m.res[flat] * load[m.gate_out_arr]

        arrival = np.zeros(len(m.nets))
        for gates, local, nets in m.levels:
            in_max = np.full(len(gates), -np.inf)
            np.maximum.at(in_max, local, arrival[nets])
            arrival[m.gate_out_arr[gates]] = in_max + delay[gates]
        worst = float(arrival[m.po_ids].max()) if m.po_ids else 0.0
        wns = sc.required_time - worst

        v2 = self.design.library.voltage ** 2
        f = sc.frequency
        switching = float(np.sum(0.5 * load * v2 * m.alpha * m.driven_mask)) * f
        alpha_out = m.alpha[m.gate_out_arr]
        internal = float(np.sum(m.energy[flat] * alpha_out)) * f
        leakage = float(np.sum(m.leak[flat]))
        area = math.fsum(m.area[flat].tolist())

        return Evaluation(d_wc=worst, wns=wns, timing_met=bool(wns >= 0),
                          switching=switching, internal=internal, leakage=leakage,
                          p_total=switching + internal + leakage, a_gate=area)


# ============================================================================
# INCREMENTAL TIMING
# ============================================================================

class IncrementalTimer:
    """
    Arrival times kept up to date under single-gate variant changes.

    `trial` answers "what would the worst arrival be" without committing;
    `commit` applies the change. Only the changed gate, the drivers of its
    input nets and their transitive fanout are re-timed.
    """

    def __init__(self, design, scenario, assignment=None, model=None):
        self.design = design
        self.scenario = scenario
        self.model = model or DesignModel(design)
        self.assignment = list(assignment if assignment is not None
                               else design.assignment)
        m = self.model
        flat = m.flat_index(self.assignment)
        self.load = m.net_loads(flat, scenario.output_load).tolist()
        self.delay = [0.0] * len(self.assignment)
        self.arrival = [0.0] * len(m.nets)
        for gi in design.topo_order:
            self.delay[gi] = self._gate_delay(gi, self.assignment[gi], self.load)
            self.arrival[m.gate_out[gi]] = max(
                self.arrival[n] for n in m.gate_in[gi]) + self.delay[gi]

    # -- helpers -------------------------------------------------------------

    def _variant(self, gi, k):
        return self.design.cells[gi].variants[k]

    def _gate_delay(self, gi, k, load):
        v = self._variant(gi, k)
        return v.intrinsic_delay + v.drive_resistance * load[self.model.gate_out[gi]]

    def _net_load(self, n, assignment):
        m = self.model
        caps = 0.0
        for gi in m.readers[n]:
            caps += self._variant(gi, assignment[gi]).input_cap_per_pin
        load = caps + self.design.library.wire_cap_per_fanout * m.fanout[n]
        if m.po_mask[n]:
            load += self.scenario.output_load
        return float(load)

    def _propagate(self, gi, k):
        m = self.model
        assignment = self.assignment
        old_k = assignment[gi]
        assignment[gi] = k
        try:
            new_load = {n: self._net_load(n, assignment) for n in set(m.gate_in[gi])}
        finally:
            assignment[gi] = old_k

        def load_of(n):
            return new_load.get(n, self.load[n])

        new_delay = {}
        seeds = {gi}
        for n in new_load:
            if m.driver[n] >= 0:
                seeds.add(m.driver[n])
        for g in seeds:
            v = self._variant(g, k if g == gi else assignment[g])
            new_delay[g] = v.intrinsic_delay + v.drive_resistance * load_of(m.gate_out[g])

        new_arrival = {}
        heap = [(m.topo_pos[g], g) for g in seeds]
        heapq.heapify(heap)
        queued = set(seeds)
        while heap:
            _, g = heapq.heappop(heap)
            arr = max(new_arrival.get(n, self.arrival[n]) for n in m.gate_in[g])
            arr += new_delay.get(g, self.delay[g])
            out = m.gate_out[g]
            if arr != self.arrival[out]:
                new_arrival[out] = arr
                for r in m.readers[out]:
                    if r not in queued:
                        queued.add(r)
                        heapq.heappush(heap, (m.topo_pos[r], r))
        return new_load, new_delay, new_arrival

    # -- queries -------------------------------------------------------------

    @property
    def worst_arrival(self):
        m = self.model
        return max((self.arrival[n] for n in m.po_ids), default=0.0)

    def trial(self, gi, k):
        """Worst arrival if gate gi used variant k"""
        _, _, new_arrival = self._propagate(gi, k)
        return max((new_arrival.get(n, self.arrival[n]) for n in self.model.po_ids),
                   default=0.0)

    def commit(self, gi, k):
        new_load, new_delay, new_arrival = self._propagate(gi, k)
        self.assignment[gi] = k
        for n, v in new_load.items():
            self.load[n] = v
        for g, v in new_delay.items():
            self.delay[g] = v
        for n, v in new_arrival.items():
            self.arrival[n] = v

    def power_delta(self, gi, k, frequency, voltage):
        """Change in total power if gate gi used variant k"""
        m = self.model
        old = self._variant(gi, self.assignment[gi])
        new = self._variant(gi, k)
        alpha_out = m.alpha[m.gate_out[gi]]
        delta = new.leakage_power - old.leakage_power
        delta += (new.internal_energy - old.internal_energy) * alpha_out * frequency
        d_cap = new.input_cap_per_pin - old.input_cap_per_pin
        for n in m.gate_in[gi]:
            if m.driver[n] >= 0:
                delta += 0.5 * d_cap * voltage ** 2 * frequency * m.alpha[n]
        return float(delta)

    def critical_gates(self):
        """Gates on every worst path: all latest outputs, every tied fanin"""
        m = self.model
        worst = self.worst_arrival
        stack = [m.driver[n] for n in m.po_ids
                 if self.arrival[n] == worst and m.driver[n] >= 0]
        seen = set()
        while stack:
            g = stack.pop()
            if g in seen:
                continue
            seen.add(g)
            ins = m.gate_in[g]
            latest = max(self.arrival[n] for n in ins)
            stack.extend(m.driver[n] for n in ins
                         if self.arrival[n] == latest and m.driver[n] >= 0)
        return sorted(seen)

    def trial_pair(self, first, k_first, second, k_second):
        """Worst arrival if both gates changed; the timer is left as it was"""
        old = self.assignment[first]
        self.commit(first, k_first)
        try:
            return self.trial(second, k_second)
        finally:
            self.commit(first, old)
