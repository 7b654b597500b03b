"""Tests for timing, power and area evaluation."""
import itertools

import pytest

from moeda.core.errors import InvalidConstraintError
from moeda.core.evaluator import (
    DesignEvaluator, IncrementalTimer, ObjectiveVector, TimingScenario, assess,
    compute_arrival_times, evaluate, gate_delay, net_load, propagate_probabilities,
    total_area, total_power, worst_case_delay
)
from moeda.core.netlist import Chromosome, apply_chromosome, map_to_library, parse_bench

from conftest import library_for, random_dag


def random_chromosome(design, rng):
    return Chromosome(tuple(int(rng.integers(n)) for n in design.variant_counts))


def longest_path_by_enumeration(design, scenario):
    """Max over every PI->PO path of the summed stage delays"""
    netlist = design.netlist
    pis = set(netlist.primary_inputs)

    def walk(net):
        if net in pis:
            yield 0.0
            return
        gi = netlist.driver_of[net]
        d = gate_delay(design.variant(gi), net_load(design, net, scenario))
        for source in netlist.gates[gi].inputs:
            for rest in walk(source):
                yield rest + d

    return max(max(walk(po)) for po in netlist.primary_outputs)


# =============================================================================
# Scenario
# =============================================================================

class TestTimingScenario:
    def test_from_constraints(self):
        sc = TimingScenario.from_constraints(4e-9, 2.5e-9)
        assert sc.required_time == pytest.approx(1.5e-9)
        assert sc.frequency == pytest.approx(250e6)

    def test_invalid_required_time(self):
        with pytest.raises(InvalidConstraintError):
            TimingScenario(4e-9, 0.0)
        with pytest.raises(InvalidConstraintError):
            TimingScenario.from_constraints(4e-9, 4e-9)

    def test_negative_load(self):
        with pytest.raises(InvalidConstraintError):
            TimingScenario(4e-9, 4e-9, -1e-15)


# =============================================================================
# Loads and stage delay
# =============================================================================

class TestNetLoad:
    def test_internal_net(self, c17_design, scenario):
        """Net 11 feeds two NAND2 pins"""
        v = c17_design.variant(0)
        wire = c17_design.library.wire_cap_per_fanout
        assert net_load(c17_design, "11", scenario) == pytest.approx(
            2 * v.input_cap_per_pin + 2 * wire)

    def test_primary_output_gets_output_load(self, c17_design):
        sc = TimingScenario(4e-9, 4e-9, output_load=7e-15)
        assert net_load(c17_design, "22", sc) == pytest.approx(7e-15)

    def test_unread_net_is_unloaded(self, c17_design, scenario):
        assert net_load(c17_design, "23", scenario) == 0.0

    def test_gate_delay_formula(self, c17_design):
        v = c17_design.variant(0)
        assert gate_delay(v, 2e-15) == pytest.approx(v.intrinsic_delay + v.drive_resistance * 2e-15)

    def test_load_monotonicity(self, c17_design, scenario):
        """Upsizing a reader never speeds up its driver's stage"""
        driver = 1  # gate "11", read by gates 2 and 3
        before = gate_delay(c17_design.variant(driver), net_load(c17_design, "11", scenario))
        for k in range(1, 11):
            sized = apply_chromosome(c17_design, Chromosome((0, 0, k, 0, 0, 0)))
            after = gate_delay(sized.variant(driver), net_load(sized, "11", scenario))
            assert after >= before
            before = after


# =============================================================================
# Arrival times
# =============================================================================

class TestComputeArrivalTimes:
    def test_c17_matches_path_enumeration(self, c17_design, scenario, rng):
        for _ in range(10):
            design = apply_chromosome(c17_design, random_chromosome(c17_design, rng))
            report = compute_arrival_times(design, scenario)
            assert report.worst_arrival == pytest.approx(
                longest_path_by_enumeration(design, scenario), rel=1e-12)

    def test_random_dags_match_path_enumeration(self, rng):
        sc = TimingScenario(4e-9, 4e-9, output_load=3e-15)
        for _ in range(200):
            netlist = random_dag(rng, int(rng.integers(2, 16)))
            design = map_to_library(netlist, library_for(netlist))
            design = apply_chromosome(design, random_chromosome(design, rng))
            report = compute_arrival_times(design, sc)
            assert report.worst_arrival == pytest.approx(
                longest_path_by_enumeration(design, sc), rel=1e-12)

    def test_primary_inputs_arrive_at_zero(self, c17_design, scenario):
        report = compute_arrival_times(c17_design, scenario)
        assert all(report.arrival[n] == 0.0 for n in c17_design.netlist.primary_inputs)

    def test_critical_path_tie_break(self):
        """Equal parallel paths resolve to the smaller gate indices"""
        netlist = parse_bench("INPUT(a)\nINPUT(b)\nOUTPUT(y)\n"
                              "n0 = NOT(a)\nn1 = NOT(b)\ny = AND(n0, n1)\n")
        design = map_to_library(netlist, library_for(netlist))
        report = compute_arrival_times(design, TimingScenario(4e-9, 4e-9))
        assert report.critical_path == (0, 2)

    def test_wns_identity(self, c17_design):
        sc = TimingScenario(4e-9, 0.05e-9)
        report = compute_arrival_times(c17_design, sc)
        d_wc, met = worst_case_delay(report, sc)
        assert d_wc + report.wns == pytest.approx(sc.required_time)
        assert met is (report.wns >= 0)
        assert not met


# =============================================================================
# Power
# =============================================================================

class TestPropagateProbabilities:
    def test_nand_of_half_inputs(self, c17_design):
        probs = propagate_probabilities(c17_design)
        assert probs["10"] == pytest.approx((0.75, 0.375))

    def test_xor_keeps_half(self, rca2_design):
        probs = propagate_probabilities(rca2_design)
        assert probs["x0"][0] == pytest.approx(0.5)
        assert probs["g0"][0] == pytest.approx(0.25)

    def test_ranges(self, rng):
        for _ in range(50):
            netlist = random_dag(rng, 20)
            design = map_to_library(netlist, library_for(netlist))
            for p, alpha in propagate_probabilities(design).values():
                assert 0.0 <= p <= 1.0
                assert 0.0 <= alpha <= 0.5


class TestTotalPower:
    def test_switching_counts_gate_driven_nets_only(self, c17_design, scenario):
        probs = propagate_probabilities(c17_design)
        v2 = c17_design.library.voltage ** 2
        expected = sum(0.5 * net_load(c17_design, g.output, scenario) * v2
                       * scenario.frequency * probs[g.output][1]
                       for g in c17_design.netlist.gates)
        assert total_power(c17_design, scenario).switching == pytest.approx(expected)

    def test_total_is_sum(self, c17_design, scenario):
        p = total_power(c17_design, scenario)
        assert p.total == p.switching + p.internal + p.leakage

    def test_leakage_is_sum_of_cells(self, c17_design, scenario):
        expected = sum(c17_design.variant(i).leakage_power for i in range(6))
        assert total_power(c17_design, scenario).leakage == pytest.approx(expected)


# =============================================================================
# Full evaluation
# =============================================================================

class TestDesignEvaluator:
    def test_matches_reference_routines(self, rca2_design, rng):
        sc = TimingScenario(4e-9, 0.3e-9, output_load=2e-15)
        fast = DesignEvaluator(rca2_design, sc)
        for _ in range(50):
            c = random_chromosome(rca2_design, rng)
            got, ref = fast(c), assess(rca2_design, c, sc)
            assert got.d_wc == pytest.approx(ref.d_wc, rel=1e-12)
            assert got.wns == pytest.approx(ref.wns, rel=1e-9, abs=1e-21)
            assert got.timing_met == (got.wns >= 0)
            assert got.p_total == pytest.approx(ref.p_total, rel=1e-12)
            assert got.a_gate == pytest.approx(ref.a_gate, rel=1e-12)

    def test_every_two_variant_assignment_matches_reference(self, rca2):
        """All 2^10 rca2 designs over {D1, D8}"""
        design = map_to_library(rca2, library_for(rca2, ("D1", "D8")))
        sc = TimingScenario(4e-9, 0.1e-9, output_load=3e-15)
        fast = DesignEvaluator(design, sc)
        for genes in itertools.product((0, 1), repeat=10):
            c = Chromosome(genes)
            got, ref = fast(c), assess(design, c, sc)
            assert got.d_wc == pytest.approx(ref.d_wc, rel=1e-12)
            assert got.wns == pytest.approx(ref.wns, rel=1e-9, abs=1e-21)
            assert got.p_total == pytest.approx(ref.p_total, rel=1e-12)
            assert got.a_gate == pytest.approx(ref.a_gate, rel=1e-12)

    def test_evaluate_returns_objectives(self, c17_design, scenario):
        obj = evaluate(c17_design, Chromosome((0,) * 6), scenario)
        assert isinstance(obj, ObjectiveVector)
        assert obj.a_gate == pytest.approx(total_area(c17_design))

    def test_deterministic(self, c17_design, scenario, rng):
        c = random_chromosome(c17_design, rng)
        assert DesignEvaluator(c17_design, scenario)(c) == DesignEvaluator(c17_design, scenario)(c)

    def test_frequency_linearity(self, rca2_design, rng):
        """Dynamic power doubles exactly with frequency; leakage is unchanged"""
        c = random_chromosome(rca2_design, rng)
        slow = DesignEvaluator(rca2_design, TimingScenario(4e-9, 1e-9))(c)
        fast = DesignEvaluator(rca2_design, TimingScenario(2e-9, 1e-9))(c)
        assert fast.switching == 2 * slow.switching
        assert fast.internal == 2 * slow.internal
        assert fast.leakage == slow.leakage
        assert fast.p_total - fast.leakage == pytest.approx(
            2 * (slow.p_total - slow.leakage), rel=1e-9)

    def test_area_additivity(self, rca2_design, rng):
        evaluator = DesignEvaluator(rca2_design, TimingScenario(4e-9, 1e-9))
        for _ in range(20):
            genes = list(random_chromosome(rca2_design, rng))
            i = int(rng.integers(len(genes)))
            before = evaluator(Chromosome(tuple(genes)))
            old = genes[i]
            genes[i] = (old + 1) % rca2_design.variant_counts[i]
            after = evaluator(Chromosome(tuple(genes)))
            variants = rca2_design.cells[i].variants
            assert after.a_gate - before.a_gate == pytest.approx(
                variants[genes[i]].area - variants[old].area, rel=1e-12, abs=1e-12)

    def test_timing_failure_is_not_fatal(self, c17_design):
        ev = DesignEvaluator(c17_design, TimingScenario(4e-9, 1e-12))(Chromosome((0,) * 6))
        assert not ev.timing_met
        assert ev.d_wc > 0


# =============================================================================
# Incremental timing
# =============================================================================

class TestIncrementalTimer:
    def test_trial_matches_full_evaluation(self, rng):
        sc = TimingScenario(4e-9, 4e-9, output_load=5e-15)
        for _ in range(30):
            netlist = random_dag(rng, 20)
            design = map_to_library(netlist, library_for(netlist))
            timer = IncrementalTimer(design, sc)
            full = DesignEvaluator(design, sc)
            for _ in range(5):
                gi = int(rng.integers(len(netlist.gates)))
                k = int(rng.integers(design.variant_counts[gi]))
                genes = list(timer.assignment)
                genes[gi] = k
                expected = full(Chromosome(tuple(genes))).d_wc
                assert timer.trial(gi, k) == pytest.approx(expected, rel=1e-12)
                timer.commit(gi, k)
                assert timer.worst_arrival == pytest.approx(expected, rel=1e-12)

    def test_power_delta_matches_full_evaluation(self, rca2_design, rng):
        sc = TimingScenario(4e-9, 4e-9)
        full = DesignEvaluator(rca2_design, sc)
        genes = list(random_chromosome(rca2_design, rng))
        timer = IncrementalTimer(rca2_design, sc, assignment=genes)
        for gi in range(len(genes)):
            k = (genes[gi] + 3) % rca2_design.variant_counts[gi]
            changed = list(genes)
            changed[gi] = k
            expected = (full(Chromosome(tuple(changed))).p_total
                        - full(Chromosome(tuple(genes))).p_total)
            got = timer.power_delta(gi, k, sc.frequency, rca2_design.library.voltage)
            assert got == pytest.approx(expected, rel=1e-9, abs=1e-18)

    def test_critical_gates_cover_every_worst_output(self, c17_design):
        """With a shared output load both C17 outputs tie for the worst arrival"""
        sc = TimingScenario(4e-9, 4e-9, output_load=10e-15)
        timer = IncrementalTimer(c17_design, sc)
        gates = timer.critical_gates()
        m = timer.model
        worst_drivers = {m.driver[n] for n in m.po_ids if timer.arrival[n] == timer.worst_arrival}
        assert len(worst_drivers) == 2
        assert worst_drivers <= set(gates)
        assert gates == sorted(set(gates))
        for g in gates:
            out = m.gate_out[g]
            assert timer.arrival[out] <= timer.worst_arrival
