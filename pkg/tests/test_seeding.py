"""Tests for required time, greedy sizing, power recovery and sweeps."""
from types import SimpleNamespace

import pytest

from moeda.core.errors import InvalidConfigError, InvalidConstraintError, TimingNotMetError
from moeda.core.evaluator import DesignEvaluator, ObjectiveVector, TimingScenario
from moeda.core.library import variants_of
from moeda.core.moea import dominates
from moeda.core.netlist import Chromosome, Gate, Netlist, apply_chromosome, map_to_library
from moeda.core.seeding import (
    SeedSolution, SweepConfig, constraint_sweep, find_timing_limit,
    greedy_timing_sizer, power_recovery, required_time, resolve_output_load,
    size_for, syn_frontier
)

from conftest import library_for, single_inverter

HEAVY_LOAD = 40e-15


@pytest.fixture
def inverter():
    netlist = single_inverter()
    return map_to_library(netlist, library_for(netlist))


@pytest.fixture
def heavy():
    return TimingScenario(4e-9, 4e-9, output_load=HEAVY_LOAD)


def seed(i, objectives):
    return SeedSolution(required_time=1e-9, chromosome=Chromosome((i,)),
                        evaluation=SimpleNamespace(objectives=ObjectiveVector(*objectives)),
                        timing_met=True, seed_id=i)


# =============================================================================
# Constraints
# =============================================================================

class TestRequiredTime:
    def test_examples(self):
        assert required_time(4e-9, 0.0) == 4e-9
        assert required_time(4e-9, 2.5e-9) == pytest.approx(1.5e-9)

    def test_output_delay_equal_to_clock(self):
        with pytest.raises(InvalidConstraintError):
            required_time(4e-9, 4e-9)
        with pytest.raises(InvalidConstraintError):
            required_time(4e-9, -1e-9)


class TestOutputLoad:
    def test_labels(self, inverter):
        lib = inverter.library
        inv = variants_of(lib, "NOT", 1)
        assert resolve_output_load("NONE", lib) == 0.0
        assert resolve_output_load("d1", lib) == inv[1].input_cap_per_pin
        assert resolve_output_load("D8", lib) == inv[6].input_cap_per_pin
        assert resolve_output_load(3e-15, lib) == 3e-15

    def test_unknown_label(self, inverter):
        with pytest.raises(InvalidConfigError):
            resolve_output_load("D3X", inverter.library)


class TestSweepConfig:
    def test_descending_points(self):
        points = SweepConfig(1.5e-9, 0.51e-9, 100).required_times()
        assert len(points) == 100
        assert points[0] == pytest.approx(1.5e-9)
        assert points[-1] == pytest.approx(0.51e-9)
        assert all(a > b for a, b in zip(points, points[1:]))

    @pytest.mark.parametrize("args", [(1e-9, 1e-9, 10), (1e-9, 2e-9, 10), (1e-9, 0.0, 10),
                                      (2e-9, 1e-9, 1)])
    def test_invalid(self, args):
        with pytest.raises(InvalidConfigError):
            SweepConfig(*args)


# =============================================================================
# Greedy sizing
# =============================================================================

class TestGreedyTimingSizer:
    def test_relaxed_constraint_needs_no_moves(self, rca2_design, scenario):
        result = greedy_timing_sizer(rca2_design, 4e-9, scenario)
        assert result.timing_met
        assert result.chromosome == Chromosome((0,) * 10)

    def test_inverter_stops_at_smallest_meeting_variant(self, inverter, heavy):
        """Closed form: smallest strength with d0 + R * C_L <= T_r"""
        tr = 50e-12
        variants = variants_of(inverter.library, "NOT", 1)
        expected = next(k for k, v in enumerate(variants)
                        if v.intrinsic_delay + v.drive_resistance * HEAVY_LOAD <= tr)
        result = greedy_timing_sizer(inverter, tr, heavy)
        assert result.timing_met
        assert result.chromosome == Chromosome((expected,))
        assert variants[expected].strength_label == "D4"

    def test_impossible_constraint_is_a_fixed_point(self, rca2_design):
        sc = TimingScenario(4e-9, 1e-12, output_load=5e-15)
        result = greedy_timing_sizer(rca2_design, 1e-12, sc)
        assert not result.timing_met
        evaluator = DesignEvaluator(rca2_design, sc)
        genes = list(result.chromosome)
        for gi, k in enumerate(genes):
            if k + 1 < rca2_design.variant_counts[gi]:
                trial = list(genes)
                trial[gi] = k + 1
                assert evaluator(Chromosome(tuple(trial))).d_wc >= result.evaluation.d_wc

    def test_wns_improves_until_met(self, rca2_design):
        sc = TimingScenario(4e-9, 4e-9, output_load=5e-15)
        relaxed = DesignEvaluator(rca2_design, sc)(Chromosome((0,) * 10)).d_wc
        result = greedy_timing_sizer(rca2_design, 0.8 * relaxed, sc)
        assert result.timing_met
        assert result.evaluation.d_wc <= 0.8 * relaxed

    def test_tied_outputs_are_sized_together(self):
        gates = (Gate("y1", "NOT", ("a",), "y1"), Gate("y2", "NOT", ("b",), "y2"))
        netlist = Netlist(("a", "b"), ("y1", "y2"), gates, name="twin")
        design = map_to_library(netlist, library_for(netlist))
        sc = TimingScenario(4e-9, 4e-9, output_load=20e-15)
        relaxed = DesignEvaluator(design, sc)(Chromosome((0, 0))).d_wc
        result = greedy_timing_sizer(design, 0.5 * relaxed, sc)
        assert result.timing_met
        genes = list(result.chromosome)
        assert genes[0] == genes[1] > 0

    @pytest.mark.parametrize("fraction", [0.7, 0.6, 0.5])
    def test_c17_with_tied_outputs_meets_timing(self, c17_design, fraction):
        """Both C17 outputs share the worst arrival; all-max delay is far below"""
        sc = TimingScenario(4e-9, 4e-9, output_load=10e-15)
        evaluator = DesignEvaluator(c17_design, sc)
        relaxed = evaluator(Chromosome((0,) * 6)).d_wc
        fastest = evaluator(Chromosome((10,) * 6)).d_wc
        assert fastest < 0.5 * relaxed
        result = greedy_timing_sizer(c17_design, fraction * relaxed, sc)
        assert result.timing_met
        assert result.evaluation.d_wc <= fraction * relaxed


class TestPowerRecovery:
    def test_generous_constraint_returns_minimum(self, rca2_design, scenario):
        upsized = Chromosome((5,) * 10)
        assert power_recovery(rca2_design, upsized, 4e-9, scenario) == Chromosome((0,) * 10)

    def test_slack_free_input_unchanged(self, inverter, heavy):
        chromosome = Chromosome((4,))
        tr = DesignEvaluator(inverter, heavy)(chromosome).d_wc
        assert power_recovery(inverter, chromosome, tr, heavy) == chromosome

    def test_requires_met_timing(self, inverter, heavy):
        with pytest.raises(TimingNotMetError):
            power_recovery(inverter, Chromosome((0,)), 10e-12, heavy)

    def test_saves_power_and_keeps_timing(self, rca2_design, rng):
        sc = TimingScenario(4e-9, 4e-9, output_load=5e-15)
        evaluator = DesignEvaluator(rca2_design, sc)
        for _ in range(10):
            genes = Chromosome(tuple(int(rng.integers(3, 11)) for _ in range(10)))
            tr = evaluator(genes).d_wc * 1.2
            recovered = power_recovery(rca2_design, genes, tr, sc)
            before = evaluator(genes)
            after = DesignEvaluator(rca2_design, sc.with_required_time(tr))(recovered)
            assert after.p_total <= before.p_total
            assert after.wns >= 0


# =============================================================================
# Sweeps
# =============================================================================

class TestConstraintSweep:
    def test_two_relaxed_points(self, rca2_design):
        seeds = constraint_sweep(rca2_design, SweepConfig(4e-9, 3e-9, 2))
        assert len(seeds) == 2
        assert [s.seed_id for s in seeds] == [0, 1]
        assert all(s.timing_met for s in seeds)
        assert all(len(s.chromosome) == 10 for s in seeds)

    def test_failures_are_kept_and_flagged(self, rca2_design):
        seeds = constraint_sweep(rca2_design, SweepConfig(4e-9, 1e-12, 3, "D8"))
        assert len(seeds) == 3
        assert seeds[0].timing_met
        assert not seeds[-1].timing_met

    def test_sized_area_grows_as_constraint_tightens(self, inverter):
        seeds = constraint_sweep(inverter, SweepConfig(300e-12, 15e-12, 20, HEAVY_LOAD))
        areas = [apply_chromosome(inverter, s.sized_chromosome).variant(0).area for s in seeds]
        assert all(a <= b for a, b in zip(areas, areas[1:]))


class TestSynFrontier:
    def test_identical_seeds(self):
        seeds = [seed(i, (1.0, 2.0, 3.0)) for i in range(4)]
        assert syn_frontier(seeds) == [seeds[0]]

    def test_chain(self):
        seeds = [seed(0, (3, 3, 3)), seed(1, (1, 1, 1)), seed(2, (2, 2, 2))]
        assert syn_frontier(seeds) == [seeds[1]]

    def test_matches_pairwise_oracle(self, rng):
        for _ in range(50):
            seeds = [seed(i, tuple(p)) for i, p in enumerate(rng.random((30, 3)))]
            frontier = syn_frontier(seeds)
            expected = [s for s in seeds
                        if not any(dominates(o.objectives, s.objectives) for o in seeds)]
            assert {s.seed_id for s in frontier} == {s.seed_id for s in expected}
            delays = [s.objectives.d_wc for s in frontier]
            assert delays == sorted(delays)
            for a in frontier:
                assert not any(dominates(b.objectives, a.objectives) for b in frontier)


class TestFindTimingLimit:
    def test_tightest_met_seed(self, rca2_design):
        sc = TimingScenario(4e-9, 4e-9, output_load=5e-15)
        step = 0.02e-9
        best = find_timing_limit(rca2_design, sc, step)
        assert best.timing_met
        tighter = size_for(rca2_design, best.required_time - step, sc)
        assert not tighter.timing_met or best.required_time - step <= 0

    def test_rejects_bad_step(self, rca2_design, scenario):
        with pytest.raises(InvalidConfigError):
            find_timing_limit(rca2_design, scenario, 0.0)

    def test_default_step_follows_relaxed_delay(self, c17_design):
        sc = TimingScenario(4e-9, 4e-9)
        relaxed = DesignEvaluator(c17_design, sc)(Chromosome((0,) * 6)).d_wc
        best = find_timing_limit(c17_design, sc)
        assert best.timing_met
        assert best.required_time < 0.8 * relaxed
        assert best.chromosome != Chromosome((0,) * 6)
