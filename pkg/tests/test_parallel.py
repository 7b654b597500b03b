"""Tests for population evaluation and its cache."""
import pytest

from moeda.core.errors import EvaluationError
from moeda.core.evaluator import DesignEvaluator
from moeda.core.netlist import Chromosome
from moeda.core.parallel import PopulationEvaluator

MINIMUM = Chromosome((0,) * 6)


class TestPopulationEvaluator:
    def test_input_order_and_cache(self, c17_design, scenario):
        population = [MINIMUM, Chromosome((1, 0, 0, 0, 0, 0)), MINIMUM]
        with PopulationEvaluator(c17_design, scenario) as evaluator:
            results = evaluator.evaluate(population)
            assert evaluator.hits == 1
            evaluator.evaluate(population)
            assert evaluator.hits == 4
        reference = DesignEvaluator(c17_design, scenario)
        assert results == [reference(c) for c in population]

    def test_invalid_chromosome_names_its_position(self, c17_design, scenario):
        population = [MINIMUM, MINIMUM, Chromosome((0, 0, 11, 0, 0, 0))]
        with pytest.raises(EvaluationError) as exc:
            PopulationEvaluator(c17_design, scenario).evaluate(population, generation=4)
        assert exc.value.individual == 2
        assert exc.value.generation == 4

    def test_failure_blames_the_failing_individual(self, c17_design, scenario):
        bad = (0, 3, 0, 0, 0, 0)
        evaluator = PopulationEvaluator(c17_design, scenario)
        evaluate_assignment = evaluator.local.evaluate_assignment

        def failing(genes):
            if genes == bad:
                raise FloatingPointError("overflow in arrival times")
            return evaluate_assignment(genes)

        evaluator.local.evaluate_assignment = failing
        population = [MINIMUM, Chromosome((2, 0, 0, 0, 0, 0)), MINIMUM, Chromosome(bad)]
        with pytest.raises(EvaluationError) as exc:
            evaluator.evaluate(population, generation=7)
        assert exc.value.individual == 3
        assert exc.value.generation == 7
        assert "overflow" in str(exc.value)
