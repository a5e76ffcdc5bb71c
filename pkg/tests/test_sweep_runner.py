"""Tests for ordered sweep evaluation."""

import time

import pytest
from pathlib import Path
import sys

sys.path.insert(0, str(Path(__file__).parent.parent / "src"))

from teg_sim.errors import GeometryError, InvalidInputError
from teg_sim.sweep_runner import run_rows


def slow_square(x):
    # later items finish first
    time.sleep(0.01 * (5 - x))
    return x * x


def fail_on_three(x):
    if x == 3:
        raise GeometryError("three is not allowed")
    return x


class TestRunRows:
    def test_serial_order(self):
        outcomes = run_rows(slow_square, [1, 2, 3])
        assert [o.value for o in outcomes] == [1, 4, 9]

    def test_parallel_results_in_input_order(self):
        outcomes = run_rows(slow_square, [1, 2, 3, 4], parallelism=4)
        assert [o.index for o in outcomes] == [0, 1, 2, 3]
        assert [o.value for o in outcomes] == [1, 4, 9, 16]

    def test_failing_row_recorded(self):
        outcomes = run_rows(fail_on_three, [1, 3, 5], parallelism=2)
        assert [o.ok for o in outcomes] == [True, False, True]
        assert outcomes[1].error == "three is not allowed"
        assert outcomes[2].value == 5

    def test_unexpected_errors_propagate(self):
        def broken(x):
            raise KeyError(x)

        with pytest.raises(KeyError):
            run_rows(broken, [1])

    def test_empty_sweep_rejected(self):
        with pytest.raises(InvalidInputError):
            run_rows(slow_square, [])
