import os
from fractions import Fraction
from pathlib import Path

import pytest

import usec

POWERS = [1, 2, 4, 8, 16, 32]
SCENARIOS = Path(os.environ.get("USEC_SOURCE_DIR", Path(__file__).resolve().parents[2])) / "scenarios"


def test_worked_examples():
    cyc = usec.solve(usec.cyclic_placement(6, 3), POWERS)
    assert cyc["c_star"] == Fraction(1, 7)
    assert cyc["certificate"]["submatrices"] == [3]
    assert cyc["certificate"]["machines"] == [1, 2, 3]
    rep = usec.solve(usec.repetition_placement(6, 6, 3), POWERS)
    assert rep["c_star"] == Fraction(3, 7)
    assert all(sum(row) == 1 for row in rep["loads"])


def test_speed_types():
    p = usec.repetition_placement(2, 1, 2)
    for speeds in ([1, 3], [1.0, 3.0], ["1", "3"], [Fraction(1), Fraction(3)]):
        assert usec.solve(p, speeds)["c_star"] == Fraction(1, 4)


def test_placements():
    p = usec.cyclic_placement(6, 3)
    assert p.stored_by(6) == [1, 2, 6]
    assert p.holders(3) == [1, 2, 3]
    assert usec.man_placement(6, 3).submatrices == 20
    assert usec.parse_placement(p.to_text()) == p
    with pytest.raises(usec.ParseError):
        usec.parse_placement("2 1 2\n1: 1\n2: x\n")


def test_filling():
    sub = usec.fill_submatrix([Fraction(2, 3)] * 3, 2, 6)
    assert sub["alphas"] == [Fraction(1, 3)] * 3
    assert sub["fill_sets"] == [[1, 3], [1, 2], [2, 3]]
    assert [t[:2] for t in sub["tasks"]] == [(1, 2), (3, 4), (5, 6)]
    cyc = usec.homogeneous_cyclic(3, 1, 6)
    assert [t[2] for t in cyc["tasks"]] == [[1, 2], [2, 3], [3, 1]]


def test_assign_and_verify():
    csv = usec.assign(usec.cyclic_placement(6, 3), POWERS, stragglers=2, rows=30)
    assert csv.startswith("# usec-assignment machines=6 submatrices=6 rows_per_submatrix=30")
    assert usec.verify_straggler_tolerance(csv, 2) is None
    bad = usec.verify_straggler_tolerance(csv, 3)
    assert bad is not None and len(bad["stragglers"]) == 3


def test_errors():
    with pytest.raises(usec.InfeasibleError):
        usec.solve(usec.repetition_placement(4, 2, 2), [1, 1, 1, 1], available=[1, 2, 3], stragglers=1)
    with pytest.raises(usec.ValidationError):
        usec.solve(usec.cyclic_placement(3, 2), [1, 0, 1])


def test_trials_and_simulation():
    r = usec.run_trials(trials=50, seed=3)
    assert set(r["summaries"]) == {"repetition", "cyclic", "man"}
    assert len(r["records"]) == 150
    assert r == usec.run_trials(trials=50, seed=3)
    sim = usec.simulate(str(SCENARIOS / "preemption.json"))
    assert len(sim["heterogeneous"]["nmse"]) == 4
    assert sim["total_time_heterogeneous"] <= sim["total_time_homogeneous"]
