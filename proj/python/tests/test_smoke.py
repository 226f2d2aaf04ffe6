import json
from fractions import Fraction

import pytest

import rankone


def r23():
    return rankone.Tower.staircase((1, 2))


def test_heights_and_measures():
    t = r23()
    assert [t.height(n) for n in range(4)] == [1, 3, 12, 54]
    assert [t.column_measure(n) for n in range(4)] == [1, Fraction(3, 2), 2, Fraction(9, 4)]
    assert sum(t.mean_spacer(n) / t.height(n) for n in range(3)) == Fraction(23, 24)
    assert t.stage(1) == [0, 1, 2]


def test_worked_values():
    t = r23()
    b = t.level(1, 0)
    assert t.correlation(b, b, 0, 2)[1] == Fraction(3, 16)
    assert t.correlation(b, b, 3, 2)[1] == Fraction(1, 48)
    assert t.uniform_mixing_sum(3, b, 2)["value"] == Fraction(1, 12)


def test_sets_and_averages():
    t = r23()
    half = t.levels(1, [(0, 1)])
    assert half.count() == 1 and 0 in half and 1 not in half
    avg = t.ergodic_average([0, 1, 2, 3], half, 3)
    assert avg["value"] >= 0 and avg["terms"] == 4
    assert t.dynseq_average(2, 1, half, 3)["value"] == t.ergodic_average([0, 1, 2], half, 3)["value"]


def test_slicing_and_polynomials():
    t = r23()
    s = t.slicing(2, 1, 0, Fraction(1, 12))
    assert s["Q"] == 3
    assert all(ok for ok, info, _ in s["checks"].values() if not info)
    assert rankone.partial_sum_polynomial([0, 1], 2) == [1, 2]
    assert rankone.partial_sum_polynomial(["0", "0", "1"], 3)[-1] == 3


def test_errors():
    with pytest.raises(rankone.ConstructionError):
        rankone.Tower.staircase(1)
    with pytest.raises(rankone.DomainError):
        r23().level(1, 5)
    with pytest.raises(rankone.ConfigError):
        rankone.run("build", "family:\n  kind: spiral\n")


def test_run_command():
    cfg = "family:\n  kind: staircase\nstages: {first: 0, last: 3}\n"
    tables = rankone.run("build", cfg)
    assert tables["stages"].splitlines()[3].startswith("2,4,12,")
    doc = json.loads(rankone.run("build", cfg, "json")["json"])
    assert doc["tables"]["stages"]["rows"][3]["mu_C"] == "9/4"


def test_ornstein_deterministic():
    a = rankone.Tower.ornstein(5, (2, 1), (1, 3))
    b = rankone.Tower.ornstein(5, (2, 1), (1, 3))
    assert [a.stage(n) for n in range(5)] == [b.stage(n) for n in range(5)]
