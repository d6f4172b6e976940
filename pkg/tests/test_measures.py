import json
from fractions import Fraction

import pytest

from clpart.measures import (
    CONST_DEFORMED,
    CONST_EXACT,
    CONST_ODD,
    MassValue,
    deformed_series_check,
    inverse_odd_constant_upper,
    pmf,
    pmf_deformed,
    pmf_parts,
    pmf_size,
    pmf_truncated,
    pmf_via_conjugate,
    size_length_layers,
    size_tail_bound,
    solve_parts_recursion,
    tabulate,
    truncated_series_check,
)
from clpart.partitions import Partition, enumerate_partitions


def test_pmf_examples():
    assert pmf(Partition(), 2).rational == 1
    assert pmf(Partition([1]), 2).rational == Fraction(1, 2)
    assert pmf(Partition([1, 1]), 2).rational == Fraction(1, 6)
    assert pmf(Partition([2]), 3).rational == Fraction(1, 9)
    assert pmf(Partition(), 2).constant == CONST_ODD


def test_pmf_via_conjugate_examples():
    assert pmf_via_conjugate(Partition(), 2).rational == 1
    assert pmf_via_conjugate(Partition([1]), 2).rational == Fraction(1, 2)
    assert pmf_via_conjugate(Partition([1, 1]), 2).rational == Fraction(1, 6)


def test_form_equivalence_small():
    for p in (2, 3, 5):
        for n in range(9):
            for lam in enumerate_partitions(n):
                assert pmf(lam, p).rational == pmf_via_conjugate(lam, p).rational


def test_pmf_denominator_uses_symmetry_weight():
    # the cached per-measure weight must agree with the standalone d_lambda
    from clpart.qseries import d_lambda

    for p in (2, 3):
        for n in range(11):
            for lam in enumerate_partitions(n):
                expected = 1 / (Fraction(p) ** (lam.n_stat() + lam.size) * d_lambda(lam, p))
                assert pmf(lam, p).rational == expected


def test_pmf_parts_examples_and_sum_oracle():
    assert pmf_parts(0, 2).rational == 1
    assert pmf_parts(1, 2).rational == 1
    assert pmf_parts(2, 2).rational == Fraction(1, 3)
    # oracle for a=1: single-part masses are geometric, sum_k p^-k = 1/(p-1)
    partial = sum(pmf(Partition([k]), 2).rational for k in range(1, 41))
    assert partial < 1 <= partial + Fraction(1, 2**40) * 2


def test_parts_marginal_containment():
    # sum over exactly-a-part partitions of size <= 40 reaches pmf_parts
    # up to the rigorous size-tail bound
    layers = size_length_layers(2, 40)
    bound = inverse_odd_constant_upper(2) * size_tail_bound(2, 40)
    for a in range(6):
        partial = sum(v for (n, length), v in layers.items() if length == a)
        target = pmf_parts(a, 2).rational
        assert partial <= target <= partial + bound


def test_pmf_size_examples():
    assert pmf_size(0, 2).rational == 1
    assert pmf_size(1, 2).rational == Fraction(1, 2)
    assert pmf_size(2, 2).rational == Fraction(5, 12)


def test_size_marginal_exact():
    for p in (2, 3, 5):
        for n in range(13):
            total = sum(pmf(lam, p).rational for lam in enumerate_partitions(n))
            assert total == pmf_size(n, p).rational


def test_pmf_deformed_examples_and_domain():
    u = Fraction(1, 2)
    assert pmf_deformed(Partition(), 2, u).rational == 1
    assert pmf_deformed(Partition([1]), 2, u).rational == Fraction(1, 4)
    mass = pmf_deformed(Partition([2, 1]), 3, u)
    assert mass.constant == CONST_DEFORMED and mass.u == u
    with pytest.raises(ValueError):
        pmf_deformed(Partition([1]), 2, 2)
    with pytest.raises(ValueError):
        pmf_deformed(Partition([1]), 2, 0)


def test_deformed_at_u_one_matches_base_measure():
    for p in (2, 3):
        for n in range(13):
            for lam in enumerate_partitions(n):
                assert pmf_deformed(lam, p, 1).rational == pmf(lam, p).rational


def test_pmf_truncated_examples():
    assert pmf_truncated(Partition(), 2, 1) == Fraction(2, 3)
    for k in range(1, 21):
        expected = Fraction(2, 3) * Fraction(1, 2) ** (k + 1)
        assert pmf_truncated(Partition([k]), 2, 1) == expected
    with pytest.raises(ValueError):
        pmf_truncated(Partition([1, 1]), 2, 1)


def test_truncated_r1_total_is_geometric():
    # the whole r=1 family is (2/3) * (1, 1/4, 1/8, ...): total mass exactly 1
    total = pmf_truncated(Partition(), 2, 1)
    total += sum(pmf_truncated(Partition([k]), 2, 1) for k in range(1, 41))
    assert 1 - total == Fraction(2, 3) * Fraction(1, 2) ** 41


def test_solve_parts_recursion_examples():
    values = solve_parts_recursion(2, 0)
    assert len(values) == 1 and values[0].rational == 1
    assert solve_parts_recursion(2, 1)[1].rational == 1
    for p in (2, 3, 5):
        for a, mass in enumerate(solve_parts_recursion(p, 12)):
            assert mass.rational == pmf_parts(a, p).rational


def test_mass_value_validation_and_enclosure():
    with pytest.raises(ValueError):
        MassValue(Fraction(1), "bogus")
    with pytest.raises(ValueError):
        MassValue(Fraction(1), CONST_ODD)  # missing p
    with pytest.raises(ValueError):
        MassValue(Fraction(1), CONST_DEFORMED, p=2)  # missing u
    exact = MassValue(Fraction(2, 3))
    assert exact.constant == CONST_EXACT
    assert exact.enclosure().mid == Fraction(2, 3) and exact.enclosure().rad == 0
    tagged = MassValue(Fraction(1, 6), CONST_ODD, p=2)
    enc = tagged.enclosure(Fraction(1, 10**12))
    assert abs(enc.mid - Fraction("0.0699037403")) < Fraction(1, 10**9)


def test_tabulate_base_measure_trivial_and_normalized():
    dist = tabulate(2, 0)
    assert set(dist.entries) == {Partition()}
    assert dist.entries[Partition()].rational == 1
    # the unit mass minus the empty partition's mass must fit inside the tail
    assert dist.tail_mass.upper >= 1 - float(0) - dist.entries[Partition()].enclosure().upper
    for p in (2, 3):
        dist = tabulate(p, 12)
        total = dist.normalization_enclosure()
        assert total.contains(1)


def test_tabulate_deformed_and_truncated_normalized():
    dist = tabulate(2, 12, measure="deformed", u=Fraction(1, 2))
    assert dist.normalization_enclosure().contains(1)
    dist = tabulate(3, 12, measure="deformed", u=Fraction(2))
    assert dist.normalization_enclosure().contains(1)
    dist = tabulate(2, 20, measure="truncated", r=1)
    assert dist.normalization_enclosure().contains(1)
    for k in range(1, 21):
        assert dist.entries[Partition([k])].rational == Fraction(2, 3) * Fraction(1, 2) ** (k + 1)
    dist = tabulate(2, 14, measure="truncated", r=2)
    assert dist.normalization_enclosure().contains(1)
    assert all(lam.length <= 2 for lam in dist.entries)


def test_tabulate_argument_validation():
    with pytest.raises(ValueError):
        tabulate(2, 100)
    with pytest.raises(ValueError):
        tabulate(2, 5, measure="deformed")
    with pytest.raises(ValueError):
        tabulate(2, 5, measure="truncated")
    with pytest.raises(ValueError):
        tabulate(2, 5, measure="cl", u=Fraction(1, 2))
    with pytest.raises(ValueError):
        tabulate(2, 5, measure="nope")


def test_series_checks_small_depth():
    partial, rhs, tail, agree = deformed_series_check(2, Fraction(1, 2), 20)
    assert agree and partial < rhs.upper + tail
    partial, rhs, tail, agree = truncated_series_check(2, 3, 20)
    assert agree and partial <= rhs <= partial + tail


def test_deformed_series_all_stated_points_full_depth():
    for p, u in ((2, Fraction(1, 2)), (3, Fraction(1, 2)), (3, Fraction(2))):
        partial, rhs, tail, agree = deformed_series_check(p, u, 40)
        assert agree, (p, u, float(partial), rhs, float(tail))


def test_json_serialization_is_canonical():
    dist = tabulate(2, 4)
    doc = dist.to_json_dict()
    partitions = [row["partition"] for row in doc["entries"]]
    assert partitions[:5] == ["[]", "[1]", "[2]", "[1,1]", "[3]"]
    assert doc["p"] == 2 and doc["measure"] == "cl"
    # stable under re-serialization
    assert json.dumps(doc, sort_keys=True) == json.dumps(tabulate(2, 4).to_json_dict(), sort_keys=True)
    rows = dist.to_csv_rows()
    assert rows[0] == ["partition", "midpoint", "radius"]
    assert rows[1][0] == "[]"


def test_distribution_total_groups_by_constant():
    dist = tabulate(2, 6)
    total = dist.total_enclosure()
    plain = sum(m.rational for m in dist.entries.values())
    # grouped total = constant enclosure times the exact rational sum
    from clpart.qseries import odd_constant
    enc = odd_constant(2) * plain
    assert abs(total.mid - enc.mid) <= total.rad + enc.rad
