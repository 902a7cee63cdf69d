from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from memspike.analysis import (
    format_ratio,
    format_report,
    full_adder_table,
    half_adder_table,
    logical_efficiency,
    spacetime_report,
    spiking_full_adder_classes,
)
from memspike.gates import truth_table


def test_half_adder():
    r = logical_efficiency(half_adder_table())
    assert (r.input_count, r.class_count, r.efficiency) == (4, 3, Fraction(3, 4))


def test_standard_full_adder():
    r = logical_efficiency(full_adder_table())
    assert (r.input_count, r.class_count, r.efficiency) == (8, 4, Fraction(1, 2))
    assert "4/8 (50%)" in format_report(r)


def test_spiking_full_adder(gates, gate_bands, params):
    report = truth_table(gates["full-adder"], params, gate_bands["full-adder"])
    r = logical_efficiency(spiking_full_adder_classes(report))
    assert r.efficiency == 1
    assert r.class_count == 8


def test_empty_table_rejected():
    with pytest.raises(ValueError):
        logical_efficiency({})


@given(st.dictionaries(st.integers(), st.integers(min_value=0, max_value=5), min_size=1), st.permutations(range(6)))
def test_efficiency_is_permutation_invariant(table, perm):
    relabeled = {k: perm[v] for k, v in table.items()}
    a, b = logical_efficiency(table), logical_efficiency(relabeled)
    assert a == b
    assert 1 <= a.class_count <= a.input_count
    assert 0 < a.efficiency <= 1


def test_spacetime(gates):
    fa = spacetime_report(gates["full-adder"])
    assert (fa.input_wires, fa.input_timesteps, fa.conversion_ratio) == (1, 3, Fraction(1))
    assert format_ratio(fa.conversion_ratio) == "1:1"
    two = spacetime_report(gates["xor"])
    assert (two.input_wires, two.input_timesteps, format_ratio(two.conversion_ratio)) == (1, 2, "1:1")
    one = spacetime_report(gates["not"])
    assert (one.input_wires, one.input_timesteps, one.conversion_ratio) == (1, 1, None)
    assert format_ratio(one.conversion_ratio) == "undefined"
    assert one.to_dict()["conversion_ratio"] is None


def test_report_serializes():
    doc = logical_efficiency(half_adder_table()).to_dict()
    assert doc == {"input_count": 4, "class_count": 3, "efficiency": "3/4", "efficiency_percent": 75.0}
