import itertools

import pytest
from hypothesis import given
from hypothesis import strategies as st

from approxmul.compressor import (
    CompressorTruthTable,
    Gate,
    GateNetlist,
    NetlistError,
    critical_path,
    exact_compressor,
    exact_netlist,
    popcount,
    proposed_netlist,
    proposed_truth_table,
    simulate_netlist,
    table_from_error_pattern,
)

# Published truth table of the proposed cell, row by row: index -> (carry, sum).
PROPOSED_ROWS = {
    0b0000: (0, 0), 0b0001: (0, 1), 0b0010: (0, 1), 0b0011: (1, 0),
    0b0100: (0, 1), 0b0101: (1, 0), 0b0110: (1, 0), 0b0111: (1, 1),
    0b1000: (0, 1), 0b1001: (1, 0), 0b1010: (1, 0), 0b1011: (1, 1),
    0b1100: (1, 0), 0b1101: (1, 1), 0b1110: (1, 1), 0b1111: (1, 1),
}


def test_proposed_table_matches_published_rows():
    table = proposed_truth_table()
    for idx, expected in PROPOSED_ROWS.items():
        assert table[idx] == expected, f"row {idx:04b}"


def test_proposed_table_single_error_at_all_ones():
    table = proposed_truth_table()
    assert table.error_indices == (15,)
    assert table.error_combinations == 1
    assert table.value_error(15) == -1
    for idx in range(15):
        assert table.value(idx) == popcount(idx)


def test_pattern_probabilities_sum_to_256():
    table = proposed_truth_table()
    numerators = [table.pattern_probability_numerator(i) for i in range(16)]
    assert sum(numerators) == 256
    assert numerators[0b0000] == 81
    assert numerators[0b0001] == 27
    assert numerators[0b0011] == 9
    assert numerators[0b0111] == 3
    assert numerators[0b1111] == 1
    assert table.error_probability_numerator == 1


def test_exact_compressor_sum_identity_all_32():
    for bits in itertools.product((0, 1), repeat=5):
        cout, carry, s = exact_compressor(*bits)
        assert 2 * cout + 2 * carry + s == sum(bits)


def test_exact_compressor_cout_independent_of_cin():
    for bits in itertools.product((0, 1), repeat=4):
        cout0, _, _ = exact_compressor(*bits, 0)
        cout1, _, _ = exact_compressor(*bits, 1)
        assert cout0 == cout1


def test_exact_compressor_examples():
    assert exact_compressor(0, 0, 0, 0, 0) == (0, 0, 0)
    assert exact_compressor(1, 1, 1, 1, 1) == (1, 1, 1)
    # derived from the two-full-adder cascade: FA1(1,0,1) gives s1=0, cout=1
    cout, carry, s = exact_compressor(1, 0, 1, 0, 1)
    assert 2 * cout + 2 * carry + s == 3
    assert cout == 1


def test_exact_compressor_rejects_non_bits():
    with pytest.raises(ValueError):
        exact_compressor(2, 0, 0, 0, 0)


def test_netlist_equivalent_to_table_on_all_16_patterns():
    table = proposed_truth_table()
    netlist = proposed_netlist()
    for p in range(16):
        assert simulate_netlist(netlist, p) == table[p], f"pattern {p:04b}"


def test_netlist_key_patterns():
    netlist = proposed_netlist()
    assert simulate_netlist(netlist, 0b1111) == (1, 1)
    assert simulate_netlist(netlist, 0b0001) == (0, 1)


def test_proposed_critical_path():
    path = critical_path(proposed_netlist())
    assert len(path) == 5
    assert sorted(path) == sorted(["NOR2", "NAND2", "INV", "INV", "AO222"])


def test_single_gate_depth():
    netlist = GateNetlist(
        gates=(Gate("y", "INV", ("a",)),),
        inputs=("a",),
        outputs={"carry": "y", "sum": "y"},
    )
    assert critical_path(netlist) == ["INV"]


def test_exact_netlist_matches_behavioral_model():
    netlist = exact_netlist()
    for bits in itertools.product((0, 1), repeat=5):
        x1, x2, x3, x4, cin = bits
        out = netlist.evaluate({"x1": x1, "x2": x2, "x3": x3, "x4": x4, "cin": cin})
        assert (out["cout"], out["carry"], out["sum"]) == exact_compressor(*bits)


def test_exact_netlist_deeper_than_proposed():
    assert len(critical_path(exact_netlist())) > len(critical_path(proposed_netlist()))


def test_critical_path_stable_under_unrelated_gate_reorder():
    # moving an unrelated gate around must not change the reported path
    base = proposed_netlist()
    spare = Gate("unused", "INV", ("x3",))
    reordered = GateNetlist(
        gates=(spare,) + base.gates,
        inputs=base.inputs,
        outputs=base.outputs,
    )
    assert critical_path(reordered) == critical_path(base)


def test_netlist_rejects_unresolved_input():
    with pytest.raises(NetlistError):
        GateNetlist(
            gates=(Gate("g", "INV", ("nowhere",)),),
            inputs=("a",),
            outputs={"carry": "g", "sum": "g"},
        )


def test_netlist_rejects_bad_fanin():
    with pytest.raises(NetlistError):
        Gate("g", "AO222", ("a", "b"))


def test_simulate_rejects_out_of_range_pattern():
    with pytest.raises(ValueError):
        simulate_netlist(proposed_netlist(), 16)


def test_table_from_error_pattern_saturates():
    table = table_from_error_pattern({15})
    assert table.entries == proposed_truth_table().entries
    assert table.error_combinations == 1


def test_table_from_error_pattern_overrides():
    table = table_from_error_pattern(
        {15, 0b0111}, clamp="override",
        overrides={15: (1, 1), 0b0111: (1, 0)},
    )
    assert table[0b0111] == (1, 0)
    assert table.error_combinations == 2


def test_table_from_error_pattern_rejects_unlisted_popcount4():
    with pytest.raises(ValueError):
        table_from_error_pattern(set())


@given(st.sets(st.integers(min_value=0, max_value=14)))
def test_table_from_error_pattern_exact_off_errors(extra):
    table = table_from_error_pattern(extra | {15})
    for idx in range(16):
        if idx not in extra and idx != 15:
            assert table.value(idx) == popcount(idx)


def test_csv_round_trip_and_format():
    table = proposed_truth_table()
    text = table.to_csv()
    lines = text.splitlines()
    assert lines[0] == "x4,x3,x2,x1,carry,sum"
    assert len(lines) == 17
    assert lines[1] == "0,0,0,0,0,0"
    assert lines[-1] == "1,1,1,1,1,1"
    restored = CompressorTruthTable.from_csv(text)
    assert restored.entries == table.entries


def test_csv_rejects_bad_header():
    with pytest.raises(ValueError):
        CompressorTruthTable.from_csv("x1,x2\n0,0\n")
