"""Behavioral and structural models of exact and approximate 4:2 compressors.

A 4:2 compressor takes four same-weight bits (plus an optional carry-in for
the exact variant) and emits a sum bit at the same weight and carry bit(s)
one weight up.  Approximate variants drop the carry-in/carry-out pins and
encode at most the value 3, so at least one input pattern is mis-encoded.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

GateKind = str

GATE_KINDS = ("INV", "NAND2", "NOR2", "AND2", "OR2", "AO222", "XOR2", "BUF")

_GATE_FANIN = {
    "INV": 1,
    "BUF": 1,
    "NAND2": 2,
    "NOR2": 2,
    "AND2": 2,
    "OR2": 2,
    "XOR2": 2,
    "AO222": 6,
}


class NetlistError(ValueError):
    """Structural problem in a gate netlist (cycle, bad fan-in, dangling input)."""


def popcount(index: int) -> int:
    return bin(index & 0xF).count("1")


def exact_compressor(x1: int, x2: int, x3: int, x4: int, cin: int) -> tuple[int, int, int]:
    """Exact 4:2 compressor built from two cascaded full adders.

    Returns (cout, carry, sum) with 2*cout + 2*carry + sum == x1+x2+x3+x4+cin.
    cout is the carry of the first full adder, so it does not depend on cin.
    """
    for b in (x1, x2, x3, x4, cin):
        if b not in (0, 1):
            raise ValueError(f"inputs must be bits, got {b!r}")
    s1 = x1 ^ x2 ^ x3
    cout = (x1 & x2) | (x2 & x3) | (x3 & x1)
    s = s1 ^ x4 ^ cin
    carry = (s1 & x4) | (x4 & cin) | (cin & s1)
    return cout, carry, s


@dataclass(frozen=True)
class CompressorTruthTable:
    """Behavioral map from the 4-bit input pattern (x4 x3 x2 x1) to (carry, sum).

    The index is read with x1 as the least significant bit, matching the
    column order of the published table for the proposed cell.
    """

    name: str
    entries: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        if len(self.entries) != 16:
            raise ValueError(f"truth table needs 16 entries, got {len(self.entries)}")
        for idx, (carry, s) in enumerate(self.entries):
            if carry not in (0, 1) or s not in (0, 1):
                raise ValueError(f"entry {idx} is not a bit pair: {(carry, s)!r}")

    def __getitem__(self, index: int) -> tuple[int, int]:
        return self.entries[index]

    def value(self, index: int) -> int:
        carry, s = self.entries[index]
        return 2 * carry + s

    def value_error(self, index: int) -> int:
        """Encoded value minus the true bit count for this input pattern."""
        return self.value(index) - popcount(index)

    @property
    def error_indices(self) -> tuple[int, ...]:
        return tuple(i for i in range(16) if self.value_error(i) != 0)

    @property
    def error_combinations(self) -> int:
        return len(self.error_indices)

    @staticmethod
    def pattern_probability_numerator(index: int) -> int:
        """Occurrence weight of a pattern out of 256, for i.i.d. partial-product
        bits with P(bit = 1) = 1/4: numerator 3^(4 - popcount)."""
        return 3 ** (4 - popcount(index))

    @property
    def error_probability_numerator(self) -> int:
        """Probability mass (out of 256) carried by the erroneous patterns."""
        return sum(self.pattern_probability_numerator(i) for i in self.error_indices)

    def to_csv(self) -> str:
        out = io.StringIO()
        out.write("x4,x3,x2,x1,carry,sum\n")
        for idx in range(16):
            x4, x3, x2, x1 = (idx >> 3) & 1, (idx >> 2) & 1, (idx >> 1) & 1, idx & 1
            carry, s = self.entries[idx]
            out.write(f"{x4},{x3},{x2},{x1},{carry},{s}\n")
        return out.getvalue()

    @classmethod
    def from_csv(cls, text: str, name: str = "imported") -> "CompressorTruthTable":
        lines = [ln.strip() for ln in text.strip().splitlines() if ln.strip()]
        if not lines or lines[0] != "x4,x3,x2,x1,carry,sum":
            raise ValueError("bad truth-table CSV header")
        if len(lines) != 17:
            raise ValueError(f"expected 16 data rows, got {len(lines) - 1}")
        entries: list[tuple[int, int] | None] = [None] * 16
        for ln in lines[1:]:
            x4, x3, x2, x1, carry, s = (int(t) for t in ln.split(","))
            idx = (x4 << 3) | (x3 << 2) | (x2 << 1) | x1
            entries[idx] = (carry, s)
        if any(e is None for e in entries):
            raise ValueError("duplicate or missing rows in truth-table CSV")
        return cls(name=name, entries=tuple(entries))  # type: ignore[arg-type]


def exact_truth_table() -> CompressorTruthTable:
    """Carry/sum of the exact compressor with cin = 0, cout folded into carry.

    Only valid as a 2-output table for patterns with popcount <= 3; pattern
    1111 cannot be encoded and is clamped, so this helper is mainly useful
    as a baseline for the error-combination count of near-exact designs.
    """
    return clamped_popcount_table("exact-clamped")


def clamped_popcount_table(name: str) -> CompressorTruthTable:
    entries = []
    for idx in range(16):
        v = min(popcount(idx), 3)
        entries.append((v >> 1, v & 1))
    return CompressorTruthTable(name=name, entries=tuple(entries))


def proposed_truth_table() -> CompressorTruthTable:
    """The proposed high-accuracy table: exact bit count everywhere except
    1111, which saturates to 3 (single error combination, difference -1)."""
    return clamped_popcount_table("proposed")


def table_from_error_pattern(
    error_indices: Iterable[int],
    clamp: str = "saturate",
    overrides: Mapping[int, tuple[int, int]] | None = None,
    name: str = "pattern",
) -> CompressorTruthTable:
    """Generic constructor for modelling cited designs by their error patterns.

    Non-error indices encode the true bit count, so every pattern with
    popcount 4 must be listed in `error_indices`.  At error indices the
    output follows the clamp policy: "saturate" emits one less than the
    bit count (clamped at zero), so each listed row undercounts by one;
    "override" requires an explicit (carry, sum) per listed row.
    """
    error_set = {i & 0xF for i in error_indices}
    overrides = dict(overrides or {})
    if clamp not in ("saturate", "override"):
        raise ValueError(f"unknown clamp policy {clamp!r}")
    entries: list[tuple[int, int]] = []
    for idx in range(16):
        pc = popcount(idx)
        if idx not in error_set:
            if pc > 3:
                raise ValueError(
                    f"pattern {idx:04b} has popcount 4 but is not an error index"
                )
            entries.append((pc >> 1, pc & 1))
            continue
        if idx in overrides:
            out = overrides[idx]
        elif clamp == "saturate":
            v = max(pc - 1, 0)
            out = (v >> 1, v & 1)
        else:
            raise ValueError(f"override policy needs an entry for index {idx}")
        entries.append(out)
    return CompressorTruthTable(name=name, entries=tuple(entries))


@dataclass(frozen=True)
class Gate:
    id: str
    kind: GateKind
    inputs: tuple[str, ...]

    def __post_init__(self) -> None:
        if self.kind not in _GATE_FANIN:
            raise NetlistError(f"unknown gate kind {self.kind!r}")
        if len(self.inputs) != _GATE_FANIN[self.kind]:
            raise NetlistError(
                f"gate {self.id}: kind {self.kind} needs "
                f"{_GATE_FANIN[self.kind]} inputs, got {len(self.inputs)}"
            )


@dataclass(frozen=True)
class GateNetlist:
    """Acyclic gate graph with named primary inputs and (carry, sum) outputs."""

    gates: tuple[Gate, ...]
    inputs: tuple[str, ...]
    outputs: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        known = set(self.inputs)
        for g in self.gates:
            for src in g.inputs:
                if src not in known:
                    raise NetlistError(f"gate {g.id}: unresolved input {src!r}")
            if g.id in known:
                raise NetlistError(f"duplicate signal id {g.id!r}")
            known.add(g.id)
        for name, sig in self.outputs.items():
            if sig not in known:
                raise NetlistError(f"output {name} bound to unknown signal {sig!r}")
        # declaration order is a valid topological order by construction above

    def _gate_map(self) -> dict[str, Gate]:
        return {g.id: g for g in self.gates}

    def evaluate(self, input_values: Mapping[str, int]) -> dict[str, int]:
        values: dict[str, int] = {}
        for pin in self.inputs:
            if pin not in input_values:
                raise NetlistError(f"missing value for primary input {pin!r}")
            values[pin] = input_values[pin] & 1
        for g in self.gates:
            ins = [values[s] for s in g.inputs]
            values[g.id] = _eval_gate(g.kind, ins)
        return values


def _eval_gate(kind: GateKind, ins: Sequence[int]) -> int:
    if kind == "INV":
        return ins[0] ^ 1
    if kind == "BUF":
        return ins[0]
    if kind == "NAND2":
        return (ins[0] & ins[1]) ^ 1
    if kind == "NOR2":
        return (ins[0] | ins[1]) ^ 1
    if kind == "AND2":
        return ins[0] & ins[1]
    if kind == "OR2":
        return ins[0] | ins[1]
    if kind == "XOR2":
        return ins[0] ^ ins[1]
    if kind == "AO222":
        return (ins[0] & ins[1]) | (ins[2] & ins[3]) | (ins[4] & ins[5])
    raise NetlistError(f"unknown gate kind {kind!r}")


def simulate_netlist(netlist: GateNetlist, pattern: int) -> tuple[int, int]:
    """Evaluate a compressor netlist on a 4-bit pattern (x4 x3 x2 x1).

    Returns (carry, sum).
    """
    if not 0 <= pattern <= 15:
        raise ValueError(f"pattern must be a 4-bit index, got {pattern}")
    vals = {
        "x1": pattern & 1,
        "x2": (pattern >> 1) & 1,
        "x3": (pattern >> 2) & 1,
        "x4": (pattern >> 3) & 1,
    }
    # exact netlists carry a cin pin; drive it low for 4-input evaluation
    for extra in netlist.inputs:
        vals.setdefault(extra, 0)
    out = netlist.evaluate(vals)
    return out[netlist.outputs["carry"]], out[netlist.outputs["sum"]]


def table_from_netlist(netlist: GateNetlist, name: str = "netlist") -> CompressorTruthTable:
    return CompressorTruthTable(
        name=name, entries=tuple(simulate_netlist(netlist, p) for p in range(16))
    )


def critical_path(netlist: GateNetlist) -> list[GateKind]:
    """Gate kinds along the longest primary-input-to-output path.

    Depth is counted in gate stages (AO222 is one stage).  Ties are broken
    by declaration order of the gates, so the result is deterministic.
    """
    gate_map = netlist._gate_map()
    depth: dict[str, int] = {pin: 0 for pin in netlist.inputs}
    best_pred: dict[str, str] = {}
    for g in netlist.gates:
        # first input at maximal depth wins the tie
        pred = max(g.inputs, key=lambda s: depth[s])
        depth[g.id] = depth[pred] + 1
        best_pred[g.id] = pred
    # deepest output signal; outputs iterated in insertion order for tie-break
    end: str | None = None
    for sig in netlist.outputs.values():
        if end is None or depth[sig] > depth[end]:
            end = sig
    if end is None or end not in gate_map:
        return []
    path: list[GateKind] = []
    cur = end
    while cur in gate_map:
        path.append(gate_map[cur].kind)
        cur = best_pred[cur]
    path.reverse()
    return path


def proposed_netlist() -> GateNetlist:
    """Structural model of the proposed compressor.

    Intermediates: A = NOR(x1,x2), B = NAND(x1,x2), C = NOR(x3,x4),
    D = NAND(x3,x4).  Carry = NAND(B,D) OR NOR(A,C).  Sum is realized as a
    single AO222 over three product terms:

        Sum = (x1 xor x2)&C  +  !A&!D  +  !(x1 xor x2)&(x3 xor x4)

    which is equivalent to the published sum-of-products on all 16 patterns
    (verified exhaustively in tests).  The longest path runs through the
    second inverter into the AO222: NAND2 -> INV -> NOR2 -> INV -> AO222.
    """
    gates = (
        Gate("A", "NOR2", ("x1", "x2")),
        Gate("B", "NAND2", ("x1", "x2")),
        Gate("C", "NOR2", ("x3", "x4")),
        Gate("D", "NAND2", ("x3", "x4")),
        Gate("nB", "INV", ("B",)),
        Gate("nC", "INV", ("C",)),
        Gate("nA", "INV", ("A",)),
        Gate("nD", "INV", ("D",)),
        # u1 = !A & B = x1 xor x2 ; built as NOR(A, nB) so the deep branch
        # runs NAND -> INV -> NOR before the final inverter
        Gate("u1", "NOR2", ("A", "nB")),
        Gate("nu1", "INV", ("u1",)),
        # v = !C & D = x3 xor x4
        Gate("v", "AND2", ("nC", "D")),
        Gate("sum", "AO222", ("u1", "C", "nA", "nD", "nu1", "v")),
        Gate("nbd", "NAND2", ("B", "D")),
        Gate("nac", "NOR2", ("A", "C")),
        Gate("carry", "OR2", ("nbd", "nac")),
    )
    return GateNetlist(
        gates=gates,
        inputs=("x1", "x2", "x3", "x4"),
        outputs={"carry": "carry", "sum": "sum"},
    )


def _xor_nand(gates: list[Gate], out_id: str, a: str, b: str) -> str:
    """Append a NAND-only XOR (depth 3) and return its output signal id."""
    gates.append(Gate(f"{out_id}_n1", "NAND2", (a, b)))
    gates.append(Gate(f"{out_id}_n2", "NAND2", (a, f"{out_id}_n1")))
    gates.append(Gate(f"{out_id}_n3", "NAND2", (b, f"{out_id}_n1")))
    gates.append(Gate(out_id, "NAND2", (f"{out_id}_n2", f"{out_id}_n3")))
    return out_id


def exact_netlist(xor_as_gate: bool = False) -> GateNetlist:
    """Exact 4:2 compressor as two cascaded full adders.

    With xor_as_gate=False (default) each XOR is decomposed into four NAND2
    gates, the standard static-CMOS realization, which makes stage counts
    comparable with the approximate cell's NAND/NOR fabric.  The majority
    carries are single AO222 stages.
    """
    gates: list[Gate] = []

    def xor(out_id: str, a: str, b: str) -> str:
        if xor_as_gate:
            gates.append(Gate(out_id, "XOR2", (a, b)))
            return out_id
        return _xor_nand(gates, out_id, a, b)

    xor("p1", "x1", "x2")
    xor("s1", "p1", "x3")
    gates.append(Gate("cout", "AO222", ("x1", "x2", "x2", "x3", "x3", "x1")))
    xor("p2", "s1", "x4")
    xor("sum", "p2", "cin")
    gates.append(Gate("carry", "AO222", ("s1", "x4", "x4", "cin", "cin", "s1")))
    return GateNetlist(
        gates=tuple(gates),
        inputs=("x1", "x2", "x3", "x4", "cin"),
        outputs={"carry": "carry", "sum": "sum", "cout": "cout"},
    )
