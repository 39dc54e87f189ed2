"""Quantum pair sketch: create / query_one / query_pair / update.

A sketch of width k summarizes a set of k-bit strings as the uniform
superposition over the set. It lives on k sketch qubits plus two
measurement ancillas (indices k and k+1) that are |0> at every operation
boundary. Elements are bit strings whose character i is the value of
qubit i (qubit 0 first, i.e. the least-significant bit of the basis
index).

query_pair(a, b) realizes the three-outcome measurement onto
(|a> +- |b>)/sqrt(2) and their complement: a basis change built from one
Hadamard and a CX fan rotates the pair onto |r> and |r ^ e_pivot>, two
multi-controlled flags mark those states on the ancillas, and the basis
change is undone after the ancilla measurements. Per call this costs at
most 2 H, 2k CX, 2 X and 2 (k+1)-qubit multi-controlled X gates.

update applies a permutation given as a product of transpositions; each
transposition |a> <-> |b> is the reflection about (|a> - |b>)/sqrt(2),
realized with a Hadamard-conjugated ancilla, a CX fan over the differing
bits and two pattern-matched multi-controlled flips (2 H, <= 2k CX,
2 multi-controlled X).
"""
from __future__ import annotations

from collections.abc import Iterable

import numpy as np

from .errors import DomainError
from .statevector import (
    GateOp,
    GateTally,
    NoiseConfig,
    PvmOutcome,
    QuantumState,
    allocate,
    apply,
    cx,
    h,
    inject_depolarizing,
    measure_and_reset,
    mcx,
    pair_pvm_probabilities,
    x,
)


def element_index(element: str) -> int:
    """Basis index of a bit-string element (character i is qubit i)."""
    return sum(1 << i for i, ch in enumerate(element) if ch == "1")


def _check_element(element: str, width: int) -> None:
    if len(element) != width:
        raise DomainError(f"element {element!r} does not have width {width}")
    if any(ch not in "01" for ch in element):
        raise DomainError(f"element {element!r} is not a bit string")


def _uniform_amplitudes(elements: list[str], width: int) -> np.ndarray:
    """Amplitude vector of the uniform superposition, built by recursive
    amplitude splitting over the element prefix tree (qubit 0 first)."""
    amps = np.zeros(1 << width, dtype=np.complex128)
    total = len(elements)

    def descend(group: list[str], bit: int, index: int, amp: float) -> None:
        if bit == width:
            amps[index] = amp
            return
        zeros = [e for e in group if e[bit] == "0"]
        ones = [e for e in group if e[bit] == "1"]
        if zeros:
            descend(zeros, bit + 1, index, amp * np.sqrt(len(zeros) / len(group)))
        if ones:
            descend(ones, bit + 1, index | (1 << bit), amp * np.sqrt(len(ones) / len(group)))

    descend(elements, 0, 0, 1.0)
    return amps


class PairSketch:
    """Single-owner sketch state; operations mutate it in place."""

    def __init__(self, width: int, state: QuantumState, tally: GateTally | None = None,
                 noise: NoiseConfig | None = None, noise_rng=None):
        self.width = width
        self.state = state
        self.anc1 = width
        self.anc2 = width + 1
        self.tally = tally if tally is not None else GateTally()
        self.noise = noise
        self.noise_rng = noise_rng

    # -- construction -------------------------------------------------------

    @classmethod
    def create(cls, elements: Iterable[str], noise: NoiseConfig | None = None,
               noise_rng=None) -> "PairSketch":
        """Uniform superposition over `elements`.

        When the set is a product of free and fixed bit positions (the
        streamed-matching case) the state is prepared with a Hadamard layer
        plus X on fixed-one bits; otherwise amplitudes are written directly
        via the splitting tree, which is general state preparation.
        """
        elems = sorted(set(elements))
        if not elems:
            raise DomainError("cannot summarize an empty set")
        width = len(elems[0])
        for e in elems:
            _check_element(e, width)
        sketch = cls(width, allocate(width + 2), noise=noise, noise_rng=noise_rng)
        free = [i for i in range(width) if len({e[i] for e in elems}) == 2]
        if len(elems) == (1 << len(free)):
            for i in range(width):
                if i not in free and elems[0][i] == "1":
                    sketch._emit(x(i))
            for i in free:
                sketch._emit(h(i))
        else:
            amps = _uniform_amplitudes(elems, width)
            full = np.zeros(1 << (width + 2), dtype=np.complex128)
            full[: 1 << width] = amps
            sketch.state.amps = full
        return sketch

    # -- internals ----------------------------------------------------------

    def _emit(self, op: GateOp) -> None:
        apply(self.state, op)
        self.tally.add(op)
        if self.noise is not None and self.noise.two_qubit_depolarizing_p > 0.0:
            p = self.noise.two_qubit_depolarizing_p
            rng = self.noise_rng
            if op.kind == "cx":
                inject_depolarizing(self.state, op.controls[0][0], op.target, p, rng)
            elif op.kind == "mcx":
                for q, _ in op.controls:
                    inject_depolarizing(self.state, q, op.target, p, rng)

    def apply_gate(self, op: GateOp) -> None:
        """Emit one gate through the tally and noise hooks."""
        self._emit(op)

    def sketch_vector(self) -> np.ndarray:
        """Reduced k-qubit vector; requires both ancillas to be |0>."""
        blocks = self.state.amps.reshape(4, 1 << self.width)
        leak = float(np.sum(np.abs(blocks[1:]) ** 2))
        if leak > 1e-9:
            raise DomainError(f"ancillas are not clean (leak {leak:.2e})")
        return blocks[0].copy()

    def ancillas_clean(self, tol: float = 1e-9) -> bool:
        blocks = self.state.amps.reshape(4, 1 << self.width)
        return float(np.sum(np.abs(blocks[1:]) ** 2)) <= tol

    def _diff_and_pivot(self, a: str, b: str) -> tuple[list[int], int]:
        _check_element(a, self.width)
        _check_element(b, self.width)
        if a == b:
            raise DomainError("elements must differ")
        diff = [i for i in range(self.width) if a[i] != b[i]]
        return diff, diff[0]

    # -- queries ------------------------------------------------------------

    def pair_probabilities(self, a: str, b: str):
        """(p_plus, p_minus, p_zero) the next query_pair(a, b) would sample."""
        self._diff_and_pivot(a, b)
        return pair_pvm_probabilities(self.state, element_index(a), element_index(b))

    def query_one(self, a: str, rng) -> bool:
        """Probabilistic membership test: flag |a> on an ancilla and measure.

        True collapses the sketch to |a>; False to the renormalized rest.
        """
        _check_element(a, self.width)
        controls = tuple((i, int(a[i])) for i in range(self.width))
        self._emit(mcx(controls, self.anc1))
        return bool(measure_and_reset(self.state, self.anc1, rng))

    def query_pair(self, a: str, b: str, rng) -> PvmOutcome:
        """Three-outcome measurement onto (|a> +- |b>)/sqrt(2)."""
        diff, pivot = self._diff_and_pivot(a, b)
        fan = [cx(pivot, i) for i in diff[1:]]
        r = a if a[pivot] == "0" else b
        controls = tuple((i, int(r[i])) for i in range(self.width))

        for op in fan:
            self._emit(op)
        self._emit(h(pivot))

        def rotate_back() -> None:
            self._emit(h(pivot))
            for op in reversed(fan):
                self._emit(op)

        self._emit(mcx(controls, self.anc1))
        if measure_and_reset(self.state, self.anc1, rng):
            rotate_back()
            return PvmOutcome.PLUS
        self._emit(x(pivot))
        self._emit(mcx(controls, self.anc2))
        self._emit(x(pivot))
        if measure_and_reset(self.state, self.anc2, rng):
            rotate_back()
            return PvmOutcome.MINUS
        rotate_back()
        return PvmOutcome.ZERO

    # -- updates ------------------------------------------------------------

    def update_transposition(self, a: str, b: str) -> "PairSketch":
        """Swap the amplitudes of |a> and |b>, leaving the rest unchanged."""
        diff, _ = self._diff_and_pivot(a, b)
        pattern_a = tuple((i, int(a[i])) for i in range(self.width))
        pattern_b = tuple((i, int(b[i])) for i in range(self.width))
        fan = [cx(self.anc1, i) for i in diff]
        self._emit(h(self.anc1))
        for op in fan:
            self._emit(op)
        self._emit(mcx(pattern_a, self.anc1))
        self._emit(mcx(pattern_b, self.anc1))
        for op in fan:
            self._emit(op)
        self._emit(h(self.anc1))
        return self

    def update(self, transpositions: Iterable[tuple[str, str]]) -> "PairSketch":
        """Apply a permutation given as transpositions, in list order."""
        for a, b in transpositions:
            self.update_transposition(a, b)
        return self
