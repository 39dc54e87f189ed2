import itertools

import numpy as np
import pytest

from hmstream.errors import DomainError
from hmstream.sketch import PairSketch, element_index
from hmstream.statevector import PvmOutcome, shot_rng


def indicator_vector(elements, width):
    """Oracle: flat normalized indicator construction."""
    v = np.zeros(1 << width, dtype=complex)
    for e in elements:
        v[element_index(e)] = 1.0
    return v / np.linalg.norm(v)


def transposition_matrix(a, b, width):
    """Oracle: explicit permutation matrix swapping |a> and |b>."""
    dim = 1 << width
    perm = np.eye(dim)
    ia, ib = element_index(a), element_index(b)
    perm[[ia, ib]] = perm[[ib, ia]]
    return perm


def set_sketch_vector(sketch, vec):
    full = np.zeros(1 << (sketch.width + 2), dtype=complex)
    full[: len(vec)] = vec
    sketch.state.amps = full


def random_vector(width, seed):
    rng = np.random.default_rng(seed)
    v = rng.normal(size=1 << width) + 1j * rng.normal(size=1 << width)
    return v / np.linalg.norm(v)


class TestCreate:
    def test_full_cube_uses_hadamard_layer(self):
        k = 3
        elems = ["".join(bits) for bits in itertools.product("01", repeat=k)]
        sketch = PairSketch.create(elems)
        assert sketch.tally.h == k
        assert sketch.tally.cnot == 0
        assert np.allclose(sketch.sketch_vector(), np.full(8, 1 / np.sqrt(8)))

    def test_two_bit_cube_amplitudes(self):
        sketch = PairSketch.create(["00", "01", "10", "11"])
        assert np.allclose(sketch.sketch_vector(), [0.5, 0.5, 0.5, 0.5])

    def test_general_set_matches_indicator_oracle(self):
        elems = ["000", "011", "101"]
        sketch = PairSketch.create(elems)
        assert np.abs(sketch.sketch_vector() - indicator_vector(elems, 3)).max() <= 1e-12

    def test_cube_times_fixed_product(self):
        # free x fixed-zero x free: the streamed-matching shape
        elems = [a + "0" + b for a in "01" for b in "01"]
        sketch = PairSketch.create(elems)
        assert sketch.tally.h == 2
        assert np.abs(sketch.sketch_vector() - indicator_vector(elems, 3)).max() <= 1e-12

    def test_fixed_one_bits_use_x(self):
        sketch = PairSketch.create(["10", "11"])
        assert sketch.tally.x == 1
        assert np.abs(sketch.sketch_vector() - indicator_vector(["10", "11"], 2)).max() <= 1e-12

    def test_empty_set_rejected(self):
        with pytest.raises(DomainError):
            PairSketch.create([])

    def test_mixed_widths_rejected(self):
        with pytest.raises(DomainError):
            PairSketch.create(["01", "001"])


class TestQueryOne:
    def test_exact_element_always_hits(self):
        sketch = PairSketch.create(["101"])
        assert sketch.query_one("101", shot_rng(0, 0)) is True
        assert abs(abs(sketch.sketch_vector()[element_index("101")]) - 1.0) <= 1e-12

    def test_absent_element_never_hits(self):
        sketch = PairSketch.create(["000", "011"])
        assert sketch.query_one("111", shot_rng(0, 1)) is False

    def test_quarter_probability_on_four_elements(self):
        elems = ["000", "011", "101", "110"]
        hits = 0
        trials = 4000
        for i in range(trials):
            sketch = PairSketch.create(elems)
            hits += sketch.query_one("011", shot_rng(5, i))
        sigma = np.sqrt(0.25 * 0.75 / trials)
        assert abs(hits / trials - 0.25) < 4 * sigma

    def test_budget_single_multi_controlled_gate(self):
        sketch = PairSketch.create(["000", "011"])
        sketch.query_one("000", shot_rng(1, 0))
        assert sketch.tally.mcx_by_controls() == {3: 1}


class TestQueryPair:
    def test_plus_state_yields_plus(self):
        sketch = PairSketch.create(["010", "110"])
        assert sketch.query_pair("010", "110", shot_rng(0, 0)) is PvmOutcome.PLUS
        vec = sketch.sketch_vector()
        expected = indicator_vector(["010", "110"], 3)
        phase = np.vdot(expected, vec)
        assert np.abs(vec - phase * expected).max() <= 1e-9

    def test_orthogonal_state_yields_zero_unchanged(self):
        sketch = PairSketch.create(["001", "111"])
        before = sketch.sketch_vector()
        assert sketch.query_pair("010", "100", shot_rng(0, 1)) is PvmOutcome.ZERO
        after = sketch.sketch_vector()
        phase = np.vdot(before, after)
        assert abs(abs(phase) - 1.0) <= 1e-9
        assert np.abs(after - phase * before).max() <= 1e-9

    def test_uniform_eight_probabilities_match_projectors(self):
        elems = [f"{i:03b}"[::-1] for i in range(8)]
        sketch = PairSketch.create(elems)
        p_plus, p_minus, p_zero = sketch.pair_probabilities("000", "100")
        assert p_plus == pytest.approx(0.25, abs=1e-10)
        assert p_minus == pytest.approx(0.0, abs=1e-10)
        assert p_zero == pytest.approx(0.75, abs=1e-10)

    def test_identical_elements_rejected(self):
        sketch = PairSketch.create(["00", "11"])
        with pytest.raises(DomainError):
            sketch.query_pair("01", "01", shot_rng(0, 0))

    def test_zero_branch_matches_complement_projection(self):
        # post-state on zero equals the renormalized complement projection
        vec = random_vector(3, seed=9)
        for i in range(40):
            sketch = PairSketch.create(["000"])
            set_sketch_vector(sketch, vec)
            out = sketch.query_pair("010", "101", shot_rng(11, i))
            if out is not PvmOutcome.ZERO:
                continue
            ia, ib = element_index("010"), element_index("101")
            proj = vec.copy()
            plus = (proj[ia] + proj[ib]) / 2
            minus = (proj[ia] - proj[ib]) / 2
            proj[ia] -= plus + minus
            proj[ib] -= plus - minus
            proj /= np.linalg.norm(proj)
            got = sketch.sketch_vector()
            phase = np.vdot(proj, got)
            assert np.abs(got - phase * proj).max() <= 1e-9

    def test_gate_budget(self):
        k = 4
        elems = [f"{i:04b}"[::-1] for i in range(16)]
        for trial in range(30):
            sketch = PairSketch.create(elems)
            base = dict(sketch.tally.counts)
            sketch.query_pair("0000", "1111", shot_rng(21, trial))
            used = {key: sketch.tally.counts[key] - base.get(key, 0)
                    for key in sketch.tally.counts}
            assert used.get("h", 0) <= 2
            assert used.get("cx", 0) <= 2 * k
            assert used.get("x", 0) <= 2
            assert used.get(("mcx", k), 0) <= 2

    def test_probabilities_sum_to_one(self):
        sketch = PairSketch.create(["0010", "0111", "1001"])
        p = sketch.pair_probabilities("0010", "1001")
        assert sum(p) == pytest.approx(1.0, abs=1e-10)

    def test_ancillas_clean_after_every_outcome(self):
        for i in range(30):
            sketch = PairSketch.create(["000", "011", "110"])
            sketch.query_pair("000", "110", shot_rng(31, i))
            assert sketch.ancillas_clean()


class TestUpdate:
    def test_transposition_moves_basis_state(self):
        sketch = PairSketch.create(["011"])
        sketch.update_transposition("011", "101")
        assert abs(abs(sketch.sketch_vector()[element_index("101")]) - 1.0) <= 1e-9

    def test_untouched_amplitude_preserved(self):
        sketch = PairSketch.create(["000", "011", "110"])
        before = sketch.sketch_vector()
        sketch.update_transposition("011", "101")
        after = sketch.sketch_vector()
        idx = element_index("110")
        assert after[idx] == pytest.approx(before[idx], abs=1e-9)

    def test_random_state_matches_permutation_oracle(self):
        vec = random_vector(3, seed=4)
        sketch = PairSketch.create(["000"])
        set_sketch_vector(sketch, vec)
        sketch.update_transposition("110", "101")
        want = transposition_matrix("110", "101", 3) @ vec
        got = sketch.sketch_vector()
        phase = np.vdot(want, got)
        assert abs(abs(phase) - 1.0) <= 1e-9
        assert np.abs(got - phase * want).max() <= 1e-9

    def test_empty_permutation_is_identity(self):
        vec = random_vector(2, seed=8)
        sketch = PairSketch.create(["00"])
        set_sketch_vector(sketch, vec)
        sketch.update([])
        got = sketch.sketch_vector()
        phase = np.vdot(vec, got)
        assert np.abs(got - phase * vec).max() <= 1e-12

    def test_overlapping_transpositions_compose_in_order(self):
        # (a b) then (b c) sends |a> -> |b> -> |c>
        a, b, c = "001", "010", "100"
        sketch = PairSketch.create([a])
        sketch.update([(a, b), (b, c)])
        assert abs(abs(sketch.sketch_vector()[element_index(c)]) - 1.0) <= 1e-9

    @pytest.mark.parametrize("width", [2, 3, 4])
    def test_random_permutations_match_matrix_composition(self, width):
        rng = np.random.default_rng(100 + width)
        for trial in range(34):
            count = int(rng.integers(1, 5))
            pairs = []
            for _ in range(count):
                ia, ib = rng.choice(1 << width, size=2, replace=False)
                pairs.append((
                    "".join(str((int(ia) >> q) & 1) for q in range(width)),
                    "".join(str((int(ib) >> q) & 1) for q in range(width)),
                ))
            vec = random_vector(width, seed=int(rng.integers(1 << 30)))
            sketch = PairSketch.create(["0" * width])
            set_sketch_vector(sketch, vec)
            sketch.update(pairs)
            want = vec.copy()
            for a, b in pairs:
                want = transposition_matrix(a, b, width) @ want
            got = sketch.sketch_vector()
            phase = np.vdot(want, got)
            assert abs(abs(phase) - 1.0) <= 1e-9
            assert np.abs(got - phase * want).max() <= 1e-9

    def test_transposition_budget(self):
        k = 4
        sketch = PairSketch.create([f"{i:04b}"[::-1] for i in range(16)])
        base = dict(sketch.tally.counts)
        sketch.update_transposition("0000", "1111")
        used = {key: sketch.tally.counts[key] - base.get(key, 0) for key in sketch.tally.counts}
        assert used.get("h", 0) <= 2
        assert used.get("cx", 0) <= 2 * k
        assert used.get("x", 0) <= 3 * k
        assert used.get(("mcx", k), 0) <= 2

    def test_degenerate_transposition_rejected(self):
        sketch = PairSketch.create(["00", "01"])
        with pytest.raises(DomainError):
            sketch.update_transposition("01", "01")
