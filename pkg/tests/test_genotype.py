"""Encoding, decoding, and the ordered population container."""

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hlri.errors import ContractError, DecodeError
from hlri.genotype import MixedGenotype, Population, decode, encode
from hlri.region_zooming import SearchRegion, initial_region

from conftest import make_genotype


def bits_from_string(text: str) -> np.ndarray:
    return np.array([int(c) for c in text], dtype=np.uint8)


def raw_decode_fraction(bits: np.ndarray, region: SearchRegion) -> list[Fraction]:
    """Independent integer-arithmetic dequantization (pre-normalization)."""
    n = region.dimension
    bits_per_var = len(bits) // n
    levels = 2 ** bits_per_var - 1
    out = []
    for i in range(n):
        block = bits[i * bits_per_var:(i + 1) * bits_per_var]
        code = int("".join(str(int(b)) for b in block), 2)
        lo = Fraction(region.a_min[i]).limit_denominator(10**12)
        hi = Fraction(region.a_max[i]).limit_denominator(10**12)
        out.append(lo + Fraction(code, levels) * (hi - lo))
    return out


class TestDecode:
    def test_all_zero_bits_hit_lower_corner(self, box2):
        a = decode(np.zeros(10, dtype=np.uint8), box2)
        assert np.allclose(a, [-1 / np.sqrt(2), -1 / np.sqrt(2)])

    def test_all_one_bits_hit_upper_corner(self, box2):
        a = decode(np.ones(10, dtype=np.uint8), box2)
        assert np.allclose(a, [1 / np.sqrt(2), 1 / np.sqrt(2)])

    def test_affine_dequantization_formula(self, box2):
        # var0 = 1000b = 8 of 15 levels, var1 pinned at the top level
        bits = bits_from_string("1000" + "1111")
        raw = raw_decode_fraction(bits, box2)
        assert raw[0] == Fraction(-1) + Fraction(8, 15) * 2
        assert float(raw[0]) == pytest.approx(0.0667, abs=5e-5)
        a = decode(bits, box2)
        assert a[0] / a[1] == pytest.approx(float(raw[0]) / 1.0, rel=1e-12)

    def test_unit_norm(self, box2):
        rng = np.random.default_rng(0)
        for _ in range(100):
            a = decode(rng.integers(0, 2, 10, dtype=np.uint8), box2)
            assert np.linalg.norm(a) == pytest.approx(1.0, abs=1e-12)

    def test_zero_norm_raises(self):
        region = SearchRegion(a_min=np.array([0.0, 0.0]),
                              a_max=np.array([1.0, 1.0]),
                              beta_min=0.0, beta_max=8.0)
        with pytest.raises(DecodeError):
            decode(np.zeros(10, dtype=np.uint8), region)

    def test_bit_count_mismatch(self, box2):
        with pytest.raises(ContractError):
            decode(np.zeros(7, dtype=np.uint8), box2)


class TestEncode:
    def test_bounds_map_to_extreme_codes(self, box2):
        bits = encode(np.array([-1.0, 1.0]), box2, 5)
        assert bits[:5].tolist() == [0, 0, 0, 0, 0]
        assert bits[5:].tolist() == [1, 1, 1, 1, 1]

    def test_midpoint_ties_round_up(self):
        region = SearchRegion(a_min=np.array([-1.0]), a_max=np.array([1.0]),
                              beta_min=0.0, beta_max=8.0)
        bits = encode(np.array([0.0]), region, 4)
        # (0 - (-1))/2 * 15 = 7.5 -> code 8 = 1000b
        assert bits.tolist() == [1, 0, 0, 0]

    def test_out_of_bounds_clamps(self):
        region = SearchRegion(a_min=np.array([0.2, -1.0]),
                              a_max=np.array([0.4, 1.0]),
                              beta_min=0.0, beta_max=8.0)
        bits = encode(np.array([0.9, 0.0]), region, 5)
        assert bits[:5].tolist() == [1, 1, 1, 1, 1]

    @given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.integers(3, 8))
    @settings(max_examples=200, deadline=None)
    def test_quantization_round_trip(self, seed, n, bits_per_var):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=n)
        a /= np.linalg.norm(a)
        region = initial_region(0.0, 8.0, n)
        bits = encode(a, region, bits_per_var)
        raw = [float(f) for f in raw_decode_fraction(bits, region)]
        step = 2.0 / (2 ** bits_per_var - 1)
        assert np.max(np.abs(np.array(raw) - a)) <= step


class TestPopulation:
    def test_rank_sorts_descending(self):
        pop = Population([make_genotype([1, 0], fitness=f) for f in (1.0, 5.0, 3.0)],
                         elite_size=1)
        pop.rank()
        assert [m.fitness for m in pop.members] == [5.0, 3.0, 1.0]

    def test_rank_is_stable_on_ties(self):
        members = [make_genotype([1, 0], fitness=2.0) for _ in range(3)]
        tagged = list(members)
        pop = Population(members, elite_size=1)
        pop.rank()
        assert pop.members == tagged

    def test_rank_is_a_permutation(self):
        rng = np.random.default_rng(5)
        members = [make_genotype([1, 0], fitness=float(rng.normal()))
                   for _ in range(12)]
        pop = Population(list(members), elite_size=3)
        pop.rank()
        assert sorted(id(m) for m in pop.members) == sorted(id(m) for m in members)
        assert len(pop) == 12

    def test_rank_requires_fitness(self):
        pop = Population([make_genotype([1, 0])], elite_size=1)
        with pytest.raises(ContractError):
            pop.rank()

    def test_elite_split(self):
        pop = Population([make_genotype([1, 0], fitness=float(-i))
                          for i in range(5)], elite_size=2)
        pop.rank()
        assert len(pop.elite) == 2
        assert len(pop.non_elite) == 3
        assert pop.elite[0].fitness == 0.0


class TestSerialization:
    def test_json_dict(self):
        g = make_genotype([0.6, 0.8], beta=2.5, fitness=1.5)
        d = g.to_json_dict()
        assert d["beta"] == 2.5
        assert set(d["bits"]) <= {"0", "1"}
        assert len(d["bits"]) == 10
        assert d["fitness"] == 1.5
        assert d["repair_status"] is None
        assert np.allclose(d["direction"], [0.6, 0.8])

    def test_copy_is_independent(self):
        g = make_genotype([1.0, 0.0], beta=1.0, fitness=0.5)
        c = g.copy()
        c.bits[0] ^= 1
        c.beta = 9.0
        assert g.beta == 1.0
        assert g.bits[0] != c.bits[0]

    def test_bitstring(self):
        g = MixedGenotype(beta=0.0,
                          bits=np.array([1, 0, 1], dtype=np.uint8),
                          direction=np.array([1.0]))
        assert g.bitstring() == "101"
