import itertools
import json
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from bfdcqo import hubo
from bfdcqo.hubo import (CnfInstance, Clause, DimensionError, HuboProblem,
                         assignment_from_bits, bits_from_assignment,
                         cnf_to_hubo, energy, gen_max3sat, gen_nn_spin_glass,
                         satisfied_weight)


def energy_reference(p, spins):
    """Independent term-by-term summation used as an oracle."""
    total = p.offset
    for i, v in p.linear.items():
        total += v * spins[i]
    for (i, j), v in p.quadratic.items():
        total += v * spins[i] * spins[j]
    for (i, j, k), v in p.cubic.items():
        total += v * spins[i] * spins[j] * spins[k]
    return total


class TestEnergy:
    def test_single_linear_term(self):
        p = HuboProblem.from_terms(1, [((0,), 2.0)])
        assert energy(p, np.array([1])) == 2.0

    def test_cubic_product_of_spins(self):
        p = HuboProblem.from_terms(3, [((0, 1, 2), 1.0)])
        assert energy(p, np.array([1, -1, -1])) == 1.0

    def test_matches_reference_implementation(self):
        p = gen_nn_spin_glass(10, seed=42)
        rng = np.random.default_rng(0)
        for _ in range(50):
            spins = rng.choice([-1, 1], size=10)
            assert energy(p, spins) == pytest.approx(energy_reference(p, spins), abs=1e-12)

    def test_length_mismatch_raises(self):
        p = gen_nn_spin_glass(5, seed=0)
        with pytest.raises(DimensionError):
            energy(p, np.ones(4))

    def test_linear_in_coefficients(self):
        rng = np.random.default_rng(3)
        p1 = gen_nn_spin_glass(8, seed=1)
        p2 = gen_nn_spin_glass(8, seed=2)
        both = p1 + p2
        for _ in range(20):
            spins = rng.choice([-1, 1], size=8)
            assert energy(both, spins) == pytest.approx(
                energy(p1, spins) + energy(p2, spins), abs=1e-12)

    def test_global_flip_negates_odd_orders(self):
        p = gen_nn_spin_glass(9, seed=5)
        even = HuboProblem.from_terms(9, list(p.quadratic.items()), offset=p.offset)
        odd = HuboProblem.from_terms(
            9, [((i,), v) for i, v in p.linear.items()] + list(p.cubic.items()))
        rng = np.random.default_rng(4)
        for _ in range(20):
            spins = rng.choice([-1, 1], size=9)
            assert energy(p, -spins) == pytest.approx(
                energy(even, spins) - energy(odd, spins), abs=1e-12)


class TestHuboProblem:
    def test_from_terms_merges_and_drops_zeros(self):
        p = HuboProblem.from_terms(3, [((0, 1), 1.5), ((1, 0), 0.5), ((0,), 0.0)])
        assert p.quadratic == {(0, 1): 2.0}
        assert p.linear == {}

    def test_unsorted_index_tuple_rejected_in_canonical_form(self):
        p = HuboProblem.from_terms(3, [((2, 0), 1.0)])
        assert (0, 2) in p.quadratic

    def test_equality(self):
        a = gen_nn_spin_glass(6, seed=9)
        b = gen_nn_spin_glass(6, seed=9)
        assert a == b

    def test_out_of_range_index_raises(self):
        with pytest.raises(ValueError):
            HuboProblem.from_terms(2, [((0, 5), 1.0)])

    def test_json_round_trip(self, tmp_path):
        p = gen_nn_spin_glass(7, seed=11)
        path = tmp_path / "p.json"
        p.save(path)
        assert HuboProblem.load(path) == p
        # layout pinned by the serialization contract
        doc = json.loads(path.read_text())
        assert set(doc) == {"n", "offset", "linear", "quadratic", "cubic"}

    def test_coupling_range(self):
        p = gen_nn_spin_glass(6, seed=0)
        assert p.coupling_range() == 3
        q = HuboProblem.from_terms(8, [((0, 7), 1.0)])
        assert q.coupling_range() == 8


class TestNnSpinGlass:
    def test_term_counts_n3(self):
        p = gen_nn_spin_glass(3, seed=0)
        assert len(p.linear) == 3 and len(p.quadratic) == 2 and len(p.cubic) == 1

    def test_deterministic(self):
        assert gen_nn_spin_glass(12, seed=4) == gen_nn_spin_glass(12, seed=4)

    def test_standard_normal_statistics(self):
        p = gen_nn_spin_glass(1000, seed=7)
        coeffs = np.array(list(p.linear.values()) + list(p.quadratic.values())
                          + list(p.cubic.values()))
        assert abs(coeffs.mean()) < 0.1
        assert abs(coeffs.var() - 1.0) < 0.1

    def test_too_small_raises(self):
        with pytest.raises(ValueError):
            gen_nn_spin_glass(2, seed=0)


class TestMax3Sat:
    def test_clause_count_at_critical_density(self):
        c = gen_max3sat(25, density=4.3, weighted=True, seed=0)
        assert len(c.clauses) == 108

    def test_unweighted_weights_are_one(self):
        c = gen_max3sat(10, density=4.3, weighted=False, seed=1)
        assert all(cl.weight == 1.0 for cl in c.clauses)

    def test_weighted_weights_in_unit_interval(self):
        c = gen_max3sat(10, density=4.3, weighted=True, seed=2)
        assert all(0.0 < cl.weight <= 1.0 for cl in c.clauses)

    def test_distinct_variables_per_clause(self):
        c = gen_max3sat(10, density=4.3, weighted=True, seed=3)
        assert all(len(set(cl.vars)) == 3 for cl in c.clauses)

    def test_deterministic(self):
        a = gen_max3sat(10, 4.3, True, seed=5)
        b = gen_max3sat(10, 4.3, True, seed=5)
        assert a == b

    def test_wcnf_round_trip(self, tmp_path):
        c = gen_max3sat(10, 4.3, True, seed=6)
        path = tmp_path / "c.wcnf"
        c.save(path)
        back = CnfInstance.load(path)
        assert back.n_vars == c.n_vars
        for x, y in zip(back.clauses, c.clauses):
            assert x.vars == y.vars and x.negated == y.negated
            assert x.weight == pytest.approx(y.weight, rel=1e-12)


class TestCnfToHubo:
    def test_satisfied_clause_energy(self):
        c = CnfInstance(3, [Clause((0, 1, 2), (False, False, False), 1.0)])
        p = cnf_to_hubo(c)
        assert energy(p, np.array([1, 1, 1])) == pytest.approx(-1.0)

    def test_unsatisfied_clause_energy(self):
        c = CnfInstance(3, [Clause((0, 1, 2), (False, False, False), 1.0)])
        p = cnf_to_hubo(c)
        assert energy(p, np.array([-1, -1, -1])) == pytest.approx(0.0)

    def test_energy_is_negated_satisfied_weight(self):
        c = gen_max3sat(10, density=4.3, weighted=True, seed=9)
        assert len(c.clauses) == 43
        p = cnf_to_hubo(c)
        rng = np.random.default_rng(1)
        for _ in range(100):
            bits = "".join(rng.choice(["0", "1"], size=10))
            spins = assignment_from_bits(bits)
            assert energy(p, spins) == pytest.approx(-satisfied_weight(c, bits), abs=1e-12)

    def test_max_weight_equals_negated_min_energy(self):
        c = gen_max3sat(8, density=3.0, weighted=True, seed=12)
        p = cnf_to_hubo(c)
        best_w = max(satisfied_weight(c, format(i, "08b")) for i in range(256))
        min_e = min(energy(p, assignment_from_bits(format(i, "08b"))) for i in range(256))
        assert best_w == pytest.approx(-min_e, abs=1e-12)


class TestBitSpinConversion:
    def test_all_zeros(self):
        assert np.array_equal(assignment_from_bits("000"), [1, 1, 1])

    def test_mixed(self):
        assert np.array_equal(assignment_from_bits("101"), [-1, 1, -1])

    def test_round_trip_all_3bit(self):
        for bits in ("".join(t) for t in itertools.product("01", repeat=3)):
            assert bits_from_assignment(assignment_from_bits(bits)) == bits


@settings(max_examples=30, deadline=None)
@given(st.integers(min_value=0, max_value=2 ** 8 - 1),
       st.integers(min_value=0, max_value=10 ** 6))
def test_energy_linearity_property(mask, seed):
    spins = np.array([1 if mask >> i & 1 else -1 for i in range(8)])
    p1 = gen_nn_spin_glass(8, seed=seed)
    p2 = gen_nn_spin_glass(8, seed=seed + 1)
    assert energy(p1 + p2, spins) == pytest.approx(
        energy(p1, spins) + energy(p2, spins), abs=1e-12)
