import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qaoaflow import (
    InputError,
    IsingProblem,
    SizeLimitError,
    SpinAssignment,
    UnsupportedTermError,
    brute_force_solve,
    maxcut_to_ising,
    random_ising,
)
from qaoaflow.problems import (
    bits_to_index,
    bits_to_spins,
    energies_of_all_assignments,
    index_to_bits,
)

from conftest import (
    EXAMPLE_COEFFS,
    EXAMPLE_MIN_ENERGY,
    EXAMPLE_MINIMIZERS,
    EXAMPLE_N,
    EXAMPLE_TERMS,
)


class TestConventions:
    def test_bit_eigenvalue_map(self):
        assert list(bits_to_spins("01")) == [1, -1]

    def test_bitstring_writes_qubit0_first(self):
        # index 2 has bit 1 set -> qubit 1 is |1>
        assert index_to_bits(2, 2) == "01"
        assert bits_to_index("01") == 2

    def test_spin_assignment_round_trip(self):
        a = SpinAssignment.from_spins([1, -1, 1])
        assert a.bits == "010"
        assert list(a.spins) == [1, -1, 1]
        assert SpinAssignment.from_index(a.index, 3) == a

    def test_spin_assignment_rejects_bad_bits(self):
        with pytest.raises(InputError):
            SpinAssignment("0a1")
        with pytest.raises(InputError):
            SpinAssignment.from_spins([1, 0])


class TestFromTerms:
    def test_example_instance(self, example_problem):
        assert example_problem.n == 5
        assert example_problem.linear == {1: 3.0, 3: 5.0}
        assert example_problem.quadratic == {
            (1, 2): 1.0, (2, 3): 2.0, (0, 3): 3.0, (0, 4): 4.0,
        }
        assert example_problem.constant == 0.0

    def test_empty_hamiltonian(self):
        p = IsingProblem.from_terms([], [], 2)
        for bits in ("00", "01", "10", "11"):
            assert p.energy_of_bits(bits) == 0.0

    def test_duplicates_merge_by_addition(self):
        p = IsingProblem.from_terms([(0, 1), (1, 0)], [1.0, 2.0], 2)
        assert p.quadratic == {(0, 1): 3.0}
        assert not p.linear

    def test_zero_coefficients_dropped(self):
        p = IsingProblem.from_terms([(0,), (0, 1), (1, 0)], [0.0, 1.0, -1.0], 2)
        assert p.num_terms == 0

    def test_arity_above_two_rejected(self):
        with pytest.raises(UnsupportedTermError):
            IsingProblem.from_terms([(0, 1, 2)], [1.0], 3)

    def test_out_of_range_index_rejected(self):
        with pytest.raises(InputError):
            IsingProblem.from_terms([(5,)], [1.0], 5)
        with pytest.raises(InputError):
            IsingProblem.from_terms([(-1, 0)], [1.0], 2)

    def test_length_mismatch_rejected(self):
        with pytest.raises(InputError):
            IsingProblem.from_terms([(0,)], [1.0, 2.0], 2)

    def test_self_coupling_rejected(self):
        with pytest.raises(InputError):
            IsingProblem.from_terms([(1, 1)], [1.0], 2)

    def test_non_finite_rejected(self):
        with pytest.raises(InputError):
            IsingProblem.from_terms([(0,)], [float("nan")], 1)


class TestMaxcut:
    def test_triangle_encoding(self, triangle_maxcut):
        assert triangle_maxcut.quadratic == {
            (0, 1): 0.5, (1, 2): 0.5, (0, 2): 0.5,
        }
        assert triangle_maxcut.constant == -1.5
        energy, _ = brute_force_solve(triangle_maxcut)
        assert energy == -2.0

    def test_single_edge(self):
        p = maxcut_to_ising([(0, 1, 1.0)])
        energy, minimizers = brute_force_solve(p)
        assert energy == -1.0
        assert [m.bits for m in minimizers] == ["01", "10"]

    def test_path_graph(self):
        p = maxcut_to_ising([(0, 1, 1.0), (1, 2, 1.0)])
        energy, minimizers = brute_force_solve(p)
        assert energy == -2.0
        assert [m.bits for m in minimizers] == ["010", "101"]

    def test_self_loop_rejected(self):
        with pytest.raises(InputError):
            maxcut_to_ising([(2, 2, 1.0)])

    def test_minus_energy_is_cut_weight(self):
        p = maxcut_to_ising([(0, 1, 2.0), (1, 2, 3.0), (0, 3, 1.5)])
        # partition {0,2} | {1,3} cuts all three edges -> weight 6.5
        assert -p.energy_of_bits("0101") == 6.5
        # partition {3} | {0,1,2} cuts only edge (0,3) -> weight 1.5
        assert -p.energy_of_bits("0001") == 1.5


class TestRandomIsing:
    def test_full_density_has_every_term(self):
        p = random_ising(4, density=1.0, coeff_range=(-1, 1), seed=7)
        assert len(p.linear) == 4
        assert len(p.quadratic) == 6

    def test_deterministic_for_fixed_seed(self):
        a = random_ising(3, density=0.5, seed=1)
        b = random_ising(3, density=0.5, seed=1)
        assert a == b

    def test_instance_is_valid(self):
        p = random_ising(6, density=0.4, seed=2)
        assert p.n == 6
        assert all(0 <= j < 6 for j in p.linear)
        assert all(0 <= j < k < 6 for j, k in p.quadratic)
        assert all(np.isfinite(c) for c in p.linear.values())
        assert all(np.isfinite(c) for c in p.quadratic.values())

    def test_bad_arguments(self):
        with pytest.raises(InputError):
            random_ising(3, density=0.0)
        with pytest.raises(InputError):
            random_ising(3, coeff_range=(1.0, -1.0))
        with pytest.raises(InputError):
            random_ising(0)


class TestBruteForce:
    def test_single_spin(self):
        p = IsingProblem.from_terms([(0,)], [1.0], 1)
        energy, minimizers = brute_force_solve(p)
        assert energy == -1.0
        assert [m.bits for m in minimizers] == ["1"]

    def test_example_instance_fixture(self, example_problem):
        energy, minimizers = brute_force_solve(example_problem)
        assert energy == EXAMPLE_MIN_ENERGY
        assert [m.bits for m in minimizers] == EXAMPLE_MINIMIZERS

    def test_triangle_has_six_minimizers(self, triangle_maxcut):
        energy, minimizers = brute_force_solve(triangle_maxcut)
        assert energy == -2.0
        bits = [m.bits for m in minimizers]
        assert bits == sorted(bits)
        assert set(bits) == {
            "001", "010", "011", "100", "101", "110",
        }

    def test_size_limit(self):
        p = IsingProblem(n=25)
        with pytest.raises(SizeLimitError):
            brute_force_solve(p)
        with pytest.raises(SizeLimitError):
            brute_force_solve(IsingProblem(n=11), limit=10)

    def test_minimum_bounds_random_assignments(self):
        rng = np.random.default_rng(3)
        p = random_ising(7, density=0.6, seed=11)
        best, _ = brute_force_solve(p)
        for _ in range(1000):
            z = rng.choice([-1, 1], size=7)
            assert best <= p.energy(z) + 1e-12


coeff_floats = st.floats(
    min_value=-10, max_value=10, allow_nan=False, allow_infinity=False
).filter(lambda x: x != 0.0)


@st.composite
def problems(draw, max_n=6, with_linear=True):
    n = draw(st.integers(min_value=2, max_value=max_n))
    terms, coeffs = [], []
    if with_linear:
        for j in range(n):
            if draw(st.booleans()):
                terms.append((j,))
                coeffs.append(draw(coeff_floats))
    for j in range(n):
        for k in range(j + 1, n):
            if draw(st.booleans()):
                terms.append((j, k))
                coeffs.append(draw(coeff_floats))
    return IsingProblem.from_terms(terms, coeffs, n)


class TestInvariants:
    @given(problems(with_linear=False))
    @settings(max_examples=40, deadline=None)
    def test_global_flip_symmetry_without_biases(self, problem):
        rng = np.random.default_rng(0)
        for _ in range(5):
            z = rng.choice([-1, 1], size=problem.n)
            assert problem.energy(z) == pytest.approx(problem.energy(-z), abs=1e-12)

    @given(problems())
    @settings(max_examples=40, deadline=None)
    def test_canonicalization_is_idempotent(self, problem):
        items = problem.term_items()
        again = IsingProblem.from_terms(
            [t for t, _ in items], [c for _, c in items], problem.n,
            constant=problem.constant,
        )
        assert again == problem

    @given(problems())
    @settings(max_examples=40, deadline=None)
    def test_energies_sum_to_trace(self, problem):
        total = float(energies_of_all_assignments(problem).sum())
        expected = (1 << problem.n) * problem.constant
        scale = max(1.0, sum(abs(c) for c in problem.linear.values())
                    + sum(abs(c) for c in problem.quadratic.values()))
        assert total == pytest.approx(expected, abs=1e-9 * scale * (1 << problem.n))

    @given(problems())
    @settings(max_examples=30, deadline=None)
    def test_json_round_trip_is_lossless(self, problem):
        clone = IsingProblem.from_json(problem.to_json())
        assert clone == problem
        assert clone.to_json() == problem.to_json()


class TestSerialization:
    def test_schema_shape(self, example_problem):
        data = json.loads(example_problem.to_json())
        assert set(data) == {"n", "terms", "coeffs", "constant"}
        assert data["n"] == EXAMPLE_N
        assert [1] in data["terms"] and [0, 3] in data["terms"]

    def test_missing_field_raises(self):
        with pytest.raises(InputError):
            IsingProblem.from_dict({"n": 2, "terms": [[0]]})
