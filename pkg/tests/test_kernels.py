"""Both kernel implementations must agree with the dense oracle and with
each other (within reassociation noise)."""

import numpy as np
import pytest

from qaoaflow._kernels import implementations

from conftest import PAULI_X, PAULI_Y, expi, operator_on

IMPLS = implementations()


def random_state(rng, n):
    amps = rng.normal(size=1 << n) + 1j * rng.normal(size=1 << n)
    return np.ascontiguousarray(amps / np.linalg.norm(amps))


@pytest.fixture(params=sorted(IMPLS))
def impl(request):
    return IMPLS[request.param]


def manual_energies(masks, coeffs, constant, n):
    out = np.full(1 << n, float(constant))
    for i in range(1 << n):
        for mask, coeff in zip(masks, coeffs):
            parity = bin(i & int(mask)).count("1") & 1
            out[i] += coeff * (1.0 - 2.0 * parity)
    return out


class TestDiagonal:
    def test_energies_match_manual_popcount(self, impl):
        rng = np.random.default_rng(0)
        n = 4
        masks = np.array([0b0011, 0b1000, 0b0110, 0b1111], dtype=np.uint64)
        coeffs = rng.normal(size=4)
        got = impl.diagonal_energies(masks, coeffs, 0.25, n)
        assert got == pytest.approx(manual_energies(masks, coeffs, 0.25, n), abs=1e-12)

    def test_accumulate_parity_phase(self, impl):
        n = 3
        phi = np.zeros(1 << n)
        impl.accumulate_parity_phase(phi, 0b101, 0.5)
        expected = manual_energies(
            np.array([0b101], dtype=np.uint64), np.array([0.5]), 0.0, n
        )
        assert phi == pytest.approx(expected, abs=1e-15)


class TestGates:
    def test_apply_phase(self, impl):
        rng = np.random.default_rng(1)
        amps = random_state(rng, 3)
        phi = rng.normal(size=8)
        expected = amps * np.exp(-1j * phi)
        impl.apply_phase(amps, phi)
        assert amps == pytest.approx(expected, abs=1e-14)

    def test_uniform_phase_equals_per_term_accumulation(self, impl):
        rng = np.random.default_rng(2)
        n = 5
        masks = np.array([0b00011, 0b01100, 0b10001, 0b00100], dtype=np.uint64)
        coeffs = rng.normal(size=4)
        constant = 1.7
        energies = impl.diagonal_energies(masks, coeffs, constant, n)
        gamma = 0.83
        fast = random_state(rng, n)
        slow = fast.copy()
        impl.apply_uniform_phase(fast, energies, gamma, constant)
        phi = np.zeros(1 << n)
        for mask, coeff in zip(masks, coeffs):
            impl.accumulate_parity_phase(phi, int(mask), gamma * coeff)
        impl.apply_phase(slow, phi)
        assert fast == pytest.approx(slow, abs=1e-12)

    @pytest.mark.parametrize("qubit", [0, 1, 2])
    def test_rx_matches_dense(self, impl, qubit):
        rng = np.random.default_rng(3 + qubit)
        n = 3
        amps = random_state(rng, n)
        beta = 0.37
        expected = expi(operator_on(n, {qubit: PAULI_X}), beta) @ amps
        impl.apply_rx(amps, beta, qubit)
        assert amps == pytest.approx(expected, abs=1e-12)

    @pytest.mark.parametrize("edge", [(0, 1), (0, 2), (1, 3)])
    def test_xy_matches_dense(self, impl, edge):
        rng = np.random.default_rng(10)
        n = 4
        amps = random_state(rng, n)
        beta = -0.61
        j, k = edge
        gen = 0.5 * (
            operator_on(n, {j: PAULI_X, k: PAULI_X})
            + operator_on(n, {j: PAULI_Y, k: PAULI_Y})
        )
        expected = expi(gen, beta) @ amps
        impl.apply_xy(amps, beta, j, k)
        assert amps == pytest.approx(expected, abs=1e-12)

    def test_hadamard(self, impl):
        amps = np.zeros(4, dtype=np.complex128)
        amps[0] = 1.0
        impl.apply_hadamard(amps, 0)
        impl.apply_hadamard(amps, 1)
        assert amps == pytest.approx(np.full(4, 0.5), abs=1e-15)


class TestReductions:
    def test_probabilities_and_expectation(self, impl):
        rng = np.random.default_rng(4)
        amps = random_state(rng, 4)
        energies = rng.normal(size=16)
        probs = impl.probabilities(amps)
        assert probs == pytest.approx(np.abs(amps) ** 2, abs=1e-15)
        assert impl.expectation(amps, energies) == pytest.approx(
            float(np.abs(amps) ** 2 @ energies), abs=1e-12
        )


@pytest.mark.skipif(len(IMPLS) < 2, reason="compiled kernels not built")
class TestCrossImplementation:
    def test_all_kernels_agree(self):
        rng = np.random.default_rng(5)
        n = 6
        base = random_state(rng, n)
        masks = np.array([0b000011, 0b110000, 0b001100], dtype=np.uint64)
        coeffs = np.array([0.5, -1.25, 2.0])
        results = {}
        for name, impl in IMPLS.items():
            amps = base.copy()
            energies = impl.diagonal_energies(masks, coeffs, 0.3, n)
            impl.apply_uniform_phase(amps, energies, 0.7, 0.3)
            impl.apply_rx(amps, 0.2, 1)
            impl.apply_xy(amps, 0.9, 0, 3)
            impl.apply_hadamard(amps, 5)
            results[name] = (amps, impl.expectation(amps, energies))
        names = sorted(results)
        ref_amps, ref_exp = results[names[0]]
        for name in names[1:]:
            amps, exp = results[name]
            assert amps == pytest.approx(ref_amps, abs=1e-12)
            assert exp == pytest.approx(ref_exp, abs=1e-12)
