"""Pure-NumPy statevector kernels.

Mirrors the compiled core in `_core.pyx`; every function here and there
must produce the same values (up to floating-point reassociation noise
below 1e-12).  Amplitude arrays are complex128 and modified in place.
Basis convention: qubit q lives at bit q of the array index.
"""

import numpy as np


def _num_qubits(amps):
    return int(amps.shape[0]).bit_length() - 1


def _parity_signs(mask, size):
    idx = np.arange(size, dtype=np.uint64)
    odd = np.bitwise_count(idx & np.uint64(mask)) & np.uint8(1)
    return 1.0 - 2.0 * odd


def diagonal_energies(masks, coeffs, constant, n):
    """Eigenvalues of a diagonal Pauli-Z Hamiltonian on all 2**n basis states."""
    size = 1 << n
    energies = np.full(size, float(constant))
    for mask, coeff in zip(masks, coeffs):
        energies += coeff * _parity_signs(int(mask), size)
    return energies


def accumulate_parity_phase(phi, mask, weight):
    """phi[i] += weight * (-1)**popcount(i & mask), in place."""
    phi += weight * _parity_signs(int(mask), phi.shape[0])


def apply_phase(amps, phi):
    """amps[i] *= exp(-1j * phi[i]), in place."""
    amps *= np.exp(-1j * phi)


def apply_uniform_phase(amps, energies, gamma, constant):
    """amps[i] *= exp(-1j * gamma * (energies[i] - constant)), in place."""
    amps *= np.exp(-1j * gamma * (energies - constant))


def apply_rx(amps, beta, qubit):
    """Apply exp(+1j * beta * X_qubit), in place."""
    n = _num_qubits(amps)
    view = amps.reshape(1 << (n - qubit - 1), 2, 1 << qubit)
    a = view[:, 0, :].copy()
    b = view[:, 1, :]
    c, s = np.cos(beta), np.sin(beta)
    view[:, 0, :] = c * a + 1j * s * b
    view[:, 1, :] = 1j * s * a + c * b


def apply_hadamard(amps, qubit):
    """Apply the Hadamard gate on one qubit, in place."""
    n = _num_qubits(amps)
    view = amps.reshape(1 << (n - qubit - 1), 2, 1 << qubit)
    a = view[:, 0, :].copy()
    b = view[:, 1, :]
    inv = 1.0 / np.sqrt(2.0)
    view[:, 0, :] = (a + b) * inv
    view[:, 1, :] = (a - b) * inv


def apply_xy(amps, beta, qj, qk):
    """Apply exp(+1j * beta * (X_j X_k + Y_j Y_k) / 2) on qubits qj < qk, in place.

    Identity on the aligned {00, 11} subspace; rotates the {01, 10} block.
    """
    n = _num_qubits(amps)
    view = amps.reshape(
        1 << (n - qk - 1), 2, 1 << (qk - qj - 1), 2, 1 << qj
    )
    # axis 1 is bit qk, axis 3 is bit qj
    v_j = view[:, 0, :, 1, :].copy()  # qubit j set, qubit k clear
    v_k = view[:, 1, :, 0, :]         # qubit k set, qubit j clear
    c, s = np.cos(beta), np.sin(beta)
    view[:, 0, :, 1, :] = c * v_j + 1j * s * v_k
    view[:, 1, :, 0, :] = 1j * s * v_j + c * v_k


def probabilities(amps):
    return amps.real**2 + amps.imag**2


def expectation(amps, energies):
    """sum_i |amps[i]|^2 * energies[i] (pairwise reduction, single thread)."""
    return float(np.sum((amps.real**2 + amps.imag**2) * energies))
