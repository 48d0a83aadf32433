"""Shared fixtures and independent oracles.

The dense oracle builds explicit 2^n x 2^n operators from Pauli matrices
and exponentiates them by eigendecomposition; it never touches the
package's kernels, so it can vouch for them.
"""

import numpy as np
import pytest

from qaoaflow import IsingProblem, maxcut_to_ising

I2 = np.eye(2, dtype=complex)
PAULI_X = np.array([[0, 1], [1, 0]], dtype=complex)
PAULI_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
PAULI_Z = np.array([[1, 0], [0, -1]], dtype=complex)

# the paper-style 5-spin example instance: h1=3, h3=5, J12=1, J23=2, J03=3, J04=4
EXAMPLE_TERMS = [(1, 2), (2, 3), (0, 3), (4, 0), (1,), (3,)]
EXAMPLE_COEFFS = [1, 2, 3, 4, 3, 5]
EXAMPLE_N = 5
# frozen brute-force fixture (independent enumeration)
EXAMPLE_MIN_ENERGY = -18.0
EXAMPLE_MINIMIZERS = ["01011"]


@pytest.fixture
def example_problem():
    return IsingProblem.from_terms(EXAMPLE_TERMS, EXAMPLE_COEFFS, EXAMPLE_N)


@pytest.fixture
def single_edge():
    """H = Z0 Z1; exact p=1 landscape is -sin(4 beta) sin(2 gamma)."""
    return IsingProblem.from_terms([(0, 1)], [1.0], 2)


@pytest.fixture
def triangle_maxcut():
    return maxcut_to_ising([(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0)])


def operator_on(n, ops):
    """Tensor product placing 2x2 blocks on chosen qubits (qubit 0 = LSB)."""
    out = np.array([[1.0 + 0j]])
    for q in range(n - 1, -1, -1):
        out = np.kron(out, ops.get(q, I2))
    return out


def dense_cost_matrix(problem):
    n = problem.n
    h = problem.constant * np.eye(1 << n, dtype=complex)
    for j, coeff in problem.linear_terms:
        h += coeff * operator_on(n, {j: PAULI_Z})
    for (j, k), coeff in problem.quadratic_terms:
        h += coeff * operator_on(n, {j: PAULI_Z, k: PAULI_Z})
    return h


def expi(hermitian, theta):
    """exp(1j * theta * H) for Hermitian H, via eigendecomposition."""
    w, v = np.linalg.eigh(hermitian)
    return (v * np.exp(1j * theta * w)) @ v.conj().T


def oracle_cost_layer(problem, gammas):
    """Unitary of one cost layer with per-term angles (canonical term order)."""
    n = problem.n
    generator = np.zeros((1 << n, 1 << n), dtype=complex)
    for angle, (indices, coeff) in zip(gammas, problem.term_items()):
        ops = {j: PAULI_Z for j in indices}
        generator += angle * coeff * operator_on(n, ops)
    return expi(generator, -1.0)


def oracle_mixer_layer(n, betas, terms):
    """Ordered product of per-term mixer exponentials."""
    unitary = np.eye(1 << n, dtype=complex)
    for beta, term in zip(betas, terms):
        if len(term) == 1:
            gen = operator_on(n, {term[0]: PAULI_X})
        else:
            j, k = term
            gen = 0.5 * (
                operator_on(n, {j: PAULI_X, k: PAULI_X})
                + operator_on(n, {j: PAULI_Y, k: PAULI_Y})
            )
        unitary = expi(gen, beta) @ unitary
    return unitary


def oracle_run_circuit(problem, angles, mixer_terms, init_hadamard=True,
                       prepend=None):
    """Full circuit by dense matrix algebra; angles is a PerLayerAngles."""
    n = problem.n
    if prepend is not None:
        state = np.asarray(prepend, dtype=complex).copy()
    else:
        state = np.zeros(1 << n, dtype=complex)
        state[0] = 1.0
    if init_hadamard:
        hadamard = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
        for q in range(n):
            state = operator_on(n, {q: hadamard}) @ state
    for layer in range(angles.p):
        state = oracle_cost_layer(problem, angles.cost_layer(layer)) @ state
        state = oracle_mixer_layer(n, angles.beta[layer], mixer_terms) @ state
    return state


def random_problem(rng, n, density=0.7):
    """Random instance with nonzero linear and quadratic content."""
    terms, coeffs = [], []
    for j in range(n):
        if rng.random() < density:
            terms.append((j,))
            coeffs.append(rng.uniform(-1.5, 1.5))
    for j in range(n):
        for k in range(j + 1, n):
            if rng.random() < density:
                terms.append((j, k))
                coeffs.append(rng.uniform(-1.5, 1.5))
    if not terms:
        terms, coeffs = [(0, 1)], [1.0]
    return IsingProblem.from_terms(terms, coeffs, n)
