"""Diagonal-cost statevector engine.

The cost operator of an Ising Hamiltonian is diagonal in the computational
basis, so a layer is one elementwise phase multiplication; mixers are
single-qubit X rotations or two-qubit XY rotations applied as index
butterflies.  Hot loops live in :mod:`qaoaflow._kernels`.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterator, Mapping

import numpy as np

from . import _kernels as kernels
from .ansatz import AnsatzSpec, MixerSpec, PerLayerAngles, VariationalParams, expand_params
from .errors import InputError, SizeLimitError
from .problems import IsingProblem, bits_to_index, index_to_bits

#: Largest qubit count the statevector engine accepts by default.
SIMULATOR_LIMIT = 26

NORM_ATOL = 1e-8


@dataclass(eq=False)
class StateVector:
    """2**n complex amplitudes; qubit q lives at bit q of the index."""

    n: int
    amplitudes: np.ndarray

    def __post_init__(self):
        self.amplitudes = np.ascontiguousarray(self.amplitudes, dtype=np.complex128)
        if self.amplitudes.shape != (1 << self.n,):
            raise InputError(
                f"state on {self.n} qubits needs {1 << self.n} amplitudes, "
                f"got shape {self.amplitudes.shape}"
            )

    def norm(self) -> float:
        return float(np.sqrt(np.sum(self.amplitudes.real**2 + self.amplitudes.imag**2)))

    def probabilities(self) -> np.ndarray:
        return kernels.probabilities(self.amplitudes)

    def copy(self) -> "StateVector":
        return StateVector(self.n, self.amplitudes.copy())


@dataclass(eq=False)
class DiagonalCost:
    """Precomputed diagonal of the cost Hamiltonian plus per-term parity masks."""

    n: int
    energies: np.ndarray
    masks: np.ndarray
    coeffs: np.ndarray
    constant: float

    @property
    def num_terms(self) -> int:
        return int(self.masks.shape[0])

    def energy_of_bits(self, bits: str) -> float:
        return float(self.energies[bits_to_index(bits)])


@dataclass
class MeasurementOutcomes:
    """Counts of sampled bitstrings."""

    counts: dict[str, int]
    n_shots: int

    def __post_init__(self):
        if self.n_shots < 1:
            raise InputError("need at least one shot")
        if sum(self.counts.values()) != self.n_shots:
            raise InputError("counts do not sum to n_shots")

    def items(self) -> Iterator[tuple[str, int]]:
        return iter(self.counts.items())

    def to_dict(self) -> dict:
        return {"counts": dict(self.counts), "n_shots": self.n_shots}


@dataclass(frozen=True, eq=False)
class BackendConfig:
    """Execution options: shots (0 = exact), CVaR alpha, initial state, seed."""

    n_shots: int = 0
    cvar_alpha: float = 1.0
    init_hadamard: bool = True
    prepend_state: np.ndarray | None = None
    seed: int | None = None

    def __post_init__(self):
        if self.n_shots < 0:
            raise InputError(f"n_shots must be >= 0, got {self.n_shots}")
        if not 0.0 < self.cvar_alpha <= 1.0:
            raise InputError(f"cvar_alpha must be in (0, 1], got {self.cvar_alpha}")


def precompute_diagonal(problem: IsingProblem, limit: int = SIMULATOR_LIMIT) -> DiagonalCost:
    """Diagonalize the cost Hamiltonian: eigenvalue per basis state plus masks."""
    if problem.n > limit:
        raise SizeLimitError(
            f"simulating n={problem.n} qubits exceeds the capacity limit of {limit}"
        )
    items = problem.term_items()
    masks = np.zeros(len(items), dtype=np.uint64)
    coeffs = np.zeros(len(items), dtype=np.float64)
    for t, (indices, coeff) in enumerate(items):
        mask = 0
        for j in indices:
            mask |= 1 << j
        masks[t] = mask
        coeffs[t] = coeff
    energies = kernels.diagonal_energies(masks, coeffs, problem.constant, problem.n)
    return DiagonalCost(
        n=problem.n, energies=energies, masks=masks, coeffs=coeffs,
        constant=problem.constant,
    )


def prepare_initial_state(n: int, config: BackendConfig) -> StateVector:
    """|0...0>, or the prepend state if given; then Hadamards if requested."""
    size = 1 << n
    if config.prepend_state is not None:
        amps = np.ascontiguousarray(config.prepend_state, dtype=np.complex128)
        if amps.shape != (size,):
            raise InputError(
                f"prepend state must have dimension {size}, got {amps.shape}"
            )
        nrm = float(np.linalg.norm(amps))
        if abs(nrm - 1.0) > NORM_ATOL:
            raise InputError(f"prepend state is not normalized (norm {nrm})")
        amps = amps.copy()
    else:
        amps = np.zeros(size, dtype=np.complex128)
        amps[0] = 1.0
    if config.init_hadamard:
        for q in range(n):
            kernels.apply_hadamard(amps, q)
    return StateVector(n, amps)


def apply_cost_layer(
    state: StateVector, gammas: np.ndarray, cost: DiagonalCost
) -> StateVector:
    """Multiply each amplitude by exp(-1j * sum_t gamma_t * coeff_t * parity_t).

    When all angles coincide the precomputed diagonal is reused directly.
    """
    gammas = np.asarray(gammas, dtype=np.float64).reshape(-1)
    if gammas.shape[0] != cost.num_terms:
        raise InputError(
            f"need one angle per cost term ({cost.num_terms}), got {gammas.shape[0]}"
        )
    if cost.num_terms == 0:
        return state
    if np.all(gammas == gammas[0]):
        kernels.apply_uniform_phase(
            state.amplitudes, cost.energies, float(gammas[0]), cost.constant
        )
        return state
    phi = np.zeros(state.amplitudes.shape[0], dtype=np.float64)
    for t in range(cost.num_terms):
        weight = float(gammas[t]) * float(cost.coeffs[t])
        if weight != 0.0:
            kernels.accumulate_parity_phase(phi, int(cost.masks[t]), weight)
    kernels.apply_phase(state.amplitudes, phi)
    return state


def apply_mixer_layer(
    state: StateVector, betas: np.ndarray, mixer: MixerSpec
) -> StateVector:
    """Apply exp(+1j beta_t M_t) for every mixer term, in application order."""
    terms = mixer.terms(state.n)
    betas = np.asarray(betas, dtype=np.float64).reshape(-1)
    if betas.shape[0] != len(terms):
        raise InputError(
            f"need one angle per mixer term ({len(terms)}), got {betas.shape[0]}"
        )
    for beta, term in zip(betas, terms):
        if len(term) == 1:
            kernels.apply_rx(state.amplitudes, float(beta), term[0])
        else:
            kernels.apply_xy(state.amplitudes, float(beta), term[0], term[1])
    return state


def run_circuit(
    problem: IsingProblem,
    spec: AnsatzSpec,
    params: VariationalParams,
    cost: DiagonalCost | None = None,
    init_hadamard: bool | None = None,
    prepend_state: np.ndarray | None = None,
) -> StateVector:
    """Prepare the initial state and apply p alternating cost/mixer layers."""
    if cost is None:
        cost = precompute_diagonal(problem)
    angles = expand_params(spec, params, problem)
    init_config = BackendConfig(
        init_hadamard=spec.init_hadamard if init_hadamard is None else init_hadamard,
        prepend_state=spec.prepend_state if prepend_state is None else prepend_state,
    )
    state = prepare_initial_state(problem.n, init_config)
    for layer in range(spec.p):
        apply_cost_layer(state, angles.cost_layer(layer), cost)
        apply_mixer_layer(state, angles.beta[layer], spec.mixer)
    return state


def expectation_exact(state: StateVector, cost: DiagonalCost) -> float:
    """<psi| H |psi> for the diagonal Hamiltonian."""
    if state.amplitudes.shape != cost.energies.shape:
        raise InputError("state and diagonal have mismatched dimensions")
    return kernels.expectation(state.amplitudes, cost.energies)


def sample(
    state: StateVector,
    n_shots: int,
    seed: int | np.random.Generator | None = None,
) -> MeasurementOutcomes:
    """Draw i.i.d. computational-basis measurements."""
    if n_shots < 1:
        raise InputError(f"n_shots must be >= 1, got {n_shots}")
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    probs = state.probabilities()
    probs = probs / probs.sum()
    draws = rng.choice(probs.shape[0], size=n_shots, p=probs)
    values, freq = np.unique(draws, return_counts=True)
    counts = {
        index_to_bits(int(i), state.n): int(c) for i, c in zip(values, freq)
    }
    return MeasurementOutcomes(counts=counts, n_shots=n_shots)


def expectation_from_samples(
    outcomes: MeasurementOutcomes, cost: DiagonalCost, cvar_alpha: float = 1.0
) -> float:
    """CVaR estimate: mean of the lowest ceil(alpha * shots) sampled energies.

    ``alpha = 1`` is the plain sample mean.
    """
    if not 0.0 < cvar_alpha <= 1.0:
        raise InputError(f"cvar_alpha must be in (0, 1], got {cvar_alpha}")
    if not outcomes.counts:
        raise InputError("cannot estimate an expectation from empty outcomes")
    energies = np.concatenate([
        np.full(c, cost.energy_of_bits(bits)) for bits, c in outcomes.items()
    ])
    if cvar_alpha == 1.0:
        return float(energies.mean())
    energies.sort()
    k = math.ceil(cvar_alpha * outcomes.n_shots)
    return float(energies[:k].mean())


class VectorBackend:
    """Evaluation engine binding one problem, ansatz and execution config.

    Tracks evaluation counters, total shots, and (for shot-based runs) the
    lowest-energy bitstring observed in any sample.
    """

    def __init__(
        self,
        problem: IsingProblem,
        spec: AnsatzSpec,
        config: BackendConfig | None = None,
        limit: int = SIMULATOR_LIMIT,
    ):
        self.problem = problem
        self.spec = spec
        self.config = config if config is not None else BackendConfig()
        self.cost_diag = precompute_diagonal(problem, limit=limit)
        self.mixer_terms = spec.mixer.terms(problem.n)
        self.n_evals = 0
        self.n_shots_total = 0
        self.best_observed: tuple[float, str] | None = None
        root = np.random.SeedSequence(self.config.seed)
        self._entropy = root.entropy

    # -- simulation ------------------------------------------------------

    def simulate(self, params: VariationalParams) -> StateVector:
        return run_circuit(
            self.problem, self.spec, params, cost=self.cost_diag,
            init_hadamard=self.config.init_hadamard,
            prepend_state=self.config.prepend_state,
        )

    def simulate_angles(self, angles: PerLayerAngles) -> StateVector:
        init_config = BackendConfig(
            init_hadamard=self.config.init_hadamard,
            prepend_state=self.config.prepend_state,
        )
        state = prepare_initial_state(self.problem.n, init_config)
        for layer in range(self.spec.p):
            apply_cost_layer(state, angles.cost_layer(layer), self.cost_diag)
            apply_mixer_layer(state, angles.beta[layer], self.spec.mixer)
        return state

    # -- cost evaluation ---------------------------------------------------

    def cost(self, raw: np.ndarray) -> float:
        """Objective value at a raw parameter vector."""
        params = VariationalParams(self.spec.param_type, raw)
        return self._evaluate(self.simulate(params))

    def cost_from_angles(self, angles: PerLayerAngles) -> float:
        """Objective value at explicit extended-space angles."""
        return self._evaluate(self.simulate_angles(angles))

    def _evaluate(self, state: StateVector) -> float:
        eval_index = self.n_evals
        self.n_evals += 1
        if self.config.n_shots == 0:
            return expectation_exact(state, self.cost_diag)
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=self._entropy, spawn_key=(eval_index,))
        )
        outcomes = sample(state, self.config.n_shots, seed=rng)
        self.n_shots_total += outcomes.n_shots
        self._observe(outcomes)
        return expectation_from_samples(outcomes, self.cost_diag, self.config.cvar_alpha)

    def _observe(self, outcomes: MeasurementOutcomes):
        for bits in outcomes.counts:
            e = self.cost_diag.energy_of_bits(bits)
            if (
                self.best_observed is None
                or e < self.best_observed[0]
                or (e == self.best_observed[0] and bits < self.best_observed[1])
            ):
                self.best_observed = (e, bits)

    # -- result-phase helpers ----------------------------------------------

    def final_distribution(
        self, params: VariationalParams
    ) -> tuple[str, np.ndarray | MeasurementOutcomes]:
        """('exact', probabilities) or ('counts', outcomes) at given params."""
        state = self.simulate(params)
        if self.config.n_shots == 0:
            return "exact", state.probabilities()
        eval_index = self.n_evals
        self.n_evals += 1
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=self._entropy, spawn_key=(eval_index,))
        )
        outcomes = sample(state, self.config.n_shots, seed=rng)
        self.n_shots_total += outcomes.n_shots
        self._observe(outcomes)
        return "counts", outcomes
