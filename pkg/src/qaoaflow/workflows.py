"""End-to-end QAOA orchestration and the result object.

A run has three phases: preparation (validate inputs, precompute the cost
diagonal, build initial parameters), the classical-quantum loop, and result
assembly.  Errors surface as :class:`WorkflowError` tagged with the phase.

The JSON run-config schema consumed by :func:`load_run_config` (and the
CLI) has sections ``problem``, ``circuit_properties``, ``backend_properties``,
``classical_optimizer``, ``rqaoa`` plus top-level ``seed`` and ``top_k``;
every field is optional except the problem itself.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Mapping, Sequence

import numpy as np

from .ansatz import (
    AnsatzSpec,
    MixerSpec,
    VariationalParams,
    expand_params,
    init_params,
    param_count,
)
from .errors import ConfigError, InputError, QAOAFlowError, WorkflowError
from .optimizers import (
    IterationRecord,
    OptimizationLog,
    OptimizerConfig,
    optimize,
)
from .problems import IsingProblem, index_to_bits
from .rqaoa import RQAOAConfig
from .simulator import (
    BackendConfig,
    DiagonalCost,
    MeasurementOutcomes,
    VectorBackend,
)

DEFAULT_TOP_K = 10


def _bit_reversed(indices: np.ndarray, n: int) -> np.ndarray:
    """Mirror the low n bits: lexicographic bitstring order as an int key."""
    out = np.zeros_like(indices)
    for q in range(n):
        out |= ((indices >> q) & 1) << (n - 1 - q)
    return out


def top_k_bitstrings(
    distribution: Mapping[str, float] | np.ndarray, k: int
) -> list[tuple[str, float]]:
    """The k most probable bitstrings with their weights.

    Ties break toward the lexicographically smaller bitstring; entries with
    zero weight never appear, so fewer than k items may come back.
    """
    if k < 1:
        raise InputError(f"k must be >= 1, got {k}")
    if isinstance(distribution, np.ndarray):
        probs = np.asarray(distribution, dtype=np.float64)
        n = int(probs.shape[0]).bit_length() - 1
        idx = np.arange(probs.shape[0])
        order = np.lexsort((_bit_reversed(idx, n), -probs))
        out = []
        for i in order[: k]:
            if probs[i] <= 0.0:
                break
            out.append((index_to_bits(int(i), n), float(probs[i])))
        return out
    entries = [(bits, float(w)) for bits, w in distribution.items() if w > 0]
    entries.sort(key=lambda bw: (-bw[1], bw[0]))
    return entries[:k]


def lowest_cost_bitstring(
    observed: Mapping[str, int] | Iterable[str], cost: DiagonalCost
) -> tuple[str, float] | None:
    """Global argmin of the energy over observed bitstrings (ties: smallest
    bitstring); None when nothing was observed."""
    seen = observed.keys() if isinstance(observed, Mapping) else observed
    best: tuple[str, float] | None = None
    for bits in seen:
        e = cost.energy_of_bits(bits)
        if best is None or e < best[1] or (e == best[1] and bits < best[0]):
            best = (bits, e)
    return best


def _lowest_cost_from_probs(probs: np.ndarray, cost: DiagonalCost) -> tuple[str, float]:
    support = probs > 0.0
    energies = np.where(support, cost.energies, np.inf)
    e_min = float(energies.min())
    candidates = np.flatnonzero(energies == e_min)
    bits = min(index_to_bits(int(i), cost.n) for i in candidates)
    return bits, e_min


@dataclass
class QAOAResult:
    """Everything a run produces: optimum, distribution, counters, history."""

    param_type: str
    optimal_params: list[float]
    optimal_angles: dict[str, list]
    optimal_cost: float
    distribution_kind: str  # "exact" or "counts"
    probabilities: list[float] | None
    counts: dict[str, int] | None
    outcome_shots: int
    top_bitstrings: list[tuple[str, float]]
    lowest_cost_bits: str | None
    lowest_cost_energy: float | None
    n_evals: int
    n_grad_evals: int
    n_shots_total: int
    termination_reason: str
    log: OptimizationLog
    intermediate_distributions: list[dict] | None = None

    def to_dict(self) -> dict:
        def _num(x):
            return None if x is None or not math.isfinite(x) else float(x)

        return {
            "param_type": self.param_type,
            "optimal_params": [float(v) for v in self.optimal_params],
            "optimal_angles": self.optimal_angles,
            "optimal_cost": _num(self.optimal_cost),
            "distribution_kind": self.distribution_kind,
            "probabilities": self.probabilities,
            "counts": self.counts,
            "outcome_shots": self.outcome_shots,
            "top_bitstrings": [[b, p] for b, p in self.top_bitstrings],
            "lowest_cost_bits": self.lowest_cost_bits,
            "lowest_cost_energy": _num(self.lowest_cost_energy),
            "n_evals": self.n_evals,
            "n_grad_evals": self.n_grad_evals,
            "n_shots_total": self.n_shots_total,
            "termination_reason": self.termination_reason,
            "history": [r.to_dict() for r in self.log.records],
            "intermediate_distributions": self.intermediate_distributions,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "QAOAResult":
        records = [
            IterationRecord(
                iteration=r["iteration"],
                cost=math.nan if r["cost"] is None else r["cost"],
                best_cost=math.nan if r["best_cost"] is None else r["best_cost"],
                n_evals=r["n_evals"],
                n_grad_evals=r["n_grad_evals"],
                n_shots=r["n_shots"],
                params=r.get("params"),
            )
            for r in data["history"]
        ]
        finite_bests = [r.best_cost for r in records if math.isfinite(r.best_cost)]
        log = OptimizationLog(
            records=records,
            best_cost=min(finite_bests) if finite_bests else math.nan,
            best_params=np.asarray(data["optimal_params"], dtype=np.float64),
            termination_reason=data["termination_reason"],
        )
        return cls(
            param_type=data["param_type"],
            optimal_params=list(data["optimal_params"]),
            optimal_angles=data["optimal_angles"],
            optimal_cost=math.nan if data["optimal_cost"] is None else data["optimal_cost"],
            distribution_kind=data["distribution_kind"],
            probabilities=data["probabilities"],
            counts=data["counts"],
            outcome_shots=data["outcome_shots"],
            top_bitstrings=[(b, p) for b, p in data["top_bitstrings"]],
            lowest_cost_bits=data["lowest_cost_bits"],
            lowest_cost_energy=data["lowest_cost_energy"],
            n_evals=data["n_evals"],
            n_grad_evals=data["n_grad_evals"],
            n_shots_total=data["n_shots_total"],
            termination_reason=data["termination_reason"],
            log=log,
            intermediate_distributions=data.get("intermediate_distributions"),
        )


class QAOAWorkflow:
    """Two-call workflow: ``compile(problem)`` then ``optimize()``.

    Compilation validates the inputs against each other and precomputes the
    cost diagonal; it can be repeated with a new problem while keeping the
    same configuration.
    """

    def __init__(
        self,
        spec: AnsatzSpec | None = None,
        backend_config: BackendConfig | None = None,
        optimizer_config: OptimizerConfig | None = None,
        top_k: int = DEFAULT_TOP_K,
        seed: int | None = None,
        initial_values: Sequence[float] | None = None,
    ):
        self.spec = spec if spec is not None else AnsatzSpec()
        self.backend_config = backend_config if backend_config is not None else BackendConfig()
        self.optimizer_config = (
            optimizer_config if optimizer_config is not None else OptimizerConfig()
        )
        if top_k < 1:
            raise InputError(f"top_k must be >= 1, got {top_k}")
        self.top_k = top_k
        self.seed = seed
        self.initial_values = initial_values
        self.problem: IsingProblem | None = None
        self.backend: VectorBackend | None = None
        self.initial_params: VariationalParams | None = None
        self.result: QAOAResult | None = None

    # -- phases ---------------------------------------------------------

    def compile(self, problem: IsingProblem) -> "QAOAWorkflow":
        try:
            backend_config = self.backend_config
            optimizer_config = self.optimizer_config
            init_seed = None
            if self.seed is not None:
                root = np.random.SeedSequence(self.seed)
                init_ss, backend_ss, opt_ss = root.spawn(3)
                init_seed = int(init_ss.generate_state(1)[0])
                if backend_config.seed is None:
                    backend_config = replace(
                        backend_config, seed=int(backend_ss.generate_state(1)[0])
                    )
                if optimizer_config.seed is None:
                    optimizer_config = replace(
                        optimizer_config, seed=int(opt_ss.generate_state(1)[0])
                    )
            if optimizer_config.optimization_progress and not optimizer_config.parameter_log:
                # intermediate distributions are regenerated from logged params
                optimizer_config = replace(optimizer_config, parameter_log=True)
            backend = VectorBackend(problem, self.spec, backend_config)
            initial = init_params(
                self.spec, problem,
                custom_values=self.initial_values, seed=init_seed,
            )
            param_count(self.spec, problem)  # consistency check
        except QAOAFlowError as exc:
            raise WorkflowError("preparation", str(exc)) from exc
        self.problem = problem
        self.backend = backend
        self.initial_params = initial
        self._optimizer_config = optimizer_config
        self.result = None
        return self

    def optimize(self) -> QAOAResult:
        if self.backend is None or self.problem is None:
            raise WorkflowError("loop", "call compile(problem) before optimize()")
        try:
            best_params, log = optimize(
                self.backend, self.spec, self.initial_params, self._optimizer_config
            )
        except QAOAFlowError as exc:
            raise WorkflowError("loop", str(exc)) from exc
        try:
            self.result = self._assemble(best_params, log)
        except QAOAFlowError as exc:
            raise WorkflowError("result", str(exc)) from exc
        return self.result

    # -- result assembly ---------------------------------------------------

    def _assemble(self, best_params: VariationalParams, log: OptimizationLog) -> QAOAResult:
        backend = self.backend
        kind, dist = backend.final_distribution(best_params)
        if kind == "exact":
            probs = np.asarray(dist)
            top = top_k_bitstrings(probs, self.top_k)
            lowest = _lowest_cost_from_probs(probs, backend.cost_diag)
            probabilities = [float(p) for p in probs]
            counts = None
            outcome_shots = 0
        else:
            outcomes: MeasurementOutcomes = dist
            top = top_k_bitstrings(
                {b: c / outcomes.n_shots for b, c in outcomes.counts.items()},
                self.top_k,
            )
            lowest = backend.best_observed and (
                backend.best_observed[1], backend.best_observed[0]
            )
            probabilities = None
            counts = dict(sorted(outcomes.counts.items()))
            outcome_shots = outcomes.n_shots

        angles = expand_params(self.spec, best_params, self.problem)
        intermediate = None
        if self._optimizer_config.optimization_progress:
            intermediate = self._intermediate_distributions(log)

        return QAOAResult(
            param_type=self.spec.param_type,
            optimal_params=[float(v) for v in best_params.raw],
            optimal_angles={
                "gamma_linear": angles.gamma_linear.tolist(),
                "gamma_quadratic": angles.gamma_quadratic.tolist(),
                "beta": angles.beta.tolist(),
            },
            optimal_cost=float(log.best_cost),
            distribution_kind=kind,
            probabilities=probabilities,
            counts=counts,
            outcome_shots=outcome_shots,
            top_bitstrings=top,
            lowest_cost_bits=lowest[0] if lowest else None,
            lowest_cost_energy=lowest[1] if lowest else None,
            n_evals=backend.n_evals,
            n_grad_evals=log.records[-1].n_grad_evals if log.records else 0,
            n_shots_total=backend.n_shots_total,
            termination_reason=log.termination_reason,
            log=log,
            intermediate_distributions=intermediate,
        )

    def _intermediate_distributions(self, log: OptimizationLog) -> list[dict]:
        """Distributions regenerated at every logged iterate."""
        out = []
        for record in log.records:
            if record.params is None:
                continue
            params = VariationalParams(self.spec.param_type, np.asarray(record.params))
            kind, dist = self.backend.final_distribution(params)
            entry: dict = {"iteration": record.iteration}
            if kind == "exact":
                entry["probabilities"] = [float(p) for p in np.asarray(dist)]
            else:
                entry["counts"] = dict(sorted(dist.counts.items()))
            out.append(entry)
        return out


def run_qaoa(
    problem: IsingProblem,
    spec: AnsatzSpec | None = None,
    backend_config: BackendConfig | None = None,
    optimizer_config: OptimizerConfig | None = None,
    top_k: int = DEFAULT_TOP_K,
    seed: int | None = None,
    initial_values: Sequence[float] | None = None,
) -> QAOAResult:
    """One-shot convenience wrapper around :class:`QAOAWorkflow`."""
    workflow = QAOAWorkflow(
        spec=spec,
        backend_config=backend_config,
        optimizer_config=optimizer_config,
        top_k=top_k,
        seed=seed,
        initial_values=initial_values,
    )
    return workflow.compile(problem).optimize()


def landscape_scan(
    problem: IsingProblem,
    spec: AnsatzSpec,
    gamma_values: Sequence[float],
    beta_values: Sequence[float],
    backend_config: BackendConfig | None = None,
) -> np.ndarray:
    """Cost over the Cartesian grid of a two-parameter ansatz.

    Rows follow the first raw parameter (gamma-like), columns the second.
    """
    if param_count(spec, problem) != 2:
        raise InputError(
            "landscape scans need a parametrisation with exactly 2 raw "
            f"parameters; this one has {param_count(spec, problem)}"
        )
    backend = VectorBackend(
        problem, spec, backend_config if backend_config is not None else BackendConfig()
    )
    gamma_values = np.asarray(gamma_values, dtype=np.float64)
    beta_values = np.asarray(beta_values, dtype=np.float64)
    grid = np.empty((gamma_values.shape[0], beta_values.shape[0]))
    for i, g in enumerate(gamma_values):
        for j, b in enumerate(beta_values):
            grid[i, j] = backend.cost(np.array([g, b]))
    return grid


# ---------------------------------------------------------------------------
# run-config schema
# ---------------------------------------------------------------------------

@dataclass
class RunSetup:
    """Everything a CLI run needs, parsed from one JSON document."""

    problem: IsingProblem
    spec: AnsatzSpec
    backend_config: BackendConfig
    optimizer_config: OptimizerConfig
    rqaoa_config: RQAOAConfig | None
    seed: int | None
    top_k: int
    initial_values: list[float] | None


_CIRCUIT_KEYS = {
    "p", "param_type", "init_type", "mixer_hamiltonian", "mixer_edges",
    "fourier_q", "init_hadamard", "total_annealing_time", "initial_values",
}
_BACKEND_KEYS = {"n_shots", "cvar_alpha", "init_hadamard", "seed"}
_OPTIMIZER_KEYS = {
    "method", "maxiter", "gradient_method", "step_size", "fd_eps", "fd_scheme",
    "hessian_eps", "rmsprop_decay", "rmsprop_eps", "newton_lambda",
    "spsa_a", "spsa_c", "spsa_A", "spsa_alpha", "spsa_gamma",
    "ftol", "xtol", "seed",
    "optimization_progress", "cost_progress", "parameter_log",
}
_RQAOA_KEYS = {"rqaoa_type", "steps", "n_max", "n_cutoff"}
_TOP_KEYS = {"problem", "circuit_properties", "backend_properties",
             "classical_optimizer", "rqaoa", "seed", "top_k"}


def _check_keys(section: Mapping, allowed: set[str], where: str):
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(
            f"unknown field(s) {sorted(unknown)} in {where}; "
            f"allowed: {sorted(allowed)}"
        )


def load_run_config(config: Mapping) -> RunSetup:
    """Validate a parsed JSON run config and build the typed pieces."""
    if not isinstance(config, Mapping):
        raise ConfigError("run config must be a JSON object")
    _check_keys(config, _TOP_KEYS, "the top-level config")
    if "problem" not in config:
        raise ConfigError("config is missing the required 'problem' section")
    try:
        problem = IsingProblem.from_dict(config["problem"])
    except (InputError, TypeError) as exc:
        raise ConfigError(f"invalid 'problem' section: {exc}") from exc

    circuit = dict(config.get("circuit_properties", {}))
    _check_keys(circuit, _CIRCUIT_KEYS, "'circuit_properties'")
    initial_values = circuit.pop("initial_values", None)
    mixer_kind = circuit.pop("mixer_hamiltonian", "x")
    mixer_edges = circuit.pop("mixer_edges", None)
    try:
        mixer = MixerSpec(
            kind=mixer_kind,
            edges=tuple(tuple(e) for e in mixer_edges) if mixer_edges else None,
        )
        spec = AnsatzSpec(mixer=mixer, **circuit)
    except (InputError, TypeError) as exc:
        raise ConfigError(f"invalid 'circuit_properties' section: {exc}") from exc

    backend_section = dict(config.get("backend_properties", {}))
    _check_keys(backend_section, _BACKEND_KEYS, "'backend_properties'")
    try:
        backend_config = BackendConfig(**backend_section)
    except (InputError, TypeError) as exc:
        raise ConfigError(f"invalid 'backend_properties' section: {exc}") from exc

    optimizer_section = dict(config.get("classical_optimizer", {}))
    _check_keys(optimizer_section, _OPTIMIZER_KEYS, "'classical_optimizer'")
    try:
        optimizer_config = OptimizerConfig(**optimizer_section)
    except (InputError, TypeError) as exc:
        raise ConfigError(f"invalid 'classical_optimizer' section: {exc}") from exc

    rqaoa_config = None
    if "rqaoa" in config:
        rqaoa_section = dict(config["rqaoa"])
        _check_keys(rqaoa_section, _RQAOA_KEYS, "'rqaoa'")
        try:
            rqaoa_config = RQAOAConfig(**rqaoa_section)
        except (InputError, TypeError) as exc:
            raise ConfigError(f"invalid 'rqaoa' section: {exc}") from exc

    seed = config.get("seed")
    if seed is not None and not isinstance(seed, int):
        raise ConfigError(f"'seed' must be an integer, got {seed!r}")
    top_k = config.get("top_k", DEFAULT_TOP_K)
    if not isinstance(top_k, int) or top_k < 1:
        raise ConfigError(f"'top_k' must be a positive integer, got {top_k!r}")

    if initial_values is not None:
        if spec.init_type != "custom":
            raise ConfigError(
                "'initial_values' requires init_type='custom' in "
                "'circuit_properties'"
            )
        initial_values = [float(v) for v in initial_values]
    elif spec.init_type == "custom":
        raise ConfigError(
            "init_type='custom' needs 'initial_values' in 'circuit_properties'"
        )

    return RunSetup(
        problem=problem,
        spec=spec,
        backend_config=backend_config,
        optimizer_config=optimizer_config,
        rqaoa_config=rqaoa_config,
        seed=seed,
        top_k=top_k,
        initial_values=initial_values,
    )
