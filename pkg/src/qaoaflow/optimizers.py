"""Classical optimization loop: gradient estimators, native update rules,
a derivative-free simplex method, stopping criteria, and run logging.

Per-iteration function-evaluation budgets (d = number of raw parameters):

* central finite differences cost ``2d`` evaluations per gradient,
  forward differences ``d + 1``;
* the parameter-shift rule costs 2 evaluations per extended-space cost or
  X-mixer coordinate and 4 per XY-mixer coordinate;
* SPSA costs exactly 2 evaluations per gradient estimate;
* every iteration of a gradient-based method adds one more evaluation at
  the updated iterate.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

from .ansatz import (
    AnsatzSpec,
    PerLayerAngles,
    VariationalParams,
    expand_params,
    expansion_matrix,
    param_count,
)
from .errors import InputError
from .simulator import VectorBackend

METHODS = ("gradient_descent", "rmsprop", "newton", "spsa", "nelder_mead")
GRADIENT_METHODS = ("finite_difference", "parameter_shift", "spsa")

# four-term shift rule weights for generators with eigenvalues {0, +-1}
_XY_SHIFTS = (np.pi / 4, 3 * np.pi / 4)
_XY_WEIGHTS = ((np.sqrt(2) + 1) / (2 * np.sqrt(2)), -(np.sqrt(2) - 1) / (2 * np.sqrt(2)))


@dataclass(frozen=True)
class OptimizerConfig:
    """Settings for :func:`optimize`; defaults follow standard practice."""

    method: str = "nelder_mead"
    maxiter: int = 100
    gradient_method: str = "finite_difference"
    step_size: float = 0.01
    fd_eps: float = 1e-6
    fd_scheme: str = "central"
    hessian_eps: float = 1e-4
    rmsprop_decay: float = 0.9
    rmsprop_eps: float = 1e-8
    newton_lambda: float = 1e-6
    spsa_a: float = 0.16
    spsa_c: float = 0.1
    spsa_A: float = 10.0
    spsa_alpha: float = 0.602
    spsa_gamma: float = 0.101
    ftol: float = 1e-10
    xtol: float = 1e-10
    seed: int | None = None
    optimization_progress: bool = False
    cost_progress: bool = True
    parameter_log: bool = False

    def __post_init__(self):
        if self.method not in METHODS:
            raise InputError(f"method must be one of {METHODS}, got {self.method!r}")
        if self.gradient_method not in GRADIENT_METHODS:
            raise InputError(
                f"gradient_method must be one of {GRADIENT_METHODS}, "
                f"got {self.gradient_method!r}"
            )
        if self.maxiter < 1:
            raise InputError(f"maxiter must be >= 1, got {self.maxiter}")
        for name in ("step_size", "fd_eps", "hessian_eps", "ftol", "xtol",
                     "spsa_a", "spsa_c"):
            if getattr(self, name) <= 0:
                raise InputError(f"{name} must be positive")
        if self.fd_scheme not in ("central", "forward"):
            raise InputError(f"fd_scheme must be 'central' or 'forward'")


@dataclass
class IterationRecord:
    iteration: int
    cost: float
    best_cost: float
    n_evals: int
    n_grad_evals: int
    n_shots: int
    params: list[float] | None = None

    def to_dict(self) -> dict:
        def _clean(x):
            return x if math.isfinite(x) else None

        out = {
            "iteration": self.iteration,
            "cost": _clean(self.cost),
            "best_cost": _clean(self.best_cost),
            "n_evals": self.n_evals,
            "n_grad_evals": self.n_grad_evals,
            "n_shots": self.n_shots,
        }
        if self.params is not None:
            out["params"] = self.params
        return out


@dataclass
class OptimizationLog:
    """Per-iteration history plus the best-observed point and stop reason."""

    records: list[IterationRecord] = field(default_factory=list)
    best_cost: float = math.inf
    best_params: np.ndarray | None = None
    termination_reason: str = ""

    def to_jsonl(self) -> str:
        return "\n".join(json.dumps(r.to_dict(), sort_keys=True) for r in self.records)

    def cost_csv(self) -> str:
        lines = ["iteration,cost"]
        lines.extend(f"{r.iteration},{r.cost!r}" for r in self.records)
        return "\n".join(lines) + "\n"


class FunctionBackend:
    """Adapter giving a bare callable the counting interface of a backend."""

    def __init__(self, fn: Callable[[np.ndarray], float]):
        self._fn = fn
        self.n_evals = 0
        self.n_shots_total = 0

    def cost(self, x: np.ndarray) -> float:
        self.n_evals += 1
        return float(self._fn(np.asarray(x, dtype=np.float64)))


# ---------------------------------------------------------------------------
# gradient estimators
# ---------------------------------------------------------------------------

def grad_finite_difference(
    fn: Callable[[np.ndarray], float],
    x: np.ndarray,
    eps: float = 1e-6,
    scheme: str = "central",
) -> np.ndarray:
    """Finite-difference gradient; `central` costs 2d evals, `forward` d+1."""
    if eps <= 0:
        raise InputError(f"eps must be positive, got {eps}")
    if scheme not in ("central", "forward"):
        raise InputError(f"scheme must be 'central' or 'forward', got {scheme!r}")
    x = np.asarray(x, dtype=np.float64)
    g = np.zeros_like(x)
    if scheme == "forward":
        f0 = fn(x)
    for i in range(x.shape[0]):
        shift = np.zeros_like(x)
        shift[i] = eps
        if scheme == "central":
            g[i] = (fn(x + shift) - fn(x - shift)) / (2 * eps)
        else:
            g[i] = (fn(x + shift) - f0) / eps
    return g


def grad_spsa(
    fn: Callable[[np.ndarray], float],
    x: np.ndarray,
    c_k: float,
    rng: np.random.Generator | int | None = None,
) -> np.ndarray:
    """Two-evaluation simultaneous-perturbation gradient estimate."""
    if c_k <= 0:
        raise InputError(f"c_k must be positive, got {c_k}")
    if not isinstance(rng, np.random.Generator):
        rng = np.random.default_rng(rng)
    x = np.asarray(x, dtype=np.float64)
    delta = rng.integers(0, 2, size=x.shape[0]) * 2.0 - 1.0
    diff = fn(x + c_k * delta) - fn(x - c_k * delta)
    return diff / (2.0 * c_k) * delta  # 1/delta_i == delta_i for +-1 entries


def hessian_finite_difference(
    fn: Callable[[np.ndarray], float], x: np.ndarray, eps: float = 1e-4
) -> np.ndarray:
    """Central-difference Hessian (symmetric by construction);
    costs ``1 + 2d + 2d(d-1)`` evaluations."""
    x = np.asarray(x, dtype=np.float64)
    d = x.shape[0]
    hess = np.zeros((d, d))
    f0 = fn(x)
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = eps
        hess[i, i] = (fn(x + ei) - 2 * f0 + fn(x - ei)) / eps**2
    for i in range(d):
        ei = np.zeros(d)
        ei[i] = eps
        for j in range(i + 1, d):
            ej = np.zeros(d)
            ej[j] = eps
            hij = (
                fn(x + ei + ej) - fn(x + ei - ej) - fn(x - ei + ej) + fn(x - ei - ej)
            ) / (4 * eps**2)
            hess[i, j] = hij
            hess[j, i] = hij
    return 0.5 * (hess + hess.T)


def grad_parameter_shift(
    backend: VectorBackend, spec: AnsatzSpec, params: VariationalParams
) -> np.ndarray:
    """Exact gradient via shifted circuit evaluations.

    Works in the extended space: a cost angle theta enters as
    ``exp(-1j * theta * c * P)`` for a Pauli string P, so its derivative is
    ``c * (f(theta + pi/(4c)) - f(theta - pi/(4c)))``; X-mixer angles are the
    ``c = -1`` case.  XY-mixer generators have eigenvalues {0, +-1} and use
    the four-term rule.  The raw-space gradient is the transpose of the linear
    raw -> extended expansion applied to the extended gradient.
    """
    if spec.param_type == "annealing":
        raise InputError(
            "parameter shift does not support the annealing parametrisation; "
            "use finite differences"
        )
    problem = backend.problem
    angles0 = expand_params(spec, params, problem)
    ext0 = angles0.flatten()
    n_lin = len(problem.linear)
    n_quad = len(problem.quadratic)
    mixer_terms = spec.mixer.terms(problem.n)
    n_mix = len(mixer_terms)
    per_layer = n_lin + n_quad + n_mix
    cost_coeffs = [c for _, c in problem.term_items()]

    def f_at(ext: np.ndarray) -> float:
        return backend.cost_from_angles(
            PerLayerAngles.from_flat(ext, spec.p, n_lin, n_quad, n_mix)
        )

    def two_term(index: int, coeff: float) -> float:
        shift = np.pi / (4.0 * coeff)
        plus = ext0.copy()
        plus[index] += shift
        minus = ext0.copy()
        minus[index] -= shift
        return coeff * (f_at(plus) - f_at(minus))

    def four_term(index: int) -> float:
        total = 0.0
        for shift, weight in zip(_XY_SHIFTS, _XY_WEIGHTS):
            plus = ext0.copy()
            plus[index] += shift
            minus = ext0.copy()
            minus[index] -= shift
            total += weight * (f_at(plus) - f_at(minus))
        return total

    g_ext = np.zeros_like(ext0)
    for layer in range(spec.p):
        base = layer * per_layer
        for t in range(n_lin + n_quad):
            coeff = cost_coeffs[t]
            if coeff == 0.0:
                continue
            g_ext[base + t] = two_term(base + t, coeff)
        for m, term in enumerate(mixer_terms):
            index = base + n_lin + n_quad + m
            if len(term) == 1:
                g_ext[index] = two_term(index, -1.0)
            else:
                g_ext[index] = four_term(index)

    jac = expansion_matrix(spec, problem)
    return jac.T @ g_ext


# ---------------------------------------------------------------------------
# optimization loop
# ---------------------------------------------------------------------------

def _as_backend(backend):
    if callable(backend) and not hasattr(backend, "cost"):
        return FunctionBackend(backend)
    return backend


def _spsa_gains(config: OptimizerConfig, k: int) -> tuple[float, float]:
    """Gain schedule at 0-based iteration k."""
    a_k = config.spsa_a / (k + 1 + config.spsa_A) ** config.spsa_alpha
    c_k = config.spsa_c / (k + 1) ** config.spsa_gamma
    return a_k, c_k


def optimize(
    backend,
    spec: AnsatzSpec | None,
    initial_params: VariationalParams | np.ndarray | Sequence[float],
    config: OptimizerConfig,
) -> tuple[VariationalParams | np.ndarray, OptimizationLog]:
    """Run the configured method and return the best-observed parameters.

    ``backend`` is a :class:`~qaoaflow.simulator.VectorBackend` or any bare
    callable ``f(x) -> float``.  Stops on ``maxiter``, ``|dcost| < ftol`` or
    ``||dx||_inf < xtol``, whichever triggers first; a non-finite objective
    aborts with a diagnostic record.
    """
    backend = _as_backend(backend)
    wrap_result = isinstance(initial_params, VariationalParams)
    x0 = (
        initial_params.raw.copy()
        if wrap_result
        else np.asarray(initial_params, dtype=np.float64).reshape(-1).copy()
    )
    if x0.size == 0:
        raise InputError("cannot optimize an empty parameter vector")
    if config.gradient_method == "parameter_shift" and config.method in (
        "gradient_descent", "rmsprop", "newton"
    ):
        if spec is None or not hasattr(backend, "cost_from_angles"):
            raise InputError(
                "parameter-shift gradients need a simulator backend and an ansatz spec"
            )

    state = _LoopState(backend, config)
    if config.method == "nelder_mead":
        x_best, log = _run_nelder_mead(state, x0)
    else:
        x_best, log = _run_gradient_loop(state, spec, x0, wrap_result)
    if wrap_result:
        return initial_params.replace_raw(x_best), log
    return x_best, log


class _LoopState:
    """Shared bookkeeping: counters, best-so-far tracking, record appends."""

    def __init__(self, backend, config: OptimizerConfig):
        self.backend = backend
        self.config = config
        self.log = OptimizationLog()
        self.n_grad_evals = 0
        self.rng = np.random.default_rng(config.seed)

    def evaluate(self, x: np.ndarray) -> float:
        return float(self.backend.cost(x))

    def observe(self, x: np.ndarray, f: float):
        if f < self.log.best_cost:
            self.log.best_cost = f
            self.log.best_params = x.copy()

    def record(self, iteration: int, cost: float, x: np.ndarray):
        self.log.records.append(
            IterationRecord(
                iteration=iteration,
                cost=cost,
                best_cost=self.log.best_cost,
                n_evals=self.backend.n_evals,
                n_grad_evals=self.n_grad_evals,
                n_shots=getattr(self.backend, "n_shots_total", 0),
                params=[float(v) for v in x] if self.config.parameter_log else None,
            )
        )


def _run_gradient_loop(state: _LoopState, spec, x0, params_are_variational):
    config = state.config
    backend = state.backend
    evaluate = state.evaluate

    def gradient(x: np.ndarray, k: int) -> np.ndarray:
        state.n_grad_evals += 1
        # the SPSA update rule is defined by its own estimator
        if config.method == "spsa" or config.gradient_method == "spsa":
            _, c_k = _spsa_gains(config, k)
            return grad_spsa(backend.cost, x, c_k, state.rng)
        if config.gradient_method == "parameter_shift":
            vp = VariationalParams(spec.param_type, x)
            return grad_parameter_shift(backend, spec, vp)
        return grad_finite_difference(
            backend.cost, x, eps=config.fd_eps, scheme=config.fd_scheme
        )

    x = x0.copy()
    f_prev = evaluate(x)
    if not math.isfinite(f_prev):
        state.record(0, f_prev, x)
        state.log.best_params = x.copy()
        state.log.best_cost = f_prev
        state.log.termination_reason = "non-finite objective"
        return x, state.log
    state.observe(x, f_prev)
    v = np.zeros_like(x)  # rmsprop accumulator

    for iteration in range(1, config.maxiter + 1):
        k = iteration - 1
        g = gradient(x, k)
        if not np.all(np.isfinite(g)):
            state.record(iteration, math.nan, x)
            state.log.termination_reason = "non-finite objective"
            return state.log.best_params, state.log

        if config.method == "gradient_descent":
            x_new = x - config.step_size * g
        elif config.method == "rmsprop":
            v = config.rmsprop_decay * v + (1 - config.rmsprop_decay) * g**2
            x_new = x - config.step_size * g / (np.sqrt(v) + config.rmsprop_eps)
        elif config.method == "newton":
            state.n_grad_evals += 0  # hessian evals are function evals
            hess = hessian_finite_difference(backend.cost, x, eps=config.hessian_eps)
            hess = hess + config.newton_lambda * np.eye(x.shape[0])
            try:
                step = np.linalg.solve(hess, g)
            except np.linalg.LinAlgError:
                step = g  # singular even with regularization: fall back to GD
            x_new = x - step
        elif config.method == "spsa":
            a_k, _ = _spsa_gains(config, k)
            x_new = x - a_k * g
        else:  # pragma: no cover
            raise InputError(f"unknown method {config.method!r}")

        f = evaluate(x_new)
        if not math.isfinite(f):
            state.record(iteration, f, x_new)
            state.log.termination_reason = "non-finite objective"
            return state.log.best_params, state.log
        state.observe(x_new, f)
        state.record(iteration, f, x_new)

        dx = float(np.max(np.abs(x_new - x)))
        df = abs(f - f_prev)
        x, f_prev = x_new, f
        if iteration == config.maxiter:
            state.log.termination_reason = "maxiter"
            break
        if df < config.ftol:
            state.log.termination_reason = "ftol"
            break
        if dx < config.xtol:
            state.log.termination_reason = "xtol"
            break
    return state.log.best_params, state.log


def _initial_simplex(x0: np.ndarray) -> np.ndarray:
    d = x0.shape[0]
    simplex = np.tile(x0, (d + 1, 1))
    for i in range(d):
        simplex[i + 1, i] += max(0.05 * abs(x0[i]), 0.00025)
    return simplex


def _run_nelder_mead(state: _LoopState, x0: np.ndarray):
    """Canonical simplex: reflection 1, expansion 2, contraction 0.5, shrink 0.5.

    The stopping spreads follow the simplex convention: ftol compares the
    worst and best vertex values, xtol the vertex coordinate spread.
    """
    config = state.config
    evaluate = state.evaluate
    simplex = _initial_simplex(x0)
    values = np.array([evaluate(v) for v in simplex])
    if not np.all(np.isfinite(values)):
        worst = int(np.argmax(~np.isfinite(values)))
        state.record(0, float(values[worst]), simplex[worst])
        state.log.termination_reason = "non-finite objective"
        finite = np.isfinite(values)
        if np.any(finite):
            best = int(np.argmin(np.where(finite, values, np.inf)))
            state.observe(simplex[best], float(values[best]))
        return (state.log.best_params if state.log.best_params is not None else x0,
                state.log)
    for v, f in zip(simplex, values):
        state.observe(v, float(f))

    for iteration in range(1, config.maxiter + 1):
        order = np.argsort(values, kind="stable")
        simplex = simplex[order]
        values = values[order]
        centroid = simplex[:-1].mean(axis=0)
        reflected = centroid + (centroid - simplex[-1])
        f_reflected = evaluate(reflected)

        if f_reflected < values[0]:
            expanded = centroid + 2.0 * (reflected - centroid)
            f_expanded = evaluate(expanded)
            if f_expanded < f_reflected:
                simplex[-1], values[-1] = expanded, f_expanded
            else:
                simplex[-1], values[-1] = reflected, f_reflected
        elif f_reflected < values[-2]:
            simplex[-1], values[-1] = reflected, f_reflected
        else:
            if f_reflected < values[-1]:
                contracted = centroid + 0.5 * (reflected - centroid)
            else:
                contracted = centroid + 0.5 * (simplex[-1] - centroid)
            f_contracted = evaluate(contracted)
            if f_contracted < min(f_reflected, values[-1]):
                simplex[-1], values[-1] = contracted, f_contracted
            else:
                for i in range(1, simplex.shape[0]):
                    simplex[i] = simplex[0] + 0.5 * (simplex[i] - simplex[0])
                    values[i] = evaluate(simplex[i])

        if not np.all(np.isfinite(values)):
            state.record(iteration, math.nan, simplex[0])
            state.log.termination_reason = "non-finite objective"
            return state.log.best_params, state.log

        best = int(np.argmin(values))
        state.observe(simplex[best], float(values[best]))
        state.record(iteration, float(values[best]), simplex[best])

        if iteration == config.maxiter:
            state.log.termination_reason = "maxiter"
            break
        f_spread = float(np.max(np.abs(values - values.min())))
        x_spread = float(np.max(np.abs(simplex - simplex[best])))
        if f_spread < config.ftol:
            state.log.termination_reason = "ftol"
            break
        if x_spread < config.xtol:
            state.log.termination_reason = "xtol"
            break
    return state.log.best_params, state.log
