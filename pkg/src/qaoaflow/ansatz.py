"""Circuit properties and parametrisation families.

A raw parameter vector is expanded to one angle per Hamiltonian term and
per mixer term, for every layer.  Raw layouts:

* ``standard``           -- ``[gamma_1..gamma_p, beta_1..beta_p]``
* ``standard_with_bias`` -- ``[gamma_single_1..p, gamma_pair_1..p, beta_1..p]``
* ``extended``           -- per layer ``[linear angles, pair angles, mixer
  angles]`` (each group in canonical term order), layers concatenated
* ``fourier``            -- ``[u_1..u_q, v_1..v_q]``; per-layer angles are
  ``gamma_L = sum_k u_k sin((k-1/2)(L-1/2)pi/p)`` and
  ``beta_L = sum_k v_k cos((k-1/2)(L-1/2)pi/p)``
* ``annealing``          -- ``[s_1..s_p]`` with ``s_L in [0, 1]``; with
  ``dt = T/p`` the angles are ``gamma_L = s_L dt`` and
  ``beta_L = (1 - s_L) dt``
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DomainError, InputError
from .problems import IsingProblem

PARAM_TYPES = ("standard", "standard_with_bias", "extended", "fourier", "annealing")
INIT_TYPES = ("ramp", "rand", "custom")
MIXER_KINDS = ("x", "xy")

#: Linear-in-raw parametrisations (everything except the annealing schedule).
LINEAR_PARAM_TYPES = ("standard", "standard_with_bias", "extended", "fourier")


@dataclass(frozen=True)
class MixerSpec:
    """Mixer choice: single-qubit X rotations or two-qubit XY hopping.

    For the XY mixer, ``edges`` lists the coupled pairs; ``None`` means all
    pairs of qubits.
    """

    kind: str = "x"
    edges: tuple[tuple[int, int], ...] | None = None

    def __post_init__(self):
        if self.kind not in MIXER_KINDS:
            raise InputError(f"mixer kind must be one of {MIXER_KINDS}, got {self.kind!r}")
        if self.kind == "x" and self.edges is not None:
            raise InputError("the X mixer does not take an edge list")
        if self.edges is not None:
            seen = set()
            canon = []
            for j, k in self.edges:
                if j == k:
                    raise InputError(f"mixer edge ({j},{j}) is a self-loop")
                if j < 0 or k < 0:
                    raise InputError(f"negative qubit index in mixer edge ({j},{k})")
                pair = (min(j, k), max(j, k))
                if pair in seen:
                    raise InputError(f"duplicate mixer edge {pair}")
                seen.add(pair)
                canon.append(pair)
            object.__setattr__(self, "edges", tuple(sorted(canon)))

    def terms(self, n: int) -> list[tuple[int, ...]]:
        """Mixer terms on ``n`` qubits, in application order."""
        if self.kind == "x":
            return [(q,) for q in range(n)]
        if self.edges is None:
            return [(j, k) for j in range(n) for k in range(j + 1, n)]
        for j, k in self.edges:
            if k >= n:
                raise InputError(f"mixer edge ({j},{k}) references qubit >= {n}")
        return list(self.edges)


@dataclass(frozen=True, eq=False)
class AnsatzSpec:
    """Static circuit properties: depth, parametrisation, mixer, initial state."""

    p: int = 1
    param_type: str = "standard"
    init_type: str = "ramp"
    mixer: MixerSpec = field(default_factory=MixerSpec)
    fourier_q: int | None = None
    init_hadamard: bool = True
    prepend_state: np.ndarray | None = None
    total_annealing_time: float | None = None

    def __post_init__(self):
        if self.p < 1:
            raise InputError(f"layer count must be >= 1, got p={self.p}")
        if self.param_type not in PARAM_TYPES:
            raise InputError(
                f"param_type must be one of {PARAM_TYPES}, got {self.param_type!r}"
            )
        if self.init_type not in INIT_TYPES:
            raise InputError(
                f"init_type must be one of {INIT_TYPES}, got {self.init_type!r}"
            )
        if self.param_type == "fourier":
            if self.fourier_q is None:
                raise InputError("fourier parametrisation requires fourier_q")
            if not 1 <= self.fourier_q <= self.p:
                raise InputError(
                    f"fourier_q must satisfy 1 <= q <= p, got q={self.fourier_q}, p={self.p}"
                )
        elif self.fourier_q is not None:
            raise InputError("fourier_q is only valid with param_type='fourier'")
        if self.total_annealing_time is not None and self.total_annealing_time <= 0:
            raise InputError("total_annealing_time must be positive")

    @property
    def annealing_time(self) -> float:
        """Schedule length; defaults to 0.7 per layer."""
        if self.total_annealing_time is not None:
            return self.total_annealing_time
        return 0.7 * self.p


@dataclass(frozen=True, eq=False)
class VariationalParams:
    """Raw parameters in one parametrisation's native space."""

    param_type: str
    raw: np.ndarray

    def __post_init__(self):
        object.__setattr__(
            self, "raw", np.asarray(self.raw, dtype=np.float64).reshape(-1)
        )

    def replace_raw(self, raw: np.ndarray) -> "VariationalParams":
        return VariationalParams(self.param_type, raw)


@dataclass(frozen=True, eq=False)
class PerLayerAngles:
    """Canonical per-layer angles: one per cost term and mixer term.

    Shapes are ``(p, #linear)``, ``(p, #pairs)`` and ``(p, #mixer terms)``.
    """

    gamma_linear: np.ndarray
    gamma_quadratic: np.ndarray
    beta: np.ndarray

    @property
    def p(self) -> int:
        return self.gamma_linear.shape[0]

    def cost_layer(self, layer: int) -> np.ndarray:
        """Angles for all cost terms of one layer (linear then quadratic)."""
        return np.concatenate(
            [self.gamma_linear[layer], self.gamma_quadratic[layer]]
        )

    def flatten(self) -> np.ndarray:
        """Extended-space vector: per layer [linear, quadratic, mixer]."""
        blocks = []
        for layer in range(self.p):
            blocks.extend(
                (self.gamma_linear[layer], self.gamma_quadratic[layer], self.beta[layer])
            )
        return np.concatenate(blocks) if blocks else np.empty(0)

    @classmethod
    def from_flat(
        cls, flat: np.ndarray, p: int, n_linear: int, n_quadratic: int, n_mixer: int
    ) -> "PerLayerAngles":
        per_layer = n_linear + n_quadratic + n_mixer
        flat = np.asarray(flat, dtype=np.float64).reshape(p, per_layer)
        return cls(
            gamma_linear=flat[:, :n_linear].copy(),
            gamma_quadratic=flat[:, n_linear : n_linear + n_quadratic].copy(),
            beta=flat[:, n_linear + n_quadratic :].copy(),
        )


def _term_counts(spec: AnsatzSpec, problem: IsingProblem) -> tuple[int, int, int]:
    return (
        len(problem.linear),
        len(problem.quadratic),
        len(spec.mixer.terms(problem.n)),
    )


def param_count(spec: AnsatzSpec, problem: IsingProblem) -> int:
    """Length of the raw parameter vector for this spec and problem."""
    n_lin, n_quad, n_mix = _term_counts(spec, problem)
    if spec.param_type == "standard":
        return 2 * spec.p
    if spec.param_type == "standard_with_bias":
        return 3 * spec.p
    if spec.param_type == "extended":
        return spec.p * (n_lin + n_quad + n_mix)
    if spec.param_type == "fourier":
        return 2 * spec.fourier_q
    if spec.param_type == "annealing":
        return spec.p
    raise InputError(f"unknown param_type {spec.param_type!r}")


def _fourier_matrices(p: int, q: int) -> tuple[np.ndarray, np.ndarray]:
    layers = np.arange(p).reshape(-1, 1) + 0.5
    freqs = np.arange(q).reshape(1, -1) + 0.5
    phase = freqs * layers * np.pi / p
    return np.sin(phase), np.cos(phase)


def _standard_gammas_betas(
    spec: AnsatzSpec, raw: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Per-layer (gamma_L, beta_L) for the single-angle-per-layer families."""
    p = spec.p
    if spec.param_type == "standard":
        return raw[:p], raw[p:]
    if spec.param_type == "fourier":
        q = spec.fourier_q
        sin_m, cos_m = _fourier_matrices(p, q)
        return sin_m @ raw[:q], cos_m @ raw[q:]
    if spec.param_type == "annealing":
        if np.any(raw < 0.0) or np.any(raw > 1.0):
            raise DomainError(
                "annealing schedule fractions must lie in [0, 1], got "
                f"{raw.tolist()}"
            )
        dt = spec.annealing_time / p
        return raw * dt, (1.0 - raw) * dt
    raise InputError(f"{spec.param_type!r} has no single-angle layer form")


def expand_params(
    spec: AnsatzSpec, params: VariationalParams, problem: IsingProblem
) -> PerLayerAngles:
    """Expand raw parameters to canonical per-layer, per-term angles."""
    if params.param_type != spec.param_type:
        raise InputError(
            f"params are {params.param_type!r} but spec wants {spec.param_type!r}"
        )
    expected = param_count(spec, problem)
    raw = params.raw
    if raw.shape[0] != expected:
        raise InputError(
            f"{spec.param_type} raw vector must have length {expected}, "
            f"got {raw.shape[0]}"
        )
    p = spec.p
    n_lin, n_quad, n_mix = _term_counts(spec, problem)

    if spec.param_type == "standard_with_bias":
        g_single, g_pair, betas = raw[:p], raw[p : 2 * p], raw[2 * p :]
        return PerLayerAngles(
            gamma_linear=np.repeat(g_single[:, None], n_lin, axis=1),
            gamma_quadratic=np.repeat(g_pair[:, None], n_quad, axis=1),
            beta=np.repeat(betas[:, None], n_mix, axis=1),
        )
    if spec.param_type == "extended":
        return PerLayerAngles.from_flat(raw, p, n_lin, n_quad, n_mix)

    gammas, betas = _standard_gammas_betas(spec, raw)
    return PerLayerAngles(
        gamma_linear=np.repeat(gammas[:, None], n_lin, axis=1),
        gamma_quadratic=np.repeat(gammas[:, None], n_quad, axis=1),
        beta=np.repeat(betas[:, None], n_mix, axis=1),
    )


def expansion_matrix(spec: AnsatzSpec, problem: IsingProblem) -> np.ndarray:
    """Matrix of the linear raw -> extended-angles map.

    Only defined for the linear parametrisations; the annealing schedule is
    affine in its raw fractions and is rejected.
    """
    if spec.param_type not in LINEAR_PARAM_TYPES:
        raise InputError(
            f"{spec.param_type!r} is not a linear parametrisation"
        )
    raw_dim = param_count(spec, problem)
    columns = []
    for i in range(raw_dim):
        unit = np.zeros(raw_dim)
        unit[i] = 1.0
        angles = expand_params(spec, VariationalParams(spec.param_type, unit), problem)
        columns.append(angles.flatten())
    return np.stack(columns, axis=1) if columns else np.empty((0, 0))


def _ramp_fractions(p: int) -> np.ndarray:
    return (np.arange(p) + 0.5) / p


def init_params(
    spec: AnsatzSpec,
    problem: IsingProblem,
    custom_values: Sequence[float] | None = None,
    seed: int | None = None,
) -> VariationalParams:
    """Initial raw parameters following the spec's initialization strategy.

    ``ramp`` uses an annealing-inspired schedule: cost-type entries grow
    linearly across layers while mixer-type entries shrink.  ``rand`` draws
    every entry uniformly (from [0, pi), or [0, 1) for the annealing
    schedule).  ``custom`` copies the provided full-length vector.
    """
    count = param_count(spec, problem)
    p = spec.p
    dt = spec.annealing_time / p

    if spec.init_type == "custom":
        if custom_values is None:
            raise InputError("custom initialization requires explicit values")
        raw = np.asarray(custom_values, dtype=np.float64).reshape(-1)
        if raw.shape[0] != count:
            raise InputError(
                f"custom values must have length {count}, got {raw.shape[0]}"
            )
        return VariationalParams(spec.param_type, raw.copy())
    if custom_values is not None:
        raise InputError(
            f"custom values were given but init_type is {spec.init_type!r}"
        )

    if spec.init_type == "rand":
        rng = np.random.default_rng(seed)
        high = 1.0 if spec.param_type == "annealing" else np.pi
        return VariationalParams(spec.param_type, rng.uniform(0.0, high, size=count))

    # linear ramp
    f = _ramp_fractions(p)
    if spec.param_type == "standard":
        raw = np.concatenate([f * dt, (1.0 - f) * dt])
    elif spec.param_type == "standard_with_bias":
        raw = np.concatenate([f * dt, f * dt, (1.0 - f) * dt])
    elif spec.param_type == "annealing":
        raw = f.copy()
    elif spec.param_type == "fourier":
        raw = np.zeros(count)
        raw[0] = dt / 2.0
        raw[spec.fourier_q] = dt / 2.0
    else:  # extended
        n_lin, n_quad, n_mix = _term_counts(spec, problem)
        blocks = []
        for layer in range(p):
            blocks.append(np.full(n_lin + n_quad, f[layer] * dt))
            blocks.append(np.full(n_mix, (1.0 - f[layer]) * dt))
        raw = np.concatenate(blocks) if blocks else np.empty(0)
    return VariationalParams(spec.param_type, raw)
