"""Recursive QAOA: spin-correlation rounding with variable elimination.

Each step runs a full QAOA on the current problem, reads single-spin and
pair correlations off the output distribution, freezes the strongest ones
as constraints ``Z_i = s * Z_j`` or ``Z_i = s``, substitutes them into the
Hamiltonian, and renumbers the surviving spins.  Once the problem is at or
below the cutoff size it is solved exactly and the eliminated spins are
re-inserted in reverse order.

The adaptive elimination rule used here (select all candidates whose
|correlation| is at least one standard deviation above the pool mean,
clamped to [1, n_max]) is a documented stand-in for the statistical
criterion it mimics; swap `_adaptive_count` to change it.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Mapping, Sequence

import numpy as np

from .ansatz import AnsatzSpec
from .errors import InputError, InternalError, WorkflowError
from .optimizers import OptimizerConfig
from .problems import (
    IsingProblem,
    SpinAssignment,
    bits_to_spins,
    brute_force_solve,
)
from .simulator import BackendConfig

logger = logging.getLogger(__name__)

RQAOA_TYPES = ("custom", "adaptive")


@dataclass(frozen=True)
class EliminationRecord:
    """One imposed constraint: ``Z_target = sign * Z_reference`` (pair) or
    ``Z_target = sign`` (single).  Indices live in the space of the step
    the record was created in."""

    kind: str
    target: int
    sign: int
    reference: int | None
    step: int
    correlation: float

    def __post_init__(self):
        if self.kind not in ("pair", "single"):
            raise InputError(f"record kind must be 'pair' or 'single', got {self.kind!r}")
        if self.sign not in (1, -1):
            raise InputError(f"sign must be +1 or -1, got {self.sign}")
        if self.kind == "pair":
            if self.reference is None:
                raise InputError("pair record needs a reference spin")
            if self.reference == self.target:
                raise InputError("target and reference must differ")
        elif self.reference is not None:
            raise InputError("single record cannot carry a reference spin")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind,
            "target": self.target,
            "sign": self.sign,
            "reference": self.reference,
            "step": self.step,
            "correlation": self.correlation,
        }


@dataclass(frozen=True)
class RQAOAConfig:
    """Elimination strategy: fixed step size (custom) or adaptive pool rule."""

    rqaoa_type: str = "custom"
    steps: int = 1
    n_max: int = 1
    n_cutoff: int = 3

    def __post_init__(self):
        if self.rqaoa_type not in RQAOA_TYPES:
            raise InputError(
                f"rqaoa_type must be one of {RQAOA_TYPES}, got {self.rqaoa_type!r}"
            )
        for name in ("steps", "n_max", "n_cutoff"):
            if getattr(self, name) < 1:
                raise InputError(f"{name} must be >= 1")


@dataclass
class RQAOAResult:
    """Final bitstring plus the full elimination trace."""

    bits: str
    energy: float
    records: list[EliminationRecord]
    step_sizes: list[int]
    index_maps: list[dict[int, int]]
    qaoa_results: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "bits": self.bits,
            "energy": self.energy,
            "eliminations": [r.to_dict() for r in self.records],
            "step_sizes": self.step_sizes,
            "index_maps": [
                {str(old): new for old, new in m.items()} for m in self.index_maps
            ],
        }


def compute_correlations(
    distribution: Mapping[str, float] | np.ndarray, problem: IsingProblem
) -> dict[tuple[int, ...], float]:
    """Expectation of Z_i (linear terms) and Z_i Z_j (pair terms) under a
    normalized distribution over bitstrings.

    Only index sets that appear as Hamiltonian terms are computed; they are
    the only usable elimination candidates.
    """
    term_keys = [t for t, _ in problem.term_items()]
    if isinstance(distribution, np.ndarray):
        probs = np.asarray(distribution, dtype=np.float64)
        if probs.shape != (1 << problem.n,):
            raise InputError(
                f"probability vector must have length {1 << problem.n}"
            )
        total = float(probs.sum())
        if abs(total - 1.0) > 1e-8:
            raise InputError(f"distribution is not normalized (sum {total})")
        idx = np.arange(probs.shape[0], dtype=np.uint64)
        out = {}
        for term in term_keys:
            mask = np.uint64(0)
            for j in term:
                mask |= np.uint64(1 << j)
            signs = 1.0 - 2.0 * (np.bitwise_count(idx & mask) & np.uint8(1))
            out[term] = float(probs @ signs)
        return out

    if not distribution:
        raise InputError("empty distribution")
    total = float(sum(distribution.values()))
    if abs(total - 1.0) > 1e-8:
        raise InputError(f"distribution is not normalized (sum {total})")
    out = {term: 0.0 for term in term_keys}
    for bits, prob in distribution.items():
        if len(bits) != problem.n:
            raise InputError(
                f"bitstring {bits!r} has wrong length for n={problem.n}"
            )
        z = bits_to_spins(bits)
        for term in term_keys:
            value = 1
            for j in term:
                value *= z[j]
            out[term] += prob * value
    return out


def _adaptive_count(abs_values: np.ndarray, n_max: int) -> int:
    """Stand-in statistical rule: count of |M| >= mean + population stddev,
    clamped to [1, n_max]."""
    threshold = float(abs_values.mean() + abs_values.std())
    count = int(np.sum(abs_values >= threshold))
    return max(1, min(count, n_max))


def select_eliminations(
    correlations: Mapping[tuple[int, ...], float],
    config: RQAOAConfig,
    step: int,
    n_current: int,
) -> list[EliminationRecord]:
    """Pick the constraints to impose this step.

    Candidates rank by |correlation| descending (ties to the smaller index
    set); a candidate is skipped when its target spin was already used as a
    target or a reference.  Pair candidates eliminate the larger index in
    favor of the smaller with ``sign = sign(M_jk)``; singles fix
    ``Z_i = sign(M_i)``.  The selection never shrinks the problem below the
    cutoff size.
    """
    if not correlations:
        raise InputError("no correlation candidates: the problem has no terms")
    max_total = n_current - config.n_cutoff
    if max_total <= 0:
        return []

    ranked = sorted(correlations.items(), key=lambda kv: (-abs(kv[1]), kv[0]))
    nonzero = [(term, m) for term, m in ranked if m != 0.0]

    if config.rqaoa_type == "custom":
        limit = config.steps
    else:
        abs_values = np.array([abs(m) for _, m in ranked])
        limit = _adaptive_count(abs_values, config.n_max)
    limit = min(limit, max_total)

    if not nonzero:
        # degenerate distribution: break the tie on the first pair term
        # (or first bias term) and continue
        pairs = [t for t, _ in ranked if len(t) == 2]
        if pairs:
            j, k = min(pairs)
            logger.warning(
                "all correlations vanish at step %d; eliminating Z_%d = +Z_%d "
                "to break the degeneracy", step, k, j,
            )
            return [EliminationRecord("pair", target=k, sign=1, reference=j,
                                      step=step, correlation=0.0)]
        i = min(t for t, _ in ranked)[0]
        logger.warning(
            "all correlations vanish at step %d; fixing Z_%d = +1 "
            "to break the degeneracy", step, i,
        )
        return [EliminationRecord("single", target=i, sign=1, reference=None,
                                  step=step, correlation=0.0)]

    selected: list[EliminationRecord] = []
    used_targets: set[int] = set()
    used_refs: set[int] = set()
    # resolution of already-selected targets: target -> (sign, reference|None)
    resolution: dict[int, tuple[int, int | None]] = {}
    for term, m in nonzero:
        if len(selected) >= limit:
            break
        sign = 1 if m > 0 else -1
        if len(term) == 1:
            target = term[0]
            if target in used_targets or target in used_refs:
                continue
            selected.append(
                EliminationRecord("single", target=target, sign=sign,
                                  reference=None, step=step, correlation=m)
            )
            used_targets.add(target)
            resolution[target] = (sign, None)
        else:
            j, k = term
            target, ref = max(j, k), min(j, k)
            if target in used_targets or target in used_refs:
                continue
            # chase the reference through earlier selections so stored
            # records always point at a surviving spin
            while ref in resolution:
                s0, r0 = resolution[ref]
                sign *= s0
                if r0 is None:
                    selected.append(
                        EliminationRecord("single", target=target, sign=sign,
                                          reference=None, step=step, correlation=m)
                    )
                    used_targets.add(target)
                    resolution[target] = (sign, None)
                    break
                ref = r0
            else:
                selected.append(
                    EliminationRecord("pair", target=target, sign=sign,
                                      reference=ref, step=step, correlation=m)
                )
                used_targets.add(target)
                used_refs.add(ref)
                resolution[target] = (sign, ref)
    return selected


def _resolve_substitution(
    substitution: dict[int, tuple[int, int | None]], spin: int
) -> tuple[int, int | None]:
    """Follow 'Z_i = s * Z_j' chains to a surviving spin or a fixed value."""
    sign = 1
    current = spin
    seen = set()
    while current in substitution:
        if current in seen:
            raise InternalError(f"cyclic substitution through spin {current}")
        seen.add(current)
        s, ref = substitution[current]
        sign *= s
        if ref is None:
            return sign, None
        current = ref
    return sign, current


def reduce_problem(
    problem: IsingProblem, records: Sequence[EliminationRecord]
) -> tuple[IsingProblem, dict[int, int]]:
    """Substitute the constraints into the Hamiltonian.

    Returns the reduced problem over contiguously renumbered surviving
    spins plus the old -> new index map.
    """
    substitution: dict[int, tuple[int, int | None]] = {}
    for rec in records:
        if not 0 <= rec.target < problem.n:
            raise InputError(f"record target {rec.target} out of range")
        if rec.target in substitution:
            raise InputError(f"spin {rec.target} targeted by two records")
        if rec.reference is not None and not 0 <= rec.reference < problem.n:
            raise InputError(f"record reference {rec.reference} out of range")
        substitution[rec.target] = (rec.sign, rec.reference)

    survivors = [i for i in range(problem.n) if i not in substitution]
    if not survivors:
        raise InputError("cannot eliminate every spin of the problem")
    old_to_new = {old: new for new, old in enumerate(survivors)}

    resolved: dict[int, tuple[int, int | None]] = {}

    def resolve(spin: int) -> tuple[int, int | None]:
        if spin not in resolved:
            resolved[spin] = _resolve_substitution(substitution, spin)
        return resolved[spin]

    linear: dict[int, float] = {}
    quadratic: dict[tuple[int, int], float] = {}
    constant = problem.constant

    for j, h in problem.linear_terms:
        s, r = resolve(j)
        if r is None:
            constant += s * h
        else:
            key = old_to_new[r]
            linear[key] = linear.get(key, 0.0) + s * h
    for (j, k), w in problem.quadratic_terms:
        sj, rj = resolve(j)
        sk, rk = resolve(k)
        weight = sj * sk * w
        if rj is None and rk is None:
            constant += weight
        elif rj is None or rk is None:
            key = old_to_new[rj if rk is None else rk]
            linear[key] = linear.get(key, 0.0) + weight
        elif rj == rk:
            constant += weight
        else:
            a, b = old_to_new[rj], old_to_new[rk]
            key = (a, b) if a < b else (b, a)
            quadratic[key] = quadratic.get(key, 0.0) + weight

    reduced = IsingProblem(
        n=len(survivors),
        linear={j: h for j, h in sorted(linear.items()) if h != 0.0},
        quadratic={p: w for p, w in sorted(quadratic.items()) if w != 0.0},
        constant=constant,
    )
    return reduced, old_to_new


def reconstruct_solution(
    records: Sequence[EliminationRecord],
    index_maps: Sequence[dict[int, int]],
    cutoff_bits: str,
) -> SpinAssignment:
    """Re-insert eliminated spins, replaying the records in reverse order."""
    by_step: dict[int, list[EliminationRecord]] = {}
    for rec in records:
        by_step.setdefault(rec.step, []).append(rec)
    n_steps = len(index_maps)
    if any(step < 0 or step >= n_steps for step in by_step):
        raise InputError("record step index outside the stored index maps")
    if n_steps and len(cutoff_bits) != len(index_maps[-1]):
        raise InputError(
            f"cutoff solution has {len(cutoff_bits)} spins but the final "
            f"reduced problem has {len(index_maps[-1])}"
        )

    z: list[int | None] = [int(v) for v in bits_to_spins(cutoff_bits)]
    for step in reversed(range(n_steps)):
        step_records = by_step.get(step, [])
        prev_size = len(index_maps[step]) + len(step_records)
        z_prev: list[int | None] = [None] * prev_size
        for old, new in index_maps[step].items():
            z_prev[old] = z[new]
        for rec in reversed(step_records):
            if rec.kind == "single":
                z_prev[rec.target] = rec.sign
            else:
                ref_value = z_prev[rec.reference]
                if ref_value is None:
                    raise InternalError(
                        f"missing reference value for spin {rec.reference} "
                        f"while replaying step {step}"
                    )
                z_prev[rec.target] = rec.sign * ref_value
        if any(v is None for v in z_prev):
            raise InternalError(f"orphan spins after replaying step {step}")
        z = z_prev
    return SpinAssignment.from_spins(z)


def run_rqaoa(
    problem: IsingProblem,
    spec: AnsatzSpec | None = None,
    backend_config: BackendConfig | None = None,
    optimizer_config: OptimizerConfig | None = None,
    rqaoa_config: RQAOAConfig | None = None,
    seed: int | None = None,
    brute_force_limit: int | None = None,
) -> RQAOAResult:
    """Full recursive loop: QAOA, correlate, eliminate, reduce, repeat;
    brute-force at the cutoff and reconstruct the unique bitstring."""
    from .workflows import run_qaoa  # deferred: workflows builds on this module

    spec = spec if spec is not None else AnsatzSpec()
    rq = rqaoa_config if rqaoa_config is not None else RQAOAConfig()
    if spec.prepend_state is not None:
        raise InputError(
            "recursive runs cannot use a prepend state: its dimension would "
            "change at every step"
        )
    if spec.mixer.kind == "xy" and spec.mixer.edges is not None:
        raise InputError(
            "recursive runs need a size-independent mixer; use the X mixer "
            "or the all-pairs XY mixer"
        )

    current = problem
    records: list[EliminationRecord] = []
    index_maps: list[dict[int, int]] = []
    step_sizes = [problem.n]
    qaoa_results = []
    step = 0
    while current.n > rq.n_cutoff and current.num_terms > 0:
        step_seed = (
            None
            if seed is None
            else int(np.random.SeedSequence(entropy=seed, spawn_key=(step,)).generate_state(1)[0])
        )
        try:
            result = run_qaoa(
                current, spec, backend_config, optimizer_config, seed=step_seed
            )
            if result.distribution_kind == "exact":
                distribution = np.asarray(result.probabilities)
            else:
                distribution = {
                    bits: count / result.outcome_shots
                    for bits, count in result.counts.items()
                }
            correlations = compute_correlations(distribution, current)
            step_records = select_eliminations(correlations, rq, step, current.n)
            if not step_records:
                raise InternalError("selection produced no eliminations")
            current, old_to_new = reduce_problem(current, step_records)
        except (InputError, InternalError, WorkflowError) as exc:
            raise WorkflowError(f"rqaoa step {step}", str(exc)) from exc
        records.extend(step_records)
        index_maps.append(old_to_new)
        step_sizes.append(current.n)
        qaoa_results.append(result)
        step += 1

    if current.num_terms == 0:
        # every assignment has the same energy; pick the all-zeros bitstring
        cutoff_bits = "0" * current.n
    else:
        limit = brute_force_limit
        _, minimizers = (
            brute_force_solve(current)
            if limit is None
            else brute_force_solve(current, limit=limit)
        )
        cutoff_bits = minimizers[0].bits

    assignment = reconstruct_solution(records, index_maps, cutoff_bits)
    return RQAOAResult(
        bits=assignment.bits,
        energy=problem.energy_of_bits(assignment.bits),
        records=records,
        step_sizes=step_sizes,
        index_maps=index_maps,
        qaoa_results=qaoa_results,
    )


class RQAOAWorkflow:
    """Compile-then-optimize wrapper mirroring the plain QAOA workflow."""

    def __init__(
        self,
        spec: AnsatzSpec | None = None,
        backend_config: BackendConfig | None = None,
        optimizer_config: OptimizerConfig | None = None,
        rqaoa_config: RQAOAConfig | None = None,
        seed: int | None = None,
    ):
        self.spec = spec
        self.backend_config = backend_config
        self.optimizer_config = optimizer_config
        self.rqaoa_config = rqaoa_config
        self.seed = seed
        self.problem: IsingProblem | None = None
        self.result: RQAOAResult | None = None

    def compile(self, problem: IsingProblem) -> "RQAOAWorkflow":
        self.problem = problem
        self.result = None
        return self

    def optimize(self) -> RQAOAResult:
        if self.problem is None:
            raise InputError("call compile(problem) before optimize()")
        self.result = run_rqaoa(
            self.problem,
            spec=self.spec,
            backend_config=self.backend_config,
            optimizer_config=self.optimizer_config,
            rqaoa_config=self.rqaoa_config,
            seed=self.seed,
        )
        return self.result
