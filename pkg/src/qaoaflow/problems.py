"""Ising/QUBO problem instances, generators, and the exhaustive solver.

Conventions used everywhere in this package:

* spins take values ``z_j in {+1, -1}`` and bits map to spins via
  ``z_j = 1 - 2*b_j`` (bit 0 <-> eigenvalue +1);
* a bitstring writes qubit 0 as its *first* character;
* a basis-state index stores qubit q at bit q (qubit 0 least significant).

The energy of an assignment is
``E(z) = sum_j h_j z_j + sum_{j<k} J_jk z_j z_k + constant``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import InputError, SizeLimitError, UnsupportedTermError

#: Largest spin count accepted by :func:`brute_force_solve` by default.
BRUTE_FORCE_LIMIT = 24


def index_to_bits(index: int, n: int) -> str:
    """Bitstring (qubit 0 first) for a basis-state index."""
    return "".join("1" if (index >> q) & 1 else "0" for q in range(n))


def bits_to_index(bits: str) -> int:
    """Basis-state index for a bitstring (qubit 0 first)."""
    return int(bits[::-1], 2) if bits else 0


def bits_to_spins(bits: str) -> np.ndarray:
    """Eigenvalue vector (+1/-1) for a bitstring."""
    b = np.frombuffer(bits.encode("ascii"), dtype=np.uint8) - ord("0")
    return (1 - 2 * b.astype(np.int64))


@dataclass(frozen=True)
class SpinAssignment:
    """A full assignment of all spins, stored as a bitstring."""

    bits: str

    def __post_init__(self):
        if not self.bits or any(c not in "01" for c in self.bits):
            raise InputError(f"bitstring must be nonempty over {{0,1}}, got {self.bits!r}")

    @property
    def n(self) -> int:
        return len(self.bits)

    @property
    def spins(self) -> np.ndarray:
        return bits_to_spins(self.bits)

    @property
    def index(self) -> int:
        return bits_to_index(self.bits)

    @classmethod
    def from_spins(cls, spins: Sequence[int]) -> "SpinAssignment":
        bits = []
        for z in spins:
            if z not in (1, -1):
                raise InputError(f"spin values must be +1 or -1, got {z}")
            bits.append("0" if z == 1 else "1")
        return cls("".join(bits))

    @classmethod
    def from_index(cls, index: int, n: int) -> "SpinAssignment":
        return cls(index_to_bits(index, n))


def _canonical_pair(j: int, k: int) -> tuple[int, int]:
    return (j, k) if j < k else (k, j)


@dataclass(frozen=True)
class IsingProblem:
    """An Ising-form cost function over ``n`` spins.

    ``linear`` maps spin index to its bias h_j; ``quadratic`` maps ordered
    pairs (j, k) with j < k to couplings J_jk.  Instances are treated as
    immutable; all constructors canonicalize their input.
    """

    n: int
    linear: dict[int, float] = field(default_factory=dict)
    quadratic: dict[tuple[int, int], float] = field(default_factory=dict)
    constant: float = 0.0

    def __post_init__(self):
        if self.n < 1:
            raise InputError(f"need at least one spin, got n={self.n}")
        if not math.isfinite(self.constant):
            raise InputError("constant offset must be finite")
        for j, h in self.linear.items():
            if not 0 <= j < self.n:
                raise InputError(f"linear index {j} out of range [0, {self.n})")
            if not math.isfinite(h):
                raise InputError(f"non-finite coefficient for spin {j}")
        for (j, k), w in self.quadratic.items():
            if j == k:
                raise InputError(f"pair term ({j},{k}) couples a spin to itself")
            if (j, k) != _canonical_pair(j, k):
                raise InputError(f"pair {j, k} not in canonical (j < k) order")
            if not (0 <= j < self.n and 0 <= k < self.n):
                raise InputError(f"pair index in {j, k} out of range [0, {self.n})")
            if not math.isfinite(w):
                raise InputError(f"non-finite coefficient for pair {j, k}")

    # -- construction -------------------------------------------------

    @classmethod
    def from_terms(
        cls,
        terms: Sequence[Sequence[int]],
        coeffs: Sequence[float],
        n: int,
        constant: float = 0.0,
    ) -> "IsingProblem":
        """Build a problem from a bag of 1- and 2-spin terms.

        Duplicate terms (in either index order) merge by coefficient
        addition; terms whose merged coefficient is zero are dropped.
        """
        if len(terms) != len(coeffs):
            raise InputError(
                f"got {len(terms)} terms but {len(coeffs)} coefficients"
            )
        linear: dict[int, float] = {}
        quadratic: dict[tuple[int, int], float] = {}
        for term, coeff in zip(terms, coeffs):
            term = tuple(int(i) for i in term)
            if len(term) == 1:
                (j,) = term
                if not 0 <= j < n:
                    raise InputError(f"index {j} out of range [0, {n})")
                linear[j] = linear.get(j, 0.0) + float(coeff)
            elif len(term) == 2:
                j, k = term
                if j == k:
                    raise InputError(f"pair term ({j},{j}) couples a spin to itself")
                if not (0 <= j < n and 0 <= k < n):
                    raise InputError(f"pair index in {term} out of range [0, {n})")
                key = _canonical_pair(j, k)
                quadratic[key] = quadratic.get(key, 0.0) + float(coeff)
            else:
                raise UnsupportedTermError(
                    f"term {term} has arity {len(term)}; only 1- and 2-spin "
                    "terms are supported"
                )
        linear = {j: h for j, h in sorted(linear.items()) if h != 0.0}
        quadratic = {p: w for p, w in sorted(quadratic.items()) if w != 0.0}
        return cls(n=n, linear=linear, quadratic=quadratic, constant=float(constant))

    # -- views ---------------------------------------------------------

    @property
    def linear_terms(self) -> list[tuple[int, float]]:
        """Linear terms in canonical (sorted index) order."""
        return sorted(self.linear.items())

    @property
    def quadratic_terms(self) -> list[tuple[tuple[int, int], float]]:
        """Pair terms in canonical (sorted pair) order."""
        return sorted(self.quadratic.items())

    def term_items(self) -> list[tuple[tuple[int, ...], float]]:
        """All terms, linear first then quadratic, each in sorted order."""
        items: list[tuple[tuple[int, ...], float]] = []
        items.extend(((j,), h) for j, h in self.linear_terms)
        items.extend(((j, k), w) for (j, k), w in self.quadratic_terms)
        return items

    @property
    def num_terms(self) -> int:
        return len(self.linear) + len(self.quadratic)

    # -- evaluation ----------------------------------------------------

    def energy(self, spins: Sequence[int] | np.ndarray) -> float:
        """Energy of a +1/-1 spin vector."""
        z = np.asarray(spins)
        if z.shape != (self.n,):
            raise InputError(f"expected {self.n} spins, got shape {z.shape}")
        e = self.constant
        for j, h in self.linear.items():
            e += h * z[j]
        for (j, k), w in self.quadratic.items():
            e += w * z[j] * z[k]
        return float(e)

    def energy_of_bits(self, bits: str) -> float:
        if len(bits) != self.n:
            raise InputError(f"expected {self.n} bits, got {len(bits)}")
        return self.energy(bits_to_spins(bits))

    # -- serialization ---------------------------------------------------

    def to_dict(self) -> dict:
        items = self.term_items()
        return {
            "n": self.n,
            "terms": [list(t) for t, _ in items],
            "coeffs": [c for _, c in items],
            "constant": self.constant,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "IsingProblem":
        try:
            return cls.from_terms(
                data["terms"], data["coeffs"], int(data["n"]),
                constant=float(data.get("constant", 0.0)),
            )
        except KeyError as exc:
            raise InputError(f"problem dict missing field {exc.args[0]!r}") from None

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True)

    @classmethod
    def from_json(cls, text: str) -> "IsingProblem":
        return cls.from_dict(json.loads(text))


def maxcut_to_ising(edges: Iterable[tuple[int, int, float]]) -> IsingProblem:
    """Encode weighted MaxCut so that minimizing the energy maximizes the cut.

    Each edge (j, k, w) contributes ``w * (Z_j Z_k - 1) / 2``; the minimum
    energy is minus the maximum cut weight.
    """
    quadratic: dict[tuple[int, int], float] = {}
    constant = 0.0
    n = 0
    for j, k, w in edges:
        j, k = int(j), int(k)
        if j == k:
            raise InputError(f"self-loop edge ({j},{j}) is not a cut edge")
        if j < 0 or k < 0:
            raise InputError(f"negative vertex index in edge ({j},{k})")
        key = _canonical_pair(j, k)
        quadratic[key] = quadratic.get(key, 0.0) + w / 2.0
        constant -= w / 2.0
        n = max(n, j + 1, k + 1)
    if n == 0:
        raise InputError("edge list is empty")
    quadratic = {p: w for p, w in sorted(quadratic.items()) if w != 0.0}
    return IsingProblem(n=n, quadratic=quadratic, constant=constant)


def random_ising(
    n: int,
    density: float = 0.5,
    coeff_range: tuple[float, float] = (-1.0, 1.0),
    seed: int | None = None,
) -> IsingProblem:
    """Random instance: every possible 1- and 2-spin term appears
    independently with probability ``density``, with coefficients drawn
    uniformly from ``coeff_range``.  Deterministic for a fixed seed."""
    if n < 1:
        raise InputError(f"need at least one spin, got n={n}")
    if not 0.0 < density <= 1.0:
        raise InputError(f"density must be in (0, 1], got {density}")
    lo, hi = coeff_range
    if lo > hi:
        raise InputError(f"empty coefficient range ({lo}, {hi})")
    rng = np.random.default_rng(seed)
    terms: list[tuple[int, ...]] = []
    coeffs: list[float] = []
    for j in range(n):
        if rng.random() < density:
            terms.append((j,))
            coeffs.append(float(rng.uniform(lo, hi)))
    for j in range(n):
        for k in range(j + 1, n):
            if rng.random() < density:
                terms.append((j, k))
                coeffs.append(float(rng.uniform(lo, hi)))
    return IsingProblem.from_terms(terms, coeffs, n)


def energies_of_all_assignments(problem: IsingProblem) -> np.ndarray:
    """Energy of every basis state, computed by direct term evaluation.

    Independent of the simulator's diagonal kernel; used as the oracle in
    tests and by :func:`brute_force_solve`.
    """
    size = 1 << problem.n
    idx = np.arange(size, dtype=np.int64)
    energies = np.full(size, problem.constant)
    spins = {}

    def spin(j):
        if j not in spins:
            spins[j] = (1 - 2 * ((idx >> j) & 1)).astype(np.int8)
        return spins[j]

    for j, h in problem.linear_terms:
        energies += h * spin(j)
    for (j, k), w in problem.quadratic_terms:
        energies += w * (spin(j) * spin(k))
    return energies


def brute_force_solve(
    problem: IsingProblem, limit: int = BRUTE_FORCE_LIMIT
) -> tuple[float, list[SpinAssignment]]:
    """Exhaustively scan all 2**n assignments.

    Returns the exact minimum energy and *every* minimizer, sorted in
    ascending bitstring order.
    """
    if problem.n > limit:
        raise SizeLimitError(
            f"exhaustive solve of n={problem.n} spins exceeds the limit of "
            f"{limit}; reduce the problem first"
        )
    energies = energies_of_all_assignments(problem)
    best = float(energies.min())
    winners = np.flatnonzero(energies == best)
    assignments = sorted(
        (SpinAssignment.from_index(int(i), problem.n) for i in winners),
        key=lambda a: a.bits,
    )
    return best, assignments
