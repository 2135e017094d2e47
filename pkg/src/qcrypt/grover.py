"""Grover search over an indexed predicate, simulated on a dense statevector."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .errors import DomainError


@dataclass
class SearchProblem:
    n: int
    predicate: Callable[[int], bool]
    marked_count_hint: Optional[int] = None

    def __post_init__(self):
        if self.n < 1:
            raise DomainError("search space must be non-empty")


def padded_size(n: int) -> int:
    return 1 << max(0, (n - 1).bit_length())


def optimal_iterations(n: int, marked: int) -> int:
    """floor(pi / (4 theta)) with sin(theta) = sqrt(marked / n)."""
    if marked < 1 or marked > n:
        raise DomainError("need 1 <= marked <= n")
    theta = math.asin(math.sqrt(marked / n))
    return max(0, math.floor(math.pi / (4 * theta)))


def success_probability(n: int, marked: int, iterations: int) -> float:
    theta = math.asin(math.sqrt(marked / n))
    return math.sin((2 * iterations + 1) * theta) ** 2


def _marked_mask(problem: SearchProblem) -> np.ndarray:
    size = padded_size(problem.n)
    mask = np.zeros(size, dtype=bool)
    for i in range(problem.n):
        mask[i] = bool(problem.predicate(i))
    return mask


def run_iterations(mask: np.ndarray, iterations: int) -> np.ndarray:
    """State after `iterations` Grover steps from the uniform superposition."""
    size = len(mask)
    psi = np.full(size, 1 / math.sqrt(size))
    for _ in range(iterations):
        psi[mask] *= -1  # oracle
        psi = 2 * psi.mean() - psi  # inversion about the mean
    return psi


def _measure(psi: np.ndarray, rng) -> int:
    cdf = np.cumsum(psi * psi)
    i = int(np.searchsorted(cdf, rng.random() * cdf[-1], side="right"))
    return min(i, len(psi) - 1)


def grover_search(problem: SearchProblem, rng, stats: Optional[dict] = None,
                  max_attempts: Optional[int] = None) -> Optional[int]:
    """An index satisfying the predicate, or None when the attempt budget runs out.

    Oracle calls (one per Grover iteration plus one classical check of each
    measured index) are accumulated in ``stats["oracle_calls"]``.
    """
    mask = _marked_mask(problem)
    size = len(mask)
    calls = 0

    def check(i):
        nonlocal calls
        calls += 1
        return i < problem.n and bool(mask[i])

    found = None
    if problem.marked_count_hint:
        j = optimal_iterations(size, problem.marked_count_hint)
        psi = run_iterations(mask, j)
        for _ in range(max_attempts or 32):
            calls += j
            i = _measure(psi, rng)
            if check(i):
                found = i
                break
    else:
        # exponentially growing random iteration counts
        budget = max_attempts or max(4, size.bit_length() ** 2)
        lam, cap = 6 / 5, math.sqrt(size)
        m = 1.0
        for _ in range(budget):
            j = rng.randrange(max(1, int(m)))
            calls += j
            i = _measure(run_iterations(mask, j), rng)
            if check(i):
                found = i
                break
            m = min(lam * m, cap)
    if stats is not None:
        stats["oracle_calls"] = stats.get("oracle_calls", 0) + calls
    return found
