"""Shared builders for randomized test sweeps."""

import numpy as np

from markov_flow import GeneratorMatrix, from_offdiagonal_rates, probability_vector


def random_generator(rng, n, density=1.0) -> GeneratorMatrix:
    """Random irreducible generator: positive rates, optional sparsity.

    A ring 0 -> 1 -> ... -> 0 is always kept so sparse draws stay
    irreducible.
    """
    rates = rng.uniform(0.2, 2.0, (n, n))
    if density < 1.0:
        keep = rng.random((n, n)) < density
        ring = np.zeros((n, n), dtype=bool)
        for u in range(n):
            ring[(u + 1) % n, u] = True
        rates *= keep | ring
    np.fill_diagonal(rates, 0.0)
    return from_offdiagonal_rates(rates)


def random_probability(rng, n, concentrated=False):
    if concentrated:
        p = np.zeros(n)
        p[rng.integers(n)] = 1.0
        return probability_vector(p)
    return probability_vector(rng.dirichlet(np.ones(n)))


def random_birth_death(rng, n) -> GeneratorMatrix:
    """Tridiagonal chain with arbitrary positive rates: always reversible."""
    rates = np.zeros((n, n))
    for u in range(n - 1):
        rates[u + 1, u] = rng.uniform(0.2, 2.0)
        rates[u, u + 1] = rng.uniform(0.2, 2.0)
    return from_offdiagonal_rates(rates)


def random_circulation(rng, n, n_cycles):
    """Antisymmetric zero-row-sum matrix built as a known cycle superposition."""
    a = np.zeros((n, n))
    cycles = []
    for _ in range(n_cycles):
        length = int(rng.integers(3, n + 1))
        nodes = rng.permutation(n)[:length]
        weight = float(rng.uniform(0.1, 1.0))
        for u, v in zip(nodes, np.roll(nodes, -1)):
            a[v, u] += weight
            a[u, v] -= weight
        cycles.append((tuple(int(x) for x in nodes), weight))
    return a, cycles
