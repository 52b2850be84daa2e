"""Exhaustive reference solvers used to check the fast paths in tests."""

from __future__ import annotations

import itertools

import numpy as np

from .crf import CrfProblem
from .errors import TooLarge

ENUMERATION_LIMIT = 10**7


def brute_force_minimize(problem: CrfProblem, chunk: int = 1 << 15):
    """Exact global minimum of the CRF energy by enumeration.

    Ties go to the lexicographically smallest row-major labeling.
    """
    n, k = problem.num_nodes, problem.num_labels
    total = k**n
    if total > ENUMERATION_LIMIT:
        raise TooLarge(f"{k}^{n} labelings exceeds {ENUMERATION_LIMIT}")
    unary = np.asarray(problem.unary_matrix)
    edges = np.asarray(problem.edges)
    weights = np.asarray(problem.edge_weights)
    powers = k ** np.arange(n - 1, -1, -1, dtype=np.int64)
    best_energy = np.inf
    best_index = -1
    for lo in range(0, total, chunk):
        idx = np.arange(lo, min(total, lo + chunk), dtype=np.int64)
        labels = (idx[:, None] // powers[None, :]) % k
        energy = unary[np.arange(n)[None, :], labels].sum(axis=1)
        if len(edges):
            differ = labels[:, edges[:, 0]] != labels[:, edges[:, 1]]
            energy = energy + (differ * weights[None, :]).sum(axis=1)
        j = int(np.argmin(energy))
        if energy[j] < best_energy:
            best_energy = float(energy[j])
            best_index = int(idx[j])
    labeling = ((best_index // powers) % k).reshape(problem.shape)
    return labeling, problem.energy(labeling)


def brute_force_min_cut(network):
    """Minimum cut capacity over every partition of the non-terminal nodes."""
    internal = [v for v in range(network.num_nodes) if v not in (network.source, network.sink)]
    if 2 ** len(internal) > ENUMERATION_LIMIT:
        raise TooLarge("too many partitions to enumerate")
    best = np.inf
    best_side = None
    for bits in itertools.product((False, True), repeat=len(internal)):
        side = np.zeros(network.num_nodes, dtype=bool)
        side[network.source] = True
        side[internal] = bits
        c = network.cut_capacity(side)
        if c < best:
            best, best_side = c, side
    return best, best_side


def brute_force_assignment(overlap):
    """Maximum total overlap over all one-to-one row/column matchings.

    Returns ``(value, pairs)`` with pairs as (row, col) tuples, zero-overlap
    pairs dropped.
    """
    overlap = np.asarray(overlap)
    rows, cols = overlap.shape
    best = -1
    best_pairs = []
    if rows <= cols:
        for perm in itertools.permutations(range(cols), rows):
            pairs = list(zip(range(rows), perm))
            value = sum(int(overlap[r, c]) for r, c in pairs)
            if value > best:
                best, best_pairs = value, pairs
    else:
        for perm in itertools.permutations(range(rows), cols):
            pairs = list(zip(perm, range(cols)))
            value = sum(int(overlap[r, c]) for r, c in pairs)
            if value > best:
                best, best_pairs = value, pairs
    return max(best, 0), [(r, c) for r, c in best_pairs if overlap[r, c] > 0]
