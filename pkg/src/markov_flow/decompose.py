"""Split the stationary flow of a chain into symmetric and circulating parts.

For a valid generator the stationary flow matrix ``F[i, j] = q[i, j] * pi[j]``
has zero row and column sums.  Its symmetric part ``S = (F + F^T)/2``
carries the reversible (detailed-balance) dynamics and its antisymmetric
part ``A = (F - F^T)/2`` carries the net circulation around cycles.  The
triple ``(pi, S, A)`` determines the generator exactly via
``q = (S + A) @ diag(pi)^-1`` and separates three independent degree-of-
freedom budgets: ``n-1`` for ``pi``, ``n(n-1)/2`` for ``S`` and
``(n-1)(n-2)/2`` for ``A``.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import GeneratorMatrix, ProbabilityVector, probability_vector, validate_generator
from .errors import (
    CycleCountWarning,
    InvalidFlow,
    NotAntisymmetric,
    NotBalanced,
    NotSymmetric,
    PositivityViolation,
    RowSumViolation,
)
from .stationary import stationary_solve

FLOW_RTOL = 1e-12


@dataclass(frozen=True, eq=False)
class FlowDecomposition:
    """Stationary distribution plus symmetric/antisymmetric flow split.

    ``F = S + A`` holds exactly by construction; ``S`` is symmetric
    negative semidefinite with zero row sums, ``A`` is antisymmetric with
    zero row sums, and off-diagonal entries of ``F`` are nonnegative.
    Instances produced by :func:`decompose` satisfy all invariants; direct
    construction is unchecked.
    """

    pi: ProbabilityVector
    F: np.ndarray
    S: np.ndarray
    A: np.ndarray

    def __post_init__(self):
        for name in ("F", "S", "A"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def n(self) -> int:
        return self.F.shape[0]


@dataclass(frozen=True, eq=False)
class CycleDecomposition:
    """Circulation expressed as a superposition of weighted directed cycles.

    Each entry is ``(nodes, weight)`` where ``nodes = (v0, v1, ..., vk)``
    stands for the cycle v0 -> v1 -> ... -> vk -> v0 and ``weight > 0`` is
    the flow carried around it.
    """

    cycles: tuple


def decompose(gen: GeneratorMatrix) -> FlowDecomposition:
    """Decompose a valid generator into ``(pi, F, S, A)``."""
    pi = stationary_solve(gen)
    F = gen.q * pi.p[np.newaxis, :]
    S = (F + F.T) / 2.0
    A = (F - F.T) / 2.0
    d = FlowDecomposition(pi=pi, F=F, S=S, A=A)
    _check_flow_invariants(d)
    return d


def _check_flow_invariants(d: FlowDecomposition):
    F, S, A = d.F, d.S, d.A
    scale = max(np.abs(F).max(), 1e-300)
    tol = FLOW_RTOL * scale
    off = F.copy()
    np.fill_diagonal(off, 0.0)
    if off.min() < -tol:
        i, j = np.unravel_index(np.argmin(off), off.shape)
        raise InvalidFlow(
            f"flow invariant violated: F[{i},{j}] = {F[i, j]:.3g} < 0"
        )
    for name, m in (("F", F), ("S", S), ("A", A)):
        worst_row = np.abs(m.sum(axis=1)).max()
        worst_col = np.abs(m.sum(axis=0)).max()
        if max(worst_row, worst_col) > tol:
            raise RowSumViolation(
                f"zero-sum invariant violated for {name}: worst row/column sum "
                f"{max(worst_row, worst_col):.3g} exceeds {tol:.3g}"
            )
    # antisymmetry puts all of F's diagonal in S
    assert np.abs(np.diag(A)).max() == 0.0
    # Gershgorin: symmetric + zero row sums + nonnegative off-diagonals
    # pins every eigenvalue of S in [2*min(diag), 0]
    s_off = S.copy()
    np.fill_diagonal(s_off, 0.0)
    assert s_off.min() >= -tol, "S has a negative off-diagonal beyond tolerance"


def recompose(d: FlowDecomposition) -> GeneratorMatrix:
    """Rebuild the generator ``(S + A) @ diag(pi)^-1`` from a decomposition."""
    return compose(d.pi, d.S, d.A)


def compose(pi, S, A) -> GeneratorMatrix:
    """Construct a generator with stationary distribution ``pi`` from flow parts.

    Parameters
    ----------
    pi : ProbabilityVector or array_like
        Strictly positive, normalized target stationary distribution.
    S : array_like
        Symmetric, zero row sums, nonnegative off-diagonals.
    A : array_like
        Antisymmetric, zero row sums.  Feasibility additionally requires
        ``S + A`` to have nonnegative off-diagonals; a too-strong
        circulation raises :class:`InvalidFlow` rather than being silently
        projected back, because any repair would change ``pi``.
    """
    if not isinstance(pi, ProbabilityVector):
        pi = probability_vector(pi)
    if pi.p.min() <= 0.0:
        i = int(np.argmin(pi.p))
        raise PositivityViolation(
            f"stationary positivity violated: pi[{i}] = {pi.p[i]:.3g} <= 0"
        )
    S = np.asarray(S, dtype=float)
    A = np.asarray(A, dtype=float)
    n = pi.n
    if S.shape != (n, n) or A.shape != (n, n):
        raise ValueError(
            f"shape mismatch: pi has {n} states, S is {S.shape}, A is {A.shape}"
        )

    # the circulation may be round-off dust relative to the symmetric part
    # (2-state chains, reversible chains), so all tolerances share one scale
    flow_scale = max(np.abs(S).max(), np.abs(A).max(), 1e-300)
    if np.abs(S - S.T).max() > FLOW_RTOL * flow_scale:
        raise NotSymmetric(
            f"symmetry invariant violated: max|S - S^T| = {np.abs(S - S.T).max():.3g}"
        )
    if np.abs(A + A.T).max() > FLOW_RTOL * flow_scale:
        raise NotAntisymmetric(
            f"antisymmetry invariant violated: max|A + A^T| = {np.abs(A + A.T).max():.3g}"
        )
    for name, m in (("S", S), ("A", A)):
        worst = np.abs(m.sum(axis=1)).max()
        if worst > FLOW_RTOL * n * flow_scale:
            raise RowSumViolation(
                f"zero-row-sum invariant violated for {name}: worst row sum {worst:.3g}"
            )
    s_off = S.copy()
    np.fill_diagonal(s_off, 0.0)
    if s_off.min() < -FLOW_RTOL * flow_scale:
        i, j = np.unravel_index(np.argmin(s_off), s_off.shape)
        raise InvalidFlow(
            f"symmetric-flow positivity violated: S[{i},{j}] = {S[i, j]:.3g} < 0"
        )

    flow = S + A
    off = flow.copy()
    np.fill_diagonal(off, 0.0)
    fl_scale = max(np.abs(flow).max(), 1e-300)
    if off.min() < -FLOW_RTOL * fl_scale:
        i, j = np.unravel_index(np.argmin(off), off.shape)
        raise InvalidFlow(
            f"flow feasibility violated: (S+A)[{i},{j}] = {flow[i, j]:.6g} < 0 "
            "(circulation too strong for the symmetric part)"
        )
    # q[i, j] = flow[i, j] / pi_j; round-off negatives were vetted above
    q = np.clip(off, 0.0, None) / pi.p[np.newaxis, :]
    np.fill_diagonal(q, np.diag(flow) / pi.p)
    gen = validate_generator(q)
    residual = np.abs(gen.q @ pi.p).max()
    if residual > 1e-10 * max(np.abs(gen.q).max(), 1e-300):
        raise RowSumViolation(
            f"stationarity invariant violated: max|q @ pi| = {residual:.3g}"
        )
    return gen


def dual(gen: GeneratorMatrix) -> GeneratorMatrix:
    """Time-reversed chain: same stationary distribution, negated circulation.

    Equivalent to composing ``(pi, S, -A)``; computed directly as
    ``F^T @ diag(pi)^-1``, which is the same matrix without the
    subtraction round-off.
    """
    d = decompose(gen)
    q = d.F.T / d.pi.p[np.newaxis, :]
    return validate_generator(q)


@dataclass(frozen=True)
class DetailedBalanceReport:
    balanced: bool
    max_circulation: float        # max|A|, absolute
    max_pairwise_violation: float  # max over i<j of |q_ij pi_j - q_ji pi_i|
    flow_scale: float             # max|F|, the reference scale


def is_detailed_balance(gen: GeneratorMatrix, tol: float = 1e-12) -> DetailedBalanceReport:
    """Check reversibility two ways: circulation norm and pairwise fluxes.

    The chain is reported balanced iff ``max|A| <= tol * max|F|``.  The
    pairwise check ``q[i,j] pi_j == q[j,i] pi_i`` is computed from the
    generator directly; each circulation entry is exactly half the
    corresponding pairwise mismatch, so the two criteria must agree.
    """
    d = decompose(gen)
    max_a = float(np.abs(d.A).max())
    pairwise = np.abs(d.F - d.F.T)
    max_pair = float(pairwise.max())
    scale = float(np.abs(d.F).max())
    assert abs(max_a - max_pair / 2.0) <= 1e-15 * max(scale, 1.0)
    return DetailedBalanceReport(
        balanced=bool(max_a <= tol * scale),
        max_circulation=max_a,
        max_pairwise_violation=max_pair,
        flow_scale=scale,
    )


def dof_report(n: int) -> dict:
    """Degree-of-freedom budget of an n-state generator and its parts."""
    if n < 2:
        raise ValueError(f"need n >= 2, got {n}")
    report = {
        "dof_pi": n - 1,
        "dof_S": n * (n - 1) // 2,
        "dof_A": (n - 1) * (n - 2) // 2,
        "total": n * n - n,
    }
    assert report["dof_pi"] + report["dof_S"] + report["dof_A"] == report["total"]
    return report


def cycle_decompose(A, *, rtol: float = 1e-15) -> CycleDecomposition:
    """Peel a circulation matrix into weighted directed cycles.

    Greedy min-edge peeling on the positive part of ``A``: find a directed
    cycle in the support of the residual flow (deterministic order —
    lowest-index start node, depth-first with ascending neighbors),
    subtract its minimum edge weight, repeat until the support is empty.
    Superposing the recorded cycles (``+w`` forward, ``-w`` reverse)
    reconstructs ``A`` exactly up to round-off dust below ``rtol * max|A|``.

    The result is not canonical — many exact superpositions exist — but it
    is reproducible.  A count above the circulation DOF ``(n-1)(n-2)/2``
    triggers :class:`CycleCountWarning`, not an error.
    """
    A = np.asarray(A, dtype=float)
    if A.ndim != 2 or A.shape[0] != A.shape[1]:
        raise ValueError(f"circulation must be square, got shape {A.shape}")
    n = A.shape[0]
    scale = np.abs(A).max()
    if scale == 0.0:
        return CycleDecomposition(cycles=())
    if np.abs(A + A.T).max() > 1e-12 * scale:
        raise NotAntisymmetric(
            f"antisymmetry invariant violated: max|A + A^T| = {np.abs(A + A.T).max():.3g}"
        )
    row_sums = np.abs(A.sum(axis=1)).max()
    if row_sums > 1e-12 * n * scale:
        raise NotBalanced(
            f"balance invariant violated: worst net node flow {row_sums:.3g}"
        )

    tiny = rtol * scale
    # edge u -> v carries weight A[v, u] > 0
    w = np.where(A > tiny, A, 0.0).T.copy()  # w[u, v] = weight of edge u -> v
    cycles = []
    while True:
        nodes = _find_cycle(w)
        if nodes is None:
            break
        edges = list(zip(nodes, nodes[1:] + nodes[:1]))
        weight = min(w[u, v] for u, v in edges)
        for u, v in edges:
            left = w[u, v] - weight
            w[u, v] = left if left > tiny else 0.0
        cycles.append((tuple(nodes), float(weight)))

    bound = (n - 1) * (n - 2) // 2
    if len(cycles) > bound:
        warnings.warn(
            f"{len(cycles)} cycles exceed the circulation DOF bound {bound}",
            CycleCountWarning,
        )
    return CycleDecomposition(cycles=tuple(cycles))


def _find_cycle(w: np.ndarray):
    """Lowest-index-first depth-first search for a directed cycle in the
    support of ``w``; returns the node list or None."""
    n = w.shape[0]
    for start in range(n):
        if not (w[start] > 0.0).any():
            continue
        stack = [start]
        on_path = {start: 0}
        iters = [iter(np.flatnonzero(w[start] > 0.0).tolist())]
        while stack:
            try:
                nxt = next(iters[-1])
            except StopIteration:
                dead = stack.pop()
                del on_path[dead]
                iters.pop()
                continue
            if nxt in on_path:
                return stack[on_path[nxt]:]
            stack.append(nxt)
            on_path[nxt] = len(stack) - 1
            iters.append(iter(np.flatnonzero(w[nxt] > 0.0).tolist()))
    return None


def superpose_cycles(cycles: CycleDecomposition, n: int) -> np.ndarray:
    """Rebuild the antisymmetric circulation matrix from a cycle list."""
    A = np.zeros((n, n))
    for nodes, weight in cycles.cycles:
        for u, v in zip(nodes, nodes[1:] + nodes[:1]):
            A[v, u] += weight
            A[u, v] -= weight
    return A
