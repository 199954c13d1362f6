"""Stationary distributions by two mutually independent methods.

``stationary_solve`` is the production path: a dense linear solve of the
rank-deficient balance system with the normalization appended as a
replacement row.  ``stationary_tree`` is an exactness oracle built on the
spanning-tree characterization of the stationary weights; it shares no
linear-algebra code with the solver, which is what makes the cross-check
in the test suite meaningful.
"""

from __future__ import annotations

import numpy as np
import scipy.linalg

from .core import GeneratorMatrix, ProbabilityVector
from .errors import SingularBeyondNullity, TooLarge

# Residual contract for the linear-solve path, relative to max|q|.
RESIDUAL_RTOL = 1e-10

# Exhaustive tree enumeration grows like n^(n-2); past this it is pointless.
TREE_MAX_STATES = 9


def stationary_solve(gen: GeneratorMatrix) -> ProbabilityVector:
    """Solve ``q @ pi = 0`` with the mass constraint replacing one balance row.

    The replaced row is the one with the largest diagonal magnitude, which
    keeps the modified system well conditioned.  One step of iterative
    refinement pushes the residual to round-off so that downstream flow
    matrices inherit row sums at the 1e-14 scale rather than the bare
    solver tolerance.

    Raises
    ------
    SingularBeyondNullity
        If the modified system is numerically singular or the residual
        exceeds ``1e-10 * max|q|`` — both contradict validated
        irreducibility and signal severe ill-conditioning.
    """
    q = gen.q
    n = gen.n
    scale = np.abs(q).max()
    k = int(np.argmax(np.abs(np.diag(q))))
    m = q.copy()
    m[k, :] = 1.0
    b = np.zeros(n)
    b[k] = 1.0

    try:
        lu, piv = scipy.linalg.lu_factor(m)
        pi = scipy.linalg.lu_solve((lu, piv), b)
        if np.isfinite(pi).all():
            for _ in range(2):
                correction = scipy.linalg.lu_solve((lu, piv), b - m @ pi)
                if not np.isfinite(correction).all():
                    break
                pi = pi + correction
    except scipy.linalg.LinAlgError as exc:
        raise SingularBeyondNullity(
            f"stationary system is singular: {exc} "
            f"(condition estimate {_cond_estimate(m)})"
        ) from exc

    residual = np.abs(q @ pi).max() if np.isfinite(pi).all() else np.inf
    if not np.isfinite(pi).all() or residual > RESIDUAL_RTOL * scale:
        raise SingularBeyondNullity(
            "stationary residual invariant violated: "
            f"max|q @ pi| = {residual:.3g} exceeds {RESIDUAL_RTOL * scale:.3g} "
            f"(condition estimate {_cond_estimate(m)})"
        )
    if pi.min() <= 0.0:
        i = int(np.argmin(pi))
        raise SingularBeyondNullity(
            f"positivity invariant violated: pi[{i}] = {pi[i]:.3g} <= 0 despite "
            f"irreducibility (condition estimate {_cond_estimate(m)})"
        )
    return ProbabilityVector(pi / pi.sum())


def _cond_estimate(m: np.ndarray) -> str:
    if m.shape[0] > 500:
        return "unavailable at this size"
    return f"{np.linalg.cond(m):.3g}"


def stationary_tree(gen: GeneratorMatrix) -> ProbabilityVector:
    """Stationary distribution via exhaustive spanning in-tree enumeration.

    The weight of state ``i`` is the sum, over all spanning trees directed
    into ``i``, of the product of the edge rates.  Trees are enumerated by
    recursively growing parent assignments with immediate cycle pruning —
    no determinants, no linear solves.  This is an oracle, capped at
    ``n <= 9``.
    """
    n = gen.n
    if n > TREE_MAX_STATES:
        raise TooLarge(
            f"tree enumeration supports n <= {TREE_MAX_STATES}, got n={n}"
        )
    q = gen.q
    weights = np.array([_rooted_tree_weight(q, root) for root in range(n)])
    total = weights.sum()
    if total <= 0.0:
        # unreachable for validated (irreducible) input
        raise SingularBeyondNullity("no spanning in-trees found")
    return ProbabilityVector(weights / total)


def _rooted_tree_weight(q: np.ndarray, root: int) -> float:
    """Sum of rate products over all spanning trees directed into ``root``."""
    n = q.shape[0]
    others = [u for u in range(n) if u != root]
    # candidate parents of u: edge u -> v exists iff q[v, u] > 0
    candidates = {
        u: [(v, q[v, u]) for v in range(n) if v != u and q[v, u] > 0.0]
        for u in others
    }
    parent: dict[int, int] = {}
    total = 0.0

    def grow(k: int, weight: float):
        nonlocal total
        if k == len(others):
            total += weight
            return
        u = others[k]
        for v, rate in candidates[u]:
            # walk assigned parents from v; hitting u would close a cycle
            x = v
            while x in parent:
                x = parent[x]
            if x == u:
                continue
            parent[u] = v
            grow(k + 1, weight * rate)
            del parent[u]

    grow(0, 1.0)
    return total
