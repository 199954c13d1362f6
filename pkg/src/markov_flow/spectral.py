"""Spectral decay bound for the quadratic divergence.

Conjugating the symmetric flow by the square root of the stationary
distribution, ``G[i, j] = S[i, j] / sqrt(pi_i pi_j)``, gives a symmetric
negative-semidefinite matrix that annihilates ``sqrt(pi)``.  Writing the
eigenvalues of ``-G`` in ascending order ``0 = lam_1 <= lam_2 <= ...``,
the quadratic divergence along any trajectory obeys

    D(p(t)) <= D(p(0)) * exp(-lam_2 * t),

and retaining the factor 2 that the production identity carries gives the
sharper ``exp(-2 lam_2 * t)``.  ``verify_bound`` asserts the first
inequality as the contract and reports how the sharper one fares
empirically, together with the two identities the argument rests on:
``||p/sqrt(pi) - sqrt(pi)||^2 == D(p)`` and the vanishing projection of
that vector on ``sqrt(pi)``.

The eigensolver is a cyclic Jacobi iteration written out here rather than
delegated, so small symmetric spectra are computed by a code path that is
independent of any external linear-algebra routine and can itself be
cross-checked in the tests.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .decompose import FlowDecomposition
from .entropy import gini_divergence
from .errors import (
    BoundViolated,
    DisconnectedWarning,
    NoConvergence,
    NotSymmetric,
    PositivityViolation,
)
from .evolve import Trajectory

JACOBI_OFF_RTOL = 1e-14
JACOBI_MAX_SWEEPS = 100
DEGENERATE_GAP_RTOL = 1e-10
BOUND_RTOL = 1e-8


@dataclass(frozen=True, eq=False)
class SpectralBound:
    """Conjugated symmetric flow with its eigensystem.

    ``eigenvalues`` are those of ``-G`` in ascending order (all >= 0 up to
    round-off); ``eigenvectors`` holds the orthonormal basis as columns,
    the first of which is ``sqrt(pi)`` whenever the zero eigenvalue is
    simple.
    """

    G: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    pi: np.ndarray

    def __post_init__(self):
        for name in ("G", "eigenvalues", "eigenvectors", "pi"):
            arr = np.asarray(getattr(self, name), dtype=float)
            arr.flags.writeable = False
            object.__setattr__(self, name, arr)

    @property
    def lambda2(self) -> float:
        return float(self.eigenvalues[1])


def build_G(d: FlowDecomposition) -> np.ndarray:
    """``G = diag(sqrt(pi))^-1 S diag(sqrt(pi))^-1`` with invariant checks."""
    pi = d.pi.p
    if pi.min() <= 0.0:
        i = int(np.argmin(pi))
        raise PositivityViolation(
            f"stationary positivity violated: pi[{i}] = {pi[i]:.3g} <= 0"
        )
    root = np.sqrt(pi)
    G = d.S / (root[:, np.newaxis] * root[np.newaxis, :])
    scale = max(np.abs(G).max(), 1e-300)
    assert np.abs(G - G.T).max() <= 1e-12 * scale, "G lost symmetry"
    null_residual = np.abs(G @ root).max()
    assert null_residual <= 1e-10 * scale, (
        f"G @ sqrt(pi) residual {null_residual:.3g} exceeds 1e-10 relative"
    )
    return G


def symmetric_eigensolve(m, *, max_sweeps: int = JACOBI_MAX_SWEEPS):
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns ``(w, u)`` with eigenvalues ``w`` ascending and orthonormal
    eigenvector columns ``u`` such that ``m = u @ diag(w) @ u.T``.  The
    sign of each eigenvector is fixed by making its largest-magnitude
    component positive, so results are deterministic.
    """
    a = np.array(m, dtype=float)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"matrix must be square, got shape {a.shape}")
    n = a.shape[0]
    scale = np.linalg.norm(a)
    if np.linalg.norm(a - a.T) > 1e-12 * max(scale, 1e-300):
        raise NotSymmetric(
            f"symmetry invariant violated: ||m - m^T|| = {np.linalg.norm(a - a.T):.3g}"
        )
    a = (a + a.T) / 2.0
    u = np.eye(n)
    if scale == 0.0 or n == 1:
        return _sorted_eigensystem(np.diag(a).copy(), u)

    target = JACOBI_OFF_RTOL * scale
    skip = 1e-300
    for _ in range(max_sweeps):
        if _offdiagonal_norm(a) <= target:
            return _sorted_eigensystem(np.diag(a).copy(), u)
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if abs(apq) <= skip:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = np.sign(theta) if theta != 0 else 1.0
                t = t / (abs(theta) + np.hypot(theta, 1.0))
                c = 1.0 / np.hypot(t, 1.0)
                s = t * c
                # two-sided rotation in the (p, q) plane
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                a[p, q] = 0.0
                a[q, p] = 0.0
                u_p, u_q = u[:, p].copy(), u[:, q].copy()
                u[:, p] = c * u_p - s * u_q
                u[:, q] = s * u_p + c * u_q
    raise NoConvergence(
        f"off-diagonal norm {_offdiagonal_norm(a):.3g} above target "
        f"{target:.3g} after {max_sweeps} sweeps"
    )


def _offdiagonal_norm(a: np.ndarray) -> float:
    # direct sum over off-diagonal entries; the subtraction form
    # ||a||^2 - sum(diag^2) has a cancellation floor far above round-off
    off = a.copy()
    np.fill_diagonal(off, 0.0)
    return float(np.linalg.norm(off))


def _sorted_eigensystem(w: np.ndarray, u: np.ndarray):
    order = np.argsort(w, kind="stable")
    w = w[order]
    u = u[:, order]
    for j in range(u.shape[1]):
        i = int(np.argmax(np.abs(u[:, j])))
        if u[i, j] < 0.0:
            u[:, j] = -u[:, j]
    return w, u


def spectral_bound(d: FlowDecomposition) -> SpectralBound:
    """Assemble ``G`` and the ascending eigensystem of ``-G``.

    Emits :class:`DisconnectedWarning` when the second eigenvalue is
    numerically zero, which happens exactly when the symmetric flow graph
    is disconnected and the decay bound degenerates.
    """
    G = build_G(d)
    w, u = symmetric_eigensolve(-G)
    top = max(w[-1], 1e-300)
    assert w[0] >= -1e-10 * top, f"-G not PSD: lowest eigenvalue {w[0]:.3g}"
    recon = np.linalg.norm(G + u @ np.diag(w) @ u.T)
    assert recon <= 1e-10 * max(np.linalg.norm(G), 1e-300), (
        f"eigendecomposition residual {recon:.3g}"
    )
    orth = np.abs(u.T @ u - np.eye(d.n)).max()
    assert orth <= 1e-10, f"eigenvector orthonormality residual {orth:.3g}"

    root = np.sqrt(d.pi.p)
    if w[1] <= DEGENERATE_GAP_RTOL * top:
        warnings.warn(
            f"second eigenvalue {w[1]:.3g} is numerically zero: symmetric "
            "flow graph is disconnected, decay bound degenerates",
            DisconnectedWarning,
        )
    else:
        # simple zero eigenvalue: the first eigenvector is sqrt(pi);
        # attainable accuracy shrinks with the gap, so the check scales
        vec_tol = max(1e-8, 1e-12 * top / w[1])
        assert np.abs(u[:, 0] - root).max() <= vec_tol, (
            "leading eigenvector does not match sqrt(pi)"
        )
    return SpectralBound(G=G, eigenvalues=w, eigenvectors=u, pi=d.pi.p)


def lambda2(d: FlowDecomposition) -> float:
    """Second smallest eigenvalue of ``-G``: the divergence decay rate."""
    return spectral_bound(d).lambda2


@dataclass(frozen=True, eq=False)
class BoundReport:
    """Pointwise comparison of measured divergence against its decay bounds."""

    times: np.ndarray
    divergence: np.ndarray        # D(p(t))
    bound: np.ndarray             # D(p0) exp(-lam2 (t - t0))
    bound_sharp: np.ndarray       # D(p0) exp(-2 lam2 (t - t0))
    ratio: np.ndarray             # divergence / bound
    lam2: float
    sharp_violations: int         # points where even the 2*lam2 bound fails
    norm_identity_error: float    # max | ||p/sqrt(pi)-sqrt(pi)||^2 - D |
    projection_error: float       # max | <sqrt(pi), p/sqrt(pi)-sqrt(pi)> |


def verify_bound(traj: Trajectory, d: FlowDecomposition,
                 *, rtol: float = BOUND_RTOL) -> BoundReport:
    """Check the spectral decay bound along a trajectory of the same chain.

    Raises :class:`BoundViolated` if ``D(p(t))`` exceeds
    ``D(p0) exp(-lam2 t)`` by more than ``rtol`` anywhere — the bound is
    proven, so a violation means the trajectory and decomposition do not
    belong to the same generator or something is broken.  The sharper
    ``2 lam2`` rate is not asserted, only counted.
    """
    sb = spectral_bound(d)
    lam2 = sb.lambda2
    pi = d.pi.p
    root = np.sqrt(pi)

    t = traj.times
    elapsed = t - t[0]
    div = np.array([gini_divergence(row, pi) for row in traj.states])
    d0 = div[0]
    bound = d0 * np.exp(-lam2 * elapsed)
    sharp = d0 * np.exp(-2.0 * lam2 * elapsed)

    with np.errstate(invalid="ignore", divide="ignore"):
        ratio = np.where(bound > 0.0, div / np.where(bound > 0.0, bound, 1.0), 0.0)
    # once both curves sit at round-off dust the ratio is meaningless:
    # equilibrium divergence values are O(eps^2/pi), far below this floor
    dust = 1e-13 * max(1.0, d0)
    violations = (div > bound * (1.0 + rtol)) & (div > dust)
    if violations.any():
        worst = int(np.argmax(np.where(violations, ratio, 0.0)))
        raise BoundViolated(
            f"decay bound violated at t = {t[worst]!r}: "
            f"D = {div[worst]:.6g} > bound {bound[worst]:.6g} "
            f"(ratio {ratio[worst]:.9g})"
        )
    sharp_violations = int(((div > sharp * (1.0 + rtol)) & (div > dust)).sum())

    shifted = traj.states / root[np.newaxis, :] - root[np.newaxis, :]
    norm_err = float(np.abs((shifted * shifted).sum(axis=1) - div).max())
    proj_err = float(np.abs(shifted @ root).max())
    return BoundReport(
        times=t,
        divergence=div,
        bound=bound,
        bound_sharp=sharp,
        ratio=ratio,
        lam2=lam2,
        sharp_violations=sharp_violations,
        norm_identity_error=norm_err,
        projection_error=proj_err,
    )
