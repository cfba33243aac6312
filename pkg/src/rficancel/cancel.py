"""Orthogonal-complement projection cancellation and inverse-KLT reconstruction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import IllConditioned, InvalidArgument, ShapeError
from .klt import Eigenspace, Trajectory, eig_hermitian, hankel_embed, lag_covariance, \
    principal_components, truncate
from .signals import ComplexSeries

COND_LIMIT = 1e8


@dataclass(frozen=True)
class Projector:
    """Hermitian idempotent matrix annihilating a shared interference subspace."""

    matrix: np.ndarray

    @property
    def window_length(self) -> int:
        return self.matrix.shape[0]


def orth_complement(phi_r: Eigenspace) -> Projector:
    """P = I - Phi (Phi^H Phi)^{-1} Phi^H via a linear solve, never an inverse.

    The Gram-inverse form tolerates eigenfunctions that lost exact
    orthonormality to 32-bit serialization; a Gram matrix conditioned worse
    than 1e8 is rejected.
    """
    L, m = phi_r.phi.shape
    if m == 0:
        return Projector(np.eye(L, dtype=np.complex128))
    gram = phi_r.phi.conj().T @ phi_r.phi
    cond = np.linalg.cond(gram)
    if not np.isfinite(cond) or cond >= COND_LIMIT:
        raise IllConditioned(
            f"Gram matrix condition number {cond:.3e} exceeds {COND_LIMIT:.0e}")
    P = np.eye(L, dtype=np.complex128) - phi_r.phi @ np.linalg.solve(
        gram, phi_r.phi.conj().T)
    return Projector((P + P.conj().T) / 2.0)


def project_eigenspace(P: Projector, phi_t: Eigenspace) -> np.ndarray:
    """Project composite eigenfunctions into the interference null space.

    Columns are intentionally not re-orthonormalized."""
    if P.window_length != phi_t.window_length:
        raise ShapeError("projector and eigenspace window lengths differ")
    return P.matrix @ phi_t.phi


def reconstruct_trajectory(phi_hat: np.ndarray, z: np.ndarray) -> np.ndarray:
    if phi_hat.shape[1] != z.shape[0]:
        raise ShapeError(
            f"inner dimensions disagree: {phi_hat.shape} @ {z.shape}")
    return phi_hat @ z


def diagonal_average(U_hat: np.ndarray, sample_rate: float = 1.0) -> ComplexSeries:
    """Average anti-diagonals back into a length L+K-1 series (inverse of the
    Hankel embedding for true Hankel input)."""
    U_hat = np.asarray(U_hat, dtype=np.complex128)
    if U_hat.ndim != 2:
        raise ShapeError("expected a 2-D matrix")
    L, K = U_hat.shape
    if L > K:
        raise InvalidArgument(f"L={L} exceeds K={K}; matrix is not a valid trajectory")
    return ComplexSeries(_kernels.diag_average(U_hat), sample_rate)


def cancel_pipeline(x_t: ComplexSeries, phi_r: Eigenspace, window_length: int,
                    truncate_phi_t: bool = False,
                    rel_threshold: float = 0.01) -> ComplexSeries:
    """End-to-end cancellation of the shared subspace from a composite series.

    Decomposes the composite with the same SSA machinery, projects its
    eigenfunctions onto the orthogonal complement of ``phi_r``, reconstructs,
    and diagonal-averages.  ``z`` is computed against the full (untruncated)
    composite eigenspace unless ``truncate_phi_t`` is set.
    """
    if phi_r.window_length != window_length:
        raise ShapeError("phi_r window length differs from requested window")
    if len(x_t) <= 2 * window_length:
        raise InvalidArgument("series must be longer than twice the window")
    traj = hankel_embed(x_t, window_length)
    phi_t = eig_hermitian(lag_covariance(traj), x_t.sample_rate)
    if truncate_phi_t:
        phi_t = truncate(phi_t, rel_threshold)
    z = principal_components(phi_t, traj)
    P = orth_complement(phi_r)
    u_hat = reconstruct_trajectory(project_eigenspace(P, phi_t), z)
    return diagonal_average(u_hat, x_t.sample_rate)
