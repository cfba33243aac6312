"""SSA-based Karhunen-Loeve characterization: Hankel embedding, lag covariance,
Hermitian eigendecomposition, eigenvalue-ranked truncation, and principal
components, plus the serialized eigenspace exchange format."""

from __future__ import annotations

import struct
from dataclasses import dataclass

import numpy as np

from . import _kernels
from .errors import InvalidArgument, NumericError, ShapeError
from .signals import ComplexSeries


@dataclass(frozen=True)
class Trajectory:
    """Hankel-embedded lagged-window view of a series: U[i, j] = x[i + j]."""

    matrix: np.ndarray
    sample_rate: float = 1.0

    @property
    def window_length(self) -> int:
        return self.matrix.shape[0]

    @property
    def n_lagged(self) -> int:
        return self.matrix.shape[1]


@dataclass(frozen=True)
class Eigenspace:
    """Orthonormal eigenfunction matrix (columns) with descending eigenvalues."""

    phi: np.ndarray
    eigenvalues: np.ndarray
    sample_rate: float = 1.0

    def __post_init__(self):
        if self.phi.ndim != 2:
            raise ShapeError("phi must be a 2-D matrix")
        if self.eigenvalues.shape != (self.phi.shape[1],):
            raise ShapeError("one eigenvalue per eigenfunction column required")

    @property
    def window_length(self) -> int:
        return self.phi.shape[0]

    @property
    def n_components(self) -> int:
        return self.phi.shape[1]


def hankel_embed(x: ComplexSeries, window_length: int) -> Trajectory:
    """Embed into an L x (N-L+1) trajectory matrix; requires 2 <= L <= N/2."""
    n = len(x)
    if not 2 <= window_length <= n // 2:
        raise InvalidArgument(
            f"window length {window_length} outside [2, {n // 2}] for N={n}")
    return Trajectory(_kernels.hankel_fill(x.samples, window_length), x.sample_rate)


def lag_covariance(traj: Trajectory) -> np.ndarray:
    """Sample-average lag covariance (1/K) U U^H, hermitized exactly."""
    U = traj.matrix
    R = (U @ U.conj().T) / traj.n_lagged
    return (R + R.conj().T) / 2.0


def eig_hermitian(R: np.ndarray, sample_rate: float = 1.0) -> Eigenspace:
    """Full eigendecomposition of a Hermitian matrix, eigenvalues descending.

    Deterministic phase convention: each eigenvector is rotated so its
    largest-magnitude entry is real positive.  Tiny negative eigenvalues are
    clamped to zero.
    """
    R = np.asarray(R)
    if R.ndim != 2 or R.shape[0] != R.shape[1]:
        raise ShapeError("R must be square")
    scale = np.linalg.norm(R)
    herm_err = np.linalg.norm(R - R.conj().T)
    if herm_err > 1e-9 * max(scale, 1.0):
        raise InvalidArgument(f"input not Hermitian (relative deviation {herm_err / max(scale, 1e-300):.2e})")
    try:
        lam, phi = np.linalg.eigh((R + R.conj().T) / 2.0)
    except np.linalg.LinAlgError as exc:
        raise NumericError(f"eigensolver failed to converge: {exc}") from exc
    lam = lam[::-1].copy()
    phi = phi[:, ::-1].copy()
    lam[(lam < 0) & (lam > -1e-9 * max(scale, 1.0))] = 0.0
    anchors = np.argmax(np.abs(phi), axis=0)
    rot = phi[anchors, np.arange(phi.shape[1])]
    mag = np.abs(rot)
    rot = np.where(mag > 0, rot / np.where(mag > 0, mag, 1.0), 1.0)
    phi = phi * rot.conj()[None, :]
    return Eigenspace(phi, lam, sample_rate)


def truncate(es: Eigenspace, rel_threshold: float = 0.01) -> Eigenspace:
    """Keep eigenfunctions with eigenvalue >= rel_threshold * largest; M >= 1."""
    if not 0 < rel_threshold <= 1:
        raise InvalidArgument("rel_threshold must be in (0, 1]")
    lam = es.eigenvalues
    m = max(int(np.sum(lam >= rel_threshold * lam[0])), 1)
    return Eigenspace(es.phi[:, :m].copy(), lam[:m].copy(), es.sample_rate)


def empty_eigenspace(window_length: int, sample_rate: float = 1.0) -> Eigenspace:
    """Zero-component eigenspace; its orthogonal complement is the identity."""
    return Eigenspace(np.zeros((window_length, 0), dtype=np.complex128),
                      np.zeros(0), sample_rate)


def principal_components(es: Eigenspace, traj: Trajectory) -> np.ndarray:
    """Project lagged vectors onto the eigenfunctions: z = phi^H U."""
    if es.window_length != traj.window_length:
        raise ShapeError(
            f"window mismatch: eigenspace {es.window_length}, trajectory {traj.window_length}")
    return es.phi.conj().T @ traj.matrix


def characterize(x: ComplexSeries, window_length: int,
                 rel_threshold: float | None = 0.01) -> Eigenspace:
    """Convenience chain: embed, covariance, eigendecompose, optional truncation."""
    es = eig_hermitian(lag_covariance(hankel_embed(x, window_length)), x.sample_rate)
    if rel_threshold is None:
        return es
    return truncate(es, rel_threshold)


def save_eigenspace(path, es: Eigenspace) -> None:
    """Exchange format: u32 L, u32 M, f64 sample_rate, column-major complex64
    eigenfunctions, then M eigenvalues as f64.  This is the shared artifact
    the collaboration rate budget prices."""
    header = struct.pack("<IId", es.window_length, es.n_components, es.sample_rate)
    with open(path, "wb") as fh:
        fh.write(header)
        fh.write(np.asfortranarray(es.phi.astype(np.complex64)).tobytes(order="F"))
        fh.write(es.eigenvalues.astype("<f8").tobytes())


def load_eigenspace(path) -> Eigenspace:
    with open(path, "rb") as fh:
        header = fh.read(16)
        if len(header) != 16:
            raise InvalidArgument(f"{path}: truncated eigenspace header")
        L, M, rate = struct.unpack("<IId", header)
        phi = np.frombuffer(fh.read(8 * L * M), dtype=np.complex64)
        lam = np.frombuffer(fh.read(8 * M), dtype="<f8")
    if phi.size != L * M or lam.size != M:
        raise InvalidArgument(f"{path}: truncated eigenspace payload")
    return Eigenspace(phi.reshape((L, M), order="F").astype(np.complex128),
                      lam.astype(np.float64), rate)
