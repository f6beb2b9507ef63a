"""Dense eigendecomposition and PT-symmetry diagnostics."""

from __future__ import annotations

from dataclasses import dataclass
from typing import List

import mpmath
import numpy as np
import scipy.linalg

from .errors import NumericalError
from .lattice import HamiltonianMatrix

REALITY_TOL = 1e-9
PT_SYMMETRY_TOL = 1e-7
# near-degenerate clusters are recomputed in extended precision: at an
# exceptional point double precision splits a real eigenvalue by ~sqrt(eps)
CLUSTER_GAP = 1e-6
EXTENDED_DPS = 50
EXTENDED_MAX_DIM = 64


@dataclass(frozen=True, eq=False)
class EigenPair:
    energy: complex
    vector: np.ndarray
    is_real: bool


@dataclass(frozen=True, eq=False)
class SpectrumReport:
    pairs: List[EigenPair]
    n_real: int
    pt_unbroken: bool

    @property
    def energies(self) -> np.ndarray:
        return np.array([p.energy for p in self.pairs])

    @property
    def real_energies(self) -> np.ndarray:
        return np.array([p.energy.real for p in self.pairs if p.is_real])


def is_real_energy(energy: complex, tol: float = REALITY_TOL) -> bool:
    return abs(energy.imag) < tol * max(1.0, abs(energy))


def fix_phase(vector: np.ndarray) -> np.ndarray:
    """Rotate ``vector`` so its largest-magnitude entry is real and positive."""
    vector = np.asarray(vector, dtype=complex)
    if not vector.size:
        return vector
    pivot = vector[np.argmax(np.abs(vector))]
    if pivot == 0:
        return vector
    return vector * (abs(pivot) / pivot)


def pt_apply(psi) -> np.ndarray:
    """Parity (site reversal) followed by complex conjugation."""
    return np.conj(np.asarray(psi, dtype=complex)[::-1])


def pt_symmetry_residual(psi) -> float:
    """``min_theta || PT psi - e^{i theta} psi ||`` for a unit vector ``psi``."""
    psi = np.asarray(psi, dtype=complex)
    image = pt_apply(psi)
    overlap = np.vdot(psi, image)
    phase = overlap / abs(overlap) if abs(overlap) > 0 else 1.0
    return float(np.linalg.norm(image - phase * psi))


def eigenpairs(H: HamiltonianMatrix) -> SpectrumReport:
    """Complete eigendecomposition of a (generally non-Hermitian) matrix.

    Pairs are sorted by ``(Re E, Im E)``; vectors are unit-normalized and
    phase-fixed by :func:`fix_phase`.
    """
    if H.dim < 1:
        raise NumericalError("empty Hamiltonian")
    try:
        w, v = scipy.linalg.eig(H.entries, check_finite=True)
    except (np.linalg.LinAlgError, ValueError) as exc:
        raise NumericalError(f"eigensolver failed: {exc}") from exc
    if w.shape[0] != H.dim or not np.all(np.isfinite(w)):
        raise NumericalError("eigensolver returned an incomplete spectrum")
    if H.dim <= EXTENDED_MAX_DIM and _min_gap(w) < CLUSTER_GAP * max(1.0, np.max(np.abs(w))):
        w, v = _eig_extended(H.entries)

    order = np.lexsort((w.imag, w.real))
    pairs = []
    for idx in order:
        vec = v[:, idx]
        vec = fix_phase(vec / np.linalg.norm(vec))
        energy = complex(w[idx])
        pairs.append(EigenPair(energy, vec, is_real_energy(energy)))

    n_real = sum(p.is_real for p in pairs)
    pt_unbroken = n_real == H.dim and all(pt_symmetry_residual(p.vector) < PT_SYMMETRY_TOL for p in pairs)
    return SpectrumReport(pairs, n_real, pt_unbroken)


def _min_gap(w: np.ndarray) -> float:
    if w.size < 2:
        return np.inf
    d = np.abs(w[:, None] - w[None, :])
    d[np.diag_indices_from(d)] = np.inf
    return float(d.min())


def _eig_extended(a: np.ndarray):
    with mpmath.workdps(EXTENDED_DPS):
        try:
            e, er = mpmath.eig(mpmath.matrix(a.tolist()))
        except ZeroDivisionError as exc:
            raise NumericalError(f"extended-precision eigensolver failed: {exc}") from exc
        w = np.array([complex(x) for x in e])
        v = np.array([[complex(er[i, j]) for j in range(er.cols)] for i in range(er.rows)])
    return w, v


def subspace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Largest principal angle between the column spans of ``a`` and ``b``.

    Used to compare eigenvectors inside a degenerate cluster, where single
    vectors are gauge dependent.
    """
    a = np.atleast_2d(np.asarray(a, dtype=complex).T).T
    b = np.atleast_2d(np.asarray(b, dtype=complex).T).T
    return float(np.max(scipy.linalg.subspace_angles(a, b)))


def degenerate_clusters(energies, gap: float = 1e-8) -> List[List[int]]:
    """Group indices of sorted ``energies`` whose consecutive spacing is below ``gap``."""
    energies = np.asarray(energies)
    clusters: List[List[int]] = []
    for i, e in enumerate(energies):
        if clusters and abs(e - energies[clusters[-1][-1]]) < gap:
            clusters[-1].append(i)
        else:
            clusters.append([i])
    return clusters
