"""Real-momentum Bethe quantization of the uniform PT chain.

With gain at site ``p = Ns+1`` and loss at ``q = Ns+N`` the eigenfunction is
a superposition of ``e^{+ikj}`` and ``e^{-ikj}`` in each of the three regions
``[1, p]``, ``[p, q]`` and ``[q, L]``. Matching the regions yields the
quantization condition, whose real-k form reads::

    gamma^2 sin^2(k(Ns+1)) sin(k(1-N)) = J^2 sin^2(k) sin(k(L+1)),   L = N + 2 Ns
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import List, Tuple

import numpy as np
from scipy.optimize import brentq, minimize_scalar

from .errors import DegenerateRootError, DomainError, NumericalError, RootFindingError, ValidationError
from .lattice import LatticeSpec

SCAN_EDGE = 1e-6
ROOT_XTOL = 1e-13
DEDUP_TOL = 1e-9
DOUBLE_ROOT_TOL = 1e-12
NULL_SPACE_TOL = 1e-7


@dataclass(frozen=True)
class BetheRoot:
    k: float
    energy: float
    chi: complex
    residual: float


@dataclass(frozen=True)
class PlaneWaveCoeffs:
    A: complex
    B: complex
    C_L: complex
    D_L: complex
    C_R: complex
    D_R: complex

    def as_array(self) -> np.ndarray:
        return np.array([self.A, self.B, self.C_L, self.D_L, self.C_R, self.D_R])


def _require_uniform(spec: LatticeSpec):
    if not spec.is_uniform:
        raise ValidationError("Bethe solution requires uniform sub-network chains with g = J", key="sub")
    if spec.N < 2:
        raise ValidationError("Bethe solution requires N >= 2", key="N")


def _check_k(k: float):
    if not 0.0 < k < np.pi:
        raise DomainError(f"quasi-momentum must lie strictly inside (0, pi), got {k}")
    if np.sin(k) == 0.0:
        raise DomainError("sin(k) vanishes")


def chi(k, Ns: int):
    """``(e^{ik(Ns+1)} - e^{-ik(Ns+1)}) / (e^{ik} - e^{-ik})``; accepts complex ``k``."""
    return (np.exp(1j * k * (Ns + 1)) - np.exp(-1j * k * (Ns + 1))) / (np.exp(1j * k) - np.exp(-1j * k))


def bethe_equation(k, spec: LatticeSpec):
    """Left minus right side of the exponential-form quantization condition.

    Valid for complex ``k`` as well; complex roots are the broken-PT states.
    """
    N, Ns, J, gamma = spec.N, spec.Ns, spec.J, spec.gamma
    L = spec.n_sites
    lhs = -gamma**2 * chi(k, Ns) ** 2 * (np.exp(1j * k * (N - 1)) - np.exp(-1j * k * (N - 1)))
    rhs = J**2 * (np.exp(1j * k * (L + 1)) - np.exp(-1j * k * (L + 1)))
    return lhs - rhs


def _sine_form(k, N: int, Ns: int, J: float, gamma: float):
    L = N + 2 * Ns
    return gamma**2 * np.sin(k * (Ns + 1)) ** 2 * np.sin(k * (1 - N)) - J**2 * np.sin(k) ** 2 * np.sin(k * (L + 1))


def _sine_form_dk(k, N: int, Ns: int, J: float, gamma: float):
    L = N + 2 * Ns
    a, b = k * (Ns + 1), k * (1 - N)
    c = k * (L + 1)
    d_lhs = gamma**2 * (2 * (Ns + 1) * np.sin(a) * np.cos(a) * np.sin(b) + (1 - N) * np.sin(a) ** 2 * np.cos(b))
    d_rhs = J**2 * (2 * np.sin(k) * np.cos(k) * np.sin(c) + (L + 1) * np.sin(k) ** 2 * np.cos(c))
    return d_lhs - d_rhs


def quantization_residual(k: float, spec: LatticeSpec) -> complex:
    """Real-k quantization defect (sine form), returned as a complex number.

    Obtained from :func:`bethe_equation` times ``sin(k)^2 / 2i``; the
    imaginary part must vanish for real ``k``.
    """
    _require_uniform(spec)
    _check_k(k)
    value = bethe_equation(k, spec) * np.sin(k) ** 2 / 2j
    scale = max(1.0, spec.gamma**2, spec.J**2)
    if abs(value.imag) > 1e-12 * scale:
        raise NumericalError(f"quantization residual has imaginary part {value.imag:.3e} at real k")
    return complex(value.real, 0.0)


def min_root_count(N: int) -> int:
    """Guaranteed number of real roots.

    For large gamma the condition is dominated by ``sin(k(N-1))``, which has
    ``N-2`` sign changes inside ``(0, pi)``; the PT dimer (``N=2``) with
    ``gamma > J`` has none at all.
    """
    return max(N - 2, 0)


def _make_root(k: float, spec: LatticeSpec) -> BetheRoot:
    residual = abs(quantization_residual(k, spec))
    chi_k = np.sin(k * (spec.Ns + 1)) / np.sin(k)
    return BetheRoot(k=float(k), energy=float(-2 * spec.J * np.cos(k)), chi=complex(chi_k), residual=float(residual))


def find_real_roots(spec: LatticeSpec) -> List[BetheRoot]:
    """All real roots ``k`` in ``(0, pi)`` of the quantization condition, ascending.

    Sign changes on a uniform grid are refined with Brent's method. Tangential
    (double) roots sit at local minima of ``|f|`` without a sign change; they
    are refined as simple roots of ``df/dk`` (bounded minimization of ``|f|``
    when the derivative does not bracket) and kept only when ``|f| < 1e-12``.
    Such roots are exceptional points of the chain.
    """
    _require_uniform(spec)
    N, Ns, J, gamma = spec.N, spec.Ns, spec.J, spec.gamma
    L = spec.n_sites

    def f(k):
        return _sine_form(k, N, Ns, J, gamma)

    def df(k):
        return _sine_form_dk(k, N, Ns, J, gamma)

    grid = np.linspace(SCAN_EDGE, np.pi - SCAN_EDGE, 20 * (L + 1) + 1)
    values = f(grid)
    found = []

    for i in np.flatnonzero(values == 0.0):
        found.append(grid[i])

    signs = np.sign(values)
    for i in np.flatnonzero(signs[:-1] * signs[1:] < 0):
        found.append(brentq(f, grid[i], grid[i + 1], xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps, maxiter=200))

    mags = np.abs(values)
    for i in range(1, len(grid) - 1):
        same_sign = signs[i - 1] == signs[i] == signs[i + 1] != 0
        if same_sign and mags[i] <= mags[i - 1] and mags[i] <= mags[i + 1]:
            lo, hi = grid[i - 1], grid[i + 1]
            if df(lo) * df(hi) < 0:
                k = brentq(df, lo, hi, xtol=ROOT_XTOL, rtol=4 * np.finfo(float).eps, maxiter=200)
            else:
                k = minimize_scalar(lambda x: abs(f(x)), bounds=(lo, hi), method="bounded",
                                    options={"xatol": ROOT_XTOL}).x
            if abs(f(k)) < DOUBLE_ROOT_TOL:
                found.append(k)

    roots: List[float] = []
    for k in sorted(found):
        if not roots or k - roots[-1] > DEDUP_TOL:
            roots.append(float(k))

    if len(roots) < min_root_count(N):
        raise RootFindingError(f"found {len(roots)} real roots, expected at least N-2 = {N - 2}")
    return [_make_root(k, spec) for k in roots]


def _matching_system(k: float, spec: LatticeSpec) -> np.ndarray:
    """Rows: left edge, right edge, two continuity conditions, two potential-site equations."""
    N, Ns, J, gamma = spec.N, spec.Ns, spec.J, spec.gamma
    L = spec.n_sites
    p, q = Ns + 1, Ns + N
    eps = -2 * J * np.cos(k)

    def w(j):
        return np.array([np.exp(1j * k * j), np.exp(-1j * k * j)])

    M = np.zeros((6, 6), dtype=complex)
    A, C_L, C_R = slice(0, 2), slice(2, 4), slice(4, 6)
    # vanishing amplitude on the virtual sites 0 and L+1
    M[0, C_L] = w(0)
    M[1, C_R] = w(L + 1)
    M[2, C_L], M[2, A] = w(p), -w(p)
    M[3, A], M[3, C_R] = w(q), -w(q)
    # -J f(p+1) - J f(p-1) = (eps - i gamma) f(p), in units of J
    M[4, A] = -w(p + 1) - (eps - 1j * gamma) / J * w(p)
    M[4, C_L] = -w(p - 1)
    # -J f(q+1) - J f(q-1) = (eps + i gamma) f(q)
    M[5, C_R] = -w(q + 1)
    M[5, A] = -w(q - 1) - (eps + 1j * gamma) / J * w(q)
    return M


def eigenfunction_from_root(root: BetheRoot, spec: LatticeSpec) -> Tuple[PlaneWaveCoeffs, np.ndarray]:
    """Plane-wave coefficients and the unit-norm site-space eigenvector for ``root``."""
    _require_uniform(spec)
    k = root.k
    _check_k(k)
    M = _matching_system(k, spec)
    _, s, vh = np.linalg.svd(M)
    if s[-1] > NULL_SPACE_TOL * s[0]:
        raise DegenerateRootError(f"matching system has no null vector at k={k} (s_min/s_max={s[-1] / s[0]:.2e})")
    if s[-2] <= NULL_SPACE_TOL * s[0]:
        raise DegenerateRootError(f"matching system null space is degenerate at k={k}")
    x = vh[-1].conj()
    coeffs = PlaneWaveCoeffs(*x)

    N, Ns = spec.N, spec.Ns
    p, q = Ns + 1, Ns + N
    j = np.arange(1, spec.n_sites + 1)
    plus, minus = np.exp(1j * k * j), np.exp(-1j * k * j)
    f = np.where(j <= p, coeffs.C_L * plus + coeffs.D_L * minus,
                 np.where(j < q, coeffs.A * plus + coeffs.B * minus, coeffs.C_R * plus + coeffs.D_R * minus))
    scale = 1.0 / np.linalg.norm(f)
    pivot = f[np.argmax(np.abs(f))] * scale
    scale *= abs(pivot) / pivot
    coeffs = PlaneWaveCoeffs(*(x * scale))
    return coeffs, f * scale
