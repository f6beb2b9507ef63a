"""Scattering off finite devices attached to semi-infinite uniform leads.

Phase convention: on a lead attached with hopping ``-c`` to device site ``s``
the lead sites are numbered ``j = -1, -2, ...`` (incoming lead) or
``j = 1, 2, ...`` (outgoing lead), and the lead wave function is::

    incoming lead:  e^{ikj} + r e^{-ikj}
    outgoing lead:  t e^{ikj}

Extending the plane waves to ``j = 0`` gives ``1 + r = c psi(s) / J`` and
``t = c psi(s) / J``. Eliminating the lead sites turns each lead into the
on-site self-energy ``-(c^2/J) e^{ik}`` at ``s`` and the incoming wave into the
source term ``2 i c sin(k)`` at ``s``. For ``c = J`` this reduces to
``psi(s) = 1 + r``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import DomainError, SingularSystemError, ValidationError
from .lattice import HamiltonianMatrix

POLE_TOL = 1e-12
COND_LIMIT = 1e13


@dataclass(frozen=True)
class LeadClosure:
    E: float
    k: float
    sigma: complex
    Omega: float
    J: float


@dataclass(frozen=True, eq=False)
class ScatteringSolution:
    k: float
    r: complex
    t: Optional[complex] = None
    psi_device: Optional[np.ndarray] = None
    xi: Optional[complex] = None

    @property
    def flux_balance(self) -> float:
        """``|r|^2 + |t|^2`` (``|r|^2`` for one-lead problems)."""
        t = 0.0 if self.t is None else abs(self.t) ** 2
        return abs(self.r) ** 2 + t


def _check_J(J: float):
    if not J > 0:
        raise ValidationError(f"J must be positive, got {J}", key="J")


def _check_k(k: float):
    if not 0.0 < k < np.pi:
        raise DomainError(f"quasi-momentum must lie strictly inside (0, pi), got {k}")


def lead_closure(E: float, J: float = 1.0) -> LeadClosure:
    """Retarded surface closure of a uniform chain at in-band energy ``E``."""
    _check_J(J)
    if not abs(E) < 2 * J:
        raise DomainError(f"energy {E} is outside the open band (-2J, 2J)")
    k = float(np.arccos(-E / (2 * J)))
    return LeadClosure(E=float(E), k=k, sigma=-J * np.exp(1j * k), Omega=float(np.sqrt(4 * J**2 - E**2)), J=float(J))


def closure_at(k: float, J: float = 1.0) -> LeadClosure:
    """Closure parameterized by momentum instead of energy."""
    _check_J(J)
    _check_k(k)
    return LeadClosure(E=float(-2 * J * np.cos(k)), k=float(k), sigma=-J * np.exp(1j * k),
                       Omega=float(2 * J * np.sin(k)), J=float(J))


def _solve(device: HamiltonianMatrix, leads: Sequence[Tuple[int, float, bool]], k: float, J: float,
           on_singular: str = "raise") -> np.ndarray:
    """Solve ``(E - H - sum Sigma) psi = source`` for leads ``(site, coupling, incoming)``.

    A singular system means a bound state decoupled from the leads sits at
    ``E``. With ``on_singular='lstsq'`` the minimum-norm solution is returned;
    amplitudes on the lead sites, and hence ``r`` and ``t``, are still unique
    as long as the source lies in the range.
    """
    _check_J(J)
    _check_k(k)
    n = device.dim
    E = -2 * J * np.cos(k)
    A = E * np.eye(n, dtype=complex) - device.entries
    b = np.zeros(n, dtype=complex)
    for site, c, incoming in leads:
        if not 0 <= site < n:
            raise ValidationError(f"attach site {site} outside device of dimension {n}", key="site")
        A[site, site] += (c**2 / J) * np.exp(1j * k)
        if incoming:
            b[site] += 2j * c * np.sin(k)
    if np.linalg.cond(A) > COND_LIMIT:
        if on_singular != "lstsq":
            raise SingularSystemError(f"scattering system is singular at k={k} (bound state at E={E})")
        psi = np.linalg.lstsq(A, b, rcond=1e-10)[0]
        if np.linalg.norm(A @ psi - b) > 1e-9 * max(1.0, np.linalg.norm(b)):
            raise SingularSystemError(f"scattering system is singular and inconsistent at k={k}")
        return psi
    return np.linalg.solve(A, b)


def solve_one_lead(device: HamiltonianMatrix, attach_site: int, k: float, J: float = 1.0) -> ScatteringSolution:
    """Reflection of a unit plane wave from a lead of hopping ``J`` attached at ``attach_site``."""
    psi = _solve(device, [(attach_site, J, True)], k, J)
    return ScatteringSolution(k=float(k), r=complex(psi[attach_site] - 1.0), psi_device=psi)


def solve_two_lead(device: HamiltonianMatrix, left_site: int, right_site: int, left_coupling: float,
                   right_coupling: float, k: float, J: float = 1.0, on_singular: str = "raise") -> ScatteringSolution:
    """Two-lead scattering with incidence from the left lead.

    Couplings are hopping magnitudes: a lead attached with ``c`` enters the
    Hamiltonian as ``-c``. ``left_site`` may equal ``right_site``.
    """
    leads = [(left_site, left_coupling, True), (right_site, right_coupling, False)]
    psi = _solve(device, leads, k, J, on_singular)
    r = left_coupling * psi[left_site] / J - 1.0
    t = right_coupling * psi[right_site] / J
    return ScatteringSolution(k=float(k), r=complex(r), t=complex(t), psi_device=psi)


def _sin_guard(x: float, what: str) -> float:
    s = np.sin(x)
    if abs(s) < POLE_TOL:
        raise DomainError(f"{what} vanishes (pole of the closed form)")
    return s


def xi_kernel(k: float, N: int, Ns: int, V: float, nu: float, J: float = 1.0) -> complex:
    _check_J(J)
    _check_k(k)
    s_seg = _sin_guard(k * (N - 1), "sin(k(N-1))")
    s_stub = _sin_guard(k * (Ns + 1), "sin(k(Ns+1))")
    return V / J + np.sin(k * N) / s_seg - (nu**2 / J**2) * np.exp(1j * k) - np.sin(k * Ns) / s_stub


def closed_form_r(k: float, N: int, Ns: int, V: float, nu: float, J: float = 1.0) -> ScatteringSolution:
    """Closed-form reflection amplitude of the uniform two-lead device.

    Both side leads couple with ``nu`` to sites ``Ns+1`` and ``Ns+N`` which
    carry the on-site potential ``V``.
    """
    xi = xi_kernel(k, N, Ns, V, nu, J)
    s_seg2 = np.sin(k * (N - 1)) ** 2
    denom = J**2 * np.sin(k) ** 2 - J**2 * xi**2 * s_seg2
    if abs(denom) < POLE_TOL * J**2:
        raise DomainError("closed-form denominator vanishes (bound state of the detached device)")
    r = 2j * nu**2 * xi * np.sin(k) * s_seg2 / denom - 1.0
    return ScatteringSolution(k=float(k), r=complex(r), xi=complex(xi))


def resonance_residual(k: float, N: int, Ns: int, V: float, nu: float, J: float = 1.0) -> complex:
    """Defect of the zero-reflection condition; zero iff ``r = 0``.

    Returns ``J^2 sin^2 k - J^2 xi^2 sin^2(k(N-1)) - 2i nu^2 xi sin k sin^2(k(N-1))``.
    """
    xi = xi_kernel(k, N, Ns, V, nu, J)
    s_seg2 = np.sin(k * (N - 1)) ** 2
    lhs = 2j * nu**2 * xi * np.sin(k) * s_seg2
    rhs = J**2 * np.sin(k) ** 2 - J**2 * xi**2 * s_seg2
    return complex(rhs - lhs)
