"""Map real-energy PT eigenstates onto resonant-transmission states.

An imaginary potential ``-i gamma`` seen at momentum ``k`` acts exactly like a
real potential ``V`` plus a side lead coupled with ``nu`` once::

    nu^2 sin k = gamma J,     nu^2 cos k = V J

(equivalently ``nu^2 = 2 gamma J^2 / Omega`` and ``V = -gamma E / Omega`` with
``Omega = sqrt(4J^2 - E^2)``). Replacing both potentials of the PT chain in
this way gives a Hermitian two-lead device; at every real Bethe root its
scattering state has ``r = 0`` and coincides with the PT eigenvector up to one
complex factor.
"""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple

import numpy as np

from .bethe import BetheRoot, eigenfunction_from_root, find_real_roots
from .errors import (CorrespondenceError, DomainError, NumericalError, PTLatticeError, SingularSystemError,
                     ValidationError)
from .lattice import LatticeSpec, build_hermitian_device
from .scattering import solve_two_lead

log = logging.getLogger(__name__)

THEOREM_TOL = 1e-8
FAILURE_TOL = 1e-6


@dataclass(frozen=True)
class CounterpartParams:
    nu: float
    V: float
    k: float
    gamma: float
    J: float
    Omega: float

    @property
    def E(self) -> float:
        return -2 * self.J * np.cos(self.k)


@dataclass(frozen=True, eq=False)
class CorrespondenceReport:
    spec: LatticeSpec
    root: BetheRoot
    params: CounterpartParams
    r_abs: float
    t_abs: float
    align_residual: float
    scalar: complex
    vacuous: bool = False
    bound_state: bool = False

    @property
    def passed(self) -> bool:
        if self.vacuous:
            return True
        if self.bound_state:
            return False
        return (self.r_abs < THEOREM_TOL and abs(self.t_abs - 1.0) < THEOREM_TOL
                and self.align_residual < THEOREM_TOL)


def map_to_counterpart(k: float, gamma: float, J: float = 1.0) -> CounterpartParams:
    """Lead coupling ``nu >= 0`` and potential ``V`` equivalent to ``-i gamma`` at momentum ``k``."""
    if not 0.0 < k < np.pi:
        raise DomainError(f"quasi-momentum must lie strictly inside (0, pi), got {k}")
    if gamma < 0:
        raise ValidationError("gamma must be non-negative", key="gamma")
    E = -2 * J * np.cos(k)
    # 2J sin k equals sqrt(4J^2 - E^2) without the cancellation near the band edges
    Omega = 2 * J * np.sin(k)
    if Omega < 1e-12 * J:
        raise DomainError(f"band-edge singularity at k={k} (Omega -> 0)")
    nu2 = 2 * gamma * J**2 / Omega
    V = -gamma * E / Omega

    scale = max(1.0, gamma * J)
    if abs(Omega**2 + E**2 - 4 * J**2) > 1e-12 * 4 * J**2:
        raise NumericalError("Omega inconsistent with the dispersion relation")
    if abs(nu2 * np.sin(k) - gamma * J) > 1e-12 * scale or abs(nu2 * np.cos(k) - V * J) > 1e-12 * scale:
        raise NumericalError("counterpart parameters violate the equivalence conditions")
    return CounterpartParams(nu=float(np.sqrt(nu2)), V=float(V), k=float(k), gamma=float(gamma), J=float(J),
                             Omega=float(Omega))


def align(target: np.ndarray, reference: np.ndarray) -> Tuple[complex, float]:
    """Least-squares ``c`` minimizing ``||target - c reference||`` and that minimum."""
    c = np.vdot(reference, target) / np.vdot(reference, reference)
    return complex(c), float(np.linalg.norm(target - c * reference))


def verify_root(spec: LatticeSpec, root: BetheRoot) -> CorrespondenceReport:
    """Compare the PT eigenstate at ``root`` with the counterpart scattering state."""
    params = map_to_counterpart(root.k, spec.gamma, spec.J)
    if spec.gamma == 0:
        # detached leads: no scattering problem to compare against
        nan = float("nan")
        return CorrespondenceReport(spec, root, params, nan, nan, nan, complex(nan, nan), vacuous=True)

    N, Ns = spec.N, spec.Ns
    device = build_hermitian_device(spec, params.V, side="both")
    _, psi_pt = eigenfunction_from_root(root, spec)
    try:
        sol = solve_two_lead(device, Ns, Ns + N - 1, params.nu, params.nu, root.k, spec.J)
        bound_state = False
    except SingularSystemError:
        sol = solve_two_lead(device, Ns, Ns + N - 1, params.nu, params.nu, root.k, spec.J, on_singular="lstsq")
        bound_state = True
    if bound_state:
        # the eigenstate vanishes on both potential sites and is a bound state
        # in the continuum of the counterpart; the scattering state is not unique
        scalar, residual = complex("nan"), float("nan")
    else:
        scalar, residual = align(psi_pt, sol.psi_device)
    report = CorrespondenceReport(spec, root, params, abs(sol.r), abs(sol.t), residual, scalar,
                                  bound_state=bound_state)
    if bound_state:
        raise CorrespondenceError(
            f"PT eigenstate at k={root.k} is a bound state in the continuum of the counterpart "
            f"(|r|={report.r_abs:.3g}); no resonant transmission", report=report)
    if residual >= FAILURE_TOL:
        raise CorrespondenceError(
            f"PT eigenstate at k={root.k} does not match the resonant scattering state (residual {residual:.3e})",
            report=report)
    return report


@dataclass
class SweepResult:
    """Reports of every verified root plus one message per failure.

    Roots that fail the theorem check keep their report (``passed`` is
    false) when one could be built.
    """

    reports: List[CorrespondenceReport] = field(default_factory=list)
    failures: List[Tuple[LatticeSpec, Optional[float], str]] = field(default_factory=list)

    @property
    def n_passed(self) -> int:
        return sum(r.passed for r in self.reports)

    @property
    def n_failed(self) -> int:
        return len(self.failures)

    @property
    def ok(self) -> bool:
        return not self.failures and all(r.passed for r in self.reports)


def _describe(exc: Exception) -> str:
    return f"{type(exc).__name__}: {exc}"


def _verify_spec(spec: LatticeSpec):
    reports, failures = [], []
    try:
        roots = find_real_roots(spec)
    except PTLatticeError as exc:
        log.warning("sweep item N=%d Ns=%d gamma=%g failed: %s", spec.N, spec.Ns, spec.gamma, exc)
        return reports, [(spec, None, _describe(exc))]
    if not roots:
        failures.append((spec, None, "no real Bethe roots"))
    for root in roots:
        try:
            reports.append(verify_root(spec, root))
        except PTLatticeError as exc:
            report = getattr(exc, "report", None)
            if report is not None:
                reports.append(report)
            failures.append((spec, root.k, _describe(exc)))
    for report in reports:
        if not report.passed and report.root.k not in {k for _, k, _ in failures}:
            failures.append((spec, report.root.k, "theorem tolerances exceeded"))
    return reports, failures


def worker_count(requested: Optional[int] = None) -> int:
    """Worker pool size, capped by the ``THREADS`` environment variable."""
    n = requested or os.cpu_count() or 1
    cap = os.environ.get("THREADS")
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise ValidationError(f"THREADS must be an integer, got {cap!r}", key="THREADS") from None
    return max(1, n)


def sweep(grid: Sequence[LatticeSpec], workers: Optional[int] = None) -> SweepResult:
    """Verify every real root of every spec; failures are collected, not raised."""
    grid = list(grid)
    if not grid:
        raise ValidationError("sweep grid is empty", key="grid")
    result = SweepResult()
    with ThreadPoolExecutor(max_workers=worker_count(workers)) as pool:
        for reports, failures in pool.map(_verify_spec, grid):
            result.reports.extend(reports)
            result.failures.extend(failures)
    return result
