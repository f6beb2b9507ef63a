"""Wave-packet propagation: drain potential versus an escape lead.

Propagation uses a dense eigendecomposition, ``psi(t) = V exp(-i L t) V^-1 psi0``,
so there is no time-step error. The escape lead is a long finite chain; runs
whose wave reaches its far end are rejected.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Dict, Optional, Sequence

import numpy as np
import scipy.linalg

from .correspondence import map_to_counterpart
from .errors import ExceptionalPointError, HorizonError, ValidationError
from .lattice import HamiltonianMatrix, LatticeSpec, build_device_with_drain, build_hermitian_device

log = logging.getLogger(__name__)

COND_LIMIT = 1e12
TAIL_TOL = 1e-10
HORIZON_TOL = 1e-8
TAIL_WIDTHS = 5.0


@dataclass(frozen=True)
class WavePacket:
    """Gaussian-modulated plane wave ``e^{i k0 j} exp(-(j - x0)^2 / (2 sigma^2))``.

    ``x0`` is a 0-based matrix index.
    """

    x0: int
    k0: float
    sigma: float

    def __post_init__(self):
        if not 0.0 < self.k0 < np.pi:
            raise ValidationError(f"packet momentum must lie in (0, pi), got {self.k0}", key="k0")
        if not self.sigma > 0:
            raise ValidationError(f"packet width must be positive, got {self.sigma}", key="sigma")

    def amplitudes(self, n_sites: int) -> np.ndarray:
        """Unit-norm packet on sites ``0..n_sites-1``; raises if the tails are cut."""
        reach = int(np.ceil(10 * self.sigma)) + 1
        j = np.arange(min(0, self.x0 - reach), max(n_sites, self.x0 + reach + 1))
        full = np.exp(1j * self.k0 * j - (j - self.x0) ** 2 / (2 * self.sigma**2))
        inside = (j >= 0) & (j < n_sites)
        mass = np.abs(full) ** 2
        outside = mass[~inside].sum() / mass.sum()
        if outside > TAIL_TOL:
            raise ValidationError(f"packet tail mass {outside:.2e} lies outside the chain", key="x0")
        psi = full[inside]
        return psi / np.linalg.norm(psi)


@dataclass(frozen=True, eq=False)
class EvolutionTrace:
    times: np.ndarray
    norms: np.ndarray
    region_masses: Dict[str, np.ndarray] = field(default_factory=dict)
    states: Optional[np.ndarray] = None


def evolve(H: HamiltonianMatrix, psi0, times: Sequence[float], regions: Optional[Dict[str, slice]] = None,
           keep_states: bool = True) -> EvolutionTrace:
    """Propagate ``psi0`` under ``exp(-iHt)`` for each of ``times``."""
    psi0 = np.asarray(psi0, dtype=complex)
    if psi0.shape != (H.dim,):
        raise ValidationError(f"state has length {psi0.shape}, Hamiltonian has dimension {H.dim}")
    times = np.asarray(times, dtype=float)

    if H.is_hermitian():
        w, v = scipy.linalg.eigh(H.entries)
        coeffs = v.conj().T @ psi0
    else:
        w, v = scipy.linalg.eig(H.entries)
        cond = np.linalg.cond(v)
        if cond > COND_LIMIT:
            raise ExceptionalPointError(f"eigenvector matrix condition number {cond:.2e} (near an exceptional point)")
        coeffs = np.linalg.solve(v, psi0)

    phases = np.exp(-1j * np.outer(times, w))
    states = (phases * coeffs) @ v.T
    norms = np.sum(np.abs(states) ** 2, axis=1)
    masses = {name: np.sum(np.abs(states[:, sl]) ** 2, axis=1) for name, sl in (regions or {}).items()}
    return EvolutionTrace(times, norms, masses, states if keep_states else None)


@dataclass(frozen=True)
class DrainLeadResult:
    absorbed: float
    transmitted: float
    discrepancy: float
    nu: float
    V: float
    t_final: float
    n_left: int
    n_lead: int


def _attach_left_chain(device: HamiltonianMatrix, n_left: int, J: float, attach: int = 0) -> np.ndarray:
    n = n_left + device.dim
    H = np.zeros((n, n), dtype=complex)
    idx = np.arange(n_left - 1)
    H[idx, idx + 1] = H[idx + 1, idx] = -J
    H[n_left:, n_left:] = device.entries
    H[n_left - 1, n_left + attach] = H[n_left + attach, n_left - 1] = -J
    return H


def drain_vs_lead_experiment(spec: LatticeSpec, packet: WavePacket, L_total: int,
                             t_final: Optional[float] = None, n_samples: int = 25) -> DrainLeadResult:
    """Absorption by ``-i gamma`` against escape into the equivalent lead.

    Layout (0-based): chain sites ``0..n_left-1`` carrying the packet, then
    the potential site and the sub-network. In the Hermitian arm the potential
    site holds ``V`` and an ``n_lead``-site lead is coupled to it with ``nu``;
    ``(nu, V)`` are fixed at the packet momentum ``k0``. The left chain ends
    ``5 sigma`` beyond the packet centre; the run lasts until the packet's rear
    tail has passed the potential site at the group velocity ``2J sin k0``.
    """
    J = spec.J
    n_left = packet.x0 + int(np.ceil(TAIL_WIDTHS * packet.sigma)) + 1
    n_dev = 1 + spec.Ns
    n_lead = L_total - n_left - n_dev
    if n_lead < 1:
        raise ValidationError(f"L_total={L_total} leaves no room for the lead", key="L_total")
    v_group = 2 * J * np.sin(packet.k0)
    if t_final is None:
        t_final = (n_left - packet.x0 + TAIL_WIDTHS * packet.sigma) / v_group + 2.0 / J
    times = np.linspace(0.0, t_final, n_samples)

    params = map_to_counterpart(packet.k0, spec.gamma, J)
    psi_left = packet.amplitudes(n_left)

    drain = HamiltonianMatrix(_attach_left_chain(build_device_with_drain(spec, "left"), n_left, J),
                              [f"c{j}" for j in range(n_left + n_dev)])
    psi0 = np.concatenate([psi_left, np.zeros(n_dev)])
    drain_trace = evolve(drain, psi0, times, keep_states=False)

    herm = _attach_left_chain(build_hermitian_device(spec, params.V, "left"), n_left, J)
    n = n_left + n_dev + n_lead
    H = np.zeros((n, n), dtype=complex)
    H[:n_left + n_dev, :n_left + n_dev] = herm
    lead0 = n_left + n_dev
    H[n_left, lead0] = H[lead0, n_left] = -params.nu
    idx = np.arange(lead0, n - 1)
    H[idx, idx + 1] = H[idx + 1, idx] = -J
    lead_arm = HamiltonianMatrix(H, [f"c{j}" for j in range(n_left + n_dev)] + [f"b{j}" for j in range(1, n_lead + 1)])
    edge = max(10, n_lead // 20)
    regions = {
        "chain": slice(0, n_left),
        "device": slice(n_left, lead0),
        "lead": slice(lead0, n),
        "lead_end": slice(n - edge, n),
    }
    lead_trace = evolve(lead_arm, np.concatenate([psi0, np.zeros(n_lead)]), times, regions, keep_states=False)

    end_mass = float(lead_trace.region_masses["lead_end"].max())
    if end_mass > HORIZON_TOL:
        raise HorizonError(f"mass {end_mass:.2e} reached the end of the {n_lead}-site lead", check="lead_end_mass")

    absorbed = float(1.0 - drain_trace.norms[-1])
    transmitted = float(lead_trace.region_masses["lead"][-1])
    log.debug("drain/lead gamma=%g sigma=%g: absorbed=%.6g transmitted=%.6g", spec.gamma, packet.sigma,
              absorbed, transmitted)
    return DrainLeadResult(absorbed, transmitted, abs(absorbed - transmitted), params.nu, params.V, float(t_final),
                           n_left, n_lead)
