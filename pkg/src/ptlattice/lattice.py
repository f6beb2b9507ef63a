"""Site-indexed single-particle Hamiltonians.

Four geometries are covered:

* the finite PT chain ``[stub] (+i gamma) [segment] (-i gamma) [stub]``
  with ``N + 2 Ns`` sites, gain at site ``Ns + 1`` and loss at ``Ns + N``;
* a single potential site glued to a sub-network (``side='left'``), the
  device seen by a semi-infinite lead attached to the potential site;
* its mirror image (``side='right'``);
* the two-potential geometry of the PT chain (``side='both'``), which is the
  common region of the Hermitian two-lead counterpart.

Site labels are 1-based strings (``"a1"`` ... ``"aL"``); the single-side
devices label the potential site ``"a0"`` and the sub-network ``"a1"``..
``"aNs"`` so that the semi-infinite lead occupies ``a-1, a-2, ...``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .errors import ValidationError

HERMITIAN_TOL = 1e-14
SIDES = ("left", "right", "both")


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=complex)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class SubNetwork:
    """Hermitian sub-network block.

    ``couplings[0, 0]`` belongs to the site coupled to the potential site.
    """

    couplings: np.ndarray = field(default_factory=lambda: np.zeros((0, 0)))

    def __post_init__(self):
        kappa = np.atleast_2d(np.asarray(self.couplings, dtype=complex))
        if kappa.size == 0:
            kappa = np.zeros((0, 0), dtype=complex)
        if kappa.ndim != 2 or kappa.shape[0] != kappa.shape[1]:
            raise ValidationError("sub-network couplings must be a square matrix", key="sub")
        if not np.all(np.isfinite(kappa)):
            raise ValidationError("sub-network couplings must be finite", key="sub")
        if kappa.size and np.max(np.abs(kappa - kappa.conj().T)) > HERMITIAN_TOL:
            raise ValidationError("sub-network couplings must be Hermitian", key="sub")
        object.__setattr__(self, "couplings", _frozen(kappa))

    @property
    def size(self) -> int:
        return self.couplings.shape[0]

    @classmethod
    def uniform(cls, size: int, J: float = 1.0) -> "SubNetwork":
        """Open chain of ``size`` sites with hopping ``-J``."""
        if size < 0:
            raise ValidationError("sub-network size must be non-negative", key="Ns")
        kappa = np.zeros((size, size))
        idx = np.arange(size - 1)
        kappa[idx, idx + 1] = kappa[idx + 1, idx] = -J
        return cls(kappa)

    def is_uniform_chain(self, J: float) -> bool:
        return np.array_equal(self.couplings, SubNetwork.uniform(self.size, J).couplings)


@dataclass(frozen=True)
class LatticeSpec:
    """Parameters of a chain and its sub-networks.

    ``g`` defaults to ``J``; ``sub`` defaults to an empty sub-network.
    """

    N: int
    sub: SubNetwork = field(default_factory=SubNetwork)
    J: float = 1.0
    gamma: float = 0.0
    g: Optional[float] = None

    def __post_init__(self):
        if isinstance(self.N, bool) or int(self.N) != self.N or self.N < 1:
            raise ValidationError(f"N must be a positive integer, got {self.N!r}", key="N")
        object.__setattr__(self, "N", int(self.N))
        for name in ("J", "gamma"):
            value = getattr(self, name)
            if not np.isfinite(value):
                raise ValidationError(f"{name} must be finite", key=name)
        if self.J <= 0:
            raise ValidationError(f"J must be positive, got {self.J}", key="J")
        if self.gamma < 0:
            raise ValidationError(f"gamma must be non-negative, got {self.gamma}", key="gamma")
        if self.g is None:
            object.__setattr__(self, "g", float(self.J))
        elif not np.isfinite(self.g):
            raise ValidationError("g must be finite", key="g")
        if not isinstance(self.sub, SubNetwork):
            raise ValidationError("sub must be a SubNetwork", key="sub")

    @classmethod
    def uniform(cls, N: int, Ns: int, gamma: float = 0.0, J: float = 1.0) -> "LatticeSpec":
        """Uniform chain with hopping ``J`` everywhere (sub-networks included)."""
        return cls(N=N, sub=SubNetwork.uniform(Ns, J), J=J, gamma=gamma, g=J)

    @property
    def Ns(self) -> int:
        return self.sub.size

    @property
    def n_sites(self) -> int:
        """Site count of the PT chain, ``N + 2 Ns``."""
        return self.N + 2 * self.Ns

    @property
    def is_uniform(self) -> bool:
        return self.g == self.J and self.sub.is_uniform_chain(self.J)

    def with_gamma(self, gamma: float) -> "LatticeSpec":
        return LatticeSpec(N=self.N, sub=self.sub, J=self.J, gamma=gamma, g=self.g)


@dataclass(frozen=True, eq=False)
class HamiltonianMatrix:
    entries: np.ndarray
    site_labels: tuple

    def __post_init__(self):
        entries = _frozen(self.entries)
        if entries.ndim != 2 or entries.shape[0] != entries.shape[1]:
            raise ValidationError("Hamiltonian must be square")
        labels = tuple(self.site_labels)
        if len(labels) != entries.shape[0]:
            raise ValidationError("site_labels length must equal matrix dimension")
        object.__setattr__(self, "entries", entries)
        object.__setattr__(self, "site_labels", labels)

    @property
    def dim(self) -> int:
        return self.entries.shape[0]

    def index(self, label: str) -> int:
        return self.site_labels.index(label)

    def is_hermitian(self, tol: float = HERMITIAN_TOL) -> bool:
        return bool(np.max(np.abs(self.entries - self.entries.conj().T), initial=0.0) <= tol)


def _labels(first: int, count: int) -> list:
    return [f"a{j}" for j in range(first, first + count)]


def _pt_geometry(spec: LatticeSpec, left_onsite: complex, right_onsite: complex) -> HamiltonianMatrix:
    """Stub, potential, segment, potential, stub; sites ``1..N+2Ns``."""
    N, Ns, J = spec.N, spec.Ns, spec.J
    L = spec.n_sites
    H = np.zeros((L, L), dtype=complex)
    p, q = Ns, Ns + N - 1  # 0-based potential sites
    for i in range(p, q):
        H[i, i + 1] = H[i + 1, i] = -J
    if Ns:
        kappa = spec.sub.couplings
        # right stub: sub-network site 1 sits next to the loss site
        H[q + 1:, q + 1:] = kappa
        H[q, q + 1] = H[q + 1, q] = -spec.g
        # left stub is the PT image of the right one
        H[:p, :p] = kappa[::-1, ::-1].conj()
        H[p, p - 1] = H[p - 1, p] = -spec.g
    H[p, p] += left_onsite
    H[q, q] += right_onsite
    return HamiltonianMatrix(H, _labels(1, L))


def _single_side(spec: LatticeSpec, onsite: complex, side: str) -> HamiltonianMatrix:
    Ns = spec.Ns
    H = np.zeros((Ns + 1, Ns + 1), dtype=complex)
    H[0, 0] = onsite
    if Ns:
        H[1:, 1:] = spec.sub.couplings
        H[0, 1] = H[1, 0] = -spec.g
    labels = _labels(0, Ns + 1)
    if side == "right":
        H = H[::-1, ::-1]
        labels = labels[::-1]
    return HamiltonianMatrix(H, labels)


def _check_side(side: str):
    if side not in SIDES:
        raise ValidationError(f"unknown side {side!r}; expected one of {SIDES}", key="side")


def build_pt_chain(spec: LatticeSpec, swap_gain_loss: bool = False) -> HamiltonianMatrix:
    """PT chain with ``+i gamma`` at site ``Ns+1`` and ``-i gamma`` at ``N+Ns``.

    ``swap_gain_loss`` exchanges the two signs.
    """
    if spec.n_sites < 2:
        raise ValidationError("PT chain needs N + 2*Ns >= 2 sites", key="N")
    gain = 1j * spec.gamma
    if swap_gain_loss:
        gain = -gain
    return _pt_geometry(spec, gain, -gain)


def build_device_with_drain(spec: LatticeSpec, side: str = "left", source: bool = False) -> HamiltonianMatrix:
    """Finite device carrying an imaginary potential.

    For ``side='left'``/``'right'`` the potential site holds ``-i gamma``
    (``+i gamma`` with ``source=True``). For ``side='both'`` the left
    potential site holds ``-i gamma`` and the right one ``+i gamma``;
    ``source=True`` flips both, which reproduces :func:`build_pt_chain`.
    """
    _check_side(side)
    drain = -1j * spec.gamma
    if source:
        drain = -drain
    if side == "both":
        return _pt_geometry(spec, drain, -drain)
    return _single_side(spec, drain, side)


def build_hermitian_device(spec: LatticeSpec, V: float, side: str = "left") -> HamiltonianMatrix:
    """Same geometry as :func:`build_device_with_drain` with real ``V`` on the potential site(s).

    Leads are not part of the matrix; they enter as self-energies in
    :mod:`ptlattice.scattering`.
    """
    _check_side(side)
    if not np.isfinite(V):
        raise ValidationError("V must be finite", key="V")
    if side == "both":
        return _pt_geometry(spec, V, V)
    return _single_side(spec, V, side)


def parity_matrix(dim: int) -> np.ndarray:
    """Anti-diagonal permutation ``l -> dim + 1 - l``."""
    return np.eye(dim)[::-1]


def chain_with_lead(device: HamiltonianMatrix, attach: int, lead_sites: int, coupling: float, J: float,
                    prefix: str = "b") -> HamiltonianMatrix:
    """Append a finite uniform lead of ``lead_sites`` sites coupled to ``device[attach]``."""
    n = device.dim
    H = np.zeros((n + lead_sites, n + lead_sites), dtype=complex)
    H[:n, :n] = device.entries
    if lead_sites:
        H[attach, n] = H[n, attach] = -coupling
        idx = np.arange(n, n + lead_sites - 1)
        H[idx, idx + 1] = H[idx + 1, idx] = -J
    labels: Sequence[str] = list(device.site_labels) + [f"{prefix}{j}" for j in range(1, lead_sites + 1)]
    return HamiltonianMatrix(H, labels)
