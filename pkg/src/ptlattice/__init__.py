"""Exact numerics for PT-symmetric tight-binding chains and their Hermitian
scattering counterparts."""

__version__ = "0.1.0"

from .errors import (  # noqa: E402
    CorrespondenceError, DegenerateRootError, DomainError, ExceptionalPointError, HorizonError, NumericalError,
    PTLatticeError, RootFindingError, SingularSystemError, ValidationError,
)
from .lattice import (  # noqa: E402
    HamiltonianMatrix, LatticeSpec, SubNetwork, build_device_with_drain, build_hermitian_device, build_pt_chain,
)
from .spectral import EigenPair, SpectrumReport, eigenpairs, pt_apply, pt_symmetry_residual  # noqa: E402
from .bethe import (  # noqa: E402
    BetheRoot, PlaneWaveCoeffs, bethe_equation, chi, eigenfunction_from_root, find_real_roots, quantization_residual,
)
from .scattering import (  # noqa: E402
    LeadClosure, ScatteringSolution, closed_form_r, lead_closure, resonance_residual, solve_one_lead, solve_two_lead,
    xi_kernel,
)
from .correspondence import (  # noqa: E402
    CorrespondenceReport, CounterpartParams, SweepResult, map_to_counterpart, sweep, verify_root,
)
from .dynamics import DrainLeadResult, EvolutionTrace, WavePacket, drain_vs_lead_experiment, evolve  # noqa: E402
