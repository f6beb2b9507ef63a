import numpy as np
import pytest
from hypothesis import assume, given
from hypothesis import strategies as st

from ptlattice import (CorrespondenceError, DomainError, LatticeSpec, ValidationError, build_pt_chain, eigenpairs,
                       find_real_roots, map_to_counterpart, sweep, verify_root)
from ptlattice.correspondence import align, worker_count


def test_counterpart_at_band_centre():
    p = map_to_counterpart(np.pi / 2, 0.5)
    assert abs(p.E) < 1e-15 and abs(p.Omega - 2) < 1e-15
    assert abs(p.nu - np.sqrt(0.5)) < 1e-15 and abs(p.V) < 1e-15


def test_counterpart_at_third_band():
    p = map_to_counterpart(np.pi / 3, 1.0)
    assert abs(p.E + 1) < 1e-15 and abs(p.Omega - np.sqrt(3)) < 1e-15
    assert abs(p.nu**2 - 2 / np.sqrt(3)) < 1e-14 and abs(p.V - 1 / np.sqrt(3)) < 1e-15


def test_counterpart_hermitian_limit():
    p = map_to_counterpart(1.0, 0.0)
    assert p.nu == 0 and p.V == 0


@given(st.floats(1e-3, np.pi - 1e-3), st.floats(0, 5), st.floats(0.1, 3))
def test_counterpart_satisfies_both_conditions(k, gamma, J):
    p = map_to_counterpart(k, gamma, J)
    assert p.nu >= 0
    assert abs(p.nu**2 * np.sin(k) - gamma * J) < 1e-12 * max(1, gamma * J)
    assert abs(p.nu**2 * np.cos(k) - p.V * J) < 1e-12 * max(1, gamma * J)


@pytest.mark.parametrize("k", [0.0, np.pi, 1e-14])
def test_counterpart_band_edges(k):
    with pytest.raises(DomainError):
        map_to_counterpart(k, 0.5)


def test_dimer_roots_are_resonances():
    spec = LatticeSpec.uniform(2, 0, 0.6)
    reports = [verify_root(spec, r) for r in find_real_roots(spec)]
    assert len(reports) == 2
    for rep in reports:
        assert rep.passed and rep.r_abs < 1e-8 and rep.align_residual < 1e-8


def test_longer_chain_all_roots_pass():
    spec = LatticeSpec.uniform(5, 2, 1.2)
    roots = find_real_roots(spec)
    assert len(roots) >= 4
    for root in roots:
        rep = verify_root(spec, root)
        assert rep.passed
        assert abs(rep.t_abs - 1) < 1e-8


def test_aligned_state_matches_dense_eigenvector():
    spec = LatticeSpec.uniform(4, 1, 0.7)
    dense = eigenpairs(build_pt_chain(spec))
    for root in find_real_roots(spec):
        rep = verify_root(spec, root)
        vec = [p.vector for p in dense.pairs if abs(p.energy - root.energy) < 1e-9][0]
        from ptlattice.bethe import eigenfunction_from_root
        _, psi = eigenfunction_from_root(root, spec)
        phase = np.vdot(vec, psi)
        assert np.linalg.norm(psi - phase / abs(phase) * vec) < 1e-8
        assert rep.passed


def test_hermitian_limit_is_vacuous():
    spec = LatticeSpec.uniform(3, 1, 0.0)
    rep = verify_root(spec, find_real_roots(spec)[0])
    assert rep.vacuous and rep.passed and np.isnan(rep.r_abs)


def test_bound_state_in_continuum_is_flagged():
    # k = pi/2 with a one-site stub: the eigenstate vanishes on both potential sites
    spec = LatticeSpec.uniform(3, 1, 0.5)
    root = [r for r in find_real_roots(spec) if abs(r.k - np.pi / 2) < 1e-9][0]
    with pytest.raises(CorrespondenceError) as info:
        verify_root(spec, root)
    rep = info.value.report
    assert rep.bound_state and not rep.passed
    assert abs(rep.r_abs - 1) < 1e-8


def test_align():
    ref = np.array([1, 2j, 3])
    c, res = align((2 - 1j) * ref, ref)
    assert abs(c - (2 - 1j)) < 1e-15 and res < 1e-14


@given(st.integers(2, 6), st.integers(0, 3), st.floats(0.05, 2.0))
def test_generic_roots_are_resonances(N, Ns, gamma):
    spec = LatticeSpec.uniform(N, Ns, gamma)
    real = eigenpairs(build_pt_chain(spec)).real_energies
    for root in find_real_roots(spec):
        assume(abs(np.sin(root.k * (Ns + 1))) > 1e-6)  # not a bound state in the continuum
        assume(np.sum(np.abs(real - root.energy) < 1e-6) == 1)  # not an exceptional point
        assert verify_root(spec, root).passed


def test_sweep_single_spec_equals_verify_root():
    spec = LatticeSpec.uniform(5, 2, 1.2)
    result = sweep([spec])
    assert result.ok and result.n_failed == 0
    direct = [verify_root(spec, r) for r in find_real_roots(spec)]
    assert [r.root.k for r in result.reports] == [r.root.k for r in direct]
    assert [r.align_residual for r in result.reports] == [r.align_residual for r in direct]


def test_sweep_collects_failures():
    specs = [LatticeSpec.uniform(2, 0, 1.5), LatticeSpec.uniform(3, 1, 0.5), LatticeSpec.uniform(2, 0, 0.6)]
    result = sweep(specs, workers=2)
    assert not result.ok
    messages = [m for _, _, m in result.failures]
    assert any("no real Bethe roots" in m for m in messages)
    assert any("bound state" in m for m in messages)
    assert result.n_passed >= 2


def test_sweep_empty_grid():
    with pytest.raises(ValidationError):
        sweep([])


def test_thread_cap(monkeypatch):
    monkeypatch.setenv("THREADS", "2")
    assert worker_count(16) == 2
    monkeypatch.setenv("THREADS", "many")
    with pytest.raises(ValidationError):
        worker_count()
    monkeypatch.delenv("THREADS")
    assert worker_count(3) == 3
