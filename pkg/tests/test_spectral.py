"""Momentum modes, dispersion, parity calibration and the Dirac sea."""

import math

import numpy as np
import pytest

from fqca.evolution import step
from fqca.fermion import OpKind
from fqca.lattice import Boundary, Eps, LatticeConfig, inner_product, vacuum
from fqca.spectral import (
    Band,
    BoundaryModeError,
    OffGridError,
    SIGMA2,
    SIGMA3,
    b_ladder,
    build_dirac_sea,
    calibrate_parity_sector,
    circular_multiset_distance,
    dirac_hamiltonian,
    dirac_sea_excitations,
    dispersion_rows,
    effective_hamiltonian,
    eigenphase_of,
    energy,
    expected_nparticle_phases,
    momentum_grid,
    momentum_ladder,
    n_particle_eigenphases,
    parity_offset,
    phi_convergence_slope,
    step_matrix,
)


def test_momentum_grid_basics():
    cfg = LatticeConfig(L=4)
    grid = momentum_grid(cfg)
    assert len(grid) == 4
    assert np.allclose(sorted(grid * cfg.dx), [-math.pi / 2, 0.0, math.pi / 2, math.pi])
    half = momentum_grid(cfg, offset=0.5)
    assert len(half) == 4
    assert all(-math.pi < k * cfg.dx <= math.pi for k in half)


def test_step_matrix_unitary_and_phase():
    cfg = LatticeConfig(L=8, theta=0.37)
    for k in momentum_grid(cfg):
        mode = step_matrix(cfg, k)
        M = mode.matrix
        assert np.allclose(M.conj().T @ M, np.eye(2), atol=1e-14)
        expected = math.acos(
            max(-1.0, min(1.0, math.cos(cfg.theta) * math.cos(k * cfg.dx)))
        )
        assert mode.phi == pytest.approx(expected)
        if not mode.degenerate:
            assert np.allclose(M @ mode.vplus, np.exp(-1j * mode.phi) * mode.vplus)
            assert np.allclose(M @ mode.vminus, np.exp(1j * mode.phi) * mode.vminus)


def test_momentum_ladder_guards():
    cfg = LatticeConfig(L=4, theta=0.2)
    with pytest.raises(OffGridError):
        momentum_ladder(vacuum(cfg), 0.1, Eps.PLUS, OpKind.CREATE)
    open_cfg = LatticeConfig(L=4, theta=0.2, boundary=Boundary.OPEN)
    with pytest.raises(BoundaryModeError):
        momentum_ladder(vacuum(open_cfg), 0.0, Eps.PLUS, OpKind.CREATE)


def test_b_mode_is_one_particle_eigenstate():
    cfg = LatticeConfig(L=6, theta=0.4)
    for k in momentum_grid(cfg):
        for band, sign in ((Band.PLUS, -1.0), (Band.MINUS, 1.0)):
            st = b_ladder(vacuum(cfg), k, band, OpKind.CREATE).normalized()
            mod, ph = eigenphase_of(st)
            phi = step_matrix(cfg, k).phi
            assert mod == pytest.approx(1.0, abs=1e-12)
            want = (sign * phi + math.pi) % (2 * math.pi) - math.pi
            diff = abs(ph - want) % (2 * math.pi)
            assert min(diff, 2 * math.pi - diff) < 1e-12


def test_b_mode_discrete_normalization():
    cfg = LatticeConfig(L=5, theta=0.3)
    k = momentum_grid(cfg)[2]
    st = b_ladder(vacuum(cfg), k, Band.PLUS, OpKind.CREATE)
    assert inner_product(st, st) == pytest.approx(cfg.L, abs=1e-12)


def test_b_modes_coincide_with_momentum_modes_at_theta_zero():
    cfg = LatticeConfig(L=4, theta=0.0)
    k = momentum_grid(cfg)[1]
    bst = b_ladder(vacuum(cfg), k, Band.PLUS, OpKind.CREATE).normalized()
    # sin(theta)=0 leaves M diagonal, so the band mode is a pure eps mode
    occupied_eps = {
        Eps(b % 2) for w in bst.amplitudes for b in range(2 * cfg.L) if w >> b & 1
    }
    assert len(occupied_eps) == 1


@pytest.mark.parametrize("theta", [0.0, 0.3])
def test_energy_and_dispersion(theta):
    cfg = LatticeConfig(L=8, theta=theta)
    for k in momentum_grid(cfg):
        e = energy(cfg, k)
        assert e.e_plus == pytest.approx(-e.e_minus)
        assert e.e_plus >= 0.0
    rows = dispersion_rows(cfg)
    assert len(rows) == cfg.L
    k, kdx, phi, e_lat, e_dir, err = rows[0]
    assert err == pytest.approx(abs(e_lat - e_dir))


def test_phi_example_value():
    # phi at theta=0.1, k dx=0.2 equals arccos(cos 0.1 cos 0.2), and the
    # relativistic approximation is good to cubic order
    cfg = LatticeConfig(L=8, theta=0.1)
    phi = step_matrix(cfg, 0.2 / cfg.dx).phi
    assert phi == pytest.approx(math.acos(math.cos(0.1) * math.cos(0.2)))
    assert abs(phi - math.sqrt(0.1**2 + 0.2**2)) < max(0.1, 0.2) ** 3


def test_convergence_slope_cubic():
    assert phi_convergence_slope() >= 2.9


def test_effective_hamiltonian_exponentiates_to_step():
    rng = np.random.default_rng(11)
    worst = 0.0
    for _ in range(100):
        theta = rng.uniform(-1.3, 1.3)
        k = rng.uniform(-math.pi, math.pi)
        cfg = LatticeConfig(L=4, theta=theta)
        H = effective_hamiltonian(cfg, k)
        assert np.allclose(H, H.conj().T, atol=1e-13)
        w, v = np.linalg.eigh(H)
        expH = v @ np.diag(np.exp(-1j * w * cfg.dt)) @ v.conj().T
        worst = max(worst, float(np.max(np.abs(expH - step_matrix(cfg, k).matrix))))
    assert worst <= 1e-12


def test_effective_hamiltonian_special_points():
    # k=0, small theta: pure mass term
    cfg = LatticeConfig(L=4, theta=0.05)
    assert np.allclose(effective_hamiltonian(cfg, 0.0), 0.05 * SIGMA2, atol=1e-12)
    # theta=0: pure kinetic term
    cfg0 = LatticeConfig(L=4, theta=0.0)
    k = 0.3
    assert np.allclose(effective_hamiltonian(cfg0, k), k * SIGMA3, atol=1e-12)
    assert np.allclose(dirac_hamiltonian(cfg0, k), k * SIGMA3)


def test_one_particle_eigenphases_match_dispersion():
    cfg = LatticeConfig(L=32, theta=0.4)
    phases = n_particle_eigenphases(cfg, 1)
    expected = []
    for k in momentum_grid(cfg):
        phi = step_matrix(cfg, k).phi
        expected.extend([phi, -phi])
    dev = circular_multiset_distance(phases, np.array(expected))
    assert dev <= 1e-10


def test_two_particle_spectrum_calibrated():
    cfg = LatticeConfig(L=4, theta=0.3)
    offsets = calibrate_parity_sector(cfg)
    assert offsets[1] == 0.0
    actual = n_particle_eigenphases(cfg, 2)
    predicted = expected_nparticle_phases(cfg, 2, offsets[0])
    assert circular_multiset_distance(actual, predicted) <= 1e-10


def test_calibration_free_translation_oracle():
    # at theta=0 every phi equals |k dx| and the spectrum is pure translation
    cfg = LatticeConfig(L=4, theta=0.0)
    offsets = calibrate_parity_sector(cfg)
    actual = n_particle_eigenphases(cfg, 2)
    predicted = expected_nparticle_phases(cfg, 2, offsets[0])
    assert circular_multiset_distance(actual, predicted) <= 1e-10


def test_calibration_theta_independent():
    offs = {
        theta: calibrate_parity_sector(LatticeConfig(L=4, theta=theta))[0]
        for theta in (0.0, 0.2, 0.5)
    }
    assert len(set(offs.values())) == 1


def test_parity_offset_odd_is_zero():
    cfg = LatticeConfig(L=6, theta=0.4)
    assert parity_offset(cfg, 1) == 0.0
    assert parity_offset(cfg, 3) == 0.0
    assert parity_offset(cfg, 6) == parity_offset(cfg, 2)


def test_vacuum_sector_trivial():
    cfg = LatticeConfig(L=4, theta=0.3)
    assert n_particle_eigenphases(cfg, 0).tolist() == [0.0]


def test_dirac_sea_eigenstate_and_gaps():
    cfg = LatticeConfig(L=6, theta=0.4)
    sea, excitations = dirac_sea_excitations(cfg)
    mod, _ = eigenphase_of(sea)
    assert abs(mod - 1.0) <= 1e-10
    assert len(excitations) == 2 * cfg.L
    for e in excitations:
        assert abs(e.eigen_modulus - 1.0) <= 1e-10
        assert e.gap > 0.0
        assert abs(e.gap - e.phi / cfg.dt) <= 1e-10


def test_sea_has_L_particles():
    cfg = LatticeConfig(L=4, theta=0.3)
    sea = build_dirac_sea(cfg)
    assert all(w.bit_count() == cfg.L for w in sea.amplitudes)
    assert sea.norm() == pytest.approx(1.0, abs=1e-12)


def test_circular_multiset_distance():
    a = np.array([math.pi - 1e-12, 0.0])
    b = np.array([-math.pi, 0.0])
    assert circular_multiset_distance(a, b) < 1e-11
    with pytest.raises(ValueError):
        circular_multiset_distance(np.array([0.0]), np.array([0.0, 1.0]))
