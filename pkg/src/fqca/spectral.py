"""Momentum modes, eigenphases, effective Hamiltonian and the Dirac sea.

Mode conventions, fixed once here and asserted by the L=4 calibration tests:

- Plane-wave ladders use one Fourier convention for both internal states:
  creator a^dag_{k,eps} = sum_j exp(-i j k dx) a^dag_{j,eps}, annihilator the
  conjugate. With that choice the annihilator coefficient pair
  (a_{k,Plus}, a_{k,Minus}) closes under conjugation by the step unitary with
  the 2x2 matrix M(k).
- M(k) = cos(phi) I - i sin(phi) nhat.sigma with cos(phi) = cos(theta)
  cos(k dx). ModeMatrix.vplus is the eigenvector with M-eigenvalue
  exp(-i phi) (the +1 eigenvector of nhat.sigma), vminus the exp(+i phi) one.
- The positive-energy band ladder b_{k,Plus} is built on vminus: then
  U b^dag_{k,Plus}|vac> = exp(-i phi) b^dag_{k,Plus}|vac>, i.e. energy
  +phi/dt, and the Minus band gets -phi/dt.
- On the ring, the n-particle sector behaves like free modes on a momentum
  grid that may be offset by half a grid step depending on the parity of n
  (the crossing-sign bookkeeping at the seam). calibrate_parity_sector
  measures the offset; n=1 is the offset-0 reference.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass

import numpy as np

from .evolution import step
from .fermion import DimensionTooLargeError, LadderOp, OpKind, apply_ladder
from .lattice import Boundary, Eps, FockState, LatticeConfig, vacuum

SIGMA1 = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA2 = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA3 = np.array([[1, 0], [0, -1]], dtype=complex)

_DENSE_DIM_CAP = 2000


class OffGridError(Exception):
    pass


class BoundaryModeError(Exception):
    pass


class Band(object):
    PLUS = "plus"
    MINUS = "minus"


def momentum_grid(config: LatticeConfig, offset: float = 0.0) -> np.ndarray:
    """Grid k = 2 pi (n + offset) / (L dx) restricted to -pi < k dx <= pi."""
    L = config.L
    lo = math.floor(-L / 2 - offset) + 1
    hi = math.floor(L / 2 - offset)
    return np.array(
        [2 * math.pi * (n + offset) / (L * config.dx) for n in range(lo, hi + 1)]
    )


@dataclass
class ModeMatrix:
    k: float
    kdx: float
    matrix: np.ndarray
    phi: float
    vplus: np.ndarray   # M-eigenvalue exp(-i phi)
    vminus: np.ndarray  # M-eigenvalue exp(+i phi)
    nhat: np.ndarray
    degenerate: bool


def _fix_phase(v: np.ndarray) -> np.ndarray:
    i = int(np.argmax(np.abs(v)))
    ph = v[i] / abs(v[i])
    return v / ph


def step_matrix(config: LatticeConfig, k: float) -> ModeMatrix:
    theta = config.theta
    kdx = k * config.dx
    c, s = math.cos(theta), math.sin(theta)
    ekm, ekp = np.exp(-1j * kdx), np.exp(1j * kdx)
    M = np.array([[ekm * c, -ekp * s], [ekm * s, ekp * c]], dtype=complex)
    cosphi = c * math.cos(kdx)
    phi = math.acos(max(-1.0, min(1.0, cosphi)))
    sinphi = math.sqrt(max(0.0, 1.0 - cosphi * cosphi))
    if sinphi < 1e-12:
        return ModeMatrix(
            k, kdx, M, phi,
            vplus=np.array([1.0, 0.0], dtype=complex),
            vminus=np.array([0.0, 1.0], dtype=complex),
            nhat=np.array([0.0, 0.0, 1.0]),
            degenerate=True,
        )
    nhat = (
        np.array(
            [s * math.sin(kdx), s * math.cos(kdx), c * math.sin(kdx)]
        )
        / sinphi
    )
    n1, n2, n3 = nhat
    if 1.0 + n3 > 1e-12:
        vplus = np.array([1.0 + n3, n1 + 1j * n2], dtype=complex)
        vminus = np.array([-(n1 - 1j * n2), 1.0 + n3], dtype=complex)
    else:
        vplus = np.array([0.0, 1.0], dtype=complex)
        vminus = np.array([1.0, 0.0], dtype=complex)
    vplus = _fix_phase(vplus / np.linalg.norm(vplus))
    vminus = _fix_phase(vminus / np.linalg.norm(vminus))
    return ModeMatrix(k, kdx, M, phi, vplus, vminus, nhat, degenerate=False)


def _require_periodic(config: LatticeConfig) -> None:
    if config.boundary is not Boundary.PERIODIC:
        raise BoundaryModeError("momentum modes need the periodic boundary")


def _check_on_grid(config: LatticeConfig, k: float, offset: float) -> None:
    v = k * config.L * config.dx / (2 * math.pi) - offset
    if abs(v - round(v)) > 1e-9:
        raise OffGridError(f"k={k} not on the offset-{offset} momentum grid")
    if not -math.pi < k * config.dx <= math.pi + 1e-12:
        raise OffGridError(f"k={k} outside the Brillouin zone")


def momentum_ladder(
    state: FockState, k: float, eps: Eps, kind: OpKind, offset: float = 0.0
) -> FockState:
    """Plane-wave ladder: sum over cells of phased position ladders."""
    cfg = state.config
    _require_periodic(cfg)
    _check_on_grid(cfg, k, offset)
    sign = -1j if kind is OpKind.CREATE else 1j
    out = FockState(cfg, {})
    for j in range(cfg.L):
        term = apply_ladder(state, LadderOp(kind, j, eps))
        out = out.add(term.scaled(np.exp(sign * j * k * cfg.dx)))
    return out


def _band_vector(mode: ModeMatrix, band: str) -> np.ndarray:
    # positive-energy band rides the exp(+i phi) eigenvector of M
    return mode.vminus if band == Band.PLUS else mode.vplus


def b_ladder(
    state: FockState, k: float, band: str, kind: OpKind, offset: float = 0.0
) -> FockState:
    """Diagonalized-mode ladder b_{k,band} (annihilator) or its dagger."""
    cfg = state.config
    _require_periodic(cfg)
    _check_on_grid(cfg, k, offset)
    v = _band_vector(step_matrix(cfg, k), band)
    coeffs = v if kind is OpKind.ANNIHILATE else v.conj()
    out = FockState(cfg, {})
    for eps, coeff in ((Eps.PLUS, coeffs[0]), (Eps.MINUS, coeffs[1])):
        if abs(coeff) < 1e-15:
            continue
        out = out.add(momentum_ladder(state, k, eps, kind, offset).scaled(coeff))
    return out


@dataclass
class EnergyResult:
    e_plus: float
    e_minus: float
    dirac: float


def energy(config: LatticeConfig, k: float) -> EnergyResult:
    phi = step_matrix(config, k).phi
    m, c = config.mass, config.c
    dirac = math.sqrt((k * c) ** 2 + (m * c * c) ** 2)
    return EnergyResult(phi / config.dt, -phi / config.dt, dirac)


def effective_hamiltonian(config: LatticeConfig, k: float) -> np.ndarray:
    """H(k) with exp(-i H dt) = M(k); long wavelengths give the Dirac form."""
    mode = step_matrix(config, k)
    if mode.degenerate:
        return (mode.phi / config.dt) * SIGMA3
    n1, n2, n3 = mode.nhat
    return (mode.phi / config.dt) * (n1 * SIGMA1 + n2 * SIGMA2 + n3 * SIGMA3)


def dirac_hamiltonian(config: LatticeConfig, k: float) -> np.ndarray:
    c, m = config.c, config.mass
    return k * c * SIGMA3 + m * c * c * SIGMA2


# ---------------------------------------------------------------------------
# dense sector machinery


def sector_words(L: int, n: int) -> list[int]:
    words = []
    for bits in itertools.combinations(range(2 * L), n):
        w = 0
        for b in bits:
            w |= 1 << b
        words.append(w)
    words.sort()
    return words


def sector_unitary(config: LatticeConfig, n: int) -> tuple[np.ndarray, list[int]]:
    words = sector_words(config.L, n)
    dim = len(words)
    if dim > _DENSE_DIM_CAP:
        raise DimensionTooLargeError(
            f"sector dimension {dim} exceeds the dense cap {_DENSE_DIM_CAP}"
        )
    index = {w: i for i, w in enumerate(words)}
    U = np.zeros((dim, dim), dtype=complex)
    for w in words:
        out = step(FockState(config, {w: 1.0}))
        for w2, a in out.amplitudes.items():
            U[index[w2], index[w]] = a
    return U, words


def n_particle_eigenphases(config: LatticeConfig, n: int) -> np.ndarray:
    _require_periodic(config)
    if n == 0:
        return np.array([0.0])
    U, _ = sector_unitary(config, n)
    return np.sort(np.angle(np.linalg.eigvals(U)))


def expected_nparticle_phases(
    config: LatticeConfig, n: int, offset: float
) -> np.ndarray:
    """Eigenphase multiset predicted by mode sums over the offset grid.

    A mode (k, band) contributes -band_sign * phi_k to the eigenphase, i.e.
    occupied positive-energy modes rotate the state by exp(-i phi_k).
    """
    grid = momentum_grid(config, offset)
    modes = [(k, s) for k in grid for s in (+1, -1)]
    phases = []
    for combo in itertools.combinations(modes, n):
        total = -sum(s * step_matrix(config, k).phi for k, s in combo)
        phases.append((total + math.pi) % (2 * math.pi) - math.pi)
    return np.sort(np.array(phases))


def circular_multiset_distance(a: np.ndarray, b: np.ndarray) -> float:
    """Max matched circular distance between two equal-size phase multisets."""
    if len(a) != len(b):
        raise ValueError("multisets differ in size")
    sa = np.sort(np.mod(a, 2 * math.pi))
    sb = np.sort(np.mod(b, 2 * math.pi))
    best = math.inf
    for roll in range(len(sa)):
        d = np.abs(np.roll(sa, roll) - sb)
        d = np.minimum(d, 2 * math.pi - d)
        best = min(best, float(np.max(d)))
        if best < 1e-13:
            break
    return best


@functools.lru_cache(maxsize=None)
def _calibrated_even_offset(L: int, dx: float, dt: float, theta: float) -> float:
    config = LatticeConfig(L=L, dx=dx, dt=dt, theta=theta, boundary=Boundary.PERIODIC)
    actual = n_particle_eigenphases(config, 2)
    scores = {
        off: circular_multiset_distance(
            actual, expected_nparticle_phases(config, 2, off)
        )
        for off in (0.0, 0.5)
    }
    best = min(scores, key=scores.get)
    if scores[best] > 1e-8:
        raise AssertionError(f"no parity grid matches the 2-particle sector: {scores}")
    return best


def calibrate_parity_sector(config: LatticeConfig) -> dict[int, float]:
    """Per-parity grid offset (keyed by n mod 2), measured at this L.

    The odd sector is the offset-0 reference (it contains n=1, the plain
    walk). The even sector's offset is read off the 2-particle spectrum.
    """
    _require_periodic(config)
    if config.L > 6:
        raise DimensionTooLargeError("calibrate_parity_sector needs L <= 6")
    even = _calibrated_even_offset(config.L, config.dx, config.dt, config.theta)
    return {1: 0.0, 0: even}


def parity_offset(config: LatticeConfig, n: int) -> float:
    """Grid offset for an n-particle sector; calibrates at L (or L=4 fallback)."""
    if n % 2 == 1:
        return 0.0
    L = config.L if config.L <= 6 else 4
    return _calibrated_even_offset(L, config.dx, config.dt, config.theta)


# ---------------------------------------------------------------------------
# Dirac sea


def _mode_sea(
    config: LatticeConfig,
    offset: float,
    skip_minus: float | None = None,
    extra_plus: float | None = None,
) -> FockState:
    state = vacuum(config)
    for k in sorted(momentum_grid(config, offset)):
        if skip_minus is not None and abs(k - skip_minus) < 1e-12:
            continue
        state = b_ladder(state, k, Band.MINUS, OpKind.CREATE, offset)
    if extra_plus is not None:
        state = b_ladder(state, extra_plus, Band.PLUS, OpKind.CREATE, offset)
    return state.normalized()


def build_dirac_sea(config: LatticeConfig) -> FockState:
    """Fill every negative-energy mode of the L-particle sector's grid."""
    _require_periodic(config)
    if config.L > 8:
        raise DimensionTooLargeError("build_dirac_sea needs L <= 8")
    return _mode_sea(config, parity_offset(config, config.L))


def eigenphase_of(state: FockState) -> tuple[float, float]:
    """(|<psi|U|psi>|, arg) for a normalized state; modulus 1 iff eigenstate."""
    from .lattice import inner_product

    out = step(state)
    ov = inner_product(state, out)
    return abs(ov), float(np.angle(ov))


@dataclass
class SeaExcitation:
    kind: str       # "add_plus" or "remove_minus"
    k: float
    gap: float      # energy above the sea, from sector eigenphases
    phi: float      # single-mode phase phi_k at this k
    eigen_modulus: float


def dirac_sea_excitations(config: LatticeConfig) -> tuple[FockState, list[SeaExcitation]]:
    """The sea plus its 2L single-particle / single-hole excitation gaps.

    Excited states are true eigenstates of the step unitary in the (L+1)- and
    (L-1)-particle sectors, built on those sectors' calibrated grids; gaps are
    eigenphase differences. The phi sums over both parity grids agree exactly
    (the grids map onto each other under k -> pi/dx - k), so each gap equals
    the excited mode's phi_k / dt.
    """
    sea = build_dirac_sea(config)
    _, sea_phase = eigenphase_of(sea)
    other = parity_offset(config, config.L + 1)
    excitations = []
    for k in sorted(momentum_grid(config, other)):
        phi = step_matrix(config, k).phi
        st = _mode_sea(config, other, extra_plus=k)
        mod, ph = eigenphase_of(st)
        gap = ((sea_phase - ph) % (2 * math.pi)) / config.dt
        excitations.append(SeaExcitation("add_plus", float(k), gap, phi, mod))
        st = _mode_sea(config, other, skip_minus=k)
        mod, ph = eigenphase_of(st)
        gap = ((sea_phase - ph) % (2 * math.pi)) / config.dt
        excitations.append(SeaExcitation("remove_minus", float(k), gap, phi, mod))
    return sea, excitations


# ---------------------------------------------------------------------------
# dispersion sweep helpers


def dispersion_rows(config: LatticeConfig) -> list[tuple[float, ...]]:
    """(k, kdx, phi, E_lattice, E_dirac, abs_err) per grid momentum."""
    rows = []
    for k in momentum_grid(config):
        e = energy(config, k)
        rows.append(
            (float(k), float(k * config.dx), step_matrix(config, k).phi,
             e.e_plus, e.dirac, abs(e.e_plus - e.dirac))
        )
    return rows


def phi_convergence_slope(eps_values=(0.2, 0.1, 0.05, 0.025)) -> float:
    """Log-log slope of |phi - sqrt(theta^2 + kdx^2)| at theta = kdx = eps."""
    errs = []
    for eps in eps_values:
        phi = math.acos(math.cos(eps) * math.cos(eps))
        errs.append(abs(phi - math.sqrt(2.0) * eps))
    slope, _ = np.polyfit(np.log(np.asarray(eps_values)), np.log(np.asarray(errs)), 1)
    return float(slope)
