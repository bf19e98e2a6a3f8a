"""Dense single-particle quantum walk, the oracle for the one-particle sector.

Implemented on its own data layout (an (L, 2) spinor array, column 0 = R,
column 1 = L) with no shared evolution code, so agreement with the automaton
is evidence rather than tautology. The identification used project-wide is
Plus <-> R and Minus <-> L.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lattice import Boundary, ConfigMismatchError, Eps, LatticeConfig

R, L_ = 0, 1  # spinor component indices


@dataclass
class WalkState:
    config: LatticeConfig
    spinors: np.ndarray  # shape (L, 2) complex

    @classmethod
    def localized(cls, config: LatticeConfig, cell: int, eps: Eps) -> "WalkState":
        psi = np.zeros((config.L, 2), dtype=complex)
        psi[cell, R if eps is Eps.PLUS else L_] = 1.0
        return cls(config, psi)

    def norm(self) -> float:
        return float(np.linalg.norm(self.spinors))

    def probabilities(self) -> np.ndarray:
        return np.sum(np.abs(self.spinors) ** 2, axis=1)


def walk_step(state: WalkState) -> WalkState:
    """Shift R right / L left, then rotate the coin by theta.

    Under the open boundary the edge components that cannot move stay put on
    their own sublattice side, which is exactly how the automaton's uncoupled
    seam sites behave.
    """
    cfg = state.config
    psi = state.spinors
    n = cfg.L
    # chi_minus collects what sits on a cell's Minus side after the shift,
    # chi_plus its Plus side.
    chi_minus = np.zeros(n, dtype=complex)
    chi_plus = np.zeros(n, dtype=complex)
    if cfg.boundary is Boundary.PERIODIC:
        chi_minus[:] = np.roll(psi[:, R], 1)
        chi_plus[:] = np.roll(psi[:, L_], -1)
    else:
        chi_minus[1:] = psi[:-1, R]
        chi_plus[:-1] = psi[1:, L_]
        chi_plus[n - 1] += psi[n - 1, R]   # right edge: R stays, on the Plus side
        chi_minus[0] += psi[0, L_]         # left edge: L stays, on the Minus side
    c, s = np.cos(cfg.theta), np.sin(cfg.theta)
    out = np.empty_like(psi)
    out[:, R] = c * chi_minus - s * chi_plus
    out[:, L_] = s * chi_minus + c * chi_plus
    return WalkState(cfg, out)


def walk_evolve(state: WalkState, nsteps: int) -> WalkState:
    for _ in range(nsteps):
        state = walk_step(state)
    return state


def walk_momentum_step(config: LatticeConfig, k: float) -> np.ndarray:
    """exp(-i theta sigma_2) diag(exp(+i k dx), exp(-i k dx)) in the R/L basis."""
    theta, kdx = config.theta, k * config.dx
    c, s = np.cos(theta), np.sin(theta)
    coin = np.array([[c, -s], [s, c]], dtype=complex)
    return coin @ np.diag([np.exp(1j * kdx), np.exp(-1j * kdx)])


def dirac_generator(config: LatticeConfig, k: float) -> np.ndarray:
    """Continuum generator i(k c sigma_3 - m c^2 sigma_2), hbar = 1."""
    from .spectral import SIGMA2, SIGMA3

    c, m = config.c, config.mass
    return 1j * (k * c * SIGMA3 - m * c * c * SIGMA2)


def _qca_one_particle_spinors(state) -> np.ndarray:
    """Project a one-particle FockState onto the walk's (L, 2) layout."""
    from .lattice import particles_from_basis

    cfg = state.config
    psi = np.zeros((cfg.L, 2), dtype=complex)
    for w, a in state.amplitudes.items():
        if w.bit_count() != 1:
            raise ValueError("state is not in the one-particle sector")
        (cell, eps), = particles_from_basis(w)
        psi[cell, R if eps is Eps.PLUS else L_] = a
    return psi


def compare_one_particle(
    config: LatticeConfig, init: tuple[int, Eps], nsteps: int
) -> float:
    """Max amplitude deviation between walk and automaton over nsteps."""
    from .evolution import step as qca_step
    from .fermion import LadderOp, OpKind, apply_ladder
    from .lattice import vacuum

    cell, eps = init
    walk = WalkState.localized(config, cell, Eps(eps))
    qca = apply_ladder(vacuum(config), LadderOp(OpKind.CREATE, cell, Eps(eps)))
    if walk.config != qca.config:
        raise ConfigMismatchError("mismatched configs")
    worst = 0.0
    for _ in range(nsteps):
        walk = walk_step(walk)
        qca = qca_step(qca)
        dev = float(np.max(np.abs(walk.spinors - _qca_one_particle_spinors(qca))))
        worst = max(worst, dev)
    return worst


def wavepacket_trace(
    config: LatticeConfig, init: tuple[int, Eps], nsteps: int
) -> list[tuple[int, int, float]]:
    """(step, cell, prob) rows for a localized start, for light-cone plots."""
    state = WalkState.localized(config, init[0], Eps(init[1]))
    rows = []
    for t in range(nsteps + 1):
        for cell, p in enumerate(state.probabilities()):
            rows.append((t, cell, float(p)))
        if t < nsteps:
            state = walk_step(state)
    return rows
