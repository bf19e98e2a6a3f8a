"""One automaton step as a brickwork of two-site gates: coin after shift.

Each gate acts on an ordered pair of sites (p1, p2) in the local basis
{|00>, |01>, |10>, |11>} where the first bit is the occupation of p1. The
coin couples the (Minus, Plus) pair inside each cell; the shift couples the
offset pair ((cell, Plus), (cell+1, Minus)). Both put a phase of -1 on the
doubly occupied pair, which is what makes two particles passing each other
pick up the fermionic exchange sign.

Note on the coin's sin(theta) signs: the convention here is the one under
which a single + particle evolves to cos(theta)|x+1,+> + sin(theta)|x+1,->
and creation operators conjugate to cos/sin combinations with a +sin on the
+ branch. The alternative sign choice (theta -> -theta) breaks those
relations.
"""

from __future__ import annotations

import numpy as np

from .lattice import Boundary, FockState, LatticeConfig, PRUNE_THRESHOLD


def coin_matrix(theta: float, bosonic: bool = False) -> np.ndarray:
    """4x4 coin gate on the (Minus, Plus) pair of one cell.

    A lone Minus occupation maps to cos|Plus> + sin|Minus>; a lone Plus
    occupation maps to cos|Minus> - sin|Plus>; |11> gets a -1 phase. The
    bosonic flag replaces that -1 by +1 (negative-control use only).
    """
    c, s = np.cos(theta), np.sin(theta)
    phase = 1.0 if bosonic else -1.0
    return np.array(
        [
            [1, 0, 0, 0],
            [0, -s, c, 0],
            [0, c, s, 0],
            [0, 0, 0, phase],
        ],
        dtype=complex,
    )


def shift_matrix(bosonic: bool = False) -> np.ndarray:
    """4x4 shift gate on the ((cell, Plus), (cell+1, Minus)) pair."""
    phase = 1.0 if bosonic else -1.0
    return np.array(
        [
            [1, 0, 0, 0],
            [0, 0, 1, 0],
            [0, 1, 0, 0],
            [0, 0, 0, phase],
        ],
        dtype=complex,
    )


def is_unitary(m: np.ndarray, tol: float = 1e-14) -> bool:
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))) < tol)


def _apply_pair_gate(amps: dict, p1: int, p2: int, gate: np.ndarray) -> dict:
    out: dict = {}
    for w, a in amps.items():
        b1 = (w >> p1) & 1
        b2 = (w >> p2) & 1
        col = 2 * b1 + b2
        base = w & ~(1 << p1) & ~(1 << p2)
        for row in range(4):
            g = gate[row, col]
            if g == 0:
                continue
            w2 = base
            if row & 2:
                w2 |= 1 << p1
            if row & 1:
                w2 |= 1 << p2
            out[w2] = out.get(w2, 0.0) + a * g
    return {w: a for w, a in out.items() if abs(a) > PRUNE_THRESHOLD}


def apply_coin(state: FockState, bosonic: bool = False) -> FockState:
    cfg = state.config
    gate = coin_matrix(cfg.theta, bosonic)
    amps = state.amplitudes
    for j in range(cfg.L):
        amps = _apply_pair_gate(amps, 2 * j, 2 * j + 1, gate)
    return FockState(cfg, amps)


def apply_shift(state: FockState, bosonic: bool = False) -> FockState:
    cfg = state.config
    gate = shift_matrix(bosonic)
    npairs = cfg.L if cfg.boundary is Boundary.PERIODIC else cfg.L - 1
    amps = state.amplitudes
    for j in range(npairs):
        amps = _apply_pair_gate(amps, 2 * j + 1, (2 * j + 2) % (2 * cfg.L), gate)
    return FockState(cfg, amps)


def step(state: FockState, bosonic: bool = False) -> FockState:
    """One automaton step: shift, then coin."""
    return apply_coin(apply_shift(state, bosonic), bosonic)


def evolve(state: FockState, nsteps: int, bosonic: bool = False) -> FockState:
    if nsteps < 0:
        raise ValueError("nsteps must be >= 0")
    for _ in range(nsteps):
        state = step(state, bosonic)
    return state


def light_cone_check(
    config: LatticeConfig, nsteps: int, initial: FockState | None = None
) -> float:
    """Total probability found outside the radius-nsteps light cone.

    Evolves a single excitation at the central cell (or the given initial
    state) nsteps steps and sums the probability on basis words that occupy
    any cell farther than nsteps from the initial support. Strict locality
    means the return value is exactly zero.
    """
    if nsteps < 1:
        raise ValueError("nsteps must be >= 1")
    from .fermion import LadderOp, OpKind, apply_ladder
    from .lattice import Eps, vacuum

    if initial is None:
        origin = config.L // 2
        initial = apply_ladder(vacuum(config), LadderOp(OpKind.CREATE, origin, Eps.PLUS))
    support = set()
    for w in initial.amplitudes:
        ww = w
        while ww:
            b = (ww & -ww).bit_length() - 1
            support.add(b // 2)
            ww &= ww - 1
    if not support:
        return 0.0

    def dist(j: int, j0: int) -> int:
        d = abs(j - j0)
        if config.boundary is Boundary.PERIODIC:
            d = min(d, config.L - d)
        return d

    allowed = {
        j for j in range(config.L) if any(dist(j, j0) <= nsteps for j0 in support)
    }
    final = evolve(initial, nsteps)
    leak = 0.0
    for w, a in final.amplitudes.items():
        ww = w
        while ww:
            b = (ww & -ww).bit_length() - 1
            if b // 2 not in allowed:
                leak += abs(a) ** 2
                break
            ww &= ww - 1
    return leak
