"""Finite-lattice Fock space: basis-state encoding and sparse state vectors.

Sites are indexed by (cell, eps) with eps in {Minus, Plus}. A basis state is a
2L-bit integer word: bit 2j holds the occupation of (cell j, Minus), bit 2j+1
holds (cell j, Plus). Ascending bit index is the canonical site order (cell
ascending, Minus before Plus at equal cell), which is also the order used for
fermionic signs.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field


PRUNE_THRESHOLD = 1e-14

# Python ints are unbounded, so the word width is a sanity cap rather than a
# hardware limit; 64 cells covers every supported workload.
MAX_CELLS = 64


class Boundary(enum.Enum):
    PERIODIC = "periodic"
    OPEN = "open"


class Eps(enum.IntEnum):
    MINUS = 0
    PLUS = 1


class LatticeError(Exception):
    pass


class DuplicateSiteError(LatticeError):
    pass


class OutOfRangeError(LatticeError):
    pass


class ConfigMismatchError(LatticeError):
    pass


@dataclass(frozen=True)
class LatticeConfig:
    """Lattice size and physical discretization parameters."""

    L: int
    dx: float = 1.0
    dt: float = 1.0
    theta: float = 0.0
    boundary: Boundary = Boundary.PERIODIC

    def __post_init__(self):
        if self.L < 2:
            raise OutOfRangeError(f"L must be >= 2, got {self.L}")
        if self.L > MAX_CELLS:
            raise OutOfRangeError(f"L must be <= {MAX_CELLS}, got {self.L}")
        if self.dx <= 0 or self.dt <= 0:
            raise OutOfRangeError("dx and dt must be positive")

    @property
    def n_sites(self) -> int:
        return 2 * self.L

    @property
    def c(self) -> float:
        """Lattice speed of light dx/dt."""
        return self.dx / self.dt

    @property
    def mass(self) -> float:
        """Particle mass theta*dt/dx^2 (hbar = 1)."""
        return self.theta * self.dt / self.dx**2


def bit_index(cell: int, eps: Eps) -> int:
    return 2 * cell + int(eps)


def site_of_bit(bit: int) -> tuple[int, Eps]:
    return bit // 2, Eps(bit % 2)


def particle_count(bits: int) -> int:
    return bits.bit_count()


def basis_from_particles(config: LatticeConfig, particles) -> int:
    """Pack an unordered list of (cell, eps) sites into a basis word.

    Raises DuplicateSiteError on a repeated site and OutOfRangeError for a
    cell outside [0, L).
    """
    word = 0
    for cell, eps in particles:
        if not 0 <= cell < config.L:
            raise OutOfRangeError(f"cell {cell} outside [0, {config.L})")
        b = bit_index(cell, Eps(eps))
        if word & (1 << b):
            raise DuplicateSiteError(f"site (cell={cell}, eps={Eps(eps).name}) repeated")
        word |= 1 << b
    return word


def particles_from_basis(word: int) -> list[tuple[int, Eps]]:
    """Unpack a basis word into its canonically ordered particle list."""
    out = []
    while word:
        b = (word & -word).bit_length() - 1
        out.append(site_of_bit(b))
        word &= word - 1
    return out


@dataclass
class FockState:
    """Sparse map from basis word to complex amplitude.

    Operations return new states; instances are not mutated once built, so
    states may be shared freely across threads.
    """

    config: LatticeConfig
    amplitudes: dict[int, complex] = field(default_factory=dict)

    def prune(self) -> "FockState":
        self.amplitudes = {
            w: a for w, a in self.amplitudes.items() if abs(a) > PRUNE_THRESHOLD
        }
        return self

    def norm(self) -> float:
        return math.sqrt(sum(abs(a) ** 2 for a in self.amplitudes.values()))

    def normalized(self) -> "FockState":
        n = self.norm()
        if n == 0.0:
            raise LatticeError("cannot normalize the zero state")
        return FockState(self.config, {w: a / n for w, a in self.amplitudes.items()})

    def scaled(self, factor: complex) -> "FockState":
        return FockState(
            self.config, {w: factor * a for w, a in self.amplitudes.items()}
        ).prune()

    def add(self, other: "FockState") -> "FockState":
        _check_config(self, other)
        out = dict(self.amplitudes)
        for w, a in other.amplitudes.items():
            out[w] = out.get(w, 0.0) + a
        return FockState(self.config, out).prune()

    def amplitude(self, word: int) -> complex:
        return self.amplitudes.get(word, 0.0 + 0.0j)

    def is_zero(self) -> bool:
        return not self.amplitudes

    def to_json_obj(self) -> dict:
        n = self.config.n_sites
        entries = [
            {
                "bits": format(w, f"0{n}b")[::-1],  # site (0,-) printed first
                "re": a.real,
                "im": a.imag,
            }
            for w, a in sorted(self.amplitudes.items())
        ]
        return {"L": self.config.L, "amplitudes": entries}

    def dump(self) -> str:
        return json.dumps(self.to_json_obj(), sort_keys=True)

    @classmethod
    def from_json_obj(cls, obj: dict, config: LatticeConfig) -> "FockState":
        if obj["L"] != config.L:
            raise ConfigMismatchError(f"dump L={obj['L']} but config L={config.L}")
        amps = {}
        for e in obj["amplitudes"]:
            word = int(e["bits"][::-1], 2)
            amps[word] = complex(e["re"], e["im"])
        return cls(config, amps).prune()


def _check_config(a: FockState, b: FockState) -> None:
    if a.config != b.config:
        raise ConfigMismatchError("states built over different lattice configs")


def vacuum(config: LatticeConfig) -> FockState:
    return FockState(config, {0: 1.0 + 0.0j})


def basis_state(config: LatticeConfig, particles) -> FockState:
    return FockState(config, {basis_from_particles(config, particles): 1.0 + 0.0j})


def inner_product(a: FockState, b: FockState) -> complex:
    """<a|b> over shared basis words."""
    _check_config(a, b)
    small, big = (a.amplitudes, b.amplitudes)
    if len(big) < len(small):
        return sum(
            small[w].conjugate() * big[w] for w in big if w in small
        )
    return sum(small[w].conjugate() * big[w] for w in small if w in big)


def sector_project(state: FockState, n: int) -> FockState:
    if n < 0:
        raise OutOfRangeError("particle number must be >= 0")
    return FockState(
        state.config,
        {w: a for w, a in state.amplitudes.items() if w.bit_count() == n},
    )
