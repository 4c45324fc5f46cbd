"""Composite walker-coin state space on a finite periodic 1D lattice.

Sites are labeled x in {-N/2, ..., N/2 - 1} for even N, and the momentum
grid holds the N values k_j = 2*pi*j/N folded into [-pi, pi).  Pure states
carry a (N, 2) complex amplitude array, index order (site, coin level),
with coin level 0 = up and 1 = down.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

NORM_TOL = 1e-10
HERMITICITY_TOL = 1e-10
TRACE_TOL = 1e-10

POSITION = "position"
MOMENTUM = "momentum"


class LatticeError(ValueError):
    """Invalid lattice construction or mismatched lattices."""


class StateError(ValueError):
    """Invalid state construction (bad normalization, out-of-range site, ...)."""


@dataclass(frozen=True)
class LatticeConfig:
    """Finite periodic lattice with centered site labels.

    ``sites`` runs -N/2 .. N/2-1; ``momenta`` are the matching N discrete
    momenta sorted ascending in [-pi, pi).
    """

    n_sites: int

    def __post_init__(self):
        n = self.n_sites
        if not isinstance(n, (int, np.integer)):
            raise LatticeError(f"N must be an integer, got {type(n).__name__}")
        if n < 4 or n % 2 != 0:
            raise LatticeError(f"N must be even and >= 4, got {n}")

    @property
    def sites(self) -> np.ndarray:
        return np.arange(-self.n_sites // 2, self.n_sites // 2)

    @property
    def momenta(self) -> np.ndarray:
        n = self.n_sites
        return 2.0 * np.pi * np.arange(-n // 2, n // 2) / n


def make_lattice(n_sites: int) -> LatticeConfig:
    """Build a lattice of ``n_sites`` sites (even, >= 4).

    Recommended sizing for a run of ``t`` steps from a Gaussian of width
    ``sigma``: N >= 2*t + 8*sigma, rounded up to even, so the wavepacket
    never wraps around the periodic boundary.
    """
    return LatticeConfig(int(n_sites))


def recommended_size(steps: int, sigma: float = 0.0) -> int:
    """Smallest even N satisfying the N >= 2*steps + 8*sigma sizing rule."""
    n = int(np.ceil(2 * steps + 8 * sigma))
    n = max(n, 4)
    return n + (n % 2)


@dataclass(frozen=True)
class CoinState:
    """Normalized two-component coin state (up, down)."""

    up: complex
    down: complex

    def __post_init__(self):
        norm = abs(self.up) ** 2 + abs(self.down) ** 2
        if abs(norm - 1.0) > 1e-12:
            raise StateError(f"coin state not normalized: |a|^2+|b|^2 = {norm!r}")

    @classmethod
    def from_vector(cls, vec) -> "CoinState":
        v = np.asarray(vec, dtype=complex)
        n = np.linalg.norm(v)
        if n == 0:
            raise StateError("zero coin vector")
        v = v / n
        return cls(complex(v[0]), complex(v[1]))

    def as_array(self) -> np.ndarray:
        return np.array([self.up, self.down], dtype=complex)


COIN_UP = CoinState(1.0, 0.0)
COIN_DOWN = CoinState(0.0, 1.0)
# Default delocalized-run coin: the symmetric state for theta = pi/4.
COIN_SYMMETRIC = CoinState(1.0 / np.sqrt(2.0), 1j / np.sqrt(2.0))


@dataclass(frozen=True)
class PureState:
    """Walker-coin wavefunction, amplitudes shaped (N, 2), unit L2 norm."""

    lattice: LatticeConfig
    amplitudes: np.ndarray = field(repr=False)
    basis: str = POSITION

    def __post_init__(self):
        amp = np.asarray(self.amplitudes, dtype=complex)
        if amp.shape != (self.lattice.n_sites, 2):
            raise StateError(
                f"amplitude shape {amp.shape} does not match lattice "
                f"({self.lattice.n_sites}, 2)"
            )
        if self.basis not in (POSITION, MOMENTUM):
            raise StateError(f"unknown basis tag {self.basis!r}")
        norm = np.linalg.norm(amp)
        if abs(norm - 1.0) > NORM_TOL:
            raise StateError(f"state norm {norm!r} deviates from 1")
        object.__setattr__(self, "amplitudes", amp)
        self.amplitudes.setflags(write=False)

    def with_amplitudes(self, amp: np.ndarray, basis: str | None = None) -> "PureState":
        return PureState(self.lattice, amp, basis or self.basis)

    def norm(self) -> float:
        return float(np.linalg.norm(self.amplitudes))


@dataclass(frozen=True)
class DensityOperator:
    """Density matrix on the composite space, stored as (N, 2, N, 2)."""

    lattice: LatticeConfig
    matrix: np.ndarray = field(repr=False)

    def __post_init__(self):
        n = self.lattice.n_sites
        mat = np.asarray(self.matrix, dtype=complex)
        if mat.shape == (2 * n, 2 * n):
            mat = mat.reshape(n, 2, n, 2)
        if mat.shape != (n, 2, n, 2):
            raise StateError(f"density matrix shape {mat.shape} invalid for N={n}")
        flat = mat.reshape(2 * n, 2 * n)
        if np.abs(flat - flat.conj().T).max() > HERMITICITY_TOL:
            raise StateError("density matrix is not Hermitian")
        tr = np.trace(flat).real
        if abs(tr - 1.0) > TRACE_TOL:
            raise StateError(f"density matrix trace {tr!r} deviates from 1")
        object.__setattr__(self, "matrix", mat)
        self.matrix.setflags(write=False)

    @property
    def as_2d(self) -> np.ndarray:
        n = self.lattice.n_sites
        return self.matrix.reshape(2 * n, 2 * n)

    def min_eigenvalue(self) -> float:
        """Smallest eigenvalue; an O(N^3) on-demand positivity check."""
        return float(np.linalg.eigvalsh(self.as_2d)[0])

    @classmethod
    def from_pure(cls, psi: PureState) -> "DensityOperator":
        amp = psi.amplitudes
        mat = np.einsum("xc,yd->xcyd", amp, amp.conj())
        return cls(psi.lattice, mat)


def _site_index(lattice: LatticeConfig, x0: int) -> int:
    n = lattice.n_sites
    if not (-n // 2 <= x0 <= n // 2 - 1):
        raise StateError(f"site {x0} outside lattice range [{-n//2}, {n//2 - 1}]")
    return x0 + n // 2


def localized_state(lattice: LatticeConfig, x0: int, coin: CoinState) -> PureState:
    """Walker localized at site ``x0`` with the given coin state."""
    amp = np.zeros((lattice.n_sites, 2), dtype=complex)
    amp[_site_index(lattice, x0)] = coin.as_array()
    return PureState(lattice, amp, POSITION)


def gaussian_position_state(
    lattice: LatticeConfig,
    sigma: float,
    coin: CoinState,
    x0: float = 0.0,
    k0: float = 0.0,
) -> PureState:
    """Gaussian wavepacket exp(-(x-x0)^2/(4 sigma^2)) with mean momentum k0.

    The plane-wave factor is exp(-i k0 x), which centers the packet at +k0
    under this module's DFT convention.  The lattice
    must be large enough that the truncated tail mass is below 1e-10
    (the 8*sigma rule).
    """
    if sigma <= 0:
        raise StateError(f"sigma must be positive, got {sigma}")
    n = lattice.n_sites
    if n < 8 * sigma:
        raise StateError(
            f"lattice N={n} too small for sigma={sigma}; need N >= {8 * sigma:.0f}"
        )
    x = lattice.sites
    env = np.exp(-((x - x0) ** 2) / (4.0 * sigma**2)) * np.exp(-1j * k0 * x)
    amp = env[:, None] * coin.as_array()[None, :]
    amp /= np.linalg.norm(amp)
    return PureState(lattice, amp, POSITION)


def gaussian_momentum_state(
    lattice: LatticeConfig,
    delta: float,
    coin: CoinState,
    k0: float = 0.0,
) -> PureState:
    """Gaussian in momentum, exp(-(k-k0)^2/(4 delta^2)), returned momentum-basis.

    The position-space width of the resulting packet is approximately
    1/(2*delta).
    """
    if delta <= 0:
        raise StateError(f"delta must be positive, got {delta}")
    k = lattice.momenta
    env = np.exp(-((k - k0) ** 2) / (4.0 * delta**2)).astype(complex)
    amp = env[:, None] * coin.as_array()[None, :]
    amp /= np.linalg.norm(amp)
    return PureState(lattice, amp, MOMENTUM)


def _dft_matrix_free_to_momentum(amp: np.ndarray) -> np.ndarray:
    # psi~(k_j) = N^{-1/2} sum_x exp(i k_j x) psi(x); rows ordered by
    # ascending k.  Row x=0 sits at array index N/2, hence the shifts.
    n = amp.shape[0]
    out = np.fft.ifft(np.fft.ifftshift(amp, axes=0), axis=0) * np.sqrt(n)
    return np.fft.fftshift(out, axes=0)


def _dft_matrix_free_to_position(amp: np.ndarray) -> np.ndarray:
    n = amp.shape[0]
    out = np.fft.fft(np.fft.ifftshift(amp, axes=0), axis=0) / np.sqrt(n)
    return np.fft.fftshift(out, axes=0)


def to_momentum(state: PureState) -> PureState:
    """Unitary DFT to the momentum basis, |x> = N^{-1/2} sum_k e^{ikx} |k>."""
    if state.basis == MOMENTUM:
        return state
    return state.with_amplitudes(_dft_matrix_free_to_momentum(state.amplitudes), MOMENTUM)


def to_position(state: PureState) -> PureState:
    """Inverse of :func:`to_momentum`."""
    if state.basis == POSITION:
        return state
    return state.with_amplitudes(_dft_matrix_free_to_position(state.amplitudes), POSITION)


def walker_to_momentum(lattice: LatticeConfig, walker: np.ndarray) -> np.ndarray:
    """Same DFT for a walker-only amplitude vector of length N."""
    n = lattice.n_sites
    out = np.fft.ifft(np.fft.ifftshift(walker)) * np.sqrt(n)
    return np.fft.fftshift(out)


def _check_compatible(a: PureState, b) -> None:
    if a.lattice.n_sites != b.lattice.n_sites:
        raise LatticeError(
            f"mismatched lattices: N={a.lattice.n_sites} vs N={b.lattice.n_sites}"
        )


def fidelity(a: PureState, b: PureState) -> float:
    """|<a|b>|^2 for two pure states on the same lattice and basis."""
    _check_compatible(a, b)
    if a.basis != b.basis:
        raise StateError(f"basis mismatch: {a.basis} vs {b.basis}")
    return float(abs(np.vdot(a.amplitudes, b.amplitudes)) ** 2)


def fidelity_with_density(psi: PureState, rho: DensityOperator) -> float:
    """<psi| rho |psi> for a pure state against a density operator."""
    _check_compatible(psi, rho)
    amp = psi.amplitudes
    val = np.einsum("xc,xcyd,yd->", amp.conj(), rho.matrix, amp)
    return float(val.real)
