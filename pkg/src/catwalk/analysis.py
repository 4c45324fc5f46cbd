"""Measurement and diagnostics for walk states.

Covers probability distributions, the reduced coin matrix and its
entropy, Schmidt extraction of the two cat branches, packet widths, coin
projection with momentum-space fringe analysis, bimodality metrics, and
the time-reversal revival protocols.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.signal import find_peaks

from .lattice import (
    DensityOperator,
    LatticeConfig,
    PureState,
    StateError,
    fidelity,
    fidelity_with_density,
)
from .walk import (
    SIGMA_Y,
    Schedule,
    _check_unitary,
    evolve,
    reversal_pair,
)
from .channels import ChannelSpec

DEGENERACY_GAP = 0.05
PROJECTION_NORM_TOL = 1e-12

REVERSER_EXACT = "exact"
REVERSER_SIGMA_Y = "sigma_y"


def position_distribution(state) -> np.ndarray:
    """P(x) = sum_c |psi(x, c)|^2, or the walker diagonal of rho."""
    if isinstance(state, DensityOperator):
        n = state.lattice.n_sites
        idx = np.arange(n)
        diag = state.matrix[idx, :, idx, :]
        return np.real(diag[:, 0, 0] + diag[:, 1, 1])
    return np.sum(np.abs(state.amplitudes) ** 2, axis=1)


def reduced_coin(state) -> np.ndarray:
    """2x2 reduced density matrix of the coin (partial trace over walker)."""
    if isinstance(state, DensityOperator):
        return np.einsum("xcxd->cd", state.matrix)
    amp = state.amplitudes
    return np.einsum("xc,xd->cd", amp, amp.conj())


def entanglement_entropy(state) -> float:
    """Von Neumann entropy of the reduced coin, in bits."""
    lams = np.linalg.eigvalsh(reduced_coin(state))
    lams = np.clip(lams.real, 0.0, 1.0)
    nz = lams[lams > 1e-15]
    return float(-np.sum(nz * np.log2(nz)))


@dataclass(frozen=True)
class SchmidtDecomposition:
    """Biorthogonal split psi = sqrt(l1) X (x) phi + sqrt(l2) Xp (x) phi_perp.

    ``x_state`` is the branch with the larger mean position.  When the two
    weights are nearly equal the coin eigenbasis is arbitrary; the gauge is
    then fixed by diagonalizing the position-weighted coin matrix, which
    separates the left- and right-moving branches.
    """

    weights: tuple[float, float]
    phi: np.ndarray
    phi_perp: np.ndarray
    x_state: np.ndarray
    x_perp_state: np.ndarray
    degenerate: bool


def _lead_phase(v: np.ndarray) -> complex:
    for comp in v:
        if abs(comp) > 1e-12:
            return abs(comp) / comp
    return 1.0


def schmidt_components(state: PureState) -> SchmidtDecomposition:
    """Extract the two Schmidt branches of a walker-coin pure state."""
    amp = state.amplitudes
    sites = state.lattice.sites
    rc = reduced_coin(state)
    vals, vecs = np.linalg.eigh(rc)
    vals = np.clip(vals.real, 0.0, 1.0)
    degenerate = float(vals[1] - vals[0]) < DEGENERACY_GAP
    if degenerate:
        # Weight the coin matrix by position to break the tie along the
        # axis that actually distinguishes the branches.
        a = np.einsum("x,xc,xd->cd", sites.astype(float), amp, amp.conj())
        _, vecs = np.linalg.eigh(a)

    basis = []
    for i in range(2):
        v = vecs[:, i].astype(complex)
        basis.append(v * _lead_phase(v))

    branches = []
    for phi in basis:
        walker = amp @ phi.conj()  # <phi|Psi>(x), unnormalized
        w = float(np.sum(np.abs(walker) ** 2))
        mean = float(np.sum(sites * np.abs(walker) ** 2) / w) if w > 1e-15 else 0.0
        xs = walker / np.sqrt(w) if w > 1e-15 else walker
        branches.append((w, mean, phi, xs))

    if degenerate:
        branches.sort(key=lambda b: -b[1])
    else:
        branches.sort(key=lambda b: -b[0])
    (w1, _, phi1, x1), (w2, _, phi2, x2) = branches
    return SchmidtDecomposition((w1, w2), phi1, phi2, x1, x2, degenerate)


def packet_width(prob: np.ndarray, sites: np.ndarray | None = None) -> float:
    """Second-central-moment width of a distribution over sites."""
    prob = np.asarray(prob, dtype=float)
    if sites is None:
        n = prob.shape[0]
        sites = np.arange(-(n // 2), n - n // 2)
    total = prob.sum()
    mu = np.sum(sites * prob) / total
    return float(np.sqrt(np.sum(prob * (sites - mu) ** 2) / total))


def component_widths(state: PureState) -> tuple[float, float]:
    """Widths of the two Schmidt branches' own distributions."""
    dec = schmidt_components(state)
    sites = state.lattice.sites
    return (
        packet_width(np.abs(dec.x_state) ** 2, sites),
        packet_width(np.abs(dec.x_perp_state) ** 2, sites),
    )


def project_coin(state: PureState, chi_prime) -> tuple[np.ndarray, float]:
    """Project on a coin state; returns (normalized walker state, success).

    Success probability is the squared norm of <chi'|Psi> before
    normalization.
    """
    v = chi_prime.as_array() if hasattr(chi_prime, "as_array") else np.asarray(chi_prime, dtype=complex)
    walker = state.amplitudes @ v.conj()
    success = float(np.sum(np.abs(walker) ** 2))
    if success < PROJECTION_NORM_TOL:
        raise StateError(f"projection norm {success:.3e} below threshold")
    return walker / np.sqrt(success), success


@dataclass(frozen=True)
class FringeResult:
    momenta: np.ndarray
    distribution: np.ndarray
    spacing: float | None
    visibility: float


def momentum_fringes(
    lattice: LatticeConfig, walker: np.ndarray, oversample: int = 8
) -> FringeResult:
    """Momentum distribution of a walker-only state with fringe metrics.

    The state is zero-padded by ``oversample`` before the DFT so that
    narrow fringes are resolved.  Fringe spacing comes from the first
    off-zero peak of the distribution's autocorrelation; visibility is the
    extremal contrast inside the envelope's half-maximum region.  A
    distribution with no interior oscillation reports spacing None and
    visibility 0.
    """
    walker = np.asarray(walker, dtype=complex)
    m = oversample * lattice.n_sites
    buf = np.zeros(m, dtype=complex)
    buf[lattice.sites % m] = walker
    fk = np.fft.fftshift(np.fft.ifft(buf)) * m
    prob = np.abs(fk) ** 2
    prob = prob / prob.sum()
    dk = 2.0 * np.pi / m
    momenta = dk * np.arange(-(m // 2), m - m // 2)

    # envelope through the local maxima, then its half-max region
    peak_idx, _ = find_peaks(prob)
    if peak_idx.size >= 2:
        envelope = np.interp(np.arange(m), peak_idx, prob[peak_idx])
    else:
        envelope = prob
    half = envelope >= 0.5 * envelope.max()
    region = np.flatnonzero(half)

    inner = prob[region[0] : region[-1] + 1]
    maxima, _ = find_peaks(inner)
    minima, _ = find_peaks(-inner)
    if maxima.size < 2 or minima.size < 1:
        return FringeResult(momenta, prob, None, 0.0)
    hi = float(np.mean(inner[maxima]))
    lo = float(np.mean(inner[minima]))
    visibility = (hi - lo) / (hi + lo)

    ac = np.correlate(prob, prob, mode="full")[prob.size - 1 :]
    ac_peaks, _ = find_peaks(ac)
    spacing = float(ac_peaks[0] * dk) if ac_peaks.size else None
    return FringeResult(momenta, prob, spacing, float(visibility))


@dataclass(frozen=True)
class CatMetrics:
    left_peak: int
    right_peak: int
    left_mass: float
    right_mass: float
    residual: float
    separation: int
    mass_balance: float
    bimodal: bool


def cat_metrics(prob: np.ndarray, sites: np.ndarray | None = None) -> CatMetrics:
    """Bimodality metrics of a distribution over sites.

    Peaks are the two highest local maxima at least 5 sites apart
    (leftmost wins an exact height tie); residual is the mass in the
    central 20% of the inter-peak interval; masses are split at the
    midpoint and balance is their min/max ratio.
    """
    prob = np.asarray(prob, dtype=float)
    if sites is None:
        n = prob.shape[0]
        sites = np.arange(-(n // 2), n - n // 2)
    idx, _ = find_peaks(prob, distance=5)
    if idx.size < 2:
        peak = int(sites[int(np.argmax(prob))])
        return CatMetrics(peak, peak, 1.0, 0.0, 0.0, 0, 0.0, False)
    order = sorted(idx, key=lambda i: (-prob[i], i))
    a, b = sorted(order[:2])
    left, right = int(sites[a]), int(sites[b])
    span = right - left
    center = 0.5 * (left + right)
    window = np.abs(sites - center) <= 0.1 * span
    residual = float(prob[window].sum())
    mid = center
    left_mass = float(prob[sites <= mid].sum())
    right_mass = float(prob[sites > mid].sum())
    balance = min(left_mass, right_mass) / max(left_mass, right_mass)
    return CatMetrics(left, right, left_mass, right_mass, residual, span, balance, True)


@dataclass(frozen=True)
class RevivalResult:
    r: float
    trace: np.ndarray  # fidelity to the initial state at steps 0..2T


def _reverser_gates(theta: float, reverser: str) -> tuple[np.ndarray, np.ndarray]:
    if reverser == REVERSER_EXACT:
        return reversal_pair(theta)
    if reverser == REVERSER_SIGMA_Y:
        return SIGMA_Y, SIGMA_Y
    raise ValueError(f"unknown reverser {reverser!r}")


def revival_protocol(
    initial: PureState,
    theta: float,
    T: int,
    channel: ChannelSpec | None = None,
    reverser: str = REVERSER_EXACT,
) -> RevivalResult:
    """Evolve T steps, reverse, evolve T more, reverse, compare to start.

    With the default gate pair the closed-system revival is exact; the
    plain ``sigma_y`` variant leaves a residual error of order one over
    the squared packet width.  A channel switches to density-operator
    evolution with the channel applied after every step.
    """
    gate, gate_back = _reverser_gates(theta, reverser)
    if channel is None:
        sched = Schedule(
            2 * T,
            theta,
            coin_gate_insertions=((T, gate), (2 * T, gate_back)),
        )
        result = evolve(initial, sched, snapshot_times=range(2 * T + 1))
        trace = np.array(
            [fidelity(initial, result.snapshots[s]) for s in range(2 * T + 1)]
        )
        return RevivalResult(float(trace[-1]), trace)

    gate = _check_unitary(gate)
    gate_back = _check_unitary(gate_back)
    from .channels import _channel_mat_fn
    from .walk import _conj_coin_mat, _shift_mat, coin_operator

    channel_fn = _channel_mat_fn(channel)
    coin = coin_operator(theta)
    amp = initial.amplitudes
    mat = np.einsum("xc,yd->xcyd", amp, amp.conj())
    trace = np.empty(2 * T + 1)
    trace[0] = 1.0
    for s in range(1, 2 * T + 1):
        mat = _shift_mat(_conj_coin_mat(mat, coin))
        mat = channel_fn(mat)
        if s == T:
            mat = _conj_coin_mat(mat, gate)
        if s == 2 * T:
            mat = _conj_coin_mat(mat, gate_back)
        trace[s] = np.einsum("xc,xcyd,yd->", amp.conj(), mat, amp).real
    # final validation catches any numerical drift in the open run
    final = DensityOperator(initial.lattice, mat)
    return RevivalResult(float(fidelity_with_density(initial, final)), trace)


def hold_recurrence(
    theta: float,
    p: int,
    steps: int | None = None,
    n_sites: int = 24,
    initial: PureState | None = None,
) -> float:
    """Fidelity after ``steps`` generalized steps with phase 2*pi/p.

    Defaults to the nominal recurrence time, p steps for even p and 2p for
    odd p, on a small lattice with a localized start.
    """
    from .lattice import COIN_SYMMETRIC, localized_state, make_lattice
    from .walk import step_generalized

    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if steps is None:
        steps = p if p % 2 == 0 else 2 * p
    if initial is None:
        initial = localized_state(make_lattice(n_sites), 0, COIN_SYMMETRIC)
    phi = 2.0 * np.pi / p
    state = initial
    for _ in range(steps):
        state = step_generalized(state, theta, phi)
    return fidelity(initial, state)


def control_protocol(
    initial: PureState,
    theta: float,
    t: int,
    p: int,
    n: int,
    reverser: str = REVERSER_EXACT,
) -> float:
    """Hold-and-release revival: t plain steps, 2np held steps with phase
    2*pi/p, reversal gate, t plain steps, closing gate; returns fidelity
    to the start.

    With n=0 this is exactly the revival protocol at T=t.  With the
    default gate pair the plain legs cancel exactly, so the returned
    value isolates the recurrence quality of the held segment, which
    approaches 1 as p grows (though not monotonically: the per-cycle
    leakage has a resonance structure in p).
    """
    if p < 1:
        raise ValueError(f"p must be >= 1, got {p}")
    if n < 0:
        raise ValueError(f"n must be >= 0, got {n}")
    gate, gate_back = _reverser_gates(theta, reverser)
    hold = 2 * n * p
    total = 2 * t + hold
    sched = Schedule(
        total,
        theta,
        fm_windows=((t, t + hold, 2.0 * np.pi / p),) if n > 0 else (),
        coin_gate_insertions=((t + hold, gate), (total, gate_back)),
    )
    result = evolve(initial, sched)
    return fidelity(initial, result.final)
