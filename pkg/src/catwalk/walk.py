"""Walk operators: coin flip, conditional shift, momentum-shift phase, and
scheduled evolution for pure states and density operators.

One walk step is coin -> shift (-> momentum-shift phase when scheduled),
i.e. the generalized propagator multiplies the plain step on the left.
Time is counted in completed steps; a coin-gate insertion at time ``s``
acts after ``s`` steps, and an F_m window ``(start, end, phi)`` applies the
phase during steps ``start+1 .. end``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from .lattice import (
    POSITION,
    DensityOperator,
    PureState,
    StateError,
)

UNITARITY_TOL = 1e-10

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)


class ScheduleError(ValueError):
    """Schedule bounds violation or malformed schedule."""


def coin_operator(theta: float) -> np.ndarray:
    """Coin flip [[cos t, sin t], [sin t, -cos t]]; unitary and Hermitian."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c, s], [s, -c]], dtype=complex)


def reversal_pair(theta: float) -> tuple[np.ndarray, np.ndarray]:
    """Coin gates (R, R†) with R = C(theta) sigma_y that reverse the walk.

    Conjugation by R maps the step propagator to minus its inverse, so the
    sandwich ``R† Z^T R Z^T`` is the identity up to sign: the walker
    retraces its steps exactly.  Plain sigma_y reverses only approximately
    (error of order delta^2 in the momentum width of the packet).
    """
    r = coin_operator(theta) @ SIGMA_Y
    return r, r.conj().T


def _check_unitary(u: np.ndarray) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    if u.shape != (2, 2):
        raise StateError(f"coin matrix must be 2x2, got {u.shape}")
    if np.abs(u @ u.conj().T - np.eye(2)).max() > UNITARITY_TOL:
        raise StateError("coin matrix is not unitary")
    return u


def _apply_coin_amp(amp: np.ndarray, u: np.ndarray) -> np.ndarray:
    return amp @ u.T


def _apply_shift_amp(amp: np.ndarray) -> np.ndarray:
    out = np.empty_like(amp)
    out[:, 0] = np.roll(amp[:, 0], 1)
    out[:, 1] = np.roll(amp[:, 1], -1)
    return out


def _fm_phase(sites: np.ndarray, phi: float) -> np.ndarray:
    return np.exp(1j * phi * sites)


def _require_position(state: PureState) -> None:
    if state.basis != POSITION:
        raise StateError("operation requires a position-basis state")


def apply_coin(state: PureState, u: np.ndarray) -> PureState:
    """Apply a 2x2 unitary on the coin at every site."""
    _require_position(state)
    u = _check_unitary(u)
    return state.with_amplitudes(_apply_coin_amp(state.amplitudes, u))


def apply_shift(state: PureState) -> PureState:
    """Conditional shift: up-component x -> x+1, down-component x -> x-1."""
    _require_position(state)
    return state.with_amplitudes(_apply_shift_amp(state.amplitudes))


def apply_fm(state: PureState, phi: float) -> PureState:
    """Site-linear phase e^{i phi x} on both coin levels."""
    _require_position(state)
    ph = _fm_phase(state.lattice.sites, phi)
    return state.with_amplitudes(state.amplitudes * ph[:, None])


def step(state: PureState, theta: float) -> PureState:
    """One plain walk step: coin flip then conditional shift."""
    _require_position(state)
    amp = _apply_shift_amp(_apply_coin_amp(state.amplitudes, coin_operator(theta)))
    return state.with_amplitudes(amp)


def step_generalized(state: PureState, theta: float, phi: float) -> PureState:
    """One generalized step: coin, shift, then the momentum-shift phase."""
    _require_position(state)
    amp = _apply_shift_amp(_apply_coin_amp(state.amplitudes, coin_operator(theta)))
    amp = amp * _fm_phase(state.lattice.sites, phi)[:, None]
    return state.with_amplitudes(amp)


@dataclass(frozen=True)
class Schedule:
    """Step-indexed plan for an evolution run.

    ``fm_windows`` holds (start, end, phi) triples: the phase is applied
    during steps start+1 .. end.  ``coin_gate_insertions`` holds
    (time, 2x2 unitary) pairs applied after ``time`` completed steps.
    ``channel`` is an optional ChannelSpec consumed by the open-system
    runner only.
    """

    total_steps: int
    theta: float
    fm_windows: Sequence[tuple[int, int, float]] = field(default_factory=tuple)
    coin_gate_insertions: Sequence[tuple[int, np.ndarray]] = field(default_factory=tuple)
    channel: Any = None

    def __post_init__(self):
        if self.total_steps < 0:
            raise ScheduleError(f"total_steps must be >= 0, got {self.total_steps}")
        prev_end = None
        for start, end, _phi in sorted(self.fm_windows):
            if not (0 <= start <= end <= self.total_steps):
                raise ScheduleError(
                    f"window ({start}, {end}) outside [0, {self.total_steps}]"
                )
            if prev_end is not None and start < prev_end:
                raise ScheduleError("F_m windows overlap")
            prev_end = end
        for t, _u in self.coin_gate_insertions:
            if not (0 <= t <= self.total_steps):
                raise ScheduleError(
                    f"insertion time {t} outside [0, {self.total_steps}]"
                )

    def phi_at(self, s: int) -> float | None:
        """Phase for step ``s`` (1-based) if it falls in an F_m window."""
        for start, end, phi in self.fm_windows:
            if start < s <= end:
                return phi
        return None

    def insertions_at(self, t: int) -> list[np.ndarray]:
        return [u for ti, u in self.coin_gate_insertions if ti == t]


@dataclass(frozen=True)
class EvolutionResult:
    final: PureState
    snapshots: dict[int, PureState]


def evolve(
    state: PureState,
    schedule: Schedule,
    snapshot_times: Sequence[int] = (),
) -> EvolutionResult:
    """Run a schedule on a pure state.

    Snapshots are taken after the complete step (and after any coin-gate
    insertion at that time).  Schedules carrying a noise channel must use
    the open-system runner instead.
    """
    _require_position(state)
    if schedule.channel is not None:
        raise ScheduleError("schedule has a channel; use channels.evolve_open")
    wanted = set(snapshot_times)
    for t in wanted:
        if not (0 <= t <= schedule.total_steps):
            raise ScheduleError(f"snapshot time {t} outside run")
    coin = coin_operator(schedule.theta)
    sites = state.lattice.sites
    amp = state.amplitudes.copy()
    snaps: dict[int, PureState] = {}

    def checkpoint(t: int) -> None:
        for u in schedule.insertions_at(t):
            np.copyto(amp, _apply_coin_amp(amp, _check_unitary(u)))
        if t in wanted:
            snaps[t] = state.with_amplitudes(amp.copy())

    checkpoint(0)
    for s in range(1, schedule.total_steps + 1):
        amp = _apply_shift_amp(_apply_coin_amp(amp, coin))
        phi = schedule.phi_at(s)
        if phi is not None:
            amp = amp * _fm_phase(sites, phi)[:, None]
        checkpoint(s)
    return EvolutionResult(state.with_amplitudes(amp), snaps)


# ---------------------------------------------------------------------------
# Density-operator stepping: the same structured action applied to rows and
# columns, never materializing the 2N x 2N unitary.

def _conj_coin_mat(mat: np.ndarray, u: np.ndarray) -> np.ndarray:
    out = np.einsum("ac,xcyd->xayd", u, mat)
    return np.einsum("bd,xayd->xayb", u.conj(), out)


def _shift_mat(mat: np.ndarray) -> np.ndarray:
    out = np.empty_like(mat)
    out[:, 0] = np.roll(mat[:, 0], 1, axis=0)
    out[:, 1] = np.roll(mat[:, 1], -1, axis=0)
    out2 = np.empty_like(out)
    out2[:, :, :, 0] = np.roll(out[:, :, :, 0], 1, axis=2)
    out2[:, :, :, 1] = np.roll(out[:, :, :, 1], -1, axis=2)
    return out2


def _fm_mat(mat: np.ndarray, sites: np.ndarray, phi: float) -> np.ndarray:
    ph = _fm_phase(sites, phi)
    return mat * ph[:, None, None, None] * ph.conj()[None, None, :, None]


def conjugate_coin(rho: DensityOperator, u: np.ndarray) -> DensityOperator:
    """rho -> (1 (x) U) rho (1 (x) U)† for a unitary coin gate."""
    u = _check_unitary(u)
    return DensityOperator(rho.lattice, _conj_coin_mat(rho.matrix, u))


def step_density(rho: DensityOperator, theta: float) -> DensityOperator:
    """rho -> Z rho Z†."""
    mat = _conj_coin_mat(rho.matrix, coin_operator(theta))
    return DensityOperator(rho.lattice, _shift_mat(mat))


def step_density_generalized(
    rho: DensityOperator, theta: float, phi: float
) -> DensityOperator:
    """rho -> Z̄ rho Z̄† with the momentum-shift phase included."""
    mat = _shift_mat(_conj_coin_mat(rho.matrix, coin_operator(theta)))
    return DensityOperator(rho.lattice, _fm_mat(mat, rho.lattice.sites, phi))
