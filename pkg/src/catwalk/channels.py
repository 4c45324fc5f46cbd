"""Per-step noise channels on the walk density operator.

Pure dephasing shrinks off-diagonal elements toward the diagonal in a
chosen index (coin, walker, or both); amplitude damping and bit flip act
on the coin through Kraus pairs.  The bath strength eta is per step, so
each application scales coherences by lambda = e^{-eta} and an n-step run
accumulates e^{-eta n}.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .lattice import DensityOperator
from .walk import SIGMA_X, Schedule

COMPLETENESS_TOL = 1e-12

DEPHASING = "dephasing"
AMPLITUDE_DAMPING = "amplitude_damping"
BIT_FLIP = "bit_flip"

TARGET_COIN = "coin"
TARGET_WALKER = "walker"
TARGET_BOTH = "both"


class ChannelError(ValueError):
    """Invalid channel parameters."""


@dataclass(frozen=True)
class ChannelSpec:
    """Channel kind, per-step strength eta, and dephasing target."""

    kind: str
    eta: float
    target: str = TARGET_COIN

    def __post_init__(self):
        if self.kind not in (DEPHASING, AMPLITUDE_DAMPING, BIT_FLIP):
            raise ChannelError(f"unknown channel kind {self.kind!r}")
        if self.eta < 0:
            raise ChannelError(f"eta must be >= 0, got {self.eta}")
        if self.target not in (TARGET_COIN, TARGET_WALKER, TARGET_BOTH):
            raise ChannelError(f"unknown target {self.target!r}")
        if self.kind != DEPHASING and self.target != TARGET_COIN:
            raise ChannelError(f"{self.kind} acts on the coin only")


@dataclass(frozen=True)
class KrausPair:
    """Two-element Kraus set {M0, M1} with M0†M0 + M1†M1 = 1."""

    m0: np.ndarray
    m1: np.ndarray

    def __post_init__(self):
        m0 = np.asarray(self.m0, dtype=complex)
        m1 = np.asarray(self.m1, dtype=complex)
        if m0.shape != (2, 2) or m1.shape != (2, 2):
            raise ChannelError("Kraus operators must be 2x2")
        total = m0.conj().T @ m0 + m1.conj().T @ m1
        defect = np.abs(total - np.eye(2)).max()
        if defect > COMPLETENESS_TOL:
            raise ChannelError(
                f"Kraus pair not trace preserving (defect {defect:.3e})"
            )
        object.__setattr__(self, "m0", m0)
        object.__setattr__(self, "m1", m1)


def _dephase_mat(mat: np.ndarray, eta: float, target: str) -> np.ndarray:
    lam = np.exp(-eta)
    n = mat.shape[0]
    out = mat * lam
    inv = 1.0 / lam
    idx = np.arange(n)
    if target == TARGET_COIN:
        # restore elements diagonal in the coin (any x, x')
        out[:, 0, :, 0] *= inv
        out[:, 1, :, 1] *= inv
    elif target == TARGET_WALKER:
        out[idx, :, idx, :] *= inv
    elif target == TARGET_BOTH:
        out[idx, 0, idx, 0] *= inv
        out[idx, 1, idx, 1] *= inv
    else:
        raise ChannelError(f"unknown target {target!r}")
    return out


def dephase(rho: DensityOperator, eta: float, target: str) -> DensityOperator:
    """Scale the targeted off-diagonal elements by e^{-eta}.

    target=coin touches c != c', target=walker touches x != x', and
    target=both touches every element off the full diagonal.  The diagonal
    is untouched, so the trace is preserved exactly.
    """
    if eta < 0:
        raise ChannelError(f"eta must be >= 0, got {eta}")
    if eta == 0:
        return rho
    return DensityOperator(rho.lattice, _dephase_mat(rho.matrix, eta, target))


def amplitude_damping_kraus(eta: float) -> KrausPair:
    """A0 = diag(1, e^{-eta/2}), A1 = sqrt(1 - e^{-eta}) |up><down|."""
    if eta < 0:
        raise ChannelError(f"eta must be >= 0, got {eta}")
    a0 = np.diag([1.0, np.exp(-eta / 2.0)]).astype(complex)
    a1 = np.zeros((2, 2), dtype=complex)
    a1[0, 1] = np.sqrt(1.0 - np.exp(-eta))
    return KrausPair(a0, a1)


def bit_flip_kraus(eta: float) -> KrausPair:
    """B0 = e^{-eta/2} 1, B1 = sqrt(1 - e^{-eta}) sigma_x."""
    if eta < 0:
        raise ChannelError(f"eta must be >= 0, got {eta}")
    b0 = np.exp(-eta / 2.0) * np.eye(2, dtype=complex)
    b1 = np.sqrt(1.0 - np.exp(-eta)) * SIGMA_X
    return KrausPair(b0, b1)


def _kraus_mat(mat: np.ndarray, kraus: KrausPair) -> np.ndarray:
    out = np.zeros_like(mat)
    for m in (kraus.m0, kraus.m1):
        term = np.einsum("ac,xcyd->xayd", m, mat)
        out += np.einsum("bd,xayd->xayb", m.conj(), term)
    return out


def apply_coin_channel(rho: DensityOperator, kraus: KrausPair) -> DensityOperator:
    """rho -> sum_i (1 (x) M_i) rho (1 (x) M_i)†."""
    return DensityOperator(rho.lattice, _kraus_mat(rho.matrix, kraus))


def _channel_mat_fn(spec: ChannelSpec):
    """Bind a spec to a raw-array channel application for hot loops."""
    if spec.kind == DEPHASING:
        eta, target = spec.eta, spec.target
        if eta == 0:
            return lambda mat: mat
        return lambda mat: _dephase_mat(mat, eta, target)
    if spec.kind == AMPLITUDE_DAMPING:
        kraus = amplitude_damping_kraus(spec.eta)
    else:
        kraus = bit_flip_kraus(spec.eta)
    return lambda mat: _kraus_mat(mat, kraus)


def apply_channel(rho: DensityOperator, spec: ChannelSpec) -> DensityOperator:
    if spec.kind == DEPHASING:
        return dephase(rho, spec.eta, spec.target)
    if spec.kind == AMPLITUDE_DAMPING:
        return apply_coin_channel(rho, amplitude_damping_kraus(spec.eta))
    return apply_coin_channel(rho, bit_flip_kraus(spec.eta))


@dataclass(frozen=True)
class OpenEvolutionResult:
    final: DensityOperator
    snapshots: dict[int, DensityOperator]


def evolve_open(
    rho0: DensityOperator,
    schedule: Schedule,
    snapshot_times: Sequence[int] = (),
) -> OpenEvolutionResult:
    """Run a schedule on a density operator, channel after every step.

    The per-step order is unitary step, then channel; coin-gate insertions
    are applied (unitarily) after the completed step, before any snapshot.
    A schedule without a channel runs closed but on rho, useful for
    cross-checking against the pure-state path.  The hot loop works on
    the raw array; trace and Hermiticity are re-validated at every
    snapshot and on the final state.
    """
    from .walk import _check_unitary, _conj_coin_mat, _fm_mat, _shift_mat, coin_operator

    spec = schedule.channel
    if spec is not None and not isinstance(spec, ChannelSpec):
        raise ChannelError(f"schedule.channel must be a ChannelSpec, got {type(spec).__name__}")
    wanted = set(snapshot_times)
    for t in wanted:
        if not (0 <= t <= schedule.total_steps):
            raise ChannelError(f"snapshot time {t} outside run")
    channel_fn = _channel_mat_fn(spec) if spec is not None else None
    coin = coin_operator(schedule.theta)
    lattice = rho0.lattice
    mat = rho0.matrix.copy()
    snaps: dict[int, DensityOperator] = {}

    def checkpoint(t: int) -> np.ndarray:
        out = mat
        for u in schedule.insertions_at(t):
            out = _conj_coin_mat(out, _check_unitary(u))
        if t in wanted:
            snaps[t] = DensityOperator(lattice, out)
        return out

    mat = checkpoint(0)
    for s in range(1, schedule.total_steps + 1):
        mat = _shift_mat(_conj_coin_mat(mat, coin))
        phi = schedule.phi_at(s)
        if phi is not None:
            mat = _fm_mat(mat, lattice.sites, phi)
        if channel_fn is not None:
            mat = channel_fn(mat)
        mat = checkpoint(s)
    return OpenEvolutionResult(DensityOperator(lattice, mat), snaps)
