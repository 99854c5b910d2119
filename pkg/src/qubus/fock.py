"""Independent truncated-Fock-space simulator for cross-checking.

This module deliberately re-derives everything from the operator
definitions instead of reusing the branch-representation update rules:
the conditional rotation is applied as the exact diagonal phases
exp(-+i*theta*n) of exp(-i*theta*sigma_z*n), and the displacement as
the dense matrix exponential of the truncated generator
beta*adag - conj(beta)*a (scaling-and-squaring via scipy).  Agreement
of the two representations on reduced qubit states is therefore a real
two-sided check, in particular of the displacement phase convention.

Amplitudes are stored as a (4, cutoff) array: one truncated bus vector
per two-qubit basis state, in the fixed 00,01,10,11 label order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.linalg import expm

from .errors import CutoffTooSmall, NormError
from .metrics import QubitDensityMatrix
from .state import BITS, LABELS, ControlledRotation, Displacement, GateOp

_LOSS_TOL = 1e-8
_NORM_TOL = 1e-6


@dataclass(frozen=True)
class FockState:
    """Truncated joint state: 4 qubit blocks x ``cutoff`` photon levels."""

    cutoff: int
    amplitudes: np.ndarray
    truncation_loss: float = 0.0

    def __post_init__(self) -> None:
        amps = np.array(self.amplitudes, dtype=complex)
        if amps.shape != (4, self.cutoff):
            raise ValueError(f"amplitudes must have shape (4, {self.cutoff})")
        norm_sq = float(np.vdot(amps, amps).real)
        if abs(norm_sq - 1.0) > 1e-9:
            raise ValueError(f"state norm^2 is {norm_sq!r}, expected 1 within 1e-9")
        amps.flags.writeable = False
        object.__setattr__(self, "amplitudes", amps)

    def norm_squared(self) -> float:
        return float(np.vdot(self.amplitudes, self.amplitudes).real)

    def mean_photon_number(self) -> float:
        weights = np.sum(np.abs(self.amplitudes) ** 2, axis=0)
        return float(np.sum(np.arange(self.cutoff) * weights))

    def debug_dict(self) -> dict:
        """Amplitude dump for failure triage."""
        return {
            "cutoff": self.cutoff,
            "truncation_loss": self.truncation_loss,
            "amplitudes": {
                label: [[z.real, z.imag] for z in row]
                for label, row in zip(LABELS, self.amplitudes.tolist())
            },
        }


def recommended_cutoff(max_amplitude: float) -> int:
    """Floor on the cutoff for a path whose amplitudes stay below the given
    magnitude: mean photon number plus a six-sigma Poisson tail margin."""
    m = abs(max_amplitude)
    return math.ceil(m * m + 6.0 * m + 10.0)


def coherent_vector(alpha: complex, cutoff: int) -> np.ndarray:
    """Truncated coherent-state expansion exp(-|a|^2/2) a^n / sqrt(n!)."""
    vec = np.zeros(cutoff, dtype=complex)
    vec[0] = math.exp(-0.5 * abs(alpha) ** 2)
    for n in range(1, cutoff):
        vec[n] = vec[n - 1] * alpha / math.sqrt(n)
    return vec


def fock_initial(c, alpha: complex, cutoff: int) -> FockState:
    """Tensor the qubit coefficients with a truncated coherent bus vector.

    Raises ``CutoffTooSmall`` when the truncated tail of the coherent
    expansion carries more than 1e-8 probability; otherwise renormalises
    and records the loss.
    """
    if len(c) != 4:
        raise ValueError("need exactly 4 coefficients")
    if cutoff < 1:
        raise ValueError("cutoff must be at least 1")
    coeffs = np.array([complex(x) for x in c])
    norm_sq = float(np.sum(np.abs(coeffs) ** 2))
    if abs(norm_sq - 1.0) > _NORM_TOL:
        raise NormError(
            f"sum of |c|^2 is {norm_sq!r}, more than {_NORM_TOL} away from 1"
        )
    coeffs = coeffs / math.sqrt(norm_sq)
    bus = coherent_vector(complex(alpha), cutoff)
    loss = max(0.0, 1.0 - float(np.sum(np.abs(bus) ** 2)))
    if loss > _LOSS_TOL:
        raise CutoffTooSmall(
            f"cutoff {cutoff} truncates {loss:.3e} of |alpha|={abs(alpha):.3f}"
        )
    amps = np.outer(coeffs, bus)
    amps = amps / math.sqrt(float(np.vdot(amps, amps).real))
    return FockState(cutoff=cutoff, amplitudes=amps, truncation_loss=loss)


def _displacement_matrix(beta: complex, cutoff: int) -> np.ndarray:
    lowering = np.diag(np.sqrt(np.arange(1, cutoff)), 1)
    raising = lowering.conj().T
    return expm(beta * raising - np.conj(beta) * lowering)


def fock_apply(s: FockState, op: GateOp) -> FockState:
    """Apply one primitive in the truncated space.

    Truncation adequacy is judged after the op: the total norm must stay
    within 1e-6 of 1 and the top two photon levels must carry less than
    1e-8 of the probability (the truncated displacement generator is
    exactly anti-Hermitian, so its exponential is unitary and norm alone
    cannot flag a state pushed against the cutoff).
    """
    if isinstance(op, ControlledRotation):
        n = np.arange(s.cutoff)
        amps = s.amplitudes.copy()
        for row, bits in enumerate(BITS):
            bit = bits[0] if op.qubit == 1 else bits[1]
            sign = 1.0 if bit else -1.0
            amps[row] *= np.exp(1j * sign * op.angle * n)
    elif isinstance(op, Displacement):
        d = _displacement_matrix(op.shift, s.cutoff)
        amps = s.amplitudes @ d.T
    else:
        raise TypeError(f"not a GateOp: {op!r}")

    norm_sq = float(np.vdot(amps, amps).real)
    if abs(norm_sq - 1.0) > _NORM_TOL:
        raise CutoffTooSmall(f"norm^2 drifted to {norm_sq!r}; cutoff too small")
    top_band = float(np.sum(np.abs(amps[:, -2:]) ** 2))
    if top_band > _LOSS_TOL:
        raise CutoffTooSmall(
            f"top two photon levels carry {top_band:.3e}; cutoff too small"
        )
    amps = amps / math.sqrt(norm_sq)
    return FockState(cutoff=s.cutoff, amplitudes=amps, truncation_loss=s.truncation_loss)


def fock_apply_sequence(s: FockState, ops) -> FockState:
    """Left-to-right fold of GateOps (GateSequence or iterable)."""
    state = s
    for op in getattr(ops, "ops", ops):
        state = fock_apply(state, op)
    return state


def fock_reduce(s: FockState) -> QubitDensityMatrix:
    """Partial trace over photon number: rho[i,j] = sum_n a_in conj(a_jn).

    The truncated evolution keeps the norm only to ~1e-12 over long
    sequences, so the result is renormalised by its trace to satisfy the
    density-matrix contract exactly.
    """
    rho = s.amplitudes @ s.amplitudes.conj().T
    rho = 0.5 * (rho + rho.conj().T)
    rho = rho / float(np.trace(rho).real)
    return QubitDensityMatrix(rho)
