"""Exact branch-form evolution of two qubits coupled to a coherent bus.

The joint state of the qubit pair and the bus mode is stored as four
labelled branches, one per two-qubit basis state (fixed order 00, 01,
10, 11).  Each branch carries a complex coefficient -- population and
accumulated phase fused into one number -- and the coherent amplitude
of the bus conditioned on that basis state.

Two primitive operations act on this representation, both exact (no
truncation, no small-angle assumptions):

* a conditional rotation on qubit q by angle ``theta`` multiplies the
  bus amplitude by ``exp(-i*theta)`` on branches where qubit q is 0 and
  by ``exp(+i*theta)`` where it is 1 (the 0 state is the +1 eigenstate
  of sigma_z, so the generator ``-i theta sigma_z n`` rotates the two
  qubit values in opposite directions);
* an unconditional displacement by ``shift`` translates every branch
  amplitude rigidly and multiplies each coefficient by the geometric
  phase ``exp(i*Im(shift*conj(amplitude)))`` -- the sole mechanism by
  which branch-dependent phases accumulate.

All values are immutable; every operation returns a new state, so the
module is safe to use from concurrent callers without locking.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass
from typing import Iterable, NamedTuple, Sequence, Union

from .errors import NormError

#: Branch labels in fixed storage order (qubit 1 bit, qubit 2 bit).
LABELS = ("00", "01", "10", "11")

#: Bit pairs matching LABELS.
BITS = ((0, 0), (0, 1), (1, 0), (1, 1))

_NORM_TOL = 1e-6
_ZERO_WEIGHT = 1e-15


def _require_finite(value: complex, what: str) -> None:
    if not (math.isfinite(value.real) and math.isfinite(value.imag)):
        raise ValueError(f"{what} must be finite, got {value!r}")


@dataclass(frozen=True)
class ControlledRotation:
    """Bus phase-space rotation by ``angle``, conditioned on ``qubit``.

    Implements ``exp(-i*angle*sigma_z(qubit)*n)`` where ``n`` is the bus
    number operator: bit 0 rotates the bus by ``-angle``, bit 1 by
    ``+angle``.  Coefficients are untouched (a coherent state picks up
    no extra phase under a number-operator rotation).
    """

    qubit: int
    angle: float

    def __post_init__(self) -> None:
        if self.qubit not in (1, 2):
            raise ValueError(f"qubit must be 1 or 2, got {self.qubit}")
        if not math.isfinite(self.angle):
            raise ValueError(f"angle must be finite, got {self.angle!r}")


@dataclass(frozen=True)
class Displacement:
    """Unconditional bus displacement by the complex ``shift``.

    Uses the unitary convention D(b) = exp(b*adag - conj(b)*a), under
    which D(b)|a> = exp(i*Im(b*conj(a))) |a+b>.
    """

    shift: complex

    def __post_init__(self) -> None:
        _require_finite(complex(self.shift), "shift")


GateOp = Union[ControlledRotation, Displacement]


@dataclass(frozen=True)
class Branch:
    """One two-qubit basis branch: fused coefficient plus bus amplitude."""

    coeff: complex
    bus: complex

    def __post_init__(self) -> None:
        _require_finite(complex(self.coeff), "coeff")
        _require_finite(complex(self.bus), "bus")
        if abs(self.coeff) > 1.0 + 1e-9:
            raise ValueError(f"|coeff| must be <= 1, got {abs(self.coeff)}")


@dataclass(frozen=True)
class BranchState:
    """Joint qubit-pair/bus state as four branches in fixed label order."""

    branches: tuple[Branch, Branch, Branch, Branch]

    def __post_init__(self) -> None:
        if len(self.branches) != 4:
            raise ValueError("BranchState needs exactly 4 branches")

    def coeffs(self) -> tuple[complex, complex, complex, complex]:
        return tuple(b.coeff for b in self.branches)  # type: ignore[return-value]

    def buses(self) -> tuple[complex, complex, complex, complex]:
        return tuple(b.bus for b in self.branches)  # type: ignore[return-value]

    def norm_squared(self) -> float:
        return sum(abs(b.coeff) ** 2 for b in self.branches)

    # --- JSON wire format -------------------------------------------------

    def to_dict(self) -> dict:
        return {
            "branches": [
                {
                    "label": lab,
                    "coeff": [b.coeff.real, b.coeff.imag],
                    "bus": [b.bus.real, b.bus.imag],
                }
                for lab, b in zip(LABELS, self.branches)
            ]
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "BranchState":
        entries = {item["label"]: item for item in data["branches"]}
        if set(entries) != set(LABELS):
            raise ValueError(f"state JSON must carry labels {LABELS}")
        branches = tuple(
            Branch(
                coeff=complex(*entries[lab]["coeff"]),
                bus=complex(*entries[lab]["bus"]),
            )
            for lab in LABELS
        )
        return cls(branches)  # type: ignore[arg-type]

    @classmethod
    def from_json(cls, text: str) -> "BranchState":
        return cls.from_dict(json.loads(text))


class PhaseDecomposition(NamedTuple):
    """Polar split of the four branch coefficients.

    ``undefined[k]`` flags branches whose coefficient magnitude is below
    the zero-weight floor; their phase is reported as 0.
    """

    phases: tuple[float, float, float, float]
    magnitudes: tuple[float, float, float, float]
    undefined: tuple[bool, bool, bool, bool]


def wrap_phase(phi: float) -> float:
    """Wrap an angle to the (-pi, pi] convention used throughout."""
    wrapped = math.remainder(phi, 2.0 * math.pi)
    if wrapped <= -math.pi:
        wrapped += 2.0 * math.pi
    return wrapped


def make_initial(
    c: Sequence[complex], alpha: complex
) -> BranchState:
    """Product state: qubit coefficients ``c`` with every branch at ``alpha``.

    Parameters
    ----------
    c : sequence of 4 complex
        Coefficients for the 00, 01, 10, 11 basis states.  Renormalized
        internally; deviation of the norm from 1 beyond 1e-6 raises
        ``NormError``.
    alpha : complex
        Initial coherent amplitude, shared by all four branches.
    """
    if len(c) != 4:
        raise ValueError("need exactly 4 coefficients")
    coeffs = [complex(x) for x in c]
    for x in coeffs:
        _require_finite(x, "coefficient")
    norm_sq = sum(abs(x) ** 2 for x in coeffs)
    if abs(norm_sq - 1.0) > _NORM_TOL:
        raise NormError(
            f"sum of |c|^2 is {norm_sq!r}, more than {_NORM_TOL} away from 1"
        )
    scale = 1.0 / math.sqrt(norm_sq)
    alpha = complex(alpha)
    _require_finite(alpha, "alpha")
    return BranchState(
        tuple(Branch(coeff=x * scale, bus=alpha) for x in coeffs)  # type: ignore[arg-type]
    )


def apply_controlled_rotation(
    s: BranchState, qubit: int, theta: float
) -> BranchState:
    """Rotate branch bus amplitudes by -theta (control bit 0) / +theta (bit 1)."""
    op = ControlledRotation(qubit=qubit, angle=theta)
    minus = cmath.exp(-1j * op.angle)
    plus = cmath.exp(1j * op.angle)
    new = []
    for bits, br in zip(BITS, s.branches):
        bit = bits[0] if op.qubit == 1 else bits[1]
        new.append(Branch(coeff=br.coeff, bus=br.bus * (plus if bit else minus)))
    return BranchState(tuple(new))  # type: ignore[arg-type]


def apply_displacement(s: BranchState, beta: complex) -> BranchState:
    """Shift every branch amplitude by ``beta``, imprinting the geometric phase.

    Each coefficient is multiplied by ``exp(i*Im(beta*conj(bus)))``; this
    is the only operation that changes branch phases, so all entangling
    phases in any protocol trace back to the displacements it contains.
    """
    op = Displacement(shift=complex(beta))
    new = []
    for br in s.branches:
        phase = cmath.exp(1j * (op.shift * br.bus.conjugate()).imag)
        new.append(Branch(coeff=br.coeff * phase, bus=br.bus + op.shift))
    return BranchState(tuple(new))  # type: ignore[arg-type]


def apply_op(s: BranchState, op: GateOp) -> BranchState:
    """Dispatch a single primitive to the matching apply function."""
    if isinstance(op, ControlledRotation):
        return apply_controlled_rotation(s, op.qubit, op.angle)
    if isinstance(op, Displacement):
        return apply_displacement(s, op.shift)
    raise TypeError(f"not a GateOp: {op!r}")


def apply_sequence(s: BranchState, ops) -> BranchState:
    """Left-to-right fold of a GateSequence (or any iterable of GateOps)."""
    op_list: Iterable[GateOp] = getattr(ops, "ops", ops)
    state = s
    for op in op_list:
        state = apply_op(state, op)
    return state


def extract_phases(s: BranchState) -> PhaseDecomposition:
    """Split each branch coefficient into phase in (-pi, pi] and magnitude."""
    phases = []
    mags = []
    undefined = []
    for br in s.branches:
        mag = abs(br.coeff)
        mags.append(mag)
        if mag < _ZERO_WEIGHT:
            phases.append(0.0)
            undefined.append(True)
        else:
            phases.append(wrap_phase(cmath.phase(br.coeff)))
            undefined.append(False)
    return PhaseDecomposition(
        phases=tuple(phases),  # type: ignore[arg-type]
        magnitudes=tuple(mags),  # type: ignore[arg-type]
        undefined=tuple(undefined),  # type: ignore[arg-type]
    )


# --- GateOp wire format ---------------------------------------------------


def op_to_dict(op: GateOp) -> dict:
    if isinstance(op, ControlledRotation):
        return {"type": "rotation", "qubit": op.qubit, "angle": op.angle}
    if isinstance(op, Displacement):
        return {"type": "displacement", "shift": [op.shift.real, op.shift.imag]}
    raise TypeError(f"not a GateOp: {op!r}")


def op_from_dict(data: dict) -> GateOp:
    kind = data.get("type")
    if kind == "rotation":
        return ControlledRotation(qubit=int(data["qubit"]), angle=float(data["angle"]))
    if kind == "displacement":
        return Displacement(shift=complex(*data["shift"]))
    raise ValueError(f"unknown op type: {kind!r}")
