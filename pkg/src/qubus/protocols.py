"""Builders for the three bus-mediated controlled-phase gate sequences.

All three constructions steer the four branch amplitudes through phase
space so that the geometric phases picked up from the displacements
realise an entangling phase on the qubit pair:

* ``build_specific_example`` -- the closed-form sequence whose second
  displacement puts the common merge point on the imaginary axis; every
  op parameter is an explicit function of (alpha, beta, theta, phi).
* ``solve_general_geometry`` -- the general construction: given the
  first rotation/displacement/rotation (theta, omega, phi), it solves
  for the merge point, the two circumcenters and the two pair-rotation
  half-angles that collapse all four branch amplitudes onto one point,
  then emits the full sequence.
* ``build_square_path`` -- the earlier comparison method: four
  conditional rotations interleaved with the four sides of a square
  centred on the origin.  Exact rotations only approximate conditional
  displacements, so this sequence does not disentangle the bus exactly.

Builders are pure and their outputs immutable.
"""

from __future__ import annotations

import cmath
import json
import math
from dataclasses import dataclass, field
from enum import Enum
from types import MappingProxyType
from typing import Mapping, Union

from . import state
from .errors import DegenerateAngle, DegenerateGeometry
from .state import (
    ControlledRotation,
    Displacement,
    GateOp,
    op_from_dict,
    op_to_dict,
    wrap_phase,
)

_PARALLEL_TOL = 1e-9
_ANGLE_TOL = 1e-12


class Provenance(Enum):
    """Which builder produced a sequence."""

    GEOMETRIC_GENERAL = "GeometricGeneral"
    SPECIFIC_EXAMPLE = "SpecificExample"
    SQUARE_PATH = "SquarePath"
    CUSTOM = "Custom"


@dataclass(frozen=True)
class GateSequence:
    """Ordered list of primitives plus provenance metadata."""

    ops: tuple[GateOp, ...]
    provenance: Provenance
    params: Mapping[str, Union[float, complex]] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "ops", tuple(self.ops))
        object.__setattr__(self, "params", MappingProxyType(dict(self.params)))

    def __len__(self) -> int:
        return len(self.ops)

    def __iter__(self):
        return iter(self.ops)

    # --- JSON wire format (the on-disk protocol format) --------------------

    def to_dict(self) -> dict:
        params = {}
        for key, value in self.params.items():
            if isinstance(value, complex):
                params[key] = [value.real, value.imag]
            else:
                params[key] = float(value)
        return {
            "provenance": self.provenance.value,
            "params": params,
            "ops": [op_to_dict(op) for op in self.ops],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @classmethod
    def from_dict(cls, data: dict) -> "GateSequence":
        params = {}
        for key, value in data.get("params", {}).items():
            params[key] = complex(*value) if isinstance(value, list) else float(value)
        return cls(
            ops=tuple(op_from_dict(item) for item in data["ops"]),
            provenance=Provenance(data["provenance"]),
            params=params,
        )

    @classmethod
    def from_json(cls, text: str) -> "GateSequence":
        return cls.from_dict(json.loads(text))


@dataclass(frozen=True)
class GeometrySolution:
    """Derived quantities of the general construction.

    ``merge_point`` is the unique point equidistant from the 01/10 pair
    and (separately) from the 00/11 pair; ``center_cross`` is the centre
    of the circle through the 01/10 pair and the merge point,
    ``center_aligned`` the same for the 00/11 pair.  The half-angles are
    the signed rotation magnitudes of the two rotation pairs: the first
    pair rotates the 01/10 branches by -2/+2 times ``half_angle_cross``
    about ``center_cross``; the second rotates the 00/11 branches by
    +2/-2 times ``half_angle_aligned`` about ``center_aligned``.
    """

    merge_point: complex
    center_cross: complex
    center_aligned: complex
    half_angle_cross: float
    half_angle_aligned: float


def _cross(a: complex, b: complex) -> float:
    """2-D cross product of phase-space vectors (positive = b left of a)."""
    return (a.conjugate() * b).imag


def _bisector_intersection(p: complex, q: complex, r: complex, s: complex) -> complex:
    """Intersection of the perpendicular bisectors of segments (p,q) and (r,s)."""
    m1, m2 = (p + q) / 2.0, (r + s) / 2.0
    d1, d2 = 1j * (q - p), 1j * (s - r)
    denom = _cross(d1, d2)
    if abs(denom) <= _PARALLEL_TOL * abs(d1) * abs(d2):
        raise DegenerateGeometry("perpendicular bisectors are parallel")
    t = _cross(m2 - m1, d2) / denom
    return m1 + t * d1


def _circumcenter(a: complex, b: complex, c: complex) -> complex:
    """Circumcenter of a triangle; collinearity guarded relative to diameter."""
    diameter = max(abs(a - b), abs(b - c), abs(c - a))
    if abs(_cross(b - a, c - a)) <= _PARALLEL_TOL * diameter * diameter:
        raise DegenerateGeometry("circumcenter of (near-)collinear points")
    return _bisector_intersection(a, b, a, c)


def build_specific_example(
    alpha: float,
    beta: float,
    theta: float,
    phi: float,
    include_final_displacement: bool = True,
) -> GateSequence:
    """Closed-form gate sequence with the merge point on the imaginary axis.

    The returned 10-op sequence (8 ops if the final bus-restoring
    displacement is dropped), applied to a state with all branches at
    the real amplitude ``alpha``, leaves the bus exactly disentangled
    and back at ``alpha``.  On the equal superposition the entangling
    phase is ``4*alpha*beta*sin(theta)*tan(phi)``.

    Parameters
    ----------
    alpha : float
        Initial (real, positive) bus amplitude; also enters the
        displacement arguments.
    beta : float
        Imaginary part of the second op's displacement; the other knob
        of the entangling phase.
    theta, phi : float
        Angles of the qubit-1 and qubit-2 conditional rotations.
    include_final_displacement : bool
        Emit the last displacement returning the bus to ``alpha``
        (needed when gates are chained; the qubits are already
        disentangled without it).
    """
    if not alpha > 0 or not beta > 0:
        raise ValueError("alpha and beta must be positive")
    sin_phi, cos_phi = math.sin(phi), math.cos(phi)
    if min(abs(sin_phi), abs(cos_phi)) < _ANGLE_TOL:
        raise DegenerateAngle(f"phi={phi} sits on a pole (sin or cos ~ 0)")
    sin_theta = math.sin(theta)
    half_pull = -alpha * sin_theta / (2 * sin_phi) - 1j * beta / (2 * cos_phi)
    ops: list[GateOp] = [
        ControlledRotation(1, theta),
        Displacement(1j * beta - alpha * math.cos(theta)),
        ControlledRotation(2, phi),
        Displacement(half_pull),
        ControlledRotation(1, phi),
        ControlledRotation(2, -phi),
        Displacement(alpha * sin_theta / sin_phi),
        ControlledRotation(1, -phi),
        ControlledRotation(2, -phi),
    ]
    if include_final_displacement:
        ops.append(Displacement(alpha + half_pull))
    return GateSequence(
        ops=tuple(ops),
        provenance=Provenance.SPECIFIC_EXAMPLE,
        params={"alpha": alpha, "beta": beta, "theta": theta, "phi": phi},
    )


def solve_general_geometry(
    alpha: complex,
    theta: float,
    phi: float,
    omega: complex,
    include_final_displacement: bool = True,
) -> tuple[GeometrySolution, GateSequence]:
    """Solve the general merge geometry and emit the full gate sequence.

    The first three ops (rotation by ``theta`` on qubit 1, displacement
    by ``omega``, rotation by ``phi`` on qubit 2) split the bus into
    four amplitudes.  The construction then finds the unique point
    equidistant from the 01/10 pair and from the 00/11 pair (the
    intersection of the two chord bisectors), recentres phase space on
    the circumcenter of each pair in turn, and applies counter-rotating
    pairs of conditional rotations that merge first 01/10 and then
    00/11 onto that point, leaving the bus disentangled.  Rotation
    directions are taken from the actual point positions and the merge
    is verified numerically after construction.

    Returns the solved geometry and the emitted sequence.  Raises
    ``DegenerateGeometry`` when ``omega`` is a real multiple of
    ``alpha``, when bisectors are parallel or circumcenter triples
    collinear, and ``DegenerateAngle`` when ``theta`` or ``phi`` is a
    multiple of pi.
    """
    alpha = complex(alpha)
    omega = complex(omega)
    if abs((omega * alpha.conjugate()).imag) <= 1e-9 * abs(omega) * abs(alpha):
        raise DegenerateGeometry("omega must not be a real multiple of alpha")
    if abs(math.sin(theta)) < _ANGLE_TOL or abs(math.sin(phi)) < _ANGLE_TOL:
        raise DegenerateAngle("theta and phi must not be multiples of pi")

    # Branch amplitudes after the first rotation/displacement/rotation.
    down1, up1 = cmath.exp(-1j * theta), cmath.exp(1j * theta)
    down2, up2 = cmath.exp(-1j * phi), cmath.exp(1j * phi)
    p00 = (alpha * down1 + omega) * down2
    p01 = (alpha * down1 + omega) * up2
    p10 = (alpha * up1 + omega) * down2
    p11 = (alpha * up1 + omega) * up2

    merge = _bisector_intersection(p01, p10, p00, p11)
    center_cross = _circumcenter(p01, p10, merge)
    center_aligned = _circumcenter(p00, p11, merge)

    # Signed arc from each moving point to the merge point, about the
    # matching centre.  Equal chords from the merge point make the two
    # arcs of a pair exactly opposite; verify rather than assume.
    arc_01 = wrap_phase(cmath.phase((merge - center_cross) / (p01 - center_cross)))
    arc_10 = wrap_phase(cmath.phase((merge - center_cross) / (p10 - center_cross)))
    if abs(wrap_phase(arc_01 + arc_10)) > 1e-9:
        raise DegenerateGeometry("01/10 arcs are not opposite; no merging rotation")
    arc_00 = wrap_phase(cmath.phase((merge - center_aligned) / (p00 - center_aligned)))
    arc_11 = wrap_phase(cmath.phase((merge - center_aligned) / (p11 - center_aligned)))
    if abs(wrap_phase(arc_00 + arc_11)) > 1e-9:
        raise DegenerateGeometry("00/11 arcs are not opposite; no merging rotation")

    # Pair [R1(+h), R2(-h)] rotates branch 01 by -2h and 10 by +2h while
    # leaving 00/11 alone; pair [R1(-h), R2(-h)] rotates 00 by +2h and
    # 11 by -2h while leaving 01/10 alone.
    half_cross = -arc_01 / 2.0
    half_aligned = arc_00 / 2.0

    ops: list[GateOp] = [
        ControlledRotation(1, theta),
        Displacement(omega),
        ControlledRotation(2, phi),
        Displacement(-center_cross),
        ControlledRotation(1, half_cross),
        ControlledRotation(2, -half_cross),
        Displacement(center_cross - center_aligned),
        ControlledRotation(1, -half_aligned),
        ControlledRotation(2, -half_aligned),
    ]
    if include_final_displacement:
        ops.append(Displacement(alpha - merge + center_aligned))

    sequence = GateSequence(
        ops=tuple(ops),
        provenance=Provenance.GEOMETRIC_GENERAL,
        params={"alpha": alpha, "theta": theta, "phi": phi, "omega": omega},
    )

    # Post-hoc verification: the emitted sequence must actually merge all
    # four amplitudes (and restore the bus when the last op is kept).
    probe = state.apply_sequence(
        state.make_initial((0.5, 0.5, 0.5, 0.5), alpha), sequence
    )
    buses = probe.buses()
    scale = max(1.0, abs(alpha))
    spread = max(abs(a - b) for a in buses for b in buses)
    if spread > 1e-9 * scale:
        raise DegenerateGeometry(
            f"pair rotations failed to merge the branches (spread {spread:.3e})"
        )
    if include_final_displacement and abs(buses[0] - alpha) > 1e-9 * scale:
        raise DegenerateGeometry("final displacement failed to restore the bus")

    solution = GeometrySolution(
        merge_point=merge,
        center_cross=center_cross,
        center_aligned=center_aligned,
        half_angle_cross=half_cross,
        half_angle_aligned=half_aligned,
    )
    return solution, sequence


def square_initial_amplitude(alpha: float) -> complex:
    """Starting bus amplitude for the square path: the first corner."""
    return alpha * cmath.exp(1j * math.pi / 4)


def build_square_path(alpha: float, theta: float) -> GateSequence:
    """Square-loop comparison sequence: R, D four times around a square.

    The four displacements are the sides of the square with corners
    ``alpha*exp(i*pi*(2k+1)/4)``, traversed counterclockwise from the
    first corner, so with ``theta = 0`` the bus returns to its start
    exactly (the sides sum to zero by construction).  The caller must
    initialise the bus at ``square_initial_amplitude(alpha)``, not at
    ``alpha``.

    Rotations alternate control (qubit 1, 2, 1, 2) with the qubit-2
    rotations carrying the opposite sign.  With that pattern the 00 and
    11 branches see alternating rotation directions, retrace a closed
    path for every ``theta`` and end exactly at the start; the whole
    residual bus spread sits on the 01/10 branches.  Same-sign rotations
    on both qubits would instead pin the 01/10 pair, contradicting the
    method's zero 00-11 splitting.

    Exact rotations only approximate the conditional displacements this
    loop is designed around, so for ``theta != 0`` the final amplitudes
    differ between branches: the sequence does not disentangle the bus.
    """
    if not alpha > 0:
        raise ValueError("alpha must be positive")
    corners = [alpha * cmath.exp(1j * math.pi * (2 * k + 1) / 4) for k in range(5)]
    sides = [corners[k + 1] - corners[k] for k in range(4)]
    ops = (
        ControlledRotation(1, theta),
        Displacement(sides[0]),
        ControlledRotation(2, -theta),
        Displacement(sides[1]),
        ControlledRotation(1, theta),
        Displacement(sides[2]),
        ControlledRotation(2, -theta),
        Displacement(sides[3]),
    )
    return GateSequence(
        ops=ops,
        provenance=Provenance.SQUARE_PATH,
        params={"alpha": alpha, "theta": theta},
    )
