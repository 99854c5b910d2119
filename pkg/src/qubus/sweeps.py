"""Parameter sweeps, method comparison and oracle verification drivers.

Sweep rows record the coefficient-level concurrence (see
``metrics.coefficient_concurrence``): it equals the physical pure-state
concurrence whenever a protocol disentangles the bus, and for the
square-path method it is the measure whose closed-form laws the
curvature fits target.  ``run_simulation`` reports the physical value
instead (traced concurrence when the bus stays entangled).

Grid points are evaluated independently of one another; results do not
depend on evaluation order, and identical configs produce bit-identical
CSV output.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from enum import Enum
from types import MappingProxyType
from typing import Callable, Mapping, Optional, Union

import numpy as np

from .errors import FitFailed, QubusError
from .fock import fock_apply, fock_initial, fock_reduce, recommended_cutoff
from .metrics import (
    GateMetrics,
    bus_spread,
    coefficient_concurrence,
    concurrence_traced,
    entangling_phase,
    gate_metrics,
    reduce_to_qubits,
    trace_distance,
)
from .protocols import (
    GateSequence,
    Provenance,
    build_specific_example,
    build_square_path,
    solve_general_geometry,
    square_initial_amplitude,
)
from .state import BranchState, ControlledRotation, Displacement, apply_op, apply_sequence, make_initial

EQUAL_SUPERPOSITION = (0.5, 0.5, 0.5, 0.5)

_ORACLE_TOL = 1e-8
# Margin above the six-sigma cutoff floor; keeps randomized-trial trace
# distances well below the tolerance while the cutoff stays below 100.
_CUTOFF_MARGIN = 12


class Metric(Enum):
    CONCURRENCE = "Concurrence"
    CONCURRENCE_SQUARED = "ConcurrenceSquared"
    BUS_SPREAD = "BusSpread"
    ENTANGLING_PHASE = "EntanglingPhase"


_FITTABLE = (Metric.CONCURRENCE, Metric.CONCURRENCE_SQUARED)


def build_protocol(
    protocol: Provenance, params: Mapping[str, Union[float, complex]]
) -> tuple[GateSequence, complex]:
    """Build a sequence from base parameters; returns (sequence, initial bus)."""
    if protocol is Provenance.SPECIFIC_EXAMPLE:
        seq = build_specific_example(
            float(params["alpha"]),
            float(params["beta"]),
            float(params["theta"]),
            float(params["phi"]),
        )
        return seq, complex(float(params["alpha"]))
    if protocol is Provenance.SQUARE_PATH:
        seq = build_square_path(float(params["alpha"]), float(params["theta"]))
        return seq, square_initial_amplitude(float(params["alpha"]))
    if protocol is Provenance.GEOMETRIC_GENERAL:
        _, seq = solve_general_geometry(
            complex(params["alpha"]),
            float(params["theta"]),
            float(params["phi"]),
            complex(params["omega"]),
        )
        return seq, complex(params["alpha"])
    raise ValueError(f"no builder for protocol {protocol!r}")


def run_simulation(
    sequence: GateSequence,
    initial_bus: complex,
    coeffs=EQUAL_SUPERPOSITION,
) -> tuple[GateMetrics, BranchState]:
    """Apply a sequence to a product state and score the result."""
    final = apply_sequence(make_initial(coeffs, initial_bus), sequence)
    return gate_metrics(final, initial_bus), final


@dataclass(frozen=True)
class SweepConfig:
    """One-parameter robustness sweep around a base operating point.

    ``range`` is (min, max, steps) of the *perturbation* applied to the
    varied parameter; grid values are base + epsilon for epsilon on the
    uniform grid.
    """

    protocol: Provenance
    base_params: Mapping[str, Union[float, complex]]
    vary: str
    range: tuple[float, float, int]
    metric: Metric = Metric.CONCURRENCE_SQUARED

    def __post_init__(self) -> None:
        object.__setattr__(self, "base_params", MappingProxyType(dict(self.base_params)))
        lo, hi, steps = self.range
        if steps < 2:
            raise ValueError("sweep needs at least 2 steps")
        if not lo < hi:
            raise ValueError("sweep range must have min < max")
        if self.vary not in self.base_params:
            raise ValueError(f"unknown parameter to vary: {self.vary!r}")
        if isinstance(self.base_params[self.vary], complex):
            raise ValueError("can only vary real-valued parameters")

    def to_dict(self) -> dict:
        params = {
            k: ([v.real, v.imag] if isinstance(v, complex) else float(v))
            for k, v in self.base_params.items()
        }
        return {
            "protocol": self.protocol.value,
            "base_params": params,
            "vary": self.vary,
            "range": list(self.range),
            "metric": self.metric.value,
        }


@dataclass(frozen=True)
class SweepPoint:
    value: float
    epsilon: float
    concurrence: float
    concurrence_sq: float
    bus_spread: float
    entangling_phase: float
    error: Optional[str] = None

    def metric_value(self, metric: Metric) -> float:
        return {
            Metric.CONCURRENCE: self.concurrence,
            Metric.CONCURRENCE_SQUARED: self.concurrence_sq,
            Metric.BUS_SPREAD: self.bus_spread,
            Metric.ENTANGLING_PHASE: self.entangling_phase,
        }[metric]


@dataclass(frozen=True)
class SweepResult:
    config: SweepConfig
    rows: tuple[SweepPoint, ...]
    fitted_curvature: Optional[float]
    fit_residual: Optional[float]

    def to_csv(self) -> str:
        lines = ["param,epsilon,concurrence,concurrence_sq,bus_spread,entangling_phase"]
        for row in self.rows:
            lines.append(
                ",".join(
                    [self.config.vary]
                    + [
                        _csv_num(x)
                        for x in (
                            row.epsilon,
                            row.concurrence,
                            row.concurrence_sq,
                            row.bus_spread,
                            row.entangling_phase,
                        )
                    ]
                )
            )
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "config": self.config.to_dict(),
            "fitted_curvature": self.fitted_curvature,
            "fit_residual": self.fit_residual,
            "rows": [
                {
                    "value": r.value,
                    "epsilon": r.epsilon,
                    "concurrence": r.concurrence,
                    "concurrence_sq": r.concurrence_sq,
                    "bus_spread": r.bus_spread,
                    "entangling_phase": r.entangling_phase,
                    "error": r.error,
                }
                for r in self.rows
            ],
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _csv_num(x: float) -> str:
    return format(x, ".12g")


def _evaluate_point(cfg: SweepConfig, epsilon: float) -> SweepPoint:
    base = dict(cfg.base_params)
    value = float(base[cfg.vary]) + epsilon
    base[cfg.vary] = value
    try:
        sequence, bus0 = build_protocol(cfg.protocol, base)
        final = apply_sequence(make_initial(EQUAL_SUPERPOSITION, bus0), sequence)
        c = coefficient_concurrence(final)
        return SweepPoint(
            value=value,
            epsilon=epsilon,
            concurrence=c,
            concurrence_sq=c * c,
            bus_spread=bus_spread(final),
            entangling_phase=entangling_phase(final),
        )
    except QubusError as exc:
        nan = float("nan")
        return SweepPoint(
            value=value,
            epsilon=epsilon,
            concurrence=nan,
            concurrence_sq=nan,
            bus_spread=nan,
            entangling_phase=nan,
            error=f"{type(exc).__name__}: {exc}",
        )


def run_sweep(cfg: SweepConfig) -> SweepResult:
    """Evaluate the metric over the perturbation grid and fit 1 - k*eps^2.

    Rows that fail to build/simulate are marked and skipped by the fit.
    The curvature is fitted by least squares over the central 20% of the
    range (present only for the two concurrence metrics); fewer than 5
    valid rows in that window raise ``FitFailed``.
    """
    lo, hi, steps = cfg.range
    epsilons = [lo + (hi - lo) * i / (steps - 1) for i in range(steps)]
    rows = tuple(_evaluate_point(cfg, e) for e in epsilons)

    fitted = residual = None
    if cfg.metric in _FITTABLE:
        center = 0.5 * (lo + hi)
        window = 0.1 * (hi - lo)
        central = [
            r
            for r in rows
            if r.error is None and abs(r.epsilon - center) <= window + 1e-15
        ]
        if len(central) < 5:
            raise FitFailed(
                f"only {len(central)} valid rows in the central fit window"
            )
        eps = np.array([r.epsilon for r in central])
        y = np.array([r.metric_value(cfg.metric) for r in central])
        fitted = float(np.sum(eps**2 * (1.0 - y)) / np.sum(eps**4))
        residual = float(np.sqrt(np.mean((y - (1.0 - fitted * eps**2)) ** 2)))
    return SweepResult(config=cfg, rows=rows, fitted_curvature=fitted, fit_residual=residual)


def tolerance_radius(
    concurrence_at: Callable[[float], float],
    level: float = 0.97,
    initial_step: float = 0.01,
    max_radius: float = 1.0,
) -> float:
    """Smallest relative error x > 0 with concurrence_at(x) = level.

    Expands a bracket geometrically from ``initial_step`` and then
    bisects; assumes the curve starts above ``level`` at x = 0 and
    decreases through it.
    """
    if concurrence_at(0.0) <= level:
        raise ValueError("concurrence at the operating point is already below level")
    lo, hi = 0.0, initial_step
    while concurrence_at(hi) > level:
        lo, hi = hi, hi * 2.0
        if hi > max_radius:
            raise ValueError(f"no crossing below relative error {max_radius}")
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if concurrence_at(mid) > level:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class ComparisonRow:
    method: str
    param: str
    epsilon: float
    concurrence: float
    concurrence_sq: float
    bus_spread: float


@dataclass(frozen=True)
class MethodComparison:
    """Robustness of the exact-geometry gate vs the square-path gate.

    Curvatures are quoted against *relative* parameter error (fit of
    C^2 = 1 - k (dx/x)^2); radii are the relative errors at which the
    concurrence drops to 0.97.
    """

    specific_params: Mapping[str, float]
    square_params: Mapping[str, float]
    curvatures: Mapping[str, float]
    radii: Mapping[str, float]
    radius_ratio_alpha: float
    radius_ratio_theta: float
    square_bus_spread: float
    square_traced_concurrence: float
    square_concurrence_deficit: float
    rows: tuple[ComparisonRow, ...]

    def __post_init__(self) -> None:
        for name in ("specific_params", "square_params", "curvatures", "radii"):
            object.__setattr__(self, name, MappingProxyType(dict(getattr(self, name))))

    def to_csv(self) -> str:
        lines = ["method,param,epsilon,concurrence,concurrence_sq,bus_spread"]
        for r in self.rows:
            lines.append(
                f"{r.method},{r.param},"
                + ",".join(
                    _csv_num(x)
                    for x in (r.epsilon, r.concurrence, r.concurrence_sq, r.bus_spread)
                )
            )
        return "\n".join(lines) + "\n"

    def to_dict(self) -> dict:
        return {
            "specific_params": dict(self.specific_params),
            "square_params": dict(self.square_params),
            "curvatures": dict(self.curvatures),
            "radii": dict(self.radii),
            "radius_ratio_alpha": self.radius_ratio_alpha,
            "radius_ratio_theta": self.radius_ratio_theta,
            "square_bus_spread": self.square_bus_spread,
            "square_traced_concurrence": self.square_traced_concurrence,
            "square_concurrence_deficit": self.square_concurrence_deficit,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _sweep_concurrence(protocol: Provenance, params: dict, vary: str, x_rel: float) -> float:
    perturbed = dict(params)
    perturbed[vary] = params[vary] * (1.0 + x_rel)
    sequence, bus0 = build_protocol(protocol, perturbed)
    final = apply_sequence(make_initial(EQUAL_SUPERPOSITION, bus0), sequence)
    return coefficient_concurrence(final)


def compare_methods(
    alpha_spec: float,
    beta: float,
    theta: float,
    phi: float,
    rel_half_range: float = 0.02,
    steps: int = 41,
) -> MethodComparison:
    """Sweep alpha and theta errors through both gate constructions.

    The exact-geometry parameters must sit at an entanglement maximum
    (4*alpha*beta*sin(theta)*tan(phi) an odd multiple of pi); the square
    path is placed at its own maximum with the same rotation angle,
    alpha_square = sqrt(pi/12)/theta.
    """
    spec_params = {"alpha": alpha_spec, "beta": beta, "theta": theta, "phi": phi}
    if abs(_sweep_concurrence(Provenance.SPECIFIC_EXAMPLE, spec_params, "alpha", 0.0) - 1.0) > 1e-6:
        raise ValueError("specific-example parameters are not at a concurrence maximum")
    alpha_square = math.sqrt(math.pi / 12.0) / theta
    square_params = {"alpha": alpha_square, "theta": theta}

    methods = {
        "specific": (Provenance.SPECIFIC_EXAMPLE, spec_params),
        "square": (Provenance.SQUARE_PATH, square_params),
    }

    rows: list[ComparisonRow] = []
    curvatures: dict[str, float] = {}
    radii: dict[str, float] = {}
    for method, (protocol, params) in methods.items():
        for param in ("alpha", "theta"):
            base = params[param]
            cfg = SweepConfig(
                protocol=protocol,
                base_params=params,
                vary=param,
                range=(-rel_half_range * base, rel_half_range * base, steps),
                metric=Metric.CONCURRENCE_SQUARED,
            )
            result = run_sweep(cfg)
            rows.extend(
                ComparisonRow(
                    method=method,
                    param=param,
                    epsilon=r.epsilon,
                    concurrence=r.concurrence,
                    concurrence_sq=r.concurrence_sq,
                    bus_spread=r.bus_spread,
                )
                for r in result.rows
            )
            # quote curvature against relative error
            curvatures[f"{method}_{param}"] = result.fitted_curvature * base * base
            radii[f"{method}_{param}"] = tolerance_radius(
                lambda x, pr=protocol, pa=params, v=param: _sweep_concurrence(pr, pa, v, x)
            )

    square_seq, square_bus0 = build_protocol(Provenance.SQUARE_PATH, square_params)
    _, square_final = run_simulation(square_seq, square_bus0)
    traced = concurrence_traced(reduce_to_qubits(square_final))
    return MethodComparison(
        specific_params=spec_params,
        square_params=square_params,
        curvatures=curvatures,
        radii=radii,
        radius_ratio_alpha=radii["specific_alpha"] / radii["square_alpha"],
        radius_ratio_theta=radii["specific_theta"] / radii["square_theta"],
        square_bus_spread=bus_spread(square_final),
        square_traced_concurrence=traced,
        square_concurrence_deficit=1.0 - traced,
        rows=tuple(rows),
    )


# --- randomized branch-vs-Fock verification --------------------------------


@dataclass(frozen=True)
class OracleReport:
    trials: int
    seed: int
    max_trace_distance: float
    tolerance: float
    failures: tuple[str, ...]

    @property
    def passed(self) -> bool:
        return not self.failures and self.max_trace_distance < self.tolerance

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "seed": self.seed,
            "max_trace_distance": self.max_trace_distance,
            "tolerance": self.tolerance,
            "failures": list(self.failures),
            "passed": self.passed,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)


def _random_unit_disk(rng: np.random.Generator, radius: float) -> complex:
    while True:
        z = complex(rng.uniform(-radius, radius), rng.uniform(-radius, radius))
        if abs(z) <= radius:
            return z


def _random_trial(rng: np.random.Generator):
    """One random initial state plus op list, with the total displacement
    budget capped so the excursion (and hence the cutoff) stays bounded."""
    alpha = _random_unit_disk(rng, 3.0)
    raw = rng.normal(size=4) + 1j * rng.normal(size=4)
    coeffs = tuple(raw / np.linalg.norm(raw))
    ops = []
    for _ in range(int(rng.integers(0, 11))):
        if rng.random() < 0.5:
            ops.append(
                ControlledRotation(
                    qubit=int(rng.integers(1, 3)),
                    angle=float(rng.uniform(-math.pi, math.pi)),
                )
            )
        else:
            ops.append(Displacement(_random_unit_disk(rng, 3.0)))
    total_shift = sum(abs(op.shift) for op in ops if isinstance(op, Displacement))
    budget = max(0.2, 6.2 - abs(alpha))
    if total_shift > budget:
        scale = budget / total_shift
        ops = [
            Displacement(op.shift * scale) if isinstance(op, Displacement) else op
            for op in ops
        ]
    return alpha, coeffs, ops


def verify_oracle(trials: int, seed: int, force_cutoff: Optional[int] = None) -> OracleReport:
    """Randomized branch-vs-Fock agreement check on reduced qubit states.

    Each trial evolves the same random initial state and op list through
    both representations and records the trace distance between the two
    reduced density matrices.  The Fock cutoff follows the six-sigma
    rule on the largest amplitude reached (measured by a branch-space
    dry run) plus a fixed safety margin; ``force_cutoff`` overrides it
    (for exercising the truncation error paths).  Deterministic for a
    given seed.
    """
    if trials < 1:
        raise ValueError("need at least one trial")
    rng = np.random.default_rng(seed)
    max_distance = 0.0
    failures: list[str] = []
    for index in range(trials):
        alpha, coeffs, ops = _random_trial(rng)
        branch = make_initial(coeffs, alpha)
        max_magnitude = abs(alpha)
        for op in ops:
            branch = apply_op(branch, op)
            max_magnitude = max(max_magnitude, max(abs(b) for b in branch.buses()))
        cutoff = force_cutoff if force_cutoff is not None else (
            recommended_cutoff(max_magnitude) + _CUTOFF_MARGIN
        )
        try:
            fock = fock_initial(coeffs, alpha, cutoff)
            for op in ops:
                fock = fock_apply(fock, op)
        except QubusError as exc:
            failures.append(f"trial {index}: {type(exc).__name__}: {exc}")
            continue
        distance = trace_distance(reduce_to_qubits(branch), fock_reduce(fock))
        max_distance = max(max_distance, distance)
        if distance > _ORACLE_TOL:
            failures.append(
                f"trial {index}: trace distance {distance:.3e} exceeds {_ORACLE_TOL}"
            )
    return OracleReport(
        trials=trials,
        seed=seed,
        max_trace_distance=max_distance,
        tolerance=_ORACLE_TOL,
        failures=tuple(failures),
    )
