"""Adiabatic evolution along H(t/T), clock measurement, and the end-to-end pipeline.

We integrate i dpsi/dt = H psi (``sign=+1``); ``sign=-1`` flips the
convention and yields the complex-conjugate trajectory.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse.linalg as spla

from .circuit import Circuit, pad_identities, simulate, to_grid_layout
from .errors import GuardError, NumericalError, ValidationError
from .local_hamiltonian import HamiltonianSum, assemble, compress, norm_bound
from .spectral.eigen import DENSE_MAX, eigen_low
from .spectral.profile import gap_profile
from .spectral.restrict import (
    SubspaceBasis,
    _clock_positions,
    history_basis,
    legal_clock_basis,
    restricted_endpoints,
)

__all__ = [
    "EvolutionConfig",
    "EvolutionResult",
    "MeasurementOutcome",
    "Frame",
    "evolution_frame",
    "evolve",
    "measure_clock",
    "required_T_estimate",
    "search_T",
    "TSearch",
    "run_pipeline",
    "build_program",
    "steps_for",
]

VECTOR_CAP = 2 ** 20


@dataclass(frozen=True)
class EvolutionConfig:
    T: float
    steps: int
    delta: float = 0.1
    norm_tol: float = 1e-9
    sign: int = 1
    representation: str = "auto"

    def __post_init__(self):
        if not (self.T > 0 and math.isfinite(self.T)):
            raise ValidationError(f"T must be positive, got {self.T}")
        if int(self.steps) != self.steps or self.steps < 1:
            raise ValidationError(f"steps must be a positive integer, got {self.steps}")
        if self.sign not in (1, -1):
            raise ValidationError("sign must be +1 or -1")
        if not self.delta > 0:
            raise ValidationError("delta must be positive")
        if self.representation not in ("auto", "full", "legal"):
            raise ValidationError(f"unknown representation {self.representation!r}")


@dataclass(frozen=True)
class Frame:
    """The space a run lives in: the full space (``basis`` None) or the span of
    a SubspaceBasis that H(s) leaves invariant."""

    kind: str
    basis: SubspaceBasis | None
    A0: object
    A1: object
    dense: bool
    initial_position: int

    @property
    def dim(self):
        return self.A0.shape[0]

    @property
    def scale(self):
        """Operator-norm scale used to size time steps."""
        if self.dense:
            return float(max(np.linalg.norm(self.A0, 2), np.linalg.norm(self.A1, 2)))
        return float(max(spla.norm(self.A0, 1), spla.norm(self.A1, 1)))


FRAMES = ("auto", "full", "legal", "history")


def evolution_frame(program, representation="auto"):
    """Pick where to integrate.

    For the five-local flavour both the legal-clock coordinates and the span
    of the j=0 history states are invariant under every H(s), and gamma_0
    lies in the latter, so compressing onto either is exact. The other
    flavours leak out of these subspaces and need the full space.
    """
    if representation not in FRAMES:
        raise ValidationError(f"unknown frame {representation!r}")
    if representation == "auto":
        representation = "history" if program.flavor == "5local" else "full"
    if representation in ("legal", "history"):
        if program.flavor != "5local":
            raise ValidationError(f"the {representation} frame is only invariant for the five-local flavour")
        basis = history_basis(program, 0) if representation == "history" else legal_clock_basis(program)
        A0, A1 = restricted_endpoints(program, basis)
        return Frame(representation, basis, A0, A1, True, 0)
    if program.dim > VECTOR_CAP:
        raise GuardError("vector_cap", f"dimension {program.dim} exceeds {VECTOR_CAP}")
    gamma0 = int(_clock_positions(program)[0][0])  # all computational bits 0 at clock value 0
    A0, A1 = assemble(program.h_init), assemble(program.h_final)
    if program.dim <= DENSE_MAX:
        return Frame("full", None, A0.toarray(), A1.toarray(), True, gamma0)
    return Frame("full", None, A0, A1, False, gamma0)


@dataclass(frozen=True)
class EvolutionResult:
    T: float
    steps: int
    state: np.ndarray = field(repr=False)
    frame: Frame = field(repr=False)
    fidelity: float = 0.0
    norm_drift: float = 0.0
    runtime_metric: float = 0.0
    runtime_metric_exact: bool = True
    sign: int = 1

    def full_state(self):
        return self.state if self.frame.basis is None else self.frame.basis.lift(self.state)


def _max_norm(program, frame):
    """max_s ||H(s)|| = max(||H_init||, ||H_final||) by convexity of the norm."""
    if frame.kind == "full" and frame.dense:
        return frame.scale, True
    return max(norm_bound(program.h_init), norm_bound(program.h_final)), False


def evolve(program, config, frame=None):
    """Midpoint piecewise-constant propagation from the product state gamma_0."""
    frame = frame or evolution_frame(program, config.representation)
    N, T = int(config.steps), float(config.T)
    dt = T / N
    psi = np.zeros(frame.dim, dtype=complex)
    psi[frame.initial_position] = 1.0
    phase = -1j * config.sign * dt
    for k in range(N):
        s = (k + 0.5) / N
        H = (1.0 - s) * frame.A0 + s * frame.A1
        if frame.dense:
            w, v = np.linalg.eigh(H)
            psi = v @ (np.exp(phase * w) * (v.conj().T @ psi))
        else:
            psi = spla.expm_multiply(phase * H, psi)
    drift = abs(float(np.linalg.norm(psi)) - 1.0)
    if drift > config.norm_tol:
        raise NumericalError(f"norm drift {drift:.3g} exceeds {config.norm_tol:g}")
    ground = eigen_low(frame.A1, k=1).ground_state
    fid = float(abs(np.vdot(ground, psi)))
    metric, exact = _max_norm(program, frame)
    return EvolutionResult(T, N, psi, frame, fid, drift, T * float(metric), exact, config.sign)


def required_T_estimate(norm_diff, gap_min, epsilon, delta=0.1):
    """||H_final - H_init||^(1+delta) / (epsilon^delta * gap^(2+delta)), unit constant.

    A scaling estimate only; the true constant is unknown.
    """
    if gap_min <= 0 or epsilon <= 0 or delta <= 0 or norm_diff < 0:
        raise ValidationError("need gap > 0, epsilon > 0, delta > 0, norm >= 0")
    return norm_diff ** (1 + delta) / (epsilon ** delta * gap_min ** (2 + delta))


@dataclass(frozen=True)
class MeasurementOutcome:
    histogram: np.ndarray  # probability per clock value
    p_illegal: float
    p_success: float
    L_success: int
    conditional: tuple  # per clock value, normalized computational state or None
    trace_distance: float
    target: np.ndarray = field(repr=False, default=None)

    def to_dict(self):
        return {
            "p_success": self.p_success,
            "trace_distance": self.trace_distance,
            "p_illegal": self.p_illegal,
            "clock_histogram": self.histogram.tolist(),
        }


def _trace_distance(rho, target):
    sigma = np.outer(target, target.conj())
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(rho - sigma))))


def measure_clock(state, program, basis=None, L_success=None):
    """Clock statistics of ``state`` (full vector, or coordinates in ``basis``).

    The success event is a clock value >= L_success (default: the program's
    L_original); the reduced computational state on that event is compared
    with the circuit's output.
    """
    state = np.asarray(state, dtype=complex)
    if basis is None:
        if state.size != program.dim:
            raise ValidationError(f"state length {state.size} != {program.dim}")
        lookup = None
    else:
        if state.size != basis.m:
            raise ValidationError(f"state length {state.size} != basis size {basis.m}")
        local = basis.coeffs @ state
        lookup = {int(g): i for i, g in enumerate(basis.indices)}
    pos = _clock_positions(program)
    L = program.L
    Ls = program.L_original if L_success is None else L_success
    if not 0 <= Ls <= L:
        raise ValidationError(f"success threshold {Ls} outside [0, {L}]")
    hist = np.zeros(L + 1)
    cond = []
    amps = []
    for ell in range(L + 1):
        if lookup is None:
            a = state[pos[ell]]
        else:
            a = np.array([local[lookup[int(g)]] if int(g) in lookup else 0.0 for g in pos[ell]], dtype=complex)
        p = float(np.vdot(a, a).real)
        hist[ell] = p
        amps.append(a)
        cond.append(a / math.sqrt(p) if p > 0 else None)
    total = float(np.vdot(state, state).real)
    p_illegal = max(0.0, total - float(hist.sum()))
    p_succ = float(hist[Ls:].sum())
    circ = program.circuit.as_circuit() if hasattr(program.circuit, "as_circuit") else program.circuit
    target = simulate(circ).states[-1]
    if p_succ > 0:
        rho = sum(np.outer(a, a.conj()) for a in amps[Ls:]) / p_succ
        td = _trace_distance(rho, target)
    else:
        td = 1.0
    return MeasurementOutcome(hist, p_illegal, p_succ, Ls, tuple(cond), td, target)


def steps_for(T, H_scale, per_unit=2.0, minimum=200):
    """Step count keeping dt * ||H|| bounded."""
    return max(minimum, int(math.ceil(per_unit * T * max(H_scale, 1.0))))


@dataclass(frozen=True)
class TSearch:
    runs: tuple  # (T, steps, fidelity, p_success, trace_distance)
    found: bool
    result: EvolutionResult | None
    measurement: MeasurementOutcome | None

    @property
    def fidelities(self):
        return [r[2] for r in self.runs]


def search_T(program, accept, T0=10.0, budget_factor=2 ** 14, per_unit=2.0, delta=0.1, frame=None, sign=1):
    """Double T from T0 until ``accept(result, measurement)`` or T exceeds the budget."""
    frame = frame or evolution_frame(program)
    scale = frame.scale
    runs = []
    T = float(T0)
    while T <= T0 * budget_factor:
        cfg = EvolutionConfig(T, steps_for(T, scale, per_unit), delta=delta, sign=sign)
        res = evolve(program, cfg, frame)
        meas = measure_clock(res.state, program, frame.basis)
        runs.append((T, cfg.steps, res.fidelity, meas.p_success, meas.trace_distance))
        if accept(res, meas):
            return TSearch(tuple(runs), True, res, meas)
        T *= 2
    return TSearch(tuple(runs), False, None, None)


def build_program(circuit, flavor, epsilon, J=None, J_power=6):
    """Pad ``circuit`` for ``epsilon`` and compile it to ``flavor``."""
    from .grid6 import build_grid_program, pad_grid_rounds
    from .kitaev3 import build_3local
    from .kitaev5 import build_5local

    if flavor == "grid":
        layout = to_grid_layout(circuit)
        padded = pad_grid_rounds(layout, epsilon)
        return build_grid_program(padded, epsilon, J, L_original=layout.L, J_power=J_power)
    padded = pad_identities(circuit, epsilon)
    if flavor == "5local":
        return build_5local(padded, L_original=circuit.L, epsilon=epsilon)
    if flavor == "3local":
        return build_3local(padded, epsilon, J, L_original=circuit.L, J_power=J_power)
    raise ValidationError(f"unknown flavor {flavor!r}")


def _difference_norm(program, frame):
    if frame.kind == "full" and frame.dense:
        return float(np.linalg.norm(frame.A1 - frame.A0, 2))
    init = {t.key(): t for t in program.h_init.terms}
    terms = []
    for t in program.h_final.terms:
        if t.key() in init and init.pop(t.key()).coefficient == t.coefficient:
            continue
        terms.append(t)
    terms.extend(t.with_coefficient(-t.coefficient) for t in init.values())
    return norm_bound(HamiltonianSum(program.N, program.d, terms))


def run_pipeline(circuit, flavor="5local", epsilon=0.2, J=None, samples=101, T0=10.0,
                 budget_factor=2 ** 14, trace_target=None, success_target=None, delta=0.1):
    """pad -> build -> gap profile -> T estimate -> T doubling search -> measurement report."""
    if not isinstance(circuit, Circuit):
        raise ValidationError("run_pipeline needs a Circuit")
    program = build_program(circuit, flavor, epsilon, J)
    mode = "S0"
    prof = gap_profile(program, mode, samples)
    frame = evolution_frame(program)
    dnorm = _difference_norm(program, frame)
    T_est = required_T_estimate(dnorm, prof.min_gap, epsilon, delta) if prof.min_gap > 0 else math.inf
    td_goal = epsilon / 2 if trace_target is None else trace_target
    ps_goal = 1 - epsilon / 2 if success_target is None else success_target

    def accept(res, meas):
        return meas.trace_distance <= td_goal and meas.p_success >= ps_goal

    search = search_T(program, accept, T0, budget_factor, delta=delta, frame=frame)
    report = {
        "flavor": flavor,
        "epsilon": epsilon,
        "n": program.n,
        "L": program.L,
        "L_original": program.L_original,
        "J": program.J,
        "gap_mode": mode,
        "min_gap": prof.min_gap,
        "argmin_s": prof.argmin_s,
        "norm_diff": dnorm,
        "T_estimate": T_est,
        "targets": {"trace_distance": td_goal, "p_success": ps_goal},
        "sweep": [
            {"T": T, "steps": N, "fidelity": f, "p_success": p, "trace_distance": d}
            for T, N, f, p, d in search.runs
        ],
        "found": search.found,
    }
    if search.found:
        res, meas = search.result, search.measurement
        report.update(
            {
                "T": res.T,
                "steps": res.steps,
                "fidelity": res.fidelity,
                "norm_drift": res.norm_drift,
                "runtime_metric": res.runtime_metric,
                "runtime_metric_exact": res.runtime_metric_exact,
                "measurement": meas.to_dict(),
            }
        )
    return report
