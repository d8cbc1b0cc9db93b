"""The quantum-classical optimization loop.

Objectives are evaluated exactly or from simulated shots; parameters are
updated by projected gradient descent with backtracking or by Nelder-Mead.
"""

import json
import math
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from . import ansatz as _ansatz
from .circuit import Circuit
from .landscape import gradient_fd
from .level_maps import CircuitSegment, HybridAnsatz
from .pauli import lambda_norm
from .state import StateVector, expectation, measure_shots, pauli_expectation

CONVERGENCE_DJ = 1e-9
CONVERGENCE_WINDOW = 5
CONVERGENCE_GRAD = 1e-7


def shots_required(lam, epsilon):
    """ceil(lambda**2 / epsilon**2) with a floor of one shot."""
    if not epsilon > 0:
        raise ValueError(f"target precision must be positive, got {epsilon}")
    if lam < 0:
        raise ValueError("lambda must be nonnegative")
    q = (lam / epsilon) ** 2
    # absorb float dust so that e.g. (1.5 / 0.05)**2 counts as 900
    r = round(q)
    if abs(q - r) <= 1e-9 * max(q, 1.0):
        q = r
    return max(1, math.ceil(q))


def control_precision_fidelity(d, delta):
    """State fidelity 1 / (1 + (d - 1) delta**2) under a uniform per-entry error."""
    if d < 1 or delta < 0:
        raise ValueError("need d >= 1 and delta >= 0")
    return 1.0 / (1.0 + (d - 1) * delta * delta)


def precision_for_fidelity(d, fidelity):
    """Per-entry error that yields ``fidelity`` in dimension ``d`` (inverse of the above)."""
    if d < 2 or not 0 < fidelity <= 1:
        raise ValueError("need d >= 2 and 0 < fidelity <= 1")
    return math.sqrt((1.0 / fidelity - 1.0) / (d - 1))


@dataclass
class ObjectiveSpec:
    """Problem Hamiltonian, initial state and evaluation mode.

    ``mode`` is "exact" or "sampled". Sampled mode needs ``epsilon`` (total
    shots from ``shots_required``) or an explicit ``shots_per_term``.
    """

    h_p: object
    psi0: StateVector = None
    mode: str = "exact"
    epsilon: float = None
    shots_per_term: int = None
    seed: int = 0
    allocation: str = "equal"

    def __post_init__(self):
        if self.mode not in ("exact", "sampled"):
            raise ValueError(f"unknown mode {self.mode!r}")
        if self.mode == "sampled":
            if self.shots_per_term is None and not (self.epsilon is not None and self.epsilon > 0):
                raise ValueError("sampled mode needs epsilon > 0 or shots_per_term")
            if self.shots_per_term is not None and self.shots_per_term < 1:
                raise ValueError("shots_per_term must be >= 1")
        if self.allocation not in ("equal", "weighted"):
            raise ValueError(f"unknown shot allocation {self.allocation!r}")
        if self.psi0 is None:
            self.psi0 = StateVector.zero(self.h_p.n)

    def term_shots(self):
        """Shots assigned to each non-identity term, in canonical term order."""
        measured = [(c, s) for c, s in self.h_p.terms if not s.is_identity()]
        if not measured:
            return []
        if self.shots_per_term is not None:
            return [self.shots_per_term] * len(measured)
        total = shots_required(lambda_norm(self.h_p), self.epsilon)
        if self.allocation == "equal":
            return [math.ceil(total / len(measured))] * len(measured)
        lam = sum(abs(c) for c, _ in measured)
        return [max(1, math.ceil(total * abs(c) / lam)) for c, _ in measured]


def sampled_expectation(spec, state, seed):
    """Weighted sum of per-term shot estimates; returns (estimate, shots)."""
    total = 0.0
    used = 0
    shots = iter(spec.term_shots())
    for j, (c, s) in enumerate(spec.h_p.terms):
        if s.is_identity():
            total += c
            continue
        k = next(shots)
        total += c * measure_shots(state, s, k, seed=[*np.atleast_1d(seed).tolist(), j])
        used += k
    return total, used


def predicted_standard_deviation(spec, state):
    """Binomial prediction sqrt(sum_j alpha_j**2 (1 - <P_j>**2) / shots_j)."""
    var = 0.0
    shots = iter(spec.term_shots())
    for c, s in spec.h_p.terms:
        if s.is_identity():
            continue
        m = pauli_expectation(state, s)
        var += c * c * max(1.0 - m * m, 0.0) / next(shots)
    return math.sqrt(var)


def evaluate_objective(spec, ansatz, params, seed=None):
    """(J, shots used) at ``params``; exact mode uses no shots."""
    state = _ansatz.prepare_state(ansatz, params, spec.psi0)
    if spec.mode == "exact":
        return expectation(state, spec.h_p), 0
    return sampled_expectation(spec, state, spec.seed if seed is None else seed)


@dataclass
class IterationRecord:
    iter: int
    params: np.ndarray
    J: float
    grad_norm: float
    shots: int
    wall_time: float = 0.0

    def to_dict(self):
        return {"iter": self.iter, "params": [float(x) for x in self.params],
                "J": float(self.J), "grad_norm": float(self.grad_norm), "shots": int(self.shots)}


@dataclass
class OptimizationTrace:
    iterations: list = field(default_factory=list)
    status: str = "max-iterations"
    restart: int = 0
    restart_finals: list = field(default_factory=list)

    @property
    def best(self):
        return min(self.iterations, key=lambda r: r.J)

    @property
    def final(self):
        return self.iterations[-1]

    @property
    def best_params(self):
        return self.best.params

    @property
    def best_J(self):
        return self.best.J

    @property
    def total_shots(self):
        return sum(r.shots for r in self.iterations)

    def j_values(self):
        return np.array([r.J for r in self.iterations])

    def summary(self):
        return {
            "status": self.status,
            "best_J": float(self.best_J),
            "best_params": [float(x) for x in self.best_params],
            "iterations": len(self.iterations),
            "restart": self.restart,
            "restart_finals": [float(x) for x in self.restart_finals],
            "total_shots": int(self.total_shots),
        }

    def to_jsonl(self):
        lines = [json.dumps(r.to_dict()) for r in self.iterations]
        lines.append(json.dumps({"summary": self.summary()}))
        return "\n".join(lines) + "\n"


@dataclass
class MethodConfig:
    method: str = "gd"            # "gd" or "nelder-mead"
    max_iter: int = 500
    restarts: int = None          # default: 1 exact, 5 sampled
    x0: np.ndarray = None
    seed: int = 0
    bounds: tuple = None          # (low, high) box for projected GD
    step0: float = 0.1
    fd_step: float = None         # default 1e-5 exact, 0.1 sampled
    armijo: float = 1e-4
    threads: int = 1


def initial_params(ansatz, rng):
    """Uniform [0, 2pi) for circuit angles, [-1, 1] for pulse amplitudes."""
    k = _ansatz.num_params(ansatz)
    if isinstance(ansatz, Circuit):
        return rng.uniform(0.0, 2.0 * np.pi, size=k)
    if isinstance(ansatz, HybridAnsatz):
        angles = {p for seg in ansatz.segments if isinstance(seg, CircuitSegment)
                  for p in seg.param_names}
        return np.array([rng.uniform(0.0, 2.0 * np.pi) if p in angles else rng.uniform(-1.0, 1.0)
                         for p in ansatz.param_names])
    return rng.uniform(-1.0, 1.0, size=k)


class _Evaluator:
    """Objective/gradient closure with deterministic per-evaluation seeds."""

    def __init__(self, spec, ansatz, cfg, restart):
        self.spec = spec
        self.ansatz = ansatz
        self.restart = restart
        self.count = 0
        self.shots = 0
        sampled = spec.mode == "sampled"
        self.fd_step = cfg.fd_step if cfg.fd_step is not None else (0.1 if sampled else 1e-5)

    def __call__(self, x):
        seed = [self.spec.seed, self.restart, self.count]
        self.count += 1
        j, used = evaluate_objective(self.spec, self.ansatz, x, seed=seed)
        self.shots += used
        return j

    def gradient(self, x):
        if self.spec.mode == "exact":
            g = _ansatz.analytic_gradient(self.ansatz, x, self.spec.h_p, self.spec.psi0)
            if g is not None:
                return g
        return gradient_fd(self, x, self.fd_step)

    def take_shots(self):
        s, self.shots = self.shots, 0
        return s


def _project(x, bounds):
    return x if bounds is None else np.clip(x, bounds[0], bounds[1])


def _converged(history):
    if len(history) <= CONVERGENCE_WINDOW:
        return False
    recent = np.abs(np.diff(history[-(CONVERGENCE_WINDOW + 1):]))
    return bool(np.all(recent < CONVERGENCE_DJ))


def _gradient_descent(ev, x, cfg):
    trace = OptimizationTrace()
    t0 = time.perf_counter()
    x = _project(np.asarray(x, dtype=float), cfg.bounds)
    j = ev(x)
    if not np.isfinite(j):
        trace.status = "aborted"
        raise FloatingPointError(f"non-finite objective at start: {j}")
    g = ev.gradient(x)
    trace.iterations.append(IterationRecord(0, x.copy(), j, np.linalg.norm(g), ev.take_shots(),
                                            time.perf_counter() - t0))
    history = [j]
    step = cfg.step0
    for it in range(1, cfg.max_iter + 1):
        gnorm = np.linalg.norm(g)
        if gnorm < CONVERGENCE_GRAD:
            trace.status = "converged"
            return trace
        t_start = time.perf_counter()
        step = min(step * 2.0, 1e3)
        while True:
            x_new = _project(x - step * g, cfg.bounds)
            j_new = ev(x_new)
            if not np.isfinite(j_new):
                trace.status = "aborted"
                raise FloatingPointError(f"non-finite objective at iteration {it}")
            if j_new <= j + cfg.armijo * float(g @ (x_new - x)):
                break
            step *= 0.5
            if step < 1e-14:
                trace.status = "stalled"
                return trace
        x, j = x_new, j_new
        g = ev.gradient(x)
        trace.iterations.append(IterationRecord(it, x.copy(), j, np.linalg.norm(g),
                                                ev.take_shots(), time.perf_counter() - t_start))
        history.append(j)
        if _converged(history):
            trace.status = "converged"
            return trace
    trace.status = "max-iterations"
    return trace


def _nelder_mead(ev, x, cfg):
    trace = OptimizationTrace()
    x = np.asarray(x, dtype=float)
    cache = {}

    def f(v):
        key = v.tobytes()
        if key not in cache:
            cache[key] = ev(v)
        return cache[key]

    j0 = f(x)
    trace.iterations.append(IterationRecord(0, x.copy(), j0, float("nan"), ev.take_shots()))
    history = [j0]
    state = {"t": time.perf_counter(), "stop": False}

    def callback(xk):
        j = f(xk)
        it = len(trace.iterations)
        now = time.perf_counter()
        trace.iterations.append(IterationRecord(it, xk.copy(), j, float("nan"),
                                                ev.take_shots(), now - state["t"]))
        state["t"] = now
        history.append(j)
        if _converged(history):
            state["stop"] = True
            raise StopIteration

    bounds = None
    if cfg.bounds is not None:
        bounds = [tuple(cfg.bounds)] * x.size
    res = minimize(f, x, method="Nelder-Mead", callback=callback, bounds=bounds,
                   options={"maxiter": cfg.max_iter, "xatol": 1e-10, "fatol": CONVERGENCE_DJ})
    if state["stop"] or res.success:
        trace.status = "converged"
    else:
        trace.status = "max-iterations"
    return trace


def _run_once(spec, ansatz, cfg, restart):
    rng = np.random.default_rng([cfg.seed, restart])
    if cfg.x0 is not None and restart == 0:
        x = np.asarray(cfg.x0, dtype=float)
    else:
        x = initial_params(ansatz, rng)
    ev = _Evaluator(spec, ansatz, cfg, restart)
    if cfg.method == "gd":
        trace = _gradient_descent(ev, x, cfg)
    elif cfg.method in ("nelder-mead", "simplex"):
        trace = _nelder_mead(ev, x, cfg)
    else:
        raise ValueError(f"unknown optimization method {cfg.method!r}")
    trace.restart = restart
    return trace


def optimize(spec, ansatz, cfg=None, **kw):
    """Minimize J over the ansatz parameters; returns the best restart's trace.

    ``cfg`` is a ``MethodConfig`` (keyword overrides accepted). Restarts run
    on up to ``cfg.threads`` threads and are merged by restart index.
    """
    cfg = MethodConfig(**kw) if cfg is None else cfg
    restarts = cfg.restarts
    if restarts is None:
        restarts = 5 if spec.mode == "sampled" else 1
    if cfg.threads > 1 and restarts > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as pool:
            traces = list(pool.map(lambda r: _run_once(spec, ansatz, cfg, r), range(restarts)))
    else:
        traces = [_run_once(spec, ansatz, cfg, r) for r in range(restarts)]
    best = min(traces, key=lambda t: (t.best_J, t.restart))
    best.restart_finals = [t.best_J for t in traces]
    return best
