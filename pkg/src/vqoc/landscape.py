"""Optimization-landscape diagnostics."""

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from . import ansatz as _ansatz
from .circuit import build_hardware_efficient, evaluate_circuit
from .errors import ResourceLimitError, check_dense
from .pauli import PauliString, PauliSum, to_dense
from .state import StateVector, expectation

GRAD_STEP = 1e-5
HESS_STEP = 1e-4


def _eval(objective, x, where):
    val = float(objective(x))
    if not np.isfinite(val):
        raise FloatingPointError(f"objective is {val} at {where}: x={x.tolist()}")
    return val


def gradient_fd(objective, x, h=GRAD_STEP):
    """Central differences ``(J(x + h e_i) - J(x - h e_i)) / 2h``."""
    if not h > 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=float)
    g = np.zeros_like(x)
    for i in range(x.size):
        e = np.zeros_like(x)
        e.flat[i] = h
        g.flat[i] = (_eval(objective, x + e, f"+h e_{i}")
                     - _eval(objective, x - e, f"-h e_{i}")) / (2.0 * h)
    return g


def hessian_fd(objective, x, h=HESS_STEP):
    """Second-order central stencil, symmetrized."""
    if not h > 0:
        raise ValueError("step must be positive")
    x = np.asarray(x, dtype=float).reshape(-1)
    k = x.size
    f0 = _eval(objective, x, "x")
    hess = np.zeros((k, k))
    eye = np.eye(k) * h
    for i in range(k):
        fp = _eval(objective, x + eye[i], f"+h e_{i}")
        fm = _eval(objective, x - eye[i], f"-h e_{i}")
        hess[i, i] = (fp - 2.0 * f0 + fm) / h ** 2
        for j in range(i + 1, k):
            fpp = _eval(objective, x + eye[i] + eye[j], f"+e_{i}+e_{j}")
            fpm = _eval(objective, x + eye[i] - eye[j], f"+e_{i}-e_{j}")
            fmp = _eval(objective, x - eye[i] + eye[j], f"-e_{i}+e_{j}")
            fmm = _eval(objective, x - eye[i] - eye[j], f"-e_{i}-e_{j}")
            hess[i, j] = hess[j, i] = (fpp - fpm - fmp + fmm) / (4.0 * h ** 2)
    return 0.5 * (hess + hess.T)


@dataclass
class CriticalPointClass:
    classification: str
    eigenvalues: np.ndarray
    tolerance: float


def classify_critical_point(hess, tol=None):
    """Minimum / maximum / saddle / degenerate from the Hessian spectrum.

    Default tolerance is ``1e-6 * max|eig|`` with an absolute floor of 1e-10.
    """
    hess = np.asarray(hess, dtype=float)
    eig = np.linalg.eigvalsh(0.5 * (hess + hess.T))
    if tol is None:
        tol = max(1e-6 * float(np.max(np.abs(eig), initial=0.0)), 1e-10)
    if np.all(eig > tol):
        kind = "minimum"
    elif np.all(eig < -tol):
        kind = "maximum"
    elif np.any(eig > tol) and np.any(eig < -tol):
        kind = "saddle"
    else:
        kind = "degenerate"
    return CriticalPointClass(kind, eig, tol)


def spectral_weights(psi, h_p, merge_tol=1e-9, drop_below=1e-14):
    """``[(E_n, lambda_n)]``: projector weight of ``psi`` on each eigenspace of H_p.

    Eigenvalues within ``merge_tol`` are merged; weights below ``drop_below``
    are omitted.
    """
    check_dense(h_p.n)
    w, v = np.linalg.eigh(to_dense(h_p))
    amp = np.abs(v.conj().T @ psi.amplitudes) ** 2
    groups = []
    start = 0
    for i in range(1, len(w) + 1):
        if i == len(w) or w[i] - w[i - 1] > merge_tol:
            groups.append((float(np.mean(w[start:i])), float(np.sum(amp[start:i]))))
            start = i
    return [(e, lam) for e, lam in groups if lam >= drop_below]


@dataclass
class SurjectivityReport:
    rank: int
    max_rank: int
    num_params: int
    singular_values: np.ndarray = field(repr=False, default=None)


def local_surjectivity_rank(ansatz, params=None, h=GRAD_STEP, rel_threshold=1e-7, max_qubits=4):
    """Rank of the real Jacobian of vec(U) with respect to all parameters."""
    n = _ansatz.qubits(ansatz)
    if n > max_qubits:
        raise ResourceLimitError(f"{n} qubits exceeds the surjectivity cap of {max_qubits}")
    k = _ansatz.num_params(ansatz)
    d = 1 << n
    if k == 0:
        return SurjectivityReport(0, d * d, 0, np.zeros(0))
    x = _ansatz.current_params(ansatz) if params is None else np.asarray(params, dtype=float)
    jac = np.empty((2 * d * d, k))
    for i in range(k):
        e = np.zeros(k)
        e[i] = h
        du = (_ansatz.ansatz_unitary(ansatz, x + e)
              - _ansatz.ansatz_unitary(ansatz, x - e)).reshape(-1) / (2.0 * h)
        jac[:, i] = np.concatenate([du.real, du.imag])
    sv = np.linalg.svd(jac, compute_uv=False)
    rank = int(np.sum(sv > rel_threshold * sv[0])) if sv[0] > 0 else 0
    return SurjectivityReport(rank, d * d, k, sv)


def local_observable(n, qubit=0, axis="Z"):
    return PauliSum(n, [(1.0, PauliString.from_sparse(n, {qubit: axis}))])


def hardware_efficient_family(layers=None):
    """n -> (hardware-efficient circuit with ``layers`` (default n) layers, parameter count)."""

    def family(n):
        L = n if layers is None else layers
        c = build_hardware_efficient(n, L)
        return c, c.num_params

    return family


@dataclass
class ScanResult:
    records: list          # (n, sample, grad_component, J)
    variance: dict         # n -> sample variance of dJ/dtheta_1
    grad_norm_mean: dict   # n -> mean full-gradient norm (when computed)

    def ns(self):
        return sorted(self.variance)

    def gradients(self, n):
        return np.array([g for m, _, g, _ in self.records if m == n])


def gradient_variance_scan(family, n_range, samples=200, seed=0, observable=None,
                           h=GRAD_STEP, full_gradient=False):
    """Sample variance of dJ/dtheta_1 over uniform angles in [0, 2pi) for each n.

    ``family(n)`` returns ``(circuit, parameter_count)``; ``observable(n)``
    returns H_p (default Z on qubit 0). Sample ``i`` at size ``n`` uses a
    generator seeded by ``(seed, n, i)``, so results do not depend on order.
    """
    if observable is None:
        observable = local_observable
    records = []
    variance = {}
    norms = {}
    for n in n_range:
        circuit, k = family(n)
        h_p = observable(n)
        psi0 = StateVector.zero(n)

        def energy(x, circuit=circuit, h_p=h_p, psi0=psi0):
            return expectation(evaluate_circuit(circuit, x, psi0), h_p)

        grads = []
        nrm = []
        for i in range(samples):
            rng = np.random.default_rng([seed, n, i])
            x = rng.uniform(0.0, 2.0 * np.pi, size=k)
            e = np.zeros(k)
            e[0] = h
            g1 = (energy(x + e) - energy(x - e)) / (2.0 * h)
            records.append((n, i, g1, energy(x)))
            grads.append(g1)
            if full_gradient:
                nrm.append(np.linalg.norm(gradient_fd(energy, x, h)))
        variance[n] = float(np.var(grads, ddof=1)) if samples > 1 else 0.0
        if full_gradient:
            norms[n] = float(np.mean(nrm))
    return ScanResult(records, variance, norms)


def variance_standard_error(values):
    """Standard error of the unbiased sample variance (moment estimate)."""
    x = np.asarray(values, dtype=float)
    m = x.size
    c = x - x.mean()
    m2 = np.mean(c ** 2)
    m4 = np.mean(c ** 4)
    return float(np.sqrt(max(m4 - (m - 3) / (m - 1) * m2 ** 2, 0.0) / m))


def log_variance_trend(result):
    """Least-squares slope of log(variance) against n with its standard error."""
    ns = np.array(result.ns(), dtype=float)
    lv = np.log([result.variance[int(n)] for n in ns])
    fit = stats.linregress(ns, lv)
    return float(fit.slope), float(fit.stderr)
