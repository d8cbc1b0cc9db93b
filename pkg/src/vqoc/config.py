"""Experiment configuration files.

A config is TOML (or the same schema as JSON, chosen by a ``.json``
suffix). Relative paths resolve against the config file's directory.
Building collects every problem as a diagnostic instead of stopping at the
first one.
"""

import json
import sys
import warnings
from dataclasses import dataclass, field
from pathlib import Path

from .circuit import build_h2_circuit, build_hardware_efficient, build_qaoa, load_circuit
from .errors import ParseError, dense_cap
from .level_maps import hybridize
from .pauli import PauliString, PauliSum, load_pauli_sum
from .pulse import ControlSystem, load_schedule
from .state import StateVector

if sys.version_info >= (3, 11):
    import tomllib
else:
    import tomli as tomllib

KINDS = ("vqe", "qaoa", "pulse", "hybrid", "digitize-study", "controllability", "landscape-scan")
OPTIMIZING = ("vqe", "qaoa", "pulse", "hybrid")


@dataclass
class Diagnostic:
    field: str
    message: str
    files: tuple = ()
    resource: bool = False

    def __str__(self):
        where = f" [{', '.join(self.files)}]" if self.files else ""
        return f"{self.field}: {self.message}{where}"


@dataclass
class ExperimentConfig:
    kind: str
    raw: dict
    base_dir: Path
    source: str
    seed: int = 0
    out: Path = None
    built: dict = field(default_factory=dict)

    def section(self, name):
        value = self.raw.get(name, {})
        return value if isinstance(value, dict) else {}


def load_config(path):
    """Parse the file; raises ``ParseError`` with line/column on syntax errors."""
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ParseError(f"cannot read config: {exc.strerror}", source=str(path)) from exc
    if path.suffix.lower() == ".json":
        try:
            raw = json.loads(text)
        except json.JSONDecodeError as exc:
            raise ParseError(exc.msg, exc.lineno, exc.colno, str(path)) from exc
    else:
        try:
            raw = tomllib.loads(text)
        except tomllib.TOMLDecodeError as exc:
            line, col = _toml_position(exc, text)
            raise ParseError(str(exc).split(" (at line")[0], line, col, str(path)) from exc
    if not isinstance(raw, dict):
        raise ParseError("config must be a table/object at top level", source=str(path))
    kind = raw.get("kind")
    seed = raw.get("seed", 0)
    out = raw.get("out")
    base = path.resolve().parent
    return ExperimentConfig(
        kind=kind if isinstance(kind, str) else None,
        raw=raw,
        base_dir=base,
        source=str(path),
        seed=seed if isinstance(seed, int) and not isinstance(seed, bool) else 0,
        out=(base / out) if isinstance(out, str) else None,
    )


def _toml_position(exc, text):
    lineno = getattr(exc, "lineno", None)
    colno = getattr(exc, "colno", None)
    if lineno is None:
        msg = str(exc)
        if "(at line" in msg:
            tail = msg.rsplit("(at line", 1)[1]
            parts = tail.replace(")", "").replace("column", "").split(",")
            try:
                lineno, colno = int(parts[0]), int(parts[1])
            except (ValueError, IndexError):
                pass
        elif "(at end of document)" in msg:
            lineno = text.count("\n") + 1
    return lineno, colno


class _Builder:
    def __init__(self, cfg):
        self.cfg = cfg
        self.diags = []

    def err(self, fld, msg, files=(), resource=False):
        self.diags.append(Diagnostic(fld, msg, tuple(files), resource))

    def path(self, fld, value):
        if not isinstance(value, str):
            self.err(fld, "expected a file path string")
            return None
        p = self.cfg.base_dir / value
        if not p.is_file():
            self.err(fld, f"file not found: {value}", [str(p)])
            return None
        return p

    def number(self, sec, key, fld, required=True, positive=False, integer=False, default=None):
        if key not in sec:
            if required:
                self.err(fld, "required field missing")
            return default
        v = sec[key]
        ok = isinstance(v, int) if integer else isinstance(v, (int, float))
        if isinstance(v, bool) or not ok:
            self.err(fld, f"expected {'an integer' if integer else 'a number'}, got {v!r}")
            return default
        if positive and not v > 0:
            self.err(fld, f"must be > 0, got {v!r}")
            return default
        return v

    def pauli(self, fld, value):
        p = self.path(fld, value)
        if p is None:
            return None
        try:
            return load_pauli_sum(p)
        except ParseError as exc:
            self.err(fld, str(exc), [str(p)])
            return None

    def cap(self, n, fld):
        if n is not None and n > dense_cap():
            self.err(fld, f"{n} qubits exceeds the dense cap {dense_cap()}", resource=True)

    def problem(self):
        sec = self.cfg.section("problem")
        if "hamiltonian" not in sec:
            self.err("problem.hamiltonian", "required field missing")
            return None, None
        h = self.pauli("problem.hamiltonian", sec["hamiltonian"])
        if h is None:
            return None, None
        self.cap(h.n, "problem.hamiltonian")
        default = "plus" if self.cfg.kind == "qaoa" else "zero"
        init = sec.get("initial_state", default)
        psi0 = None
        if init == "plus":
            psi0 = StateVector.plus(h.n)
        elif init == "zero":
            psi0 = StateVector.zero(h.n)
        elif isinstance(init, str) and set(init) <= {"0", "1"} and len(init) == h.n:
            psi0 = StateVector.basis(h.n, init)
        else:
            self.err("problem.initial_state",
                     f"expected 'plus', 'zero' or a {h.n}-bit string, got {init!r}")
        return h, psi0

    def system(self, require_schedule=False):
        sec = self.cfg.section("system")
        if not sec:
            self.err("system", "required section missing")
            return None, None
        drift = None
        if "drift" in sec:
            drift = self.pauli("system.drift", sec["drift"])
        else:
            self.err("system.drift", "required field missing")
        controls = sec.get("controls")
        ctl = []
        if not isinstance(controls, list) or not controls:
            self.err("system.controls", "expected a non-empty list of Pauli files")
            controls = []
        for i, c in enumerate(controls):
            ctl.append(self.pauli(f"system.controls[{i}]", c))
        T = self.number(sec, "T", "system.T", required=self.cfg.kind != "controllability",
                        positive=True, default=1.0)
        M = self.number(sec, "M", "system.M", required=self.cfg.kind != "controllability",
                        positive=True, integer=True, default=1)
        if drift is None or any(c is None for c in ctl):
            return None, None
        for i, c in enumerate(ctl):
            if c.n != drift.n:
                self.err(f"system.controls[{i}]",
                         f"acts on {c.n} qubits but the drift acts on {drift.n}",
                         [sec["drift"], controls[i]])
                return None, None
        try:
            sys_ = ControlSystem(drift, ctl, T, M)
        except ValueError as exc:
            self.err("system", str(exc))
            return None, None
        sched = None
        if "schedule" in sec:
            p = self.path("system.schedule", sec["schedule"])
            if p is not None:
                try:
                    sched = load_schedule(p)
                except ParseError as exc:
                    self.err("system.schedule", str(exc), [str(p)])
                else:
                    if sched.shape != (sys_.M, sys_.K):
                        self.err("system.schedule",
                                 f"schedule has shape {sched.shape} but the system declares "
                                 f"M={sys_.M} slices and K={sys_.K} controls",
                                 [str(p), self.cfg.source])
                        sched = None
        elif require_schedule:
            self.err("system.schedule", "required field missing")
        return sys_, sched

    def objective(self):
        sec = self.cfg.section("objective")
        mode = sec.get("mode", "exact")
        out = {"mode": mode, "epsilon": None, "shots_per_term": None,
               "allocation": sec.get("allocation", "equal")}
        if mode not in ("exact", "sampled"):
            self.err("objective.mode", f"expected 'exact' or 'sampled', got {mode!r}")
        if out["allocation"] not in ("equal", "weighted"):
            self.err("objective.allocation", "expected 'equal' or 'weighted'")
        if mode == "sampled":
            if "shots_per_term" in sec:
                out["shots_per_term"] = self.number(sec, "shots_per_term",
                                                    "objective.shots_per_term",
                                                    positive=True, integer=True)
            else:
                out["epsilon"] = self.number(sec, "epsilon", "objective.epsilon", positive=True)
        return out

    def optimizer(self):
        sec = self.cfg.section("optimizer")
        out = {}
        method = sec.get("method", "gd")
        if method not in ("gd", "nelder-mead", "simplex"):
            self.err("optimizer.method", f"unknown method {method!r}")
        out["method"] = method
        out["max_iter"] = self.number(sec, "max_iter", "optimizer.max_iter", required=False,
                                      positive=True, integer=True, default=500)
        if "restarts" in sec:
            out["restarts"] = self.number(sec, "restarts", "optimizer.restarts",
                                          positive=True, integer=True)
        if "step0" in sec:
            out["step0"] = self.number(sec, "step0", "optimizer.step0", positive=True)
        if "fd_step" in sec:
            out["fd_step"] = self.number(sec, "fd_step", "optimizer.fd_step", positive=True)
        if "bounds" in sec:
            b = sec["bounds"]
            if (isinstance(b, list) and len(b) == 2
                    and all(isinstance(v, (int, float)) for v in b) and b[0] < b[1]):
                out["bounds"] = (float(b[0]), float(b[1]))
            else:
                self.err("optimizer.bounds", "expected [low, high] with low < high")
        return out

    def circuit_ansatz(self, n_expected):
        sec = self.cfg.section("ansatz")
        if "circuit" in sec:
            p = self.path("ansatz.circuit", sec["circuit"])
            if p is None:
                return None
            try:
                c = load_circuit(p)
            except ParseError as exc:
                self.err("ansatz.circuit", str(exc), [str(p)])
                return None
        else:
            typ = sec.get("type", "hardware_efficient")
            if typ == "h2":
                c = build_h2_circuit(float(sec.get("theta", 0.0)))
            elif typ == "hardware_efficient":
                layers = self.number(sec, "layers", "ansatz.layers", required=False,
                                     positive=True, integer=True, default=1)
                if n_expected is None:
                    return None
                c = build_hardware_efficient(n_expected, layers)
            else:
                self.err("ansatz.type", f"expected 'hardware_efficient' or 'h2', got {typ!r}")
                return None
        if n_expected is not None and c.n != n_expected:
            self.err("ansatz", f"circuit acts on {c.n} qubits, problem on {n_expected}")
            return None
        return c


def build(cfg):
    """Construct every object the experiment needs; returns (built, diagnostics)."""
    b = _Builder(cfg)
    kind = cfg.kind
    if kind not in KINDS:
        b.err("kind", f"expected one of {', '.join(KINDS)}, got {cfg.raw.get('kind')!r}")
        return {}, b.diags
    seed = cfg.raw.get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        b.err("seed", f"expected an integer, got {seed!r}")
    built = {}
    if kind in OPTIMIZING:
        built["objective"] = b.objective()
        built["optimizer"] = b.optimizer()
    if kind in ("vqe", "qaoa", "hybrid"):
        h, psi0 = b.problem()
        built["h_p"], built["psi0"] = h, psi0
        n = h.n if h is not None else None
        if kind == "qaoa":
            sec = cfg.section("ansatz")
            p = b.number(sec, "p", "ansatz.p", positive=True, integer=True, default=1)
            driver = b.pauli("ansatz.driver", sec["driver"]) if "driver" in sec else None
            driver_ok = "driver" not in sec or driver is not None
            if h is not None and driver_ok and p:
                if driver is not None and driver.n != h.n:
                    b.err("ansatz.driver", f"driver acts on {driver.n} qubits, problem on {h.n}")
                else:
                    with warnings.catch_warnings():
                        warnings.simplefilter("ignore")
                        built["ansatz"] = build_qaoa(h, driver, p)
        else:
            c = b.circuit_ansatz(n)
            if kind == "hybrid" and c is not None:
                sel = cfg.section("ansatz").get("select", [])
                if not isinstance(sel, list) or not all(isinstance(i, int) for i in sel):
                    b.err("ansatz.select", "expected a list of gate indices")
                elif any(not 0 <= i < len(c.gates) for i in sel):
                    b.err("ansatz.select", f"gate index out of range for {len(c.gates)} gates")
                else:
                    try:
                        built["ansatz"] = hybridize(c, sel)
                    except ValueError as exc:
                        b.err("ansatz.select", str(exc))
            elif c is not None:
                built["ansatz"] = c
    elif kind == "pulse":
        h, psi0 = b.problem()
        sys_, sched = b.system()
        built.update(h_p=h, psi0=psi0, ansatz=sys_, schedule=sched)
        if h is not None and sys_ is not None and h.n != sys_.n:
            b.err("system", f"system acts on {sys_.n} qubits, problem on {h.n}")
        if sys_ is not None:
            b.cap(sys_.n, "system")
    elif kind == "digitize-study":
        sys_, sched = b.system(require_schedule=True)
        built.update(system=sys_, schedule=sched)
        r = cfg.section("digitize").get("r", [1, 2, 4, 8, 16])
        if not isinstance(r, list) or not r or not all(
                isinstance(x, int) and not isinstance(x, bool) and x >= 1 for x in r):
            b.err("digitize.r", "expected a non-empty list of positive integers")
        built["r"] = r
        if sys_ is not None:
            b.cap(sys_.n, "system")
    elif kind == "controllability":
        sys_, _ = b.system()
        built["system"] = sys_
        sec = cfg.section("controllability")
        built["max_qubits"] = b.number(sec, "max_qubits", "controllability.max_qubits",
                                       required=False, positive=True, integer=True, default=5)
        built["max_rounds"] = b.number(sec, "max_rounds", "controllability.max_rounds",
                                       required=False, positive=True, integer=True, default=64)
    elif kind == "landscape-scan":
        sec = cfg.section("scan")
        n_min = b.number(sec, "n_min", "scan.n_min", positive=True, integer=True, default=2)
        n_max = b.number(sec, "n_max", "scan.n_max", positive=True, integer=True, default=2)
        samples = b.number(sec, "samples", "scan.samples", required=False, positive=True,
                           integer=True, default=200)
        if samples is not None and samples < 30:
            b.err("scan.samples", f"need at least 30 samples for a usable variance, got {samples}")
        if n_min and n_max and n_min > n_max:
            b.err("scan.n_max", f"n_max={n_max} is below n_min={n_min}")
        fam = sec.get("family", "hardware_efficient")
        if fam != "hardware_efficient":
            b.err("scan.family", f"unsupported family {fam!r}")
        layers = b.number(sec, "layers", "scan.layers", required=False, positive=True,
                          integer=True, default=None)
        obs = sec.get("observable", "Z0")
        if not (isinstance(obs, str) and len(obs) >= 2 and obs[0] in "XYZ" and obs[1:].isdigit()):
            b.err("scan.observable", f"expected e.g. 'Z0', got {obs!r}")
            obs = "Z0"
        elif n_min and int(obs[1:]) >= n_min:
            b.err("scan.observable", f"qubit {obs[1:]} does not exist for n={n_min}")
        built.update(n_range=list(range(n_min or 2, (n_max or 2) + 1)), samples=samples,
                     layers=layers, observable=(obs[0], int(obs[1:])))
        if n_max:
            b.cap(n_max, "scan.n_max")
    return built, b.diags


def validate(path):
    """All diagnostics for the config at ``path`` (empty list when valid)."""
    try:
        cfg = load_config(path)
    except ParseError as exc:
        return [Diagnostic("config", str(exc))]
    _, diags = build(cfg)
    return diags


def pauli_observable(n, axis, qubit):
    return PauliSum(n, [(1.0, PauliString.from_sparse(n, {qubit: axis}))])
