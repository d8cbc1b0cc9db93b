"""Command-line front end.

Exit codes: 0 success, 1 runtime error, 2 parse/validation error,
3 resource cap exceeded.
"""

import argparse
import csv
import io
import json
import logging
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .config import build, load_config, pauli_observable
from .controllability import dynamical_lie_algebra
from .driver import MethodConfig, ObjectiveSpec, optimize
from .errors import ParseError, ResourceLimitError
from .landscape import gradient_variance_scan, hardware_efficient_family, log_variance_trend
from .level_maps import digitize, gate_fidelity
from .pauli import PauliSum, load_pauli_sum
from .state import propagator_piecewise

log = logging.getLogger("vqoc")

EXIT_OK, EXIT_RUNTIME, EXIT_INVALID, EXIT_RESOURCE = 0, 1, 2, 3


def _dumps(obj):
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


def _csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for row in rows:
        w.writerow([repr(float(x)) if isinstance(x, (float, np.floating)) else x for x in row])
    return buf.getvalue()


def _run_optimization(cfg, built, threads):
    obj = built["objective"]
    spec = ObjectiveSpec(built["h_p"], built["psi0"], obj["mode"], obj["epsilon"],
                         obj["shots_per_term"], cfg.seed, obj["allocation"])
    opt = dict(built["optimizer"])
    x0 = None
    if cfg.kind == "pulse" and built.get("schedule") is not None:
        x0 = built["schedule"].vector
    trace = optimize(spec, built["ansatz"], MethodConfig(seed=cfg.seed, x0=x0, threads=threads,
                                                          **opt))
    rows = [(r.iter, r.J, r.grad_norm, r.shots) for r in trace.iterations]
    summary = trace.summary()
    summary["kind"] = cfg.kind
    summary["seed"] = cfg.seed
    return {
        "trace.jsonl": trace.to_jsonl(),
        "summary.json": _dumps(summary),
        "trace.csv": _csv(["iter", "J", "grad_norm", "shots"], rows),
    }


def _run_digitize_study(cfg, built):
    sys_, sched = built["system"], built["schedule"]
    exact = propagator_piecewise(sys_, sched)
    records = []
    for r in built["r"]:
        u = digitize(sys_, sched, r).unitary()
        records.append({
            "r": r,
            "operator_norm_error": float(np.linalg.norm(u - exact, 2)),
            "fidelity": float(gate_fidelity(u, exact)),
            "gates": len(sys_.slice_generator(sched.amplitudes[0]).terms) * r * sys_.M,
        })
    rows = [(d["r"], d["operator_norm_error"], d["fidelity"]) for d in records]
    return {
        "trace.jsonl": "".join(json.dumps(d) + "\n" for d in records),
        "summary.json": _dumps({"kind": cfg.kind, "records": records}),
        "digitize.csv": _csv(["r", "operator_norm_error", "fidelity"], rows),
    }


def _controllability_summary(report):
    out = report.summary()
    out["n"] = report.n
    return out


def _run_controllability(cfg, built):
    sys_ = built["system"]
    report = dynamical_lie_algebra(sys_.h0, sys_.controls, max_qubits=built["max_qubits"],
                                   max_rounds=built["max_rounds"])
    summary = _controllability_summary(report)
    summary["kind"] = cfg.kind
    basis = [h.to_text() for h in report.basis]
    return {
        "trace.jsonl": json.dumps(report.summary()) + "\n",
        "summary.json": _dumps(summary),
        "basis.txt": "\n".join(basis),
    }


def _scan(n_range, samples, seed, layers, observable):
    axis, qubit = observable
    res = gradient_variance_scan(hardware_efficient_family(layers), n_range, samples, seed,
                                 observable=lambda n: pauli_observable(n, axis, qubit))
    summary = {"variance": {str(n): v for n, v in res.variance.items()},
               "samples": samples, "seed": seed}
    if len(res.variance) >= 2:
        slope, err = log_variance_trend(res)
        summary["log_variance_slope"] = slope
        summary["slope_stderr"] = err
    rows = [(n, i, g, j) for n, i, g, j in res.records]
    return {
        "scan.csv": _csv(["n", "sample", "grad_component", "J"], rows),
        "summary.json": _dumps(summary),
        "trace.jsonl": "".join(json.dumps({"n": n, "variance": v}) + "\n"
                               for n, v in res.variance.items()),
    }


def _run_landscape(cfg, built):
    out = _scan(built["n_range"], built["samples"], cfg.seed, built["layers"],
                built["observable"])
    return out


RUNNERS = {
    "digitize-study": _run_digitize_study,
    "controllability": _run_controllability,
    "landscape-scan": _run_landscape,
}


def _write(out_dir, artifacts):
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, text in artifacts.items():
        (out_dir / name).write_text(text)


def _load(args):
    """Load and build the config; returns (cfg, built) or an exit code."""
    try:
        cfg = load_config(args.config)
    except ParseError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INVALID
    if getattr(args, "seed", None) is not None:
        cfg.seed = args.seed
    built, diags = build(cfg)
    if diags:
        for d in diags:
            print(f"error: {d}", file=sys.stderr)
        return EXIT_RESOURCE if all(d.resource for d in diags) else EXIT_INVALID
    return cfg, built


def cmd_run(args):
    loaded = _load(args)
    if isinstance(loaded, int):
        return loaded
    cfg, built = loaded
    out_dir = Path(args.out) if args.out else cfg.out
    if out_dir is None:
        print("error: no output directory (set 'out' in the config or pass --out)",
              file=sys.stderr)
        return EXIT_INVALID
    try:
        if cfg.kind in RUNNERS:
            artifacts = RUNNERS[cfg.kind](cfg, built)
        else:
            artifacts = _run_optimization(cfg, built, args.threads)
    except ResourceLimitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RESOURCE
    except (ArithmeticError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    _write(out_dir, artifacts)
    log.info("wrote %s to %s", ", ".join(sorted(artifacts)), out_dir)
    return EXIT_OK


def cmd_validate(args):
    try:
        cfg = load_config(args.config)
    except ParseError as exc:
        print(f"config: {exc}")
        return EXIT_INVALID
    _, diags = build(cfg)
    for d in diags:
        print(d)
    if not diags:
        print("ok")
    return EXIT_INVALID if diags else EXIT_OK


def cmd_check_controllability(args):
    if args.config:
        loaded = _load(args)
        if isinstance(loaded, int):
            return loaded
        cfg, built = loaded
        if cfg.kind != "controllability":
            print(f"error: config kind is {cfg.kind!r}, expected 'controllability'",
                  file=sys.stderr)
            return EXIT_INVALID
        sys_ = built["system"]
        drift, controls = sys_.h0, sys_.controls
        max_qubits, max_rounds = built["max_qubits"], built["max_rounds"]
    else:
        if not args.control:
            print("error: need --config or at least one --control file", file=sys.stderr)
            return EXIT_INVALID
        try:
            controls = [load_pauli_sum(p) for p in args.control]
            n = controls[0].n
            drift = load_pauli_sum(args.drift) if args.drift else PauliSum.zero(n)
        except (ParseError, OSError) as exc:
            print(f"error: {exc}", file=sys.stderr)
            return EXIT_INVALID
        if any(h.n != drift.n for h in controls):
            print("error: drift and controls act on different qubit counts", file=sys.stderr)
            return EXIT_INVALID
        max_qubits, max_rounds = args.max_qubits, 64
    report = dynamical_lie_algebra(drift, controls, max_qubits=max_qubits, max_rounds=max_rounds)
    text = _dumps(_controllability_summary(report))
    sys.stdout.write(text)
    if args.out:
        _write(Path(args.out), {"summary.json": text})
    return EXIT_OK


def cmd_scan_landscape(args):
    if args.config:
        loaded = _load(args)
        if isinstance(loaded, int):
            return loaded
        cfg, built = loaded
        if cfg.kind != "landscape-scan":
            print(f"error: config kind is {cfg.kind!r}, expected 'landscape-scan'",
                  file=sys.stderr)
            return EXIT_INVALID
        params = (built["n_range"], built["samples"], cfg.seed, built["layers"],
                  built["observable"])
        out_dir = Path(args.out) if args.out else cfg.out
    else:
        if args.samples < 30:
            print("error: --samples must be at least 30", file=sys.stderr)
            return EXIT_INVALID
        params = (list(range(args.n_min, args.n_max + 1)), args.samples,
                  args.seed if args.seed is not None else 0, args.layers, ("Z", 0))
        out_dir = Path(args.out) if args.out else None
    artifacts = _scan(*params)
    if out_dir is None:
        sys.stdout.write(artifacts["scan.csv"])
    else:
        _write(out_dir, {k: artifacts[k] for k in ("scan.csv", "summary.json")})
        sys.stdout.write(artifacts["summary.json"])
    return EXIT_OK


def cmd_digitize(args):
    loaded = _load(args)
    if isinstance(loaded, int):
        return loaded
    cfg, built = loaded
    if "system" not in built or built.get("schedule") is None:
        print("error: digitize needs a [system] section with a schedule", file=sys.stderr)
        return EXIT_INVALID
    sys_, sched = built["system"], built["schedule"]
    r = args.r if args.r is not None else built.get("r", [1])[0]
    circuit = digitize(sys_, sched, r)
    text = circuit.to_json(indent=1) + "\n"
    if args.out:
        out = Path(args.out)
        _write(out, {f"circuit_r{r}.json": text})
    else:
        sys.stdout.write(text)
    return EXIT_OK


def make_parser():
    p = argparse.ArgumentParser(prog="vqoc", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"vqoc {__version__}")
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp, config_required):
        sp.add_argument("--config", required=config_required, help="experiment config (TOML/JSON)")
        sp.add_argument("--seed", type=int, default=None, help="override the config seed")
        sp.add_argument("--out", default=None, help="output directory")
        sp.add_argument("--threads", type=int, default=1, help="cap on concurrent restarts")

    sp = sub.add_parser("run", help="run an experiment config")
    common(sp, True)
    sp.set_defaults(func=cmd_run)

    sp = sub.add_parser("validate", help="check a config without running it")
    common(sp, True)
    sp.set_defaults(func=cmd_validate)

    sp = sub.add_parser("check-controllability", help="dynamical Lie algebra rank test")
    common(sp, False)
    sp.add_argument("--drift", help="drift PauliSum file (default: zero)")
    sp.add_argument("--control", action="append", default=[], help="control PauliSum file")
    sp.add_argument("--max-qubits", type=int, default=5)
    sp.set_defaults(func=cmd_check_controllability)

    sp = sub.add_parser("scan-landscape", help="barren-plateau gradient variance scan")
    common(sp, False)
    sp.add_argument("--n-min", type=int, default=2)
    sp.add_argument("--n-max", type=int, default=6)
    sp.add_argument("--samples", type=int, default=200)
    sp.add_argument("--layers", type=int, default=None, help="layers per circuit (default n)")
    sp.set_defaults(func=cmd_scan_landscape)

    sp = sub.add_parser("digitize", help="Trotter-digitize a pulse schedule into a circuit")
    common(sp, True)
    sp.add_argument("--r", type=int, default=None, help="Trotter substeps per slice")
    sp.set_defaults(func=cmd_digitize)
    return p


def main(argv=None):
    args = make_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    if getattr(args, "threads", 1) < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return EXIT_INVALID
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
