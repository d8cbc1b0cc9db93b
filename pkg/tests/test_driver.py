import json
import math

import numpy as np
import pytest

from vqoc.circuit import (
    build_h2_circuit,
    build_hardware_efficient,
    build_qaoa,
    evaluate_circuit,
    ring_hamiltonian,
)
from vqoc.driver import (
    ObjectiveSpec,
    control_precision_fidelity,
    evaluate_objective,
    optimize,
    precision_for_fidelity,
    predicted_standard_deviation,
    shots_required,
)
from vqoc.level_maps import hybridize
from vqoc.pauli import PauliSum
from vqoc.pulse import ControlSystem
from vqoc.state import StateVector, expectation

from conftest import dense_of, random_sum
from test_landscape import H2_TERMS


class TestShots:
    @pytest.mark.parametrize("lam,eps,want", [(1, 0.1, 100), (0, 0.1, 1), (1.5, 0.05, 900),
                                              (1, 0.3, 12), (2, 0.05, 1600)])
    def test_values(self, lam, eps, want):
        assert shots_required(lam, eps) == want

    def test_rejects(self):
        for eps in (0, -0.1):
            with pytest.raises(ValueError):
                shots_required(1.0, eps)

    def test_halving_eps_quadruples(self):
        for lam in (0.5, 1.0, 1.5, 2.0, 3.7):
            assert shots_required(lam, 0.05) == pytest.approx(4 * shots_required(lam, 0.1), abs=3)
        assert shots_required(1.0, 0.05) == 4 * shots_required(1.0, 0.1)

    def test_term_split(self):
        spec = ObjectiveSpec(PauliSum(2, [(1.0, "ZI"), (-0.5, "IX"), (2.0, "II")]),
                             mode="sampled", epsilon=0.1)
        # lambda = 3.5 -> 1225 shots, split over the two measured terms
        assert spec.term_shots() == [613, 613]
        weighted = ObjectiveSpec(spec.h_p, mode="sampled", epsilon=0.1, allocation="weighted")
        assert weighted.term_shots() == [409, 817]
        fixed = ObjectiveSpec(spec.h_p, mode="sampled", shots_per_term=7)
        assert fixed.term_shots() == [7, 7]

    def test_spec_validation(self):
        h = PauliSum.from_string("Z")
        with pytest.raises(ValueError):
            ObjectiveSpec(h, mode="sampled")
        with pytest.raises(ValueError):
            ObjectiveSpec(h, mode="sampled", epsilon=0.0)
        with pytest.raises(ValueError):
            ObjectiveSpec(h, mode="noisy")


class TestEvaluateObjective:
    def test_identity_only(self):
        c = build_hardware_efficient(2, 1)
        j, shots = evaluate_objective(ObjectiveSpec(PauliSum(2, [(0.75, "II")])), c, [0.3, 1.2])
        assert (j, shots) == (0.75, 0)

    def test_eigenstate_sampled_exact(self):
        c = build_hardware_efficient(2, 1)
        h = PauliSum(2, [(0.5, "ZI"), (-1.5, "ZZ"), (0.2, "II")])
        spec = ObjectiveSpec(h, mode="sampled", epsilon=0.1)
        for seed in range(5):
            j, shots = evaluate_objective(spec, c, [np.pi, 0.0], seed=seed)
            assert j == pytest.approx(-0.5 + 1.5 + 0.2, abs=1e-12)
            assert shots == 2 * math.ceil(shots_required(2.2, 0.1) / 2)

    def test_sampled_std_matches_binomial(self):
        c = build_hardware_efficient(1, 1)
        h = PauliSum.from_string("Z")
        spec = ObjectiveSpec(h, mode="sampled", epsilon=0.1)
        x = [np.pi / 2]   # R_y(pi/2)|0> = |+>
        est = [evaluate_objective(spec, c, x, seed=s)[0] for s in range(200)]
        pred = predicted_standard_deviation(spec, evaluate_circuit(c, x))
        assert pred == pytest.approx(0.1, rel=1e-12)
        assert 0.5 <= np.std(est, ddof=1) / pred <= 2.0

    def test_unbiased(self, rng):
        for _ in range(3):
            h = random_sum(rng, 2, 4)
            c = build_hardware_efficient(2, 2)
            x = rng.uniform(0, 2 * np.pi, 4)
            spec = ObjectiveSpec(h, mode="sampled", epsilon=0.2)
            est = np.array([evaluate_objective(spec, c, x, seed=s)[0] for s in range(500)])
            exact = expectation(evaluate_circuit(c, x), h)
            se = predicted_standard_deviation(spec, evaluate_circuit(c, x)) / np.sqrt(500)
            assert abs(est.mean() - exact) < 3 * se

    def test_exact_bit_identical(self):
        h = ring_hamiltonian(4)
        c = build_qaoa(h, p=2)
        spec = ObjectiveSpec(h, StateVector.plus(4))
        x = [0.1, 0.2, 0.3, 0.4]
        assert evaluate_objective(spec, c, x)[0] == evaluate_objective(spec, c, x)[0]


class TestOptimize:
    def test_optimal_start(self):
        c = build_hardware_efficient(1, 1)
        spec = ObjectiveSpec(PauliSum.from_string("Z"))
        trace = optimize(spec, c, x0=[np.pi])
        assert trace.status == "converged" and len(trace.iterations) <= 5
        assert trace.best_J == pytest.approx(-1.0, abs=1e-12)

    def test_h2_reaches_reachable_minimum(self):
        h = PauliSum(4, H2_TERMS)
        c = build_h2_circuit()
        thetas = np.linspace(0, 2 * np.pi, 4001)
        oracle = min(expectation(evaluate_circuit(c, [t]), h) for t in thetas)
        trace = optimize(ObjectiveSpec(h), c, seed=1, restarts=3)
        assert trace.best_J <= oracle + 1e-6
        assert trace.best_J >= np.linalg.eigvalsh(dense_of(h))[0] - 1e-9

    def test_qaoa_p2_not_worse_than_p1(self):
        h = ring_hamiltonian(4)
        spec = ObjectiveSpec(h, StateVector.plus(4))
        j1 = optimize(spec, build_qaoa(h, p=1), restarts=5, seed=3).best_J
        j2 = optimize(spec, build_qaoa(h, p=2), restarts=5, seed=3).best_J
        assert j2 <= j1 + 1e-9

    def test_monotone_and_bounded(self, rng):
        for _ in range(3):
            h = random_sum(rng, 3, 5)
            trace = optimize(ObjectiveSpec(h), build_hardware_efficient(3, 2), seed=int(rng.integers(100)),
                             max_iter=100)
            js = trace.j_values()
            assert np.all(np.diff(js) <= 0)
            assert js[-1] >= np.linalg.eigvalsh(dense_of(h))[0] - 1e-9

    def test_pulse_with_bounds(self):
        sys_ = ControlSystem(PauliSum.zero(1), [PauliSum.from_string("X")], 1.0, 4)
        spec = ObjectiveSpec(PauliSum.from_string("Z"))
        trace = optimize(spec, sys_, bounds=(-0.3, 0.3), seed=0, max_iter=200)
        assert np.all(np.abs(trace.best_params) <= 0.3 + 1e-15)
        # |sum c dt| <= 0.3 limits the rotation: J >= cos(0.6)
        assert trace.best_J == pytest.approx(np.cos(0.6), abs=1e-6)

    def test_pulse_unbounded_flip(self):
        sys_ = ControlSystem(PauliSum.zero(1), [PauliSum.from_string("X")], 1.0, 4)
        trace = optimize(ObjectiveSpec(PauliSum.from_string("Z")), sys_, seed=0)
        assert trace.best_J == pytest.approx(-1.0, abs=1e-8)

    def test_hybrid(self):
        h = PauliSum(4, H2_TERMS)
        ans = hybridize(build_h2_circuit(), [10])
        trace = optimize(ObjectiveSpec(h), ans, seed=0, max_iter=100)
        assert trace.best_J >= np.linalg.eigvalsh(dense_of(h))[0] - 1e-9

    def test_nelder_mead(self):
        h = ring_hamiltonian(4)
        trace = optimize(ObjectiveSpec(h, StateVector.plus(4)), build_qaoa(h, p=1),
                         method="nelder-mead", restarts=4, seed=0)
        assert trace.best_J == pytest.approx(-2.0, abs=1e-6)

    def test_sampled_mode_runs(self):
        h = PauliSum.from_string("Z")
        trace = optimize(ObjectiveSpec(h, mode="sampled", epsilon=0.05, seed=4),
                         build_hardware_efficient(1, 1), seed=4, max_iter=30)
        assert len(trace.restart_finals) == 5
        assert trace.total_shots > 0
        assert trace.best_J < -0.8

    def test_deterministic_and_thread_independent(self):
        h = ring_hamiltonian(4)
        spec = ObjectiveSpec(h, StateVector.plus(4), mode="sampled", epsilon=0.1, seed=2)
        a = optimize(spec, build_qaoa(h, p=1), restarts=3, seed=2, max_iter=20)
        b = optimize(spec, build_qaoa(h, p=1), restarts=3, seed=2, max_iter=20, threads=3)
        assert a.to_jsonl() == b.to_jsonl()

    def test_trace_jsonl(self):
        c = build_hardware_efficient(1, 1)
        trace = optimize(ObjectiveSpec(PauliSum.from_string("Z")), c, seed=0, max_iter=5)
        lines = [json.loads(x) for x in trace.to_jsonl().splitlines()]
        assert set(lines[0]) == {"iter", "params", "J", "grad_norm", "shots"}
        assert lines[-1]["summary"]["status"] in ("converged", "max-iterations", "stalled")

    def test_non_finite_aborts(self):
        c = build_hardware_efficient(1, 1)
        spec = ObjectiveSpec(PauliSum.from_string("Z"))
        with pytest.raises(FloatingPointError):
            optimize(spec, c, x0=[np.nan])

    def test_unknown_method(self):
        with pytest.raises(ValueError):
            optimize(ObjectiveSpec(PauliSum.from_string("Z")), build_hardware_efficient(1, 1),
                     method="adam")


class TestPrecisionModel:
    def test_values(self):
        assert control_precision_fidelity(7, 0.0) == 1.0
        assert control_precision_fidelity(2, 1.0) == 0.5

    def test_identity(self, rng):
        for _ in range(50):
            d, delta = int(rng.integers(1, 5000)), float(rng.uniform(0, 2))
            f = control_precision_fidelity(d, delta)
            assert f * (1 + (d - 1) * delta ** 2) == pytest.approx(1.0, abs=1e-15)

    def test_inverse(self):
        for d in (2, 16, 1024):
            delta = precision_for_fidelity(d, 0.9)
            assert control_precision_fidelity(d, delta) == pytest.approx(0.9, abs=1e-15)

    def test_delta_scaling_approaches_two(self):
        ratios = [precision_for_fidelity(d, 0.9) / precision_for_fidelity(4 * d, 0.9)
                  for d in (2, 8, 32, 128, 512)]
        assert np.all(np.diff(ratios) < 0)
        # exact ratio is sqrt((4d - 1) / (d - 1)), which tends to 2 from above
        for d, r in zip((2, 8, 32, 128, 512), ratios):
            assert r == pytest.approx(math.sqrt((4 * d - 1) / (d - 1)), rel=1e-14)

    def test_rejects(self):
        with pytest.raises(ValueError):
            control_precision_fidelity(0, 0.1)
        with pytest.raises(ValueError):
            precision_for_fidelity(4, 0.0)
