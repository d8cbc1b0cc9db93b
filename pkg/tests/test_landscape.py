import numpy as np
import pytest

from vqoc.circuit import (
    Circuit,
    build_h2_circuit,
    build_hardware_efficient,
    build_qaoa,
    evaluate_circuit,
    ring_hamiltonian,
)
from vqoc.driver import MethodConfig, ObjectiveSpec, optimize
from vqoc.errors import ResourceLimitError
from vqoc.landscape import (
    classify_critical_point,
    gradient_fd,
    gradient_variance_scan,
    hardware_efficient_family,
    hessian_fd,
    local_surjectivity_rank,
    log_variance_trend,
    spectral_weights,
    variance_standard_error,
)
from vqoc.level_maps import hybridize
from vqoc.pauli import PauliSum
from vqoc.pulse import ControlSystem, PulseSchedule, grape_gradient
from vqoc.state import Gate, StateVector, expectation

from conftest import random_sum

H2_TERMS = [
    (-0.8105, "IIII"), (0.1721, "ZIII"), (0.1721, "IZII"), (-0.2228, "IIZI"), (-0.2228, "IIIZ"),
    (0.1686, "ZZII"), (0.1205, "ZIZI"), (0.1659, "ZIIZ"), (0.1659, "IZZI"), (0.1205, "IZIZ"),
    (0.1743, "IIZZ"), (0.0454, "XXYY"), (-0.0454, "XYYX"), (-0.0454, "YXXY"), (0.0454, "YYXX"),
]


class TestFiniteDifferences:
    def test_constant(self):
        np.testing.assert_array_equal(gradient_fd(lambda x: 4.2, np.zeros(3)), 0.0)

    def test_quadratic(self):
        assert gradient_fd(lambda x: x[0] ** 2, np.array([3.0]))[0] == pytest.approx(6, abs=1e-9)

    def test_non_finite_reports_location(self):
        with pytest.raises(FloatingPointError, match="e_1"):
            gradient_fd(lambda x: np.inf if x[1] > 0 else 0.0, np.zeros(2))

    def test_step_must_be_positive(self):
        with pytest.raises(ValueError):
            gradient_fd(lambda x: 0.0, np.zeros(1), h=0)
        with pytest.raises(ValueError):
            hessian_fd(lambda x: 0.0, np.zeros(1), h=-1)

    def test_qaoa_matches_pulse_adjoint(self):
        h_p = ring_hamiltonian(3)
        h_d = PauliSum(3, [(1.0, "XII"), (1.0, "IXI"), (1.0, "IIX")])
        c = build_qaoa(h_p, h_d, 1)
        psi0 = StateVector.plus(3)
        x = np.array([0.41, 0.93])   # gamma_1, beta_1

        def energy(v):
            return expectation(evaluate_circuit(c, v, psi0), h_p)

        fd = gradient_fd(energy, x)
        # exp(-i beta H_d) exp(-i gamma H_p) as two unit slices with controls (H_p, H_d)
        sys_ = ControlSystem(PauliSum.zero(3), [h_p, h_d], 2.0, 2)
        sched = PulseSchedule([[x[0], 0.0], [0.0, x[1]]])
        g = grape_gradient(sys_, sched, h_p, psi0)
        np.testing.assert_allclose(fd, [g[0, 0], g[1, 1]], rtol=1e-6)

    def test_hessian_saddle_quadratic(self):
        h = hessian_fd(lambda x: x[0] ** 2 - x[1] ** 2, np.zeros(2))
        np.testing.assert_allclose(h, np.diag([2.0, -2.0]), atol=1e-6)

    def test_hessian_linear_zero(self):
        h = hessian_fd(lambda x: 3 * x[0] - 2 * x[1] + 1, np.array([0.3, -0.2]))
        np.testing.assert_allclose(h, 0.0, atol=1e-6)

    def test_hessian_symmetric_mixed(self):
        h = hessian_fd(lambda x: np.sin(x[0]) * np.cos(2 * x[1]) + x[0] * x[2], np.array([0.3, 0.1, 0.5]))
        np.testing.assert_array_equal(h, h.T)
        assert h[0, 2] == pytest.approx(1.0, abs=1e-6)

    def test_h2_optimum_psd(self):
        h_p = PauliSum(4, H2_TERMS)
        c = build_h2_circuit()
        trace = optimize(ObjectiveSpec(h_p, StateVector.zero(4)), c, MethodConfig(seed=0))
        x = trace.best_params

        def energy(v):
            return expectation(evaluate_circuit(c, v), h_p)

        eig = np.linalg.eigvalsh(hessian_fd(energy, x))
        assert np.all(eig >= -1e-6)
        assert classify_critical_point(hessian_fd(energy, x)).classification == "minimum"


class TestClassify:
    @pytest.mark.parametrize("diag,kind", [
        ([1, 1], "minimum"), ([1, -1], "saddle"), ([0, 0], "degenerate"),
        ([-1, -2], "maximum"), ([1, 0], "degenerate"),
    ])
    def test_cases(self, diag, kind):
        assert classify_critical_point(np.diag(diag)).classification == kind

    def test_orthogonal_invariance(self, rng):
        d = np.diag([2.0, -0.5, 1e-3])
        q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
        a = classify_critical_point(d)
        b = classify_critical_point(q @ d @ q.T)
        assert a.classification == b.classification == "saddle"
        np.testing.assert_allclose(a.eigenvalues, b.eigenvalues, atol=1e-12)

    def test_default_tolerance(self):
        assert classify_critical_point(np.diag([1.0, 1e-8])).classification == "degenerate"
        assert classify_critical_point(np.diag([1.0, 1e-5])).classification == "minimum"


class TestSpectralWeights:
    def test_eigenstate(self):
        w = spectral_weights(StateVector.basis(2, "01"), PauliSum(2, [(1.0, "ZI"), (0.5, "IZ")]))
        assert len(w) == 1
        assert w[0][0] == pytest.approx(0.5) and w[0][1] == pytest.approx(1.0)

    def test_plus_z(self):
        w = spectral_weights(StateVector.plus(1), PauliSum.from_string("Z"))
        np.testing.assert_allclose(w, [(-1.0, 0.5), (1.0, 0.5)], atol=1e-14)

    def test_reconstruction(self, rng):
        psi, h = StateVector.random(3, rng), random_sum(rng, 3, 6)
        w = spectral_weights(psi, h)
        assert sum(l for _, l in w) == pytest.approx(1.0, abs=1e-10)
        assert all(l >= 0 for _, l in w)
        assert sum(e * l for e, l in w) == pytest.approx(expectation(psi, h), abs=1e-9)

    def test_degenerate_eigenspaces_merged(self, rng):
        h = PauliSum(3, [(1.0, "ZII")])
        w = spectral_weights(StateVector.random(3, rng), h)
        assert [e for e, _ in w] == pytest.approx([-1.0, 1.0])

    def test_global_phase_invariant(self, rng):
        psi, h = StateVector.random(2, rng), random_sum(rng, 2, 4)
        rotated = StateVector(np.exp(1.3j) * psi.amplitudes)
        np.testing.assert_allclose(spectral_weights(psi, h), spectral_weights(rotated, h), atol=1e-14)


class TestSurjectivity:
    def test_zero_parameters(self):
        assert local_surjectivity_rank(Circuit(1, [Gate.x(0)])).rank == 0

    def test_single_rotation(self):
        c = Circuit(1, [Gate.ry(1, 0, param="t")], bindings={"t": 0.4})
        rep = local_surjectivity_rank(c)
        assert (rep.rank, rep.max_rank, rep.num_params) == (1, 4, 1)

    def test_pulse_system_traceless(self, rng):
        sys_ = ControlSystem(PauliSum.from_string("Z"), [PauliSum.from_string("X")], 1.0, 5)
        for _ in range(5):
            rep = local_surjectivity_rank(sys_, PulseSchedule.random(sys_, rng).vector)
            # traceless generators confine U_T to SU(2): d**2 - 1 real directions
            assert rep.rank == 3

    def test_pulse_system_with_identity_control(self, rng):
        sys_ = ControlSystem(PauliSum.from_string("Z"),
                             [PauliSum.from_string("X"), PauliSum.from_string("I")], 1.0, 4)
        rep = local_surjectivity_rank(sys_, PulseSchedule.random(sys_, rng).vector)
        assert rep.rank == 4 == rep.max_rank

    def test_hybrid(self):
        h = hybridize(build_h2_circuit(0.3), [10])
        rep = local_surjectivity_rank(h)
        assert rep.rank <= min(rep.num_params, rep.max_rank)

    def test_bounds(self, rng):
        c = build_hardware_efficient(2, 3, rng.uniform(0, 6, 6))
        rep = local_surjectivity_rank(c)
        assert 0 < rep.rank <= min(6, 16)

    def test_cap(self):
        with pytest.raises(ResourceLimitError):
            local_surjectivity_rank(build_hardware_efficient(5, 1))


class TestVarianceScan:
    def test_constant_family(self):
        fam = lambda n: (Circuit(n, [Gate.rotation("Z" + "I" * (n - 1), param="t")]), 1)  # noqa: E731
        res = gradient_variance_scan(fam, [1, 2, 3], samples=30, seed=1)
        assert all(v == pytest.approx(0.0, abs=1e-18) for v in res.variance.values())

    def test_deterministic_and_order_free(self):
        fam = hardware_efficient_family()
        a = gradient_variance_scan(fam, [2, 3], samples=40, seed=9)
        b = gradient_variance_scan(fam, [3, 2], samples=40, seed=9)
        assert a.variance == b.variance

    def test_samples_doubled_consistent(self):
        fam = hardware_efficient_family()
        small = gradient_variance_scan(fam, [3], samples=100, seed=2)
        big = gradient_variance_scan(fam, [3], samples=200, seed=2)
        se = variance_standard_error(small.gradients(3))
        assert abs(small.variance[3] - big.variance[3]) < 3 * se

    def test_records_and_full_gradient(self):
        res = gradient_variance_scan(hardware_efficient_family(1), [2], samples=30, seed=0,
                                     full_gradient=True)
        assert len(res.records) == 30 and res.grad_norm_mean[2] > 0

    def test_trend_negative(self):
        res = gradient_variance_scan(hardware_efficient_family(), range(2, 7), samples=100, seed=0)
        slope, err = log_variance_trend(res)
        assert slope < 0 and abs(slope) > 2 * err

    def test_observable_override(self):
        res = gradient_variance_scan(hardware_efficient_family(1), [2], samples=30, seed=0,
                                     observable=lambda n: PauliSum.from_string("X" * n))
        assert res.variance[2] >= 0
