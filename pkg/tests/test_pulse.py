import numpy as np
import pytest

from vqoc.errors import DimensionMismatchError, ParseError
from vqoc.pauli import PauliSum
from vqoc.pulse import (
    ControlSystem,
    PulseSchedule,
    grape_gradient,
    load_schedule,
    objective_and_gradient,
    pulse_objective,
    pulse_state,
)
from vqoc.state import StateVector, expectation

from conftest import dense_of, expm_oracle, random_sum


def objective_oracle(sys_, amps, h_p, psi0):
    """Slice-by-slice scipy exponentials, no package propagation code."""
    h0 = dense_of(sys_.h0)
    hk = [dense_of(h) for h in sys_.controls]
    psi = psi0.amplitudes
    for row in np.asarray(amps).reshape(sys_.M, sys_.K):
        gen = h0 + sum(c * h for c, h in zip(row, hk))
        psi = expm_oracle(gen, sys_.dt) @ psi
    return float(np.real(psi.conj() @ dense_of(h_p) @ psi))


def fd_gradient(sys_, amps, h_p, psi0, h=1e-5):
    amps = np.asarray(amps, dtype=float)
    g = np.zeros_like(amps)
    for idx in np.ndindex(*amps.shape):
        e = np.zeros_like(amps)
        e[idx] = h
        g[idx] = (objective_oracle(sys_, amps + e, h_p, psi0)
                  - objective_oracle(sys_, amps - e, h_p, psi0)) / (2 * h)
    return g


def random_system(rng, n, M, K):
    controls = [random_sum(rng, n, 2, traceless=True) for _ in range(K)]
    return ControlSystem(random_sum(rng, n, 3), controls, float(rng.uniform(0.5, 2.0)), M)


def assert_gradient_close(analytic, numeric):
    small = np.abs(numeric) < 1e-8
    assert np.all(np.abs(analytic - numeric)[small] < 1e-8)
    rel = np.abs(analytic - numeric)[~small] / np.abs(numeric)[~small]
    assert np.all(rel < 1e-6), rel.max()


class TestControlSystem:
    def test_validation(self):
        z = PauliSum.from_string("Z")
        with pytest.raises(ValueError):
            ControlSystem(z, [z], 0.0, 1)
        with pytest.raises(ValueError):
            ControlSystem(z, [z], 1.0, 0)
        with pytest.raises(DimensionMismatchError):
            ControlSystem(z, [PauliSum.from_string("XX")], 1.0, 1)

    def test_derived_quantities(self):
        sys_ = ControlSystem(PauliSum.zero(2), [PauliSum.from_string("XI")] * 3, 2.0, 8)
        assert (sys_.n, sys_.K, sys_.dt, sys_.num_params) == (2, 3, 0.25, 24)

    def test_dict_round_trip(self, rng):
        sys_ = random_system(rng, 2, 4, 2)
        back = ControlSystem.from_dict(sys_.to_dict())
        assert back.h0 == sys_.h0 and back.controls == sys_.controls
        assert (back.T, back.M) == (sys_.T, sys_.M)


class TestSchedule:
    def test_non_finite_rejected(self):
        with pytest.raises(ValueError):
            PulseSchedule([[np.nan]])

    def test_csv_round_trip(self, rng, tmp_path):
        sys_ = random_system(rng, 1, 5, 2)
        sched = PulseSchedule.random(sys_, rng)
        text = sched.to_csv()
        assert text.splitlines()[0] == "slice,k0,k1"
        (tmp_path / "s.csv").write_text(text)
        back = load_schedule(tmp_path / "s.csv", sys_)
        np.testing.assert_array_equal(back.amplitudes, sched.amplitudes)

    def test_csv_shape_checked(self, rng):
        sys_ = random_system(rng, 1, 5, 2)
        text = PulseSchedule(np.zeros((4, 2))).to_csv()
        with pytest.raises(ParseError):
            PulseSchedule.from_csv(text, sys_)

    def test_csv_errors(self):
        with pytest.raises(ParseError):
            PulseSchedule.from_csv("time,k0\n1,0.5\n")
        with pytest.raises(ParseError) as exc:
            PulseSchedule.from_csv("slice,k0\n1,0.5\n2,abc\n")
        assert exc.value.line == 3
        with pytest.raises(ParseError):
            PulseSchedule.from_csv("slice,k0\n2,0.5\n")

    def test_vector_round_trip(self, rng):
        sys_ = random_system(rng, 1, 3, 2)
        sched = PulseSchedule.random(sys_, rng)
        np.testing.assert_array_equal(
            PulseSchedule.from_vector(sys_, sched.vector).amplitudes, sched.amplitudes)


class TestObjective:
    def test_no_evolution(self, rng):
        sys_ = ControlSystem(PauliSum.zero(2), [PauliSum.from_string("XY")], 1.0, 4)
        psi0 = StateVector.random(2, rng)
        h_p = random_sum(rng, 2, 4)
        assert pulse_objective(sys_, PulseSchedule.zeros(sys_), h_p, psi0) == pytest.approx(
            expectation(psi0, h_p), abs=1e-14)

    def test_rabi_flip(self):
        sys_ = ControlSystem(PauliSum.zero(1), [PauliSum.from_string("X")], 1.0, 4)
        z = PauliSum.from_string("Z")
        sched = PulseSchedule.constant(sys_, [np.pi / 2])
        assert pulse_objective(sys_, PulseSchedule.zeros(sys_), z, StateVector.zero(1)) == 1.0
        assert pulse_objective(sys_, sched, z, StateVector.zero(1)) == pytest.approx(-1, abs=1e-14)
        out = pulse_state(sys_, sched, StateVector.zero(1))
        np.testing.assert_allclose(out.amplitudes, [0, -1j], atol=1e-14)

    def test_random_two_qubit_against_oracle(self, rng):
        sys_ = random_system(rng, 2, 8, 2)
        sched = PulseSchedule.random(sys_, rng)
        h_p, psi0 = random_sum(rng, 2, 4), StateVector.random(2, rng)
        assert pulse_objective(sys_, sched, h_p, psi0) == pytest.approx(
            objective_oracle(sys_, sched.amplitudes, h_p, psi0), abs=1e-10)

    def test_refinement_invariance(self, rng):
        base = random_system(rng, 2, 3, 2)
        fine = ControlSystem(base.h0, base.controls, base.T, 6)
        values = rng.uniform(-1, 1, 2)
        h_p, psi0 = random_sum(rng, 2, 3), StateVector.random(2, rng)
        j1 = pulse_objective(base, PulseSchedule.constant(base, values), h_p, psi0)
        j2 = pulse_objective(fine, PulseSchedule.constant(fine, values), h_p, psi0)
        assert abs(j1 - j2) < 1e-12

    def test_bounded_by_spectrum(self, rng):
        h_p = random_sum(rng, 2, 5)
        w = np.linalg.eigvalsh(dense_of(h_p))
        for _ in range(20):
            sys_ = random_system(rng, 2, 4, 2)
            j = pulse_objective(sys_, PulseSchedule.random(sys_, rng, -3, 3), h_p,
                                StateVector.random(2, rng))
            assert w[0] - 1e-12 <= j <= w[-1] + 1e-12

    def test_dimension_mismatch(self, rng):
        sys_ = random_system(rng, 2, 2, 1)
        with pytest.raises(DimensionMismatchError):
            pulse_objective(sys_, PulseSchedule.zeros(sys_), PauliSum.from_string("Z"),
                            StateVector.zero(2))
        with pytest.raises(DimensionMismatchError):
            pulse_objective(sys_, PulseSchedule(np.zeros((3, 1))), random_sum(rng, 2, 1),
                            StateVector.zero(2))


class TestGradient:
    def test_stationary_by_symmetry(self):
        sys_ = ControlSystem(PauliSum.zero(1), [PauliSum.from_string("Z")], 1.0, 3)
        g = grape_gradient(sys_, PulseSchedule.zeros(sys_), PauliSum.from_string("Z"),
                           StateVector.zero(1))
        np.testing.assert_array_equal(g, 0.0)

    def test_single_slice_closed_form(self):
        sys_ = ControlSystem(PauliSum.zero(1), [PauliSum.from_string("X")], 1.0, 1)
        c = 0.3
        z = PauliSum.from_string("Z")
        j = pulse_objective(sys_, PulseSchedule([[c]]), z, StateVector.zero(1))
        assert j == pytest.approx(np.cos(2 * c), abs=1e-14)
        g = grape_gradient(sys_, PulseSchedule([[c]]), z, StateVector.zero(1))
        assert g[0, 0] == pytest.approx(-2 * np.sin(2 * c), abs=1e-12)

    def test_two_qubit_fd(self):
        rng = np.random.default_rng(11)
        sys_ = random_system(rng, 2, 6, 2)
        sched = PulseSchedule.random(sys_, rng)
        h_p, psi0 = random_sum(rng, 2, 4), StateVector.random(2, rng)
        assert_gradient_close(grape_gradient(sys_, sched, h_p, psi0),
                              fd_gradient(sys_, sched.amplitudes, h_p, psi0))

    def test_small_component_limited_by_fd_roundoff(self, rng):
        # This instance has one component near 7e-6. Central differences carry
        # ~1e-11 absolute roundoff there, so only absolute agreement is meaningful.
        sys_ = random_system(rng, 2, 6, 2)
        sched = PulseSchedule.random(sys_, rng)
        h_p, psi0 = random_sum(rng, 2, 4), StateVector.random(2, rng)
        analytic = grape_gradient(sys_, sched, h_p, psi0)
        numeric = fd_gradient(sys_, sched.amplitudes, h_p, psi0)
        assert np.min(np.abs(numeric)) < 1e-5
        assert np.max(np.abs(analytic - numeric)) < 1e-10

    def test_random_systems_fd(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            n, M, K = int(rng.integers(1, 4)), int(rng.integers(1, 17)), int(rng.integers(1, 3))
            sys_ = random_system(rng, n, M, K)
            sched = PulseSchedule.random(sys_, rng)
            h_p, psi0 = random_sum(rng, n, 4), StateVector.random(n, rng)
            assert_gradient_close(grape_gradient(sys_, sched, h_p, psi0),
                                  fd_gradient(sys_, sched.amplitudes, h_p, psi0))

    def test_degenerate_spectrum(self):
        # zero drift, X control on 2 qubits: every slice generator has doubly degenerate spectrum
        sys_ = ControlSystem(PauliSum.zero(2), [PauliSum.from_string("XI"),
                                                 PauliSum.from_string("IZ")], 1.0, 3)
        sched = PulseSchedule([[0.2, 0.0], [0.0, 0.0], [0.4, 0.4]])
        h_p, psi0 = PauliSum(2, [(1.0, "ZZ"), (0.5, "YI")]), StateVector.plus(2)
        assert_gradient_close(grape_gradient(sys_, sched, h_p, psi0),
                              fd_gradient(sys_, sched.amplitudes, h_p, psi0))

    def test_objective_and_gradient_consistent(self, rng):
        sys_ = random_system(rng, 3, 4, 2)
        sched = PulseSchedule.random(sys_, rng)
        h_p, psi0 = random_sum(rng, 3, 4), StateVector.random(3, rng)
        j, g = objective_and_gradient(sys_, sched, h_p, psi0)
        assert j == pytest.approx(pulse_objective(sys_, sched, h_p, psi0), abs=1e-13)
        np.testing.assert_allclose(g, grape_gradient(sys_, sched, h_p, psi0), atol=1e-13)
