import math

import numpy as np
import pytest

from squeezelax.lindblad import (CutoffError, DegenerateSteadyStateError,
                                 Liouvillian, annihilation_operator, dissipator,
                                 evolve, oscillator_liouvillian,
                                 oscillator_oracle, spin_liouvillian,
                                 steady_state)
from squeezelax.moments import (SqueezingParams, collective_cov_rhs,
                                collective_mean_rhs, gardiner_rhs, SpinMoments,
                                input_field_variances)
from squeezelax.spin_algebra import (BlochAngles, DickeSpace, QuantumState,
                                     build_collective_ops, spin_coherent_state,
                                     sym_covariance)


def random_pure(rng, dim):
    psi = rng.normal(size=dim) + 1j * rng.normal(size=dim)
    return QuantumState.from_vector(psi / np.linalg.norm(psi))


def fit_decay_rate(times, values):
    """Weighted log-linear fit of an exponential decay (weights ~ value^2)."""
    logs = np.log(np.abs(values))
    weights = np.asarray(values) ** 2
    slope, _ = np.polyfit(times, logs, 1, w=weights)
    return -slope


class TestDissipator:
    def test_zero_operators(self):
        rho = np.diag([0.5, 0.5]).astype(complex)
        zero = np.zeros((2, 2), dtype=complex)
        assert np.all(dissipator(zero, zero, rho) == 0)

    def test_decay_channel_direction(self):
        sm = np.array([[0, 1], [0, 0]], dtype=complex)
        excited = np.diag([0.0, 1.0]).astype(complex)
        out = dissipator(sm.conj().T, sm, excited)
        assert np.allclose(out, np.diag([1.0, -1.0]))

    def test_traceless(self):
        rng = np.random.default_rng(3)
        u = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        v = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        rho = rng.normal(size=(4, 4)) + 1j * rng.normal(size=(4, 4))
        assert abs(np.trace(dissipator(u, v, rho))) < 1e-12 * np.max(np.abs(rho))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            dissipator(np.eye(2, dtype=complex), np.eye(3, dtype=complex),
                       np.eye(2, dtype=complex))


class TestLiouvillianApply:
    def test_single_spin_reproduces_gardiner(self):
        rng = np.random.default_rng(5)
        ops = build_collective_ops(DickeSpace(1))
        p = SqueezingParams.minimal(0.7, gamma_p=1.4)
        liouv = spin_liouvillian(ops, p)
        for _ in range(20):
            v = rng.normal(size=3)
            v = 0.9 * v / max(1.0, np.linalg.norm(v))
            rho = 0.5 * (np.eye(2, dtype=complex)
                         + v[0] * ops.sx + v[1] * ops.sy + v[2] * ops.sz)
            ldot = liouv.apply(rho)
            ref = gardiner_rhs(SpinMoments(*v), p)
            assert np.trace(ops.sx @ ldot).real == pytest.approx(ref.mean_x, abs=1e-12)
            assert np.trace(ops.sy @ ldot).real == pytest.approx(ref.mean_y, abs=1e-12)
            assert np.trace(ops.sz @ ldot).real == pytest.approx(ref.mean_z, abs=1e-12)

    def test_vacuum_dark_state(self):
        ops = build_collective_ops(DickeSpace(4))
        liouv = spin_liouvillian(ops, SqueezingParams(0.0, 0.0))
        rho = np.zeros((5, 5), dtype=complex)
        rho[0, 0] = 1.0
        assert np.max(np.abs(liouv.apply(rho))) < 1e-14

    def test_hermitian_traceless_output(self):
        rng = np.random.default_rng(9)
        ops = build_collective_ops(DickeSpace(6))
        liouv = spin_liouvillian(ops, SqueezingParams.minimal(1.2))
        rho = random_pure(rng, 7).density()
        out = liouv.apply(rho)
        assert np.max(np.abs(out - out.conj().T)) < 1e-12 * np.max(np.abs(out))
        assert abs(np.trace(out)) < 1e-12 * 7

    @pytest.mark.parametrize("n", range(1, 11))
    def test_mean_and_cov_rhs_equivalence(self, n):
        rng = np.random.default_rng(100 + n)
        space = DickeSpace(n)
        ops = build_collective_ops(space)
        p = SqueezingParams.minimal(0.4)
        liouv = spin_liouvillian(ops, p)
        for _ in range(20):
            state = random_pure(rng, space.dim)
            rho = state.density()
            ldot = liouv.apply(rho)
            dx, dy, dz = collective_mean_rhs(state, ops, p)
            assert np.trace(ops.sx @ ldot).real == pytest.approx(dx, abs=1e-10)
            assert np.trace(ops.sy @ ldot).real == pytest.approx(dy, abs=1e-10)
            assert np.trace(ops.sz @ ldot).real == pytest.approx(dz, abs=1e-10)

            means = {op: np.trace(m @ rho).real for op, m in
                     (("x", ops.sx), ("y", ops.sy))}
            dmeans = {op: np.trace(m @ ldot).real for op, m in
                      (("x", ops.sx), ("y", ops.sy))}
            sxy = 0.5 * (ops.sx @ ops.sy + ops.sy @ ops.sx)
            oracle = (
                np.trace(ops.sx @ ops.sx @ ldot).real - 2 * means["x"] * dmeans["x"],
                np.trace(ops.sy @ ops.sy @ ldot).real - 2 * means["y"] * dmeans["y"],
                np.trace(sxy @ ldot).real
                - means["x"] * dmeans["y"] - means["y"] * dmeans["x"],
            )
            got = collective_cov_rhs(state, ops, p)
            for a, b in zip(oracle, got):
                assert a == pytest.approx(b, abs=1e-9)

    def test_superoperator_matches_direct_application(self):
        rng = np.random.default_rng(17)
        ops = build_collective_ops(DickeSpace(4))
        liouv = spin_liouvillian(ops, SqueezingParams.minimal(0.8))
        rho = random_pure(rng, 5).density()
        via_super = (liouv.superoperator() @ rho.ravel()).reshape(5, 5)
        assert np.max(np.abs(via_super - liouv.apply(rho))) < 1e-12


class TestEvolve:
    def test_single_spin_exponential_rate(self):
        p = SqueezingParams.minimal(0.5)
        ops = build_collective_ops(DickeSpace(1))
        liouv = spin_liouvillian(ops, p)
        rho0 = 0.5 * (np.eye(2, dtype=complex) + 0.8 * ops.sx + 0.5 * ops.sz)
        traj = evolve(liouv, rho0, 3.0, rtol=1e-12, atol=1e-16)
        rate = fit_decay_rate(traj.times, traj.expectations(ops.sx))
        assert rate == pytest.approx(p.gamma_p * (0.5 + p.m_corr + 0.5), rel=1e-6)

    def test_collective_vacuum_decay_endpoint(self):
        space = DickeSpace(5)
        ops = build_collective_ops(space)
        liouv = spin_liouvillian(ops, SqueezingParams(0.0, 0.0))
        state = spin_coherent_state(space, BlochAngles(0.4 * math.pi, 0.2))
        traj = evolve(liouv, state, 40.0, record_every=10 ** 9)
        expected = np.zeros((6, 6))
        expected[0, 0] = 1.0
        assert np.max(np.abs(traj.final_state - expected)) < 1e-6

    def test_trajectory_sanity_diagnostics(self):
        space = DickeSpace(8)
        ops = build_collective_ops(space)
        liouv = spin_liouvillian(ops, SqueezingParams.minimal(0.5))
        state = spin_coherent_state(space, BlochAngles(0.75 * math.pi, 0.6))
        traj = evolve(liouv, state, 2.0, record_every=10)
        assert traj.diagnostics["max_trace_drift"] < 1e-8
        assert traj.diagnostics["max_hermiticity_residual"] < 1e-8
        assert traj.diagnostics["min_eigenvalue"] > -1e-7

    def test_cov_rhs_consistent_with_trajectory_difference(self):
        # difference quotient over dt vs the RHS at the step midpoint
        dt = 1e-5
        p = SqueezingParams.minimal(0.05)
        rng = np.random.default_rng(23)
        for n in (3, 10):
            space = DickeSpace(n)
            ops = build_collective_ops(space)
            liouv = spin_liouvillian(ops, p)
            state = random_pure(rng, space.dim)
            traj = evolve(liouv, state, dt, rtol=1e-12, atol=1e-14,
                          record_every=10 ** 9)
            half = evolve(liouv, state, dt / 2, rtol=1e-12, atol=1e-14,
                          record_every=10 ** 9)
            fd = (sym_covariance(ops.sx, ops.sx, QuantumState(traj.final_state, "matrix"))
                  - sym_covariance(ops.sx, ops.sx, state)) / dt
            mid = QuantumState(half.final_state, "matrix")
            dvx_mid, _, _ = collective_cov_rhs(mid, ops, p)
            assert fd == pytest.approx(dvx_mid, abs=1e-3)

    def test_rejects_bad_inputs(self):
        ops = build_collective_ops(DickeSpace(2))
        liouv = spin_liouvillian(ops, SqueezingParams(0.0, 0.0))
        with pytest.raises(ValueError):
            evolve(liouv, np.eye(2, dtype=complex) / 2, 1.0)  # wrong dimension
        with pytest.raises(ValueError):
            evolve(liouv, np.eye(3, dtype=complex) / 3, -1.0)


class TestSteadyState:
    @pytest.mark.parametrize("nbar", [0.0, 0.5, 5.0])
    def test_single_spin_inversion_and_unit_variances(self, nbar):
        p = SqueezingParams.minimal(nbar)
        ops = build_collective_ops(DickeSpace(1))
        rho = steady_state(spin_liouvillian(ops, p))
        state = QuantumState.from_matrix(rho)
        assert np.trace(ops.sz @ rho).real == pytest.approx(-1.0 / (2 * nbar + 1),
                                                            abs=1e-9)
        assert sym_covariance(ops.sx, ops.sx, state) == pytest.approx(1.0, abs=1e-9)
        assert sym_covariance(ops.sy, ops.sy, state) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("nbar", [0.5, 2.0])
    def test_pure_pair_steady_state(self, nbar):
        ops = build_collective_ops(DickeSpace(2))
        rho = steady_state(spin_liouvillian(ops, SqueezingParams.minimal(nbar)))
        assert np.trace(rho @ rho).real >= 1.0 - 1e-6

    def test_vacuum_ground_state(self):
        ops = build_collective_ops(DickeSpace(4))
        rho = steady_state(spin_liouvillian(ops, SqueezingParams(0.0, 0.0)))
        expected = np.zeros((5, 5))
        expected[0, 0] = 1.0
        assert np.max(np.abs(rho - expected)) < 1e-10

    def test_residual_and_positivity(self):
        ops = build_collective_ops(DickeSpace(6))
        liouv = spin_liouvillian(ops, SqueezingParams.minimal(0.3))
        rho = steady_state(liouv)
        assert np.max(np.abs(liouv.apply(rho))) < 1e-10
        assert np.min(np.linalg.eigvalsh(rho)) > -1e-10

    def test_degenerate_generator_reported(self):
        # a zero system operator leaves every state stationary
        liouv = Liouvillian(op=np.zeros((3, 3)), params=SqueezingParams(0.5, 0.0))
        with pytest.raises(DegenerateSteadyStateError):
            steady_state(liouv)


class TestOscillatorOracle:
    def test_equilibrium_variances(self):
        p = SqueezingParams.minimal(0.5)
        traj = oscillator_oracle(p, 20.0, record_every=10 ** 9)
        cut = traj.states.shape[1]
        a = annihilation_operator(cut)
        x = a + a.conj().T
        y = 1j * (a.conj().T - a)
        assert traj.sym_covariances(x, x)[-1] == pytest.approx(2 + math.sqrt(3), abs=1e-6)
        assert traj.sym_covariances(y, y)[-1] == pytest.approx(2 - math.sqrt(3), abs=1e-6)

    def test_vacuum_stays_vacuum(self):
        traj = oscillator_oracle(SqueezingParams(0.0, 0.0), 5.0, cutoff=8,
                                 record_every=10 ** 9)
        a = annihilation_operator(8)
        x = a + a.conj().T
        assert traj.sym_covariances(x, x)[-1] == pytest.approx(1.0, abs=1e-9)

    def test_mean_decay_rate_independent_of_squeezing(self):
        # cutoff well above the default so truncation stays below the tolerance
        rates = []
        for p in (SqueezingParams(1.0, 0.0), SqueezingParams.minimal(1.0)):
            traj = oscillator_oracle(p, 2.0, alpha=1.0, cutoff=80,
                                     rtol=1e-11, atol=1e-13)
            cut = traj.states.shape[1]
            a = annihilation_operator(cut)
            rates.append(fit_decay_rate(traj.times, traj.expectations(a + a.conj().T)))
        assert rates[0] == pytest.approx(0.5, abs=1e-8)
        assert rates[0] == pytest.approx(rates[1], abs=1e-8)

    def test_insufficient_cutoff_reported(self):
        with pytest.raises(CutoffError):
            oscillator_oracle(SqueezingParams.minimal(2.0), 5.0, cutoff=4)

    def test_coherent_state_overflow_reported(self):
        with pytest.raises(CutoffError):
            oscillator_oracle(SqueezingParams(0.0, 0.0), 1.0, cutoff=6, alpha=4.0)
