import numpy as np
import pytest
from hypothesis import given, settings

import disk_forms as disk
import uncorrected_forms as uf
from conftest import dims, seeds
from sjball import ModelParams
from sjball import geodesics as gd
from sjball.core import aux_matrices, random_ball_matrix, random_point, random_symmetric
from sjball.errors import InvalidStateError, NotSymmetricError


def _random_state(n, rng, vscale=0.3, radius=0.5):
    pt = random_point(n, rng, radius=radius, z_scale=0.5)
    vz = vscale * (rng.normal(size=n) + 1j * rng.normal(size=n))
    return gd.GeodesicState(pt.z, pt.Wm, vz, random_symmetric(n, rng, vscale))


class TestState:
    def test_rejects_asymmetric_velocity(self):
        with pytest.raises(InvalidStateError):
            gd.GeodesicState(np.zeros(2), np.zeros((2, 2)), np.zeros(2), [[0, 1], [0, 0]])

    def test_rejects_outside_ball(self):
        with pytest.raises(InvalidStateError):
            gd.GeodesicState([0], [[1.2]], [0], [[0]])

    def test_rejects_shapes(self):
        with pytest.raises(InvalidStateError):
            gd.GeodesicState(np.zeros(2), np.zeros((3, 3)), np.zeros(2), np.zeros((2, 2)))

    def test_flat_round_trip(self, rng):
        s = _random_state(2, rng)
        t = gd.GeodesicState.from_flat(s.point.to_flat(), s.velocity_flat, 2)
        assert np.array_equal(t.vW, s.vW) and np.array_equal(t.z, s.z)


class TestRhs:
    def test_origin(self, rng):
        p = ModelParams(2, 3.0, 1.5)
        vz = rng.normal(size=2) + 1j * rng.normal(size=2)
        az, aW = gd.geodesic_rhs(p, gd.GeodesicState(np.zeros(2), np.zeros((2, 2)), vz, np.zeros((2, 2))))
        assert not np.any(az)
        assert np.allclose(aW, -2 * p.epsilon * np.outer(vz, vz), rtol=1e-15, atol=0)

    @pytest.mark.parametrize("seed", range(5))
    def test_disk(self, seed):
        rng = np.random.default_rng(seed)
        k, mu = 3.0, 1.5
        s = _random_state(1, rng)
        az, aW = gd.geodesic_rhs(ModelParams(1, k, mu), s)
        rz, rw = disk.geodesic_acceleration(k, mu, s.z[0], s.W[0, 0], s.vz[0], s.vW[0, 0])
        assert abs(az[0] - rz) < 1e-12 * max(1, abs(rz))
        assert abs(aW[0, 0] - rw) < 1e-12 * max(1, abs(rw))

    @given(seeds, dims)
    def test_matches_christoffel(self, seed, n):
        p = ModelParams(n, 3.0, 1.5)
        s = _random_state(n, np.random.default_rng(seed), vscale=1.0, radius=0.8)
        a = np.concatenate([x.ravel() for x in gd.geodesic_rhs(p, s)])
        b = np.concatenate([x.ravel() for x in gd.christoffel_acceleration(p, s)])
        assert np.max(np.abs(a - b)) < 1e-9 * max(1.0, np.max(np.abs(a)))

    @given(seeds, dims)
    def test_symmetric_acceleration(self, seed, n):
        _, aW = gd.geodesic_rhs(ModelParams(n, 3.0, 1.5), _random_state(n, np.random.default_rng(seed)))
        assert np.array_equal(aW, aW.T)

    def test_uncorrected_source_disk_only(self, rng):
        for n in (1, 2, 3):
            p = ModelParams(n, 3.0, 1.5)
            s = _random_state(n, rng, vscale=1.0)
            X = aux_matrices(p, s.point).X
            az, _ = gd.geodesic_rhs(p, s)
            G3 = az + 2 * s.vW @ X @ s.vz
            dev = np.max(np.abs(p.k * G3 - 2 * p.mu * uf.g1(p, s.point, s.vz, s.vW)))
            assert (dev < 1e-12) if n == 1 else (dev > 1e-3)


class TestResidual:
    def test_rhs_is_zero_residual(self, params, rng):
        s = _random_state(params.n, rng)
        assert gd.geodesic_residual(params, s, gd.geodesic_rhs(params, s)) < 1e-12

    def test_linear_in_perturbation(self, params, rng):
        s = _random_state(params.n, rng)
        az, aW = gd.geodesic_rhs(params, s)
        dz = rng.normal(size=params.n)
        r = [gd.geodesic_residual(params, s, (az + h * dz, aW)) for h in (1e-3, 2e-3, 4e-3)]
        assert r[1] / r[0] == pytest.approx(2.0, rel=1e-6)
        assert r[2] / r[0] == pytest.approx(4.0, rel=1e-6)


class TestIntegrator:
    def test_zero_velocity(self, params, rng):
        pt = random_point(params.n, rng)
        s = gd.GeodesicState(pt.z, pt.Wm, np.zeros(params.n), np.zeros((params.n, params.n)))
        tr = gd.integrate_geodesic(params, s, 1.0, steps=10)
        assert all(np.array_equal(x.W, pt.Wm) and np.array_equal(x.z, pt.z) for x in tr.states)

    def test_mu_zero_matches_closed_form(self, rng):
        n = 2
        B = random_symmetric(n, rng, 0.6)
        s = gd.GeodesicState(np.zeros(n), np.zeros((n, n)), np.zeros(n), B)
        tr = gd.integrate_geodesic(ModelParams(n, 3.0, 0.0), s, 1.0, steps=1000)
        assert np.max(np.abs(tr.states[-1].W - gd.siegel_geodesic_closed_form(B, 1.0))) < 1e-6

    @pytest.mark.parametrize("n", [1, 2])
    def test_speed_drift(self, n, rng):
        p = ModelParams(n, 3.0, 1.5)
        tr = gd.integrate_geodesic(p, _random_state(n, rng), 1.0, steps=1000)
        assert tr.status == "ok"
        assert len(tr.times) == 1001
        assert tr.speed_drift < 1e-8
        assert np.max(tr.residuals) < 1e-5

    def test_adaptive(self, rng):
        p = ModelParams(2, 3.0, 1.5)
        s = _random_state(2, rng)
        tr = gd.integrate_geodesic(p, s, 1.0, rel_tol=1e-10)
        ref = gd.integrate_geodesic(p, s, 1.0, steps=1000)
        assert np.max(np.abs(tr.states[-1].W - ref.states[-1].W)) < 1e-7
        assert tr.speed_drift < 1e-8

    @pytest.mark.parametrize("mode", [dict(steps=2000), dict(rel_tol=1e-8)])
    def test_left_ball(self, mode):
        s = gd.GeodesicState([0.0], [[0.0]], [0.0], [[6.0]])
        tr = gd.integrate_geodesic(ModelParams(1, 3.0, 0.0), s, 5.0, **mode)
        assert tr.status == "left_ball"
        assert tr.times[-1] < 5.0
        assert "left the ball" in tr.message

    def test_bad_arguments(self, params, rng):
        s = _random_state(params.n, rng)
        with pytest.raises(ValueError):
            gd.integrate_geodesic(params, s, -1.0)
        with pytest.raises(ValueError):
            gd.integrate_geodesic(params, s, 1.0, steps=10, rel_tol=1e-6)
        with pytest.raises(ValueError):
            gd.integrate_geodesic(params, s, 1.0, steps=0)


class TestSiegelClosedForm:
    def test_scalar(self):
        b = 0.7
        for t in (0.0, 0.5, 3.0):
            assert gd.siegel_geodesic_closed_form([[b]], t)[0, 0] == pytest.approx(np.tanh(b * t), abs=1e-15)

    def test_zero(self):
        assert not np.any(gd.siegel_geodesic_closed_form(np.zeros((2, 2)), 2.0))

    def test_asymmetric(self):
        with pytest.raises(NotSymmetricError):
            gd.siegel_geodesic_closed_form([[0, 1], [0, 0]], 1.0)

    def test_stacked(self):
        Ws = gd.siegel_geodesic_closed_form([[0.5]], np.linspace(0, 1, 4))
        assert Ws.shape == (4, 1, 1)

    @given(seeds, dims)
    def test_stays_in_ball_and_symmetric(self, seed, n):
        B = random_symmetric(n, seed, 2.0)
        for t in (0.1, 1.0, 5.0):
            W = gd.siegel_geodesic_closed_form(B, t)
            assert np.array_equal(W, W.T)
            assert np.linalg.norm(W, 2) < 1.0 + 1e-12

    @settings(max_examples=10)
    @given(seeds, dims)
    def test_fd_residual(self, seed, n):
        B = random_symmetric(n, seed, 0.5)
        assert gd.siegel_fd_residual(B, np.linspace(0, 1, 101)) < 1e-10

    def test_singular_velocity(self):
        v = np.array([1.0, 2.0j])
        B = 0.3 * np.outer(v, v)
        assert gd.siegel_fd_residual(B, np.linspace(0, 1, 101)) < 1e-10

    def test_jet_is_exact(self, rng):
        n = 3
        B = random_symmetric(n, rng, 0.7)
        W, dW, ddW = gd.siegel_geodesic_jet(B, 0.8)
        X = W.conj() @ np.linalg.inv(np.eye(n) - W @ W.conj())
        assert np.max(np.abs(ddW + 2 * dW @ X @ dW)) < 1e-13


class TestMuZero:
    def test_zero_velocity(self, rng):
        z0 = rng.normal(size=2) + 0j
        z = gd.mu_zero_z_solution(random_symmetric(2, rng), np.zeros(2), z0, 0.7)
        assert np.array_equal(z, z0)

    def test_scalar(self):
        b, vz0, z0 = 0.8, 0.3 - 0.1j, 0.2j
        for t in (0.5, 2.0):
            z = gd.mu_zero_z_solution([[b]], [vz0], [z0], t)[0]
            assert z == pytest.approx(np.tanh(b * t) * vz0 / b + z0, abs=1e-15)

    def test_matches_inverse_form(self, rng):
        n = 2
        B = random_symmetric(n, rng, 0.6)
        vz0, z0 = rng.normal(size=n) + 0j, rng.normal(size=n) + 0j
        W = gd.siegel_geodesic_closed_form(B, 0.9)
        ref = W @ np.linalg.solve(B, vz0) + z0
        assert np.max(np.abs(gd.mu_zero_z_solution(B, vz0, z0, 0.9) - ref)) < 1e-12

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_fd_residual(self, n, rng):
        B = random_symmetric(n, rng, 0.5)
        vz0 = rng.normal(size=n) + 1j * rng.normal(size=n)
        z0 = rng.normal(size=n) + 1j * rng.normal(size=n)
        times = np.linspace(0, 1, 101)
        st = [gd.mu_zero_jet(B, vz0, z0, t)[0] for t in times]
        r = gd.fd_residuals(ModelParams(n, 3.0, 0.0), times, [s.z for s in st], [s.W for s in st])
        assert np.max(r) < 1e-8

    def test_exact_jet(self, rng):
        B = random_symmetric(2, rng, 0.5)
        s, acc = gd.mu_zero_jet(B, rng.normal(size=2), rng.normal(size=2), 0.6)
        assert gd.geodesic_residual(ModelParams(2, 3.0, 0.0), s, acc) < 1e-12


class TestFcParticular:
    def test_eta_zero(self, rng):
        s = gd.fc_particular_geodesic(np.zeros(2), random_symmetric(2, rng), 0.5)
        assert not np.any(s.z)

    def test_b_zero(self, rng):
        eta0 = rng.normal(size=2) + 1j * rng.normal(size=2)
        s = gd.fc_particular_geodesic(eta0, np.zeros((2, 2)), 0.5)
        assert np.array_equal(s.z, eta0) and not np.any(s.W)

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_exact_residual(self, n, rng):
        p = ModelParams(n, 3.0, 1.0)
        eta0 = rng.normal(size=n) + 1j * rng.normal(size=n)
        B = random_symmetric(n, rng, 0.6)
        for t in np.linspace(0, 1, 20):
            s, acc = gd.fc_particular_jet(eta0, B, t)
            assert gd.geodesic_residual(p, s, acc) < 1e-9

    def test_fd_residual(self, rng):
        p = ModelParams(2, 3.0, 1.0)
        eta0 = rng.normal(size=2) + 1j * rng.normal(size=2)
        B = random_symmetric(2, rng, 0.6)
        times = np.linspace(0, 1, 101)
        st = [gd.fc_particular_geodesic(eta0, B, t) for t in times]
        assert np.max(gd.fd_residuals(p, times, [s.z for s in st], [s.W for s in st])) < 1e-9

    def test_eta_is_constant(self, rng):
        p = ModelParams(2, 3.0, 1.0)
        eta0 = rng.normal(size=2) + 1j * rng.normal(size=2)
        s = gd.fc_particular_geodesic(eta0, random_symmetric(2, rng, 0.6), 0.7)
        assert np.max(np.abs(aux_matrices(p, s.point).eta - eta0)) < 1e-12

    def test_integrator_follows(self, rng):
        p = ModelParams(2, 3.0, 1.0)
        eta0 = rng.normal(size=2) + 1j * rng.normal(size=2)
        B = random_symmetric(2, rng, 0.6)
        tr = gd.integrate_geodesic(p, gd.fc_particular_geodesic(eta0, B, 0.0), 1.0, steps=500)
        end = gd.fc_particular_geodesic(eta0, B, 1.0)
        assert np.max(np.abs(tr.states[-1].z - end.z)) < 1e-9


def test_fd_residuals_need_uniform_times():
    times = np.array([0.0, 0.1, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9])
    W = random_ball_matrix(1, 0)
    with pytest.raises(ValueError):
        gd.fd_residuals(ModelParams(1, 1.0, 1.0), times, np.zeros((9, 1)), np.repeat(W[None], 9, 0))
