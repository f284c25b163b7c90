import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import dims, seeds
from sjball import JacobiBallPoint, ModelParams
from sjball.core import (
    CoordinateIndexMap,
    aux_matrices,
    delta_matrix,
    delta_tensor,
    flatten,
    index_map,
    random_ball_matrix,
    random_point,
    unflatten,
    validate_ball_point,
)
from sjball.errors import NonFiniteError, NotInBallError, NotSymmetricError, OutOfRangeError


class TestModelParams:
    def test_fields_and_derived(self):
        p = ModelParams(2, 3.0, 1.5)
        assert p.epsilon == 0.5
        assert p.dim == 5

    @pytest.mark.parametrize("bad", [dict(n=0, k=1, mu=1), dict(n=1, k=0, mu=1), dict(n=1, k=1, mu=-1),
                                     dict(n=1, k=np.inf, mu=1), dict(n=True, k=1, mu=1), dict(n=1.5, k=1, mu=1)])
    def test_rejects(self, bad):
        with pytest.raises(ValueError):
            ModelParams(**bad)

    def test_mu_zero_allowed(self):
        assert ModelParams(1, 1.0, 0.0).epsilon == 0.0

    def test_frozen(self):
        p = ModelParams(1, 1.0, 1.0)
        with pytest.raises(AttributeError):
            p.k = 2.0


class TestValidateBallPoint:
    def test_zero(self):
        pt = validate_ball_point(np.zeros((3, 3)))
        assert np.array_equal(np.eye(3) - pt.W @ pt.W.conj(), np.eye(3))

    def test_scalar_half(self):
        pt = validate_ball_point([[0.5]])
        assert (1 - abs(pt.W[0, 0]) ** 2) == pytest.approx(0.75)

    def test_boundary(self):
        with pytest.raises(NotInBallError):
            validate_ball_point([[1.0]])

    def test_outside(self):
        with pytest.raises(NotInBallError):
            validate_ball_point(np.diag([0.2, 1.3]))

    def test_asymmetric(self):
        with pytest.raises(NotSymmetricError):
            validate_ball_point([[0.1, 0.2], [0.0, 0.1]])

    def test_tiny_asymmetry_symmetrized(self):
        W = np.array([[0.1, 0.2], [0.2 + 1e-14, 0.1]])
        pt = validate_ball_point(W)
        assert np.array_equal(pt.W, pt.W.T)

    def test_nonfinite(self):
        with pytest.raises(NonFiniteError):
            validate_ball_point([[np.nan]])

    def test_readonly(self):
        pt = validate_ball_point([[0.1]])
        with pytest.raises(ValueError):
            pt.W[0, 0] = 0.2

    @given(seeds, dims, st.floats(min_value=0.0, max_value=0.4))
    def test_accepts_iff_margin_above_tol(self, seed, n, tol):
        W = random_ball_matrix(n, seed, radius=0.9)
        lam = np.linalg.eigvalsh(np.eye(n) - W @ W.conj())[0]
        if lam > tol:
            validate_ball_point(W, tol=tol)
        else:
            with pytest.raises(NotInBallError):
                validate_ball_point(W, tol=tol)


class TestJacobiBallPoint:
    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            JacobiBallPoint(np.zeros(2), validate_ball_point(np.zeros((3, 3))))

    def test_accepts_raw_matrix(self):
        pt = JacobiBallPoint([0.0], [[0.3]])
        assert pt.n == 1

    @given(seeds, dims)
    def test_flat_round_trip(self, seed, n):
        pt = random_point(n, seed)
        back = JacobiBallPoint.from_flat(pt.to_flat())
        assert np.array_equal(back.z, pt.z)
        assert np.array_equal(back.Wm, pt.Wm)

    def test_flatten_order(self):
        W = np.array([[1, 2], [2, 3]], dtype=complex)
        u = flatten(np.array([10, 20]), W)
        assert list(u.real) == [10, 20, 1, 2, 3]
        z, W2 = unflatten(u, 2)
        assert np.array_equal(W2, W)


class TestIndexMap:
    def test_n2_ordering(self):
        im = index_map(2)
        assert [im.flat_index(s) for s in ("z1", "z2", "w11", "w12", "w22")] == [0, 1, 2, 3, 4]
        assert im.label_of(4) == "w22"

    def test_lower_pair_maps_to_upper(self):
        im = index_map(3)
        assert im.w_index(2, 1) == im.w_index(1, 2) == im.flat_index("w21")

    def test_total_dim(self):
        assert index_map(3).total_dim == 9

    @pytest.mark.parametrize("n", [1, 2, 3, 4, 11])
    def test_bijection(self, n):
        im = CoordinateIndexMap(n)
        assert [im.flat_index(im.label_of(i)) for i in range(im.total_dim)] == list(range(im.total_dim))

    def test_wide_labels(self):
        assert CoordinateIndexMap(11).label_of(CoordinateIndexMap(11).w_index(3, 11)) == "w3,11"

    @pytest.mark.parametrize("bad", ["z3", "w13", "x1", "w1", "z0"])
    def test_out_of_range_label(self, bad):
        with pytest.raises(OutOfRangeError):
            index_map(2).flat_index(bad)

    def test_out_of_range_index(self):
        with pytest.raises(OutOfRangeError):
            index_map(2).label_of(5)
        with pytest.raises(IndexError):
            index_map(2).label_of(-1)


class TestDelta:
    def test_examples(self):
        assert delta_tensor(1, 2, 1, 2) == 1
        assert delta_tensor(1, 1, 1, 1) == 1
        assert delta_tensor(1, 1, 1, 2) == 0

    def test_symmetries(self):
        for i, j, p, q in np.ndindex(3, 3, 3, 3):
            v = delta_tensor(i, j, p, q)
            assert v == delta_tensor(j, i, p, q) == delta_tensor(i, j, q, p)

    @pytest.mark.parametrize("n", [1, 2, 3, 4])
    def test_identity_on_ordered_pairs(self, n):
        assert np.array_equal(delta_matrix(n), np.eye(n * (n + 1) // 2))


class TestAuxMatrices:
    def test_origin(self):
        a = aux_matrices(ModelParams(2, 1.0, 1.0), JacobiBallPoint.origin(2))
        assert np.array_equal(a.M, np.eye(2))
        assert not np.any(a.X) and not np.any(a.eta) and not np.any(a.S)
        assert a.alpha == 0.0

    def test_disk_values(self):
        a = aux_matrices(ModelParams(1, 2.0, 1.0), JacobiBallPoint([1.0], [[0.5]]))
        assert a.eta[0] == pytest.approx(2.0)
        assert a.S[0] == pytest.approx(1.5)
        assert a.alpha == pytest.approx(3.0)

    @given(seeds, dims)
    def test_invariants(self, seed, n):
        pt = random_point(n, seed)
        a = aux_matrices(ModelParams(n, 2.0, 1.0), pt)
        assert np.max(np.abs(a.M @ a.N - np.eye(n))) < 1e-12 * np.linalg.cond(a.N)
        assert np.max(np.abs(a.X - a.X.T)) < 1e-12
        rebuilt = a.eta - pt.Wm @ a.eta.conj()
        assert np.max(np.abs(rebuilt - pt.z)) < 1e-12 * max(1.0, np.max(np.abs(a.eta)))
        assert a.alpha >= 0
        assert np.allclose(a.S, a.eta @ a.N.conj())

    @given(seeds, dims)
    def test_fc_round_trip(self, seed, n):
        rng = np.random.default_rng(seed)
        W = random_ball_matrix(n, rng)
        eta = rng.normal(size=n) + 1j * rng.normal(size=n)
        pt = JacobiBallPoint(eta - W @ eta.conj(), W)
        back = aux_matrices(ModelParams(n, 1.0, 1.0), pt).eta
        assert np.max(np.abs(back - eta)) < 1e-12 * max(1.0, np.linalg.cond(np.eye(n) - W @ W.conj()))
