import numpy as np
import pytest

from cosserat_cre.jets import jet_space
from cosserat_cre.kinematics import (
    DegenerateAxisError,
    DirectorState,
    RotParams,
    angular_strain,
    cubic_directors,
    frame_cubic,
    frame_exact,
    nu_from_phi,
    phi_from_nu,
    tangent_params,
)
from cosserat_cre.so3 import log_rotmat


def state(nu1, nu2, vp=0.0):
    return DirectorState(nu1, nu2, float(np.sqrt(1.0 - nu1 * nu1 - nu2 * nu2)), vp)


def frame_error(a):
    st = state(a, a, a)
    ex, cu = frame_exact(st), frame_cubic(st)
    return max(np.abs(getattr(ex, d) - getattr(cu, d)).max() for d in ("d1", "d2", "d3"))


class TestExactFrame:
    def test_reference(self):
        np.testing.assert_array_equal(frame_exact(DirectorState(0, 0, 1, 0)).matrix, np.eye(3))

    def test_planar_tilt(self):
        th = 0.3
        f = frame_exact(DirectorState(np.sin(th), 0.0, np.cos(th), 0.0))
        np.testing.assert_allclose(f.d1, [np.cos(th), 0.0, -np.sin(th)], atol=1e-15)
        np.testing.assert_allclose(f.d2, [0.0, 1.0, 0.0], atol=1e-15)
        np.testing.assert_allclose(f.d3, [np.sin(th), 0.0, np.cos(th)], atol=1e-15)

    def test_orthonormal(self, rng):
        for _ in range(500):
            d3 = rng.normal(size=3)
            d3 /= np.linalg.norm(d3)
            if d3[2] < -0.99:
                continue
            f = frame_exact(DirectorState(*d3, rng.uniform(-np.pi, np.pi)))
            R = f.matrix
            np.testing.assert_allclose(R.T @ R, np.eye(3), atol=1e-12)
            assert np.linalg.det(R) == pytest.approx(1.0, abs=1e-12)

    def test_near_axis_branches_are_continuous(self):
        for q in (1e-10, 1e-7, 1e-3):
            n1 = np.sqrt(q / 2)
            f = frame_exact(state(n1, n1, 0.2))
            np.testing.assert_allclose(f.matrix.T @ f.matrix, np.eye(3), atol=1e-12)
            np.testing.assert_allclose(f.d3, [n1, n1, np.sqrt(1 - q)], atol=1e-15)

    def test_axis_snap_below_threshold(self):
        n1 = np.sqrt(1e-15 / 2)
        f = frame_exact(state(n1, n1, 0.2))
        np.testing.assert_allclose(f.d3, [0.0, 0.0, 1.0], atol=0)
        c, s = np.cos(0.2), np.sin(0.2)
        np.testing.assert_allclose(f.d1, [c, s, 0.0], atol=1e-15)


class TestCubicFrame:
    def test_reference(self):
        np.testing.assert_array_equal(frame_cubic(DirectorState(0, 0, 1, 0)).matrix, np.eye(3))

    def test_axial_director(self):
        d3 = cubic_directors(0.03, -0.02, 0.1)[2]
        np.testing.assert_allclose(d3, [0.03, -0.02, 1 - 0.5 * 0.03**2 - 0.5 * 0.02**2], rtol=1e-15)

    def test_fourth_order_convergence(self):
        amps = np.array([0.01, 0.02, 0.04])
        errs = np.array([frame_error(a) for a in amps])
        ratios = errs[1:] / errs[:-1]
        assert np.all((ratios > 8.0) & (ratios < 32.0))
        slope = np.polyfit(np.log(amps), np.log(errs), 1)[0]
        assert 3.5 <= slope <= 4.5

    def test_large_amplitude_warns(self):
        with pytest.warns(RuntimeWarning):
            frame_cubic(state(0.6, 0.0))


class TestRotationParameterMaps:
    def test_zero(self):
        assert phi_from_nu(DirectorState(0, 0, 1, 0)) == RotParams(0.0, 0.0, 0.0)
        assert nu_from_phi(RotParams(0, 0, 0)) == DirectorState(0.0, 0.0, 1.0, 0.0)

    def test_leading_order(self):
        a = 1e-6
        p = phi_from_nu(state(a, 2 * a, 3 * a))
        np.testing.assert_allclose([p.phix, p.phiy, p.phiz], [-2 * a, a, 3 * a], rtol=0, atol=1e-11)
        s = nu_from_phi(RotParams(a, 2 * a, 3 * a))
        np.testing.assert_allclose([s.nu1, s.nu2, s.varphi], [2 * a, -a, 3 * a], rtol=0, atol=1e-11)

    def test_against_exact_log(self):
        st = state(0.05, -0.03, 0.02)
        p = phi_from_nu(st)
        exact = log_rotmat(frame_exact(st).matrix)
        np.testing.assert_allclose([p.phix, p.phiy, p.phiz], exact, atol=5e-7)

    @staticmethod
    def composition_residual(x):
        back = nu_from_phi(*phi_from_nu(*x))
        return float(np.abs(np.asarray(back) - x).max())

    def test_composition_bound(self, rng):
        # amplitude is the Euclidean norm of (nu1, nu2, varphi)
        dirs = rng.normal(size=(2000, 3))
        dirs /= np.linalg.norm(dirs, axis=1)[:, None]
        worst = max(self.composition_residual(0.05 * d) for d in dirs)
        assert worst <= 1e-6

    def composition_slope(self, d):
        amps = np.array([0.0125, 0.025, 0.05])
        res = [self.composition_residual(a * d / np.linalg.norm(d)) for a in amps]
        return np.polyfit(np.log(amps), np.log(res), 1)[0]

    def test_composition_fifth_order_without_twist(self):
        assert 4.5 <= self.composition_slope(np.array([1.0, -0.6, 0.0])) <= 5.5

    def test_composition_fourth_order_with_twist(self):
        # quadratic nu*varphi terms leave an amplitude^4 residual
        assert 3.5 <= self.composition_slope(np.array([1.0, -0.6, 0.8])) <= 4.5

    def test_jet_overloads_match_numbers(self, rng):
        sp = jet_space(3, 3)
        jv = phi_from_nu(*sp.variables())
        jd = cubic_directors(*sp.variables())
        for _ in range(5):
            x = rng.uniform(-1e-2, 1e-2, size=3)
            ref = phi_from_nu(*x)
            for j, r in zip(jv, ref):
                assert j.evaluate(x) == pytest.approx(r, rel=1e-9, abs=1e-18)
            for jrow, nrow in zip(jd, cubic_directors(*x)):
                for j, r in zip(jrow, nrow):
                    assert j.evaluate(x) == pytest.approx(r, rel=1e-9, abs=1e-18)


class TestAngularStrain:
    def test_constant_frame(self):
        f = frame_exact(state(0.1, 0.2, 0.3))
        np.testing.assert_allclose(angular_strain(lambda s: f, 0.5), 0.0, atol=1e-15)

    def test_pure_twist(self):
        kappa = 2.5
        u = angular_strain(lambda s: frame_exact(DirectorState(0.0, 0.0, 1.0, kappa * s)), 0.3)
        np.testing.assert_allclose(u, [0.0, 0.0, kappa], atol=1e-9)

    def test_planar_bend(self):
        kappa = 1.7
        u = angular_strain(lambda s: frame_exact(DirectorState(np.sin(kappa * s), 0.0, np.cos(kappa * s), 0.0)), 0.0)
        np.testing.assert_allclose(u, [0.0, kappa, 0.0], atol=1e-9)


class TestTangent:
    def test_reference(self):
        st, v3 = tangent_params([0.0, 0.0, 1.0])
        assert (st.nu1, st.nu2, st.nu3, v3) == (0.0, 0.0, 1.0, 1.0)

    def test_tilted(self):
        st, v3 = tangent_params([0.1, 0.0, 1.0])
        np.testing.assert_allclose([st.nu1, st.nu2, st.nu3, v3], [0.0995037, 0.0, 0.9950372, 1.0049876], atol=1e-7)

    def test_stretch(self):
        st, v3 = tangent_params([0.0, 0.0, 2.0])
        assert (st.nu3, v3) == (1.0, 2.0)

    def test_degenerate(self):
        with pytest.raises(DegenerateAxisError):
            tangent_params([0.0, 0.0, 0.0])
