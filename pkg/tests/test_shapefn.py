import numpy as np
import pytest

from cosserat_cre.jets import PolyJet, jet_space
from cosserat_cre.kinematics import nu_from_phi, tangent_params
from cosserat_cre.shapefn import (
    NodalDisplacement,
    eval_shape,
    jet_shape,
    solve_shape,
    static_residual,
)

L = 0.2
# small enough that the axial load stays well below buckling
QA = np.array([1e-3, -2e-3, 3e-5, 1e-3, 2e-3, -1e-3])
QB = np.array([2e-3, 1e-3, -1e-5, -2e-3, 1e-3, 3e-3])


def unit(k):
    q = np.zeros(6)
    q[k] = 1.0
    return q


@pytest.fixture(scope="module")
def cubic(section):
    return solve_shape(QA, QB, section, L, order=3)


@pytest.fixture(scope="module")
def symbolic(section):
    return jet_shape(section, L, 3)


class TestLinearShapes:
    def test_translation_is_hermite(self, section):
        s = np.linspace(0.0, L, 7)
        h = 3 * (s / L) ** 2 - 2 * (s / L) ** 3
        sh = solve_shape(np.zeros(6), unit(0), section, L, order=1)
        np.testing.assert_allclose(np.polynomial.polynomial.polyval(s, sh.orders["x"][0]), h, atol=1e-12)

    def test_rotation_is_hermite(self, section):
        s = np.linspace(0.0, L, 7)
        h = L * ((s / L) ** 2 - (s / L) ** 3)
        sh = solve_shape(np.zeros(6), unit(3), section, L, order=1)
        np.testing.assert_allclose(np.polynomial.polynomial.polyval(s, sh.orders["y"][0]), h, atol=1e-12)

    def test_axial_and_twist_are_linear(self, section):
        for k, f in ((2, "z"), (5, "phi")):
            c = solve_shape(np.zeros(6), unit(k), section, L, order=1).orders[f][0]
            np.testing.assert_allclose(c[:2], [0.0, 1.0 / L], atol=1e-12)
            np.testing.assert_allclose(c[2:], 0.0, atol=1e-9)

    def test_nodal_dataclass(self, section):
        a = solve_shape(NodalDisplacement(), NodalDisplacement(X=1.0), section, L, order=1)
        b = solve_shape(np.zeros(6), unit(0), section, L, order=1)
        np.testing.assert_array_equal(a.orders["x"][0], b.orders["x"][0])
        np.testing.assert_array_equal(NodalDisplacement.from_array(QA).as_array(), QA)


class TestCubicShape:
    def test_end_positions(self, cubic):
        (xa, ya, za, _), _ = eval_shape(cubic, 0.0)
        (xb, yb, zb, _), _ = eval_shape(cubic, L)
        np.testing.assert_allclose([xa, ya, za], QA[:3], atol=1e-10)
        np.testing.assert_allclose([xb, yb, zb], QB[:3] + [0.0, 0.0, L], atol=1e-10)

    def test_end_rotations(self, section):
        # nodal tangents are matched through order three in the amplitude
        def mismatch(a):
            sh = solve_shape(a * QA, a * QB, section, L, order=3)
            worst = 0.0
            for sigma, q in ((0.0, a * QA), (L, a * QB)):
                (_, _, _, vp), (xp, yp, zp, _) = eval_shape(sh, sigma)
                st, _ = tangent_params([xp, yp, zp])
                worst = max(worst, np.abs(np.array([st.nu1, st.nu2, vp]) - nu_from_phi(*q[3:])).max())
            return worst

        assert mismatch(1.0) < 1e-8
        assert 12.0 < mismatch(1.0) / mismatch(0.5) < 20.0

    def test_orders_solved(self, cubic):
        assert [r["order"] for r in cubic.residuals] == [1, 2, 3]
        assert all(r["relative"] < 1e-9 for r in cubic.residuals)

    def test_static_residual_vanishes_through_order_three(self, cubic, section):
        sp = jet_space(1, 4)
        fields = []
        for f in ("x", "y", "z", "phi"):
            n = max(len(c) for c in cubic.orders[f])
            c = np.zeros((max(n, 2), sp.size))
            if f == "z":
                c[1, 0] = 1.0
            for k, part in enumerate(cubic.orders[f], start=1):
                c[: len(part), sp.degree_start[k]] += part
            fields.append(PolyJet(sp, c))
        for s0 in np.linspace(0.0, L, 5):
            local = [p.taylor(s0, 4) for p in fields]
            for r in static_residual(*local, section):
                head = r.c[0]
                scale = np.abs(r.c[0, sp.degree_start[4]]) + 1.0
                np.testing.assert_allclose(head[: sp.degree_start[4]], 0.0, atol=1e-6 * scale)

    def test_sigma_out_of_range(self, cubic):
        with pytest.raises(ValueError):
            eval_shape(cubic, 1.01 * L)

    @pytest.mark.parametrize("bad", [dict(l=0.0), dict(order=4)])
    def test_rejects_bad_arguments(self, section, bad):
        kw = dict(l=L, order=3) | bad
        with pytest.raises(ValueError):
            solve_shape(QA, QB, section, kw["l"], kw["order"])


class TestSymbolicShape:
    def test_specialization_matches_numeric(self, symbolic, section):
        num = solve_shape(QA, QB, section, L, order=3)
        special = symbolic.specialize(np.concatenate([QA, QB]))
        for f in ("x", "y", "z", "phi"):
            a, b = special.poly(f), num.poly(f)
            n = max(len(a), len(b))
            np.testing.assert_allclose(np.pad(a, (0, n - len(a))), np.pad(b, (0, n - len(b))), atol=1e-10)

    def test_specialize_rejects_numeric(self, section):
        with pytest.raises(TypeError):
            solve_shape(QA, QB, section, L).specialize(QA)

    def test_cached(self, section):
        assert jet_shape(section, L, 3) is jet_shape(section, L, 3)

    def test_coefficient_table_deterministic(self, symbolic):
        t1, t2 = symbolic.coefficient_table(), symbolic.coefficient_table()
        assert t1 == t2
        assert all(k in (1, 2, 3) and sum(m) == k for _, k, _, m, _ in t1)

    def test_linear_part_is_hermite(self, symbolic):
        x1 = symbolic.orders["x"][0]
        # coefficient of X_b in x: 3 s^2 / l^2 - 2 s^3 / l^3
        col = x1.c[:, symbolic.space.index(np.eye(12, dtype=int)[6])]
        np.testing.assert_allclose(col[:4], [0.0, 0.0, 3 / L**2, -2 / L**3], atol=1e-9)
