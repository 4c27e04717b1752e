import pytest

from cosserat_cre.section import Material, rect_section, shear_modulus_default


class TestRectangle:
    def test_reference_values(self, section):
        s = section
        assert s.A == pytest.approx(5.0e-5)
        assert s.K33 == pytest.approx(1.04e4)
        assert s.J11 == pytest.approx(2.1667e-2, rel=1e-4)
        assert s.J22 == pytest.approx(8.6667e-2, rel=1e-4)
        assert s.I11 == pytest.approx(3.125e-7)
        assert s.I22 == pytest.approx(1.25e-6)
        assert s.mu == pytest.approx(0.15)

    def test_identities(self, section):
        s = section
        G = shear_modulus_default(2.08e8)
        assert s.J33 == pytest.approx(G / 2.08e8 * (s.J11 + s.J22), rel=1e-15)
        assert s.I33 == pytest.approx(s.I11 + s.I22, rel=1e-15)

    def test_square(self):
        s = rect_section(0.02, 0.02, Material(1e9, 1000.0))
        assert s.J11 == s.J22
        assert s.I11 == s.I22

    def test_thickness_scaling(self):
        m = Material(1e9, 1000.0)
        a, b = rect_section(0.02, 0.01, m), rect_section(0.02, 0.02, m)
        assert b.J11 / a.J11 == pytest.approx(8.0)
        assert b.J22 / a.J22 == pytest.approx(2.0)

    def test_hashable(self, section):
        assert hash(section) == hash(rect_section(0.01, 0.005, Material(2.08e8, 3000.0)))

    @pytest.mark.parametrize("B, D", [(0.0, 0.01), (0.01, -1.0)])
    def test_rejects_bad_dimensions(self, B, D):
        with pytest.raises(ValueError):
            rect_section(B, D, Material(1e9, 1000.0))

    def test_rejects_bad_material(self):
        with pytest.raises(ValueError):
            Material(-1.0, 1000.0)


class TestShearModulus:
    def test_default(self):
        assert shear_modulus_default(2.08e8, 0.3) == pytest.approx(8.0e7)

    def test_limits(self):
        assert shear_modulus_default(3.0, 0.0) == pytest.approx(1.5)
        assert shear_modulus_default(3.0, 0.5) == pytest.approx(1.0)

    def test_out_of_range(self):
        with pytest.raises(ValueError):
            shear_modulus_default(1.0, 0.6)
