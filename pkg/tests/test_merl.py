import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brdfspace import merl
from brdfspace.synthetic import make_material


def rot_y(deg):
    t = np.deg2rad(deg)
    return np.array([
        [np.cos(t), 0.0, np.sin(t)],
        [0.0, 1.0, 0.0],
        [-np.sin(t), 0.0, np.cos(t)],
    ])


def rot_z(deg):
    p = np.deg2rad(deg)
    return np.array([
        [np.cos(p), -np.sin(p), 0.0],
        [np.sin(p), np.cos(p), 0.0],
        [0.0, 0.0, 1.0],
    ])


def oracle_directions(theta_h, theta_d, phi_d):
    """Brute-force construction by explicit rotation matrices."""
    td, pd = np.deg2rad(theta_d), np.deg2rad(phi_d)
    d = np.array([np.sin(td) * np.cos(pd), np.sin(td) * np.sin(pd), np.cos(td)])
    R = rot_z(0.0) @ rot_y(theta_h)
    wi = R @ d
    h = R @ np.array([0.0, 0.0, 1.0])
    wo = 2.0 * np.dot(wi, h) * h - wi
    return wi, wo


@pytest.fixture(scope="module")
def sample_brdf():
    return make_material("sample", (0.4, 0.2, 0.1), (1.5, 1.0, 0.8), 30.0)


class TestIO:
    def test_round_trip_bytes_identical(self, sample_brdf, tmp_path):
        p1 = tmp_path / "a.binary"
        p2 = tmp_path / "b.binary"
        merl.write_merl(sample_brdf, p1)
        again = merl.read_merl(p1)
        merl.write_merl(again, p2)
        assert p1.read_bytes() == p2.read_bytes()
        assert np.array_equal(again.samples, sample_brdf.samples)
        assert again.name == "a"

    def test_two_writes_identical(self, sample_brdf, tmp_path):
        p1 = tmp_path / "a.binary"
        p2 = tmp_path / "b.binary"
        merl.write_merl(sample_brdf, p1)
        merl.write_merl(sample_brdf, p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_bad_header_rejected(self, tmp_path):
        p = tmp_path / "bad.binary"
        import struct

        p.write_bytes(struct.pack("<3i", 90, 90, 90) + b"\0" * 64)
        with pytest.raises(merl.MerlFormatError):
            merl.read_merl(p)

    def test_truncated_payload_rejected(self, sample_brdf, tmp_path):
        p = tmp_path / "t.binary"
        merl.write_merl(sample_brdf, p)
        p.write_bytes(p.read_bytes()[:-100])
        with pytest.raises(IOError):
            merl.read_merl(p)

    def test_wrong_sample_count_rejected(self):
        with pytest.raises(merl.MerlFormatError):
            merl.MerlBRDF(name="x", samples=np.zeros((3, 90, 90, 90)))


class TestIndexMapping:
    def test_zero_case(self):
        assert merl.index_to_angles(0, 0, 0) == (0.0, 0.0, 0.0)

    def test_midpoint_case(self):
        th, td, pd = merl.index_to_angles(45, 45, 90)
        assert th == pytest.approx(22.5, abs=1e-12)
        assert td == pytest.approx(45.0, abs=1e-12)
        assert pd == pytest.approx(90.0, abs=1e-12)

    def test_bounds_errors(self):
        with pytest.raises(IndexError):
            merl.index_to_angles(90, 0, 0)
        with pytest.raises(IndexError):
            merl.index_to_angles(0, 90, 0)
        with pytest.raises(IndexError):
            merl.index_to_angles(0, 0, 180)
        with pytest.raises(IndexError):
            merl.index_to_angles(-1, 0, 0)

    def test_strictly_monotone(self):
        i = np.arange(90)
        th, td, _ = merl.index_to_angles(i, i, np.zeros_like(i))
        assert np.all(np.diff(th) > 0)
        assert np.all(np.diff(td) > 0)
        pd = merl.index_to_angles(0, 0, np.arange(180))[2]
        assert np.all(np.diff(pd) > 0)

    def test_angles_to_index_inverts_all_bins(self):
        ith, itd, ipd = np.meshgrid(
            np.arange(90), np.arange(90), np.arange(0, 180, 7), indexing="ij"
        )
        th, td, pd = merl.index_to_angles(ith, itd, ipd)
        jth, jtd, jpd = merl.angles_to_index(th, td, pd)
        assert np.array_equal(jth, ith)
        assert np.array_equal(jtd, itd)
        assert np.array_equal(jpd, ipd)

    def test_phi_wraps_by_reciprocity(self):
        _, _, ipd = merl.angles_to_index(10.0, 10.0, 181.0)
        assert ipd == 1
        _, _, ipd = merl.angles_to_index(10.0, 10.0, 179.8)
        assert ipd == 0  # nearest bin around the wrap


class TestDirections:
    def test_normal_incidence(self):
        wi, wo = merl.angles_to_directions(0.0, 0.0, 0.0)
        np.testing.assert_allclose(wi, [0, 0, 1], atol=1e-12)
        np.testing.assert_allclose(wo, [0, 0, 1], atol=1e-12)

    def test_mirror_pair_against_oracle(self):
        # theta_h = 0, theta_d = 45: both directions at 45 deg elevation,
        # mirrored about the normal.
        got = merl.angles_to_directions(0.0, 45.0, 0.0)
        assert got is not None
        wi, wo = got
        owi, owo = oracle_directions(0.0, 45.0, 0.0)
        np.testing.assert_allclose(wi, owi, atol=1e-12)
        np.testing.assert_allclose(wo, owo, atol=1e-12)
        assert wi[2] == pytest.approx(np.cos(np.pi / 4), abs=1e-12)
        np.testing.assert_allclose(wi[:2], -wo[:2], atol=1e-12)

    def test_below_horizon_invalid(self):
        assert merl.angles_to_directions(80.0, 80.0, 0.0) is None
        owi, owo = oracle_directions(80.0, 80.0, 0.0)
        assert min(owi[2], owo[2]) < 0

    @settings(max_examples=200, deadline=None)
    @given(
        th=st.floats(0, 89.999),
        td=st.floats(0, 89.999),
        pd=st.floats(0, 179.999),
    )
    def test_directions_match_oracle_and_are_unit(self, th, td, pd):
        wi, wo = merl.half_diff_to_directions(th, td, pd)
        owi, owo = oracle_directions(th, td, pd)
        np.testing.assert_allclose(wi, owi, atol=1e-9)
        np.testing.assert_allclose(wo, owo, atol=1e-9)
        assert abs(np.linalg.norm(wi) - 1.0) < 1e-9
        assert abs(np.linalg.norm(wo) - 1.0) < 1e-9

    @settings(max_examples=200, deadline=None)
    @given(
        th=st.floats(0, 85.0),
        td=st.floats(0, 85.0),
        pd=st.floats(0, 179.0),
    )
    def test_half_vector_recovered(self, th, td, pd):
        wi, wo = merl.half_diff_to_directions(th, td, pd)
        if wi[2] < 1e-6 or wo[2] < 1e-6:
            return
        h = (wi + wo) / np.linalg.norm(wi + wo)
        elevation = np.rad2deg(np.arccos(np.clip(h[2], -1, 1)))
        assert elevation == pytest.approx(th, abs=1e-6)


class TestLookup:
    def test_exact_bin_returns_scaled_value(self, sample_brdf):
        for ith, itd, ipd in [(0, 0, 0), (12, 30, 45), (40, 10, 120), (3, 70, 179)]:
            th, td, pd = merl.index_to_angles(ith, itd, ipd)
            wi, wo = merl.half_diff_to_directions(th, td, pd)
            if wi[2] < 0 or wo[2] < 0:
                continue
            rgb, ok = merl.brdf_lookup(sample_brdf, wi, wo)
            assert ok
            expected = sample_brdf.samples[:, ith, itd, ipd] * np.asarray(merl.RENDER_SCALE)
            np.testing.assert_array_equal(rgb, expected)

    def test_negative_bin_returns_zero(self, sample_brdf):
        b = merl.MerlBRDF(sample_brdf.name, sample_brdf.samples.copy())
        b.samples[:, 5, 5, 5] = -1.0
        th, td, pd = merl.index_to_angles(5, 5, 5)
        wi, wo = merl.half_diff_to_directions(th, td, pd)
        rgb, ok = merl.brdf_lookup(b, wi, wo)
        assert ok  # geometry fine, entry invalid
        np.testing.assert_array_equal(rgb, [0.0, 0.0, 0.0])

    def test_below_horizon_flags_invalid(self, sample_brdf):
        wi = np.array([0.0, 0.0, -1.0])
        wo = np.array([0.0, 0.0, 1.0])
        rgb, ok = merl.brdf_lookup(sample_brdf, wi, wo)
        assert not ok
        np.testing.assert_array_equal(rgb, [0.0, 0.0, 0.0])

    def test_vectorized_lookup(self, sample_brdf):
        rng = np.random.default_rng(0)
        v = rng.normal(size=(50, 3))
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        v[:, 2] = np.abs(v[:, 2])
        v /= np.linalg.norm(v, axis=1, keepdims=True)
        rgb, ok = merl.brdf_lookup(sample_brdf, v, v[::-1])
        assert rgb.shape == (50, 3)
        assert ok.shape == (50,)
        assert np.all(rgb >= 0)
