import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from brdfspace.metrics import MetricReport, ZeroReferenceError, rel_ae, report, write_report_csv


@pytest.fixture()
def tables():
    rng = np.random.default_rng(0)
    ref = rng.uniform(0, 100, size=(3, 20, 20))
    rec = ref * rng.uniform(0.8, 1.2, size=ref.shape)
    mask = rng.random((20, 20)) > 0.25
    return rec, ref, mask


class TestRelAE:
    def test_identity_is_zero(self, tables):
        _, ref, mask = tables
        assert rel_ae(ref, ref, mask) == 0.0

    def test_uniform_doubling_is_one(self, tables):
        _, ref, mask = tables
        assert rel_ae(2.0 * ref, ref, mask) == 1.0

    def test_scale_invariance(self, tables):
        rec, ref, mask = tables
        base = rel_ae(rec, ref, mask)
        assert rel_ae(4.0 * rec, 4.0 * ref, mask) == base  # power of two: exact
        assert rel_ae(3.7 * rec, 3.7 * ref, mask) == pytest.approx(base, rel=1e-12)

    @settings(max_examples=100, deadline=None)
    @given(c=st.floats(1e-3, 1e3))
    def test_scale_invariance_property(self, c):
        rng = np.random.default_rng(7)
        ref = rng.uniform(0.1, 10, size=(5, 5))
        rec = ref + rng.normal(0, 1, size=(5, 5))
        mask = np.ones((5, 5), bool)
        assert rel_ae(c * rec, c * ref, mask) == pytest.approx(
            rel_ae(rec, ref, mask), rel=1e-9
        )

    def test_masked_values_invariant_bitwise(self, tables):
        rec, ref, mask = tables
        base = rel_ae(rec, ref, mask)
        rng = np.random.default_rng(5)
        for _ in range(20):
            rec2 = rec.copy()
            ref2 = ref.copy()
            bc = np.broadcast_to(mask, rec.shape)
            rec2[~bc] = rng.uniform(-1e9, 1e9, size=(~bc).sum())
            ref2[~bc] = rng.uniform(-1e9, 1e9, size=(~bc).sum())
            assert rel_ae(rec2, ref2, mask) == base

    def test_zero_reference_rejected(self):
        with pytest.raises(ZeroReferenceError):
            rel_ae(np.ones((4, 4)), np.zeros((4, 4)), np.ones((4, 4), bool))

    def test_empty_mask_rejected(self, tables):
        rec, ref, _ = tables
        with pytest.raises(ValueError):
            rel_ae(rec, ref, np.zeros((20, 20), bool))

    def test_pointwise_variant(self):
        ref = np.full((4, 4), 2.0)
        rec = np.full((4, 4), 2.5)
        got = rel_ae(rec, ref, np.ones((4, 4), bool), variant="pointwise")
        assert got == pytest.approx(0.5 / (2.0 + 1e-3), rel=1e-12)

    def test_unknown_variant_rejected(self, tables):
        rec, ref, mask = tables
        with pytest.raises(ValueError):
            rel_ae(rec, ref, mask, variant="rms")


class TestReport:
    def test_report_fields(self, tables):
        rec, ref, mask = tables
        rep = report("mat", rec, ref, mask)
        assert rep.name == "mat"
        assert rep.rel_ae_ratio >= 0
        assert rep.rel_ae_pointwise >= 0
        assert rep.entries_compared == int(np.broadcast_to(mask, ref.shape).sum())

    def test_csv_output(self, tmp_path, tables):
        rec, ref, mask = tables
        reports = [report("alpha", rec, ref, mask), report("beta", ref, ref, mask)]
        p = tmp_path / "metrics.csv"
        write_report_csv(reports, p)
        lines = p.read_text().strip().splitlines()
        assert lines[0] == "material,RelAE_ratio,RelAE_pointwise,entries"
        assert lines[1].startswith("alpha,")
        assert lines[2].split(",")[1] == "0"
