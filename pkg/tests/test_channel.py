import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hbc_chansim.campaign import SweepConfig, frequency_grid
from hbc_chansim.channel import (
    PROBE_MINUS,
    PROBE_PLUS,
    ChannelParams,
    DaqMode,
    Scenario,
    build_channel,
    c_int_of_distance,
    canonical_scenarios,
    channel_gain_curve,
    channel_gain_db,
)
from hbc_chansim.circuit import GROUND, transfer_gain_db
from hbc_chansim.errors import InvalidParams, NonPositiveInput

GRID = frequency_grid(SweepConfig())
DISTANCES = (10.0, 30.0, 50.0)


class TestCInt:
    def test_values(self):
        assert c_int_of_distance(10, 10e-12) == pytest.approx(1e-12, rel=1e-15)
        assert c_int_of_distance(50, 10e-12) == pytest.approx(0.2e-12, rel=1e-15)

    @given(st.floats(0.1, 1e3), st.floats(1e-15, 1e-9))
    def test_inverse_proportional(self, d, k):
        assert c_int_of_distance(d, k) / c_int_of_distance(2 * d, k) == pytest.approx(2.0, rel=1e-15)

    @pytest.mark.parametrize("d,k", [(0, 1e-12), (-1, 1e-12), (10, 0), (10, -1e-12)])
    def test_non_positive(self, d, k):
        with pytest.raises(NonPositiveInput):
            c_int_of_distance(d, k)


class TestBuildChannel:
    def test_topology_size(self):
        net = build_channel(Scenario("wireless", 30))
        assert len([n for n in net.nodes if n != GROUND]) == 9
        assert len(net.elements) == 14
        assert PROBE_PLUS in net.nodes and PROBE_MINUS in net.nodes

    def test_mode_swaps_one_element(self):
        p = ChannelParams()
        w = build_channel(Scenario("wireless", 30), p)
        c = build_channel(Scenario("classical", 30), p)
        diffs = [(a, b) for a, b in zip(w.elements, c.elements) if a != b]
        assert len(diffs) == 1
        (ew, ec), = diffs
        assert ew.label == ec.label == "C_gr"
        assert (ew.a, ew.b) == ("GR", GROUND)
        assert ec.value == p.c_gr_classical and ew.value == p.c_gr_wireless

    def test_deterministic(self):
        s = Scenario(DaqMode.WIRELESS, 30)
        assert build_channel(s) == build_channel(s)

    def test_distance_laws(self):
        p = ChannelParams()
        net = build_channel(Scenario("wireless", 25), p)
        assert net.element("R_body").value == pytest.approx(p.r_body_base + 25 * p.r_body_per_cm)
        assert net.element("C_int").value == pytest.approx(p.k_int / 25)
        assert (net.element("C_int").a, net.element("C_int").b) == ("GT", "GR")

    def test_source_amplitude(self):
        assert build_channel(Scenario("wireless", 10), v_src=2.5).source.value == 2.5


class TestParams:
    def test_defaults_valid(self):
        p = ChannelParams()
        assert p.c_gr_classical >= p.c_gr_wireless

    @pytest.mark.parametrize("field", ChannelParams.field_names())
    @pytest.mark.parametrize("bad", [0.0, -1.0, float("inf"), float("nan")])
    def test_rejects_bad_values(self, field, bad):
        with pytest.raises(InvalidParams):
            ChannelParams().replace(**{field: bad})

    def test_c_gr_order(self):
        with pytest.raises(InvalidParams):
            ChannelParams(c_gr_classical=1e-13, c_gr_wireless=1e-12)

    def test_unknown_field(self):
        with pytest.raises(InvalidParams):
            ChannelParams().replace(nope=1.0)

    def test_scenario_validation(self):
        with pytest.raises(InvalidParams):
            Scenario("wired", 10)
        with pytest.raises(NonPositiveInput):
            Scenario("classical", 0)
        assert Scenario("Classical", 10).id == "classical_10cm"


class TestGain:
    def test_matches_transfer_gain(self):
        s = Scenario("wireless", 30)
        net = build_channel(s, ChannelParams(), 1.0)
        assert channel_gain_db(s, None, 20e6) == transfer_gain_db(net, "SR", "GR", 20e6)

    def test_curve_matches_pointwise(self):
        s = Scenario("classical", 10)
        curve = channel_gain_curve(s, None, GRID[:5])
        assert curve.tolist() == [channel_gain_db(s, None, f) for f in GRID[:5]]

    def test_rejects_non_positive_frequency(self):
        with pytest.raises(NonPositiveInput):
            channel_gain_db(Scenario("wireless", 10), None, 0.0)

    @pytest.mark.parametrize("d", DISTANCES)
    def test_classical_overestimates(self, d):
        c = channel_gain_curve(Scenario("classical", d), None, GRID)
        w = channel_gain_curve(Scenario("wireless", d), None, GRID)
        assert np.all(c - w >= 0)

    def test_wireless_distance_ordering(self):
        g = [channel_gain_curve(Scenario("wireless", d), None, GRID) for d in DISTANCES]
        assert np.all(g[0] >= g[1]) and np.all(g[1] >= g[2])

    @pytest.mark.parametrize("mode", ["classical", "wireless"])
    def test_distance_monotone(self, mode):
        ds = [5, 10, 20, 30, 40, 50, 75, 100]
        g = np.array([channel_gain_curve(Scenario(mode, d), None, GRID) for d in ds])
        assert np.all(np.diff(g, axis=0) <= 0)

    @pytest.mark.parametrize("d", DISTANCES)
    def test_c_gr_times_ten(self, d):
        p = ChannelParams()
        s = Scenario("wireless", d)
        base = channel_gain_curve(s, p, GRID)
        boosted = channel_gain_curve(s, p.replace(c_gr_wireless=10 * p.c_gr_wireless), GRID)
        assert np.all(boosted >= base)

    @pytest.mark.parametrize("d", DISTANCES)
    def test_mode_monotone_in_c_gr(self, d):
        p = ChannelParams()
        values = np.geomspace(p.c_gr_wireless, p.c_gr_classical, 13)
        g = np.array(
            [
                channel_gain_curve(Scenario("wireless", d), p.replace(c_gr_wireless=v, c_gr_classical=v), GRID)
                for v in values
            ]
        )
        assert np.all(np.diff(g, axis=0) >= 0)

    def test_gain_non_positive(self):
        for s in canonical_scenarios():
            assert np.all(channel_gain_curve(s, None, GRID) <= 0)

    @settings(max_examples=25, deadline=None)
    @given(st.floats(0.01, 100.0))
    def test_amplitude_invariance(self, alpha):
        s = Scenario("wireless", 30)
        ref = transfer_gain_db(build_channel(s, None, 1.0), "SR", "GR", 30e6)
        assert transfer_gain_db(build_channel(s, None, alpha), "SR", "GR", 30e6) == pytest.approx(ref, abs=1e-9)


@settings(max_examples=30, deadline=None)
@given(
    st.sampled_from(["classical", "wireless"]),
    st.floats(1.0, 200.0),
    st.floats(-13.5, -10.5),
    st.floats(-13.5, -11.0),
)
def test_build_channel_always_valid(mode, d, log_k, log_cgt):
    p = ChannelParams(k_int=10**log_k, c_gt=10**log_cgt)
    net = build_channel(Scenario(mode, d), p)
    assert len(net.elements) == 14
    assert np.isfinite(channel_gain_db(Scenario(mode, d), p, 10e6))
