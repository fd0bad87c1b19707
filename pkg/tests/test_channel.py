"""Channel model: golden values, formula oracles, and invariants."""

import cmath
import math

import numpy as np
import pytest

from pass2d import channel
from pass2d.channel import PaConfiguration, Point3, RadioParams
from pass2d.errors import ParameterError, SingularityError

C = 299_792_458.0


def table_radio(power_dbm=20.0):
    return channel.default_radio(tx_power_dbm=power_dbm)


def test_derive_radio_params_wavelengths():
    r = channel.derive_radio_params(28e9, 1.4, 0.1, 1e-11)
    assert r.lambda_c == pytest.approx(C / 28e9, rel=1e-15)
    assert r.lambda_c == pytest.approx(0.01070689, abs=2e-8)
    assert r.lambda_g == pytest.approx(0.00764778, abs=2e-8)
    assert r.lambda_g == pytest.approx(r.lambda_c / 1.4, rel=1e-15)
    assert r.eta == pytest.approx(r.lambda_c**2 / (16 * math.pi**2), rel=1e-15)
    assert r.eta == pytest.approx(7.26e-7, rel=1e-3)


def test_derive_radio_params_identity_refraction():
    r = channel.derive_radio_params(28e9, 1.0, 0.1, 1e-11)
    assert r.lambda_g == r.lambda_c


@pytest.mark.parametrize("kwargs", [
    dict(carrier_freq_hz=0.0),
    dict(carrier_freq_hz=-1.0),
    dict(tx_power_w=0.0),
    dict(noise_power_w=-1e-11),
    dict(n_eff=0.5),
])
def test_derive_radio_params_rejects_bad_inputs(kwargs):
    good = dict(carrier_freq_hz=28e9, n_eff=1.4, tx_power_w=0.1, noise_power_w=1e-11)
    good.update(kwargs)
    with pytest.raises(ParameterError):
        channel.derive_radio_params(**good)


def test_point3_requires_finite_coordinates():
    with pytest.raises(ParameterError):
        Point3(0.0, float("nan"), 0.0)


def test_path_gain_golden_values():
    eta = table_radio().eta
    g = channel.path_gain(Point3(0, 0, 0), Point3(0, 0, 3), eta)
    assert g == pytest.approx(math.sqrt(eta) / 3.0, rel=1e-15)
    assert g == pytest.approx(2.840e-4, rel=1e-3)
    # 3-4-5 triangle
    g5 = channel.path_gain(Point3(4, 0, 0), Point3(0, 0, 3), eta)
    assert g5 == pytest.approx(math.sqrt(eta) / 5.0, rel=1e-15)
    # inverse-distance law: doubling the distance halves the gain
    g6 = channel.path_gain(Point3(0, 0, 0), Point3(0, 0, 6), eta)
    assert g6 == pytest.approx(g / 2.0, rel=1e-12)


def test_path_gain_zero_distance_is_singular():
    with pytest.raises(SingularityError):
        channel.path_gain(Point3(1, 2, 0), Point3(1, 2, 0), 1e-6)


def test_phase_factor_zero_arguments():
    r = table_radio()
    # PA sits on the feed and the UE distance is a whole number of wavelengths
    height = 1000 * r.lambda_c
    pa = feed = Point3(0, 0, height)
    value = channel.phase_factor(Point3(0, 0, 0), pa, feed, r.lambda_c, r.lambda_g)
    assert value == pytest.approx(1.0 + 0.0j, abs=1e-9)


def test_phase_factor_unit_modulus():
    r = table_radio()
    rng = np.random.default_rng(1)
    for _ in range(10_000):
        ue = Point3(*rng.uniform(-25, 25, 2), 0.0)
        pa = Point3(*rng.uniform(-25, 25, 2), 3.0)
        feed = Point3(*rng.uniform(-25, 25, 2), rng.uniform(0, 3))
        assert abs(abs(channel.phase_factor(ue, pa, feed, r.lambda_c, r.lambda_g)) - 1.0) < 1e-12


def test_phase_factor_against_high_precision_arithmetic():
    import mpmath

    r = table_radio()
    ue, pa, feed = Point3(0, 0, 0), Point3(0, 0, 3), Point3(-10, 0, 3)
    got = channel.phase_factor(ue, pa, feed, r.lambda_c, r.lambda_g)
    with mpmath.workdps(50):
        lam_c = mpmath.mpf(C) / mpmath.mpf(28e9)
        lam_g = lam_c / mpmath.mpf("1.4")
        arg = -2 * mpmath.pi * (3 / lam_c) - 2 * mpmath.pi * (10 / lam_g)
        want = mpmath.exp(1j * arg)
        assert abs(got.real - float(want.real)) < 1e-9
        assert abs(got.imag - float(want.imag)) < 1e-9


def test_phase_factor_sign_convention_conjugates():
    r = table_radio()
    ue, pa, feed = Point3(1, 2, 0), Point3(-3, 4, 3), Point3(-10, 0, 3)
    got = channel.phase_factor(ue, pa, feed, r.lambda_c, r.lambda_g)
    d_free = ue.distance_to(pa)
    d_guide = feed.distance_to(pa)
    flipped = cmath.exp(2j * math.pi * d_free / r.lambda_c) * cmath.exp(
        2j * math.pi * d_guide / r.lambda_g)
    assert flipped == pytest.approx(got.conjugate(), rel=1e-12)


def test_channel_coefficient_magnitude_is_path_gain():
    r = table_radio()
    rng = np.random.default_rng(2)
    feed = Point3(-10, 0, 3)
    for _ in range(50):
        ue = Point3(*rng.uniform(-10, 10, 2), 0.0)
        pa = Point3(*rng.uniform(-10, 10, 2), 3.0)
        coeff = channel.channel_coefficient(ue, pa, feed, r)
        assert abs(coeff) == pytest.approx(channel.path_gain(ue, pa, r.eta), rel=1e-12)


def test_snr_per_user_golden_closed_form():
    # single PA directly above the single UE at h=3, table defaults
    scen = channel.make_scenario([(0.0, 0.0)], side_length=20.0, height=3.0)
    config = PaConfiguration.from_xy([[0.0, 0.0]], 3.0)
    r = scen.radio
    got = channel.snr_per_user(config, scen.ues[0], scen)
    want = r.tx_power_w * r.eta / (3.0**2 * r.noise_power_w)
    assert 10 * math.log10(got) == pytest.approx(10 * math.log10(want), abs=1e-9)
    assert 10 * math.log10(got) == pytest.approx(29.1, abs=0.05)


def test_snr_per_user_zero_power():
    scen = channel.make_scenario([(0.0, 0.0)])
    zero_power = RadioParams(
        carrier_freq_hz=scen.radio.carrier_freq_hz,
        n_eff=scen.radio.n_eff,
        tx_power_w=0.0,
        noise_power_w=scen.radio.noise_power_w,
        lambda_c=scen.radio.lambda_c,
        lambda_g=scen.radio.lambda_g,
        eta=scen.radio.eta,
    )
    quiet = channel.Scenario(
        ues=scen.ues, side_length=scen.side_length, height=scen.height,
        min_separation=scen.min_separation, feed_point=scen.feed_point, radio=zero_power)
    config = PaConfiguration.from_xy([[1.0, 1.0]], 3.0)
    assert channel.snr_per_user(config, quiet.ues[0], quiet) == 0.0


def test_snr_scales_linearly_with_coherent_antennas():
    # N co-located antennas: coherent gain N^2 over the 1/N power split -> N x SNR
    scen = channel.make_scenario([(0.0, 0.0)])
    one = PaConfiguration.from_xy([[0.5, 0.5]], 3.0)
    four = PaConfiguration.from_xy([[0.5, 0.5]] * 4, 3.0)
    s1 = channel.snr_per_user(one, scen.ues[0], scen)
    s4 = channel.snr_per_user(four, scen.ues[0], scen)
    assert s4 == pytest.approx(4.0 * s1, rel=1e-12)


def test_min_snr_single_user_equals_per_user():
    scen = channel.make_scenario([(2.0, -3.0)])
    config = PaConfiguration.from_xy([[0.0, 0.0], [1.0, 1.0]], 3.0)
    assert channel.min_snr(config, scen) == channel.snr_per_user(config, scen.ues[0], scen)


def test_min_snr_is_lower_envelope():
    scen = channel.make_scenario([(-8.0, -8.0), (8.0, -8.0), (-8.0, 8.0), (8.0, 8.0)])
    config = PaConfiguration.from_xy([[-8, -8], [8, -8], [-8, 8], [8, 8]], 3.0)
    worst = channel.min_snr(config, scen)
    per_user = [channel.snr_per_user(config, ue, scen) for ue in scen.ues]
    assert worst == min(per_user)
    assert all(worst <= s for s in per_user)


def _straight_line_min_snr(config, scenario):
    """Independent oracle: evaluate the SNR formulas from scratch (no helpers)."""
    r = scenario.radio
    lam_c = C / r.carrier_freq_hz
    lam_g = lam_c / r.n_eff
    eta = lam_c**2 / (16 * math.pi**2)
    n = len(config.positions)
    worst = None
    for ue in scenario.ues:
        total = 0j
        for pa in config.positions:
            d = math.sqrt((ue.x - pa.x) ** 2 + (ue.y - pa.y) ** 2 + (ue.z - pa.z) ** 2)
            df = math.sqrt((scenario.feed_point.x - pa.x) ** 2
                           + (scenario.feed_point.y - pa.y) ** 2
                           + (scenario.feed_point.z - pa.z) ** 2)
            amp = math.sqrt(eta) / d
            total += amp * cmath.exp(-2j * math.pi * d / lam_c - 2j * math.pi * df / lam_g)
        snr = r.tx_power_w * abs(total) ** 2 / (n * r.noise_power_w)
        worst = snr if worst is None else min(worst, snr)
    return worst


def test_min_snr_matches_independent_evaluation():
    rng = np.random.default_rng(3)
    for _ in range(100):
        k = int(rng.integers(1, 6))
        n = int(rng.integers(1, 6))
        ue_xy = rng.uniform(-10, 10, size=(k, 2))
        scen = channel.make_scenario(ue_xy, side_length=20.0)
        config = PaConfiguration.from_xy(rng.uniform(-10, 10, size=(n, 2)), 3.0)
        got = channel.min_snr(config, scen)
        want = _straight_line_min_snr(config, scen)
        assert got == pytest.approx(want, rel=1e-9)


def test_snr_translation_invariance():
    rng = np.random.default_rng(4)
    for _ in range(20):
        ue_xy = rng.uniform(-5, 5, size=(3, 2))
        pa_xy = rng.uniform(-5, 5, size=(3, 2))
        shift = rng.uniform(-4, 4, size=2)
        base = channel.make_scenario(ue_xy, side_length=40.0)
        moved = channel.Scenario(
            ues=tuple(Point3(u.x + shift[0], u.y + shift[1], 0.0) for u in base.ues),
            side_length=base.side_length,
            height=base.height,
            min_separation=base.min_separation,
            feed_point=Point3(base.feed_point.x + shift[0], base.feed_point.y + shift[1],
                              base.feed_point.z),
            radio=base.radio,
        )
        cfg = PaConfiguration.from_xy(pa_xy, 3.0)
        cfg_moved = PaConfiguration.from_xy(pa_xy + shift, 3.0)
        for ue_a, ue_b in zip(base.ues, moved.ues):
            a = channel.snr_per_user(cfg, ue_a, base)
            b = channel.snr_per_user(cfg_moved, ue_b, moved)
            assert b == pytest.approx(a, rel=1e-9)


def test_snr_coherence_bound():
    rng = np.random.default_rng(5)
    for _ in range(50):
        ue_xy = rng.uniform(-9, 9, size=(2, 2))
        pa_xy = rng.uniform(-9, 9, size=(4, 2))
        scen = channel.make_scenario(ue_xy)
        cfg = PaConfiguration.from_xy(pa_xy, 3.0)
        r = scen.radio
        for ue in scen.ues:
            amp_sum = sum(channel.path_gain(ue, pa, r.eta) for pa in cfg.positions)
            bound = r.tx_power_w * amp_sum**2 / (len(cfg) * r.noise_power_w)
            assert channel.snr_per_user(cfg, ue, scen) <= bound * (1 + 1e-12)


def test_snr_all_users_matches_scalar_path():
    rng = np.random.default_rng(6)
    ue_xy = rng.uniform(-9, 9, size=(3, 2))
    scen = channel.make_scenario(ue_xy)
    batch = rng.uniform(-9, 9, size=(5, 4, 2))
    vec = channel.snr_all_users(batch, scen)
    assert vec.shape == (5, 3)
    # phase arguments reach ~1e4 rad, so different evaluation orders agree to ~1e-10
    for i in range(5):
        cfg = PaConfiguration.from_xy(batch[i], 3.0)
        for k, ue in enumerate(scen.ues):
            assert vec[i, k] == pytest.approx(channel.snr_per_user(cfg, ue, scen), rel=1e-9)


def test_scenario_validation():
    with pytest.raises(ParameterError):
        channel.Scenario(ues=(), side_length=20.0, height=3.0, min_separation=0.005,
                         feed_point=Point3(-10, 0, 3), radio=table_radio())
    with pytest.raises(ParameterError):
        channel.make_scenario([(30.0, 0.0)], side_length=20.0)  # outside the square
    bad_z = (Point3(0, 0, 1.0),)
    with pytest.raises(ParameterError):
        channel.Scenario(ues=bad_z, side_length=20.0, height=3.0, min_separation=0.005,
                         feed_point=Point3(-10, 0, 3), radio=table_radio())


def test_default_feed_point_on_waveguide_plane():
    scen = channel.make_scenario([(0.0, 0.0)], side_length=20.0, height=3.0)
    assert (scen.feed_point.x, scen.feed_point.y, scen.feed_point.z) == (-10.0, 0.0, 3.0)
    floor_feed = channel.make_scenario([(0.0, 0.0)], side_length=20.0, height=3.0, feed_z=0.0)
    assert floor_feed.feed_point.z == 0.0
