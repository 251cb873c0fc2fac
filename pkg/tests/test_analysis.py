"""
Tests for the closed-form error probabilities and the end-to-end bound.
"""

import math
import sys
from pathlib import Path

import numpy as np
import pytest
from scipy import integrate, stats

sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from analysis import (  # noqa: E402
    BoundInputs,
    asymptotic_pb,
    bound_table,
    direct_path_ber,
    direct_path_ber_asymptotic,
    end_to_end_bound,
    failure_probability,
    failure_probability_asymptotic,
    fit_asymptote,
    log_log_slope,
    packet_length_study,
    pep_z_factor,
    relay_bit_error,
    relay_bit_error_asymptotic,
    success_ber_bound,
)
from channel import SnrGeometry, db_to_linear  # noqa: E402
from cli.config import PRESETS  # noqa: E402
from convcodec import build_trellis  # noqa: E402
from wef import InconclusiveError, ModifiedWEF, enumerate_wef  # noqa: E402


def _inputs(preset_number: int, m: int = 1, n: int = 10, horizon: int = 12) -> BoundInputs:
    preset = PRESETS[preset_number]
    wef = enumerate_wef(build_trellis(preset.generator()), horizon)
    return BoundInputs(wef=wef, N=preset.N, M=preset.M, M_prime=preset.M_prime, m=m, n=n,
                       geometry=SnrGeometry(gamma_bar=1.0, eta=2.0, beta=5.0))


def _relay_ber_quadrature(m, M, gamma_sr):
    """BPSK error averaged over the Gamma(Mm, gamma_sr/m) combined SNR."""
    density = stats.gamma(a=M * m, scale=gamma_sr / m)
    value, _ = integrate.quad(lambda g: stats.norm.sf(math.sqrt(2.0 * g)) * density.pdf(g),
                              0.0, np.inf, epsabs=1e-14, epsrel=1e-10, limit=200)
    return value


def test_relay_bit_error_against_quadrature():
    print("Testing relay bit error against quadrature...", end=" ")
    for m, M, gamma_sr in ((1, 1, 3.0), (1, 2, 10.0), (2, 2, 5.0), (3, 1, 20.0), (2, 3, 1.0)):
        assert relay_bit_error(m, M, gamma_sr) == pytest.approx(
            _relay_ber_quadrature(m, M, gamma_sr), rel=1e-6)
    print("✓")


@pytest.mark.slow
def test_relay_bit_error_quadrature_grid():
    """All (m, M) in {1,2,3}^2 over 20 log-spaced average SNRs from 0.1 to 1000."""
    print("Testing relay bit error over the full grid...", end=" ")
    for m in (1, 2, 3):
        for M in (1, 2, 3):
            for gamma_sr in np.logspace(-1, 3, 20):
                density = stats.gamma(a=M * m, scale=gamma_sr / m)
                # Q(sqrt(2g)) is below 1e-30 past g = 80; the density peak is passed as a breakpoint
                peak = min(max((M * m - 1) * gamma_sr / m, 1e-3), 40.0)
                expected, _ = integrate.quad(lambda g: stats.norm.sf(math.sqrt(2.0 * g)) * density.pdf(g),
                                             0.0, 80.0, points=[peak], epsabs=0.0, epsrel=1e-12, limit=500)
                assert relay_bit_error(m, M, gamma_sr) == pytest.approx(expected, rel=1e-6), (m, M, gamma_sr)
    print("✓")


def test_direct_path_closed_form():
    g = np.array([0.1, 1.0, 10.0, 1e3])
    expected = 0.5 * (1.0 - np.sqrt(g / (1.0 + g)))
    assert np.allclose(direct_path_ber(g), expected, rtol=1e-12)
    assert direct_path_ber(1e6) == pytest.approx(direct_path_ber_asymptotic(1e6), rel=1e-4)


def test_high_snr_approximations():
    for m, M in ((1, 1), (1, 2), (2, 2), (3, 1)):
        exact = relay_bit_error(m, M, 1e6)
        assert exact == pytest.approx(relay_bit_error_asymptotic(m, M, 1e6), rel=1e-2)
        pf = failure_probability(exact, n=10, N=2)
        assert pf == pytest.approx(failure_probability_asymptotic(m, M, 10, 2, 1e6), rel=1e-2)


def test_deep_snr_stays_finite():
    """Probabilities stay positive and finite far beyond double-precision 1 - mu."""
    pe = relay_bit_error(1, 3, 1e14)
    assert 0.0 < pe < 1e-35
    pf = failure_probability(pe, n=10, N=2)
    assert 0.0 < pf == pytest.approx(20 * pe, rel=1e-9)


def test_failure_probability_limits():
    assert failure_probability(0.0, 10, 2) == 0.0
    assert failure_probability(1.0, 10, 2) == 1.0
    assert failure_probability(0.5, 1, 1) == pytest.approx(0.5)
    assert np.allclose(failure_probability(np.array([0.1, 0.2]), 3, 2),
                       1.0 - (1.0 - np.array([0.1, 0.2])) ** 6)
    for pe in (1e-4, 1e-6):
        assert failure_probability(pe, 10, 2) == pytest.approx(20 * pe, rel=0.05)
    with pytest.raises(ValueError):
        failure_probability(1.5, 10, 2)
    with pytest.raises(ValueError):
        relay_bit_error(0, 1, 1.0)
    with pytest.raises(ValueError):
        relay_bit_error(1, 1, -2.0)


def test_pep_factor():
    """Product form equals the alternating sum and the best-of-M average of exp(-gamma x)."""
    print("Testing PEP factor...", end=" ")
    for M in (1, 2, 3, 4):
        for gamma in (0.5, 3.0, 40.0):
            factors = pep_z_factor(M, gamma)
            alternating = M * sum(math.comb(M - 1, w) * (-1) ** w / (1.0 + w + gamma) for w in range(M))
            averaged, _ = integrate.quad(
                lambda x: M * math.exp(-x) * (1.0 - math.exp(-x)) ** (M - 1) * math.exp(-gamma * x),
                0.0, np.inf)
            assert factors.tight == pytest.approx(alternating, rel=1e-9)
            assert factors.tight == pytest.approx(averaged, rel=1e-7)
            assert factors.loose >= factors.tight
    with pytest.raises(ValueError):
        pep_z_factor(0, 1.0)
    print("✓")


def test_success_bound_series():
    """Union bound sums B Y^d1 Z^d2 / 2N and estimates the remainder geometrically."""
    wef = ModifiedWEF(terms={(2, 2): 4, (3, 3): 12}, path_counts={(2, 2): 2, (3, 3): 4}, horizon=6)
    gsd, grd = 9.0, 4.0
    y = 1.0 / (1.0 + gsd)
    z = 1.0 / (1.0 + grd)
    bound = success_ber_bound(wef, N=2, gamma_sd=gsd, gamma_rd=grd, M=1)

    first = 4 * y ** 2 * z ** 2 / 4.0
    second = 12 * y ** 3 * z ** 3 / 4.0
    # objectives 4 and 6 with coefficients 4 and 12: growth sqrt(3) per unit, lambda = max(y, z)
    ratio = math.sqrt(3.0) * max(y, z)
    expected_tail = 4 * max(y, z) ** 4 * ratio ** 3 / (1.0 - ratio) / 4.0
    assert bound.value == pytest.approx(first + second, rel=1e-12)
    assert bound.tail_estimate == pytest.approx(expected_tail, rel=1e-9)
    assert bound.truncated == (bound.tail_estimate > 0.01 * bound.value)

    loose = success_ber_bound(wef, N=2, gamma_sd=gsd, gamma_rd=grd, M=1, variant="loose")
    assert loose.value >= bound.value
    with pytest.raises(ValueError):
        success_ber_bound(wef, 2, gsd, grd, 1, variant="exact")
    with pytest.raises(InconclusiveError):
        success_ber_bound(wef, 2, gsd, grd, M=3)


def test_empty_enumerator_gives_zero_bound():
    bound = success_ber_bound(ModifiedWEF(horizon=3), N=2, gamma_sd=np.array([1.0, 10.0]),
                              gamma_rd=np.array([2.0, 20.0]), M=2)
    assert np.all(bound.value == 0.0)
    assert not np.any(bound.truncated)


def test_end_to_end_identity():
    print("Testing end-to-end bound identity...", end=" ")
    inputs = _inputs(2)
    gamma = np.logspace(-1, 6, 15)
    b = end_to_end_bound(inputs, gamma)
    assert np.allclose(b.Ps + b.Pf, 1.0)
    assert np.allclose(b.Pb_bound_raw, b.PbGivenS_bound_raw * (1.0 - b.Pf) + b.PbGivenF * b.Pf,
                       rtol=1e-10, atol=0.0)
    assert np.all((b.Pb_bound >= 0.0) & (b.Pb_bound <= 1.0))
    assert np.all(b.Pb_bound <= b.Pb_bound_raw + 1e-300)
    assert np.allclose(b.gamma_sr, 25.0 * gamma)

    single = end_to_end_bound(inputs, 100.0)
    assert isinstance(single.Pb_bound, float)
    assert isinstance(single.truncated, bool)
    print("✓")


# min(D*, Mm + 1) for m = 1, 2, 3 of each example network
DIVERSITY = {1: (2, 3, 4), 2: (3, 5, 5), 3: (3, 5, 7), 4: (4, 7, 10)}


def test_bound_table_slopes():
    """Top-decade slope approaches -min(D*, Mm+1)."""
    print("Testing bound table slopes...", end=" ")
    # D* and Mm+1 differing by one converge slowly, so the grid runs well past the plotted range
    grid = list(range(0, 130, 10))
    for number, diversities in DIVERSITY.items():
        for m, diversity in zip((1, 2, 3), diversities):
            table = bound_table(_inputs(number, m=m), grid)
            assert list(table.columns) == ['gamma_rd_dB', 'Pe', 'Pf', 'PbGivenF', 'PbGivenS_bound',
                                           'Pb_bound', 'Pb_bound_raw', 'slope_estimate', 'truncated']
            assert np.isnan(table['slope_estimate'].iloc[0])
            assert table['slope_estimate'].iloc[-1] == pytest.approx(-diversity, abs=0.5), (number, m)
            assert table.loc[table['gamma_rd_dB'] >= 20, 'Pb_bound_raw'].is_monotonic_decreasing
    print("✓")


def test_truncation_flag_stable_across_horizons():
    """Once D* is certified the remainder estimate stays small whatever the horizon."""
    preset = PRESETS[4]
    trellis = build_trellis(preset.generator())
    geometry = SnrGeometry(gamma_bar=1.0, eta=2.0, beta=5.0)
    gamma_bar = geometry.gamma_bar_for_rd(db_to_linear(np.array([40.0, 50.0, 60.0])))
    gamma_sd, _, gamma_rd = geometry.link_snrs(gamma_bar)
    for horizon in range(11, 16):
        bound = success_ber_bound(enumerate_wef(trellis, horizon), preset.N, gamma_sd, gamma_rd, preset.M)
        assert np.all(np.isfinite(bound.tail_estimate)), horizon
        assert not np.any(bound.truncated), horizon

    table = bound_table(_inputs(4), [40.0, 50.0, 60.0])
    assert not table['truncated'].any()
    # at 0 dB the remainder is not resolved
    low = success_ber_bound(enumerate_wef(trellis, 12), preset.N, 1.0, 1.0, 1)
    assert low.truncated


def test_stronger_relay_links_never_hurt():
    grid = [20, 30, 40, 50, 60]
    weak = bound_table(_inputs(2, m=1), grid)['Pb_bound_raw'].to_numpy()
    strong = bound_table(_inputs(2, m=2), grid)['Pb_bound_raw'].to_numpy()
    assert np.all(strong <= weak)


def test_log_log_slope():
    db = np.arange(0.0, 41.0, 5.0)
    values = (10.0 ** (db / 10.0)) ** -2.5
    slopes = log_log_slope(db, values)
    assert np.isnan(slopes[0])
    assert np.allclose(slopes[1:], -2.5)


def test_asymptote_fit():
    inputs = _inputs(3, m=2)
    fit = fit_asymptote(inputs)
    assert (fit.d1star, fit.d2star) in inputs.wef.terms
    assert fit.d1star + inputs.M * fit.d2star == 9
    assert fit.diversity == min(9, inputs.M * inputs.m + 1)
    exact = end_to_end_bound(inputs, fit.reference)
    assert fit.evaluate(fit.reference) == pytest.approx(exact.Pb_bound_raw, rel=1e-9)
    high = np.array([1e9, 1e10])
    assert np.allclose(asymptotic_pb(inputs, high), end_to_end_bound(inputs, high).Pb_bound_raw, rtol=1e-2)


def test_packet_length_study():
    study = packet_length_study(_inputs(2), [10, 50, 100], [10.0, 20.0])
    assert list(study.columns) == ['n', 'gamma_rd_dB', 'Pf', 'Pb_bound', 'Pb_bound_raw']
    assert len(study) == 6
    at_20 = study[study['gamma_rd_dB'] == 20.0]
    assert at_20['Pf'].is_monotonic_increasing
    with pytest.raises(ValueError):
        packet_length_study(_inputs(2), [], [10.0])


def test_bound_inputs_validation():
    inputs = _inputs(1)
    with pytest.raises(ValueError):
        BoundInputs(wef=inputs.wef, N=2, M=1, M_prime=1, m=1, n=0, geometry=inputs.geometry)
    with pytest.raises(ValueError):
        end_to_end_bound(inputs, 0.0)
    with pytest.raises(ValueError):
        bound_table(inputs, [])


def main():
    """Run the analysis tests without pytest."""
    print("=" * 60)
    print("CNCC TOOLKIT - Error Analysis Tests")
    print("=" * 60)
    print()

    try:
        test_relay_bit_error_against_quadrature()
        test_pep_factor()
        test_end_to_end_identity()
        test_bound_table_slopes()

        print()
        print("=" * 60)
        print("ALL TESTS PASSED ✓")
        print("=" * 60)

    except Exception as e:
        print(f"\n✗ Test failed with error: {str(e)}")
        import traceback
        traceback.print_exc()
        sys.exit(1)


if __name__ == "__main__":
    main()
