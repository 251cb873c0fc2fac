"""
Tests for the relay geometry, fading samplers and the block interleaver.
"""

import sys
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from channel import (  # noqa: E402
    FadingBlock,
    GeometryError,
    Interleaver,
    Link,
    ShapeError,
    SnrGeometry,
    db_to_linear,
    deinterleave,
    interleave,
    linear_to_db,
    mrc_snr,
    random_stream,
    sample_nakagami,
    select_best,
)


def test_link_snrs():
    """S-R and R-D SNRs follow the path-loss law of the relay position."""
    print("Testing SNR geometry...", end=" ")
    geo = SnrGeometry(gamma_bar=2.0, eta=2.0, beta=5.0)
    sd, sr, rd = geo.link_snrs()
    assert sd == pytest.approx(2.0)
    assert sr == pytest.approx(50.0)
    assert rd == pytest.approx(2.0 * (5.0 / 4.0) ** 2)
    assert geo.gamma_sr == pytest.approx(sr)
    assert geo.gamma_rd == pytest.approx(rd)

    grid = np.array([1.0, 10.0, 100.0])
    sd, sr, rd = geo.link_snrs(grid)
    assert sd.shape == sr.shape == rd.shape == (3,)
    assert np.allclose(sr / sd, 25.0)

    # eta = 0: every link sees the same SNR
    flat = SnrGeometry(gamma_bar=3.0, eta=0.0, beta=4.0)
    assert flat.gamma_sr == pytest.approx(3.0) and flat.gamma_rd == pytest.approx(3.0)
    print("✓")


def test_relay_destination_anchor():
    geo = SnrGeometry.from_relay_destination(db_to_linear(20.0), eta=3.0, beta=2.5)
    assert geo.gamma_rd == pytest.approx(100.0)
    assert geo.gamma_bar_for_rd(100.0) == pytest.approx(geo.gamma_bar)
    assert float(linear_to_db(db_to_linear(7.5))) == pytest.approx(7.5)
    assert SnrGeometry.from_db(10.0).gamma_bar == pytest.approx(10.0)


def test_geometry_validation():
    with pytest.raises(GeometryError):
        SnrGeometry(gamma_bar=1.0, beta=1.0)
    with pytest.raises(GeometryError):
        SnrGeometry(gamma_bar=1.0, eta=-1.0)
    with pytest.raises(GeometryError):
        SnrGeometry(gamma_bar=0.0)
    with pytest.raises(GeometryError):
        SnrGeometry.from_relay_destination(10.0, beta=0.5)


def test_nakagami_distribution():
    """h^2 is Gamma(m, omega/m) distributed."""
    print("Testing Nakagami sampler...", end=" ")
    rng = random_stream(1, 0, 0, Link.SOURCE_RELAY)
    for m, omega in ((1, 1.0), (2, 3.0), (4, 0.5)):
        power = sample_nakagami(m, omega, size=20000, rng=rng) ** 2
        assert power.mean() == pytest.approx(omega, rel=0.05)
        result = stats.kstest(power, stats.gamma(a=m, scale=omega / m).cdf)
        assert result.pvalue > 1e-3

    power = sample_nakagami(4, 1.0, size=20000, rng=rng) ** 2
    assert power.var() == pytest.approx(0.25, rel=0.05)
    print("✓")


def test_selected_antenna_power():
    """The best of M Rayleigh branches has CDF (1 - exp(-x / omega))^M."""
    rng = random_stream(3, 0, 0, Link.RELAY_DESTINATION)
    for M in (2, 3):
        gains = sample_nakagami(1, 2.0, size=(20000, M), rng=rng)
        _, amplitude = select_best(gains)
        result = stats.kstest(amplitude ** 2, lambda x: (1.0 - np.exp(-np.asarray(x) / 2.0)) ** M)
        assert result.pvalue > 1e-3


@pytest.mark.slow
def test_fading_distributions_at_scale():
    """Kolmogorov-Smirnov distance stays below 0.005 with a million draws."""
    print("Testing fading samplers with 1e6 draws...", end=" ")
    rng = random_stream(4, 0, 0, Link.SOURCE_RELAY)
    for m in (1, 2, 4):
        power = sample_nakagami(m, 1.0, size=1_000_000, rng=rng) ** 2
        assert stats.kstest(power, stats.gamma(a=m, scale=1.0 / m).cdf).statistic < 0.005

    for M in (2, 3):
        gains = sample_nakagami(1, 1.0, size=(1_000_000, M), rng=rng)
        _, amplitude = select_best(gains)
        result = stats.kstest(amplitude ** 2, lambda x: (1.0 - np.exp(-np.asarray(x))) ** M)
        assert result.statistic < 0.005
    print("✓")


def test_nakagami_validation():
    with pytest.raises(ValueError):
        sample_nakagami(0, 1.0)
    with pytest.raises(ValueError):
        sample_nakagami(1.5, 1.0)
    with pytest.raises(ValueError):
        sample_nakagami(1, 0.0)


def test_streams_are_reproducible():
    a = random_stream(2024, 3, 17, Link.NOISE).normal(size=8)
    b = random_stream(2024, 3, 17, Link.NOISE).normal(size=8)
    c = random_stream(2024, 3, 17, Link.PAYLOAD).normal(size=8)
    d = random_stream(2024, 3, 18, Link.NOISE).normal(size=8)
    assert np.array_equal(a, b)
    assert not np.array_equal(a, c)
    assert not np.array_equal(a, d)


def test_combining_and_selection():
    gains = np.array([0.5, 2.0, -2.0, 1.0])
    assert mrc_snr(gains, 2.0) == pytest.approx(2.0 * (0.25 + 4.0 + 4.0 + 1.0))
    index, amplitude = select_best(gains)
    assert index == 2 and amplitude == pytest.approx(2.0)

    batch = np.array([[0.1, 0.3], [0.9, 0.2]])
    index, amplitude = select_best(batch)
    assert index.tolist() == [2, 1]
    assert np.allclose(amplitude, [0.3, 0.9])

    assert select_best(np.array([0.2, 0.9, 0.5])) == (2, pytest.approx(0.9))
    assert select_best(np.array([0.7, 0.7]))[0] == 1
    assert mrc_snr(np.zeros(3), 5.0) == 0.0

    with pytest.raises(ValueError):
        mrc_snr(np.zeros(0), 1.0)
    with pytest.raises(ValueError):
        select_best(np.float64(1.0))


def test_block_fading_is_constant_per_block():
    rng = random_stream(5, 0, 0, Link.RELAY_DESTINATION)
    block = FadingBlock.draw(1, 1.0, (2,), blocks=4, block_depth=3, rng=rng)
    per_bit = block.gains_at(np.arange(12))
    assert per_bit.shape == (2, 12)
    assert np.array_equal(per_bit[:, :3], np.repeat(block.gains[:, :1], 3, axis=1))
    assert np.array_equal(per_bit[:, 9:], np.repeat(block.gains[:, 3:], 3, axis=1))


def test_interleaver_positions():
    """Consecutive bits of a packet are `depth` positions apart on the air."""
    print("Testing interleaver...", end=" ")
    iv = Interleaver(depth=4, packet_bits=5)
    positions = iv.transmit_positions()
    assert positions.shape == (4, 5)
    assert sorted(positions.ravel().tolist()) == list(range(20))
    assert np.all(np.diff(positions, axis=1) == 4)

    rows = np.arange(20).reshape(4, 5)
    on_air = interleave(rows.ravel(), iv)
    assert np.array_equal(on_air[positions], rows)
    assert np.array_equal(deinterleave(on_air, iv), rows.ravel())
    print("✓")


def test_interleaving_decorrelates_fading():
    """Successive bits of a packet see nearly independent gains once depth >= 10 n."""
    n = 10
    rng = random_stream(6, 0, 0, Link.SOURCE_DESTINATION)

    iv = Interleaver(depth=10 * n, packet_bits=n)
    block = FadingBlock.draw(1, 1.0, (80,), blocks=iv.span // n, block_depth=n, rng=rng)
    per_bit = block.gains_at(iv.transmit_positions())
    lag1 = np.corrcoef(per_bit[..., :-1].ravel(), per_bit[..., 1:].ravel())[0, 1]
    assert abs(lag1) < 0.02

    plain = Interleaver(depth=1, packet_bits=n)
    block = FadingBlock.draw(1, 1.0, (2000,), blocks=plain.span // n, block_depth=n, rng=rng)
    per_bit = block.gains_at(plain.transmit_positions())
    assert np.corrcoef(per_bit[..., :-1].ravel(), per_bit[..., 1:].ravel())[0, 1] > 0.99


def test_interleaver_streams_and_errors():
    iv = Interleaver(depth=3, packet_bits=2)
    stream = np.arange(2 * 2 * iv.span).reshape(2, -1)
    assert np.array_equal(deinterleave(interleave(stream, iv), iv), stream)
    with pytest.raises(ShapeError):
        interleave(np.arange(7), iv)
    with pytest.raises(ValueError):
        Interleaver(depth=0, packet_bits=4)

    identity = Interleaver(depth=1, packet_bits=6)
    assert np.array_equal(interleave(np.arange(12), identity), np.arange(12))


def main():
    """Run the channel tests without pytest."""
    print("=" * 60)
    print("CNCC TOOLKIT - Channel Tests")
    print("=" * 60)
    print()

    try:
        test_link_snrs()
        test_nakagami_distribution()
        test_interleaver_positions()

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
