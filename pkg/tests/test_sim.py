"""
Tests for the Monte Carlo protocol simulator.
"""

import math
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent.parent / 'src'))

from analysis import (  # noqa: E402
    BoundInputs,
    bound_table,
    direct_path_ber,
    failure_probability,
    relay_bit_error,
)
from channel import GeometryError  # noqa: E402
from cli.config import PRESETS  # noqa: E402
from sim import (  # noqa: E402
    BudgetExceededError,
    MonteCarloSimulator,
    NetworkConfig,
    SimResult,
    StopRule,
    check_budget,
    estimate_budget,
    relay_position_sweep,
    run_round,
    run_sweep,
    simulate_frame,
    sweep_beta_table,
    wilson_radius,
)
from wef import enumerate_wef  # noqa: E402

STRONG = 50.0


def _network(preset_number: int = 1, **kwargs) -> NetworkConfig:
    preset = PRESETS[preset_number]
    settings = dict(n=10, interleaver_depth=10, seed=2024)
    settings.update(kwargs)
    return NetworkConfig(generator=preset.generator(), N=preset.N, M=preset.M,
                         M_prime=preset.M_prime, **settings)


def test_noiseless_rounds_are_error_free():
    """With every link far above the noise the relay succeeds and nothing is lost."""
    print("Testing noiseless protocol rounds...", end=" ")
    for number in (1, 3):
        cfg = _network(number)
        overrides = {'sd': STRONG, 'sr': STRONG, 'rd': STRONG}
        frame = simulate_frame(cfg, cfg.trellis, point=0, frame=0, gamma_bar=1.0, overrides=overrides)
        assert frame.success.shape == (10,)
        assert frame.success.all()
        assert frame.errors.shape == (10, 2)
        assert not frame.errors.any()
    print("✓")


def test_strong_parity_corrects_weak_direct_links():
    """Decoding success rounds through clean parity beats hard decisions on a weak direct link."""
    cfg = _network(1)
    weak = {'sd': 0.3, 'sr': STRONG}
    coded_errors = uncoded_errors = 0
    for f in range(5):
        coded = simulate_frame(cfg, cfg.trellis, 0, f, 1.0, dict(weak, rd=STRONG))
        uncoded = simulate_frame(cfg, cfg.trellis, 0, f, 1.0, dict(weak, rd=0.0))
        assert coded.success.all() and uncoded.success.all()
        coded_errors += int(coded.errors.sum())
        uncoded_errors += int(uncoded.errors.sum())
    assert coded_errors < uncoded_errors


def test_silent_source_relay_link_never_succeeds():
    """With zero S-R gains the relay decides all zeros and only an all-zero round would pass."""
    cfg = _network(2)
    frames = [simulate_frame(cfg, cfg.trellis, 0, f, 1.0, {'sr': 0.0}) for f in range(20)]
    assert not any(frame.success.any() for frame in frames)


def test_unknown_override_rejected():
    cfg = _network(1)
    with pytest.raises(ValueError, match="Unknown gain override"):
        simulate_frame(cfg, cfg.trellis, 0, 0, 1.0, {'sx': 1.0})


def test_relay_success_rate_matches_analysis():
    """Empirical success rate lies within 3 sigma of (1 - Pe)^(N n)."""
    print("Testing relay success rate...", end=" ")
    cfg = _network(1)
    gamma_rd_db = 0.0
    gamma_bar = cfg.gamma_bar_for_rd_db(gamma_rd_db)
    rounds = 6000
    simulator = MonteCarloSimulator(cfg, batch_frames=10)
    point = simulator.run_point(gamma_rd_db, gamma_bar, StopRule(stop_errors=10 ** 9, max_rounds=rounds))
    assert point.rounds == rounds

    gamma_sr = cfg.geometry(gamma_bar).gamma_sr
    ps = 1.0 - failure_probability(relay_bit_error(cfg.m, cfg.M, gamma_sr), cfg.n, cfg.N)
    # rounds of one frame share fading blocks, so frames are the independent trials
    sigma = math.sqrt(ps * (1.0 - ps) / (rounds // cfg.interleaver_depth))
    assert abs(point.ps_empirical - ps) < 3.0 * sigma
    print("✓")


def test_throughput_accounting():
    cfg = _network(1)
    stop = StopRule(stop_errors=1, max_rounds=50)
    always = run_sweep(cfg, [10.0], stop, overrides={'sd': STRONG, 'sr': STRONG, 'rd': STRONG}).points[0]
    n_t = cfg.n + cfg.trellis.tail_length
    assert always.ps_empirical == 1.0
    assert always.throughput_net == pytest.approx(cfg.N * cfg.n / ((cfg.N + cfg.M_prime) * n_t))
    assert always.throughput_gross == pytest.approx(cfg.N / (cfg.N + cfg.M_prime))
    assert always.bit_errors == 0 and always.flagged
    assert math.isnan(always.ber_given_failure)

    never = run_sweep(cfg, [10.0], stop, overrides={'sr': 0.0}).points[0]
    assert never.ps_empirical == 0.0
    assert never.throughput_net == pytest.approx(1.0)
    assert never.throughput_gross == pytest.approx(1.0)


def test_run_round_reproducible():
    cfg = _network(3)
    gamma_bar = cfg.gamma_bar_for_rd_db(3.0)
    first = run_round(cfg, 37, gamma_bar, point=2)
    again = run_round(cfg, 37, gamma_bar, point=2)
    assert first == again

    frame = simulate_frame(cfg, cfg.trellis, 2, 3, gamma_bar)
    assert first.relay_success == bool(frame.success[7])
    assert first.bit_errors_per_source == tuple(int(e) for e in frame.errors[7])
    assert first.bits_counted == cfg.N * cfg.n
    if first.relay_success:
        assert first.channel_uses == cfg.N + cfg.M_prime
        assert first.tail_intervals == (cfg.N + cfg.M_prime) * cfg.trellis.tail_length
    else:
        assert first.channel_uses == cfg.N and first.tail_intervals == 0


def test_results_independent_of_worker_count():
    print("Testing determinism across workers...", end=" ")
    cfg = _network(2)
    stop = StopRule(stop_errors=40, max_rounds=600)
    serial = run_sweep(cfg, [0.0, 6.0], stop, workers=1, batch_frames=3).to_dataframe()
    pooled = run_sweep(cfg, [0.0, 6.0], stop, workers=2, batch_frames=3).to_dataframe()
    assert serial.equals(pooled)
    print("✓")


def test_stop_rule_and_flagging():
    cfg = _network(1)
    result = run_sweep(cfg, [0.0, 30.0], StopRule(stop_errors=5, max_rounds=95), batch_frames=2)
    frame = result.to_dataframe()
    assert list(frame.columns) == ['gamma_rd_dB', 'trials', 'bit_errors', 'ber', 'ci_radius',
                                   'ps_empirical', 'throughput_net', 'throughput_gross',
                                   'ber_given_success', 'ber_given_failure', 'beta', 'flagged']
    assert (frame['trials'] <= 95).all()
    low, high = result.points
    assert low.bit_errors >= 5 or low.rounds == 95
    assert high.rounds == 95 and high.flagged
    assert result.flagged
    assert (frame['beta'] == cfg.beta).all()

    with pytest.raises(ValueError):
        StopRule(stop_errors=0)
    with pytest.raises(ValueError):
        run_sweep(cfg, [])


def test_relay_position_sweep():
    cfg = _network(1)
    result = relay_position_sweep(cfg, [1.5, 4.0], fixed_gamma_rd_db=5.0,
                                  stop_rule=StopRule(stop_errors=20, max_rounds=100))
    table = sweep_beta_table(result)
    assert table.columns[:3].tolist() == ['beta', 'gamma_rd_dB', 'gamma_bar_dB']
    assert table['beta'].tolist() == [1.5, 4.0]
    assert (table['gamma_rd_dB'] == 5.0).all()
    # at a fixed R-D SNR, a relay nearer the destination means a weaker S-D link
    assert table['gamma_bar_dB'].iloc[0] < table['gamma_bar_dB'].iloc[1]


def test_runtime_budget():
    cfg = _network(2)
    stop = StopRule(stop_errors=200, max_rounds=10 ** 6)
    grid = [0.0, 10.0, 20.0, 30.0]
    estimate = estimate_budget(cfg, grid, stop, round_cost_s=1e-3)
    assert len(estimate.expected_rounds) == 4
    assert list(estimate.expected_rounds) == sorted(estimate.expected_rounds)
    assert max(estimate.expected_rounds) <= stop.max_rounds

    budget = estimate.seconds[0] + estimate.seconds[1] + 0.5 * estimate.seconds[2]
    with pytest.raises(BudgetExceededError) as info:
        check_budget(cfg, grid, stop, runtime_budget_s=budget, round_cost_s=1e-3)
    assert info.value.suggested_grid == [0.0, 10.0]
    assert check_budget(cfg, grid, stop, runtime_budget_s=estimate.total_seconds + 1.0,
                        round_cost_s=1e-3).total_seconds == pytest.approx(estimate.total_seconds)


def test_network_validation():
    preset = PRESETS[3]
    with pytest.raises(ValueError):
        NetworkConfig(generator=preset.generator(), N=2, M=2, M_prime=1)
    with pytest.raises(ValueError):
        NetworkConfig(generator=preset.generator(), N=2, M=0, M_prime=2)
    with pytest.raises(GeometryError):
        NetworkConfig(generator=preset.generator(), N=2, M=2, M_prime=2, beta=0.8)
    with pytest.raises(ValueError):
        MonteCarloSimulator(_network(1), workers=0)


def test_wilson_radius():
    assert math.isnan(wilson_radius(0, 0))
    r = wilson_radius(50, 1000)
    assert 0.0 < r < 0.02
    assert wilson_radius(0, 1000) > 0.0


def test_simulator_reuse_is_stateless():
    """Running the same point twice on one simulator gives the same statistics."""
    cfg = _network(2)
    simulator = MonteCarloSimulator(cfg, batch_frames=2)
    stop = StopRule(stop_errors=30, max_rounds=200)
    gamma_bar = cfg.gamma_bar_for_rd_db(4.0)
    first = SimResult(points=[simulator.run_point(4.0, gamma_bar, stop)]).to_dataframe()
    again = SimResult(points=[simulator.run_point(4.0, gamma_bar, stop)]).to_dataframe()
    assert first.equals(again)


def test_failure_rounds_match_direct_path():
    """Bits of failed rounds are hard decisions on the S-D link alone."""
    print("Testing failure-path error rate...", end=" ")
    cfg = _network(1)
    gamma_rd_db = 0.0
    gamma_bar = cfg.gamma_bar_for_rd_db(gamma_rd_db)
    frames = 300
    errors = np.zeros(frames)
    bits = np.zeros(frames)
    for f in range(frames):
        outcome = simulate_frame(cfg, cfg.trellis, 0, f, gamma_bar)
        failed = ~outcome.success
        errors[f] = outcome.errors[failed].sum()
        bits[f] = failed.sum() * cfg.N * cfg.n
    assert bits.sum() > 0

    # ratio estimate over frames, the independent trials
    estimate = errors.sum() / bits.sum()
    residual = errors - estimate * bits
    sigma = math.sqrt(frames / (frames - 1) * np.sum(residual ** 2)) / bits.sum()
    expected = direct_path_ber(cfg.geometry(gamma_bar).gamma_sd)
    assert abs(estimate - expected) < 3.0 * sigma

    point = MonteCarloSimulator(cfg, batch_frames=10).run_point(
        gamma_rd_db, gamma_bar, StopRule(stop_errors=10 ** 9, max_rounds=frames * cfg.interleaver_depth))
    assert point.ber_given_failure == pytest.approx(estimate)
    print("✓")


@pytest.mark.slow
def test_relay_position_monotone():
    """At a fixed R-D SNR, moving the relay toward the destination never raises the BER."""
    print("Testing BER versus relay position...", end=" ")
    cfg = _network(1, m=1, interleaver_depth=100)
    result = relay_position_sweep(cfg, [1.25, 2.0, 4.0, 10.0], fixed_gamma_rd_db=5.0,
                                  stop_rule=StopRule(stop_errors=400, max_rounds=50_000))
    points = result.points
    assert [p.beta for p in points] == [1.25, 2.0, 4.0, 10.0]
    for near, far in zip(points, points[1:]):
        assert far.ber <= near.ber + near.ci_radius + far.ci_radius
    assert points[-1].ber < points[0].ber
    print("✓")


@pytest.mark.slow
def test_distant_relay_always_decodes():
    """With a very large beta the relay never fails and the S-R link stops mattering."""
    cfg = _network(1, m=2, beta=50.0)
    stop = StopRule(stop_errors=10 ** 9, max_rounds=2000)
    far = relay_position_sweep(cfg, [50.0], fixed_gamma_rd_db=5.0, stop_rule=stop).points[0]
    assert far.ps_empirical == 1.0
    perfect = run_sweep(cfg, [5.0], stop, overrides={'sr': STRONG}).points[0]
    assert far.bit_errors == perfect.bit_errors
    assert far.ber == pytest.approx(perfect.ber_given_success)


@pytest.mark.slow
@pytest.mark.parametrize("preset_number", [1, 2, 3, 4])
def test_simulation_below_bound(preset_number):
    """Simulated BER stays under the end-to-end bound wherever it is resolved."""
    print(f"Testing simulation against bound for preset {preset_number}...", end=" ")
    grid = [0.0, 5.0, 10.0]
    base = _network(preset_number, interleaver_depth=100)
    wef = enumerate_wef(base.trellis, 12)
    checked = 0
    for m in (1, 2):
        for beta in (3.0, 5.0):
            cfg = replace(base, m=m, beta=beta)
            result = run_sweep(cfg, grid, StopRule(stop_errors=200, max_rounds=20_000), batch_frames=5)
            inputs = BoundInputs(wef=wef, N=cfg.N, M=cfg.M, M_prime=cfg.M_prime,
                                 m=m, n=cfg.n, geometry=cfg.geometry(1.0))
            bounds = bound_table(inputs, grid)['Pb_bound_raw'].to_numpy()
            for point, bound in zip(result.points, bounds):
                if point.bit_errors >= 100:
                    assert point.ber <= bound, (m, beta, point.gamma_rd_dB)
                    checked += 1
    assert checked >= 4
    print("✓")


def main():
    """Run the simulator tests without pytest."""
    print("=" * 60)
    print("CNCC TOOLKIT - Simulator Tests")
    print("=" * 60)
    print()

    try:
        test_noiseless_rounds_are_error_free()
        test_relay_success_rate_matches_analysis()
        test_results_independent_of_worker_count()
        for preset_number in (1, 2, 3, 4):
            test_simulation_below_bound(preset_number)

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
