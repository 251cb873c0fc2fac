"""
Command-Line Front-End

Batch entry point for the toolkit:
1. enumerate   - weight enumerator terms, free distance, dominant patterns
                 and the diversity/throughput table of the example networks
2. analyze     - end-to-end BER bound over an R-D SNR grid (or a
                 packet-length study)
3. simulate    - Monte Carlo BER with the matching bound column
4. sweep-beta  - Monte Carlo BER versus relay position

Every CSV starts with '#' comment lines recording the resolved settings.
Exit codes: 0 success, 1 completed but flagged (truncated, unresolved or
incomplete results), 2 error.

Usage:
    python src/cli/main.py analyze --preset 2 --m 1 --snr-db 0,10,20,30,40
"""

import argparse
import json
import logging
import sys
from dataclasses import replace
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Optional, TextIO

import pandas as pd

# Add src to path when run as a script
src_dir = Path(__file__).parent.parent
if str(src_dir) not in sys.path:
    sys.path.insert(0, str(src_dir))

from analysis import BoundInputs, bound_table, packet_length_study  # noqa: E402
from channel import SnrGeometry  # noqa: E402
from cli.config import PRESETS, ConfigError, ExperimentConfig, build_config  # noqa: E402
from convcodec import build_trellis  # noqa: E402
from sim import (  # noqa: E402
    BudgetExceededError,
    NetworkConfig,
    StopRule,
    check_budget,
    estimate_budget,
    relay_position_sweep,
    run_sweep,
    sweep_beta_table,
)
from wef import (  # noqa: E402
    EnumerationBudgetError,
    InconclusiveError,
    cncc_figures,
    diversity_regime,
    dominant_pattern,
    enumerate_wef,
    free_distance,
    lnc_baseline,
)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FLAGGED = 1
EXIT_ERROR = 2

PROBABILITY_COLUMNS = (
    'Pe', 'Pf', 'PbGivenF', 'PbGivenS_bound', 'Pb_bound', 'Pb_bound_raw',
    'ber', 'ci_radius', 'ps_empirical', 'ber_given_success', 'ber_given_failure',
)

# settings that never change results and stay out of the manifest
MANIFEST_EXCLUDED = ('workers', 'output', 'runtime_budget_s', 'round_cost_s')


def _float_list(text: str) -> List[float]:
    try:
        return [float(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Expected a comma-separated list of numbers, got {text!r}") from e


def _int_list(text: str) -> List[int]:
    try:
        return [int(v) for v in text.split(",") if v.strip()]
    except ValueError as e:
        raise argparse.ArgumentTypeError(f"Expected a comma-separated list of integers, got {text!r}") from e


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument('--config', help='YAML or JSON experiment file')
    common.add_argument('--preset', type=int, choices=sorted(PRESETS), help='Example network 1-4')
    common.add_argument('--seed', type=int, help='Master seed (unsigned 64-bit)')
    common.add_argument('--out', dest='output', help='CSV output path (default: stdout)')
    common.add_argument('--snr-db', dest='snr_db', type=_float_list, help='R-D SNR grid in dB, comma-separated')
    common.add_argument('--m', type=int, help='Nakagami parameter of the S-R links')
    common.add_argument('--n', type=int, help='Bits per packet')
    common.add_argument('--eta', type=float, help='Path-loss exponent')
    common.add_argument('--beta', type=float, help='Distance ratio d_sd / d_sr')
    common.add_argument('--depth', dest='interleaver_depth', type=int, help='Interleaving depth')
    common.add_argument('--horizon', type=int, help='Total-weight horizon of the enumerator')
    common.add_argument('--stop-errors', dest='stop_errors', type=int, help='Bit errors that end a point')
    common.add_argument('--max-rounds', dest='max_rounds', type=int, help='Round cap per point')
    common.add_argument('--workers', type=int, help='Worker processes for simulation')
    common.add_argument('--batch-frames', dest='batch_frames', type=int, help='Frames per simulation chunk')
    common.add_argument('--runtime-budget', dest='runtime_budget_s', type=float,
                        help='Refuse simulations expected to take longer (seconds)')
    common.add_argument('--variant', choices=['tight', 'loose'], help='PEP factor of the union bound')
    common.add_argument('--verbose', '-v', action='store_true', help='Debug logging on stderr')

    parser = argparse.ArgumentParser(
        prog='cncc',
        description='Analysis and simulation of convolutional network-coded cooperation',
    )
    sub = parser.add_subparsers(dest='command', required=True)

    p_enum = sub.add_parser('enumerate', parents=[common], help='Weight enumerator and diversity table')
    p_enum.add_argument('--all-presets', action='store_true',
                        help='Emit the diversity/throughput table of all example networks')

    p_analyze = sub.add_parser('analyze', parents=[common], help='End-to-end BER bound')
    p_analyze.add_argument('--packet-lengths', dest='packet_lengths', type=_int_list,
                           help='Packet lengths for a packet-length study, comma-separated')

    sub.add_parser('simulate', parents=[common], help='Monte Carlo BER versus R-D SNR')

    p_beta = sub.add_parser('sweep-beta', parents=[common], help='Monte Carlo BER versus relay position')
    p_beta.add_argument('--beta-grid', dest='beta_grid', type=_float_list, help='Distance ratios, comma-separated')
    p_beta.add_argument('--fixed-gamma-rd-db', dest='fixed_gamma_rd_db', type=float, help='R-D SNR held fixed (dB)')
    return parser


def write_csv(frame: pd.DataFrame, config: ExperimentConfig, command: str,
              extra: Optional[Dict[str, Any]] = None, stream: Optional[TextIO] = None) -> None:
    """Write a result table preceded by its reproducibility manifest."""
    manifest = {k: v for k, v in config.manifest().items() if k not in MANIFEST_EXCLUDED}
    frame = frame.copy()
    for column in PROBABILITY_COLUMNS:
        if column in frame.columns:
            frame[column] = frame[column].map(lambda v: f"{v:.6e}")

    lines = [f"# cncc {command}", f"# config: {json.dumps(manifest, sort_keys=True)}"]
    for key, value in (extra or {}).items():
        lines.append(f"# {key}: {value}")
    body = frame.to_csv(index=False, lineterminator="\n")

    if config.output:
        with open(config.output, 'w', newline='') as f:
            f.write("\n".join(lines) + "\n" + body)
    else:
        target = stream or sys.stdout
        target.write("\n".join(lines) + "\n" + body)


def _network(config: ExperimentConfig) -> NetworkConfig:
    generator = config.resolve_network()
    return NetworkConfig(
        generator=generator, N=config.N, M=config.M, M_prime=config.M_prime, m=config.m,
        n=config.n, l=config.l, eta=config.eta, beta=config.beta,
        interleaver_depth=config.interleaver_depth, seed=config.seed,
    )


def _bound_inputs(config: ExperimentConfig, network: NetworkConfig) -> BoundInputs:
    wef = enumerate_wef(network.trellis, config.horizon)
    return BoundInputs(
        wef=wef, N=network.N, M=network.M, M_prime=network.M_prime, m=network.m, n=network.n,
        geometry=SnrGeometry(gamma_bar=1.0, eta=network.eta, beta=network.beta),
    )


def _stop_rule(config: ExperimentConfig) -> StopRule:
    return StopRule(stop_errors=config.stop_errors, max_rounds=config.max_rounds)


def table_one(horizon: int = 12, m_values=(1, 2, 3, 4)) -> pd.DataFrame:
    """Diversity orders and throughputs of the four example networks."""
    rows = []
    for number, preset in sorted(PRESETS.items()):
        wef = enumerate_wef(build_trellis(preset.generator()), horizon)
        pattern = dominant_pattern(wef, preset.M)
        lnc = lnc_baseline(preset.N, preset.M)
        row = {'network': number, 'N': preset.N, 'M': preset.M, 'M_prime': preset.M_prime,
               'code': preset.label, 'Dstar': pattern.Dstar}
        for m in m_values:
            row[f'cncc_m{m}'] = cncc_figures(preset.N, preset.M_prime, pattern.Dstar, preset.M, m).diversity
        row['lnc_diversity'] = lnc.diversity
        row['throughput_cncc'] = str(Fraction(preset.N, preset.N + preset.M_prime))
        row['throughput_lnc'] = str(lnc.throughput)
        rows.append(row)
    return pd.DataFrame(rows)


def format_summary(title: str, lines: List[str]) -> str:
    report = ["=" * 60, title, "=" * 60, ""]
    report.extend(lines)
    report.append("")
    report.append("=" * 60)
    return "\n".join(report)


def cmd_enumerate(config: ExperimentConfig, all_presets: bool = False) -> int:
    """Weight enumerator CSV (d1, d2, B) or the example-network table."""
    if all_presets:
        table = table_one(config.horizon)
        write_csv(table, config, 'enumerate')
        lines = []
        for _, row in table.iterrows():
            cncc = ",".join(str(row[c]) for c in table.columns if c.startswith('cncc_m'))
            lines.append(f"Network {row['network']} (N={row['N']}, M={row['M']}, M'={row['M_prime']}, "
                         f"{row['code']}): D*={row['Dstar']}  CNCC {cncc}  LNC {row['lnc_diversity']}  "
                         f"throughput {row['throughput_cncc']} vs {row['throughput_lnc']}")
        print(format_summary("DIVERSITY ORDER AND NETWORK THROUGHPUT", lines), file=sys.stderr)
        return EXIT_OK

    network = _network(config)
    status = EXIT_OK
    try:
        wef = enumerate_wef(network.trellis, config.horizon)
    except EnumerationBudgetError as e:
        logger.warning("%s", e)
        wef = e.partial
        status = EXIT_FLAGGED

    extra: Dict[str, Any] = {'complete': wef.complete, 'horizon': wef.horizon}
    lines = [f"Code: {network.generator.label}  (N={network.N}, M'={network.M_prime}, "
             f"nu={network.trellis.nu}, tail={network.trellis.tail_length})"]
    if wef.terms:
        extra['dfree'] = free_distance(wef)
        lines.append(f"Free distance: {extra['dfree']}")
    else:
        lines.append(f"No error events up to weight {wef.horizon}")
        status = EXIT_FLAGGED

    for M in (1, 2, 3):
        try:
            pattern = dominant_pattern(wef, M)
        except InconclusiveError as e:
            extra[f'dominant_M{M}'] = 'inconclusive'
            lines.append(f"M={M}: inconclusive ({e})")
            status = EXIT_FLAGGED
            continue
        pairs = " ".join(f"({d1},{d2})" for d1, d2 in pattern.pairs)
        extra[f'dominant_M{M}'] = f"{pairs} Dstar={pattern.Dstar}"
        diversities = [cncc_figures(network.N, network.M_prime, pattern.Dstar, M, m).diversity
                       for m in (1, 2, 3, 4)]
        lines.append(f"M={M}: pairs {pairs}  D*={pattern.Dstar}  "
                     f"diversity m=1..4: {','.join(str(d) for d in diversities)}  "
                     f"LNC {lnc_baseline(network.N, M).diversity}")

    throughput = Fraction(network.N, network.N + network.M_prime)
    lines.append(f"Throughput (M={network.M}): CNCC {throughput}  LNC {lnc_baseline(network.N, network.M).throughput}")
    lines.append(f"Relay regime for m={network.m}: {diversity_regime(network.m).value}")

    write_csv(wef.to_dataframe(), config, 'enumerate', extra)
    print(format_summary("WEIGHT ENUMERATOR SUMMARY", lines), file=sys.stderr)
    return status


def cmd_analyze(config: ExperimentConfig) -> int:
    """Bound table over the SNR grid, or a packet-length study."""
    network = _network(config)
    inputs = _bound_inputs(config, network)
    if config.packet_lengths:
        table = packet_length_study(inputs, config.packet_lengths, config.snr_db, variant=config.variant)
        write_csv(table, config, 'analyze')
        return EXIT_OK

    table = bound_table(inputs, config.snr_db, variant=config.variant)
    write_csv(table, config, 'analyze')
    top = table['slope_estimate'].iloc[-1]
    print(format_summary("END-TO-END BOUND", [
        f"Network: N={network.N}, M={network.M}, M'={network.M_prime}, m={network.m}, "
        f"n={network.n}, beta={network.beta}, eta={network.eta}",
        f"Top-decade slope: {top:.3f}",
    ]), file=sys.stderr)
    if table['truncated'].any():
        logger.warning("Union bound truncated at %d point(s); raise the horizon", int(table['truncated'].sum()))
        return EXIT_FLAGGED
    return EXIT_OK


def cmd_simulate(config: ExperimentConfig) -> int:
    """Simulated BER per SNR point with the bound column appended."""
    network = _network(config)
    stop_rule = _stop_rule(config)
    if config.runtime_budget_s is not None:
        check_budget(network, config.snr_db, stop_rule, config.runtime_budget_s,
                     config.round_cost_s, config.horizon)

    result = run_sweep(network, config.snr_db, stop_rule, workers=config.workers,
                       batch_frames=config.batch_frames)
    frame = result.to_dataframe()
    bounds = bound_table(_bound_inputs(config, network), config.snr_db, variant=config.variant)
    frame['Pb_bound_raw'] = bounds['Pb_bound_raw'].to_numpy()
    write_csv(frame, config, 'simulate')
    return EXIT_FLAGGED if result.flagged else EXIT_OK


def cmd_sweep_beta(config: ExperimentConfig) -> int:
    """Simulated BER per relay position at a fixed R-D SNR."""
    network = _network(config)
    stop_rule = _stop_rule(config)
    if config.runtime_budget_s is not None:
        _check_beta_budget(config, network, stop_rule)

    result = relay_position_sweep(network, config.beta_grid, config.fixed_gamma_rd_db, stop_rule,
                                  workers=config.workers, batch_frames=config.batch_frames)
    frame = sweep_beta_table(result)
    inputs = _bound_inputs(config, network)
    frame['Pb_bound_raw'] = [
        float(bound_table(replace(inputs, geometry=SnrGeometry(1.0, network.eta, beta)),
                          [config.fixed_gamma_rd_db], variant=config.variant)['Pb_bound_raw'].iloc[0])
        for beta in config.beta_grid
    ]
    write_csv(frame, config, 'sweep-beta')
    return EXIT_FLAGGED if result.flagged else EXIT_OK


def _check_beta_budget(config: ExperimentConfig, network: NetworkConfig, stop_rule: StopRule) -> None:
    spent = 0.0
    suggested = []
    for beta in config.beta_grid:
        point = replace(network, beta=beta)
        seconds = estimate_budget(point, [config.fixed_gamma_rd_db], stop_rule,
                                  config.round_cost_s, config.horizon).total_seconds
        if spent + seconds > config.runtime_budget_s:
            raise BudgetExceededError(
                f"Expected runtime exceeds budget {config.runtime_budget_s:.0f} s; "
                f"suggested beta grid: {suggested}",
                suggested,
            )
        spent += seconds
        suggested.append(beta)


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(asctime)s %(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )

    options = vars(args).copy()
    command = options.pop('command')
    path = options.pop('config')
    options.pop('verbose')
    all_presets = options.pop('all_presets', False)

    try:
        config = build_config(command, path, options)
        if command == 'enumerate':
            return cmd_enumerate(config, all_presets=all_presets)
        if command == 'analyze':
            return cmd_analyze(config)
        if command == 'simulate':
            return cmd_simulate(config)
        return cmd_sweep_beta(config)
    except (ConfigError, ValueError, RuntimeError, OSError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_ERROR


if __name__ == '__main__':
    sys.exit(main())
