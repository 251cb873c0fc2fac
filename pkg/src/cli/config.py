"""
Experiment Configuration Module

Loads experiment files and merges them with built-in defaults and
command-line flags:
1. YAML or JSON documents validated against config/experiment_schema.json
2. Sections: `network` and `defaults` apply to every subcommand; a section
   named after the subcommand overrides them
3. Precedence: command-line flags > subcommand section > defaults >
   network > built-in defaults

Design Philosophy:
- Reject malformed files early with the offending key in the message
- Presets carry the exact example networks so no one retypes a generator
"""

import json
import logging
from dataclasses import dataclass, field, fields
from pathlib import Path
from typing import Any, Dict, List, Optional

import jsonschema
import yaml

from gf2core import GeneratorMatrix, parse_generator

logger = logging.getLogger(__name__)

SCHEMA_PATH = Path(__file__).parent.parent.parent / "config" / "experiment_schema.json"
SUBCOMMANDS = ("enumerate", "analyze", "simulate", "sweep-beta")


class ConfigError(ValueError):
    """Raised for unreadable, invalid or inconsistent experiment configuration."""


@dataclass(frozen=True)
class PresetNetwork:
    """
    One of the four example networks.

    Attributes:
        number: Preset number (1-4)
        N: Sources
        M: Relay antennas
        M_prime: Parity packets per round
        label: Generator name
        rows: Parity rows in config-file notation
    """
    number: int
    N: int
    M: int
    M_prime: int
    label: str
    rows: tuple

    def generator(self) -> GeneratorMatrix:
        return parse_generator(list(self.rows), declared_nu=3, label=self.label)


G1_ROWS = (
    "1+D+D^2+D^3 / 1+D+D^3",
    "1+D^2+D^3 / 1+D+D^3",
)

G2_ROWS = (
    "1+D^2+D^3 / 1+D+D^3 ; 1+D^2 / 1+D+D^3",
    "D^2 / 1+D+D^3 ; 1+D^2+D^3 / 1+D+D^3",
)

PRESETS: Dict[int, PresetNetwork] = {
    1: PresetNetwork(1, N=2, M=1, M_prime=1, label="G1", rows=G1_ROWS),
    2: PresetNetwork(2, N=2, M=2, M_prime=1, label="G1", rows=G1_ROWS),
    3: PresetNetwork(3, N=2, M=2, M_prime=2, label="G2", rows=G2_ROWS),
    4: PresetNetwork(4, N=2, M=3, M_prime=2, label="G2", rows=G2_ROWS),
}


@dataclass
class ExperimentConfig:
    """
    Fully resolved settings for one subcommand run.

    The network is either a preset or an explicit generator with N, M and M'.
    """
    preset: Optional[int] = None
    generator: Optional[List[str]] = None
    N: Optional[int] = None
    M: Optional[int] = None
    M_prime: Optional[int] = None
    nu: Optional[int] = None
    m: int = 1
    n: int = 10
    l: int = 100
    eta: float = 2.0
    beta: float = 5.0
    interleaver_depth: int = 100
    snr_db: List[float] = field(default_factory=lambda: [0.0, 5.0, 10.0, 15.0, 20.0])
    seed: int = 2024
    stop_errors: int = 200
    max_rounds: int = 10_000_000
    horizon: int = 12
    workers: int = 1
    batch_frames: int = 10
    runtime_budget_s: Optional[float] = None
    round_cost_s: float = 2e-5
    output: Optional[str] = None
    beta_grid: List[float] = field(default_factory=lambda: [1.5, 2.0, 3.0, 5.0, 8.0, 12.0])
    fixed_gamma_rd_db: float = 8.0
    packet_lengths: Optional[List[int]] = None
    variant: str = "tight"

    def resolve_network(self) -> GeneratorMatrix:
        """
        Fill N, M, M' from the preset (when given) and return the generator.

        Raises:
            ConfigError: If neither a preset nor a complete explicit network is given,
                         or the explicit sizes contradict the generator
        """
        if self.generator is None:
            if self.preset is None:
                raise ConfigError("No network given: set 'preset' or 'generator' with N, M and M_prime")
            if self.preset not in PRESETS:
                raise ConfigError(f"Unknown preset {self.preset}; choose one of {sorted(PRESETS)}")
            preset = PRESETS[self.preset]
            for name in ("N", "M", "M_prime"):
                value = getattr(self, name)
                if value is not None and value != getattr(preset, name):
                    raise ConfigError(f"{name}={value} contradicts preset {self.preset} ({name}={getattr(preset, name)})")
            self.N, self.M, self.M_prime = preset.N, preset.M, preset.M_prime
            return preset.generator()

        g = parse_generator(self.generator, declared_nu=self.nu,
                            label=f"preset {self.preset}" if self.preset else "custom")
        if self.M is None:
            raise ConfigError("Explicit generator needs the antenna count 'M'")
        if self.N is not None and self.N != g.N:
            raise ConfigError(f"N={self.N} but the generator has {g.N} rows")
        if self.M_prime is not None and self.M_prime != g.M_prime:
            raise ConfigError(f"M_prime={self.M_prime} but the generator has {g.M_prime} parity columns")
        self.N, self.M_prime = g.N, g.M_prime
        return g

    def manifest(self) -> Dict[str, Any]:
        """Settings as a flat dict for the CSV reproducibility header."""
        return {f.name: getattr(self, f.name) for f in fields(self)}


def _load_schema() -> Dict:
    with open(SCHEMA_PATH, 'r') as f:
        return json.load(f)


def load_document(path: str) -> Dict[str, Any]:
    """
    Read and validate an experiment file.

    Raises:
        ConfigError: On unsupported suffix, unreadable content or schema violation
    """
    config_path = Path(path)
    if not config_path.exists():
        raise ConfigError(f"Configuration file not found: {config_path}")
    suffix = config_path.suffix.lower()
    try:
        with open(config_path, 'r') as f:
            if suffix in ['.yaml', '.yml']:
                document = yaml.safe_load(f)
            elif suffix == '.json':
                document = json.load(f)
            else:
                raise ConfigError(f"Unsupported file format: {config_path.suffix}")
    except (yaml.YAMLError, json.JSONDecodeError) as e:
        raise ConfigError(f"Cannot parse {config_path}: {e}") from e

    document = document or {}
    try:
        jsonschema.validate(instance=document, schema=_load_schema())
    except jsonschema.exceptions.ValidationError as e:
        location = "/".join(str(p) for p in e.absolute_path) or "<root>"
        raise ConfigError(f"Configuration validation failed at {location}: {e.message}") from e
    return document


def build_config(subcommand: str, path: Optional[str] = None,
                 overrides: Optional[Dict[str, Any]] = None) -> ExperimentConfig:
    """
    Resolve the settings of one subcommand.

    Args:
        subcommand: One of enumerate, analyze, simulate, sweep-beta
        path: Optional experiment file
        overrides: Command-line values; None entries are ignored

    Raises:
        ConfigError: On invalid files or values
    """
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"Unknown subcommand {subcommand!r}")

    merged: Dict[str, Any] = {}
    if path is not None:
        document = load_document(path)
        for section in ("network", "defaults", subcommand):
            merged.update(document.get(section) or {})
        logger.info("Loaded %s settings from %s", subcommand, path)
    for key, value in (overrides or {}).items():
        if value is not None:
            merged[key] = value

    known = {f.name for f in fields(ExperimentConfig)}
    unknown = set(merged) - known
    if unknown:
        raise ConfigError(f"Unknown configuration keys: {sorted(unknown)}")
    try:
        return ExperimentConfig(**merged)
    except TypeError as e:
        raise ConfigError(str(e)) from e
