# coding: utf-8
"""Experiment configuration
A configuration is a flat text file with one `key = value` pair per line.
Lines starting with `#` and trailing `# ...` remarks are ignored, arrays are
comma-separated lists and the generators are written in octal, e.g.

    n_users = 2
    modulation = qpsk
    generators = 133, 171
    ebn0_grid = 0, 2, 4, 6

Keys that are left out take the defaults of `SimConfig`.
"""
import logging
import os
import re
from dataclasses import dataclass, fields
from typing import Optional

from .errors import ConfigInvalid, ConfigParse, InvalidPilotConfig, LengthMismatch
from .gmsg import CONSTELLATIONS, make_constellation
from .phy import make_pilot_pattern
from .receiver import ReceiverConfig
from .txchain import KNOWN_GOOD_CODES, CodeConfig

logger = logging.getLogger(__name__)

FILE_PATH = os.path.dirname(os.path.realpath(__file__))
DEFAULT_CONFIG_PATH = os.path.join(FILE_PATH, "default.config")

RECEIVER_NAMES = ("proposed", "mfb", "direct_mf")

_INT = r"[+-]?\d+"
_FLOAT = r"[+-]?(?:\d+\.?\d*|\.\d+)(?:[eE][+-]?\d+)?"


def _list_of(item):
    return rf"(?:{item})(?:\s*,\s*(?:{item}))*"


CONFIG_PATTERNS = {
    # Receive antennas
    "m_antennas": _INT,
    # Users
    "n_users": _INT,
    # Subcarriers
    "k_subcarriers": _INT,
    # Pilots per user
    "kp_pilots": _INT,
    # Channel taps
    "l_taps": _INT,
    # Symbol alphabet
    "modulation": "|".join(CONSTELLATIONS),
    # Convolutional code
    "constraint_length": _INT,
    "generators": _list_of(r"[0-7]+"),
    # Receiver iterations
    "iterations": _INT,
    # Eb/N0 points in dB
    "ebn0_grid": _list_of(_FLOAT),
    "frames_per_point": _INT,
    "master_seed": _INT,
    # Receivers to run on every frame
    "receivers": _list_of("|".join(RECEIVER_NAMES)),
    # Damping factor of the z extrinsics, or none
    "damping": rf"none|{_FLOAT}",
    "max_log": r"true|false",
    "interleaver_seed": _INT,
}

LINE_PATTERN = re.compile(r"^\s*(?P<key>[A-Za-z_]\w*)\s*=\s*(?P<value>.*?)\s*$")


@dataclass(frozen=True)
class SimConfig:
    """Declarative description of one Monte-Carlo experiment."""

    m_antennas: int = 4
    n_users: int = 2
    k_subcarriers: int = 256
    kp_pilots: int = 16
    l_taps: int = 8
    modulation: str = "qpsk"
    constraint_length: int = 7
    generators: tuple = (0o133, 0o171)
    iterations: int = 15
    ebn0_grid: tuple = (0.0, 2.0, 4.0, 6.0, 8.0, 10.0, 12.0, 14.0, 16.0)
    frames_per_point: int = 230
    master_seed: int = 2017
    receivers: tuple = RECEIVER_NAMES
    damping: Optional[float] = None
    max_log: bool = False
    interleaver_seed: int = 0

    @property
    def code(self):
        return CodeConfig(self.constraint_length, tuple(self.generators))

    @property
    def constellation(self):
        return make_constellation(self.modulation)

    @property
    def pilots(self):
        return make_pilot_pattern(self.n_users, self.k_subcarriers, self.kp_pilots)

    @property
    def n_coded(self):
        n_data = self.k_subcarriers - self.n_users * self.kp_pilots
        return n_data * self.constellation.bits_per_symbol

    @property
    def n_info(self):
        return self.code.info_length(self.n_coded)

    @property
    def rate(self):
        return self.n_info / self.n_coded

    def receiver_config(self):
        return ReceiverConfig(
            constellation=self.constellation,
            code=self.code,
            l_taps=self.l_taps,
            iterations=self.iterations,
            damping=self.damping,
            max_log=self.max_log,
            interleaver_seed=self.interleaver_seed,
        )


def get_field_text(field, text):
    """Extract the raw value text of one key

    Args:
        field (str): Key name, one of the keys of `CONFIG_PATTERNS`.
        text (str): Configuration text to search.

    Returns:
        str: The value as written after `=`, or None when the key is absent or
             its value does not have the expected form.

    Examples:
    >>> get_field_text('generators', 'n_users = 2\\ngenerators = 133, 171\\n')
    '133, 171'
    >>> get_field_text('modulation', 'modulation = psk8')
    """
    pattern = rf"^\s*{field}\s*=\s*({CONFIG_PATTERNS[field]})\s*(?:#.*)?$"
    match = re.search(pattern, text, re.MULTILINE)
    if match:
        return match.group(1)
    return None


def _split(value):
    return [item.strip() for item in value.split(",")]


CONVERTERS = {
    "modulation": str,
    "generators": lambda value: tuple(int(item, 8) for item in _split(value)),
    "ebn0_grid": lambda value: tuple(float(item) for item in _split(value)),
    "receivers": lambda value: tuple(_split(value)),
    "damping": lambda value: None if value == "none" else float(value),
    "max_log": lambda value: value == "true",
}


def parse_config(text):
    """Parse configuration text into a validated `SimConfig`.

    Raises:
        ConfigParse: on a line that is not `key = value`, an unknown or repeated
                     key, or a value of the wrong form.
        ConfigInvalid: when the parsed values violate any invariant; every
                       violation is listed.
    """
    values = {}
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0]
        if not line.strip():
            continue
        match = LINE_PATTERN.match(line)
        if not match:
            raise ConfigParse(f"line {number}: expected 'key = value', got {raw.strip()!r}")
        key = match.group("key")
        if key not in CONFIG_PATTERNS:
            raise ConfigParse(f"line {number}: unknown key {key!r}")
        if key in values:
            raise ConfigParse(f"line {number}: key {key!r} given twice")
        value = get_field_text(key, line)
        if value is None:
            raise ConfigParse(f"line {number}: bad value {match.group('value')!r} for {key!r}")
        values[key] = CONVERTERS.get(key, int)(value)

    cfg = SimConfig(**values)
    violations = validate(cfg)
    if violations:
        raise ConfigInvalid(violations)
    logger.debug("config parsed keys=%s", ",".join(sorted(values)))
    return cfg


def load_config(path):
    """Read and parse a configuration file.

    Args:
        path (str): Path of the key-value file.

    Returns:
        SimConfig: The validated configuration.
    """
    with open(path, "r") as f:
        text = f.read()
    return parse_config(text)


def validate(cfg):
    """Return the list of invariant violations of `cfg`, each naming its key."""
    violations = []
    for key in ("m_antennas", "n_users", "k_subcarriers", "kp_pilots", "l_taps", "iterations", "frames_per_point"):
        if getattr(cfg, key) < 1:
            violations.append(f"{key} must be >= 1")
    if cfg.n_users >= 1 and cfg.k_subcarriers >= 1 and cfg.kp_pilots >= 1:
        try:
            make_pilot_pattern(cfg.n_users, cfg.k_subcarriers, cfg.kp_pilots)
        except InvalidPilotConfig as exc:
            violations.append(f"kp_pilots: {exc}")
    if cfg.l_taps > cfg.k_subcarriers:
        violations.append("l_taps must not exceed k_subcarriers")
    if cfg.modulation not in CONSTELLATIONS:
        violations.append(f"modulation must be one of {', '.join(CONSTELLATIONS)}")
    if not cfg.code.is_known_good:
        known = ", ".join(
            f"K={k} ({' '.join(format(g, 'o') for g in gens)})" for k, gens in sorted(KNOWN_GOOD_CODES.items())
        )
        violations.append(f"generators: unsupported code, use one of {known}")
    if not violations:
        try:
            cfg.n_info
        except LengthMismatch as exc:
            violations.append(f"k_subcarriers: {exc}")
    if not cfg.ebn0_grid:
        violations.append("ebn0_grid must not be empty")
    if not cfg.receivers:
        violations.append("receivers must not be empty")
    unknown = sorted(set(cfg.receivers) - set(RECEIVER_NAMES))
    if unknown:
        violations.append(f"receivers: unknown {', '.join(unknown)}")
    if len(set(cfg.receivers)) != len(cfg.receivers):
        violations.append("receivers must not repeat")
    if cfg.damping is not None and not 0 < cfg.damping <= 1:
        violations.append("damping must lie in (0, 1]")
    if not 0 <= cfg.master_seed < 2**64:
        violations.append("master_seed must be a 64-bit unsigned integer")
    if cfg.interleaver_seed < 0:
        violations.append("interleaver_seed must be >= 0")
    return violations


def _format(key, value):
    if key == "generators":
        return ", ".join(format(g, "o") for g in value)
    if key == "ebn0_grid":
        return ", ".join(repr(float(v)) for v in value)
    if key == "receivers":
        return ", ".join(value)
    if key == "damping":
        return "none" if value is None else repr(float(value))
    if key == "max_log":
        return "true" if value else "false"
    return str(value)


def serialize_config(cfg):
    """Canonical text form of `cfg`; `parse_config` reads it back unchanged."""
    lines = [f"{f.name} = {_format(f.name, getattr(cfg, f.name))}" for f in fields(cfg)]
    return "\n".join(lines) + "\n"
