# coding: utf-8
"""Multiuser MIMO-OFDM frequency-domain physical model
The receive model per antenna m and subcarrier k is

    y[m, k] = sum_n h[m, n, k] * x[n, k] + w[m, k],   w ~ CN(0, 1/lambda)

with each user's channel drawn from an L-tap uniform power-delay profile.
"""
import logging
from dataclasses import dataclass

import numpy as np

from .errors import InvalidPilotConfig, PilotViolation

logger = logging.getLogger(__name__)

PILOT_SYMBOL = (1 + 1j) / np.sqrt(2)

# Per-user subcarrier classes
DATA = 0
PILOT = 1
SILENT = 2


@dataclass(frozen=True)
class PilotPattern:
    """Disjoint, uniformly spaced pilot subcarriers, one set per user."""

    sets: tuple
    kp: int
    k: int

    @property
    def n_users(self):
        return len(self.sets)

    @property
    def roles(self):
        """Array (N, K) holding DATA, PILOT or SILENT for every user and subcarrier."""
        roles = np.full((self.n_users, self.k), DATA)
        for n, indices in enumerate(self.sets):
            roles[:, indices] = SILENT
            roles[n, indices] = PILOT
        return roles

    @property
    def data_indices(self):
        """Subcarriers that carry data for every user."""
        return np.flatnonzero(np.all(self.roles == DATA, axis=0))


@dataclass(frozen=True)
class ChannelRealization:
    """Time-domain taps (M, N, L) and their K-point frequency response (M, N, K)."""

    taps: np.ndarray
    freq: np.ndarray


@dataclass(frozen=True)
class Observation:
    """Received samples y (M, K) and the noise precision used to draw them."""

    y: np.ndarray
    noise_precision: float


@dataclass(frozen=True)
class FrameTruth:
    """Everything the transmitter and channel drew for one frame."""

    info_bits: np.ndarray
    x: np.ndarray
    channel: ChannelRealization
    noise_precision: float


def make_pilot_pattern(n_users, k, kp):
    """Build the staggered pilot layout.

    User n (counted from 0) gets subcarriers n*K/(N*Kp) + j*K/Kp for j < Kp.

    Args:
        n_users (int): Number of users N.
        k (int): Number of subcarriers K.
        kp (int): Pilots per user Kp.

    Returns:
        PilotPattern: Pairwise disjoint per-user index sets.

    Raises:
        InvalidPilotConfig: when N*Kp > K or K is not divisible by N*Kp.

    Examples:
    >>> make_pilot_pattern(2, 8, 2).sets
    (array([0, 4]), array([2, 6]))
    """
    if n_users < 1 or kp < 1 or k < 1:
        raise InvalidPilotConfig("n_users, k and kp must be positive")
    if n_users * kp > k:
        raise InvalidPilotConfig(f"n_users*kp = {n_users * kp} exceeds k = {k}")
    if k % (n_users * kp):
        raise InvalidPilotConfig(f"k = {k} is not divisible by n_users*kp = {n_users * kp}")
    stagger = k // (n_users * kp)
    spacing = k // kp
    sets = tuple(n * stagger + spacing * np.arange(kp) for n in range(n_users))
    return PilotPattern(sets, kp, k)


def dft_basis(k, l_taps):
    """First L columns of the K-point DFT matrix, F[k, l] = exp(-j 2 pi k l / K)."""
    return np.exp(-2j * np.pi * np.outer(np.arange(k), np.arange(l_taps)) / k)


def gen_channel(rng, m_ant, n_users, k, l_taps):
    """Draw one channel with i.i.d. CN(0, 1/L) taps.

    Args:
        rng (numpy.random.Generator): Seeded random source.
        m_ant (int): Receive antennas M.
        n_users (int): Users N.
        k (int): Subcarriers K.
        l_taps (int): Taps L, at most K.

    Returns:
        ChannelRealization: Taps and frequency response with E|h|^2 = 1.
    """
    if l_taps > k:
        raise ValueError(f"l_taps = {l_taps} exceeds k = {k}")
    shape = (m_ant, n_users, l_taps)
    scale = np.sqrt(0.5 / l_taps)
    taps = scale * (rng.standard_normal(shape) + 1j * rng.standard_normal(shape))
    freq = np.fft.fft(taps, n=k, axis=-1)
    return ChannelRealization(taps, freq)


def insert_pilots(data_symbols, pilots):
    """Assemble the (N, K) transmit grid.

    Args:
        data_symbols (numpy.ndarray): (N, K_data) symbols for `pilots.data_indices`.
        pilots (PilotPattern): Pilot layout.

    Returns:
        numpy.ndarray: Pilot symbol on own pilots, 0 on other users' pilots.
    """
    x = np.zeros((pilots.n_users, pilots.k), dtype=complex)
    x[:, pilots.data_indices] = data_symbols
    x[pilots.roles == PILOT] = PILOT_SYMBOL
    return x


def check_pilot_rule(x, pilots):
    """Raise `PilotViolation` if anyone transmits on another user's pilot."""
    silent = pilots.roles == SILENT
    if np.any(x[silent] != 0):
        users, subcarriers = np.nonzero(silent & (x != 0))
        raise PilotViolation(
            f"user {users[0]} transmits on pilot subcarrier {subcarriers[0]} of another user"
        )


def transmit(x, channel, noise_precision, rng, pilots=None):
    """Pass a transmit grid through the channel and add noise.

    Args:
        x (numpy.ndarray): (N, K) symbols with pilots inserted.
        channel (ChannelRealization): Channel realization.
        noise_precision (float): lambda > 0; +inf gives a noiseless observation.
        rng (numpy.random.Generator): Seeded random source.
        pilots (PilotPattern, optional): When given, the pilot rule is enforced.

    Returns:
        Observation: y = sum_n h x + w with w ~ CN(0, 1/lambda).
    """
    if pilots is not None:
        check_pilot_rule(x, pilots)
    y = np.einsum("mnk,nk->mk", channel.freq, x)
    scale = np.sqrt(0.5 / noise_precision)
    noise = scale * (rng.standard_normal(y.shape) + 1j * rng.standard_normal(y.shape))
    return Observation(y + noise, float(noise_precision))


def ebn0_to_precision(ebn0_db, rate, bits_per_symbol):
    """Noise precision for unit-energy symbols at the given Eb/N0 (dB)."""
    return 10 ** (ebn0_db / 10) * rate * bits_per_symbol
