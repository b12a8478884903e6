# coding: utf-8
"""Bit-level transmit chain and its soft-in/soft-out inverse
Convolutional encoder, pseudorandom interleaver, Gray mapper, Gaussian-evidence
demapper and a log-domain BCJR decoder. LLRs follow the convention
log P(b=0) / P(b=1) and are clamped to +-LLR_CLAMP on output.
"""
import functools
import logging
from dataclasses import dataclass

import numpy as np
from scipy.special import log_expit, logsumexp

from .errors import LengthMismatch
from .gmsg import DiscreteMsg

logger = logging.getLogger(__name__)

LLR_CLAMP = 30.0
VARIANCE_FLOOR = 1e-12

# Non-catastrophic rate-1/2 feedforward codes, keyed by constraint length
KNOWN_GOOD_CODES = {
    3: (0o5, 0o7),
    5: (0o23, 0o35),
    7: (0o133, 0o171),
}


@dataclass(frozen=True)
class CodeConfig:
    """Terminated feedforward convolutional code.

    Generator bit K-1 (the most significant one) taps the current input.
    """

    constraint_length: int = 7
    generators: tuple = (0o133, 0o171)

    @property
    def memory(self):
        return self.constraint_length - 1

    @property
    def n_states(self):
        return 1 << self.memory

    @property
    def n_outputs(self):
        return len(self.generators)

    @property
    def is_known_good(self):
        return KNOWN_GOOD_CODES.get(self.constraint_length) == tuple(self.generators)

    def coded_length(self, n_info):
        return self.n_outputs * (n_info + self.memory)

    def info_length(self, n_coded):
        """Number of information bits that fill `n_coded` coded bits exactly."""
        if n_coded % self.n_outputs:
            raise LengthMismatch(f"{n_coded} coded bits do not fit a rate-1/{self.n_outputs} code")
        n_info = n_coded // self.n_outputs - self.memory
        if n_info < 1:
            raise LengthMismatch(f"{n_coded} coded bits leave no room for information bits")
        return n_info


@dataclass(frozen=True)
class Trellis:
    next_state: np.ndarray  # (S, 2)
    outputs: np.ndarray  # (S, 2, n_outputs)
    prev_state: np.ndarray  # (S, 2)
    prev_input: np.ndarray  # (S, 2)


def _parity(values):
    values = np.asarray(values)
    result = np.zeros_like(values)
    while np.any(values):
        result ^= values & 1
        values = values >> 1
    return result


@functools.lru_cache(maxsize=None)
def make_trellis(code):
    states = np.arange(code.n_states)
    inputs = np.arange(2)
    register = (inputs[None, :] << code.memory) | states[:, None]
    next_state = register >> 1
    outputs = np.stack([_parity(register & g) for g in code.generators], axis=-1)

    prev_state = np.zeros((code.n_states, 2), dtype=int)
    prev_input = np.zeros((code.n_states, 2), dtype=int)
    filled = np.zeros(code.n_states, dtype=int)
    for s in states:
        for u in inputs:
            target = next_state[s, u]
            prev_state[target, filled[target]] = s
            prev_input[target, filled[target]] = u
            filled[target] += 1
    return Trellis(next_state, outputs, prev_state, prev_input)


def generator_taps(generator, constraint_length):
    """Tap coefficients ordered by delay 0..K-1."""
    return (generator >> np.arange(constraint_length - 1, -1, -1)) & 1


def encode(info_bits, code=CodeConfig()):
    """Encode and terminate with K-1 zero flush bits.

    Args:
        info_bits (array_like): 0/1 information bits.
        code (CodeConfig, optional): Code definition. Defaults to (133, 171), K=7.

    Returns:
        numpy.ndarray: Coded bits, outputs of one step adjacent, length
                       n_outputs * (len(info_bits) + K - 1).

    Examples:
    >>> encode([0, 0, 0])
    array([0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0, 0])
    """
    info_bits = np.asarray(info_bits, dtype=int)
    streams = [
        np.convolve(info_bits, generator_taps(g, code.constraint_length)) % 2
        for g in code.generators
    ]
    return np.stack(streams, axis=-1).ravel()


@functools.lru_cache(maxsize=64)
def permutation(length, seed):
    """Interleaver permutation of `length` positions.

    Fisher-Yates shuffle driven by `numpy.random.default_rng(seed)`: the swap
    partners for i = length-1 down to 1 are drawn in one call as
    `rng.integers(0, [length, length-1, ..., 2])`, then position i is swapped
    with its partner in that order.
    """
    rng = np.random.default_rng(seed)
    order = np.arange(length)
    if length > 1:
        partners = rng.integers(0, np.arange(length, 1, -1))
        for i, j in zip(range(length - 1, 0, -1), partners):
            order[i], order[j] = order[j], order[i]
    order.setflags(write=False)
    return order


def interleave(values, seed):
    """Permute bits (or LLRs): out[i] = values[perm[i]]."""
    values = np.asarray(values)
    return values[permutation(len(values), seed)]


def deinterleave(values, seed):
    values = np.asarray(values)
    out = np.empty_like(values)
    out[permutation(len(values), seed)] = values
    return out


def map_symbols(bits, constellation):
    """Gray-map bits onto constellation points.

    Raises:
        LengthMismatch: if the bit count is not a multiple of bits per symbol.
    """
    bits = np.asarray(bits, dtype=int)
    width = constellation.bits_per_symbol
    if bits.size % width:
        raise LengthMismatch(f"{bits.size} bits do not fill {width}-bit symbols")
    weights = 1 << np.arange(width - 1, -1, -1)
    return constellation.points[bits.reshape(-1, width) @ weights]


def _label_log_probs(llrs, constellation):
    """log P(label bits of every point) per symbol, shape (S, Q)."""
    width = constellation.bits_per_symbol
    llrs = np.clip(np.asarray(llrs, dtype=float), -LLR_CLAMP, LLR_CLAMP).reshape(-1, width)
    labels = constellation.labels
    log_p = np.where(labels[None] == 0, log_expit(llrs)[:, None, :], log_expit(-llrs)[:, None, :])
    return log_p.sum(axis=-1)


def demap(evidence, prior_llrs, constellation, max_log=False):
    """Soft demodulation of Gaussian symbol evidence.

    Args:
        evidence (GaussMsg): (S,) messages CN(x; xi, nu_xi), one per data symbol.
        prior_llrs (array_like or None): S * bits_per_symbol prior LLRs, None for uniform.
        constellation (Constellation): The alphabet.
        max_log (bool, optional): Use the max-log approximation. Defaults to False.

    Returns:
        numpy.ndarray: Extrinsic LLRs (posterior minus prior), clamped.
    """
    width = constellation.bits_per_symbol
    n_symbols = np.size(evidence.mean)
    if prior_llrs is None:
        prior_llrs = np.zeros(n_symbols * width)
    prior = np.clip(np.asarray(prior_llrs, dtype=float), -LLR_CLAMP, LLR_CLAMP).reshape(n_symbols, width)

    mean = evidence.mean.reshape(-1, 1)
    variance = np.maximum(evidence.variance.reshape(-1, 1), VARIANCE_FLOOR)
    metric = -np.abs(mean - constellation.points[None, :]) ** 2 / variance
    metric = metric + _label_log_probs(prior, constellation)

    reduce = np.max if max_log else logsumexp
    zero = (constellation.labels.T == 0)[None]  # (1, B, Q)
    candidates = metric[:, None, :]
    l0 = reduce(np.where(zero, candidates, -np.inf), axis=-1)
    l1 = reduce(np.where(~zero, candidates, -np.inf), axis=-1)
    extrinsic = l0 - l1 - prior
    return np.clip(extrinsic, -LLR_CLAMP, LLR_CLAMP).ravel()


def decode_siso(llrs, code=CodeConfig()):
    """BCJR decoding of a terminated codeword.

    Args:
        llrs (array_like): Channel LLRs of the coded bits, in encoder order.
        code (CodeConfig, optional): Code definition.

    Returns:
        tuple: (extrinsic LLRs on the coded bits, hard information bits).
    """
    llrs = np.clip(np.asarray(llrs, dtype=float), -LLR_CLAMP, LLR_CLAMP)
    n_steps = code.info_length(llrs.size) + code.memory
    n_info = n_steps - code.memory
    trellis = make_trellis(code)
    channel = llrs.reshape(n_steps, code.n_outputs)

    # branch log-metric: +L/2 for an output 0, -L/2 for an output 1
    sign = 1 - 2 * trellis.outputs
    gamma = 0.5 * np.einsum("tj,suj->tsu", channel, sign)
    gamma[n_info:, :, 1] = -np.inf

    n_states = code.n_states
    alpha = np.full((n_steps + 1, n_states), -np.inf)
    alpha[0, 0] = 0.0
    for t in range(n_steps):
        branch = alpha[t][trellis.prev_state] + gamma[t][trellis.prev_state, trellis.prev_input]
        step = np.logaddexp(branch[:, 0], branch[:, 1])
        alpha[t + 1] = step - step.max()

    beta = np.full((n_steps + 1, n_states), -np.inf)
    beta[n_steps, 0] = 0.0
    for t in range(n_steps - 1, -1, -1):
        branch = gamma[t] + beta[t + 1][trellis.next_state]
        step = np.logaddexp(branch[:, 0], branch[:, 1])
        beta[t] = step - step.max()

    joint = alpha[:-1, :, None] + gamma + beta[1:][:, trellis.next_state]

    extrinsic = np.empty_like(channel)
    for j in range(code.n_outputs):
        zero = trellis.outputs[:, :, j] == 0
        l0 = logsumexp(np.where(zero, joint, -np.inf), axis=(1, 2))
        l1 = logsumexp(np.where(zero, -np.inf, joint), axis=(1, 2))
        extrinsic[:, j] = l0 - l1 - channel[:, j]

    info_llrs = logsumexp(joint[:n_info, :, 0], axis=1) - logsumexp(joint[:n_info, :, 1], axis=1)
    bits = (info_llrs < 0).astype(int)
    return np.clip(extrinsic, -LLR_CLAMP, LLR_CLAMP).ravel(), bits


def symbol_prior(llrs, constellation):
    """Turn code-extrinsic LLRs into per-symbol discrete priors.

    Returns:
        DiscreteMsg: (S, Q) normalized weights, gamma_s = prod_b P(bit_b(s)).
    """
    return DiscreteMsg.from_log_weights(_label_log_probs(llrs, constellation))


def modulate(info_bits, code, constellation, seed):
    """Encode, interleave and map one user's information bits."""
    return map_symbols(interleave(encode(info_bits, code), seed), constellation)


def turbo_pass(evidence, prior_llrs, code, constellation, seed, max_log=False):
    """One demap/decode exchange for a single user.

    Args:
        evidence (GaussMsg): Symbol evidence on the user's data subcarriers.
        prior_llrs (array_like or None): Code extrinsics from the previous pass,
                                         in interleaved (symbol) order.
        code (CodeConfig): Code definition.
        constellation (Constellation): The alphabet.
        seed (int): The user's interleaver seed.
        max_log (bool, optional): Max-log demapping.

    Returns:
        tuple: (code extrinsics in symbol order, symbol priors, hard information bits).
    """
    demapped = demap(evidence, prior_llrs, constellation, max_log=max_log)
    extrinsic, bits = decode_siso(deinterleave(demapped, seed), code)
    code_llrs = interleave(extrinsic, seed)
    return code_llrs, symbol_prior(code_llrs, constellation), bits
