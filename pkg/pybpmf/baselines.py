# coding: utf-8
"""Reference receivers
mfb_receiver       genie bound: true channel, noise precision and interference.
direct_mf_receiver mean field applied straight to CN(y; sum_n h x, 1/lambda),
                   without the auxiliary z/tau layer; it shares the decoder,
                   tap prior, noise update and schedule with the hybrid receiver.
"""
import logging
import time

import numpy as np

from .gmsg import GaussMsg
from .phy import SILENT
from .receiver import (
    ReceiverResult,
    belief_z,
    decode_user,
    initial_state,
    noise_precision_update,
    pin_channel,
    record_iteration,
    update_channel,
)
from .txchain import turbo_pass

logger = logging.getLogger(__name__)


def mfb_receiver(obs, channel, noise_precision, x, pilots, config):
    """Matched-filter bound.

    Every other user is cancelled with its true symbols, the antennas are
    combined with the true channel and the decoder runs once.

    Args:
        obs (Observation): Received frame.
        channel (ChannelRealization): True channel.
        noise_precision (float): True lambda.
        x (numpy.ndarray): (N, K) transmitted grid.
        pilots (PilotPattern): Pilot layout.
        config (ReceiverConfig): Receiver parameters.

    Returns:
        ReceiverResult: Decoded bits; the genie channel and lambda are echoed back.
    """
    h = channel.freq
    data = pilots.data_indices
    contributions = h * x[None]
    total = contributions.sum(axis=1)
    bits = []
    for n in range(pilots.n_users):
        residual = (obs.y - (total - contributions[:, n]))[:, data]
        h_n = h[:, n, data]
        power = np.sum(np.abs(h_n) ** 2, axis=0)
        with np.errstate(divide="ignore"):
            evidence = GaussMsg(
                np.sum(np.conj(h_n) * residual, axis=0) / power,
                1.0 / (noise_precision * power),
            )
        _, _, user_bits = turbo_pass(
            evidence, None, config.code, config.constellation, config.user_seed(n), max_log=config.max_log
        )
        bits.append(user_bits)
    return ReceiverResult(np.stack(bits), h, float(noise_precision), [])


def mf_symbol_msg(residual, h_mean, h_var, noise_precision):
    """Mean-field message to x from the observation factors of all antennas.

    Args:
        residual (numpy.ndarray): (M, ...) y minus the other users' mean contribution.
        h_mean (numpy.ndarray): (M, ...) channel belief means.
        h_var (numpy.ndarray): (M, ...) channel belief variances.
        noise_precision (float): Current lambda.

    Returns:
        GaussMsg: precision lambda * sum_m (|h|^2 + v_h), mean
                  sum_m conj(h) r / sum_m (|h|^2 + v_h).
    """
    power = np.sum(np.abs(h_mean) ** 2 + h_var, axis=0)
    mean = np.sum(np.conj(h_mean) * residual, axis=0) / power
    return GaussMsg(mean, 1.0 / (noise_precision * power))


def mf_channel_msg(residual, x_mean, x_var, noise_precision):
    """Mean-field message to h from one observation factor."""
    power = np.abs(x_mean) ** 2 + x_var
    return GaussMsg(np.conj(x_mean) * residual / power, 1.0 / (noise_precision * power))


def direct_mf_receiver(obs, pilots, config, truth=None, known_channel=None):
    """Direct mean-field receiver with the same schedule as `run_receiver`.

    Users are visited in turn and the residual y - sum_n h_hat x_hat is kept
    current after every user update, so an iteration costs O(MNK + NKQ).

    Returns:
        ReceiverResult: Same layout and diagnostics as the hybrid receiver.
    """
    state = initial_state(obs, pilots, config)
    if known_channel is not None:
        pin_channel(state, known_channel)

    data = state.data
    active = state.roles != SILENT
    diagnostics = []

    for iteration in range(1, config.iterations + 1):
        start = time.perf_counter()
        h_mean, h_var = state.h_belief.mean, state.h_belief.variance
        residual = state.y - np.einsum("mnk,nk->mk", h_mean, state.x_mean)

        decode_ms = 0.0
        bits = []
        for n in range(pilots.n_users if len(data) else 0):
            own = residual + h_mean[:, n] * state.x_mean[n]
            evidence = mf_symbol_msg(own[:, data], h_mean[:, n, data], h_var[:, n, data], state.noise_precision)
            decode_start = time.perf_counter()
            bits.append(decode_user(state, n, evidence, config))
            decode_ms += 1e3 * (time.perf_counter() - decode_start)
            residual = own - h_mean[:, n] * state.x_mean[n]
        state.bits = np.stack(bits) if bits else np.zeros((pilots.n_users, 0), dtype=int)

        if known_channel is None:
            m_ant, _, k = state.h_belief.shape
            for n in range(pilots.n_users):
                own = residual + state.h_belief.mean[:, n] * state.x_mean[n]
                to_h = mf_channel_msg(
                    own[:, active[n]], state.x_mean[n, active[n]], state.x_var[n, active[n]], state.noise_precision
                )
                h_extr_out = GaussMsg.vacuous((m_ant, k)).replace((slice(None), active[n]), to_h)
                update_channel(state, h_extr_out, config.l_taps, index=(slice(None), n))
                residual = own - state.h_belief.mean[:, n] * state.x_mean[n]

        z_belief = belief_z(state.x_mean[None], state.x_var[None], state.h_belief.mean, state.h_belief.variance)
        state.noise_precision = noise_precision_update(state.y, z_belief)

        message_ms = 1e3 * (time.perf_counter() - start) - decode_ms
        diagnostics.append(record_iteration(state, iteration, truth, message_ms, decode_ms))

    return ReceiverResult(state.bits, state.h_belief.mean, state.noise_precision, diagnostics)
