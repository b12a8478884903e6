# coding: utf-8
"""Hybrid BP/MF iterative MIMO-OFDM receiver
The product constraint z = x * h at every (antenna m, user n, subcarrier k) is
handled in two steps: the constraint is first marginalized against the
Gaussian message on z (BP-like), which leaves CN(x h; z, v_z), and the message
to x (or h) is then the exponentiated expected log of that function under the
belief of h (or x) (MF-like). Everything else is Gaussian BP through the
sum-node, a tap-domain prior on each channel and a soft demapper/decoder pair.

Arrays are indexed (m, n, k) for per-link quantities and (n, k) for symbols.
"""
import logging
import time
import warnings
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .errors import SingularTapSystem, ZeroChannelBelief, ZeroResidual, ZeroSymbolBelief
from .gmsg import (
    VARIANCE_CLAMP,
    DiscreteMsg,
    GaussMsg,
    discrete_moments,
    divide_masked,
    product,
    product_over,
)
from .phy import DATA, PILOT, PILOT_SYMBOL, SILENT, dft_basis
from .txchain import VARIANCE_FLOOR, CodeConfig, turbo_pass

logger = logging.getLogger(__name__)

POWER_FLOOR = 1e-30
TAP_REGULARIZATION = 1e-10
NOISE_PRECISION_CLAMP = 1e12


@dataclass(frozen=True)
class ReceiverConfig:
    """Static parameters shared by every frame a receiver decodes."""

    constellation: object
    code: CodeConfig = CodeConfig()
    l_taps: int = 8
    iterations: int = 15
    damping: Optional[float] = None
    max_log: bool = False
    interleaver_seed: int = 0

    def user_seed(self, n):
        return self.interleaver_seed + n


@dataclass
class ReceiverState:
    """All messages and beliefs of one frame, advanced in place per iteration."""

    y: np.ndarray
    roles: np.ndarray
    data: np.ndarray
    cev_z: GaussMsg
    vec_z: GaussMsg
    x_mean: np.ndarray
    x_var: np.ndarray
    x_prior: DiscreteMsg
    code_llrs: list
    h_extr_in: GaussMsg
    h_extr_out: GaussMsg
    h_belief: GaussMsg
    noise_precision: float
    bits: Optional[np.ndarray] = None


@dataclass(frozen=True)
class IterationRecord:
    iteration: int
    nmse_db: float
    lambda_hat: float
    ber: float
    message_ms: float
    decode_ms: float


@dataclass(frozen=True)
class ReceiverResult:
    bits: np.ndarray
    h_hat: np.ndarray
    noise_precision: float
    diagnostics: list = field(default_factory=list)


def leave_one_out_sum(values, axis=1):
    """Sum over all other entries of `axis`, built from exclusive prefix and suffix sums."""
    values = np.moveaxis(np.asarray(values), axis, 0)
    zero = np.zeros_like(values[:1])
    prefix = np.concatenate([zero, np.cumsum(values, axis=0)[:-1]], axis=0)
    suffix = np.concatenate([np.cumsum(values[::-1], axis=0)[::-1][1:], zero], axis=0)
    return np.moveaxis(prefix + suffix, 0, axis)


def interference_msg(vec_z, y, noise_precision):
    """Message from the sum-node toward every z[m, n, k].

    Args:
        vec_z (GaussMsg): (M, N, K) extrinsic messages of the z variables.
        y (numpy.ndarray): (M, K) received samples.
        noise_precision (float): Current estimate of lambda.

    Returns:
        GaussMsg: mean y - sum_{n' != n} vec_z.mean, variance
                  1/lambda + sum_{n' != n} vec_z.variance.
    """
    mean = y[:, None, :] - leave_one_out_sum(vec_z.mean, axis=1)
    variance = 1.0 / noise_precision + leave_one_out_sum(vec_z.variance, axis=1)
    return GaussMsg(mean, variance)


def msg_fz_to_x(cev_z, h_belief):
    """Hybrid-rule message from the product constraint to x.

    exp< log CN(x h; cev_z) >_{b(h)} is Gaussian in x with mean
    conj(h_hat) cev_z / (|h_hat|^2 + v_h) and variance cev_v / (|h_hat|^2 + v_h).

    Raises:
        ZeroChannelBelief: when |h_hat|^2 + v_h < 1e-30.
    """
    power = np.abs(h_belief.mean) ** 2 + h_belief.variance
    if np.any(power < POWER_FLOOR):
        raise ZeroChannelBelief("channel belief has zero second moment")
    return GaussMsg(np.conj(h_belief.mean) * cev_z.mean / power, cev_z.variance / power)


def combine_x(msgs, axis=0):
    """Product of the per-antenna messages to x (receive antennas on `axis`)."""
    return product_over(msgs, axis=axis)


def belief_x(evidence, prior, constellation):
    """Discrete belief of x from Gaussian evidence and the decoder prior.

    Args:
        evidence (GaussMsg): Combined message CN(x; xi, v_xi).
        prior (DiscreteMsg): Decoder message gamma over the constellation.
        constellation (Constellation): The alphabet.

    Returns:
        tuple: (DiscreteMsg belief, mean, variance).
    """
    variance = np.maximum(evidence.variance, VARIANCE_FLOOR)[..., None]
    log_likelihood = -np.abs(constellation.points - evidence.mean[..., None]) ** 2 / variance
    with np.errstate(divide="ignore"):
        log_prior = np.log(prior.weights)
    belief = DiscreteMsg.from_log_weights(log_prior + log_likelihood)
    mean, var = discrete_moments(belief, constellation)
    return belief, mean, var


def msg_fz_to_h(cev_z, x_mean, x_var):
    """Hybrid-rule message from the product constraint to h.

    Raises:
        ZeroSymbolBelief: when |x_hat|^2 + v_x < 1e-30.
    """
    power = np.abs(x_mean) ** 2 + x_var
    if np.any(power < POWER_FLOOR):
        raise ZeroSymbolBelief("symbol belief has zero second moment")
    return GaussMsg(np.conj(x_mean) * cev_z.mean / power, cev_z.variance / power)


def tap_posterior(h_extr_out, l_taps):
    """Marginal posterior of h = F t on every subcarrier.

    The incoming messages on the last axis are independent Gaussian
    observations of h; t ~ CN(0, I/L) are the time-domain taps.

    Returns:
        GaussMsg: per-subcarrier posterior marginals, same shape as the input.

    Raises:
        SingularTapSystem: if the regularized L x L system cannot be solved.
    """
    k = h_extr_out.shape[-1]
    basis = dft_basis(k, l_taps)
    with np.errstate(divide="ignore"):
        weight = 1.0 / np.maximum(h_extr_out.variance, VARIANCE_FLOOR)
    weighted_obs = np.where(weight > 0, h_extr_out.mean * weight, 0)

    gram = (basis.conj().T * weight[..., None, :]) @ basis
    gram = gram + (l_taps + TAP_REGULARIZATION) * np.eye(l_taps)
    rhs = weighted_obs @ basis.conj()
    identity = np.broadcast_to(np.eye(l_taps), gram.shape)
    try:
        solution = np.linalg.solve(gram, np.concatenate([rhs[..., None], identity], axis=-1))
    except np.linalg.LinAlgError as exc:
        raise SingularTapSystem(str(exc)) from exc
    if not np.all(np.isfinite(solution)):
        raise SingularTapSystem("tap posterior is not finite")

    tap_mean = solution[..., 0]
    tap_cov = solution[..., 1:]
    mean = tap_mean @ basis.T
    variance = np.real(np.sum((basis @ tap_cov) * basis.conj(), axis=-1))
    return GaussMsg(mean, np.maximum(variance, 0.0))


def channel_prior_update(h_extr_out, l_taps):
    """Extrinsic message from the tap-domain prior toward each h[m, n, k].

    Args:
        h_extr_out (GaussMsg): (..., K) messages from the constraints to h.
        l_taps (int): Channel length L.

    Returns:
        GaussMsg: posterior marginal divided by the incoming message.
    """
    posterior = tap_posterior(h_extr_out, l_taps)
    h_extr_in, clamped = divide_masked(posterior, h_extr_out)
    if np.any(clamped):
        logger.debug("channel prior clamped=%d", np.count_nonzero(clamped))
    return h_extr_in


def belief_h(extr_in, extr_out):
    return product(extr_in, extr_out)


def belief_z(x_mean, x_var, h_mean, h_var):
    """Moments of z = x h under independent beliefs of x and h."""
    mean = x_mean * h_mean
    variance = np.abs(x_mean) ** 2 * h_var + np.abs(h_mean) ** 2 * x_var + h_var * x_var
    return GaussMsg(mean, variance)


def msg_z_extrinsic(z_belief, cev_z):
    """Message toward the sum-node: projected z belief divided by the incoming message.

    Non-positive precisions are clamped (see `gmsg.divide_masked`) and counted
    in the log.
    """
    vec_z, clamped = divide_masked(z_belief, cev_z)
    if np.any(clamped):
        logger.debug("z extrinsic clamped=%d", np.count_nonzero(clamped))
    return vec_z


def noise_precision_update(y, z_belief):
    """Mean-field update of the noise precision under the prior 1/lambda.

    lambda = MK / sum(|y - tau_hat|^2 + v_tau) with tau the sum of z over users.

    Returns:
        float: The estimate, clamped at 1e12 with a `ZeroResidual` warning.
    """
    tau_mean = z_belief.mean.sum(axis=1)
    tau_var = z_belief.variance.sum(axis=1)
    residual = float(np.sum(np.abs(y - tau_mean) ** 2 + tau_var))
    if residual * NOISE_PRECISION_CLAMP <= y.size:
        warnings.warn("zero residual power, noise precision clamped", ZeroResidual)
        return NOISE_PRECISION_CLAMP
    return y.size / residual


def _clip_variance(msg):
    return GaussMsg(msg.mean, np.minimum(msg.variance, VARIANCE_CLAMP))


def update_channel(state, h_extr_out, l_taps, index=Ellipsis):
    """Run the tap prior on new constraint messages and refresh the channel belief.

    `index` selects the part of the (M, N, K) state that `h_extr_out` covers.
    """
    h_extr_in = channel_prior_update(h_extr_out, l_taps)
    h_belief = _clip_variance(belief_h(h_extr_in, h_extr_out))
    state.h_extr_out = state.h_extr_out.replace(index, h_extr_out)
    state.h_extr_in = state.h_extr_in.replace(index, h_extr_in)
    state.h_belief = state.h_belief.replace(index, h_belief)


def decode_user(state, n, evidence, config):
    """Demap and decode user n, then refresh its symbol belief on data subcarriers.

    Returns:
        numpy.ndarray: Hard information bits of user n.
    """
    code_llrs, prior, bits = turbo_pass(
        evidence,
        state.code_llrs[n],
        config.code,
        config.constellation,
        config.user_seed(n),
        max_log=config.max_log,
    )
    state.code_llrs[n] = code_llrs
    weights = state.x_prior.weights.copy()
    weights[n] = prior.weights
    state.x_prior = DiscreteMsg(weights)
    _, mean, var = belief_x(evidence, prior, config.constellation)
    state.x_mean[n, state.data] = mean
    state.x_var[n, state.data] = var
    return bits


def initial_state(obs, pilots, config):
    """Pilot-bootstrapped start.

    x beliefs are point masses on pilots, exact zeros on other users' pilots and
    uniform moments (0, 1) on data. The first channel belief comes from the tap
    prior fed by pilot subcarriers only.
    """
    y = np.asarray(obs.y)
    m_ant, k = y.shape
    n_users = pilots.n_users
    roles = pilots.roles
    data = pilots.data_indices

    x_mean = np.zeros((n_users, k), dtype=complex)
    x_mean[roles == PILOT] = PILOT_SYMBOL
    x_var = np.zeros((n_users, k))
    x_var[roles == DATA] = 1.0

    silent = np.broadcast_to(roles == SILENT, (m_ant, n_users, k))
    vec_z = GaussMsg(np.zeros((m_ant, n_users, k)), np.where(silent, 0.0, np.inf))

    energy = float(np.sum(np.abs(y) ** 2))
    noise_precision = min(0.5 * y.size / energy, NOISE_PRECISION_CLAMP) if energy > 0 else NOISE_PRECISION_CLAMP

    vacuous = GaussMsg.vacuous((m_ant, n_users, k))
    state = ReceiverState(
        y=y,
        roles=roles,
        data=data,
        cev_z=interference_msg(vec_z, y, noise_precision),
        vec_z=vec_z,
        x_mean=x_mean,
        x_var=x_var,
        x_prior=DiscreteMsg.uniform(config.constellation.size, (n_users, len(data))),
        code_llrs=[None] * n_users,
        h_extr_in=vacuous,
        h_extr_out=vacuous,
        h_belief=vacuous,
        noise_precision=noise_precision,
    )
    pilot = np.broadcast_to(roles == PILOT, (m_ant, n_users, k))
    h_extr_out = vacuous.replace(
        pilot, msg_fz_to_h(state.cev_z[pilot], np.broadcast_to(x_mean, pilot.shape)[pilot], 0.0)
    )
    update_channel(state, h_extr_out, config.l_taps)
    return state


def channel_nmse_db(h_hat, h_true):
    return float(10 * np.log10(np.sum(np.abs(h_hat - h_true) ** 2) / np.sum(np.abs(h_true) ** 2)))


def bit_error_rate(bits, truth):
    if truth is None or bits is None:
        return float("nan")
    return float(np.mean(np.asarray(bits) != np.asarray(truth.info_bits)))


def record_iteration(state, iteration, truth, message_ms, decode_ms):
    nmse = float("nan") if truth is None else channel_nmse_db(state.h_belief.mean, truth.channel.freq)
    record = IterationRecord(
        iteration=iteration,
        nmse_db=nmse,
        lambda_hat=state.noise_precision,
        ber=bit_error_rate(state.bits, truth),
        message_ms=message_ms,
        decode_ms=decode_ms,
    )
    logger.debug(
        "iteration=%d nmse_db=%.3f lambda_hat=%.5g ber=%.3g",
        record.iteration,
        record.nmse_db,
        record.lambda_hat,
        record.ber,
    )
    return record


def pin_channel(state, channel):
    """Replace the channel belief by the true response with zero variance."""
    state.h_belief = GaussMsg.point(channel.freq)


def _damp(new, old, factor):
    if factor is None or factor >= 1:
        return new
    usable = np.isfinite(old.variance) & np.isfinite(new.variance)
    mean = np.where(usable, factor * new.mean + (1 - factor) * old.mean, new.mean)
    variance = np.where(usable, factor * new.variance + (1 - factor) * old.variance, new.variance)
    return GaussMsg(mean, variance)


def run_receiver(obs, pilots, config, truth=None, known_channel=None, on_iteration=None):
    """Decode one frame with the hybrid BP/MF receiver.

    Per iteration: (1) sum-node messages, (2) messages to x and their
    combination over antennas, (3) demap, decode and symbol beliefs,
    (4) messages to h, tap prior and channel beliefs, (5) z beliefs and
    extrinsics, (6) noise precision.

    Args:
        obs (Observation): Received frame.
        pilots (PilotPattern): Pilot layout.
        config (ReceiverConfig): Receiver parameters.
        truth (FrameTruth, optional): Enables NMSE and BER diagnostics.
        known_channel (ChannelRealization, optional): Genie channel; step (4) is skipped.
        on_iteration (callable, optional): Called as on_iteration(state, record)
            at the end of every iteration.

    Returns:
        ReceiverResult: Hard bits (N, n_info), channel means, lambda and diagnostics.
            A frame without data subcarriers yields bits of shape (N, 0).
    """
    state = initial_state(obs, pilots, config)
    if known_channel is not None:
        pin_channel(state, known_channel)

    n_users = pilots.n_users
    data = state.data
    active = state.roles != SILENT
    m_ant = state.y.shape[0]
    active_links = np.broadcast_to(active, (m_ant,) + active.shape)
    diagnostics = []

    for iteration in range(1, config.iterations + 1):
        start = time.perf_counter()

        state.cev_z = _clip_variance(interference_msg(state.vec_z, state.y, state.noise_precision))

        decode_ms = 0.0
        if len(data):
            to_x = msg_fz_to_x(state.cev_z[:, :, data], state.h_belief[:, :, data])
            evidence = combine_x(to_x, axis=0)

            decode_start = time.perf_counter()
            bits = [decode_user(state, n, evidence[n], config) for n in range(n_users)]
            state.bits = np.stack(bits)
            decode_ms = 1e3 * (time.perf_counter() - decode_start)
        else:
            # pilot-only frame
            state.bits = np.zeros((n_users, 0), dtype=int)

        if known_channel is None:
            x_mean = np.broadcast_to(state.x_mean, active_links.shape)
            x_var = np.broadcast_to(state.x_var, active_links.shape)
            to_h = msg_fz_to_h(state.cev_z[active_links], x_mean[active_links], x_var[active_links])
            h_extr_out = GaussMsg.vacuous(active_links.shape).replace(active_links, to_h)
            update_channel(state, h_extr_out, config.l_taps)

        z_belief = belief_z(state.x_mean[None], state.x_var[None], state.h_belief.mean, state.h_belief.variance)
        vec_z = msg_z_extrinsic(z_belief, state.cev_z)
        state.vec_z = _damp(vec_z, state.vec_z, config.damping)

        state.noise_precision = noise_precision_update(state.y, z_belief)

        message_ms = 1e3 * (time.perf_counter() - start) - decode_ms
        record = record_iteration(state, iteration, truth, message_ms, decode_ms)
        diagnostics.append(record)
        if on_iteration is not None:
            on_iteration(state, record)

    return ReceiverResult(state.bits, state.h_belief.mean, state.noise_precision, diagnostics)
