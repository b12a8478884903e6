# coding: utf-8
"""Monte-Carlo orchestration
Every (Eb/N0 index, frame index) task draws its own frame from a seed mixed
out of the master seed, runs each configured receiver on it and emits one
`TrialRecord` per receiver. Records are appended to `results.jsonl`, one JSON
object per line in `RECORD_FIELDS` order, and summarized to CSV.
"""
import functools
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, fields

import numpy as np
import pandas as pd

from .baselines import direct_mf_receiver, mfb_receiver
from .errors import MalformedResults
from .phy import FrameTruth, ebn0_to_precision, gen_channel, insert_pilots, transmit
from .receiver import channel_nmse_db, run_receiver
from .txchain import modulate

logger = logging.getLogger(__name__)

MASK64 = (1 << 64) - 1

RESULTS_NAME = "results.jsonl"
SUMMARY_NAME = "summary.csv"

SUMMARY_COLUMNS = ["receiver", "ebn0_db", "ber", "fer", "nmse_db", "lambda_rel_err", "frames", "bits"]

# JSON types accepted per field annotation; ints stand in for floats
JSON_TYPES = {str: str, int: int, float: (int, float), bool: bool}


@dataclass(frozen=True)
class Frame:
    observation: object
    truth: FrameTruth
    seed: int


@dataclass(frozen=True)
class TrialRecord:
    """Outcome of one receiver on one frame."""

    receiver: str
    ebn0_db: float
    snr_index: int
    frame_index: int
    seed: int
    bit_errors: int
    info_bits: int
    frame_error: bool
    nmse_db: float
    lambda_hat: float
    lambda_true: float
    wall_ms: float

    def to_json(self):
        return json.dumps(asdict(self))

    @classmethod
    def from_json(cls, line):
        try:
            values = json.loads(line)
            record = cls(**values)
        except (ValueError, TypeError) as exc:
            raise MalformedResults(f"not a trial record: {line.strip()[:80]!r}") from exc
        for f in fields(cls):
            value = getattr(record, f.name)
            if isinstance(value, bool) != (f.type is bool) or not isinstance(value, JSON_TYPES[f.type]):
                raise MalformedResults(f"field {f.name!r} has type {type(value).__name__} in {line.strip()[:80]!r}")
        if not 0 <= record.bit_errors <= record.info_bits:
            raise MalformedResults(f"bit_errors out of range in {line.strip()[:80]!r}")
        return record


RECORD_FIELDS = [f.name for f in fields(TrialRecord)]


def _splitmix64(value):
    value = (value + 0x9E3779B97F4A7C15) & MASK64
    value = ((value ^ (value >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    value = ((value ^ (value >> 27)) * 0x94D049BB133111EB) & MASK64
    return value ^ (value >> 31)


def frame_seed(master_seed, snr_index, frame_index):
    """64-bit seed of one frame.

    splitmix64 is applied to the master seed, the result is xor-ed with the SNR
    index and mixed again, then the same is done with the frame index.

    Examples:
    >>> frame_seed(0, 0, 0) == frame_seed(0, 0, 0)
    True
    >>> frame_seed(0, 0, 1) == frame_seed(0, 1, 0)
    False
    """
    value = _splitmix64(master_seed & MASK64)
    value = _splitmix64(value ^ snr_index)
    return _splitmix64(value ^ frame_index)


def make_frame(cfg, ebn0_db, seed):
    """Draw the information bits, channel and noise of one frame.

    Args:
        cfg (SimConfig): Experiment configuration.
        ebn0_db (float): Eb/N0 in dB; +inf gives a noiseless frame.
        seed (int): Frame seed, usually `frame_seed(...)`.

    Returns:
        Frame: Observation and the truth it was drawn from.
    """
    rng = np.random.default_rng(seed)
    pilots = cfg.pilots
    info_bits = rng.integers(0, 2, size=(cfg.n_users, cfg.n_info))
    symbols = np.stack(
        [
            modulate(info_bits[n], cfg.code, cfg.constellation, cfg.interleaver_seed + n)
            for n in range(cfg.n_users)
        ]
    )
    x = insert_pilots(symbols, pilots)
    channel = gen_channel(rng, cfg.m_antennas, cfg.n_users, cfg.k_subcarriers, cfg.l_taps)
    noise_precision = ebn0_to_precision(ebn0_db, cfg.rate, cfg.constellation.bits_per_symbol)
    observation = transmit(x, channel, noise_precision, rng, pilots=pilots)
    truth = FrameTruth(info_bits, x, channel, float(noise_precision))
    return Frame(observation, truth, seed)


def run_named_receiver(name, frame, cfg):
    """Run one receiver by its configuration name and return its `ReceiverResult`."""
    config = cfg.receiver_config()
    pilots = cfg.pilots
    truth = frame.truth
    if name == "proposed":
        return run_receiver(frame.observation, pilots, config, truth=truth)
    if name == "direct_mf":
        return direct_mf_receiver(frame.observation, pilots, config, truth=truth)
    if name == "mfb":
        return mfb_receiver(frame.observation, truth.channel, truth.noise_precision, truth.x, pilots, config)
    raise ValueError(f"unknown receiver {name!r}")


def run_trial(cfg, snr_index, frame_index):
    """Run every configured receiver on one frame.

    Returns:
        list: One `TrialRecord` per receiver, in `cfg.receivers` order.
    """
    ebn0_db = cfg.ebn0_grid[snr_index]
    seed = frame_seed(cfg.master_seed, snr_index, frame_index)
    frame = make_frame(cfg, ebn0_db, seed)
    truth = frame.truth

    records = []
    for name in cfg.receivers:
        start = time.perf_counter()
        result = run_named_receiver(name, frame, cfg)
        wall_ms = 1e3 * (time.perf_counter() - start)
        errors = int(np.count_nonzero(result.bits != truth.info_bits))
        nmse = float("nan") if name == "mfb" else channel_nmse_db(result.h_hat, truth.channel.freq)
        records.append(
            TrialRecord(
                receiver=name,
                ebn0_db=float(ebn0_db),
                snr_index=snr_index,
                frame_index=frame_index,
                seed=seed,
                bit_errors=errors,
                info_bits=int(truth.info_bits.size),
                frame_error=errors > 0,
                nmse_db=nmse,
                lambda_hat=float(result.noise_precision),
                lambda_true=truth.noise_precision,
                wall_ms=wall_ms,
            )
        )
        logger.debug(
            "receiver=%s ebn0_db=%g frame=%d bit_errors=%d nmse_db=%.3f",
            name,
            ebn0_db,
            frame_index,
            errors,
            nmse,
        )
    return records


def _run_task(cfg, task):
    return run_trial(cfg, *task)


def run_sweep(cfg, workers=1, out_dir="."):
    """Run the whole experiment and write its records and summary.

    Args:
        cfg (SimConfig): Validated configuration.
        workers (int, optional): Worker processes; 1 runs in-process. Defaults to 1.
        out_dir (str, optional): Directory for `results.jsonl` and `summary.csv`.

    Returns:
        pandas.DataFrame: The summary table also written to `summary.csv`.
    """
    os.makedirs(out_dir, exist_ok=True)
    results_path = os.path.join(out_dir, RESULTS_NAME)
    tasks = [(i, f) for i in range(len(cfg.ebn0_grid)) for f in range(cfg.frames_per_point)]
    logger.info("sweep points=%d frames=%d workers=%d", len(cfg.ebn0_grid), len(tasks), workers)

    run = functools.partial(_run_task, cfg)
    with open(results_path, "w") as out:
        if workers > 1:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                _write_records(out, pool.map(run, tasks, chunksize=max(1, len(tasks) // (8 * workers))))
        else:
            _write_records(out, map(run, tasks))

    summary = summarize(results_path)
    write_summary(summary, os.path.join(out_dir, SUMMARY_NAME))
    return summary


def _write_records(out, batches):
    for records in batches:
        for record in records:
            out.write(record.to_json() + "\n")
        out.flush()


def read_records(path):
    """Parse a results file.

    Raises:
        MalformedResults: on any non-blank line that is not a trial record.
    """
    records = []
    with open(path, "r") as f:
        for line in f:
            if line.strip():
                records.append(TrialRecord.from_json(line))
    return records


def _round_sig(value, digits=6):
    if not math.isfinite(value) or value == 0:
        return value
    return round(value, digits - 1 - int(math.floor(math.log10(abs(value)))))


def summarize(path):
    """Aggregate a results file per (receiver, Eb/N0).

    BER is total bit errors over total information bits, FER the fraction of
    frames with any error, NMSE the linear-domain mean reported in dB, and
    lambda_rel_err the mean of |lambda_hat - lambda| / lambda. Rows are sorted
    by receiver then Eb/N0 and every float is rounded to 6 significant digits.

    Args:
        path (str): Results file written by `run_sweep`.

    Returns:
        pandas.DataFrame: Columns `SUMMARY_COLUMNS`; no rows for an empty file.
    """
    records = read_records(path)
    if not records:
        return pd.DataFrame(columns=SUMMARY_COLUMNS)

    df = pd.DataFrame([asdict(r) for r in records], columns=RECORD_FIELDS)
    df = df.sort_values(["receiver", "ebn0_db", "snr_index", "frame_index"], kind="mergesort")
    df["nmse_lin"] = 10 ** (df["nmse_db"] / 10)
    with np.errstate(invalid="ignore", divide="ignore"):
        df["lambda_rel_err"] = (df["lambda_hat"] - df["lambda_true"]).abs() / df["lambda_true"]
    df["frame_error"] = df["frame_error"].astype(float)

    summary = (
        df.groupby(["receiver", "ebn0_db"], sort=True)
        .agg(
            errors=("bit_errors", "sum"),
            bits=("info_bits", "sum"),
            fer=("frame_error", "mean"),
            nmse_lin=("nmse_lin", "mean"),
            lambda_rel_err=("lambda_rel_err", "mean"),
            frames=("frame_index", "count"),
        )
        .reset_index()
    )
    summary["ber"] = summary["errors"] / summary["bits"]
    with np.errstate(divide="ignore", invalid="ignore"):
        summary["nmse_db"] = 10 * np.log10(summary["nmse_lin"])
    for column in ("ber", "fer", "nmse_db", "lambda_rel_err"):
        summary[column] = summary[column].map(lambda v: _round_sig(float(v)))
    summary["frames"] = summary["frames"].astype(int)
    summary["bits"] = summary["bits"].astype(int)
    return summary[SUMMARY_COLUMNS]


def write_summary(summary, path):
    summary.to_csv(path, index=False)
    logger.info("summary written path=%s rows=%d", path, len(summary))
