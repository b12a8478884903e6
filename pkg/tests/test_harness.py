import json
import math

import numpy as np
import pandas as pd
import pytest

from pybpmf import (
    RECORD_FIELDS,
    SUMMARY_COLUMNS,
    MalformedResults,
    SimConfig,
    TrialRecord,
    frame_seed,
    make_frame,
    run_sweep,
    run_trial,
    summarize,
)
from .case.harness import MALFORMED_LINES, SUMMARY_RECORDS, SUMMARY_ROWS


def tiny_config(**overrides):
    values = dict(
        m_antennas=2,
        n_users=2,
        k_subcarriers=64,
        kp_pilots=8,
        l_taps=4,
        iterations=3,
        ebn0_grid=(4.0, 10.0),
        frames_per_point=2,
        master_seed=99,
    )
    values.update(overrides)
    return SimConfig(**values)


def write_records(path, records):
    with open(path, "w") as f:
        for record in records:
            f.write(json.dumps(record) + "\n")


def test_frame_seed():
    assert frame_seed(1, 2, 3) == frame_seed(1, 2, 3)
    seeds = {frame_seed(7, i, f) for i in range(10) for f in range(100)}
    assert len(seeds) == 1000
    assert all(0 <= s < 2**64 for s in seeds)
    assert frame_seed(0, 0, 0) != frame_seed(1, 0, 0)


def test_make_frame_is_reproducible():
    cfg = tiny_config()
    first = make_frame(cfg, 6.0, seed=123)
    second = make_frame(cfg, 6.0, seed=123)
    assert np.array_equal(first.observation.y, second.observation.y)
    assert np.array_equal(first.truth.info_bits, second.truth.info_bits)
    assert first.truth.info_bits.shape == (2, cfg.n_info)


def test_run_trial_records():
    cfg = tiny_config()
    records = run_trial(cfg, 1, 0)
    assert [r.receiver for r in records] == list(cfg.receivers)
    for record in records:
        assert record.seed == frame_seed(cfg.master_seed, 1, 0)
        assert record.ebn0_db == 10.0
        assert 0 <= record.bit_errors <= record.info_bits == 2 * cfg.n_info
        assert record.frame_error == (record.bit_errors > 0)
        assert record.wall_ms >= 0
    assert math.isnan(records[1].nmse_db)
    assert records[1].lambda_hat == records[1].lambda_true


def test_record_json_field_order():
    record = TrialRecord(**SUMMARY_RECORDS[0])
    assert list(json.loads(record.to_json())) == RECORD_FIELDS
    assert TrialRecord.from_json(record.to_json()) == record


def test_summarize_by_hand(tmp_path):
    path = tmp_path / "results.jsonl"
    write_records(path, SUMMARY_RECORDS)
    summary = summarize(str(path))
    assert list(summary.columns) == SUMMARY_COLUMNS
    assert len(summary) == len(SUMMARY_ROWS)
    for (_, row), expected in zip(summary.iterrows(), SUMMARY_ROWS):
        for column, value in expected.items():
            if isinstance(value, float) and math.isnan(value):
                assert math.isnan(row[column])
            elif isinstance(value, float):
                assert row[column] == pytest.approx(value, rel=1e-9, abs=1e-12)
            else:
                assert row[column] == value


def test_summarize_is_order_insensitive(tmp_path):
    forward = tmp_path / "forward.jsonl"
    backward = tmp_path / "backward.jsonl"
    write_records(forward, SUMMARY_RECORDS)
    write_records(backward, SUMMARY_RECORDS[::-1])
    pd.testing.assert_frame_equal(summarize(str(forward)), summarize(str(backward)))


def test_empty_results_give_header_only(tmp_path):
    path = tmp_path / "results.jsonl"
    path.write_text("")
    out = tmp_path / "summary.csv"
    summarize(str(path)).to_csv(out, index=False)
    assert out.read_text().strip() == ",".join(SUMMARY_COLUMNS)


def test_malformed_results(tmp_path):
    for number, line in enumerate(MALFORMED_LINES):
        path = tmp_path / f"bad{number}.jsonl"
        path.write_text(line)
        with pytest.raises(MalformedResults):
            summarize(str(path))


def test_noiseless_mfb_sweep(tmp_path):
    cfg = tiny_config(ebn0_grid=(math.inf,), frames_per_point=1, receivers=("mfb",))
    summary = run_sweep(cfg, workers=1, out_dir=str(tmp_path))
    assert list(summary["ber"]) == [0.0]
    assert (tmp_path / "results.jsonl").exists()
    assert (tmp_path / "summary.csv").read_text().startswith(",".join(SUMMARY_COLUMNS))


def test_sweep_is_worker_count_independent(tmp_path):
    cfg = tiny_config()
    run_sweep(cfg, workers=1, out_dir=str(tmp_path / "one"))
    run_sweep(cfg, workers=2, out_dir=str(tmp_path / "two"))
    assert (tmp_path / "one" / "summary.csv").read_text() == (tmp_path / "two" / "summary.csv").read_text()


@pytest.mark.slow
def test_sweep_with_eight_workers(tmp_path):
    cfg = tiny_config(frames_per_point=8, ebn0_grid=(0.0, 4.0, 8.0))
    run_sweep(cfg, workers=1, out_dir=str(tmp_path / "one"))
    run_sweep(cfg, workers=8, out_dir=str(tmp_path / "eight"))
    assert (tmp_path / "one" / "summary.csv").read_text() == (tmp_path / "eight" / "summary.csv").read_text()


def interpolate_ebn0(rows, target):
    """Eb/N0 where BER first drops to `target`, log-linear between grid points."""
    ebn0 = rows["ebn0_db"].to_numpy()
    log_ber = np.log10(np.maximum(rows["ber"].to_numpy(), 1e-7))
    below = np.flatnonzero(log_ber <= np.log10(target))
    if not len(below):
        return math.inf
    i = below[0]
    if i == 0:
        raise AssertionError(f"BER is already below {target} at {ebn0[0]} dB; extend the grid downwards")
    return float(np.interp(np.log10(target), [log_ber[i], log_ber[i - 1]], [ebn0[i], ebn0[i - 1]]))


def test_interpolate_ebn0_needs_the_waterfall():
    rows = pd.DataFrame({"ebn0_db": [0.0, 2.0, 4.0], "ber": [1e-1, 1e-2, 1e-4]})
    assert interpolate_ebn0(rows, 1e-3) == pytest.approx(3.0)
    assert interpolate_ebn0(rows, 1e-5) == math.inf
    with pytest.raises(AssertionError):
        interpolate_ebn0(rows, 0.5)


@pytest.mark.slow
def test_default_sweep_ordering(tmp_path):
    grid = (-4.0, -3.0, -2.0, -1.0) + SimConfig().ebn0_grid
    summary = run_sweep(SimConfig(ebn0_grid=grid), workers=8, out_dir=str(tmp_path))
    ber = summary.pivot(index="ebn0_db", columns="receiver", values="ber")
    assert (summary["bits"] >= 10**5).all()
    assert (ber["mfb"] <= ber["proposed"]).all()
    usable = ber["direct_mf"] <= 1e-2
    assert (ber["proposed"][usable] <= ber["direct_mf"][usable]).all()
    for name in ("mfb", "proposed", "direct_mf"):
        assert np.count_nonzero(np.diff(ber[name].to_numpy()) > 0) <= 1

    rows = summary.set_index("receiver")
    proposed = interpolate_ebn0(rows.loc["proposed"], 1e-3)
    direct = interpolate_ebn0(rows.loc["direct_mf"], 1e-3)
    assert proposed <= direct
