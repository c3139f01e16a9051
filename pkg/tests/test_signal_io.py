import numpy as np
import pytest

from glissade import (EmptyInput, EogRecord, MalformedRow, SynthConfig,
                      parse_record, serialize_record, synth_record)
from glissade.errors import NonMonotonicTime
from glissade.signal_io import IngestConfig


def test_parse_three_rows():
    rec = parse_record("0,0.0,0.0\n5,0.1,0.0\n10,0.2,0.0")
    assert len(rec) == 3
    assert rec.sample_period_s == pytest.approx(0.005)
    assert rec.time[1] == pytest.approx(0.005)
    assert rec.horizontal[2] == pytest.approx(0.2)


def test_parse_empty_raises():
    with pytest.raises(EmptyInput):
        parse_record("")
    with pytest.raises(EmptyInput):
        parse_record("\n  \n")


def test_parse_header_modes():
    body = "time_ms,horizontal_deg,stimulus_deg\n0,1.0,0.0\n5,2.0,0.0"
    assert len(parse_record(body)) == 2                    # auto sniffs it
    assert len(parse_record(body, IngestConfig(header="yes"))) == 2
    with pytest.raises(MalformedRow):
        parse_record(body, IngestConfig(header="no"))
    # header="yes" on a headerless body eats the first data row
    assert len(parse_record("0,1.0,0.0\n5,2.0,0.0",
                            IngestConfig(header="yes"))) == 1


def test_parse_malformed_rows_report_index():
    with pytest.raises(MalformedRow) as err:
        parse_record("0,1.0,0.0\n5,abc,0.0")
    assert err.value.row_index == 1
    with pytest.raises(MalformedRow) as err:
        parse_record("0,1.0\n")
    assert err.value.row_index == 0
    with pytest.raises(MalformedRow):
        parse_record("0,1.0,0.0,9\n")


def test_parse_rejects_non_monotonic_time():
    with pytest.raises(NonMonotonicTime):
        parse_record("0,0,0\n5,0,0\n5,0,0")
    with pytest.raises(NonMonotonicTime):
        parse_record("10,0,0\n5,0,0")


def test_parse_never_drops_rows():
    rng = np.random.default_rng(0)
    for _ in range(20):
        n = int(rng.integers(1, 60))
        lines = [f"{5 * i},{rng.normal():.6f},{rng.normal():.6f}"
                 for i in range(n)]
        rec = parse_record("\n".join(lines))
        assert len(rec) == n


def test_serialize_single_sample():
    rec = EogRecord(sample_period_s=0.005, time=[0.0], horizontal=[1.5],
                    stimulus=[10.0])
    text = serialize_record(rec)
    lines = text.strip().splitlines()
    assert len(lines) == 2  # header plus one row
    assert lines[0] == "time_ms,horizontal_deg,stimulus_deg"


def test_serialize_timestamps_in_ms():
    rec = EogRecord(sample_period_s=0.005,
                    time=np.arange(3) * 0.005,
                    horizontal=np.zeros(3), stimulus=np.zeros(3))
    rows = serialize_record(rec).strip().splitlines()[1:]
    assert [float(r.split(",")[0]) for r in rows] == [0.0, 5.0, 10.0]


def test_round_trip_synthetic_record():
    record, _ = synth_record(SynthConfig(n_saccades=5, noise_std_deg=0.08,
                                         seed=21))
    assert len(record) >= 1500
    back = parse_record(serialize_record(record))
    assert np.allclose(back.time, record.time, atol=1e-9)
    assert np.allclose(back.horizontal, record.horizontal, atol=1e-9)
    assert np.allclose(back.stimulus, record.stimulus, atol=1e-9)
    assert back.sample_period_s == pytest.approx(record.sample_period_s,
                                                 abs=1e-12)


def test_single_sample_assumes_nominal_rate():
    assert parse_record("0,1.0,0.0").sample_period_s == pytest.approx(0.005)
