import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import write_csv
from firetke.errors import AlignmentError, ParseError
from firetke.ingest import (
    ALIGNED_HEADER,
    FEATURE_NAMES,
    SONIC_HEADER,
    THERMO_HEADER,
    BurnPhase,
    Frames,
    SonicSeries,
    ThermoSeries,
    align,
    parse_sonic_csv,
    parse_thermo_csv,
    read_aligned_csv,
    segment_phases,
    to_relative,
    write_aligned_csv,
    write_sonic_csv,
    write_thermo_csv,
)


def _sonic(t):
    t = np.asarray(t, dtype=float)
    return SonicSeries(t, t + 1, t + 2, t + 3, t + 20)


def _thermo(t):
    t = np.asarray(t, dtype=float)
    return ThermoSeries(t, np.column_stack([t + k for k in range(7)]))


def test_headers():
    assert SONIC_HEADER == ("t", "u", "v", "w", "sonic_T")
    assert THERMO_HEADER == ("t", "T1", "T2", "T3", "T4", "T5", "T6", "T7")
    assert FEATURE_NAMES == ("T1", "T2", "T3", "T4", "T5", "T6", "T7", "sonic_T")
    assert ALIGNED_HEADER == ("t",) + FEATURE_NAMES + ("u", "v", "w", "phase")


def test_parse_sonic_two_rows(tmp_path):
    p = write_csv(tmp_path / "s.csv", SONIC_HEADER,
                  [("0.0", "1.0", "2.0", "0.5", "20.0"), ("0.1", "1.1", "2.1", "0.4", "20.2")])
    s = parse_sonic_csv(p)
    assert len(s) == 2 and s.rejected == 0
    assert list(s.t) == [0.0, 0.1]
    assert list(s.u) == [1.0, 1.1]
    assert list(s.v) == [2.0, 2.1]
    assert list(s.w) == [0.5, 0.4]
    assert list(s.sonic_T) == [20.0, 20.2]


def test_parse_header_only(tmp_path):
    s = parse_sonic_csv(write_csv(tmp_path / "s.csv", SONIC_HEADER, []))
    assert len(s) == 0 and s.rejected == 0


def test_parse_rejects_text_rows(tmp_path):
    rows = [(f"{i / 10}", "1.0", "2.0", "0.5", "20.0") for i in range(10)]
    rows[3] = ("0.3", "abc", "2.0", "0.5", "20.0")
    rows[7] = ("0.7", "n/a", "2.0", "0.5", "20.0")
    s = parse_sonic_csv(write_csv(tmp_path / "s.csv", SONIC_HEADER, rows))
    assert len(s) == 8
    assert s.rejected == 2
    assert s.rejected_lines == (5, 9)  # header is line 1


def test_parse_rejects_nonfinite_and_negative_time(tmp_path):
    rows = [("0.0", "1", "2", "3", "20"), ("0.1", "nan", "2", "3", "20"),
            ("-0.1", "1", "2", "3", "20"), ("0.2", "inf", "2", "3", "20"),
            ("0.3", "1", "2", "3", "20"), ("0.4", "1", "2", "3", "20")]
    s = parse_sonic_csv(write_csv(tmp_path / "s.csv", SONIC_HEADER, rows))
    assert len(s) == 3 and s.rejected == 3


def test_parse_too_many_rejected(tmp_path):
    rows = [("0.0", "x", "2", "3", "20")] * 3 + [("0.1", "1", "2", "3", "20")] * 2
    with pytest.raises(ParseError, match="rejected"):
        parse_sonic_csv(write_csv(tmp_path / "s.csv", SONIC_HEADER, rows))


def test_parse_exactly_half_rejected_is_allowed(tmp_path):
    rows = [("0.0", "x", "2", "3", "20")] * 2 + [("0.1", "1", "2", "3", "20")] * 2
    s = parse_sonic_csv(write_csv(tmp_path / "s.csv", SONIC_HEADER, rows))
    assert len(s) == 2 and s.rejected == 2


def test_parse_bad_header(tmp_path):
    p = write_csv(tmp_path / "s.csv", ("t", "u", "v", "w"), [("0", "1", "2", "3")])
    with pytest.raises(ParseError, match=":1:"):
        parse_sonic_csv(p)


def test_parse_missing_file(tmp_path):
    with pytest.raises(FileNotFoundError):
        parse_sonic_csv(tmp_path / "nope.csv")


def test_parse_thermo(tmp_path):
    p = write_csv(tmp_path / "t.csv", THERMO_HEADER, [("0.0", 21, 22, 23, 24, 25, 26, 27)])
    th = parse_thermo_csv(p)
    assert len(th) == 1
    assert th.temps[0].tolist() == [21, 22, 23, 24, 25, 26, 27]


def test_parse_thermo_arity(tmp_path):
    rows = [("0.0", 21, 22, 23, 24, 25, 26, 27), ("0.1", 21, 22, 23, 24, 25, 26),
            ("0.2", 21, 22, 23, 24, 25, 26, 27)]
    th = parse_thermo_csv(write_csv(tmp_path / "t.csv", THERMO_HEADER, rows))
    assert len(th) == 2 and th.rejected == 1


def test_parse_thermo_hundred_rows(tmp_path):
    rows = [(f"{i / 10}",) + tuple(20 + k for k in range(7)) for i in range(100)]
    th = parse_thermo_csv(write_csv(tmp_path / "t.csv", THERMO_HEADER, rows))
    assert len(th) == 100 and th.rejected == 0


finite = st.floats(allow_nan=False, allow_infinity=False, width=64)


@given(st.lists(st.tuples(st.floats(0, 1e9, allow_nan=False), finite, finite, finite, finite),
                min_size=1, max_size=20))
def test_sonic_round_trip_bit_exact(tmp_path_factory, rows):
    arr = np.array(rows, dtype=float)
    s = SonicSeries(*(arr[:, j] for j in range(5)))
    path = tmp_path_factory.mktemp("rt") / "s.csv"
    write_sonic_csv(path, s)
    back = parse_sonic_csv(path)
    for name in SONIC_HEADER:
        a, b = getattr(s, name), getattr(back, name)
        assert a.tobytes() == b.tobytes() or np.array_equal(a, b)


@given(st.lists(st.tuples(st.floats(0, 1e9, allow_nan=False), *([finite] * 7)),
                min_size=1, max_size=20))
def test_thermo_round_trip_bit_exact(tmp_path_factory, rows):
    arr = np.array(rows, dtype=float)
    th = ThermoSeries(arr[:, 0], arr[:, 1:])
    path = tmp_path_factory.mktemp("rt") / "t.csv"
    write_thermo_csv(path, th)
    back = parse_thermo_csv(path)
    assert np.array_equal(back.t, th.t) and np.array_equal(back.temps, th.temps)


def test_align_identical_grids():
    t = np.arange(50) / 10
    f = align(_sonic(t), _thermo(t[:40]))
    assert len(f) == 40
    assert f.dropped_thermo == 0
    assert f.dropped_sonic == 10


def test_align_identical_grids_zero_drops():
    t = np.arange(50) / 10
    f = align(_sonic(t), _thermo(t))
    assert len(f) == 50 and f.dropped_sonic == 0 and f.dropped_thermo == 0
    assert np.array_equal(f.features[:, :7], _thermo(t).temps)
    assert np.array_equal(f.features[:, 7], t + 20)
    assert np.array_equal(f.wind, np.column_stack([t + 1, t + 2, t + 3]))


def test_align_shift_within_tolerance():
    t = np.arange(100) / 10
    f = align(_sonic(t), _thermo(t + 0.04), tolerance=0.05)
    assert len(f) == 100


def test_align_shift_beyond_tolerance():
    t = np.arange(20, dtype=float)  # 1 Hz ticks, so a 0.2 s shift meets no other tick
    f = align(_sonic(t), _thermo(t + 0.2), tolerance=0.05)
    assert len(f) == 0 and f.dropped_sonic == 20 and f.dropped_thermo == 20


def test_align_shift_onto_other_ticks():
    # on a 10 Hz grid a 0.2 s shift lands on the tick two samples later
    t = np.arange(100) / 10
    assert len(align(_sonic(t), _thermo(t + 0.2), tolerance=0.05)) == 98


def test_align_far_shift_gives_empty_output():
    t = np.arange(100) / 10
    f = align(_sonic(t), _thermo(t + 100.2), tolerance=0.05)
    assert len(f) == 0


def test_align_unsorted_raises():
    t = np.array([0.0, 0.2, 0.1])
    with pytest.raises(AlignmentError):
        align(_sonic(t), _thermo(np.sort(t)))


def test_align_duplicates_removed():
    s = _sonic([0.0, 0.1, 0.1, 0.2])
    f = align(s, _thermo([0.0, 0.1, 0.2]))
    assert f.t.tolist() == [0.0, 0.1, 0.2]
    assert np.all(np.diff(f.t) > 0)


def test_align_empty_input():
    f = align(_sonic([]), _thermo([0.0]))
    assert len(f) == 0


def test_align_idempotent():
    rng = np.random.default_rng(1)
    ts = np.sort(rng.choice(200, 120, replace=False)) / 10
    tt = np.sort(rng.choice(200, 150, replace=False)) / 10 + 0.03
    f = align(_sonic(ts), _thermo(tt))
    g = align(f.sonic, f.thermo)
    # re-aligning frames onto their own thermo stream reproduces them
    g2 = align(f.sonic, ThermoSeries(f.t, f.features[:, :7]))
    assert np.array_equal(g2.t, f.t) and np.array_equal(g2.features, f.features)
    assert np.array_equal(g2.wind, f.wind)
    assert len(g) == len(f)


def test_segment_all_pre():
    f = segment_phases(align(_sonic([0, 1, 2]), _thermo([0, 1, 2])), 10, 20)
    assert set(f.phase.tolist()) == {BurnPhase.PRE}


def test_segment_closed_interval_and_example():
    t = [0.0, 1.0, 2.0, 3.0, 4.0]
    f = segment_phases(align(_sonic(t), _thermo(t)), 1.5, 3.5)
    assert [BurnPhase(p) for p in f.phase] == [BurnPhase.PRE, BurnPhase.PRE, BurnPhase.BURN,
                                               BurnPhase.BURN, BurnPhase.POST]
    g = segment_phases(align(_sonic(t), _thermo(t)), 1.0, 3.0)
    assert [BurnPhase(p).label for p in g.phase] == ["pre", "burn", "burn", "burn", "post"]


def test_segment_bad_window():
    f = align(_sonic([0.0]), _thermo([0.0]))
    with pytest.raises(ValueError):
        segment_phases(f, 2.0, 2.0)


@given(st.lists(st.floats(0, 100, allow_nan=False), min_size=1, max_size=50),
       st.floats(0, 100), st.floats(0.01, 50))
def test_segment_partitions(ts, start, width):
    t = np.array(sorted(ts))
    frames = Frames(t, np.zeros((len(t), 8)), np.zeros((len(t), 3)))
    f = segment_phases(frames, start, start + width)
    masks = [f.phase == int(p) for p in BurnPhase]
    assert np.all(sum(m.astype(int) for m in masks) == 1)
    assert np.all(t[masks[0]] < start)
    assert np.all((t[masks[1]] >= start) & (t[masks[1]] <= start + width))
    assert np.all(t[masks[2]] > start + width)


def test_aligned_csv_round_trip(tmp_path):
    t = np.arange(5) / 10
    f = segment_phases(align(_sonic(t), _thermo(t)), 0.1, 0.3)
    write_aligned_csv(tmp_path / "a.csv", f)
    g = read_aligned_csv(tmp_path / "a.csv")
    assert np.array_equal(g.t, f.t) and np.array_equal(g.features, f.features)
    assert np.array_equal(g.wind, f.wind) and np.array_equal(g.phase, f.phase)
    assert (tmp_path / "a.csv").read_text().splitlines()[1].endswith(",pre")


def test_to_relative():
    s, th = to_relative(_sonic([1000.0, 1000.1]), _thermo([999.9, 1000.0]))
    assert th.t[0] == 0.0
    assert s.t[0] == pytest.approx(0.1)


def test_phase_labels():
    assert [p.label for p in BurnPhase] == ["pre", "burn", "post"]
    assert BurnPhase.from_label("burn") is BurnPhase.BURN
    with pytest.raises(ValueError):
        BurnPhase.from_label("during")
