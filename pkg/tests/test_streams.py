import pytest

from dqsops.errors import ParseError
from dqsops.mutation import generate_clean_stream
from dqsops.streams import open_stream, parse_stream_line, read_windows, write_stream


def lines_for(n, start=0, value=lambda i: f"{i * 0.5}"):
    return [f"t{start + i},{value(i)}\n" for i in range(n)]


def test_exact_multiple_plus_partial_tail():
    windows = list(read_windows(lines_for(2500), 1000))
    assert [w.n for w in windows] == [1000, 1000, 500]
    assert [w.partial for w in windows] == [False, False, True]
    assert [w.window_id for w in windows] == [0, 1, 2]


def test_na_becomes_missing():
    windows = list(read_windows(["t1,1.5\n", "t2,NA\n", "t3,2.5\n"], 3))
    assert windows[0].cells() == (1.5, None, 2.5)


def test_malformed_value_raises_with_line_number():
    with pytest.raises(ParseError, match="line 3"):
        list(read_windows(["t1,1.0\n", "t2,2.0\n", "t3,abc\n"], 10))


def test_missing_comma_rejected():
    with pytest.raises(ParseError, match="timestamp,value"):
        list(read_windows(["1.0\n"], 2))


def test_header_auto_detected():
    windows = list(read_windows(["timestamp,value\n", "t1,1.0\n", "t2,2.0\n"], 2))
    assert len(windows) == 1
    assert windows[0].cells() == (1.0, 2.0)


def test_na_on_first_line_is_data_not_header():
    windows = list(read_windows(["t0,NA\n", "t1,1.0\n"], 2))
    assert windows[0].cells() == (None, 1.0)


def test_blank_lines_skipped():
    windows = list(read_windows(["t1,1.0\n", "\n", "t2,2.0\n"], 2))
    assert windows[0].cells() == (1.0, 2.0)


def test_timestamps_carried_through():
    windows = list(read_windows(["a,1.0\n", "b,2.0\n"], 2))
    assert windows[0].timestamps == ("a", "b")


def test_parse_stream_line_variants():
    assert parse_stream_line("2023-01-01T00:00:00,3.5", 1) == ("2023-01-01T00:00:00", 3.5)
    assert parse_stream_line("1234,NA", 1) == ("1234", None)
    with pytest.raises(ParseError):
        parse_stream_line("1234,", 1)


def test_concatenation_equals_whole(tmp_path):
    first = lines_for(400)
    second = lines_for(600, start=400)
    whole = list(read_windows(first + second, 200))
    parts = list(read_windows(first, 200))
    parts += list(read_windows(second, 200, start_id=len(parts)))
    assert whole == parts


def test_write_read_round_trip(tmp_path):
    windows = list(generate_clean_stream(3, 50, seed=9))
    path = tmp_path / "stream.csv"
    write_stream(windows, path)
    loaded = list(open_stream(path, 50))
    for original, back in zip(windows, loaded):
        assert back.cells() == original.cells()


def test_round_trip_preserves_missing(tmp_path):
    from dqsops.model import DataWindow

    w = DataWindow.from_cells(0, (1.5, None, -2.25))
    path = tmp_path / "s.csv"
    write_stream([w], path)
    assert path.read_text() == "0,1.5\n1,NA\n2,-2.25\n"
    loaded = list(open_stream(path, 3))
    assert loaded[0].cells() == w.cells()


def test_window_size_must_be_positive():
    with pytest.raises(ValueError):
        list(read_windows([], 0))
