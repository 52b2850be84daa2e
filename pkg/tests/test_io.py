import numpy as np
import pytest

from crowdflow.config import parse_config
from crowdflow.errors import CountMismatch, HeaderError, ParseError
from crowdflow.pgm import format_pgm, parse_pgm, read_pgm, write_pgm


class TestPgm:
    def test_round_trip(self, tmp_path):
        labels = np.array([[0, 1, 2], [3, 0, 1]])
        write_pgm(tmp_path / "m.pgm", labels)
        assert np.array_equal(read_pgm(tmp_path / "m.pgm"), labels)

    def test_header(self):
        text = format_pgm(np.array([[0, 4], [2, 0]]))
        assert text.splitlines()[:3] == ["P2", "2 2", "4"]

    def test_all_background_maxval(self):
        assert format_pgm(np.zeros((2, 2), int)).splitlines()[2] == "1"

    def test_comments(self):
        assert parse_pgm("P2\n# made by hand\n2 1\n3\n0 3\n").tolist() == [[0, 3]]

    def test_errors(self):
        with pytest.raises(HeaderError):
            parse_pgm("P5\n1 1\n1\n0\n")
        with pytest.raises(CountMismatch):
            parse_pgm("P2\n2 2\n1\n0 1 1\n")
        with pytest.raises(ParseError):
            parse_pgm("P2\n1 1\n1\n5\n")


class TestConfig:
    def test_parse(self):
        cfg = parse_config("tau = 0.5\nmerge-thresh = 30  # deg\ndump_intermediates = yes\nsize_thresh=20\n")
        assert cfg == {"tau": 0.5, "merge_thresh": 30.0, "dump_intermediates": True, "size_thresh": 20}

    @pytest.mark.parametrize("text", ["tau 0.5\n", "nope = 1\n", "tau = abc\n", "timings = maybe\n"])
    def test_errors(self, text):
        with pytest.raises(ParseError):
            parse_config(text)
