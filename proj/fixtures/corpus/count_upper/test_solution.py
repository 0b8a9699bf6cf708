import sys

from solution import count_upper


def test_mixed():
    assert count_upper('aBCdEf') == 1


def test_none():
    assert count_upper('abcdefg') == 0


def test_odd_positions():
    assert count_upper('dBBE') == 0


def test_many():
    assert count_upper('EEEE') == 2


if __name__ == "__main__":
    globals()[sys.argv[1]]()
