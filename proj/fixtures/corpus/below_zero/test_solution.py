import sys

from solution import below_zero


def test_empty():
    assert below_zero([]) is False


def test_stays_positive():
    assert below_zero([1, 2, -3, 1, 2, -3]) is False


def test_dips():
    assert below_zero([1, 2, -4, 5, 6]) is True


def test_late_dip():
    assert below_zero([1, -1, 2, -2, 5, -5, 4, -5]) is True


if __name__ == "__main__":
    globals()[sys.argv[1]]()
