import sys

from solution import sum_product


def test_empty():
    assert sum_product([]) == (0, 1)


def test_ones():
    assert sum_product([1, 1, 1]) == (3, 1)


def test_with_zero():
    assert sum_product([100, 0]) == (100, 0)


def test_general():
    assert sum_product([3, 5, 7]) == (15, 105)


if __name__ == "__main__":
    globals()[sys.argv[1]]()
