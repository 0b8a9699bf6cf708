import sys

from solution import words_string


def test_commas():
    assert words_string('Hi, my name is John') == ['Hi', 'my', 'name', 'is', 'John']


def test_empty():
    assert words_string('') == []


def test_only_commas():
    assert words_string('ahmed     , gamal') == ['ahmed', 'gamal']


def test_plain():
    assert words_string('One two') == ['One', 'two']


if __name__ == "__main__":
    globals()[sys.argv[1]]()
