import sys

from solution import flip_case


def test_empty():
    assert flip_case('') == ''


def test_mixed():
    assert flip_case('Hello!') == 'hELLO!'


def test_sentence():
    assert flip_case('These violent delights') == 'tHESE VIOLENT DELIGHTS'


if __name__ == "__main__":
    globals()[sys.argv[1]]()
