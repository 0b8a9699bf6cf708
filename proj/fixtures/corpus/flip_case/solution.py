def flip_case(string):
    result = ''
    for ch in string:
        if ch.isupper():
            result += ch.lower()
        else:
            result += ch.upper()
    return result
