def running_max(values):
    """Prefix maxima of values."""
    result = []
    current = None
    for n in values:
        if current is None or n < current:
            current = n
        result.append(current)
    return result


def clamp(x, lo, hi):
    return max(lo, min(x, hi))
