def describe_number(n):
    if n < 0:
        label = "negative"
    elif n == 0:
        label = "ZERO"
    else:
        label = "Positive"
    if n % 2 == 0:
        parity = "even"
    else:
        parity = "odd"
    return label + " " + parity
