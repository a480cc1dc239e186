def check(n):
    assert n >= 0, "n must be non-negative"
    assert isinstance(n, int)
    return n
