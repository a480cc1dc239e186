squares = [n * n for n in range(10) if n % 3]
lookup = {k: v for k, v in zip("abc", range(3))}
unique = {c for c in "mississippi"}
lazy = (n for n in squares)
