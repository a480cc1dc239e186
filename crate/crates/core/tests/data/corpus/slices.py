xs = list(range(10))
print(xs[::2], xs[1:-1], xs[::-1], xs[slice(2, 5)])
grid = [[0] * 3 for _ in range(3)]
grid[1][1] = 5
