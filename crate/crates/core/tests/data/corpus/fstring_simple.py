name = "world"
print(f"hello {name}!")
print(F"{name!r:>10}")
