try:
    import tomllib
except ImportError:
    tomllib = None

print(tomllib is None)
