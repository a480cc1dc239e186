path = "C:\\Users"
print(f"{path}\\file")
print(f"{len(path)=}")
