x = True and not False
y = None if x else 0
print(x or y)
