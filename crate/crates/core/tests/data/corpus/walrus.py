import re

if (m := re.match(r"(\d+)", "42abc")) is not None:
    print(m.group(1))
while (chunk := [1][:0]):
    pass
