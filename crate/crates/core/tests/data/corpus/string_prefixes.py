a = r"\n"
b = u"text"
c = R'raw'
d = U"upper"
print(a, b, c, d)
