phrase = "  Python Localization Toolkit  "
clean = phrase.strip()
print(clean.upper(), clean.lower(), clean.title())
print(clean.replace("o", "0"), clean.find("Local"), clean.count("o"))
parts = clean.split()
print("|".join(parts), parts[::-1])
print(clean.startswith("Py"), clean.endswith("kit"), "42".isdigit(), "abc".isalpha())
print(repr(phrase.lstrip()), repr(phrase.rstrip()), "ünïcödé".encode("utf-8"))
print(b"bytes".decode("ascii").capitalize(), ascii("π"), chr(960), ord("π"))
