import os
import tempfile

with tempfile.TemporaryDirectory() as tmp:
    path = os.path.join(tmp, "notes.txt")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("alpha\nbeta\ngamma\n")
    with open(path, encoding="utf-8") as fh:
        head = fh.readline()
        tail = fh.readlines()
    with open(path, encoding="utf-8") as fh:
        whole = fh.read()
    fh.close()
    print(head.rstrip(), [t.strip() for t in tail], len(whole))
