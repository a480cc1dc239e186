message = ("first part "
           'second part '
           f"third {1 + 1} "
           r"fourth\n")
