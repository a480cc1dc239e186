# just a comment
#!shebang-like but not first
    # indented comment
