x = 1  # set x
y = [  # open
    1,  # one
    2,  # two
]  # close
