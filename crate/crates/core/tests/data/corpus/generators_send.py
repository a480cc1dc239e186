def accumulator():
    total = 0
    while True:
        received = yield total
        if received is None:
            break
        total += received


acc = accumulator()
next(acc)
acc.send(5)
