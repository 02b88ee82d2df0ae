# Hangs on the first evaluation; exercises the per-eval timeout.
def h(state, ctx):
    while True:
        pass
