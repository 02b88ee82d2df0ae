# Deliberately malformed candidate for load-error tests.
def h(state, ctx:
    return 0
