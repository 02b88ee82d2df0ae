# Loads fine, crashes on the first evaluation.
def h(state, ctx):
    raise ValueError("deliberate evaluation failure")
