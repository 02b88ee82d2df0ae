# Deliberately useless: every state looks equally far from the goal.
def h(state, ctx):
    return 1
