# Example heuristic for an elevator domain: passengers board at their
# origin floor and leave at their destination ((waiting p), (boarded p),
# (served p), (lift-at f)).
def h(state, ctx):
    want_served = set()
    for atom in ctx.goals:
        parts = atom.strip("()").split()
        if parts[0] == "served":
            want_served.add(parts[1])
    boarded = set()
    served = set()
    for atom in state:
        parts = atom.strip("()").split()
        if parts[0] == "boarded":
            boarded.add(parts[1])
        elif parts[0] == "served":
            served.add(parts[1])
    cost = 0
    for passenger in want_served:
        if passenger in served:
            continue
        cost += 1 if passenger in boarded else 2
    return cost
