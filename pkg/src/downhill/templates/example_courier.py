# Example heuristic for a courier domain: packages are picked up by a van
# and dropped at their destinations ((at pkg loc), (in-van pkg), (van-at loc)).
def h(state, ctx):
    goal_at = {}
    for atom in ctx.goals:
        parts = atom.strip("()").split()
        if parts[0] == "at":
            goal_at[parts[1]] = parts[2]
    location = {}
    in_van = set()
    for atom in state:
        parts = atom.strip("()").split()
        if parts[0] == "at":
            location[parts[1]] = parts[2]
        elif parts[0] == "in-van":
            in_van.add(parts[1])
    cost = 0
    for pkg, destination in goal_at.items():
        if pkg in in_van:
            cost += 1                       # still needs a drop
        elif location.get(pkg) != destination:
            cost += 2                       # pick up, then drop
    return cost
