# Ferry delivery heuristic: 4 per waiting misplaced car, 2 while aboard,
# minus 1 when the ferry is positioned to make progress on some car.
def h(state, ctx):
    goal_dest = {}
    for atom in ctx.goals:
        parts = atom.strip("()").split()
        if parts[0] == "at":
            goal_dest[parts[1]] = parts[2]
    ferry_at = None
    aboard = None
    car_at = {}
    for atom in state:
        parts = atom.strip("()").split()
        if parts[0] == "at-ferry":
            ferry_at = parts[1]
        elif parts[0] == "on":
            aboard = parts[1]
        elif parts[0] == "at":
            car_at[parts[1]] = parts[2]
    total = 0
    bonus = 0
    for car, dest in goal_dest.items():
        if aboard == car:
            total += 2
            if ferry_at == dest:
                bonus = 1
        elif car_at.get(car) != dest:
            total += 4
    if aboard is None and bonus == 0:
        for car, dest in goal_dest.items():
            at = car_at.get(car)
            if at is not None and at != dest and at == ferry_at:
                bonus = 1
                break
    return total - bonus
