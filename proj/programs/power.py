x = 3+2
y = 2

def power(b: float, e: int) -> float:
    return b if e==1 else b*power(b, e-1)

# |-

power(x, y)
