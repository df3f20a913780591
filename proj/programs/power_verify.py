# pre: e>0
# post: b**e
# progress: e
# pmin: 1
def power(b: float, e: int) -> float:
    return b if e==1 else b*power(b, e-1)

# |-

power(2.0, 3)
