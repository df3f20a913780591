a: int = 14
b: int = 7
x: int = 2*a+2*b

# |-

x
