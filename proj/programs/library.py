import math

a = 5
b = 2

# |-

# Answer to the ultimate question
17+math.pow(a, b)
