# Triangles, rectangles and extensions
#
# A vertex v at level n together with a word of its class fills a triangle
# of cells.  A zigzag from a corner fattens into a rectangle, and a rectangle
# plus a word extends to a full window in two different orders that agree.

# %%
import random

from bisys import build_canonical, even_shift
from bisys.configuration import (Zigzag, check_window, extend_rectangle, extract_zigzag, fill_triangle, level,
                                 rectangle_from_zigzag)
from bisys.tower import Tower

p = even_shift()
T = Tower(build_canonical(p, 6))
rng = random.Random(0)

# %%
v = 3
mu = T.P_words(3, v)[0]
tri = fill_triangle(T, v, mu)
print("triangle at", tri.corner, "with", len(tri.cells), "cells, bad squares:", check_window(T, tri))

# %%
# Random zigzag from the corner (-1, 2)
P, Q, H, W = -1, 2, 3, 2
lv = level(P, Q)
start = rng.randrange(T.m(lv))
steps, cur = [], start
for j in range(max(H, W)):
    st = rng.choice(T.steps(lv + 2 * j, cur))
    steps.append(st)
    cur = st[3]
zig = Zigzag(lv, start, tuple(steps))
R = rectangle_from_zigzag(T, zig, P, Q, H, W)
print("rectangle cells:", len(R.cells), "round trip:", extract_zigzag(R, P, Q, min(H, W)) == zig.truncate(min(H, W)))

# %%
mu = rng.choice(T.P_words(lv, start))
left = extend_rectangle(T, R, mu, "left")
right = extend_rectangle(T, R, mu, "right")
print("window cells:", len(left.cells))
print("orders agree:", left.cells == right.cells, " restriction matches:", R.agrees_with(left))
