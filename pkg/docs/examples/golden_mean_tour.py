# Golden mean shift, start to finish
#
# The golden mean shift forbids the block 11.  We build its canonical
# bisystem, look at the classes of central words, and walk a few points.

# %%
import random

from bisys import build_canonical, detect_stabilization, golden_mean, validate_axioms
from bisys.tower import Tower

p = golden_mean()
B = build_canonical(p, 6)
print("classes per level:", [B.m(l) for l in range(7)])

# %%
# A class at level n is a set of words of length n; two words share a class
# when they admit exactly the same left and right contexts.
for n in (1, 2):
    for i, words in enumerate(B.words[n]):
        print(B.name(n, i), sorted(p.show(w) for w in words))

# %%
rep = validate_axioms(B)
print("axioms hold up to level", rep.level, ":", rep.ok)
stab = detect_stabilization(B)
print("structure repeats from level", stab.onset)

# %%
# Past the onset the tower reuses the top level, so points can be infinite.
from bisys.configuration import distance, random_periodic_rep, shift

T = Tower(B)
rng = random.Random(1)
x = random_periodic_rep(T, rng)
print("labels x_-5..x_5:", "".join(p.show(x.pi(-5, 5))))
print("shifted:          ", "".join(p.show(shift(x, 1).pi(-5, 5))))

# %%
y = random_periodic_rep(T, rng)
d = distance(x, y)
print("distance between two random points:", d.value())
print("distance to itself:", distance(x, x).value())

# %%
# The factor map to label sequences is injective here: every window fiber
# is a single vertex.
from bisys.configuration import LabelSequence, pi_fiber

for word in [(0,), (0, 1), (0, 0, 1)]:
    y = LabelSequence.periodic(word)
    print(p.show(word), [len(pi_fiber(T, y, N)) for N in (1, 2, 3)])
