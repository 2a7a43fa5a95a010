# Stage invariants and dynamical verdicts
#
# The stage algebras give an inductive system of integer matrices.  Recodings
# of the same shift give intertwined systems, while the full 2- and 3-shifts
# are told apart by how their order units grow.

# %%
from bisys import build_canonical, full_shift, golden_mean, higher_block, one_point, two_full_shifts
from bisys.afinv import compare_invariants, dim_group, eventual_rank, verify_ladder
from bisys.tower import Tower


def tower(p, L=6):
    return Tower(build_canonical(p, L))


G = dim_group(tower(golden_mean()), stages=5)
print("ranks", G.ranks, "unit growth", G.unit_growth(), "eventual rank", eventual_rank(G))

# %%
for k in (2, 3):
    H = dim_group(tower(higher_block(golden_mean(), k)), stages=5)
    c = compare_invariants(G, H, S=3)
    print(f"{k}-block recoding:", c.outcome, c.note, "| ladder replays:", verify_ladder(G, H, c))

# %%
c = compare_invariants(dim_group(tower(full_shift(2)), stages=5), dim_group(tower(full_shift(3)), stages=5))
print("full2 vs full3:", c.outcome, c.invariant, c.values["prime"])

# %%
from bisys.dynamics import condition_I, essential_freeness_probe, irreducibility

for name, p in [("full2", full_shift(2)), ("one point", one_point()), ("two components", two_full_shifts())]:
    T = tower(p)
    ef = essential_freeness_probe(T, n_max=1)[1]
    print(f"{name:15s} (I): {condition_I(T).status:9s} irreducible: {irreducibility(T).status:9s}"
          f" essentially free: {ef.status}")
