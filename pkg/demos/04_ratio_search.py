# %% [markdown]
# # Searching for large Q/Z ratios
#
# ``ratio_search`` samples random real tensors plus perturbations of the best
# one found so far and records the largest ratio of entanglement eigenvalue to
# Z-spectral radius. Matrices always give exactly 1.

# %%
from zqspec import SolverConfig, SymTensor, ratio_search

print("matrices:", ratio_search(2, 3, budget=10).best_ratio)

rep = ratio_search(3, 2, budget=24, cfg=SolverConfig(num_starts=40, seed=0))
print("random cubics, n = 2:", rep.best_ratio)
for fam, stats in rep.families.items():
    print(" ", fam, stats)

# %% [markdown]
# Seeding with a known witness keeps the search from starting at the bottom.

# %%
W = SymTensor.from_entries(3, 2, {(1, 1, 2): 1.0, (2, 2, 2): -1.0})
rep = ratio_search(3, 2, budget=8, seed_witness=W)
print("seeded:", rep.best_ratio, rep.witness_q, rep.witness_z)
