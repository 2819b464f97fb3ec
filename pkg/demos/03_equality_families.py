# %% [markdown]
# # When do the largest Q- and Z-eigenvalues agree?
#
# For a real tensor the complex search space contains the real one, so the
# largest Q-eigenvalue is at least the Z-spectral radius. Several structured
# families make the two equal. The cubic ``sin 3t`` tensor shows that they can differ.

# %%
from zqspec import CASE_KINDS, SymTensor, equality_check, generate_case

for kind in CASE_KINDS:
    rec = equality_check(generate_case(kind, 4, 3, seed=0))
    print(f"{kind:12s} Q = {rec.q:.10f}  Z = {rec.z:.10f}  holds = {rec.holds}")

# %%
W = SymTensor.from_entries(3, 2, {(1, 1, 2): 1.0, (2, 2, 2): -1.0})
rec = equality_check(W)
print(f"witness: Q = {rec.q:.10f}  Z = {rec.z:.10f}  ratio = {rec.ratio:.10f}")
