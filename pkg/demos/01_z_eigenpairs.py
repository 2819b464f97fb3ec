# %% [markdown]
# # Z-eigenpairs of a small real tensor
#
# A real symmetric tensor ``T`` of order ``m`` has a Z-eigenpair ``(lam, w)``
# when ``T w^{m-1} = lam w`` with ``|w| = 1``. For the diagonal cubic with
# entries 2 and -5 the spectrum can be written down by hand, so it is a good
# first check of the multistart solver and of the circle-grid oracle.

# %%
import numpy as np

from zqspec import SolverConfig, SymTensor, grid_oracle_n2, residual, zeig_multistart

T = SymTensor.diagonal(3, [2.0, -5.0])
rep = zeig_multistart(T, SolverConfig(num_starts=40, seed=0))
for e in rep.entries:
    print(f"lambda = {e.lam:+.12f}   w = {np.round(e.vector, 6)}   res = {residual(T, e.lam, e.vector):.1e}")

# %% [markdown]
# The grid oracle scans the unit circle directly and should find the same values.

# %%
grid = sorted(p.lam for p in grid_oracle_n2(T))
print("grid  :", np.round(grid, 10))
print("solver:", np.round(sorted(rep.eigenvalues), 10))

# %% [markdown]
# Order two is plain linear algebra, handled by cyclic Jacobi rotations.

# %%
from zqspec import eig_sym_matrix

rng = np.random.default_rng(1)
M = SymTensor.from_dense((lambda a: a + a.T)(rng.standard_normal((5, 5))))
print(np.round(sorted(p.lam for p in eig_sym_matrix(M)), 12))
print(np.round(np.linalg.eigvalsh(M.to_dense()), 12))
