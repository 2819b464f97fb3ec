"""Z-eigenvalues of real symmetric tensors and Q-eigenvalues of complex symmetric tensors."""
from .embed import (Embedding, eigenvector_from_state, embed, embed_matrix, embed_tensor,
                    lift_vector, pair_partner, partner_map, phase_partner, project_vector,
                    state_from_eigenvector, unembed)
from .io import (TensorFileError, WitnessDriftError, load_tensor, load_witness, parse_bundle, parse_tensor_file,
                 save_tensor, save_witness, serialize_tensor)
from .qspec import (CASE_KINDS, DominanceError, EqualityRecord, QEigenpair, QSpectrumReport,
                    RatioReport, count_bound, direct_overlap_max, entanglement_eigenvalue,
                    equality_check, generate_case, pair_map_q, pairing_defect, qeig_all,
                    ratio_search, verify_qeig)
from .tensor import (ComplexSymTensor, SymmetryError, SymTensor, TensorError, apply_m,
                     complex_apply_m, complex_contract_m1, contract_m1, contract_m2,
                     frobenius_norm, orbit_multiplicity, symmetrize)
from .zsolve import (ConvergenceError, Eigenpair, SolverConfig, SpectrumEntry, SpectrumReport,
                     auto_shift, dedup_pairs, eig_sym_matrix, grid_oracle_n2, grid_oracle_n3plus,
                     residual, shifted_power_step, z_spectral_radius, zeig_multistart)

__version__ = "0.1.0"
