"""Dark modes in two-component linear bosonic networks.

Count and construct dark modes from the normal-mode arrowhead form, and
cross-check them against steady-state sideband cooling of the linearized
Langevin model.
"""

__version__ = "0.1.0"

from .applications import (AtomSystem, ChainSpec, DfsSystem, atom_dark_states,
                           build_chain_network, chain_dark_prediction,
                           dfs_single_excitation)
from .darkmode import (DarkModeReport, DegeneracyPartition, HybridizationChain, Tolerances,
                       analyze, count_dark_modes, gram_schmidt_bright_subspace,
                       hybridization_chain, mode_coefficients, partition_degeneracies,
                       xi_invariance_check)
from .dynamics import (CoolingResult, DiffusionMatrix, DriftMatrix, build_diffusion,
                       build_drift, final_phonon_numbers, solve_lyapunov, stability,
                       steady_state_means)
from .enumeration import ConfigGraph, enumerate_configs, instantiate, table_of_verdicts
from .errors import *  # noqa: F401,F403
from .network import (CoefficientMatrix, NetworkSpec, ValidationReport,
                      build_coefficient_matrix, load_spec, save_spec, validate_spec)
from .spectral import (ArrowheadForm, SecularDiagnostics, effective_couplings,
                       secular_diagnostics, to_normal_form)
