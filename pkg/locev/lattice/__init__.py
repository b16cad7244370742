#!/usr/bin/env python3

from .basis import DIMENSION_CAP, FockBasis, build_basis, fock_dimension
from .model import (KickSpectrum, LatticeSpec, LocalizationKernel, brillouin_zone,
                    ensure_quasimomentum)
from .operators import (SparseOperator, annihilation_operator, cm_position_operator,
                        cm_velocity_operator, commutator, hopping_hamiltonian,
                        hopping_operator, jump_operator_kernel, jump_operator_momentum,
                        kernel_from_lattice_spectrum, kernel_jump_family,
                        kick_spectrum_dissipator, momentum_annihilation,
                        momentum_transfer, number_operator, site_jump_family,
                        total_number_operator, weighted_number_operator)
