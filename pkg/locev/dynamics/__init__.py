#!/usr/bin/env python3

from .events import apply_localizing_event
from .fit import DecayFit, fit_exponential_decay
from .master import (LindbladGenerator, coherence_decay_factor, evolve_master, lindblad_rhs,
                     observable_series, observe)
from .state import (DensityMatrix, EvolutionSpec, InvariantCheck, TimeSeriesRecord,
                    Tolerances, TrajectoryConfig, coherence_operator, default_time_step,
                    expectation, fock_state, prepare_bloch_condensate, purity, superposition)
from .trajectory import StepTooLarge, TrajectoryResult, mcwf_sample
