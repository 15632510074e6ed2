"""Bias-field counterdiabatic optimization toolkit for 3-local Ising problems."""

from .hubo import (HuboProblem, Clause, CnfInstance, energy, cnf_to_hubo,
                   satisfied_weight, gen_nn_spin_glass, gen_max3sat,
                   gen_max3sat_nn, assignment_from_bits, bits_from_assignment)
from .pauli import PauliString, PauliSum, commutator
from .cd import (DriveSpec, BiasState, Circuit, DegenerateDriveError, schedule,
                 gamma1, gamma2, alpha1, prepare_angles, build_cd_circuit,
                 build_cd_circuit_sat, build_o1_symbolic)
from .statevector import StateVector, prepare, run_circuit, sample, exact_expectations
from .mps import (MpsState, mps_prepare, mps_run_circuit, mps_sample,
                  avg_entropy, UnsupportedGateError)
from .samples import SampleSet, cvar_energy, cvar_expectations, metrics, UndefinedMetricError
from .solvers import (AnnealParams, TabuParams, brute_force, exact_dp,
                      simulated_annealing, local_search, tabu_search)
from .driver import (BfdcqoConfig, IterationRecord, RunRecord, update_bias,
                     reference_energy, run_bfdcqo)
from .resources import Gate, GateCounts, decompose_rotation, count_circuit

__version__ = "0.1.0"
