"""Smooth Bloch-Messiah decompositions of frequency-dependent symplectic transfer functions."""

from __future__ import annotations

from .berry import (BerryTrace, DegeneracyReport, LoopHolonomy, ParameterLoop, SphereSpec,
                    circle_loop, locate_degeneracy, loop_holonomy, loop_phase, parallel_loop,
                    singular_gap_fn, sphere_scan)
from .bmd import BmdFactors, bmd_from_svd, extract_theta
from .errors import (AmbiguousPhase, DegenerateSpectrum, DimensionError, IllConditionedPhase,
                     LoopThroughDegeneracy, NoConvergence, NonContinuableTrace, NonConvergentStep,
                     NotComplexSymmetric, StructureViolation, SympectraError, UnstableSystem)
from .linalg import (OrderedSvd, PhaseMatrix, SymplecticMatrix, apply_phase,
                     is_conjugate_symplectic, is_unitary_conjugate_symplectic, svd_ordered,
                     symplectic_form)
from .models import (BosonicSystem, MicroringSpec, SqueezingSpectra, check_stability,
                     four_mode_system, four_mode_system_with, hamiltonian_spectrum_check,
                     interaction_matrix, microring_system, parametric_transfer,
                     spectral_covariance, squeezing_spectra, transfer_function, transfer_path)
from .smooth import (BmdPath, MatrixPath, integrate_mvd, mvd_generators, procrustes_phase,
                     smooth_bmd, takagi_consistency_check)

__version__ = "0.1.0"
