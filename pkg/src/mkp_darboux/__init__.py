"""Solitary waves of the (2+1)-dimensional mKP equation from Darboux transformations.

Modules
-------
calculus  grids, fields, finite differences and residual operators
lax       the four matrix Lax representations and zero-curvature residuals
darboux   vacuum seeds, S matrices, potential transforms and the q pipeline
families  closed-form solitary waves, stability regions, singularity scans
verify    grid-convergence checks and the verification suite
cli       the ``mkp-darboux`` command
"""

from .calculus import (Grid3, ScalarField3, VectorPotential, antiderivative_x, constrained_potential,
                       coupled_system_residual, diff, mkp_residual)
from .darboux import (SeedSpec, SMatrices, assemble_S, delta3_vacuum, pipeline_potentials, pipeline_q,
                      solve_block_split, transform_potentials, vacuum_eigenfunctions)
from .errors import (BoundaryPointError, BranchMismatchError, DegeneracyError, DegenerateSeedError,
                     DimensionError, MKPError, SingularPointError, ValidationError)
from .families import (FamilyParams, GammaXi, auto_grid, build_coefficients, closed_form_field,
                       closed_form_q, in_stability_region, scan_singularities)
from .lax import LaxEval, MatrixField, build_lax, zero_curvature_residual
from .verify import VerificationReport, run_suite

__version__ = "0.1.0"
