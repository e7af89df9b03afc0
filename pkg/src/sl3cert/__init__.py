"""Exact sum-of-squares certificates for the Laplacian of SL(3, Z)."""

from .certify import Certificate, VerificationReport, lemma_bound, round_and_fix, sqrt_factor, verify
from .gram import ConstraintSystem, ProductTable, assemble, build_product_table, evaluate_gram
from .group_ring import RingElement, augmentation, l1_norm, laplacian, star, target
from .matrix_group import Basis, GeneratorSet, GroupElement, ball, identity, inverse, mul, standard_generators
from .sdp import SolverConfig, SolveReport, max_eps_bisection, project_affine, project_psd, solve_feasibility

__version__ = "0.1.0"
