"""Thomae-type identities for cyclic trigonal covers of the line, checked numerically."""
from .trees import BranchConfig, MarkedBinaryTree, TreeError, make_tree, validate_tree
from .cycles import build_symplectic_basis, choose_base_point
from .periods import PeriodData, period_matrices
from .theta import Characteristic, characteristic_of, theta_constant
from .thomae import VerificationReport, run_example7, verify_thomae
from .io import InputError, load_config, parse_config

__version__ = "0.1.0"

__all__ = [
    "BranchConfig", "MarkedBinaryTree", "TreeError", "make_tree", "validate_tree",
    "build_symplectic_basis", "choose_base_point", "PeriodData", "period_matrices",
    "Characteristic", "characteristic_of", "theta_constant",
    "VerificationReport", "run_example7", "verify_thomae",
    "InputError", "load_config", "parse_config",
]
