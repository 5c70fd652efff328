"""Jet-based instability analysis of Hamiltonian equilibria and asymptotic-motion search."""

from .analysis import AnalysisSettings, HypothesisReport, Verdict, analyze
from .corpus import catalog, entry, verify_paper_example
from .dynamics import HamiltonianSystem, State, Trajectory, find_asymptotic_trajectory, integrate
from .field import PotentialField, PotentialFieldError
from .poly import JetDecomposition, Polynomial, homogeneous_parts, jet, radial_derivative
from .specfile import PotentialSpec, PotentialSpecError

__version__ = "0.1.0"

__all__ = [
    "AnalysisSettings", "HypothesisReport", "Verdict", "analyze",
    "catalog", "entry", "verify_paper_example",
    "HamiltonianSystem", "State", "Trajectory", "find_asymptotic_trajectory", "integrate",
    "PotentialField", "PotentialFieldError",
    "JetDecomposition", "Polynomial", "homogeneous_parts", "jet", "radial_derivative",
    "PotentialSpec", "PotentialSpecError",
]
