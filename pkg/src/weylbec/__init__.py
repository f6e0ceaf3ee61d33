"""Bulk-edge correspondence for two-band Weyl semimetal models.

A model is a pair of real functions ``a(kx, ky)`` and ``b(kx, ky)`` on the
torus. The package locates Weyl points, extracts Fermi-arc curves, computes
edge spectral flows and bulk Chern numbers, and compares the three resulting
homology coefficient vectors.
"""

__version__ = "0.1.0"

from .chern import ClosedSurfaceGrid, chern_sphere, chern_tube, fhs_chern, fhs_chern_detail
from .correspondence import (
    BasisChoice,
    BecReport,
    HomologyVector,
    VerifyOptions,
    bulk_homology_vector,
    choose_basis,
    edge_homology_vector,
    fermi_homology_vector,
    verify_bec,
    weyl_charges,
)
from .edge import (
    Loop,
    analytic_edge_energy,
    build_edge_chain,
    edge_spectrum,
    spectral_flow_analytic,
    spectral_flow_numeric,
    transfer_matrix,
)
from .errors import (
    AssumptionViolated,
    ConfigError,
    NumericalError,
    WeylBecError,
)
from .expr import SurfacePair, differentiate, load_model_file, parse_expr
from .fermiarc import FermiArcComponent, component_sign, extract_fermi_arcs, intersection_number
from .model import GenericModel, Hermitian2, LocalFormModel, local_hamiltonian, qwz_model
from .presets import get_preset
from .weyl import WeylPoint, WeylSet, check_assumptions, detect_weyl_points

__all__ = [
    "__version__",
    "analytic_edge_energy",
    "AssumptionViolated",
    "BasisChoice",
    "BecReport",
    "build_edge_chain",
    "bulk_homology_vector",
    "check_assumptions",
    "chern_sphere",
    "chern_tube",
    "choose_basis",
    "ClosedSurfaceGrid",
    "component_sign",
    "ConfigError",
    "detect_weyl_points",
    "differentiate",
    "edge_homology_vector",
    "edge_spectrum",
    "extract_fermi_arcs",
    "fermi_homology_vector",
    "FermiArcComponent",
    "fhs_chern",
    "fhs_chern_detail",
    "GenericModel",
    "get_preset",
    "Hermitian2",
    "HomologyVector",
    "intersection_number",
    "load_model_file",
    "local_hamiltonian",
    "LocalFormModel",
    "Loop",
    "NumericalError",
    "parse_expr",
    "qwz_model",
    "spectral_flow_analytic",
    "spectral_flow_numeric",
    "SurfacePair",
    "transfer_matrix",
    "verify_bec",
    "VerifyOptions",
    "weyl_charges",
    "WeylBecError",
    "WeylPoint",
    "WeylSet",
]
