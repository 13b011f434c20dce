"""Phase-space analysis of quantum superposition states.

Tools to build cat, mixed, and compass states; evaluate their Wigner
functions both in closed form and from the defining integral; locate and
quantify sub-Planck interference structure; run displacement-sensitivity
scans; and evolve states under Ohmic high-temperature decoherence.
"""

from subplanck.core import (
    CoverageError,
    InvalidFieldError,
    PhaseSpaceError,
    PhaseSpaceGrid,
    Quadrature,
    ResolutionError,
    UnitSystem,
    WignerField,
    WindowError,
    integrate_2d,
    linspace_grid,
)
from subplanck.states import (
    CatSpec,
    FockVector,
    GaussianComponent,
    MixedSpec,
    NoDecompositionError,
    TruncationError,
    coherent_to_gaussian,
    kerr_component_count,
    kerr_evolve,
    make_cat_momentum,
    make_cat_position,
    make_compass,
    make_mixed,
    psi_eval,
    state_from_json,
    state_to_json,
)
from subplanck.wigner import (
    characteristic_of_cat,
    check_coverage,
    compare_closed_vs_oracle,
    wigner_closed,
    wigner_closed_eval,
    wigner_closed_point,
    wigner_of_fock,
    wigner_point,
    wigner_transform,
    wrho_closed,
    wrho_perturbed,
)
from subplanck.interference import (
    LatticeError,
    ZeroLattice,
    checkerboard_report,
    find_zero_lattice,
    lattice_report,
    tile_area,
    zero_condition_residual,
)
from subplanck.metrology import (
    OverlapMap,
    OverlapScan,
    SearchError,
    SensitivityResult,
    compare_with_compass,
    default_scan_grid,
    find_orthogonality,
    fit_effective_coefficients,
    overlap,
    overlap_map,
    overlap_reference,
)
from subplanck.decoherence import (
    BathParams,
    a_coefficients,
    attenuation_curve,
    attenuation_exponent,
    attenuation_numeric,
    bath_moments,
    decoherence_time,
    evolve_characteristic,
    evolve_phase_point,
    evolved_wigner,
    green_function,
    propagation_matrix,
    tau_formula_momentum,
    tau_formula_position,
    visibility_from_field,
)

__version__ = "0.1.0"

__all__ = [
    "BathParams",
    "CatSpec",
    "CoverageError",
    "FockVector",
    "GaussianComponent",
    "InvalidFieldError",
    "LatticeError",
    "MixedSpec",
    "NoDecompositionError",
    "OverlapMap",
    "OverlapScan",
    "PhaseSpaceError",
    "PhaseSpaceGrid",
    "Quadrature",
    "ResolutionError",
    "SearchError",
    "SensitivityResult",
    "TruncationError",
    "UnitSystem",
    "WignerField",
    "WindowError",
    "ZeroLattice",
    "a_coefficients",
    "attenuation_curve",
    "attenuation_exponent",
    "attenuation_numeric",
    "bath_moments",
    "characteristic_of_cat",
    "check_coverage",
    "checkerboard_report",
    "coherent_to_gaussian",
    "compare_closed_vs_oracle",
    "compare_with_compass",
    "decoherence_time",
    "default_scan_grid",
    "evolve_characteristic",
    "evolve_phase_point",
    "evolved_wigner",
    "find_orthogonality",
    "find_zero_lattice",
    "fit_effective_coefficients",
    "green_function",
    "integrate_2d",
    "kerr_component_count",
    "kerr_evolve",
    "lattice_report",
    "linspace_grid",
    "make_cat_momentum",
    "make_cat_position",
    "make_compass",
    "make_mixed",
    "overlap",
    "overlap_map",
    "overlap_reference",
    "propagation_matrix",
    "psi_eval",
    "state_from_json",
    "state_to_json",
    "tau_formula_momentum",
    "tau_formula_position",
    "tile_area",
    "visibility_from_field",
    "wigner_closed",
    "wigner_closed_eval",
    "wigner_closed_point",
    "wigner_of_fock",
    "wigner_point",
    "wigner_transform",
    "wrho_closed",
    "wrho_perturbed",
    "zero_condition_residual",
]
