"""Discrete pluri-Lagrangian linear systems on the lattice Z^N."""

from .errors import (
    ConservationViolated,
    DanglingInterior,
    DegenerateWeights,
    InconsistentCoefficients,
    InvalidAxes,
    InvalidSurface,
    MissingCoefficients,
    MissingFieldValues,
    MissingInitialData,
    MultiplyConnected,
    NotFlippable,
    NotHarmonic,
    PlurilattError,
    SchemaError,
    SingularConversion,
    SingularMatrix,
    SingularSystem,
    UnsolvablePivot,
)
from .fields import BiConstant, ScalarField
from .holomorphic import (
    cauchy_riemann_residual,
    cauchy_riemann_residuals,
    closure_residuals,
    conjugate,
    dual_lagrangian,
    holo_from_harmonic,
    moutard_propagate,
)
from .lagrangian import (
    FAMILIES,
    ComplexAnalysisLagrangian,
    CubeGram,
    DegenerateLagrangian,
    DiagonalLagrangian,
    FactorizedLagrangian,
    QNetLagrangian,
    QuadraticLagrangian,
    ThreePointLagrangian,
    family_for,
    from_moutard,
    qnet_gauge_normalize,
    to_moutard,
)
from .lattice import Cube, Plaquette, QuadSurface, enumerate_cubes, flip, planar_patch, room_corner
from .variational import (
    CornerVerdict,
    DirichletProblem,
    assemble_laplacian,
    corner_residuals,
    el_residuals,
    energy_invariance,
    extend_across_flip,
    solve_dirichlet,
    verify_cube,
)
from .weights import (
    ConstraintTriple,
    MoutardCoeffs,
    WeightField,
    moutard_matrix_step,
    propagate,
    random_initial_field,
    star_triangle,
)

__version__ = "0.1.0"

__all__ = [
    "BiConstant",
    "ComplexAnalysisLagrangian",
    "ConservationViolated",
    "ConstraintTriple",
    "CornerVerdict",
    "Cube",
    "CubeGram",
    "DanglingInterior",
    "DegenerateLagrangian",
    "DegenerateWeights",
    "DiagonalLagrangian",
    "DirichletProblem",
    "FAMILIES",
    "FactorizedLagrangian",
    "InconsistentCoefficients",
    "InvalidAxes",
    "InvalidSurface",
    "MissingCoefficients",
    "MissingFieldValues",
    "MissingInitialData",
    "MoutardCoeffs",
    "MultiplyConnected",
    "NotFlippable",
    "NotHarmonic",
    "Plaquette",
    "PlurilattError",
    "QNetLagrangian",
    "QuadSurface",
    "QuadraticLagrangian",
    "ScalarField",
    "SchemaError",
    "SingularConversion",
    "SingularMatrix",
    "SingularSystem",
    "ThreePointLagrangian",
    "UnsolvablePivot",
    "WeightField",
    "assemble_laplacian",
    "cauchy_riemann_residual",
    "cauchy_riemann_residuals",
    "closure_residuals",
    "conjugate",
    "corner_residuals",
    "dual_lagrangian",
    "el_residuals",
    "energy_invariance",
    "enumerate_cubes",
    "extend_across_flip",
    "family_for",
    "flip",
    "from_moutard",
    "holo_from_harmonic",
    "moutard_matrix_step",
    "moutard_propagate",
    "planar_patch",
    "propagate",
    "qnet_gauge_normalize",
    "random_initial_field",
    "room_corner",
    "solve_dirichlet",
    "star_triangle",
    "to_moutard",
    "verify_cube",
]
