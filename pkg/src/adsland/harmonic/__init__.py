"""Discrete harmonic maps between cone surfaces and their Hopf differentials."""

from .energy import (
    SolveInfo,
    dirichlet_energy,
    differentials,
    energy_gradient,
    face_energies,
    harmonic_solve,
    reduced_gradient,
)
from .hopf import (
    DensityField,
    HopfField,
    bochner_residual,
    cotan_laplacian,
    density_decomposition,
    hopf_differential,
    pullback_from_density,
    recovered_differentials,
    vertex_densities,
    write_face_csv,
)
from .mesh import TriMeshMap, annulus_mesh, disk_mesh, read_mesh, refine, signed_areas, square_mesh, write_mesh
from .pair import (
    ConformalFamily,
    MinimalLagrangianReport,
    NonUnimodal,
    PairResult,
    RotationReport,
    center_metric,
    hopf_pairing,
    hopf_rotation_check,
    identity_noise_floor,
    landslide_metric,
    minimal_lagrangian_map,
    minimize_pair_energy,
    pair_energy,
    stretch_family,
    stretch_metric,
)

__all__ = [
    "SolveInfo", "dirichlet_energy", "differentials", "energy_gradient", "face_energies",
    "harmonic_solve", "reduced_gradient", "DensityField", "HopfField", "bochner_residual",
    "cotan_laplacian", "density_decomposition", "hopf_differential", "pullback_from_density",
    "recovered_differentials", "vertex_densities", "write_face_csv", "TriMeshMap", "annulus_mesh",
    "disk_mesh", "read_mesh", "refine", "signed_areas", "square_mesh", "write_mesh",
    "ConformalFamily", "MinimalLagrangianReport", "NonUnimodal", "PairResult", "RotationReport",
    "center_metric", "hopf_pairing", "hopf_rotation_check", "identity_noise_floor",
    "landslide_metric", "minimal_lagrangian_map", "minimize_pair_energy", "pair_energy",
    "stretch_family", "stretch_metric",
]
