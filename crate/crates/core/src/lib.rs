//! Free-boundary dam seepage in high-contrast media: a fine-grid reference
//! solver (characteristics + duality fixed point) and a spectrally enriched
//! multiscale coarse solver, with energy-norm error comparison.

pub mod driver;
pub mod duality;
pub mod error;
pub mod fem;
pub mod gmsfem;
pub mod grid;
pub mod io;
pub mod numerics;
pub mod permeability;

pub use driver::{
    energy_error, initial_state, run_to_steady, saturated_region_connected_to_bottom, time_step,
    DamState, ErrorReport, InitKind, Operators, PressureSolver, RunResult, SolverConfig,
};
pub use error::{DamError, Result};
pub use fem::SparseMatrix;
pub use gmsfem::{
    build_partition_of_unity, build_spectral_basis, compute_weight, neighborhood_matrices,
    CoarseSpace, PartitionOfUnity,
};
pub use numerics::{smallest_eigenpairs, solve_dirichlet, to_dense, DirichletSolver, EigenPairs};
pub use grid::{build_coarse_mesh, build_fine_mesh, Boundary, BoundarySpec, CoarseMesh, FineMesh};
pub use permeability::{
    gen_channels_and_inclusions, gen_horizontal_channels, gen_vertical_channels, load_field,
    save_field, Band, InclusionSpec, PermeabilityField,
};
