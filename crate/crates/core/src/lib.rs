//! Numerical laboratory for the damped semilinear wave equation with mixed
//! Dirichlet/Neumann (Zaremba) boundary conditions.
//!
//! The crate is organized bottom-up:
//!
//! * [`geometry`]: domains, boundary partitions, damping coefficients, meshes
//! * [`nonlinearity`]: admissibility checks and the truncated nonlinearity `f_k`
//! * [`discretization`]: the mixed-boundary Laplacian and the damped wave generator
//! * [`integrator`]: leapfrog time stepping, energies, the energy identity
//! * [`initial`]: initial-data families
//! * [`gcc`]: billiard ray tracing and control-time estimation
//! * [`stability`]: observability constants, decay rates, resolvent scans,
//!   truncation studies
//! * [`export`]: CSV, binary snapshot and plot-script writers

pub mod discretization;
pub mod error;
pub mod export;
pub mod gcc;
pub mod geometry;
pub mod initial;
pub mod integrator;
pub mod nonlinearity;
pub mod stability;

pub use discretization::{assemble_generator, assemble_laplacian, BlockGenerator, SparseOperator};
pub use error::{Error, Result};
pub use gcc::{control_time, first_entry_time, trace_ray, GccReport, Ray};
pub use geometry::{
    build_mesh, sample_damping, BoundaryCondition, BoundaryPartition, BoundarySegment, BoxRegion, DampingField,
    DampingProfile, DampingSpec, DomainSpec, Face, Interval, Mesh, NodeKind,
};
pub use initial::InitialData;
pub use integrator::{
    cfl_dt, energy, energy_identity_residual, EnergyRecord, Forcing, SimOptions, Trajectory, WaveState, WaveSystem,
};
pub use nonlinearity::{truncate, validate, AdmissibilityMode, NonlinearitySpec, TruncatedNonlinearity};
