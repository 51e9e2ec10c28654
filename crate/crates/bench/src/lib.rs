//! Fixtures shared by the benchmarks in `benches/`.

use wavezar_core::geometry::{BoundaryCondition, BoundaryPartition, DomainSpec, Face};
use wavezar_core::{
    assemble_generator, assemble_laplacian, build_mesh, sample_damping, truncate, BlockGenerator, BoxRegion,
    DampingSpec, Forcing, InitialData, NonlinearitySpec, WaveState, WaveSystem,
};

/// Damped cubic problem on a square grid with `n` nodes per axis, plus a
/// smooth initial state.
pub fn square_system(n: usize) -> (WaveSystem, WaveState) {
    let domain = DomainSpec::unit_square();
    let partition = BoundaryPartition::from_faces(
        &domain,
        &[
            (Face::Bottom, BoundaryCondition::Dirichlet),
            (Face::Top, BoundaryCondition::Dirichlet),
            (Face::Left, BoundaryCondition::Neumann),
            (Face::Right, BoundaryCondition::Neumann),
        ],
    );
    let mesh = build_mesh(&domain, &partition, &[n, n]).expect("mesh");
    let lap = assemble_laplacian(&mesh).expect("laplacian");
    let field = sample_damping(&mesh, &DampingSpec::indicator(vec![BoxRegion::rectangle((0.4, 0.6), (0.0, 1.0))], 1.0))
        .expect("damping");
    let forcing = Forcing::Truncated(truncate(&NonlinearitySpec::cubic(), 4).expect("truncation"));
    let system = WaveSystem::new(&mesh, &lap, &field, forcing).expect("system");
    let init = InitialData::Sine { amplitude: 1.0, wavenumbers: vec![1.0, 2.0], cosine_axes: vec![], velocity: false }
        .state(&mesh, &system)
        .expect("initial data");
    (system, init)
}

/// Damped generator on `[0, 1]` with `n_dof` unknowns.
pub fn interval_generator(n_dof: usize) -> BlockGenerator {
    let domain = DomainSpec::unit_interval();
    let partition = BoundaryPartition::from_faces(
        &domain,
        &[(Face::Left, BoundaryCondition::Dirichlet), (Face::Right, BoundaryCondition::Neumann)],
    );
    let mesh = build_mesh(&domain, &partition, &[n_dof + 1]).expect("mesh");
    let lap = assemble_laplacian(&mesh).expect("laplacian");
    let field = sample_damping(&mesh, &DampingSpec::indicator(vec![BoxRegion::interval(0.4, 0.6)], 1.0)).expect("damping");
    assemble_generator(&lap, &field).expect("generator")
}
