//! Sampled quantum diagonalization with multi-basis ansatz optimization.
//!
//! The pipeline: parse integrals, map to qubits, group Pauli terms into
//! measurement bases, prepare an LUCJ statevector, sample it in each basis,
//! and diagonalize the basis-rotated Hamiltonian in the sampled determinant
//! subspace. The averaged subspace energy drives a derivative-free
//! optimizer.

pub mod basis;
pub mod davidson;
pub mod drivers;
pub mod error;
pub mod fermion;
pub mod hamiltonian;
pub mod jordan_wigner;
pub mod lucj;
pub mod measurement;
pub mod optimizer;
pub mod pauli;
pub mod sqd;
pub mod statevector;
pub mod subspace;

pub use basis::{Axis, MeasurementBasis};
pub use error::{Error, Result};
pub use fermion::{filter_physical, EffectiveHamiltonian, FermionMonomial, FermionTermSum};
pub use hamiltonian::{parse_fcidump, ActiveSpaceSpec, MolecularHamiltonian};
pub use jordan_wigner::{jw_map, jw_map_fermion, reverse_jw, reverse_jw_capped};
pub use lucj::{prepare_lucj, JastrowMask, LucjParameters};
pub use measurement::{
    build_commutation_graph, greedy_group, measurable_terms, offdiagonal_ratio, plan_table, select_bases,
    CommutationGraph, MeasurementGroup, PlanRow,
};
pub use pauli::{conjugate_by_basis, Pauli, PauliString, PauliSum};
pub use statevector::{rhf_state, Statevector};
pub use davidson::{davidson_ground, DavidsonConfig, GroundState};
pub use optimizer::{minimize, CostValue, OptimizationResult, OptimizationTrace, OptimizerConfig};
pub use sqd::{compute_occupancies, configuration_recovery, fci_energy, sqd_energy, Occupancies, SqdConfig, SqdResult};
pub use subspace::{project, project_operator, slater_condon_element, sector_determinants, Determinant, SubspaceProblem};
pub use drivers::{bond_sweep, run_method, run_method_on, sqdopt_cost, Method, RunResult, RunSpec, SqdOptContext};
