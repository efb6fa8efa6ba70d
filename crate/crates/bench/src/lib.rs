//! Shared setup for the pipeline benchmarks.

use std::path::{Path, PathBuf};

use sqdopt_core::{greedy_group, jw_map, select_bases, ActiveSpaceSpec, Method, MolecularHamiltonian, RunSpec, SqdOptContext};

pub fn fixture_path(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.fcidump"))
}

/// A fixture with its `n_frozen` lowest orbitals frozen.
pub fn hamiltonian(name: &str, n_frozen: usize) -> MolecularHamiltonian {
    MolecularHamiltonian::from_fcidump_file(fixture_path(name))
        .and_then(|h| h.apply_frozen_orbitals(&ActiveSpaceSpec::lowest(n_frozen)))
        .expect("fixture loads")
}

/// Cost context for `k` bases and `shots` samples per basis.
pub fn sqdopt_context(name: &str, n_frozen: usize, k: usize, shots: usize) -> SqdOptContext {
    let h = hamiltonian(name, n_frozen);
    let bases = select_bases(&greedy_group(&jw_map(&h)), k).expect("bases");
    let spec = RunSpec { k, shots, ..RunSpec::new(fixture_path(name), Method::Sqdopt) };
    SqdOptContext::new(h, bases, &spec).expect("context")
}
