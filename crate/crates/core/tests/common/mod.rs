#![allow(dead_code)]

use std::path::PathBuf;

use nalgebra::{DMatrix, DVector, SymmetricEigen};
use num_complex::Complex64;
use sqdopt_core::fermion::FermionTermSum;
use sqdopt_core::lucj::LucjParameters;
use sqdopt_core::pauli::{Pauli, PauliSum};
use sqdopt_core::statevector::rhf_bits;
use sqdopt_core::{ActiveSpaceSpec, MolecularHamiltonian};

pub fn fixture_path(name: &str) -> PathBuf {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(format!("{name}.fcidump"))
}

pub fn load(name: &str, n_frozen: usize) -> MolecularHamiltonian {
    MolecularHamiltonian::from_fcidump_file(fixture_path(name))
        .unwrap()
        .apply_frozen_orbitals(&ActiveSpaceSpec::lowest(n_frozen))
        .unwrap()
}

pub fn reference(name: &str, key: &str) -> f64 {
    let path = PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/references.json");
    let v: serde_json::Value = serde_json::from_str(&std::fs::read_to_string(path).unwrap()).unwrap();
    v[name][key].as_f64().unwrap_or_else(|| panic!("no {key} for {name}"))
}

pub fn c(re: f64) -> Complex64 {
    Complex64::new(re, 0.0)
}

fn pauli_matrix(p: Pauli) -> DMatrix<Complex64> {
    let (o, z, i) = (c(1.0), c(0.0), Complex64::new(0.0, 1.0));
    match p {
        Pauli::I => DMatrix::from_row_slice(2, 2, &[o, z, z, o]),
        Pauli::X => DMatrix::from_row_slice(2, 2, &[z, o, o, z]),
        Pauli::Y => DMatrix::from_row_slice(2, 2, &[z, -i, i, z]),
        Pauli::Z => DMatrix::from_row_slice(2, 2, &[o, z, z, -o]),
    }
}

/// Dense matrix by Kronecker products; qubit 0 is the least significant
/// index bit.
pub fn pauli_dense(p: &PauliSum) -> DMatrix<Complex64> {
    let n = p.n_qubits();
    let dim = 1usize << n;
    let mut out = DMatrix::zeros(dim, dim);
    for (s, coeff) in p.iter() {
        let mut m = DMatrix::from_element(1, 1, c(1.0));
        for q in (0..n).rev() {
            m = m.kronecker(&pauli_matrix(s.get(q)));
        }
        out += m * *coeff;
    }
    out
}

/// Applies `a_q` (or `a†_q`) to a basis state.
fn ladder(q: usize, dagger: bool, state: usize) -> Option<(usize, f64)> {
    let bit = 1usize << q;
    if (state & bit != 0) == dagger {
        return None;
    }
    let sign = if (state & (bit - 1)).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
    Some((state ^ bit, sign))
}

/// Operator word applied right to left.
fn apply_word(word: &[(usize, bool)], state: usize) -> Option<(usize, f64)> {
    let mut s = state;
    let mut sign = 1.0;
    for &(q, d) in word.iter().rev() {
        let (t, g) = ladder(q, d, s)?;
        s = t;
        sign *= g;
    }
    Some((s, sign))
}

/// Fock-space matrix of the Hamiltonian built from the integrals, with
/// ladder operators acting on occupation bitstrings.
pub fn fock_hamiltonian(h: &MolecularHamiltonian) -> DMatrix<f64> {
    let n = h.n_orbitals();
    let dim = 1usize << (2 * n);
    let mut m = DMatrix::from_diagonal_element(dim, dim, h.core_energy());
    let mut add = |coeff: f64, word: &[(usize, bool)]| {
        if coeff == 0.0 {
            return;
        }
        for y in 0..dim {
            if let Some((x, s)) = apply_word(word, y) {
                m[(x, y)] += coeff * s;
            }
        }
    };
    for p in 0..n {
        for r in 0..n {
            for sg in 0..2 {
                add(h.one(p, r), &[(2 * p + sg, true), (2 * r + sg, false)]);
            }
        }
    }
    for p in 0..n {
        for q in 0..n {
            for r in 0..n {
                for s in 0..n {
                    // (pr|qs) a†_pσ a†_qτ a_sτ a_rσ
                    let v = 0.5 * h.two(p, r, q, s);
                    for sg in 0..2 {
                        for tau in 0..2 {
                            add(v, &[(2 * p + sg, true), (2 * q + tau, true), (2 * s + tau, false), (2 * r + sg, false)]);
                        }
                    }
                }
            }
        }
    }
    m
}

pub fn fermion_dense(f: &FermionTermSum) -> DMatrix<Complex64> {
    let dim = 1usize << f.n_modes();
    let mut m = DMatrix::zeros(dim, dim);
    for (mono, coeff) in f.iter() {
        let mut word = Vec::new();
        for q in 0..64 {
            if (mono.creations >> q) & 1 == 1 {
                word.push((q, true));
            }
        }
        for q in 0..64 {
            if (mono.annihilations >> q) & 1 == 1 {
                word.push((q, false));
            }
        }
        for y in 0..dim {
            if let Some((x, s)) = apply_word(&word, y) {
                m[(x, y)] += coeff * s;
            }
        }
    }
    m
}

/// Basis indices with the given α and β counts (interleaved ordering).
pub fn sector_indices(n_qubits: usize, n_alpha: usize, n_beta: usize) -> Vec<usize> {
    (0..1usize << n_qubits)
        .filter(|&i| {
            let a = (0..n_qubits).step_by(2).filter(|&q| (i >> q) & 1 == 1).count();
            let b = (1..n_qubits).step_by(2).filter(|&q| (i >> q) & 1 == 1).count();
            a == n_alpha && b == n_beta
        })
        .collect()
}

pub fn restrict<T: nalgebra::Scalar + Copy>(m: &DMatrix<T>, idx: &[usize]) -> DMatrix<T> {
    DMatrix::from_fn(idx.len(), idx.len(), |i, j| m[(idx[i], idx[j])])
}

pub fn eigenvalues_real(m: DMatrix<f64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

pub fn eigenvalues_complex(m: DMatrix<Complex64>) -> Vec<f64> {
    let mut e: Vec<f64> = SymmetricEigen::new(m).eigenvalues.iter().copied().collect();
    e.sort_by(f64::total_cmp);
    e
}

pub fn to_complex(m: &DMatrix<f64>) -> DMatrix<Complex64> {
    m.map(c)
}

/// `Σ_{pr,σ} K_pr a†_pσ a_rσ` as a dense real matrix.
pub fn one_body_dense(k: &[f64], n_orbitals: usize) -> DMatrix<f64> {
    let dim = 1usize << (2 * n_orbitals);
    let mut m = DMatrix::zeros(dim, dim);
    for p in 0..n_orbitals {
        for r in 0..n_orbitals {
            let v = k[p * n_orbitals + r];
            if v == 0.0 {
                continue;
            }
            for sg in 0..2 {
                for y in 0..dim {
                    if let Some((x, s)) = apply_word(&[(2 * p + sg, true), (2 * r + sg, false)], y) {
                        m[(x, y)] += v * s;
                    }
                }
            }
        }
    }
    m
}

/// Dense evaluation of the ansatz product formula.
pub fn lucj_dense(params: &LucjParameters, n_alpha: usize, n_beta: usize) -> DVector<Complex64> {
    let n = params.n_orbitals();
    let dim = 1usize << (2 * n);
    let mut psi = DVector::from_element(dim, c(0.0));
    psi[rhf_bits(n_alpha, n_beta) as usize] = c(1.0);
    for layer in params.layers().iter().rev() {
        let kd = one_body_dense(&layer.k, n);
        let plus = to_complex(&kd.exp());
        let minus = to_complex(&(-kd).exp());
        let mut jdiag = DMatrix::zeros(dim, dim);
        for x in 0..dim {
            let mut phase = 0.0;
            for (&(a, b), &j) in params.mask().pairs().iter().zip(&layer.j) {
                let na = ((x >> a) & 1) as f64;
                let nb = ((x >> b) & 1) as f64;
                // Symmetric J counts off-diagonal pairs twice.
                phase += if a == b { j * na } else { 2.0 * j * na * nb };
            }
            jdiag[(x, x)] = Complex64::from_polar(1.0, phase);
        }
        psi = &plus * (&jdiag * (&minus * psi));
    }
    psi
}

/// Per-qubit measurement rotation as a dense unitary.
pub fn rotation_dense(basis: &sqdopt_core::MeasurementBasis) -> DMatrix<Complex64> {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    let h = DMatrix::from_row_slice(2, 2, &[c(r), c(r), c(r), c(-r)]);
    let sdag = DMatrix::from_row_slice(2, 2, &[c(1.0), c(0.0), c(0.0), Complex64::new(0.0, -1.0)]);
    let mut u = DMatrix::from_element(1, 1, c(1.0));
    for q in (0..basis.n_qubits()).rev() {
        let local = match basis.axis(q) {
            sqdopt_core::Axis::Z => DMatrix::identity(2, 2),
            sqdopt_core::Axis::X => h.clone(),
            sqdopt_core::Axis::Y => &h * &sdag,
        };
        u = u.kronecker(&local);
    }
    u
}
