//! Local unitary coupled Jastrow ansatz on the RHF determinant:
//! `|Ψ> = Π_μ e^{K_μ} e^{i J_μ} e^{-K_μ} |RHF>`.
//!
//! `K_μ` is a real antisymmetric orbital generator shared by both spins,
//! realized as a sequence of Givens rotations. `J_μ` is a density-density
//! phase restricted to a qubit adjacency mask.
//!
//! Parameter vector layout, per layer: the strict lower triangle of `K`
//! row-major (`K[1][0], K[2][0], K[2][1], …`), then one value per mask pair
//! in mask order.

use nalgebra::DMatrix;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::statevector::{rhf_state, Statevector};

/// Spin-orbital pairs `(P, R)`, `P <= R`, allowed in the Jastrow layer.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct JastrowMask {
    pairs: Vec<(usize, usize)>,
}

impl JastrowMask {
    /// Every mode with itself, plus nearest neighbours in qubit order
    /// (which includes the α-β pair of each spatial orbital).
    pub fn adjacent(n_qubits: usize) -> Self {
        let mut pairs = Vec::new();
        for q in 0..n_qubits {
            pairs.push((q, q));
            if q + 1 < n_qubits {
                pairs.push((q, q + 1));
            }
        }
        Self { pairs }
    }

    pub fn from_pairs(n_qubits: usize, pairs: Vec<(usize, usize)>) -> Result<Self> {
        let mut normalized: Vec<(usize, usize)> = Vec::with_capacity(pairs.len());
        for (a, b) in pairs {
            if a >= n_qubits || b >= n_qubits {
                return Err(Error::InvalidArgument(format!("Jastrow pair ({a}, {b}) outside {n_qubits} qubits")));
            }
            normalized.push((a.min(b), a.max(b)));
        }
        normalized.sort_unstable();
        normalized.dedup();
        Ok(Self { pairs: normalized })
    }

    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct LucjLayer {
    /// Row-major antisymmetric generator over spatial orbitals.
    pub k: Vec<f64>,
    /// Couplings, one per mask pair.
    pub j: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct LucjParameters {
    n_orbitals: usize,
    mask: JastrowMask,
    layers: Vec<LucjLayer>,
}

impl LucjParameters {
    pub fn n_params(n_orbitals: usize, n_layers: usize, mask: &JastrowMask) -> usize {
        n_layers * (n_orbitals * (n_orbitals.saturating_sub(1)) / 2 + mask.len())
    }

    pub fn zeros(n_orbitals: usize, n_layers: usize, mask: JastrowMask) -> Self {
        let n_params = Self::n_params(n_orbitals, n_layers, &mask);
        Self::from_vector(n_orbitals, n_layers, mask, &vec![0.0; n_params]).expect("sized correctly")
    }

    /// Uniform in `[-scale, scale]` per parameter.
    pub fn random(n_orbitals: usize, n_layers: usize, mask: JastrowMask, scale: f64, seed: u64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let n_params = Self::n_params(n_orbitals, n_layers, &mask);
        let x: Vec<f64> = (0..n_params).map(|_| rng.gen_range(-scale..=scale)).collect();
        Self::from_vector(n_orbitals, n_layers, mask, &x).expect("sized correctly")
    }

    pub fn from_vector(n_orbitals: usize, n_layers: usize, mask: JastrowMask, x: &[f64]) -> Result<Self> {
        let expected = Self::n_params(n_orbitals, n_layers, &mask);
        if x.len() != expected {
            return Err(Error::DimensionMismatch { expected, found: x.len() });
        }
        if let Some(&(_, b)) = mask.pairs().last() {
            if b >= 2 * n_orbitals {
                return Err(Error::InvalidArgument("Jastrow mask exceeds qubit count".into()));
            }
        }
        let n = n_orbitals;
        let mut it = x.iter().copied();
        let mut layers = Vec::with_capacity(n_layers);
        for _ in 0..n_layers {
            let mut k = vec![0.0; n * n];
            for p in 1..n {
                for r in 0..p {
                    let v = it.next().unwrap();
                    k[p * n + r] = v;
                    k[r * n + p] = -v;
                }
            }
            let j: Vec<f64> = (0..mask.len()).map(|_| it.next().unwrap()).collect();
            layers.push(LucjLayer { k, j });
        }
        Ok(Self { n_orbitals, mask, layers })
    }

    pub fn to_vector(&self) -> Vec<f64> {
        let n = self.n_orbitals;
        let mut out = Vec::new();
        for layer in &self.layers {
            for p in 1..n {
                for r in 0..p {
                    out.push(layer.k[p * n + r]);
                }
            }
            out.extend_from_slice(&layer.j);
        }
        out
    }

    pub fn n_orbitals(&self) -> usize {
        self.n_orbitals
    }

    pub fn mask(&self) -> &JastrowMask {
        &self.mask
    }

    pub fn layers(&self) -> &[LucjLayer] {
        &self.layers
    }
}

/// Givens factorization `W = G_1 ⋯ G_m D` of a real orthogonal matrix.
/// Each rotation `(p, q, cos, sin)` is the single-particle matrix of
/// `exp(θ (a†_p a_q - a†_q a_p))`; `D` holds the ±1 diagonal.
#[derive(Debug, Clone)]
pub struct GivensDecomposition {
    pub rotations: Vec<(usize, usize, f64, f64)>,
    pub diagonal: Vec<f64>,
}

pub fn givens_decompose(w: &DMatrix<f64>) -> GivensDecomposition {
    let n = w.nrows();
    let mut m = w.clone();
    let mut rotations = Vec::new();
    for j in 0..n {
        for i in ((j + 1)..n).rev() {
            let a = i - 1;
            let (x, y) = (m[(a, j)], m[(i, j)]);
            if y.abs() < 1e-15 {
                continue;
            }
            let r = x.hypot(y);
            let (c, s) = (x / r, y / r);
            for col in 0..n {
                let (ra, rb) = (m[(a, col)], m[(i, col)]);
                m[(a, col)] = c * ra + s * rb;
                m[(i, col)] = -s * ra + c * rb;
            }
            // Left factor is the transpose of the eliminating rotation.
            rotations.push((a, i, c, -s));
        }
    }
    let diagonal = (0..n).map(|p| if m[(p, p)] < 0.0 { -1.0 } else { 1.0 }).collect();
    GivensDecomposition { rotations, diagonal }
}

/// Applies the Fock-space orbital rotation with single-particle matrix
/// `exp(generator)` to both spin sectors.
pub fn apply_orbital_rotation(state: &mut Statevector, generator: &[f64], n_orbitals: usize) {
    let n = n_orbitals;
    if generator.iter().all(|&v| v == 0.0) {
        return;
    }
    let w = DMatrix::from_row_slice(n, n, generator).exp();
    let decomposition = givens_decompose(&w);
    let flips: u64 = decomposition
        .diagonal
        .iter()
        .enumerate()
        .filter(|(_, &d)| d < 0.0)
        .fold(0u64, |acc, (p, _)| acc | (0b11 << (2 * p)));
    if flips != 0 {
        for (i, a) in state.amplitudes_mut().iter_mut().enumerate() {
            if (i as u64 & flips).count_ones() % 2 == 1 {
                *a = -*a;
            }
        }
    }
    // W = G_1 ⋯ G_m D acts right to left.
    for &(p, q, c, s) in decomposition.rotations.iter().rev() {
        for spin in 0..2 {
            state.apply_givens(2 * p + spin, 2 * q + spin, c, s);
        }
    }
}

/// Applies `exp(i Σ_{P,R} J_PR n_P n_R)` for symmetric `J` on the mask.
pub fn apply_jastrow(state: &mut Statevector, mask: &JastrowMask, couplings: &[f64]) {
    if couplings.iter().all(|&v| v == 0.0) {
        return;
    }
    let terms: Vec<(u64, f64)> = mask
        .pairs()
        .iter()
        .zip(couplings)
        .map(|(&(a, b), &j)| {
            let m = (1u64 << a) | (1u64 << b);
            // Off-diagonal pairs appear twice in the symmetric sum.
            (m, if a == b { j } else { 2.0 * j })
        })
        .collect();
    state.apply_diagonal_phase(|bits| terms.iter().filter(|(m, _)| bits & m == *m).map(|(_, j)| j).sum());
}

pub fn prepare_lucj(params: &LucjParameters, n_alpha: usize, n_beta: usize) -> Result<Statevector> {
    let n = params.n_orbitals();
    let mut state = rhf_state(n, n_alpha, n_beta)?;
    let negated = |k: &[f64]| k.iter().map(|v| -v).collect::<Vec<f64>>();
    // The last layer in the product acts first.
    for layer in params.layers().iter().rev() {
        apply_orbital_rotation(&mut state, &negated(&layer.k), n);
        apply_jastrow(&mut state, params.mask(), &layer.j);
        apply_orbital_rotation(&mut state, &layer.k, n);
    }
    Ok(state)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_parameters_give_rhf() {
        let params = LucjParameters::zeros(3, 2, JastrowMask::adjacent(6));
        let s = prepare_lucj(&params, 2, 1).unwrap();
        assert_eq!(s, rhf_state(3, 2, 1).unwrap());
    }

    #[test]
    fn vector_round_trip() {
        let mask = JastrowMask::adjacent(8);
        let p = LucjParameters::random(4, 2, mask.clone(), 0.1, 5);
        let x = p.to_vector();
        assert_eq!(x.len(), LucjParameters::n_params(4, 2, &mask));
        assert_eq!(LucjParameters::from_vector(4, 2, mask, &x).unwrap(), p);
    }

    #[test]
    fn givens_reconstructs_orthogonal_matrix() {
        let k = DMatrix::from_row_slice(3, 3, &[0.0, 0.3, -0.7, -0.3, 0.0, 1.1, 0.7, -1.1, 0.0]);
        let w = k.exp();
        let d = givens_decompose(&w);
        let mut rebuilt = DMatrix::from_diagonal(&nalgebra::DVector::from_vec(d.diagonal.clone()));
        for &(p, q, c, s) in d.rotations.iter().rev() {
            let mut g = DMatrix::<f64>::identity(3, 3);
            g[(p, p)] = c;
            g[(q, q)] = c;
            g[(p, q)] = s;
            g[(q, p)] = -s;
            rebuilt = g * rebuilt;
        }
        assert!((rebuilt - w).abs().max() < 1e-12);
    }

    #[test]
    fn mask_validation() {
        assert!(JastrowMask::from_pairs(4, vec![(0, 4)]).is_err());
        let m = JastrowMask::from_pairs(4, vec![(1, 0), (0, 1), (2, 2)]).unwrap();
        assert_eq!(m.pairs(), &[(0, 1), (2, 2)]);
    }
}
