//! Dense statevectors over Jordan-Wigner qubits.
//!
//! Bit `q` of a basis index is the occupation of the mode mapped to qubit
//! `q`.

use num_complex::Complex64;
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;

use crate::basis::{Axis, MeasurementBasis};
use crate::error::{Error, Result};
use crate::pauli::PauliSum;

pub const MAX_STATEVECTOR_QUBITS: usize = 24;

/// Imaginary parts of an expectation below this are treated as rounding.
const EXPECTATION_IMAG_TOLERANCE: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct Statevector {
    n_qubits: usize,
    amplitudes: Vec<Complex64>,
}

fn check_capacity(n_qubits: usize) -> Result<()> {
    if n_qubits > MAX_STATEVECTOR_QUBITS {
        return Err(Error::Capacity(format!(
            "{n_qubits} qubits requested; statevectors are limited to {MAX_STATEVECTOR_QUBITS}"
        )));
    }
    Ok(())
}

/// Interleaves spin masks into a qubit bitstring (`2p` = α, `2p+1` = β).
pub fn interleave(alpha: u64, beta: u64) -> u64 {
    let mut out = 0u64;
    for p in 0..32 {
        out |= ((alpha >> p) & 1) << (2 * p);
        out |= ((beta >> p) & 1) << (2 * p + 1);
    }
    out
}

/// Splits a qubit bitstring into `(alpha, beta)` spatial-orbital masks.
pub fn deinterleave(bits: u64) -> (u64, u64) {
    let mut alpha = 0u64;
    let mut beta = 0u64;
    for p in 0..32 {
        alpha |= ((bits >> (2 * p)) & 1) << p;
        beta |= ((bits >> (2 * p + 1)) & 1) << p;
    }
    (alpha, beta)
}

impl Statevector {
    pub fn basis_state(n_qubits: usize, bits: u64) -> Result<Self> {
        check_capacity(n_qubits)?;
        let dim = 1usize << n_qubits;
        if bits as usize >= dim {
            return Err(Error::InvalidArgument(format!("basis index {bits} outside {n_qubits} qubits")));
        }
        let mut amplitudes = vec![Complex64::default(); dim];
        amplitudes[bits as usize] = Complex64::new(1.0, 0.0);
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn from_amplitudes(n_qubits: usize, amplitudes: Vec<Complex64>) -> Result<Self> {
        check_capacity(n_qubits)?;
        if amplitudes.len() != 1usize << n_qubits {
            return Err(Error::DimensionMismatch { expected: 1 << n_qubits, found: amplitudes.len() });
        }
        Ok(Self { n_qubits, amplitudes })
    }

    pub fn n_qubits(&self) -> usize {
        self.n_qubits
    }

    pub fn amplitudes(&self) -> &[Complex64] {
        &self.amplitudes
    }

    pub(crate) fn amplitudes_mut(&mut self) -> &mut [Complex64] {
        &mut self.amplitudes
    }

    pub fn norm_sqr(&self) -> f64 {
        self.amplitudes.iter().map(|a| a.norm_sqr()).sum()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amplitudes.iter().map(|a| a.norm_sqr()).collect()
    }

    fn apply_single_qubit(&mut self, qubit: usize, u: [[Complex64; 2]; 2]) {
        let bit = 1usize << qubit;
        for i in 0..self.amplitudes.len() {
            if i & bit == 0 {
                let a0 = self.amplitudes[i];
                let a1 = self.amplitudes[i | bit];
                self.amplitudes[i] = u[0][0] * a0 + u[0][1] * a1;
                self.amplitudes[i | bit] = u[1][0] * a0 + u[1][1] * a1;
            }
        }
    }

    /// Applies the per-qubit measurement rotation of `basis`: `H` on X
    /// qubits, `S†` then `H` on Y qubits.
    pub fn rotate_for_measurement(&self, basis: &MeasurementBasis) -> Result<Statevector> {
        basis.check_len(self.n_qubits)?;
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let h = [[Complex64::new(r, 0.0), Complex64::new(r, 0.0)], [Complex64::new(r, 0.0), Complex64::new(-r, 0.0)]];
        // H · S† = (1/√2) [[1, -i], [1, i]]
        let hs = [[Complex64::new(r, 0.0), Complex64::new(0.0, -r)], [Complex64::new(r, 0.0), Complex64::new(0.0, r)]];
        let mut out = self.clone();
        for (q, axis) in basis.axes().iter().enumerate() {
            match axis {
                Axis::Z => {}
                Axis::X => out.apply_single_qubit(q, h),
                Axis::Y => out.apply_single_qubit(q, hs),
            }
        }
        Ok(out)
    }

    /// Draws `n_shots` computational-basis outcomes from `|amplitude|²`.
    pub fn sample(&self, n_shots: usize, seed: u64) -> Result<Vec<u64>> {
        let dist = WeightedIndex::new(self.probabilities())
            .map_err(|e| Error::InvalidArgument(format!("cannot sample statevector: {e}")))?;
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        Ok((0..n_shots).map(|_| dist.sample(&mut rng) as u64).collect())
    }

    /// `<ψ|P|ψ>`; errors when the imaginary part is material.
    pub fn expectation(&self, p: &PauliSum) -> Result<f64> {
        if p.n_qubits() != self.n_qubits {
            return Err(Error::DimensionMismatch { expected: self.n_qubits, found: p.n_qubits() });
        }
        let support: Vec<u64> = self
            .amplitudes
            .iter()
            .enumerate()
            .filter(|(_, a)| a.norm_sqr() > 0.0)
            .map(|(i, _)| i as u64)
            .collect();
        let terms: Vec<_> = p.iter().map(|(s, c)| (*s, *c)).collect();
        let amps = &self.amplitudes;
        let per_term: Vec<Complex64> = terms
            .par_iter()
            .map(|(s, c)| {
                let mut acc = Complex64::default();
                for &x in &support {
                    let (y, phase) = s.apply(x);
                    acc += amps[y as usize].conj() * phase * amps[x as usize];
                }
                acc * c
            })
            .collect();
        let total: Complex64 = per_term.into_iter().sum();
        if total.im.abs() > EXPECTATION_IMAG_TOLERANCE {
            return Err(Error::NonHermitian(total.im));
        }
        Ok(total.re)
    }

    /// Number-conserving rotation `exp(θ (a†_p a_q - a†_q a_p))` between
    /// modes `p` and `q`, given as `(cos θ, sin θ)`.
    pub(crate) fn apply_givens(&mut self, p: usize, q: usize, cos: f64, sin: f64) {
        let (lo, hi) = (p.min(q), p.max(q));
        let between = ((1u64 << hi) - 1) & !((1u64 << (lo + 1)) - 1);
        let bp = 1usize << p;
        let bq = 1usize << q;
        for i in 0..self.amplitudes.len() {
            // Visit each (q occupied, p empty) / (p occupied, q empty) pair once.
            if i & bq != 0 && i & bp == 0 {
                let j = i ^ bq ^ bp;
                let sgn = if (i as u64 & between).count_ones() % 2 == 0 { 1.0 } else { -1.0 };
                let alpha = self.amplitudes[i];
                let beta = self.amplitudes[j];
                self.amplitudes[i] = alpha * cos - beta * (sin * sgn);
                self.amplitudes[j] = alpha * (sin * sgn) + beta * cos;
            }
        }
    }

    /// Multiplies each amplitude by `exp(i φ(bits))`.
    pub(crate) fn apply_diagonal_phase(&mut self, phase: impl Fn(u64) -> f64 + Sync) {
        self.amplitudes.par_iter_mut().enumerate().for_each(|(i, a)| {
            if a.norm_sqr() > 0.0 {
                *a *= Complex64::from_polar(1.0, phase(i as u64));
            }
        });
    }
}

/// Restricted Hartree-Fock determinant: the lowest `n_alpha` α modes and
/// lowest `n_beta` β modes occupied.
pub fn rhf_bits(n_alpha: usize, n_beta: usize) -> u64 {
    interleave((1u64 << n_alpha) - 1, (1u64 << n_beta) - 1)
}

pub fn rhf_state(n_orbitals: usize, n_alpha: usize, n_beta: usize) -> Result<Statevector> {
    if n_alpha > n_orbitals || n_beta > n_orbitals {
        return Err(Error::InvalidArgument(format!(
            "({n_alpha}, {n_beta}) electrons do not fit in {n_orbitals} orbitals"
        )));
    }
    Statevector::basis_state(2 * n_orbitals, rhf_bits(n_alpha, n_beta))
}
