//! Jordan-Wigner mapping between fermionic modes and qubits, both ways.
//!
//! Mode `q` maps to qubit `q` with `a_q = Z_{<q} (X_q + iY_q)/2`. An
//! occupied mode is a qubit in `|1>`, so `Z_q = I - 2 n_q`.

use num_complex::Complex64;

use crate::fermion::{bits_ascending, FermionMonomial, FermionTermSum};
use crate::hamiltonian::MolecularHamiltonian;
use crate::pauli::{Pauli, PauliString, PauliSum, I_POW, PRUNE_THRESHOLD};

/// Qubit image of the molecular Hamiltonian, core energy on the identity.
pub fn jw_map(h: &MolecularHamiltonian) -> PauliSum {
    jw_map_fermion(&h.to_fermion_sum())
}

/// Qubit image of an arbitrary normal-ordered fermion sum.
pub fn jw_map_fermion(f: &FermionTermSum) -> PauliSum {
    let mut out = PauliSum::new(f.n_modes());
    for (m, c) in f.iter() {
        let mut acc: Vec<(PauliString, Complex64)> = vec![(PauliString::IDENTITY, *c)];
        for p in bits_ascending(m.creations) {
            acc = multiply_by_ladder(&acc, p, true);
        }
        for q in bits_ascending(m.annihilations) {
            acc = multiply_by_ladder(&acc, q, false);
        }
        for (s, v) in acc {
            out.add_term(s, v);
        }
    }
    out.prune(PRUNE_THRESHOLD);
    out
}

fn multiply_by_ladder(acc: &[(PauliString, Complex64)], mode: usize, creation: bool) -> Vec<(PauliString, Complex64)> {
    let z = PauliString::z_string_below(mode);
    let mut x = z;
    x.set(mode, Pauli::X);
    let mut y = z;
    y.set(mode, Pauli::Y);
    // a† = Z_{<q}(X - iY)/2, a = Z_{<q}(X + iY)/2
    let y_coeff = if creation { Complex64::new(0.0, -0.5) } else { Complex64::new(0.0, 0.5) };
    let ladder = [(x, Complex64::new(0.5, 0.0)), (y, y_coeff)];
    let mut out = Vec::with_capacity(acc.len() * 2);
    for (s, c) in acc {
        for (l, lc) in &ladder {
            let (k, prod) = s.mul(l);
            out.push((prod, c * lc * I_POW[k as usize]));
        }
    }
    out
}

/// Local Majorana content of one mode in a string's fermionic preimage.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
enum LocalFactor {
    /// `a + a†`
    Gamma,
    /// `i (a† - a)`
    GammaPrime,
    /// `γ γ' = i (1 - 2n)`
    Pair,
}

/// Decomposes a string into `phase · Π_q f_q` over ascending modes.
fn majorana_decomposition(p: &PauliString, n_qubits: usize) -> (Complex64, Vec<(usize, LocalFactor)>) {
    let mut factors = Vec::new();
    let mut odd_above = false;
    for q in (0..n_qubits).rev() {
        let letter = p.get(q);
        // Odd factors above q each leave a Z on q.
        let local = if odd_above {
            match letter {
                Pauli::I => Pauli::Z,
                Pauli::X => Pauli::Y,
                Pauli::Y => Pauli::X,
                Pauli::Z => Pauli::I,
            }
        } else {
            letter
        };
        match local {
            Pauli::I => {}
            Pauli::X => {
                factors.push((q, LocalFactor::Gamma));
                odd_above = !odd_above;
            }
            Pauli::Y => {
                factors.push((q, LocalFactor::GammaPrime));
                odd_above = !odd_above;
            }
            Pauli::Z => factors.push((q, LocalFactor::Pair)),
        }
    }
    factors.reverse();

    // Pauli image of the ordered Majorana product, to recover the phase.
    let mut image = PauliString::IDENTITY;
    let mut k = 0u8;
    for &(q, f) in &factors {
        let z = PauliString::z_string_below(q);
        let parts: &[Pauli] = match f {
            LocalFactor::Gamma => &[Pauli::X],
            LocalFactor::GammaPrime => &[Pauli::Y],
            LocalFactor::Pair => &[Pauli::X, Pauli::Y],
        };
        for &letter in parts {
            let mut m = z;
            m.set(q, letter);
            let (dk, next) = image.mul(&m);
            k = (k + dk) % 4;
            image = next;
        }
    }
    debug_assert_eq!(image, *p);
    // image_phase · P = Π f  ⇒  P = conj(image_phase) · Π f
    (I_POW[((4 - k) % 4) as usize], factors)
}

/// Exact fermionic preimage of a Pauli sum.
pub fn reverse_jw(p: &PauliSum) -> FermionTermSum {
    reverse_jw_capped(p, None)
}

/// Fermionic preimage keeping only monomials of at most `max_len`
/// operators. Longer monomials are never generated, so with a cap the
/// result is no longer operator-equal to the input.
pub fn reverse_jw_capped(p: &PauliSum, max_len: Option<u32>) -> FermionTermSum {
    let n = p.n_qubits();
    let mut out = FermionTermSum::new(n);
    for (s, c) in p.iter() {
        let (phase, factors) = majorana_decomposition(s, n);
        let odd_count = factors.iter().filter(|(_, f)| *f != LocalFactor::Pair).count() as u32;
        if let Some(cap) = max_len {
            if odd_count > cap {
                continue;
            }
        }
        expand(&factors, 0, 0, 0, 0, c * phase, odd_count, max_len, &mut out);
    }
    out.prune(PRUNE_THRESHOLD);
    out
}

#[allow(clippy::too_many_arguments)]
fn expand(
    factors: &[(usize, LocalFactor)],
    idx: usize,
    cre: u64,
    ann: u64,
    len: u32,
    coeff: Complex64,
    odd_remaining: u32,
    max_len: Option<u32>,
    out: &mut FermionTermSum,
) {
    if let Some(cap) = max_len {
        if len + odd_remaining > cap {
            return;
        }
    }
    let Some(&(q, f)) = factors.get(idx) else {
        // Word order is ascending by mode; move creations left past
        // annihilations of lower modes.
        let mut swaps = 0u32;
        for p in bits_ascending(cre) {
            swaps += (ann & ((1u64 << p) - 1)).count_ones();
        }
        let sign = if swaps % 2 == 0 { 1.0 } else { -1.0 };
        out.add_term(FermionMonomial::new(cre, ann), coeff * sign);
        return;
    };
    let bit = 1u64 << q;
    let i = Complex64::new(0.0, 1.0);
    match f {
        LocalFactor::Gamma => {
            expand(factors, idx + 1, cre, ann | bit, len + 1, coeff, odd_remaining - 1, max_len, out);
            expand(factors, idx + 1, cre | bit, ann, len + 1, coeff, odd_remaining - 1, max_len, out);
        }
        LocalFactor::GammaPrime => {
            expand(factors, idx + 1, cre | bit, ann, len + 1, coeff * i, odd_remaining - 1, max_len, out);
            expand(factors, idx + 1, cre, ann | bit, len + 1, -coeff * i, odd_remaining - 1, max_len, out);
        }
        LocalFactor::Pair => {
            expand(factors, idx + 1, cre, ann, len, coeff * i, odd_remaining, max_len, out);
            expand(factors, idx + 1, cre | bit, ann | bit, len + 2, coeff * i * -2.0, odd_remaining, max_len, out);
        }
    }
}
