//! Normal-ordered fermionic operator sums over spin-orbital modes.
//!
//! Mode `2p + σ` is spatial orbital `p` with spin `σ` (0 = α, 1 = β), the
//! same index as its Jordan-Wigner qubit. A monomial is written
//! `a†_{p1} a†_{p2} … a_{q1} a_{q2} …` with both index blocks ascending, so
//! it is fully described by two bitmasks.

use std::collections::BTreeMap;

use num_complex::Complex64;

use crate::hamiltonian::MolecularHamiltonian;
use crate::pauli::PRUNE_THRESHOLD;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct FermionMonomial {
    pub creations: u64,
    pub annihilations: u64,
}

impl FermionMonomial {
    pub const IDENTITY: FermionMonomial = FermionMonomial { creations: 0, annihilations: 0 };

    pub fn new(creations: u64, annihilations: u64) -> Self {
        Self { creations, annihilations }
    }

    /// Operator count.
    pub fn len(&self) -> u32 {
        self.creations.count_ones() + self.annihilations.count_ones()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Conserves total particle number and the α count.
    pub fn conserves_number_and_spin(&self) -> bool {
        const ALPHA: u64 = 0x5555_5555_5555_5555;
        self.creations.count_ones() == self.annihilations.count_ones()
            && (self.creations & ALPHA).count_ones() == (self.annihilations & ALPHA).count_ones()
    }

    /// Applies the monomial to occupation bitstring `bits`. Returns `None`
    /// when the result vanishes.
    #[inline]
    pub fn apply(&self, bits: u64) -> Option<(u64, f64)> {
        let mut state = bits;
        let mut odd = 0u32;
        // Rightmost operator acts first: annihilations from the highest mode.
        let mut ann = self.annihilations;
        while ann != 0 {
            let q = 63 - ann.leading_zeros();
            let bit = 1u64 << q;
            if state & bit == 0 {
                return None;
            }
            odd += (state & (bit - 1)).count_ones();
            state ^= bit;
            ann ^= bit;
        }
        let mut cre = self.creations;
        while cre != 0 {
            let p = 63 - cre.leading_zeros();
            let bit = 1u64 << p;
            if state & bit != 0 {
                return None;
            }
            odd += (state & (bit - 1)).count_ones();
            state ^= bit;
            cre ^= bit;
        }
        Some((state, if odd % 2 == 0 { 1.0 } else { -1.0 }))
    }

    pub fn describe(&self) -> String {
        let mut parts = Vec::new();
        for p in bits_ascending(self.creations) {
            parts.push(format!("a+{p}"));
        }
        for q in bits_ascending(self.annihilations) {
            parts.push(format!("a{q}"));
        }
        if parts.is_empty() {
            "1".into()
        } else {
            parts.join(" ")
        }
    }
}

pub(crate) fn bits_ascending(mut mask: u64) -> impl Iterator<Item = usize> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let q = mask.trailing_zeros() as usize;
            mask &= mask - 1;
            Some(q)
        }
    })
}

/// Sum of normal-ordered monomials with complex coefficients.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct FermionTermSum {
    n_modes: usize,
    terms: BTreeMap<FermionMonomial, Complex64>,
}

impl FermionTermSum {
    pub fn new(n_modes: usize) -> Self {
        Self { n_modes, terms: BTreeMap::new() }
    }

    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (&FermionMonomial, &Complex64)> {
        self.terms.iter()
    }

    pub fn coefficient(&self, m: &FermionMonomial) -> Complex64 {
        self.terms.get(m).copied().unwrap_or_default()
    }

    pub fn add_term(&mut self, m: FermionMonomial, c: Complex64) {
        *self.terms.entry(m).or_default() += c;
    }

    /// Adds `c · a†_{p1}…a†_{pk} a_{q1}…a_{ql}` for arbitrary (not
    /// necessarily sorted) index lists, reordering with the fermionic sign.
    pub fn add_ordered(&mut self, c: Complex64, creations: &[usize], annihilations: &[usize]) {
        let (Some((cre, s1)), Some((ann, s2))) = (sorted_block(creations), sorted_block(annihilations)) else {
            return;
        };
        self.add_term(FermionMonomial::new(cre, ann), c * (s1 * s2));
    }

    pub fn prune(&mut self, threshold: f64) {
        self.terms.retain(|_, c| c.norm() >= threshold);
    }

    pub fn max_abs_difference(&self, other: &FermionTermSum) -> f64 {
        let mut worst: f64 = 0.0;
        for (m, c) in &self.terms {
            worst = worst.max((c - other.coefficient(m)).norm());
        }
        for (m, c) in &other.terms {
            if !self.terms.contains_key(m) {
                worst = worst.max(c.norm());
            }
        }
        worst
    }

    /// Keeps only the scalar and the number- and S_z-conserving two- and
    /// four-operator terms. Returns the kept operator and the summed
    /// magnitude of everything dropped.
    pub fn filter_physical(&self) -> (EffectiveHamiltonian, f64) {
        let mut constant = 0.0;
        let mut terms = Vec::new();
        let mut discarded = 0.0;
        for (m, c) in &self.terms {
            let keep = match m.len() {
                0 => {
                    constant += c.re;
                    discarded += c.im.abs();
                    continue;
                }
                2 | 4 => m.conserves_number_and_spin(),
                _ => false,
            };
            if keep {
                terms.push((*m, *c));
            } else {
                discarded += c.norm();
            }
        }
        (EffectiveHamiltonian { n_modes: self.n_modes, constant, terms }, discarded)
    }
}

fn sorted_block(indices: &[usize]) -> Option<(u64, f64)> {
    let mut mask = 0u64;
    let mut inversions = 0usize;
    for (i, &a) in indices.iter().enumerate() {
        if mask & (1u64 << a) != 0 {
            return None;
        }
        mask |= 1u64 << a;
        inversions += indices[..i].iter().filter(|&&b| b > a).count();
    }
    Some((mask, if inversions % 2 == 0 { 1.0 } else { -1.0 }))
}

/// Free-function form of [`FermionTermSum::filter_physical`].
pub fn filter_physical(f: &FermionTermSum) -> (EffectiveHamiltonian, f64) {
    f.filter_physical()
}

/// Number- and S_z-conserving operator built from a scalar plus two- and
/// four-operator monomials; the form the subspace solver projects.
#[derive(Debug, Clone, PartialEq)]
pub struct EffectiveHamiltonian {
    n_modes: usize,
    constant: f64,
    terms: Vec<(FermionMonomial, Complex64)>,
}

impl EffectiveHamiltonian {
    pub fn n_modes(&self) -> usize {
        self.n_modes
    }

    pub fn constant(&self) -> f64 {
        self.constant
    }

    pub fn terms(&self) -> &[(FermionMonomial, Complex64)] {
        &self.terms
    }

    /// Back to a [`FermionTermSum`] for comparisons.
    pub fn to_fermion_sum(&self) -> FermionTermSum {
        let mut out = FermionTermSum::new(self.n_modes);
        if self.constant != 0.0 {
            out.add_term(FermionMonomial::IDENTITY, Complex64::new(self.constant, 0.0));
        }
        for (m, c) in &self.terms {
            out.add_term(*m, *c);
        }
        out
    }

    /// One-body part `h̃[P][R]` for `a†_P a_R` as a dense complex matrix
    /// over spin-orbital modes.
    pub fn one_body_matrix(&self) -> Vec<Complex64> {
        let n = self.n_modes;
        let mut h = vec![Complex64::default(); n * n];
        for (m, c) in &self.terms {
            if m.len() == 2 {
                let p = m.creations.trailing_zeros() as usize;
                let r = m.annihilations.trailing_zeros() as usize;
                h[p * n + r] += c;
            }
        }
        h
    }

    /// Summed magnitude of the four-operator part.
    pub fn two_body_weight(&self) -> f64 {
        self.terms.iter().filter(|(m, _)| m.len() == 4).map(|(_, c)| c.norm()).sum()
    }
}

impl MolecularHamiltonian {
    /// Normal-ordered spin-orbital form of the Hamiltonian, core energy
    /// included as the scalar term.
    pub fn to_fermion_sum(&self) -> FermionTermSum {
        let n = self.n_orbitals();
        let mut out = FermionTermSum::new(2 * n);
        if self.core_energy() != 0.0 {
            out.add_term(FermionMonomial::IDENTITY, Complex64::new(self.core_energy(), 0.0));
        }
        for p in 0..n {
            for r in 0..n {
                let v = self.one(p, r);
                if v == 0.0 {
                    continue;
                }
                for s in 0..2 {
                    out.add_ordered(Complex64::new(v, 0.0), &[2 * p + s], &[2 * r + s]);
                }
            }
        }
        // ½ Σ (pr|qs) a†_{pσ} a†_{qτ} a_{sτ} a_{rσ}
        for p in 0..n {
            for q in 0..n {
                for r in 0..n {
                    for s in 0..n {
                        let v = 0.5 * self.two(p, r, q, s);
                        if v == 0.0 {
                            continue;
                        }
                        for sigma in 0..2 {
                            for tau in 0..2 {
                                out.add_ordered(
                                    Complex64::new(v, 0.0),
                                    &[2 * p + sigma, 2 * q + tau],
                                    &[2 * s + tau, 2 * r + sigma],
                                );
                            }
                        }
                    }
                }
            }
        }
        out.prune(PRUNE_THRESHOLD);
        out
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn apply_signs() {
        // a†_0 on |mode 1 occupied>: no modes below 0, sign +.
        let m = FermionMonomial::new(0b01, 0);
        assert_eq!(m.apply(0b10), Some((0b11, 1.0)));
        // a†_1 on |mode 0 occupied>: one occupied below, sign -.
        let m = FermionMonomial::new(0b10, 0);
        assert_eq!(m.apply(0b01), Some((0b11, -1.0)));
        assert_eq!(m.apply(0b10), None);
        // a†_2 a_0 on |0,1 occupied>: a_0 sign +, a†_2 sees mode 1, sign -.
        let m = FermionMonomial::new(0b100, 0b001);
        assert_eq!(m.apply(0b011), Some((0b110, -1.0)));
    }

    #[test]
    fn add_ordered_sign() {
        let mut f = FermionTermSum::new(4);
        f.add_ordered(Complex64::new(1.0, 0.0), &[2, 0], &[1, 3]);
        assert_eq!(f.coefficient(&FermionMonomial::new(0b0101, 0b1010)), Complex64::new(-1.0, 0.0));
        f.add_ordered(Complex64::new(1.0, 0.0), &[1, 1], &[0]);
        assert_eq!(f.len(), 1);
    }

    #[test]
    fn filter_keeps_physical_form() {
        let mut f = FermionTermSum::new(4);
        let one = Complex64::new(1.0, 0.0);
        f.add_term(FermionMonomial::IDENTITY, one * 0.5);
        f.add_term(FermionMonomial::new(0b0001, 0b0100), one); // α→α
        f.add_term(FermionMonomial::new(0b0001, 0b0010), one * 0.25); // α←β
        f.add_term(FermionMonomial::new(0b0001, 0), one * 0.125); // single ladder op
        f.add_term(FermionMonomial::new(0b0011, 0b1100), one * 2.0); // αβ ← αβ
        f.add_term(FermionMonomial::new(0b0101, 0b1010), one * 3.0); // αα ← ββ
        let (eff, discarded) = f.filter_physical();
        assert_eq!(eff.constant(), 0.5);
        assert_eq!(eff.terms().len(), 2);
        assert!((discarded - (0.25 + 0.125 + 3.0)).abs() < 1e-15);
    }
}
