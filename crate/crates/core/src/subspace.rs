//! Determinant subspaces and projected Hamiltonian matrices.

use std::collections::HashMap;

use nalgebra::ComplexField;
use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fermion::EffectiveHamiltonian;
use crate::hamiltonian::MolecularHamiltonian;
use crate::statevector::{deinterleave, interleave};

/// Entries smaller than this are not stored.
pub const MATRIX_DROP_THRESHOLD: f64 = 1e-12;

/// Largest sector the full-configuration solver will enumerate.
pub const MAX_SECTOR_DETERMINANTS: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Determinant {
    pub alpha: u64,
    pub beta: u64,
}

impl Determinant {
    pub fn new(alpha: u64, beta: u64) -> Self {
        Self { alpha, beta }
    }

    /// From an interleaved qubit bitstring.
    pub fn from_bits(bits: u64) -> Self {
        let (alpha, beta) = deinterleave(bits);
        Self { alpha, beta }
    }

    pub fn bits(&self) -> u64 {
        interleave(self.alpha, self.beta)
    }

    pub fn n_alpha(&self) -> usize {
        self.alpha.count_ones() as usize
    }

    pub fn n_beta(&self) -> usize {
        self.beta.count_ones() as usize
    }

    pub fn in_sector(&self, n_alpha: usize, n_beta: usize) -> bool {
        self.n_alpha() == n_alpha && self.n_beta() == n_beta
    }

    /// Number of orbitals whose occupation moved between the two.
    pub fn excitation_degree(&self, other: &Determinant) -> u32 {
        ((self.alpha ^ other.alpha).count_ones() + (self.beta ^ other.beta).count_ones()) / 2
    }
}

/// All determinants with `n_alpha` α and `n_beta` β electrons in
/// `n_orbitals` orbitals, ordered by (α, β) mask.
pub fn sector_determinants(n_orbitals: usize, n_alpha: usize, n_beta: usize) -> Result<Vec<Determinant>> {
    if n_alpha > n_orbitals || n_beta > n_orbitals {
        return Err(Error::InvalidArgument(format!(
            "({n_alpha}, {n_beta}) electrons do not fit in {n_orbitals} orbitals"
        )));
    }
    let count = binomial(n_orbitals, n_alpha).saturating_mul(binomial(n_orbitals, n_beta));
    if count > MAX_SECTOR_DETERMINANTS as u128 {
        return Err(Error::Capacity(format!(
            "sector has {count} determinants; the limit is {MAX_SECTOR_DETERMINANTS}"
        )));
    }
    let alphas = fixed_popcount_masks(n_orbitals, n_alpha);
    let betas = fixed_popcount_masks(n_orbitals, n_beta);
    let mut out = Vec::with_capacity(count as usize);
    for &a in &alphas {
        for &b in &betas {
            out.push(Determinant::new(a, b));
        }
    }
    Ok(out)
}

pub(crate) fn binomial(n: usize, k: usize) -> u128 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc: u128 = 1;
    for i in 0..k {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

fn fixed_popcount_masks(n: usize, k: usize) -> Vec<u64> {
    if k == 0 {
        return vec![0];
    }
    let mut out = Vec::new();
    let mut m: u64 = (1u64 << k) - 1;
    let limit = 1u64 << n;
    while m < limit {
        out.push(m);
        // Next mask with the same popcount.
        let c = m & m.wrapping_neg();
        let r = m + c;
        m = (((r ^ m) >> 2) / c) | r;
    }
    out
}

#[inline]
fn parity_below(bits: u64, q: u32) -> u32 {
    (bits & ((1u64 << q) - 1)).count_ones()
}

/// `⟨PQ|RS⟩` over interleaved spin-orbitals.
#[inline]
fn so_two(h: &MolecularHamiltonian, p: u32, q: u32, r: u32, s: u32) -> f64 {
    if (p ^ r) & 1 != 0 || (q ^ s) & 1 != 0 {
        return 0.0;
    }
    h.two((p / 2) as usize, (r / 2) as usize, (q / 2) as usize, (s / 2) as usize)
}

#[inline]
fn so_one(h: &MolecularHamiltonian, p: u32, r: u32) -> f64 {
    if (p ^ r) & 1 != 0 {
        return 0.0;
    }
    h.one((p / 2) as usize, (r / 2) as usize)
}

fn set_bits(mut mask: u64) -> impl Iterator<Item = u32> {
    std::iter::from_fn(move || {
        if mask == 0 {
            None
        } else {
            let q = mask.trailing_zeros();
            mask &= mask - 1;
            Some(q)
        }
    })
}

/// `⟨x|Ĥ|y⟩` over interleaved spin-orbital bitstrings, including the core
/// energy on the diagonal.
pub fn slater_condon_bits(h: &MolecularHamiltonian, x: u64, y: u64) -> f64 {
    if x.count_ones() != y.count_ones() {
        return 0.0;
    }
    let diff = x ^ y;
    match diff.count_ones() {
        0 => {
            let mut e = h.core_energy();
            for i in set_bits(x) {
                e += so_one(h, i, i);
                for j in set_bits(x) {
                    e += 0.5 * (so_two(h, i, j, i, j) - so_two(h, i, j, j, i));
                }
            }
            e
        }
        2 => {
            let i = (y & diff).trailing_zeros();
            let a = (x & diff).trailing_zeros();
            let after = y ^ (1u64 << i);
            let odd = parity_below(y, i) + parity_below(after, a);
            let sign = if odd % 2 == 0 { 1.0 } else { -1.0 };
            let mut v = so_one(h, a, i);
            for j in set_bits(after) {
                v += so_two(h, a, j, i, j) - so_two(h, a, j, j, i);
            }
            sign * v
        }
        4 => {
            let mut holes = set_bits(y & diff);
            let mut parts = set_bits(x & diff);
            let (i, j) = (holes.next().unwrap(), holes.next().unwrap());
            let (a, b) = (parts.next().unwrap(), parts.next().unwrap());
            // a†_a a†_b a_j a_i |y>
            let mut state = y;
            let mut odd = 0;
            for q in [i, j, b, a] {
                odd += parity_below(state, q);
                state ^= 1u64 << q;
            }
            let sign = if odd % 2 == 0 { 1.0 } else { -1.0 };
            sign * (so_two(h, a, b, i, j) - so_two(h, a, b, j, i))
        }
        _ => 0.0,
    }
}

pub fn slater_condon_element(h: &MolecularHamiltonian, x: &Determinant, y: &Determinant) -> f64 {
    slater_condon_bits(h, x.bits(), y.bits())
}

/// Compressed sparse rows.
#[derive(Debug, Clone, PartialEq)]
pub struct CsrMatrix<T> {
    n: usize,
    row_ptr: Vec<usize>,
    cols: Vec<u32>,
    values: Vec<T>,
}

impl<T: ComplexField<RealField = f64> + Copy> CsrMatrix<T> {
    /// Builds from per-row `(col, value)` lists; each row is sorted and
    /// duplicate columns summed.
    pub fn from_rows(n: usize, rows: Vec<Vec<(u32, T)>>) -> Self {
        let mut row_ptr = Vec::with_capacity(n + 1);
        let mut cols = Vec::new();
        let mut values = Vec::new();
        row_ptr.push(0);
        for mut row in rows {
            row.sort_by_key(|(c, _)| *c);
            let mut last: Option<u32> = None;
            for (c, v) in row {
                if last == Some(c) {
                    let top = values.len() - 1;
                    values[top] += v;
                } else {
                    cols.push(c);
                    values.push(v);
                    last = Some(c);
                }
            }
            row_ptr.push(cols.len());
        }
        Self { n, row_ptr, cols, values }
    }

    pub fn from_dense(n: usize, dense: &[T]) -> Self {
        let rows = (0..n)
            .map(|i| (0..n).filter(|&j| dense[i * n + j] != T::zero()).map(|j| (j as u32, dense[i * n + j])).collect())
            .collect();
        Self::from_rows(n, rows)
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row(&self, i: usize) -> impl Iterator<Item = (usize, T)> + '_ {
        let range = self.row_ptr[i]..self.row_ptr[i + 1];
        self.cols[range.clone()].iter().zip(&self.values[range]).map(|(&c, &v)| (c as usize, v))
    }

    pub fn get(&self, i: usize, j: usize) -> T {
        self.row(i).find(|(c, _)| *c == j).map(|(_, v)| v).unwrap_or_else(T::zero)
    }

    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.n).map(|i| self.get(i, i).real()).collect()
    }

    pub fn matvec(&self, x: &[T], y: &mut [T]) {
        let row = |i: usize| {
            let mut acc = T::zero();
            for k in self.row_ptr[i]..self.row_ptr[i + 1] {
                acc += self.values[k] * x[self.cols[k] as usize];
            }
            acc
        };
        if self.nnz() > 200_000 {
            y.par_iter_mut().enumerate().for_each(|(i, yi)| *yi = row(i));
        } else {
            for (i, yi) in y.iter_mut().enumerate() {
                *yi = row(i);
            }
        }
    }

    pub fn to_dense(&self) -> Vec<T> {
        let mut out = vec![T::zero(); self.n * self.n];
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                out[i * self.n + j] = v;
            }
        }
        out
    }

    /// Index sets of the connected components of the sparsity graph, each
    /// ascending, ordered by smallest member.
    pub fn connected_components(&self) -> Vec<Vec<usize>> {
        let mut label = vec![usize::MAX; self.n];
        let mut components = Vec::new();
        for start in 0..self.n {
            if label[start] != usize::MAX {
                continue;
            }
            let id = components.len();
            let mut members = vec![start];
            label[start] = id;
            let mut head = 0;
            while head < members.len() {
                let i = members[head];
                head += 1;
                for (j, _) in self.row(i) {
                    if label[j] == usize::MAX {
                        label[j] = id;
                        members.push(j);
                    }
                }
            }
            members.sort_unstable();
            components.push(members);
        }
        components
    }

    /// Principal submatrix on the ascending index set `idx`.
    pub fn submatrix(&self, idx: &[usize]) -> Self {
        let mut position = vec![u32::MAX; self.n];
        for (k, &i) in idx.iter().enumerate() {
            position[i] = k as u32;
        }
        let rows = idx
            .iter()
            .map(|&i| self.row(i).filter(|(j, _)| position[*j] != u32::MAX).map(|(j, v)| (position[j], v)).collect())
            .collect();
        Self::from_rows(idx.len(), rows)
    }

    /// Largest `|M_ij - conj(M_ji)|`.
    pub fn hermiticity_error(&self) -> f64 {
        let mut worst: f64 = 0.0;
        for i in 0..self.n {
            for (j, v) in self.row(i) {
                worst = worst.max((v - self.get(j, i).conjugate()).modulus());
            }
        }
        worst
    }
}

/// A determinant list with the Hamiltonian projected onto its span.
#[derive(Debug, Clone)]
pub struct SubspaceProblem<T> {
    pub dets: Vec<Determinant>,
    pub matrix: CsrMatrix<T>,
}

impl<T> SubspaceProblem<T> {
    pub fn dim(&self) -> usize {
        self.dets.len()
    }
}

fn check_dets(dets: &[Determinant]) -> Result<HashMap<u64, usize>> {
    if dets.is_empty() {
        return Err(Error::InvalidArgument("cannot project onto an empty determinant set".into()));
    }
    let mut index = HashMap::with_capacity(dets.len());
    for (i, d) in dets.iter().enumerate() {
        if index.insert(d.bits(), i).is_some() {
            return Err(Error::InvalidArgument(format!("duplicate determinant {d:?}")));
        }
    }
    Ok(index)
}

/// Hamiltonians that can be projected onto determinant subspaces.
pub trait SubspaceHamiltonian: Sync {
    type Scalar: ComplexField<RealField = f64> + Copy;

    fn n_orbitals(&self) -> usize;

    fn project(&self, dets: &[Determinant]) -> Result<SubspaceProblem<Self::Scalar>>;

    /// `⟨x|Ĥ|x⟩`.
    fn diagonal_element(&self, det: &Determinant) -> f64;
}

impl SubspaceHamiltonian for MolecularHamiltonian {
    type Scalar = f64;

    fn n_orbitals(&self) -> usize {
        MolecularHamiltonian::n_orbitals(self)
    }

    fn project(&self, dets: &[Determinant]) -> Result<SubspaceProblem<f64>> {
        project(self, dets)
    }

    fn diagonal_element(&self, det: &Determinant) -> f64 {
        slater_condon_element(self, det, det)
    }
}

impl SubspaceHamiltonian for EffectiveHamiltonian {
    type Scalar = Complex64;

    fn n_orbitals(&self) -> usize {
        self.n_modes() / 2
    }

    fn project(&self, dets: &[Determinant]) -> Result<SubspaceProblem<Complex64>> {
        project_operator(self, dets)
    }

    fn diagonal_element(&self, det: &Determinant) -> f64 {
        let bits = det.bits();
        let mut e = self.constant();
        for (m, c) in self.terms() {
            if m.creations == m.annihilations {
                if let Some((_, sign)) = m.apply(bits) {
                    e += c.re * sign;
                }
            }
        }
        e
    }
}

/// Slater-Condon projection of the molecular Hamiltonian.
pub fn project(h: &MolecularHamiltonian, dets: &[Determinant]) -> Result<SubspaceProblem<f64>> {
    let index = check_dets(dets)?;
    let bits: Vec<u64> = dets.iter().map(Determinant::bits).collect();
    let n = dets.len();
    let n_orb = h.n_orbitals();
    // Pairwise scanning beats excitation generation for small sets.
    let connections = estimated_connections(n_orb, dets[0].n_alpha(), dets[0].n_beta());
    let rows: Vec<Vec<(u32, f64)>> = if n <= 4 * connections {
        (0..n)
            .into_par_iter()
            .map(|i| {
                (0..n)
                    .filter(|&j| dets[i].excitation_degree(&dets[j]) <= 2)
                    .filter_map(|j| {
                        let v = slater_condon_bits(h, bits[i], bits[j]);
                        (v.abs() >= MATRIX_DROP_THRESHOLD).then_some((j as u32, v))
                    })
                    .collect()
            })
            .collect()
    } else {
        (0..n)
            .into_par_iter()
            .map(|i| {
                let mut row = Vec::new();
                for_each_connected(&dets[i], n_orb, |other| {
                    if let Some(&j) = index.get(&other.bits()) {
                        let v = slater_condon_bits(h, bits[i], bits[j]);
                        if v.abs() >= MATRIX_DROP_THRESHOLD {
                            row.push((j as u32, v));
                        }
                    }
                });
                row
            })
            .collect()
    };
    Ok(SubspaceProblem { dets: dets.to_vec(), matrix: CsrMatrix::from_rows(n, rows) })
}

fn estimated_connections(n_orb: usize, na: usize, nb: usize) -> usize {
    let (va, vb) = (n_orb - na, n_orb - nb);
    let pairs = |o: usize, v: usize| (o * o.saturating_sub(1) / 2) * (v * v.saturating_sub(1) / 2);
    1 + na * va + nb * vb + pairs(na, va) + pairs(nb, vb) + na * va * nb * vb
}

/// Visits `det` and every determinant reachable by a spin-conserving single
/// or double excitation.
fn for_each_connected(det: &Determinant, n_orb: usize, mut visit: impl FnMut(Determinant)) {
    let full = if n_orb == 64 { u64::MAX } else { (1u64 << n_orb) - 1 };
    let (a, b) = (det.alpha, det.beta);
    visit(*det);
    let singles = |occ: u64| -> Vec<u64> {
        let mut out = Vec::new();
        for i in set_bits(occ) {
            for v in set_bits(full & !occ) {
                out.push(occ ^ (1u64 << i) ^ (1u64 << v));
            }
        }
        out
    };
    let doubles = |occ: u64| -> Vec<u64> {
        let mut out = Vec::new();
        let occ_list: Vec<u32> = set_bits(occ).collect();
        let virt_list: Vec<u32> = set_bits(full & !occ).collect();
        for (x, &i) in occ_list.iter().enumerate() {
            for &j in &occ_list[x + 1..] {
                for (y, &p) in virt_list.iter().enumerate() {
                    for &q in &virt_list[y + 1..] {
                        out.push(occ ^ (1u64 << i) ^ (1u64 << j) ^ (1u64 << p) ^ (1u64 << q));
                    }
                }
            }
        }
        out
    };
    let sa = singles(a);
    let sb = singles(b);
    for &na in &sa {
        visit(Determinant::new(na, b));
    }
    for &nb in &sb {
        visit(Determinant::new(a, nb));
    }
    for na in doubles(a) {
        visit(Determinant::new(na, b));
    }
    for nb in doubles(b) {
        visit(Determinant::new(a, nb));
    }
    for &na in &sa {
        for &nb in &sb {
            visit(Determinant::new(na, nb));
        }
    }
}

/// Projection of a filtered effective Hamiltonian by applying each monomial
/// to each determinant. The result is symmetrized to exact Hermiticity.
pub fn project_operator(h: &EffectiveHamiltonian, dets: &[Determinant]) -> Result<SubspaceProblem<Complex64>> {
    let index = check_dets(dets)?;
    let n = dets.len();
    let bits: Vec<u64> = dets.iter().map(Determinant::bits).collect();
    // columns[j] holds (row, value) for H|det_j>.
    let columns: Vec<Vec<(u32, Complex64)>> = bits
        .par_iter()
        .map(|&x| {
            let mut col = Vec::new();
            for (m, c) in h.terms() {
                if let Some((y, sign)) = m.apply(x) {
                    if let Some(&i) = index.get(&y) {
                        col.push((i as u32, c * sign));
                    }
                }
            }
            col
        })
        .collect();
    let mut entries: HashMap<(u32, u32), Complex64> = HashMap::new();
    for (j, col) in columns.into_iter().enumerate() {
        for (i, v) in col {
            *entries.entry((i, j as u32)).or_default() += v;
        }
    }
    let mut rows: Vec<Vec<(u32, Complex64)>> = vec![Vec::new(); n];
    for i in 0..n {
        rows[i].push((i as u32, Complex64::new(h.constant(), 0.0)));
    }
    for (&(i, j), &v) in &entries {
        let mirror = entries.get(&(j, i)).copied().unwrap_or_default();
        let sym = (v + mirror.conj()) * 0.5;
        if sym.norm() >= MATRIX_DROP_THRESHOLD {
            rows[i as usize].push((j, sym));
        }
        if mirror == Complex64::default() && sym.norm() >= MATRIX_DROP_THRESHOLD {
            rows[j as usize].push((i, sym.conj()));
        }
    }
    Ok(SubspaceProblem { dets: dets.to_vec(), matrix: CsrMatrix::from_rows(n, rows) })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn popcount_enumeration() {
        assert_eq!(fixed_popcount_masks(4, 2), vec![0b0011, 0b0101, 0b0110, 0b1001, 0b1010, 0b1100]);
        assert_eq!(fixed_popcount_masks(3, 0), vec![0]);
        assert_eq!(sector_determinants(4, 2, 1).unwrap().len(), 24);
        assert_eq!(binomial(12, 6), 924);
    }

    #[test]
    fn sector_capacity() {
        assert!(matches!(sector_determinants(30, 15, 15), Err(Error::Capacity(_))));
    }

    #[test]
    fn excitation_degree_counts_orbitals() {
        let x = Determinant::new(0b0011, 0b0011);
        assert_eq!(x.excitation_degree(&x), 0);
        assert_eq!(x.excitation_degree(&Determinant::new(0b0101, 0b0011)), 1);
        assert_eq!(x.excitation_degree(&Determinant::new(0b1100, 0b0011)), 2);
        assert_eq!(x.excitation_degree(&Determinant::new(0b1100, 0b0101)), 3);
    }

    #[test]
    fn connected_set_is_complete() {
        let all = sector_determinants(4, 2, 2).unwrap();
        let d = Determinant::new(0b0011, 0b0011);
        let mut seen = Vec::new();
        for_each_connected(&d, 4, |o| seen.push(o));
        seen.sort();
        let expected: Vec<_> = all.iter().copied().filter(|o| d.excitation_degree(o) <= 2).collect();
        assert_eq!(seen, expected);
    }

    #[test]
    fn csr_sums_duplicates() {
        let m = CsrMatrix::from_rows(2, vec![vec![(1, 1.0), (0, 2.0), (1, 0.5)], vec![]]);
        assert_eq!(m.get(0, 1), 1.5);
        assert_eq!(m.nnz(), 2);
        let mut y = vec![0.0; 2];
        m.matvec(&[1.0, 2.0], &mut y);
        assert_eq!(y, vec![5.0, 0.0]);
    }
}
