//! Sample-based diagonalization: occupancies, configuration recovery and
//! the self-consistent batch loop.

use std::collections::BTreeMap;
use std::time::Instant;

use nalgebra::ComplexField;
use rand::distributions::WeightedIndex;
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::davidson::{davidson_ground, DavidsonConfig, GroundState};
use crate::error::{Error, Result};
use crate::hamiltonian::MolecularHamiltonian;
use crate::subspace::{sector_determinants, Determinant, SubspaceHamiltonian};

/// Mean occupation of each spin-orbital.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Occupancies {
    pub alpha: Vec<f64>,
    pub beta: Vec<f64>,
}

impl Occupancies {
    /// Every orbital filled to `n / n_orbitals`.
    pub fn uniform(n_orbitals: usize, n_alpha: usize, n_beta: usize) -> Self {
        let f = |k: usize| vec![k as f64 / n_orbitals.max(1) as f64; n_orbitals];
        Self { alpha: f(n_alpha), beta: f(n_beta) }
    }

    /// Count-weighted mean occupation of the sampled determinants.
    pub fn from_counts(n_orbitals: usize, counts: &BTreeMap<Determinant, usize>) -> Option<Self> {
        let total: usize = counts.values().sum();
        if total == 0 {
            return None;
        }
        let mut alpha = vec![0.0; n_orbitals];
        let mut beta = vec![0.0; n_orbitals];
        for (d, &c) in counts {
            let w = c as f64 / total as f64;
            for p in 0..n_orbitals {
                alpha[p] += w * ((d.alpha >> p) & 1) as f64;
                beta[p] += w * ((d.beta >> p) & 1) as f64;
            }
        }
        Some(Self { alpha, beta })
    }

    pub fn n_orbitals(&self) -> usize {
        self.alpha.len()
    }

    pub fn sums(&self) -> (f64, f64) {
        (self.alpha.iter().sum(), self.beta.iter().sum())
    }
}

/// `n_pσ = (1/K) Σ_k Σ_x |ψ^(k)_x|² occ(x, p, σ)` over batches.
pub fn compute_occupancies<T: ComplexField<RealField = f64> + Copy>(
    n_orbitals: usize,
    batches: &[(&[Determinant], &[T])],
) -> Occupancies {
    let mut alpha = vec![0.0; n_orbitals];
    let mut beta = vec![0.0; n_orbitals];
    if batches.is_empty() {
        return Occupancies { alpha, beta };
    }
    let k = batches.len() as f64;
    for (dets, psi) in batches {
        for (d, c) in dets.iter().zip(psi.iter()) {
            let w = c.modulus_squared() / k;
            for p in 0..n_orbitals {
                alpha[p] += w * ((d.alpha >> p) & 1) as f64;
                beta[p] += w * ((d.beta >> p) & 1) as f64;
            }
        }
    }
    Occupancies { alpha, beta }
}

/// Aggregates raw interleaved bitstrings into determinant counts.
pub fn count_samples(samples: &[u64]) -> BTreeMap<Determinant, usize> {
    let mut counts = BTreeMap::new();
    for &b in samples {
        *counts.entry(Determinant::from_bits(b)).or_insert(0) += 1;
    }
    counts
}

/// Drops determinants outside the `(n_alpha, n_beta)` sector.
pub fn sector_filter(counts: &BTreeMap<Determinant, usize>, n_alpha: usize, n_beta: usize) -> BTreeMap<Determinant, usize> {
    counts.iter().filter(|(d, _)| d.in_sector(n_alpha, n_beta)).map(|(d, c)| (*d, *c)).collect()
}

fn repair_spin(mut mask: u64, target: usize, occ: &[f64], rng: &mut ChaCha8Rng) -> u64 {
    let n = occ.len();
    while (mask.count_ones() as usize) != target {
        let surplus = mask.count_ones() as usize > target;
        let candidates: Vec<usize> = (0..n).filter(|&p| ((mask >> p) & 1 == 1) == surplus).collect();
        let weights: Vec<f64> = candidates
            .iter()
            .map(|&p| if surplus { 1.0 - occ[p] } else { occ[p] }.clamp(0.0, 1.0))
            .collect();
        let pick = match WeightedIndex::new(&weights) {
            Ok(dist) => candidates[dist.sample(rng)],
            Err(_) => candidates[rng.gen_range(0..candidates.len())],
        };
        mask ^= 1u64 << pick;
    }
    mask
}

/// Repairs out-of-sector samples by flipping orbitals: surplus electrons are
/// removed from occupied orbitals with weight `1 - n_pσ`, missing ones added
/// to empty orbitals with weight `n_pσ` (uniform when all weights vanish).
/// In-sector samples pass through. Counts are merged after repair.
pub fn configuration_recovery(
    samples: &BTreeMap<Determinant, usize>,
    occ: &Occupancies,
    n_alpha: usize,
    n_beta: usize,
    seed: u64,
) -> Result<BTreeMap<Determinant, usize>> {
    let n = occ.n_orbitals();
    if n_alpha > n || n_beta > n {
        return Err(Error::Recovery(format!("({n_alpha}, {n_beta}) electrons exceed {n} orbitals")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut out = BTreeMap::new();
    for (d, &c) in samples {
        if d.in_sector(n_alpha, n_beta) {
            *out.entry(*d).or_insert(0) += c;
            continue;
        }
        // Each shot is an independent draw.
        for _ in 0..c {
            let alpha = repair_spin(d.alpha, n_alpha, &occ.alpha, &mut rng);
            let beta = repair_spin(d.beta, n_beta, &occ.beta, &mut rng);
            *out.entry(Determinant::new(alpha, beta)).or_insert(0) += 1;
        }
    }
    Ok(out)
}

/// Up to `k` batches of at most `d` determinants by count-weighted sampling
/// without replacement. When everything fits in one batch a single batch
/// holding all determinants is returned.
pub fn assemble_batches(
    counts: &BTreeMap<Determinant, usize>,
    n_batches: usize,
    batch_size: usize,
    seed: u64,
) -> Result<Vec<Vec<Determinant>>> {
    if counts.is_empty() {
        return Err(Error::InvalidArgument("no determinants to batch".into()));
    }
    if n_batches == 0 || batch_size == 0 {
        return Err(Error::InvalidArgument("batch count and size must be positive".into()));
    }
    let pool: Vec<(Determinant, usize)> = counts.iter().map(|(d, c)| (*d, *c)).collect();
    if pool.len() <= batch_size {
        return Ok(vec![pool.into_iter().map(|(d, _)| d).collect()]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut batches = Vec::with_capacity(n_batches);
    for _ in 0..n_batches {
        let mut batch: Vec<Determinant> = pool
            .choose_multiple_weighted(&mut rng, batch_size, |(_, c)| *c as f64)
            .map_err(|e| Error::InvalidArgument(format!("batch sampling failed: {e}")))?
            .map(|(d, _)| *d)
            .collect();
        batch.sort();
        batches.push(batch);
    }
    Ok(batches)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SqdConfig {
    pub n_batches: usize,
    pub batch_size: usize,
    pub max_rounds: usize,
    pub energy_tol: f64,
    pub seed: u64,
    pub davidson: DavidsonConfig,
}

impl Default for SqdConfig {
    fn default() -> Self {
        Self { n_batches: 3, batch_size: 200, max_rounds: 10, energy_tol: 1e-6, seed: 0, davidson: DavidsonConfig::default() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RoundDiagnostics {
    pub round: usize,
    pub batch_energies: Vec<f64>,
    pub subspace_dims: Vec<usize>,
    pub occupancies: Occupancies,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SqdResult {
    pub energy: f64,
    pub occupancies: Occupancies,
    pub rounds: Vec<RoundDiagnostics>,
    pub timings: SolveTimings,
}

/// Seconds spent per solver phase, summed over batches and rounds.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct SolveTimings {
    pub recovery: f64,
    pub projection: f64,
    pub davidson: f64,
}

/// Lowest eigenpair of `h` projected on `dets`.
pub fn subspace_ground<H: SubspaceHamiltonian>(
    h: &H,
    dets: &[Determinant],
    cfg: &DavidsonConfig,
) -> Result<GroundState<H::Scalar>> {
    let problem = h.project(dets)?;
    davidson_ground(&problem, cfg)
}

/// Runs `cfg.n_batches` diagonalizations per round, each on a batch of
/// recovered configurations, until the minimum batch energy moves less than
/// `cfg.energy_tol` or `cfg.max_rounds` is reached.
pub fn sqd_energy<H: SubspaceHamiltonian>(
    h: &H,
    samples: &BTreeMap<Determinant, usize>,
    n_alpha: usize,
    n_beta: usize,
    cfg: &SqdConfig,
) -> Result<SqdResult> {
    if samples.is_empty() {
        return Err(Error::InvalidArgument("sqd_energy needs at least one sample".into()));
    }
    let n = h.n_orbitals();
    let in_sector = sector_filter(samples, n_alpha, n_beta);
    let mut occ = Occupancies::from_counts(n, &in_sector).unwrap_or_else(|| Occupancies::uniform(n, n_alpha, n_beta));
    let mut rounds = Vec::new();
    let mut previous: Option<f64> = None;
    let mut energy = f64::INFINITY;
    let mut timings = SolveTimings::default();
    for round in 0..cfg.max_rounds.max(1) {
        let round_seed = cfg.seed.wrapping_add((round as u64).wrapping_mul(0x9e37_79b9_7f4a_7c15));
        let t = Instant::now();
        let recovered = configuration_recovery(samples, &occ, n_alpha, n_beta, round_seed)?;
        let batches = assemble_batches(&recovered, cfg.n_batches, cfg.batch_size, round_seed ^ 0xb5)?;
        timings.recovery += t.elapsed().as_secs_f64();
        let solved: Vec<(GroundState<H::Scalar>, f64, f64)> = batches
            .par_iter()
            .map(|b| {
                let t = Instant::now();
                let problem = h.project(b)?;
                let projection = t.elapsed().as_secs_f64();
                let t = Instant::now();
                let g = davidson_ground(&problem, &cfg.davidson)?;
                Ok((g, projection, t.elapsed().as_secs_f64()))
            })
            .collect::<Result<_>>()?;
        let mut grounds = Vec::with_capacity(solved.len());
        for (g, projection, davidson) in solved {
            timings.projection += projection;
            timings.davidson += davidson;
            grounds.push(g);
        }
        let views: Vec<(&[Determinant], &[H::Scalar])> =
            batches.iter().zip(&grounds).map(|(b, g)| (b.as_slice(), g.vector.as_slice())).collect();
        occ = compute_occupancies(n, &views);
        let batch_energies: Vec<f64> = grounds.iter().map(|g| g.energy).collect();
        energy = batch_energies.iter().copied().fold(f64::INFINITY, f64::min);
        rounds.push(RoundDiagnostics {
            round,
            batch_energies,
            subspace_dims: batches.iter().map(Vec::len).collect(),
            occupancies: occ.clone(),
        });
        if let Some(p) = previous {
            if (energy - p).abs() < cfg.energy_tol {
                break;
            }
        }
        previous = Some(energy);
    }
    Ok(SqdResult { energy, occupancies: occ, rounds, timings })
}

/// Ground state over the whole `(n_alpha, n_beta)` sector.
pub fn fci_ground(h: &MolecularHamiltonian, cfg: &DavidsonConfig) -> Result<(Vec<Determinant>, GroundState<f64>)> {
    let dets = sector_determinants(h.n_orbitals(), h.n_alpha(), h.n_beta())?;
    let g = subspace_ground(h, &dets, cfg)?;
    Ok((dets, g))
}

pub fn fci_energy(h: &MolecularHamiltonian) -> Result<f64> {
    Ok(fci_ground(h, &DavidsonConfig::default())?.1.energy)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_determinant_occupancies() {
        let d = [Determinant::new(0b01, 0b10)];
        let occ = compute_occupancies(2, &[(&d[..], &[1.0][..])]);
        assert_eq!(occ.alpha, vec![1.0, 0.0]);
        assert_eq!(occ.beta, vec![0.0, 1.0]);
    }

    #[test]
    fn recovery_passes_in_sector_samples() {
        let mut s = BTreeMap::new();
        s.insert(Determinant::new(0b01, 0b01), 3);
        s.insert(Determinant::new(0b10, 0b01), 1);
        let occ = Occupancies::uniform(2, 1, 1);
        assert_eq!(configuration_recovery(&s, &occ, 1, 1, 9).unwrap(), s);
        assert!(configuration_recovery(&s, &occ, 3, 1, 9).is_err());
    }

    #[test]
    fn recovery_repairs_surplus() {
        let mut s = BTreeMap::new();
        s.insert(Determinant::new(0b011, 0b001), 10);
        let occ = Occupancies { alpha: vec![1.0, 0.0, 0.0], beta: vec![1.0, 0.0, 0.0] };
        let out = configuration_recovery(&s, &occ, 1, 1, 1).unwrap();
        // Orbital 0 has weight 0 for removal, so orbital 1 always loses it.
        assert_eq!(out.len(), 1);
        assert_eq!(out[&Determinant::new(0b001, 0b001)], 10);
    }

    #[test]
    fn single_batch_when_everything_fits() {
        let mut s = BTreeMap::new();
        for a in 0..5u64 {
            s.insert(Determinant::new(1 << a, 1), 1);
        }
        let b = assemble_batches(&s, 3, 10, 0).unwrap();
        assert_eq!(b.len(), 1);
        assert_eq!(b[0].len(), 5);
        let b = assemble_batches(&s, 3, 2, 0).unwrap();
        assert_eq!(b.len(), 3);
        assert!(b.iter().all(|x| x.len() == 2));
    }
}
