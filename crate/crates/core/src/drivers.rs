//! End-to-end methods: SQDOpt, SQD-Z, VQE, partial VQE, and the HF and FCI
//! references.

use std::collections::BTreeMap;
use std::fmt;
use std::path::PathBuf;
use std::str::FromStr;
use std::time::Instant;

use log::warn;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::basis::MeasurementBasis;
use crate::error::{Error, Result};
use crate::fermion::EffectiveHamiltonian;
use crate::hamiltonian::{ActiveSpaceSpec, MolecularHamiltonian};
use crate::jordan_wigner::{jw_map, reverse_jw_capped};
use crate::lucj::{prepare_lucj, JastrowMask, LucjParameters};
use crate::measurement::{greedy_group, measurable_terms, select_bases};
use crate::optimizer::{minimize, CostValue, OptimizationTrace, OptimizerConfig, StopReason};
use crate::pauli::PauliSum;
use crate::sqd::{count_samples, fci_energy, sector_filter, sqd_energy, SqdConfig};
use crate::statevector::{rhf_bits, rhf_state};
use crate::subspace::{sector_determinants, Determinant, SubspaceHamiltonian};

/// Longest fermionic monomial generated when mapping rotated Pauli sums
/// back; the filter keeps nothing longer.
pub const REVERSE_JW_MAX_LEN: u32 = 4;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Method {
    Hf,
    Fci,
    Vqe,
    PartialVqe,
    Sqdz,
    Sqdopt,
}

impl Method {
    pub const ALL: [Method; 6] = [Method::Hf, Method::Fci, Method::Vqe, Method::PartialVqe, Method::Sqdz, Method::Sqdopt];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Hf => "hf",
            Method::Fci => "fci",
            Method::Vqe => "vqe",
            Method::PartialVqe => "partial-vqe",
            Method::Sqdz => "sqdz",
            Method::Sqdopt => "sqdopt",
        }
    }

    pub fn is_optimizing(self) -> bool {
        matches!(self, Method::Vqe | Method::PartialVqe | Method::Sqdz | Method::Sqdopt)
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Method::ALL
            .into_iter()
            .find(|m| m.as_str() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown method '{s}'")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct AnsatzConfig {
    pub layers: usize,
    /// Jastrow pairs `(P, R)` over qubits; `None` selects the default
    /// same-mode plus nearest-neighbour mask.
    pub mask: Option<Vec<(usize, usize)>>,
    pub init_scale: f64,
    pub init_seed: u64,
}

impl Default for AnsatzConfig {
    fn default() -> Self {
        Self { layers: 1, mask: None, init_scale: 0.1, init_seed: 0 }
    }
}

impl AnsatzConfig {
    pub fn jastrow_mask(&self, n_qubits: usize) -> Result<JastrowMask> {
        match &self.mask {
            None => Ok(JastrowMask::adjacent(n_qubits)),
            Some(pairs) => JastrowMask::from_pairs(n_qubits, pairs.clone()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunSpec {
    pub fcidump: PathBuf,
    #[serde(default)]
    pub frozen: Vec<usize>,
    pub method: Method,
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default = "default_shots")]
    pub shots: usize,
    #[serde(default)]
    pub ansatz: AnsatzConfig,
    #[serde(default)]
    pub optimizer: OptimizerConfig,
    #[serde(default)]
    pub sqd: SqdConfig,
    #[serde(default)]
    pub seed: u64,
    /// Known FCI energy; computed when absent.
    #[serde(default)]
    pub fci_reference: Option<f64>,
}

fn default_k() -> usize {
    5
}

fn default_shots() -> usize {
    10_000
}

impl RunSpec {
    pub fn new(fcidump: impl Into<PathBuf>, method: Method) -> Self {
        Self {
            fcidump: fcidump.into(),
            frozen: Vec::new(),
            method,
            k: default_k(),
            shots: default_shots(),
            ansatz: AnsatzConfig::default(),
            optimizer: OptimizerConfig::default(),
            sqd: SqdConfig::default(),
            seed: 0,
            fci_reference: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if matches!(self.method, Method::Sqdopt | Method::PartialVqe) && self.k == 0 {
            return Err(Error::InvalidArgument(format!("method {} needs k >= 1", self.method)));
        }
        if matches!(self.method, Method::Sqdopt | Method::Sqdz) && self.shots == 0 {
            return Err(Error::InvalidArgument("shots must be positive".into()));
        }
        if self.method.is_optimizing() && self.ansatz.layers == 0 {
            return Err(Error::InvalidArgument("ansatz needs at least one layer".into()));
        }
        Ok(())
    }

    pub fn load_hamiltonian(&self) -> Result<MolecularHamiltonian> {
        MolecularHamiltonian::from_fcidump_file(&self.fcidump)?.apply_frozen_orbitals(&ActiveSpaceSpec::new(self.frozen.clone()))
    }
}

/// Operator diagonalized for one measurement basis.
#[derive(Debug, Clone)]
pub enum BasisOperator {
    /// The molecular Hamiltonian itself (all-Z basis).
    Molecular,
    Filtered { operator: EffectiveHamiltonian, discarded_weight: f64 },
}

/// How per-basis samples are obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SamplingMode {
    Shots,
    /// Every sector determinant, as if sampled once.
    FullSector,
}

/// Wall-clock seconds per phase, summed over calls.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct PhaseTimings {
    pub state_prep: f64,
    pub sampling: f64,
    /// Configuration recovery and batch assembly.
    pub recovery: f64,
    pub projection: f64,
    pub davidson: f64,
}

impl PhaseTimings {
    fn add(&mut self, other: &PhaseTimings) {
        self.state_prep += other.state_prep;
        self.sampling += other.sampling;
        self.recovery += other.recovery;
        self.projection += other.projection;
        self.davidson += other.davidson;
    }

    pub fn total(&self) -> f64 {
        self.state_prep + self.sampling + self.recovery + self.projection + self.davidson
    }
}

/// Everything a cost evaluation needs that does not depend on parameters.
#[derive(Debug, Clone)]
pub struct SqdOptContext {
    pub hamiltonian: MolecularHamiltonian,
    pub pauli: PauliSum,
    pub bases: Vec<MeasurementBasis>,
    pub operators: Vec<BasisOperator>,
    pub shots: usize,
    pub seed: u64,
    pub sqd: SqdConfig,
    pub mode: SamplingMode,
    pub n_layers: usize,
    pub mask: JastrowMask,
}

/// Filtered fermionic form of `pauli` rotated into `basis`.
pub fn rotated_effective_hamiltonian(pauli: &PauliSum, basis: &MeasurementBasis) -> Result<(EffectiveHamiltonian, f64)> {
    let rotated = pauli.conjugate_by_basis(basis)?;
    Ok(reverse_jw_capped(&rotated, Some(REVERSE_JW_MAX_LEN)).filter_physical())
}

impl SqdOptContext {
    pub fn new(hamiltonian: MolecularHamiltonian, bases: Vec<MeasurementBasis>, spec: &RunSpec) -> Result<Self> {
        let pauli = jw_map(&hamiltonian);
        let operators = bases
            .par_iter()
            .map(|b| {
                if b.is_all_z() {
                    Ok(BasisOperator::Molecular)
                } else {
                    let (operator, discarded_weight) = rotated_effective_hamiltonian(&pauli, b)?;
                    Ok(BasisOperator::Filtered { operator, discarded_weight })
                }
            })
            .collect::<Result<Vec<_>>>()?;
        let mask = spec.ansatz.jastrow_mask(hamiltonian.n_qubits())?;
        Ok(Self {
            pauli,
            bases,
            operators,
            shots: spec.shots,
            seed: spec.seed,
            sqd: SqdConfig { max_rounds: 1, ..spec.sqd },
            mode: SamplingMode::Shots,
            n_layers: spec.ansatz.layers,
            mask,
            hamiltonian,
        })
    }

    pub fn n_params(&self) -> usize {
        LucjParameters::n_params(self.hamiltonian.n_orbitals(), self.n_layers, &self.mask)
    }

    pub fn parameters(&self, x: &[f64]) -> Result<LucjParameters> {
        LucjParameters::from_vector(self.hamiltonian.n_orbitals(), self.n_layers, self.mask.clone(), x)
    }
}

/// Deterministic seed for one (iteration, basis) pair.
pub fn split_seed(master: u64, iteration: u64, basis: u64) -> u64 {
    let mut z = master ^ iteration.wrapping_mul(0x9e37_79b9_7f4a_7c15) ^ basis.wrapping_mul(0xc2b2_ae3d_27d4_eb4f);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CostEvaluation {
    pub cost: f64,
    pub per_basis: Vec<f64>,
    /// In-sector unique determinants per basis.
    pub subspace_dims: Vec<usize>,
    pub timings: PhaseTimings,
}

fn basis_energy<H: SubspaceHamiltonian>(
    h: &H,
    counts: &BTreeMap<Determinant, usize>,
    n_alpha: usize,
    n_beta: usize,
    cfg: &SqdConfig,
    timings: &mut PhaseTimings,
) -> Result<f64> {
    let r = sqd_energy(h, counts, n_alpha, n_beta, cfg)?;
    timings.recovery += r.timings.recovery;
    timings.projection += r.timings.projection;
    timings.davidson += r.timings.davidson;
    Ok(r.energy)
}

/// Mean over bases of the subspace ground energy of each basis operator,
/// sampled from the ansatz state rotated into that basis.
pub fn sqdopt_cost(params: &LucjParameters, ctx: &SqdOptContext, iteration: u64) -> Result<CostEvaluation> {
    let h = &ctx.hamiltonian;
    let (na, nb) = (h.n_alpha(), h.n_beta());
    let t0 = Instant::now();
    let state = prepare_lucj(params, na, nb)?;
    let prep = t0.elapsed().as_secs_f64();
    let full_sector = match ctx.mode {
        SamplingMode::FullSector => {
            Some(sector_determinants(h.n_orbitals(), na, nb)?.into_iter().map(|d| (d, 1usize)).collect::<BTreeMap<_, _>>())
        }
        SamplingMode::Shots => None,
    };
    let results: Vec<(f64, usize, PhaseTimings)> = ctx
        .bases
        .par_iter()
        .zip(&ctx.operators)
        .enumerate()
        .map(|(ib, (basis, op))| {
            let mut timings = PhaseTimings::default();
            let t = Instant::now();
            let counts = match &full_sector {
                Some(all) => all.clone(),
                None => {
                    let rotated = state.rotate_for_measurement(basis)?;
                    let shots = rotated.sample(ctx.shots, split_seed(ctx.seed, iteration, ib as u64))?;
                    count_samples(&shots)
                }
            };
            timings.sampling = t.elapsed().as_secs_f64();
            let cfg = SqdConfig { seed: split_seed(ctx.seed ^ 0x0d1a, iteration, ib as u64), ..ctx.sqd };
            let kept = match op {
                // Z-basis samples go through recovery inside the SQD loop.
                BasisOperator::Molecular => counts,
                BasisOperator::Filtered { .. } => sector_filter(&counts, na, nb),
            };
            let dim = sector_filter(&kept, na, nb).len();
            let energy = if kept.is_empty() {
                let hf = Determinant::from_bits(rhf_bits(na, nb));
                warn!("basis {basis}: no in-sector samples; using the HF diagonal element");
                match op {
                    BasisOperator::Molecular => h.diagonal_element(&hf),
                    BasisOperator::Filtered { operator, .. } => operator.diagonal_element(&hf),
                }
            } else {
                match op {
                    BasisOperator::Molecular => basis_energy(h, &kept, na, nb, &cfg, &mut timings)?,
                    BasisOperator::Filtered { operator, .. } => basis_energy(operator, &kept, na, nb, &cfg, &mut timings)?,
                }
            };
            Ok((energy, dim, timings))
        })
        .collect::<Result<_>>()?;
    let mut timings = PhaseTimings { state_prep: prep, ..Default::default() };
    for (_, _, t) in &results {
        timings.add(t);
    }
    let per_basis: Vec<f64> = results.iter().map(|r| r.0).collect();
    let cost = per_basis.iter().sum::<f64>() / per_basis.len() as f64;
    Ok(CostEvaluation { cost, per_basis, subspace_dims: results.iter().map(|r| r.1).collect(), timings })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BasisDiagnostics {
    pub basis: String,
    pub discarded_weight: f64,
    pub final_energy: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunTimings {
    pub setup: f64,
    pub optimization: f64,
    pub final_evaluation: f64,
    pub phases: PhaseTimings,
    pub n_evaluations: usize,
}

impl RunTimings {
    /// Optimization time not spent inside the timed cost phases.
    pub fn optimizer_overhead(&self) -> f64 {
        (self.optimization - self.phases.total()).max(0.0)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub spec: RunSpec,
    pub n_qubits: usize,
    pub e_final: f64,
    pub e_hf: f64,
    pub e_fci: Option<f64>,
    pub percent_error: Option<f64>,
    pub parameters: Vec<f64>,
    pub best_cost: Option<f64>,
    pub stop: Option<StopReason>,
    pub bases: Vec<BasisDiagnostics>,
    pub trace: Option<OptimizationTrace>,
    pub timings: RunTimings,
}

pub fn percent_error(e: f64, e_fci: f64) -> f64 {
    100.0 * (e - e_fci) / e_fci.abs()
}

pub fn run_method(spec: &RunSpec) -> Result<RunResult> {
    let h = spec.load_hamiltonian()?;
    run_method_on(&h, spec)
}

fn hf_energy(h: &MolecularHamiltonian, pauli: &PauliSum) -> Result<f64> {
    rhf_state(h.n_orbitals(), h.n_alpha(), h.n_beta())?.expectation(pauli)
}

/// Runs `spec.method` on an already loaded active-space Hamiltonian.
pub fn run_method_on(h: &MolecularHamiltonian, spec: &RunSpec) -> Result<RunResult> {
    spec.validate()?;
    let t_setup = Instant::now();
    let pauli = jw_map(h);
    let e_hf = hf_energy(h, &pauli)?;
    let e_fci = match spec.fci_reference {
        Some(e) => Some(e),
        None => match fci_energy(h) {
            Ok(e) => Some(e),
            Err(Error::Capacity(msg)) if spec.method != Method::Fci => {
                warn!("FCI reference unavailable: {msg}");
                None
            }
            Err(e) => return Err(e),
        },
    };
    let mut result = RunResult {
        spec: spec.clone(),
        n_qubits: h.n_qubits(),
        e_final: e_hf,
        e_hf,
        e_fci,
        percent_error: None,
        parameters: Vec::new(),
        best_cost: None,
        stop: None,
        bases: Vec::new(),
        trace: None,
        timings: RunTimings { setup: 0.0, optimization: 0.0, final_evaluation: 0.0, phases: PhaseTimings::default(), n_evaluations: 0 },
    };
    match spec.method {
        Method::Hf => {}
        Method::Fci => result.e_final = e_fci.expect("computed above"),
        Method::Vqe | Method::PartialVqe => {
            let target = if spec.method == Method::Vqe {
                pauli.clone()
            } else {
                let bases = select_bases(&greedy_group(&pauli), spec.k)?;
                result.bases =
                    bases.iter().map(|b| BasisDiagnostics { basis: b.to_string(), discarded_weight: 0.0, final_energy: None }).collect();
                measurable_terms(&pauli, &bases)
            };
            let mask = spec.ansatz.jastrow_mask(h.n_qubits())?;
            let x0 = LucjParameters::random(h.n_orbitals(), spec.ansatz.layers, mask.clone(), spec.ansatz.init_scale, spec.ansatz.init_seed)
                .to_vector();
            result.timings.setup = t_setup.elapsed().as_secs_f64();
            let t_opt = Instant::now();
            let cost = |x: &[f64]| -> Result<CostValue> {
                let p = LucjParameters::from_vector(h.n_orbitals(), spec.ansatz.layers, mask.clone(), x)?;
                Ok(prepare_lucj(&p, h.n_alpha(), h.n_beta())?.expectation(&target)?.into())
            };
            let out = minimize(cost, &x0, &spec.optimizer).map_err(|f| f.error)?;
            result.timings.optimization = t_opt.elapsed().as_secs_f64();
            result.timings.n_evaluations = out.trace.len();
            result.best_cost = Some(out.cost);
            result.stop = Some(out.stop);
            let t_fin = Instant::now();
            let p = LucjParameters::from_vector(h.n_orbitals(), spec.ansatz.layers, mask, &out.x)?;
            result.e_final = prepare_lucj(&p, h.n_alpha(), h.n_beta())?.expectation(&pauli)?;
            result.timings.final_evaluation = t_fin.elapsed().as_secs_f64();
            result.parameters = out.x;
            result.trace = Some(out.trace);
        }
        Method::Sqdz | Method::Sqdopt => {
            let bases = if spec.method == Method::Sqdz {
                vec![MeasurementBasis::all_z(h.n_qubits())]
            } else {
                select_bases(&greedy_group(&pauli), spec.k)?
            };
            let ctx = SqdOptContext::new(h.clone(), bases, spec)?;
            let x0 = LucjParameters::random(h.n_orbitals(), spec.ansatz.layers, ctx.mask.clone(), spec.ansatz.init_scale, spec.ansatz.init_seed)
                .to_vector();
            result.timings.setup = t_setup.elapsed().as_secs_f64();
            let t_opt = Instant::now();
            let mut phases = PhaseTimings::default();
            let mut iteration = 0u64;
            let cost = |x: &[f64]| -> Result<CostValue> {
                let p = ctx.parameters(x)?;
                let ev = sqdopt_cost(&p, &ctx, iteration)?;
                iteration += 1;
                phases.add(&ev.timings);
                Ok(CostValue { value: ev.cost, components: ev.per_basis })
            };
            let out = minimize(cost, &x0, &spec.optimizer).map_err(|f| f.error)?;
            result.timings.optimization = t_opt.elapsed().as_secs_f64();
            result.timings.phases = phases;
            result.timings.n_evaluations = out.trace.len();
            result.best_cost = Some(out.cost);
            result.stop = Some(out.stop);
            let best_components = out.trace.best().map(|r| r.components.clone()).unwrap_or_default();
            result.bases = ctx
                .bases
                .iter()
                .zip(&ctx.operators)
                .enumerate()
                .map(|(i, (b, op))| BasisDiagnostics {
                    basis: b.to_string(),
                    discarded_weight: match op {
                        BasisOperator::Molecular => 0.0,
                        BasisOperator::Filtered { discarded_weight, .. } => *discarded_weight,
                    },
                    final_energy: best_components.get(i).copied(),
                })
                .collect();
            let t_fin = Instant::now();
            let p = ctx.parameters(&out.x)?;
            result.e_final = prepare_lucj(&p, h.n_alpha(), h.n_beta())?.expectation(&pauli)?;
            result.timings.final_evaluation = t_fin.elapsed().as_secs_f64();
            result.parameters = out.x;
            result.trace = Some(out.trace);
        }
    }
    if result.timings.setup == 0.0 {
        result.timings.setup = t_setup.elapsed().as_secs_f64();
    }
    result.percent_error = e_fci.map(|f| percent_error(result.e_final, f));
    Ok(result)
}

/// Energy of a stored parameter vector against the full Hamiltonian.
pub fn evaluate_parameters(h: &MolecularHamiltonian, ansatz: &AnsatzConfig, x: &[f64]) -> Result<f64> {
    let mask = ansatz.jastrow_mask(h.n_qubits())?;
    let p = LucjParameters::from_vector(h.n_orbitals(), ansatz.layers, mask, x)?;
    prepare_lucj(&p, h.n_alpha(), h.n_beta())?.expectation(&jw_map(h))
}

/// One fixture of a bond-length sweep.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepFixture {
    pub label: String,
    pub bond_length: f64,
    pub fcidump: PathBuf,
    pub fci_reference: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepRow {
    pub label: String,
    pub bond_length: f64,
    pub method: Method,
    pub energy: Option<f64>,
    pub e_fci: Option<f64>,
    pub percent_error: Option<f64>,
    /// SQDOpt minus VQE percent error at this fixture, on SQDOpt rows.
    pub sqdopt_minus_vqe: Option<f64>,
    pub failure: Option<String>,
}

/// Runs each method on each fixture. Failures become rows with a message.
pub fn bond_sweep(template: &RunSpec, fixtures: &[SweepFixture], methods: &[Method]) -> Vec<SweepRow> {
    let mut rows = Vec::new();
    for fx in fixtures {
        let start = rows.len();
        for &method in methods {
            let spec = RunSpec { fcidump: fx.fcidump.clone(), method, fci_reference: fx.fci_reference, ..template.clone() };
            let row = match run_method(&spec) {
                Ok(r) => SweepRow {
                    label: fx.label.clone(),
                    bond_length: fx.bond_length,
                    method,
                    energy: Some(r.e_final),
                    e_fci: r.e_fci,
                    percent_error: r.percent_error,
                    sqdopt_minus_vqe: None,
                    failure: None,
                },
                Err(e) => SweepRow {
                    label: fx.label.clone(),
                    bond_length: fx.bond_length,
                    method,
                    energy: None,
                    e_fci: None,
                    percent_error: None,
                    sqdopt_minus_vqe: None,
                    failure: Some(e.to_string()),
                },
            };
            rows.push(row);
        }
        let err_of = |m: Method, rows: &[SweepRow]| rows.iter().find(|r| r.method == m).and_then(|r| r.percent_error);
        let (s, v) = (err_of(Method::Sqdopt, &rows[start..]), err_of(Method::Vqe, &rows[start..]));
        if let (Some(s), Some(v)) = (s, v) {
            for r in rows[start..].iter_mut().filter(|r| r.method == Method::Sqdopt) {
                r.sqdopt_minus_vqe = Some(s - v);
            }
        }
    }
    rows
}
