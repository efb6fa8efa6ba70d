use std::collections::BTreeMap;
use std::fs::File;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use log::info;
use serde::Serialize;
use sqdopt_core::drivers::{evaluate_parameters, percent_error, AnsatzConfig, SweepFixture};
use sqdopt_core::measurement::diagonal_in;
use sqdopt_core::{
    bond_sweep, fci_energy, greedy_group, jw_map, offdiagonal_ratio, plan_table, rhf_state, run_method_on, select_bases,
    ActiveSpaceSpec, Error as CoreError, Method, MolecularHamiltonian, RunSpec,
};

use crate::args::*;
use crate::artifacts::{fixture_label, run_dir_name, write_run, OutputLock, ResultFile};
use crate::config::{file_hash, ExperimentConfig};
use crate::error::{CliError, CliResult};

pub const OUTPUT_DIR_ENV: &str = "SQDOPT_OUTPUT_DIR";

pub fn run(cmd: Command) -> CliResult<()> {
    match cmd {
        Command::Parse(a) => parse(a),
        Command::Plan(a) => plan(a),
        Command::Optimize(a) => optimize(a),
        Command::Evaluate(a) => evaluate(a),
        Command::Sweep(a) => sweep(a),
        Command::Benchmark(a) => benchmark(a),
        Command::Compare(a) => compare(a),
    }
}

fn load(path: &Path, frozen: &[usize]) -> CliResult<MolecularHamiltonian> {
    let h = MolecularHamiltonian::from_fcidump_file(path)?;
    Ok(h.apply_frozen_orbitals(&ActiveSpaceSpec::new(frozen.to_vec()))?)
}

fn csv_writer(output: Option<&Path>) -> CliResult<csv::Writer<Box<dyn Write>>> {
    let sink: Box<dyn Write> = match output {
        Some(p) => Box::new(File::create(p).map_err(CliError::io(p))?),
        None => Box::new(std::io::stdout().lock()),
    };
    Ok(csv::Writer::from_writer(sink))
}

fn finish(mut w: csv::Writer<Box<dyn Write>>, output: Option<&Path>) -> CliResult<()> {
    w.flush().map_err(CliError::io(output.unwrap_or(Path::new("<stdout>"))))
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:.10}")).unwrap_or_default()
}

fn median(mut v: Vec<f64>) -> Option<f64> {
    if v.is_empty() {
        return None;
    }
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 { v[n / 2] } else { 0.5 * (v[n / 2 - 1] + v[n / 2]) })
}

fn min(v: &[f64]) -> Option<f64> {
    v.iter().copied().min_by(f64::total_cmp)
}

/// FCI energy, or `None` when the sector is too large to diagonalize.
fn fci_or_none(h: &MolecularHamiltonian) -> CliResult<Option<f64>> {
    match fci_energy(h) {
        Ok(e) => Ok(Some(e)),
        Err(CoreError::Capacity(msg)) => {
            log::warn!("FCI reference unavailable: {msg}");
            Ok(None)
        }
        Err(e) => Err(e.into()),
    }
}

#[derive(Debug, Serialize)]
struct Summary {
    fixture: String,
    orbitals: usize,
    alpha: usize,
    beta: usize,
    qubits: usize,
    pauli_terms: usize,
    offdiagonal_ratio: f64,
    core_energy: f64,
}

fn parse(a: ParseArgs) -> CliResult<()> {
    let h = load(&a.fixture.fcidump, &a.fixture.freeze)?;
    let p = jw_map(&h);
    let s = Summary {
        fixture: fixture_label(&a.fixture.fcidump),
        orbitals: h.n_orbitals(),
        alpha: h.n_alpha(),
        beta: h.n_beta(),
        qubits: h.n_qubits(),
        pauli_terms: p.len(),
        offdiagonal_ratio: offdiagonal_ratio(&p)?,
        core_energy: h.core_energy(),
    };
    if a.json {
        println!("{}", serde_json::to_string_pretty(&s).expect("summary serializes"));
    } else {
        println!("fixture: {}", s.fixture);
        println!("orbitals: {}", s.orbitals);
        println!("electrons: {} alpha, {} beta", s.alpha, s.beta);
        println!("qubits: {}", s.qubits);
        println!("pauli_terms: {}", s.pauli_terms);
        println!("offdiagonal_ratio: {:.6}", s.offdiagonal_ratio);
        println!("core_energy: {:.10}", s.core_energy);
    }
    Ok(())
}

fn plan(a: PlanArgs) -> CliResult<()> {
    let h = load(&a.fixture.fcidump, &a.fixture.freeze)?;
    let pauli = jw_map(&h);
    let groups = greedy_group(&pauli);
    let selected = a.k.map(|k| select_bases(&groups, k)).transpose()?.unwrap_or_default();
    let mut w = csv_writer(None)?;
    w.write_record(["basis", "n_terms", "weight", "cumulative_fraction", "selected"])?;
    for row in plan_table(&groups) {
        w.write_record([
            row.basis.to_string(),
            row.n_terms.to_string(),
            format!("{:.10}", row.weight),
            format!("{:.6}", row.cumulative_fraction),
            selected.contains(&row.basis).to_string(),
        ])?;
    }
    // A forced basis that is not a group gets a row of the terms it diagonalizes.
    for basis in selected.iter().filter(|b| groups.iter().all(|g| g.basis != **b)) {
        let terms: Vec<f64> =
            pauli.iter().filter(|(s, _)| !s.is_identity() && diagonal_in(s, basis)).map(|(_, c)| c.norm()).collect();
        w.write_record([basis.to_string(), terms.len().to_string(), format!("{:.10}", terms.iter().sum::<f64>()), String::new(), "true".into()])?;
    }
    finish(w, None)?;
    eprintln!("{} groups", groups.len());
    Ok(())
}

fn apply_overrides(cfg: &mut ExperimentConfig, o: &RunOverrides) {
    if let Some(k) = o.k {
        cfg.k = k;
    }
    if let Some(s) = o.shots {
        cfg.shots = s;
    }
    if let Some(m) = o.max_iter {
        cfg.optimizer.max_iter = m;
    }
    if let Some(r) = o.rho_beg {
        cfg.optimizer.rho_beg = r;
    }
    if let Some(r) = o.rho_end {
        cfg.optimizer.rho_end = r;
    }
    if let Some(l) = o.layers {
        cfg.ansatz.layers = l;
    }
}

pub fn resolve_config(a: &OptimizeArgs) -> CliResult<ExperimentConfig> {
    let mut cfg = match &a.config {
        Some(path) => ExperimentConfig::load(path)?,
        None => {
            let fcidump = a.fcidump.clone().ok_or_else(|| CliError::Config("--fcidump or --config is required".into()))?;
            let methods = a.methods.clone().ok_or_else(|| CliError::Config("--method or --config is required".into()))?;
            ExperimentConfig::new(fcidump, methods)
        }
    };
    if let Some(f) = &a.fcidump {
        cfg.fcidump = f.clone();
    }
    if let Some(f) = &a.freeze {
        cfg.frozen = f.clone();
    }
    if let Some(m) = &a.methods {
        cfg.methods = m.clone();
    }
    if let Some(s) = &a.seeds {
        cfg.seeds = s.clone();
    }
    if a.fci_reference.is_some() {
        cfg.fci_reference = a.fci_reference;
    }
    apply_overrides(&mut cfg, &a.run);
    cfg.validate()?;
    Ok(cfg)
}

pub fn output_dir(flag: Option<&Path>, cfg: &ExperimentConfig) -> PathBuf {
    flag.map(Path::to_path_buf)
        .or_else(|| cfg.output_dir.clone())
        .or_else(|| std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from))
        .unwrap_or_else(|| PathBuf::from("results"))
}

fn optimize(a: OptimizeArgs) -> CliResult<()> {
    let cfg = resolve_config(&a)?;
    let out = output_dir(a.output_dir.as_deref(), &cfg);
    let _lock = OutputLock::acquire(&out)?;

    let fixture = fixture_label(&cfg.fcidump);
    let fixture_hash = file_hash(&cfg.fcidump)?;
    let h = load(&cfg.fcidump, &cfg.frozen)?;
    let e_fci = match cfg.fci_reference {
        Some(e) => Some(e),
        None => fci_or_none(&h)?,
    };

    for (method, seed) in cfg.methods.iter().flat_map(|&m| cfg.seeds.iter().map(move |&s| (m, s))) {
        let single = cfg.single(method, seed);
        let mut spec = single.run_specs().remove(0);
        spec.fci_reference = e_fci;
        info!("running {method} seed {seed} on {fixture}");
        let result = run_method_on(&h, &spec)?;
        let dir = out.join(run_dir_name(&fixture, method.as_str(), seed));
        let pct = result.percent_error.map(|p| format!("{p:.4}%")).unwrap_or_else(|| "n/a".into());
        println!("{}: {} seed {} energy {:.10} error {}", dir.display(), method, seed, result.e_final, pct);
        let file = ResultFile { config_hash: single.hash(), fixture: fixture.clone(), fixture_hash: fixture_hash.clone(), result };
        write_run(&dir, &file, &single.to_toml())?;
    }
    Ok(())
}

fn evaluate(a: EvaluateArgs) -> CliResult<()> {
    let path = Path::new(&a.params);
    let (stored, x) = if path.is_file() {
        let file = ResultFile::load(path)?;
        let x = file.result.parameters.clone();
        (Some(file.result), x)
    } else {
        let x: Vec<f64> = serde_json::from_str(&a.params).map_err(|source| CliError::Json { path: PathBuf::from("--params"), source })?;
        (None, x)
    };

    let fcidump = a
        .fcidump
        .clone()
        .or_else(|| stored.as_ref().map(|r| r.spec.fcidump.clone()))
        .ok_or_else(|| CliError::Config("--fcidump is required with a bare parameter array".into()))?;
    let frozen = a.freeze.clone().or_else(|| stored.as_ref().map(|r| r.spec.frozen.clone())).unwrap_or_default();
    let mut ansatz = stored.as_ref().map(|r| r.spec.ansatz.clone()).unwrap_or_else(AnsatzConfig::default);
    if let Some(l) = a.layers {
        ansatz.layers = l;
    }

    let h = load(&fcidump, &frozen)?;
    let energy = evaluate_parameters(&h, &ansatz, &x)?;
    let e_hf = rhf_state(h.n_orbitals(), h.n_alpha(), h.n_beta())?.expectation(&jw_map(&h))?;
    let e_fci = match a.fci_reference.or_else(|| stored.as_ref().and_then(|r| r.e_fci)) {
        Some(e) => Some(e),
        None => fci_or_none(&h)?,
    };
    println!("energy: {energy:.10}");
    println!("e_hf: {e_hf:.10}");
    match e_fci {
        Some(e) => {
            println!("e_fci: {e:.10}");
            println!("percent_error: {:.6}", percent_error(energy, e));
        }
        None => println!("e_fci: n/a"),
    }
    Ok(())
}

/// Bond length from a `<label>_<length>` file stem.
pub fn bond_length(path: &Path) -> CliResult<f64> {
    let stem = fixture_label(path);
    stem.rsplit('_')
        .next()
        .and_then(|s| s.parse().ok())
        .ok_or_else(|| CliError::Config(format!("cannot read a bond length from {}", path.display())))
}

fn template(frozen: &[usize], o: &RunOverrides) -> RunSpec {
    let mut cfg = ExperimentConfig::new(PathBuf::new(), vec![Method::Hf]);
    cfg.frozen = frozen.to_vec();
    apply_overrides(&mut cfg, o);
    cfg.run_specs().remove(0)
}

fn seeded(spec: &RunSpec, seed: u64) -> RunSpec {
    let mut s = spec.clone();
    s.seed = seed;
    s.ansatz.init_seed = seed;
    s.sqd.seed = seed;
    s
}

#[derive(Default)]
struct Aggregate {
    energies: Vec<f64>,
    errors: Vec<f64>,
    gaps: Vec<f64>,
    failures: Vec<String>,
    runs: usize,
}

fn sweep(a: SweepArgs) -> CliResult<()> {
    let fixtures = a
        .fcidump
        .iter()
        .map(|p| {
            Ok(SweepFixture { label: fixture_label(p), bond_length: bond_length(p)?, fcidump: p.clone(), fci_reference: None })
        })
        .collect::<CliResult<Vec<_>>>()?;
    let base = template(&a.freeze, &a.run);
    base.validate()?;
    for &m in &a.methods {
        RunSpec { method: m, ..base.clone() }.validate()?;
    }

    let mut agg: BTreeMap<(usize, usize), Aggregate> = BTreeMap::new();
    for &seed in &a.seeds {
        info!("sweep seed {seed}");
        for row in bond_sweep(&seeded(&base, seed), &fixtures, &a.methods) {
            let fi = fixtures.iter().position(|f| f.label == row.label).expect("row from a fixture");
            let mi = a.methods.iter().position(|&m| m == row.method).expect("row from a method");
            let e = agg.entry((fi, mi)).or_default();
            e.runs += 1;
            e.energies.extend(row.energy);
            e.errors.extend(row.percent_error);
            e.gaps.extend(row.sqdopt_minus_vqe);
            e.failures.extend(row.failure);
        }
    }

    let mut w = csv_writer(a.output.as_deref())?;
    w.write_record([
        "label",
        "bond_length",
        "method",
        "n_seeds",
        "n_failed",
        "median_energy",
        "median_percent_error",
        "best_percent_error",
        "median_sqdopt_minus_vqe",
        "failure",
    ])?;
    for ((fi, mi), e) in agg {
        let fx = &fixtures[fi];
        w.write_record([
            fx.label.clone(),
            fx.bond_length.to_string(),
            a.methods[mi].to_string(),
            e.runs.to_string(),
            e.failures.len().to_string(),
            cell(median(e.energies)),
            cell(median(e.errors.clone())),
            cell(min(&e.errors)),
            cell(median(e.gaps)),
            e.failures.first().cloned().unwrap_or_default(),
        ])?;
    }
    finish(w, a.output.as_deref())
}

pub const BENCHMARK_COLUMNS: [&str; 16] = [
    "fixture",
    "n_qubits",
    "method",
    "status",
    "timing",
    "steps",
    "median_step_seconds",
    "bases_per_step",
    "state_prep_seconds",
    "sampling_seconds",
    "recovery_seconds",
    "projection_seconds",
    "davidson_seconds",
    "optimizer_overhead_seconds",
    "total_seconds",
    "detail",
];

fn benchmark(a: BenchmarkArgs) -> CliResult<()> {
    let steps = a.steps as usize;
    let mut base = template(&a.freeze, &RunOverrides { k: a.k, shots: a.shots, ..Default::default() });
    base.optimizer.max_iter = steps;
    // Keep the trust radius from ending a timed run early.
    base.optimizer.rho_end = 1e-12;
    let base = seeded(&base, a.seed);

    let mut w = csv_writer(a.output.as_deref())?;
    w.write_record(BENCHMARK_COLUMNS)?;
    for path in &a.fcidump {
        let h = load(path, &a.freeze)?;
        let fixture = fixture_label(path);
        for &method in &a.methods {
            // A placeholder reference keeps the FCI solve out of other methods' timings.
            let spec = RunSpec { fcidump: path.clone(), method, fci_reference: Some(f64::NAN), ..base.clone() };
            let spec = if method == Method::Fci { RunSpec { fci_reference: None, ..spec } } else { spec };
            info!("benchmark {method} on {fixture}");
            let t = Instant::now();
            let outcome = run_method_on(&h, &spec);
            let total = t.elapsed().as_secs_f64();
            let mut rec = vec![fixture.clone(), h.n_qubits().to_string(), method.to_string()];
            match outcome {
                Ok(r) => {
                    let n = r.timings.n_evaluations;
                    let per = |v: f64| if n > 0 { format!("{:.6e}", v / n as f64) } else { String::new() };
                    let step_seconds: Vec<f64> = r
                        .trace
                        .as_ref()
                        .map(|tr| {
                            let mut prev = 0.0;
                            tr.records
                                .iter()
                                .map(|x| {
                                    let d = x.seconds - prev;
                                    prev = x.seconds;
                                    d
                                })
                                .collect()
                        })
                        .unwrap_or_default();
                    let p = r.timings.phases;
                    let timing = if method.is_optimizing() { "per-step" } else { "total" };
                    rec.extend([
                        "ok".to_string(),
                        timing.to_string(),
                        n.to_string(),
                        median(step_seconds).map(|s| format!("{s:.6e}")).unwrap_or_default(),
                        if method.is_optimizing() { r.bases.len().to_string() } else { String::new() },
                        per(p.state_prep),
                        per(p.sampling),
                        per(p.recovery),
                        per(p.projection),
                        per(p.davidson),
                        per(r.timings.optimizer_overhead()),
                        format!("{total:.6e}"),
                        String::new(),
                    ]);
                }
                Err(e) => {
                    let status = if matches!(e, CoreError::Capacity(_)) { "capacity" } else { "error" };
                    rec.extend([status.to_string(), String::new()]);
                    rec.extend(std::iter::repeat_n(String::new(), 9));
                    rec.extend([format!("{total:.6e}"), e.to_string()]);
                }
            }
            w.write_record(&rec)?;
        }
    }
    finish(w, a.output.as_deref())
}

fn compare(a: CompareArgs) -> CliResult<()> {
    let mut hashes: BTreeMap<String, (String, PathBuf)> = BTreeMap::new();
    let mut groups: BTreeMap<(String, Method), Vec<ResultFile>> = BTreeMap::new();
    for path in &a.results {
        let file = ResultFile::load(path)?;
        if let Some((first, first_path)) = hashes.get(&file.fixture) {
            if *first != file.fixture_hash {
                return Err(CliError::FixtureMismatch {
                    fixture: file.fixture.clone(),
                    first: first.clone(),
                    first_path: first_path.clone(),
                    second: file.fixture_hash.clone(),
                    second_path: path.clone(),
                });
            }
        } else {
            hashes.insert(file.fixture.clone(), (file.fixture_hash.clone(), path.clone()));
        }
        groups.entry((file.fixture.clone(), file.result.spec.method)).or_default().push(file);
    }

    let mut w = csv_writer(a.output.as_deref())?;
    w.write_record([
        "fixture",
        "method",
        "n_runs",
        "e_hf",
        "e_fci",
        "median_energy",
        "median_percent_error",
        "best_percent_error",
        "median_evaluations",
    ])?;
    for ((fixture, method), files) in groups {
        let errors: Vec<f64> = files.iter().filter_map(|f| f.result.percent_error).collect();
        let evals = median(files.iter().map(|f| f.result.timings.n_evaluations as f64).collect());
        w.write_record([
            fixture,
            method.to_string(),
            files.len().to_string(),
            cell(Some(files[0].result.e_hf)),
            cell(files[0].result.e_fci),
            cell(median(files.iter().map(|f| f.result.e_final).collect())),
            cell(median(errors.clone())),
            cell(min(&errors)),
            evals.map(|e| e.to_string()).unwrap_or_default(),
        ])?;
    }
    finish(w, a.output.as_deref())
}
