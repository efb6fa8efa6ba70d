//! Unconstrained derivative-free minimization with linear models on a
//! simplex and a shrinking trust radius.
//!
//! Each iteration fits the linear interpolant through `n + 1` vertices and
//! steps a distance `ρ` downhill from the best vertex. Poor steps shrink `ρ`
//! once the simplex is well shaped; badly shaped simplices are repaired
//! first. The search stops when `ρ` reaches `ρ_end` or the evaluation budget
//! is spent.

use std::time::Instant;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct OptimizerConfig {
    /// Total cost evaluations, initial simplex included.
    pub max_iter: usize,
    pub rho_beg: f64,
    pub rho_end: f64,
}

impl Default for OptimizerConfig {
    fn default() -> Self {
        Self { max_iter: 500, rho_beg: 0.1, rho_end: 1e-4 }
    }
}

// Simplex acceptability and step parameters.
const ALPHA: f64 = 0.25;
const BETA: f64 = 2.1;
const GAMMA: f64 = 0.5;
const POOR_RATIO: f64 = 0.1;

/// Value returned by a cost function: the scalar plus any components (for
/// example per-basis energies) worth recording.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct CostValue {
    pub value: f64,
    pub components: Vec<f64>,
}

impl From<f64> for CostValue {
    fn from(value: f64) -> Self {
        Self { value, components: Vec::new() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRecord {
    pub iteration: usize,
    pub parameters: Vec<f64>,
    pub cost: f64,
    pub components: Vec<f64>,
    pub best_cost: f64,
    pub rho: f64,
    pub seconds: f64,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct OptimizationTrace {
    pub records: Vec<TraceRecord>,
}

impl OptimizationTrace {
    pub fn len(&self) -> usize {
        self.records.len()
    }

    pub fn is_empty(&self) -> bool {
        self.records.is_empty()
    }

    pub fn best(&self) -> Option<&TraceRecord> {
        self.records.iter().min_by(|a, b| a.cost.total_cmp(&b.cost))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum StopReason {
    TrustRadius,
    MaxEvaluations,
}

#[derive(Debug, Clone, PartialEq)]
pub struct OptimizationResult {
    pub x: Vec<f64>,
    pub cost: f64,
    pub stop: StopReason,
    pub trace: OptimizationTrace,
}

/// A failed run keeps the evaluations made before the failure.
#[derive(Debug, thiserror::Error)]
#[error("{error}")]
pub struct OptimizationFailure {
    #[source]
    pub error: Error,
    pub trace: OptimizationTrace,
}

struct Evaluator<F> {
    cost: F,
    trace: OptimizationTrace,
    best: f64,
    start: Instant,
    max_evals: usize,
}

impl<F: FnMut(&[f64]) -> Result<CostValue>> Evaluator<F> {
    fn exhausted(&self) -> bool {
        self.trace.len() >= self.max_evals
    }

    fn eval(&mut self, x: &DVector<f64>, rho: f64) -> Result<f64> {
        let iteration = self.trace.len();
        let v = (self.cost)(x.as_slice())?;
        if !v.value.is_finite() {
            return Err(Error::NonFiniteCost { evaluation: iteration });
        }
        self.best = self.best.min(v.value);
        self.trace.records.push(TraceRecord {
            iteration,
            parameters: x.as_slice().to_vec(),
            cost: v.value,
            components: v.components,
            best_cost: self.best,
            rho,
            seconds: self.start.elapsed().as_secs_f64(),
        });
        Ok(v.value)
    }
}

pub fn minimize<F>(cost: F, x0: &[f64], cfg: &OptimizerConfig) -> std::result::Result<OptimizationResult, OptimizationFailure>
where
    F: FnMut(&[f64]) -> Result<CostValue>,
{
    let mut ev = Evaluator { cost, trace: OptimizationTrace::default(), best: f64::INFINITY, start: Instant::now(), max_evals: cfg.max_iter };
    match run(&mut ev, x0, cfg) {
        Ok(stop) => {
            let best = ev.trace.best().cloned();
            let (x, cost) = best.map(|b| (b.parameters, b.cost)).unwrap_or_else(|| (x0.to_vec(), f64::NAN));
            Ok(OptimizationResult { x, cost, stop, trace: ev.trace })
        }
        Err(error) => Err(OptimizationFailure { error, trace: ev.trace }),
    }
}

fn run<F: FnMut(&[f64]) -> Result<CostValue>>(ev: &mut Evaluator<F>, x0: &[f64], cfg: &OptimizerConfig) -> Result<StopReason> {
    let n = x0.len();
    if !(cfg.rho_beg > 0.0 && cfg.rho_end > 0.0 && cfg.rho_end <= cfg.rho_beg) {
        return Err(Error::InvalidArgument("trust radii must satisfy 0 < rho_end <= rho_beg".into()));
    }
    let mut rho = cfg.rho_beg;
    let x0 = DVector::from_column_slice(x0);
    let mut xs: Vec<DVector<f64>> = Vec::with_capacity(n + 1);
    let mut fs: Vec<f64> = Vec::with_capacity(n + 1);
    if ev.exhausted() {
        return Ok(StopReason::MaxEvaluations);
    }
    fs.push(ev.eval(&x0, rho)?);
    xs.push(x0.clone());
    for i in 0..n {
        if ev.exhausted() {
            return Ok(StopReason::MaxEvaluations);
        }
        let mut x = x0.clone();
        x[i] += rho;
        fs.push(ev.eval(&x, rho)?);
        xs.push(x);
    }
    if n == 0 {
        return Ok(StopReason::TrustRadius);
    }

    let mut geometry_step_done = false;
    loop {
        if ev.exhausted() {
            return Ok(StopReason::MaxEvaluations);
        }
        let b = (0..=n).min_by(|&i, &j| fs[i].total_cmp(&fs[j])).unwrap();
        let others: Vec<usize> = (0..=n).filter(|&j| j != b).collect();
        let mut d = DMatrix::zeros(n, n);
        let mut df = DVector::zeros(n);
        for (row, &j) in others.iter().enumerate() {
            d.set_row(row, &(&xs[j] - &xs[b]).transpose());
            df[row] = fs[j] - fs[b];
        }
        let inv = d.clone().try_inverse();

        // Edge lengths and vertex-to-opposite-face distances.
        let (acceptable, worst) = match &inv {
            Some(inv) => {
                let mut worst: Option<(usize, f64, bool)> = None;
                let mut ok = true;
                for (row, _) in others.iter().enumerate() {
                    let edge = d.row(row).norm();
                    let sigma = 1.0 / inv.column(row).norm();
                    if edge > BETA * rho {
                        ok = false;
                        if worst.map_or(true, |w| !w.2 || edge > w.1) {
                            worst = Some((row, edge, true));
                        }
                    } else if sigma < ALPHA * rho {
                        ok = false;
                        if worst.map_or(true, |w| !w.2 && sigma < w.1) {
                            worst = Some((row, sigma, false));
                        }
                    }
                }
                (ok, worst.map(|w| w.0))
            }
            None => (false, Some(0)),
        };

        if !acceptable && !geometry_step_done {
            let row = worst.unwrap_or(0);
            let j = others[row];
            let g = inv.as_ref().map(|inv| inv * &df).unwrap_or_else(|| DVector::zeros(n));
            // Direction normal to the face opposite vertex j.
            let mut dir = match &inv {
                Some(inv) => inv.column(row).into_owned(),
                None => {
                    let mut e = DVector::zeros(n);
                    e[row % n] = 1.0;
                    e
                }
            };
            let dn = dir.norm();
            if dn == 0.0 || !dn.is_finite() {
                dir = DVector::zeros(n);
                dir[row % n] = 1.0;
            } else {
                dir /= dn;
            }
            if g.dot(&dir) > 0.0 {
                dir = -dir;
            }
            let x = &xs[b] + dir * (GAMMA * rho);
            let f = ev.eval(&x, rho)?;
            xs[j] = x;
            fs[j] = f;
            geometry_step_done = true;
            continue;
        }
        geometry_step_done = false;

        let Some(inv) = inv else {
            // Degenerate even after repair; shrink and rebuild around best.
            if !shrink(&mut rho, cfg) {
                return Ok(StopReason::TrustRadius);
            }
            continue;
        };
        let g = &inv * &df;
        let gn = g.norm();
        if gn == 0.0 || !gn.is_finite() {
            if !shrink(&mut rho, cfg) {
                return Ok(StopReason::TrustRadius);
            }
            continue;
        }
        let step = &g * (-rho / gn);
        let x = &xs[b] + &step;
        let f = ev.eval(&x, rho)?;
        let predicted = rho * gn;
        let ratio = (fs[b] - f) / predicted;

        // Replace the vertex whose barycentric weight in the step is largest.
        let lambda = inv.transpose() * &step;
        let (row, _) = lambda.iter().enumerate().max_by(|a, c| a.1.abs().total_cmp(&c.1.abs())).unwrap();
        let j = others[row];
        xs[j] = x;
        fs[j] = f;
        if ratio < POOR_RATIO && acceptable && !shrink(&mut rho, cfg) {
            return Ok(StopReason::TrustRadius);
        }
    }
}

/// Halves `ρ`, snapping to `ρ_end` near the end. Returns false when already
/// at `ρ_end`.
fn shrink(rho: &mut f64, cfg: &OptimizerConfig) -> bool {
    if *rho <= cfg.rho_end {
        return false;
    }
    *rho *= 0.5;
    if *rho <= 1.5 * cfg.rho_end {
        *rho = cfg.rho_end;
    }
    true
}
