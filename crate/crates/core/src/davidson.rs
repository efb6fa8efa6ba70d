//! Davidson iteration for the lowest eigenpair of a Hermitian sparse matrix.

use nalgebra::{ComplexField, DMatrix, DVector, SymmetricEigen};
use rand::prelude::*;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::subspace::{CsrMatrix, SubspaceProblem};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct DavidsonConfig {
    /// Residual norm `‖(H - E)ψ‖` at convergence.
    pub tol: f64,
    pub max_iter: usize,
    pub max_subspace: usize,
    /// Ritz vectors kept on restart.
    pub restart_size: usize,
}

impl Default for DavidsonConfig {
    fn default() -> Self {
        Self { tol: 1e-8, max_iter: 200, max_subspace: 30, restart_size: 5 }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct GroundState<T> {
    pub energy: f64,
    /// Normalized eigenvector.
    pub vector: Vec<T>,
    pub residual: f64,
    pub iterations: usize,
}

/// Dense Hermitian eigensolve, lowest pair.
pub fn dense_ground<T: ComplexField<RealField = f64> + Copy>(n: usize, dense: &[T]) -> (f64, Vec<T>) {
    let m = DMatrix::from_row_slice(n, n, dense);
    let eig = SymmetricEigen::new(m);
    let (k, &e) = eig.eigenvalues.iter().enumerate().min_by(|a, b| a.1.total_cmp(b.1)).unwrap();
    (e, eig.eigenvectors.column(k).iter().copied().collect())
}

fn norm<T: ComplexField<RealField = f64> + Copy>(v: &DVector<T>) -> f64 {
    v.iter().map(|x| x.modulus_squared()).sum::<f64>().sqrt()
}

/// Two passes of classical Gram-Schmidt against the columns of `basis`.
fn orthogonalize<T: ComplexField<RealField = f64> + Copy>(v: &mut DVector<T>, basis: &[DVector<T>]) {
    for _ in 0..2 {
        for b in basis {
            let proj = b.dotc(v);
            v.axpy(-proj, b, T::one());
        }
    }
}

fn matvec<T: ComplexField<RealField = f64> + Copy>(a: &CsrMatrix<T>, v: &DVector<T>) -> DVector<T> {
    let mut out = vec![T::zero(); a.dim()];
    a.matvec(v.as_slice(), &mut out);
    DVector::from_vec(out)
}

pub fn davidson_ground<T: ComplexField<RealField = f64> + Copy>(
    problem: &SubspaceProblem<T>,
    cfg: &DavidsonConfig,
) -> Result<GroundState<T>> {
    davidson_matrix(&problem.matrix, cfg)
}

/// Lowest eigenpair. A matrix whose sparsity graph is disconnected is
/// solved block by block; a single Krylov-type search started in one block
/// never sees the others.
pub fn davidson_matrix<T: ComplexField<RealField = f64> + Copy>(
    a: &CsrMatrix<T>,
    cfg: &DavidsonConfig,
) -> Result<GroundState<T>> {
    let n = a.dim();
    if n == 0 {
        return Err(Error::InvalidArgument("Davidson needs a nonempty matrix".into()));
    }
    let components = a.connected_components();
    if components.len() == 1 {
        return davidson_connected(a, cfg);
    }
    let mut best: Option<(GroundState<T>, &[usize])> = None;
    for idx in &components {
        let g = davidson_connected(&a.submatrix(idx), cfg)?;
        if best.as_ref().map_or(true, |(b, _)| g.energy < b.energy) {
            best = Some((g, idx));
        }
    }
    let (g, idx) = best.expect("at least one component");
    let mut vector = vec![T::zero(); n];
    for (k, &i) in idx.iter().enumerate() {
        vector[i] = g.vector[k];
    }
    Ok(GroundState { vector, ..g })
}

fn davidson_connected<T: ComplexField<RealField = f64> + Copy>(
    a: &CsrMatrix<T>,
    cfg: &DavidsonConfig,
) -> Result<GroundState<T>> {
    let n = a.dim();
    let diag = a.diagonal();
    if n == 1 {
        return Ok(GroundState { energy: diag[0], vector: vec![T::one()], residual: 0.0, iterations: 0 });
    }
    let max_sub = cfg.max_subspace.clamp(2, n.max(2));
    let keep = cfg.restart_size.clamp(1, max_sub - 1);

    let start = diag.iter().enumerate().min_by(|x, y| x.1.total_cmp(y.1)).unwrap().0;
    let mut e0 = DVector::from_element(n, T::zero());
    e0[start] = T::one();
    // A seeded dense vector reaches components the unit vector cannot.
    let mut rng = ChaCha8Rng::seed_from_u64(0x5eed);
    let mut random = DVector::from_fn(n, |_, _| T::from_real(rng.gen_range(-1.0..1.0)));

    let mut v: Vec<DVector<T>> = vec![e0.clone()];
    let mut av: Vec<DVector<T>> = vec![matvec(a, &e0)];
    orthogonalize(&mut random, &v);
    let rn = norm(&random);
    if rn > 1e-10 {
        random.unscale_mut(rn);
        av.push(matvec(a, &random));
        v.push(random);
    }

    let mut best: Option<GroundState<T>> = None;
    for iter in 0..cfg.max_iter {
        let m = v.len();
        let mut t = DMatrix::from_element(m, m, T::zero());
        for i in 0..m {
            for j in i..m {
                let x = v[i].dotc(&av[j]);
                t[(i, j)] = x;
                t[(j, i)] = x.conjugate();
            }
        }
        for i in 0..m {
            t[(i, i)] = T::from_real(t[(i, i)].real());
        }
        let eig = SymmetricEigen::new(t);
        let mut order: Vec<usize> = (0..m).collect();
        order.sort_by(|&x, &y| eig.eigenvalues[x].total_cmp(&eig.eigenvalues[y]));
        let theta = eig.eigenvalues[order[0]];
        let s = eig.eigenvectors.column(order[0]);

        let mut x = DVector::from_element(n, T::zero());
        let mut ax = DVector::from_element(n, T::zero());
        for k in 0..m {
            x.axpy(s[k], &v[k], T::one());
            ax.axpy(s[k], &av[k], T::one());
        }
        let xn = norm(&x);
        x.unscale_mut(xn);
        ax.unscale_mut(xn);
        let r = &ax - &x * T::from_real(theta);
        let rn = norm(&r);

        if best.as_ref().map_or(true, |b| rn < b.residual) {
            best = Some(GroundState { energy: theta, vector: x.as_slice().to_vec(), residual: rn, iterations: iter + 1 });
        }
        if rn <= cfg.tol {
            return Ok(best.unwrap());
        }

        if m >= max_sub {
            let mut nv = Vec::with_capacity(keep);
            let mut nav = Vec::with_capacity(keep);
            for &col in order.iter().take(keep) {
                let c = eig.eigenvectors.column(col);
                let mut y = DVector::from_element(n, T::zero());
                let mut ay = DVector::from_element(n, T::zero());
                for k in 0..m {
                    y.axpy(c[k], &v[k], T::one());
                    ay.axpy(c[k], &av[k], T::one());
                }
                nv.push(y);
                nav.push(ay);
            }
            v = nv;
            av = nav;
        }

        let mut corr = DVector::from_fn(n, |i, _| {
            let mut d = diag[i] - theta;
            if d.abs() < 1e-8 {
                d = if d < 0.0 { -1e-8 } else { 1e-8 };
            }
            r[i].unscale(d)
        });
        orthogonalize(&mut corr, &v);
        let mut cn = norm(&corr);
        if cn < 1e-10 {
            corr = r.clone();
            orthogonalize(&mut corr, &v);
            cn = norm(&corr);
        }
        if cn < 1e-10 {
            corr = DVector::from_fn(n, |_, _| T::from_real(rng.gen_range(-1.0..1.0)));
            orthogonalize(&mut corr, &v);
            cn = norm(&corr);
            if cn < 1e-10 {
                // The subspace is already the whole space.
                break;
            }
        }
        corr.unscale_mut(cn);
        av.push(matvec(a, &corr));
        v.push(corr);
    }
    let best = best.unwrap();
    Err(Error::NotConverged { iterations: cfg.max_iter, best_residual: best.residual })
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_complex::Complex64;

    #[test]
    fn one_by_one() {
        let a = CsrMatrix::from_dense(1, &[-3.5]);
        let g = davidson_matrix(&a, &DavidsonConfig::default()).unwrap();
        assert_eq!(g.energy, -3.5);
    }

    #[test]
    fn diagonal_matrix() {
        let d: [f64; 4] = [3.0, -1.0, 2.0, 0.5];
        let mut dense = vec![0.0_f64; 16];
        for i in 0..4 {
            dense[i * 4 + i] = d[i];
        }
        let g = davidson_matrix(&CsrMatrix::from_dense(4, &dense), &DavidsonConfig::default()).unwrap();
        assert!((g.energy + 1.0).abs() < 1e-12);
        assert!((g.vector[1].abs() - 1.0_f64).abs() < 1e-10);
    }

    #[test]
    fn complex_hermitian() {
        let i = Complex64::new(0.0, 1.0);
        let one = Complex64::new(1.0, 0.0);
        let dense = vec![one, i, -i, one];
        let g = davidson_matrix(&CsrMatrix::from_dense(2, &dense), &DavidsonConfig::default()).unwrap();
        assert!(g.energy.abs() < 1e-10);
    }

    #[test]
    fn disconnected_blocks() {
        // Lowest eigenvalue sits in the block opposite the smallest diagonal.
        let mut dense = vec![0.0_f64; 25];
        let set = |d: &mut Vec<f64>, i: usize, j: usize, v: f64| {
            d[i * 5 + j] = v;
            d[j * 5 + i] = v;
        };
        set(&mut dense, 0, 0, -1.0);
        set(&mut dense, 1, 1, 0.0);
        set(&mut dense, 0, 1, 0.1);
        set(&mut dense, 2, 2, 0.0);
        set(&mut dense, 3, 3, 0.0);
        set(&mut dense, 4, 4, 0.0);
        set(&mut dense, 2, 3, 1.0);
        set(&mut dense, 3, 4, 1.0);
        let g = davidson_matrix(&CsrMatrix::from_dense(5, &dense), &DavidsonConfig::default()).unwrap();
        assert!((g.energy + 2f64.sqrt()).abs() < 1e-10, "{}", g.energy);
        assert!(g.vector[0] == 0.0 && g.vector[1] == 0.0);
    }
}
