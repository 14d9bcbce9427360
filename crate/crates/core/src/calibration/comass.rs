use nalgebra::{DMatrix, DVector};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::exterior::{ExtSpace, KForm};
use crate::scalar::Scalar;

/// Multistart settings for [`comass_estimate`].
#[derive(Clone, Debug)]
pub struct ComassConfig<T: Scalar> {
    pub restarts: usize,
    pub tol: T,
    pub seed: u64,
    pub max_iter: usize,
    /// Stop a restart once the Riemannian gradient norm drops below this.
    pub grad_tol: T,
}

impl<T: Scalar> Default for ComassConfig<T> {
    fn default() -> Self {
        ComassConfig {
            restarts: 200,
            tol: T::lit(1e-6),
            seed: 0,
            max_iter: 4000,
            grad_tol: T::default_epsilon().sqrt() * T::lit(1e-3),
        }
    }
}

/// Best value found, its frame, and run statistics.
#[derive(Clone, Debug)]
pub struct ComassEstimate<T: Scalar> {
    /// α on the returned frame: a certified lower bound on the comass.
    pub value: T,
    /// Orthonormal (for the form's metric) frame realising `value`.
    pub frame: Vec<DVector<T>>,
    pub restarts: usize,
    pub best_restart: usize,
    /// Restarts whose gradient norm fell below `grad_tol`.
    pub converged: usize,
}

struct Run<T: Scalar> {
    value: T,
    frame: DMatrix<T>,
    converged: bool,
}

/// Estimate the comass max α(e₁,…,e_k) over orthonormal frames by projected
/// gradient ascent on the Stiefel manifold from Gaussian restarts.
///
/// The value is attained by the returned frame, so it bounds the comass from
/// below; that it is the maximum is heuristic.
pub fn comass_estimate<T: Scalar>(alpha: &KForm<T>, cfg: &ComassConfig<T>) -> Result<ComassEstimate<T>> {
    if cfg.restarts == 0 {
        return Err(Error::InvalidInput("comass estimate needs at least one restart".into()));
    }
    let k = alpha.degree();
    let n = alpha.dim();
    if k == 0 {
        return Err(Error::Degree("comass of a 0-form".into()));
    }
    // orthonormal coordinates: v = L⁻ᵀ v̂
    let l = alpha.space().cholesky();
    let to_orig = l.transpose().try_inverse().expect("Cholesky factor is invertible");
    let flat = ExtSpace::euclidean(n);
    let ahat = alpha.pullback_matrix(&to_orig, &flat)?;

    if k == n {
        let c = ahat.coeffs()[0];
        let mut q = DMatrix::identity(n, n);
        if c < T::zero() {
            q.column_mut(0).neg_mut();
        }
        return Ok(finish(alpha, &to_orig, &q, cfg.restarts, 0, cfg.restarts));
    }

    let runs: Vec<Run<T>> = (0..cfg.restarts)
        .into_par_iter()
        .map(|r| {
            let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
            rng.set_stream(r as u64);
            let start = DMatrix::from_fn(n, k, |_, _| T::lit(StandardNormal.sample(&mut rng)));
            ascend(&ahat, orthonormalize(&start), cfg)
        })
        .collect();
    let (best, run) = runs
        .iter()
        .enumerate()
        .fold(None::<(usize, &Run<T>)>, |acc, (i, r)| match acc {
            Some((_, b)) if b.value >= r.value => acc,
            _ => Some((i, r)),
        })
        .expect("at least one restart");
    let converged = runs.iter().filter(|r| r.converged).count();
    Ok(finish(alpha, &to_orig, &run.frame, cfg.restarts, best, converged))
}

fn finish<T: Scalar>(
    alpha: &KForm<T>,
    to_orig: &DMatrix<T>,
    q: &DMatrix<T>,
    restarts: usize,
    best_restart: usize,
    converged: usize,
) -> ComassEstimate<T> {
    let f = to_orig * q;
    let value = alpha.evaluate_columns(&f);
    let frame = (0..f.ncols()).map(|j| f.column(j).into_owned()).collect();
    ComassEstimate { value, frame, restarts, best_restart, converged }
}

/// Modified Gram–Schmidt with a second pass; columns keep their orientation
/// relative to the input (positive R diagonal).
pub(crate) fn orthonormalize<T: Scalar>(m: &DMatrix<T>) -> DMatrix<T> {
    let mut q = m.clone();
    for j in 0..q.ncols() {
        for _ in 0..2 {
            for i in 0..j {
                let p = q.column(i).dot(&q.column(j));
                let ci = q.column(i).into_owned();
                q.column_mut(j).axpy(-p, &ci, T::one());
            }
        }
        let nrm = q.column(j).norm();
        q.column_mut(j).scale_mut(T::one() / nrm);
    }
    q
}

/// Euclidean gradient of Q ↦ α(q₁,…,q_k): column j is
/// (−1)^{k−j} ι_{q_k}…ι̂_{q_j}…ι_{q_1} α, a 1-form read as a vector.
fn gradient<T: Scalar>(a: &KForm<T>, q: &DMatrix<T>) -> DMatrix<T> {
    let k = q.ncols();
    let n = q.nrows();
    let mut g = DMatrix::zeros(n, k);
    for j in 0..k {
        let mut f = a.clone();
        for i in 0..k {
            if i != j {
                f = f.interior(&q.column(i).into_owned()).expect("degree positive");
            }
        }
        let sign = if (k - 1 - j).is_multiple_of(2) { T::one() } else { -T::one() };
        for r in 0..n {
            g[(r, j)] = sign * f.coeffs()[r];
        }
    }
    g
}

fn ascend<T: Scalar>(a: &KForm<T>, mut q: DMatrix<T>, cfg: &ComassConfig<T>) -> Run<T> {
    let mut f = a.evaluate_columns(&q);
    let mut step = T::one();
    let armijo = T::lit(1e-4);
    let mut converged = false;
    for _ in 0..cfg.max_iter {
        let g = gradient(a, &q);
        let qtg = q.transpose() * &g;
        let rgrad = &g - &q * ((&qtg + qtg.transpose()) * T::lit(0.5));
        let gn2 = rgrad.norm_squared();
        if gn2.sqrt() < cfg.grad_tol {
            converged = true;
            break;
        }
        let mut t = step * T::lit(2.0);
        let mut accepted = false;
        for _ in 0..60 {
            let cand = orthonormalize(&(&q + &rgrad * t));
            let fc = a.evaluate_columns(&cand);
            if fc >= f + armijo * t * gn2 {
                q = cand;
                f = fc;
                step = t;
                accepted = true;
                break;
            }
            t *= T::lit(0.5);
        }
        if !accepted {
            // no ascent available at working precision
            converged = gn2.sqrt() < cfg.grad_tol.sqrt();
            break;
        }
    }
    Run { value: f, frame: q, converged }
}
