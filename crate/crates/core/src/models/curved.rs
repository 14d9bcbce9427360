use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::flat::{model_info, registry};
use crate::calibration::standard_form;
use crate::error::{Error, Result};
use crate::exterior::ExtSpace;
use crate::geometry::{ChartDomain, Euclidean, FnForm, FnMap, FnMetric, MapJet, MetricField};
use crate::scalar::Scalar;
use crate::smith::{Direction, SmithProblem};

const PREFIX: &str = "sheared-";

/// Triangular shear Φ(y)_j = y_j + s_j(y) on `moved` axes, where s_j depends
/// only on the `driver` axes; Φ⁻¹ just subtracts the same shift.
#[derive(Clone, Debug)]
struct Shear {
    n: usize,
    driver: Vec<usize>,
    moved: Vec<usize>,
}

impl Shear {
    /// Driver axes feeding the i-th moved axis: s_i = 0.3 sin(y_a) + 0.2 y_b².
    fn drivers(&self, i: usize) -> (usize, usize) {
        let m = self.driver.len();
        (self.driver[i % m], self.driver[(i + 1) % m])
    }

    fn shift<T: Scalar>(&self, y: &[T]) -> Vec<T> {
        let mut s = vec![T::zero(); self.n];
        for (i, &j) in self.moved.iter().enumerate() {
            let (a, b) = self.drivers(i);
            s[j] = T::lit(0.3) * y[a].sin() + T::lit(0.2) * y[b] * y[b];
        }
        s
    }

    fn shift_jacobian<T: Scalar>(&self, y: &[T]) -> DMatrix<T> {
        let mut d = DMatrix::zeros(self.n, self.n);
        for (i, &j) in self.moved.iter().enumerate() {
            let (a, b) = self.drivers(i);
            d[(j, a)] += T::lit(0.3) * y[a].cos();
            d[(j, b)] += T::lit(0.4) * y[b];
        }
        d
    }

    fn jacobian<T: Scalar>(&self, y: &[T]) -> DMatrix<T> {
        DMatrix::identity(self.n, self.n) + self.shift_jacobian(y)
    }
}

/// Names of the curved-chart models: every flat registry model transported by a shear.
pub fn curved_names() -> Vec<String> {
    registry().iter().map(|m| format!("{PREFIX}{}", m.name)).collect()
}

/// A flat registry model seen through the shear chart Φ of M: the metric is
/// Φ*(flat), the calibration Φ*α₀, and the map is Φ⁻¹∘ι (immersions) or π∘Φ
/// (submersions). Φ is an isometry onto flat space, so the result is Smith with
/// nonconstant metric coefficients and genuinely curved coordinate expressions.
pub fn curved_model<T: Scalar>(name: &str) -> Result<SmithProblem<T>> {
    let base = name.strip_prefix(PREFIX).ok_or_else(|| Error::UnknownModel(name.to_string()))?;
    let info = model_info(base).map_err(|_| Error::UnknownModel(name.to_string()))?;
    let (n1, n2) = (info.source_dim, info.target_dim);
    let n = n1.max(n2);
    let a = info.linear_part::<T>();
    let alpha0 = standard_form::<T>(info.calibration, n)?.form;
    // image axes of ι in M, or the axes π keeps
    let image: Vec<usize> = match info.direction {
        Direction::Immersion => (0..n).filter(|&r| a.row(r).iter().any(|v| *v != T::zero())).collect(),
        Direction::Submersion => (0..n).filter(|&c| a.column(c).iter().any(|v| *v != T::zero())).collect(),
    };
    let rest: Vec<usize> = (0..n).filter(|i| !image.contains(i)).collect();
    let shear = match info.direction {
        Direction::Immersion => Shear { n, driver: image, moved: rest },
        Direction::Submersion => Shear { n, driver: rest, moved: image },
    };

    let sh = shear.clone();
    let metric = FnMetric::new(n, move |y: &[T]| {
        let d = sh.jacobian(y);
        d.transpose() * d
    });
    let sh = shear.clone();
    let flat = ExtSpace::euclidean(n);
    let alpha = FnForm::new(n, alpha0.degree(), move |y: &[T]| {
        alpha0.pullback_matrix(&sh.jacobian(y), &flat).expect("square Jacobian")
    });
    let sh = shear;
    let (map, source_metric, target_metric): (FnMap<T>, Arc<dyn MetricField<T>>, Arc<dyn MetricField<T>>) =
        match info.direction {
            Direction::Immersion => {
                let map = FnMap::new(n1, n2, move |x: &[T]| {
                    let z = &a * DVector::from_column_slice(x);
                    let s = sh.shift(z.as_slice());
                    let u: Vec<T> = (0..n2).map(|i| z[i] - s[i]).collect();
                    let jacobian = (DMatrix::identity(n2, n2) - sh.shift_jacobian(z.as_slice())) * &a;
                    MapJet { x: x.to_vec(), u, jacobian, hessian: None }
                });
                (map, Arc::new(Euclidean(n1)), Arc::new(metric))
            }
            Direction::Submersion => {
                let map = FnMap::new(n1, n2, move |y: &[T]| {
                    let s = sh.shift(y);
                    let moved: Vec<T> = (0..n1).map(|i| y[i] + s[i]).collect();
                    let u = (&a * DVector::from_vec(moved)).as_slice().to_vec();
                    let jacobian = &a * sh.jacobian(y);
                    MapJet { x: y.to_vec(), u, jacobian, hessian: None }
                });
                (map, Arc::new(metric), Arc::new(Euclidean(n2)))
            }
        };
    Ok(SmithProblem::new(info.direction, Arc::new(map), source_metric, target_metric, Arc::new(alpha))?
        .named(name)
        .with_domain(ChartDomain::whole(n1)))
}
