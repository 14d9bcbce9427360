//! Variational oracle for the k-tension: the first variation of the k-energy,
//! computed from scratch by quadrature and a central difference in t, against
//! −(k/√kᵏ)∫⟨τ_k, φ⟩ built from the library's τ_k.
#![allow(dead_code)]

use std::f64::consts::TAU;
use std::sync::Arc;

use nalgebra::{DMatrix, DVector};
use smithcal::exterior::{ExtSpace, KForm};
use smithcal::geometry::{ConstantForm, Euclidean, FdConfig, FnMap, FnMetric, MapField, MapJet, MetricField};
use smithcal::smith::{k_tension, Direction, SmithProblem};

/// Where the variation ψ lives: a bump on a box (midpoint rule) or a smooth
/// periodic function on the torus (trapezoid rule, exact integration by parts).
#[derive(Clone)]
pub enum Support {
    Bump { center: Vec<f64>, radius: f64 },
    Torus { dim: usize, shift: Vec<f64> },
}

/// Perturbation t·ψ·e_a of a test map. Metrics and |du| are evaluated here
/// from scratch.
pub struct Variation<'a> {
    pub map: &'a dyn MapField<f64>,
    pub g: &'a dyn MetricField<f64>,
    pub h: &'a dyn MetricField<f64>,
    pub k: usize,
    pub support: Support,
    pub axis: usize,
    pub points: usize,
    /// τ has no component along `axis`, so both sides must vanish.
    pub expect_zero: bool,
}

impl Variation<'_> {
    /// ψ and its gradient.
    fn psi(&self, x: &[f64]) -> (f64, Vec<f64>) {
        match &self.support {
            Support::Bump { center, radius } => {
                // peak 1, smooth, supported in the box of half-width `radius`
                let mut v = 1.0;
                let mut logs = Vec::new();
                for (xi, ci) in x.iter().zip(center) {
                    let s = (xi - ci) / radius;
                    if s.abs() >= 1.0 {
                        return (0.0, vec![0.0; x.len()]);
                    }
                    v *= (1.0 - 1.0 / (1.0 - s * s)).exp();
                    logs.push(-2.0 * s / (1.0 - s * s).powi(2) / radius);
                }
                (v, logs.iter().map(|l| v * l).collect())
            }
            Support::Torus { shift, .. } => {
                // exp(Σ 0.6 cos(xᵢ + cᵢ)) has every Fourier mode
                let v = x.iter().zip(shift).map(|(xi, c)| 0.6 * (xi + c).cos()).sum::<f64>().exp();
                (v, x.iter().zip(shift).map(|(xi, c)| -0.6 * (xi + c).sin() * v).collect())
            }
        }
    }

    fn nodes(&self) -> Vec<(Vec<f64>, f64)> {
        let (d, lower, step): (usize, Vec<f64>, f64) = match &self.support {
            Support::Bump { center, radius } => {
                let step = 2.0 * radius / self.points as f64;
                (center.len(), center.iter().map(|c| c - radius + 0.5 * step).collect(), step)
            }
            Support::Torus { dim, .. } => (*dim, vec![0.0; *dim], TAU / self.points as f64),
        };
        (0..self.points.pow(d as u32))
            .map(|mut idx| {
                let x = (0..d)
                    .map(|i| {
                        let j = idx % self.points;
                        idx /= self.points;
                        lower[i] + j as f64 * step
                    })
                    .collect();
                (x, step.powi(d as i32))
            })
            .collect()
    }

    fn energy(&self, t: f64) -> f64 {
        let kf = self.k as f64;
        self.nodes()
            .iter()
            .map(|(x, w)| {
                let jet = self.map.jet(x);
                let (psi, dpsi) = self.psi(x);
                let mut u = jet.u.clone();
                u[self.axis] += t * psi;
                let mut du = jet.jacobian.clone();
                for (j, d) in dpsi.iter().enumerate() {
                    du[(self.axis, j)] += t * d;
                }
                let g = self.g.eval(x);
                let h = self.h.eval(&u);
                let n2 = (g.clone().try_inverse().unwrap() * du.transpose() * h * &du).trace();
                (n2 / kf).powf(kf / 2.0) * g.determinant().sqrt() * w
            })
            .sum()
    }

    /// −(k/√kᵏ) ∫⟨τ_k, ψ e_a⟩ vol with the library's τ_k.
    fn predicted(&self, prob: &SmithProblem<f64>, fd: &FdConfig<f64>) -> f64 {
        let kf = self.k as f64;
        let c = kf / kf.powf(kf / 2.0);
        -c * self
            .nodes()
            .iter()
            .map(|(x, w)| {
                let (psi, _) = self.psi(x);
                if psi == 0.0 {
                    return 0.0;
                }
                let tau = k_tension(prob, x, fd).unwrap();
                let h = self.h.eval(&self.map.jet(x).u);
                (h * tau)[self.axis] * psi * self.g.eval(x).determinant().sqrt() * w
            })
            .sum::<f64>()
    }

    /// (finite-difference dE/dt, prediction from τ_k at h_fd = 1e−3).
    pub fn check(&self, prob: &SmithProblem<f64>) -> (f64, f64) {
        let dt = 1e-4;
        let fd_grad = (self.energy(dt) - self.energy(-dt)) / (2.0 * dt);
        (fd_grad, self.predicted(prob, &FdConfig::with_step(1e-3)))
    }
}

/// A non-Smith test map with the variations to test it against.
pub struct Case {
    pub name: &'static str,
    pub prob: SmithProblem<f64>,
    plan: Vec<(Support, usize, usize, bool)>,
}

impl Case {
    pub fn variations(&self) -> Vec<Variation<'_>> {
        self.plan
            .iter()
            .map(|(support, axis, points, expect_zero)| Variation {
                map: self.prob.map.as_ref(),
                g: self.prob.source_metric.as_ref(),
                h: self.prob.target_metric.as_ref(),
                k: self.prob.k(),
                support: support.clone(),
                axis: *axis,
                points: *points,
                expect_zero: *expect_zero,
            })
            .collect()
    }
}

/// u(x) = (x₁², x₂) on flat ℝ², k = 2; τ = Δu = (2, 0).
pub fn square_x1() -> SmithProblem<f64> {
    let map = FnMap::new(2, 2, |x: &[f64]| MapJet {
        x: x.to_vec(),
        u: vec![x[0] * x[0], x[1]],
        jacobian: DMatrix::from_row_slice(2, 2, &[2.0 * x[0], 0.0, 0.0, 1.0]),
        hessian: Some(vec![DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 0.0, 0.0]), DMatrix::zeros(2, 2)]),
    });
    let s = ExtSpace::euclidean(2);
    SmithProblem::new(Direction::Immersion, Arc::new(map), Arc::new(Euclidean(2)), Arc::new(Euclidean(2)), Arc::new(ConstantForm(KForm::volume(&s))))
        .unwrap()
}

/// T³ → T⁴, k = 3, with non-flat metrics on both sides.
pub fn curved_immersion() -> SmithProblem<f64> {
    let map = FnMap::new(3, 4, |x: &[f64]| {
        let (s1, c1, s2, c2, s3, c3) = (x[0].sin(), x[0].cos(), x[1].sin(), x[1].cos(), x[2].sin(), x[2].cos());
        let u = vec![x[0], x[1] + 0.3 * s1 * s3, x[2], 0.2 * s2 + 0.1 * c1];
        let j = DMatrix::from_row_slice(4, 3, &[1.0, 0.0, 0.0, 0.3 * c1 * s3, 1.0, 0.3 * s1 * c3, 0.0, 0.0, 1.0, -0.1 * s1, 0.2 * c2, 0.0]);
        MapJet { x: x.to_vec(), u, jacobian: j, hessian: None }
    });
    let g = FnMetric::new(3, |x: &[f64]| DMatrix::from_diagonal(&DVector::from_vec(vec![1.0 + 0.2 * x[1].sin().powi(2), 1.0, 1.0])));
    let h = FnMetric::new(4, |u: &[f64]| {
        let mut m = DMatrix::identity(4, 4);
        m[(1, 1)] += 0.3 * u[3].cos().powi(2);
        m
    });
    let alpha = KForm::basis(&ExtSpace::euclidean(4), &[0, 1, 2]).unwrap();
    SmithProblem::new(Direction::Immersion, Arc::new(map), Arc::new(g), Arc::new(h), Arc::new(ConstantForm(alpha))).unwrap()
}

/// T⁴ → T³, k = 3, with a non-flat base metric.
pub fn curved_submersion() -> SmithProblem<f64> {
    let map = FnMap::new(4, 3, |y: &[f64]| {
        let u = vec![y[0] + 0.2 * y[3].sin(), y[1] + 0.1 * y[2].sin(), y[2] + 0.3 * y[0].sin() * y[3].cos()];
        #[rustfmt::skip]
        let j = DMatrix::from_row_slice(3, 4, &[
            1.0, 0.0, 0.0, 0.2 * y[3].cos(),
            0.0, 1.0, 0.1 * y[2].cos(), 0.0,
            0.3 * y[0].cos() * y[3].cos(), 0.0, 1.0, -0.3 * y[0].sin() * y[3].sin(),
        ]);
        MapJet { x: y.to_vec(), u, jacobian: j, hessian: None }
    });
    let h = FnMetric::new(3, |u: &[f64]| {
        let mut m = DMatrix::identity(3, 3);
        m[(0, 0)] += 0.2 * u[1].sin().powi(2);
        m
    });
    let alpha = KForm::basis(&ExtSpace::euclidean(4), &[3]).unwrap();
    SmithProblem::new(Direction::Submersion, Arc::new(map), Arc::new(Euclidean(4)), Arc::new(h), Arc::new(ConstantForm(alpha))).unwrap()
}

pub fn non_smith_cases() -> Vec<Case> {
    let bump = || Support::Bump { center: vec![0.4, 0.1], radius: 0.5 };
    vec![
        Case { name: "(x1^2, x2)", prob: square_x1(), plan: vec![(bump(), 0, 120, false), (bump(), 1, 120, true)] },
        Case {
            name: "curved T3 -> T4 immersion",
            prob: curved_immersion(),
            plan: vec![
                (Support::Torus { dim: 3, shift: vec![0.3, 1.1, -0.7] }, 1, 24, false),
                (Support::Torus { dim: 3, shift: vec![2.0, 0.2, 0.9] }, 3, 24, false),
            ],
        },
        Case {
            name: "curved T4 -> T3 submersion",
            prob: curved_submersion(),
            plan: vec![
                (Support::Torus { dim: 4, shift: vec![0.3, 1.1, -0.7, 0.5] }, 0, 16, false),
                (Support::Torus { dim: 4, shift: vec![2.0, 0.2, 0.9, -1.3] }, 2, 16, false),
            ],
        },
    ]
}
