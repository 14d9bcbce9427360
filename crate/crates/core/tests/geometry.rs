mod common;

use std::sync::Arc;

use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use smithcal::exterior::{ExtSpace, KForm, Orientation};
use smithcal::geometry::*;

fn e(n: usize, i: usize) -> DVector<f64> {
    DVector::from_fn(n, |j, _| if i == j { 1.0 } else { 0.0 })
}

fn split_of(du: DMatrix<f64>, h: Option<DMatrix<f64>>) -> Split<f64> {
    let n = du.ncols();
    let m = du.nrows();
    let dom = match h {
        Some(h) => ExtSpace::with_metric(h, Orientation::Positive).unwrap(),
        None => ExtSpace::euclidean(n),
    };
    horizontal_split(&du, &dom, &ExtSpace::euclidean(m), RANK_TOL).unwrap()
}

fn projection(n: usize, k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(k, n, |i, j| if i == j { 1.0 } else { 0.0 })
}

#[test]
fn christoffel_flat_is_zero() {
    let g = Euclidean(3);
    let c = christoffel(&g, &[0.3, 0.1, -0.2], &FdConfig::default()).unwrap();
    assert_eq!(c.max_abs(), 0.0);
}

#[test]
fn christoffel_round_sphere() {
    // g = dθ² + sin²θ dφ²; Γ^θ_φφ = −sinθ cosθ, Γ^φ_θφ = cotθ
    let g = FnMetric::new(2, |x: &[f64]| DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, x[0].sin().powi(2)]));
    let c = christoffel(&g, &[1.0, 0.4], &FdConfig::default()).unwrap();
    assert!((c.get(0, 1, 1) + 1f64.sin() * 1f64.cos()).abs() < 1e-7);
    assert!((c.get(1, 0, 1) - 1f64.cos() / 1f64.sin()).abs() < 1e-7);
    assert_eq!(c.get(1, 0, 1), c.get(1, 1, 0));
    assert!(c.get(0, 0, 0).abs() < 1e-9);
}

#[test]
fn christoffel_conformal_flat() {
    // g = e^{2f} δ with f = a·x: Γ^k_ij = δ^k_i a_j + δ^k_j a_i − δ_ij a_k
    let a = [0.3, -0.2, 0.5];
    let g = FnMetric::new(3, move |x: &[f64]| {
        let f: f64 = (0..3).map(|i| a[i] * x[i]).sum();
        DMatrix::identity(3, 3) * (2.0 * f).exp()
    });
    let c = christoffel(&g, &[0.1, 0.2, -0.1], &FdConfig::default()).unwrap();
    let d = |i: usize, j: usize| if i == j { 1.0 } else { 0.0 };
    for k in 0..3 {
        for i in 0..3 {
            for j in 0..3 {
                let want = d(k, i) * a[j] + d(k, j) * a[i] - d(i, j) * a[k];
                assert!((c.get(k, i, j) - want).abs() < 1e-7, "Γ^{k}_{i}{j}");
            }
        }
    }
}

#[test]
fn pullback_metric_examples() {
    let id = DMatrix::<f64>::identity(3, 3);
    assert_eq!(pullback_metric(&id, &id), id);
    let two = DMatrix::<f64>::identity(2, 2) * 2.0;
    assert_eq!(pullback_metric(&two, &DMatrix::identity(2, 2)), DMatrix::identity(2, 2) * 4.0);
    let t = 0.7f64;
    let helix = DMatrix::from_column_slice(3, 1, &[-t.sin(), t.cos(), 1.0]);
    let p = pullback_metric(&helix, &DMatrix::identity(3, 3));
    assert!((p[(0, 0)] - 2.0).abs() < 1e-15);
}

#[test]
fn du_norm_examples() {
    let id = DMatrix::<f64>::identity(3, 3);
    assert!((du_norm_sq(&id, &id, &id).unwrap() - 3.0).abs() < 1e-15);
    let d = DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, 2.0]);
    assert!((du_norm_sq::<f64>(&d, &DMatrix::identity(2, 2), &DMatrix::identity(2, 2)).unwrap() - 5.0).abs() < 1e-14);
    // isometric immersion: orthonormal columns
    let q = DMatrix::from_row_slice(3, 2, &[0.6, 0.0, 0.8, 0.0, 0.0, 1.0]);
    assert!((du_norm_sq::<f64>(&q, &DMatrix::identity(2, 2), &DMatrix::identity(3, 3)).unwrap() - 2.0).abs() < 1e-14);
}

#[test]
fn split_of_projection() {
    let s = split_of(projection(4, 2), None);
    let f = s.frame().unwrap();
    assert!(s.is_regular());
    for v in &f.vertical {
        assert!(v[0].abs() < 1e-14 && v[1].abs() < 1e-14);
    }
    for h in &f.horizontal {
        assert!(h[2].abs() < 1e-14 && h[3].abs() < 1e-14);
    }
    // du maps the horizontal frame to a positive basis
    let img = projection(4, 2) * DMatrix::from_columns(&f.horizontal);
    assert!(img.determinant() > 0.0);
    let mut all = f.vertical.clone();
    all.extend(f.horizontal.iter().cloned());
    assert!(DMatrix::from_columns(&all).determinant() > 0.0);
}

#[test]
fn split_critical_and_kernel() {
    assert!(matches!(split_of(DMatrix::zeros(2, 3), None), Split::Critical));
    let s2 = std::f64::consts::FRAC_1_SQRT_2;
    let du = DMatrix::from_row_slice(1, 3, &[s2, s2, 0.0]);
    let s = split_of(du.clone(), None);
    let f = s.frame().unwrap();
    assert_eq!(f.rank, 1);
    assert_eq!(f.vertical.len(), 2);
    for v in &f.vertical {
        assert!((&du * v).norm() < 1e-10);
    }
    let deg = split_of(DMatrix::from_row_slice(2, 3, &[1.0, 0.0, 0.0, 2.0, 0.0, 0.0]), None);
    assert!(matches!(deg, Split::Degenerate(_)));
}

#[test]
fn type_examples() {
    let s = split_of(projection(4, 2), None);
    let f = s.frame().unwrap();
    let sp = ExtSpace::euclidean(4);
    let e13 = KForm::basis(&sp, &[0, 2]).unwrap();
    assert_eq!(f.pure_type(&e13, 1e-12).unwrap(), Some((1, 1)));
    let vol = KForm::volume(&sp);
    assert_eq!(f.pure_type(&vol, 1e-12).unwrap(), Some((2, 2)));

    // e₃ ⌟ (e³∧e¹) = e¹ of type (0,1); e₁ ⌟ (e³∧e¹) = −e³ of type (1,0)
    let a = KForm::basis(&sp, &[2]).unwrap().wedge(&KForm::basis(&sp, &[0]).unwrap()).unwrap();
    let r = a.interior(&e(4, 2)).unwrap();
    assert_eq!(r.coeff(&[0]), 1.0);
    assert_eq!(f.pure_type(&r, 1e-12).unwrap(), Some((0, 1)));
    let r = a.interior(&e(4, 0)).unwrap();
    assert_eq!(r.coeff(&[2]), -1.0);
    assert_eq!(f.pure_type(&r, 1e-12).unwrap(), Some((1, 0)));
}

#[test]
fn type_decomposition_by_evaluation() {
    // a sheared split in a curved metric, checked by evaluating components on frame tuples
    let mut r = rng(11);
    let n = 5;
    let h = random_spd(&mut r, n);
    let du = gauss_mat(&mut r, 2, n);
    let s = split_of(du, Some(h.clone()));
    let f = s.frame().unwrap();
    let sp = ExtSpace::with_metric(h, Orientation::Positive).unwrap();
    let a = KForm::from_coeffs(&sp, 3, (0..10).map(|_| gauss(&mut r)).collect()).unwrap();
    let parts = f.type_decompose(&a).unwrap();
    let mut sum = KForm::zero(&sp, 3);
    for c in parts.values() {
        sum = &sum + c;
    }
    assert!(sum.max_abs_diff(&a) < 1e-12);
    let frame: Vec<(DVector<f64>, bool)> = f
        .vertical
        .iter()
        .map(|v| (v.clone(), true))
        .chain(f.horizontal.iter().map(|v| (v.clone(), false)))
        .collect();
    for tuple in k_subsets(n, 3) {
        let vs: Vec<DVector<f64>> = tuple.iter().map(|&i| frame[i].0.clone()).collect();
        let p = tuple.iter().filter(|&&i| frame[i].1).count();
        for ((pp, qq), c) in &parts {
            let val = c.evaluate(&vs).unwrap();
            if *pp != p {
                assert!(val.abs() < 1e-11, "({pp},{qq}) on a tuple with {p} vertical");
            } else {
                assert!((val - a.evaluate(&vs).unwrap()).abs() < 1e-11);
            }
        }
    }
    // star exchanges types (p,q) ↦ (n−k−p, k−q)
    for ((p, q), c) in &parts {
        let st = c.hodge_star();
        assert_eq!(f.pure_type(&st, 1e-10).unwrap(), Some((3 - p, 2 - q)));
    }
}

#[test]
fn covariant_derivative_examples() {
    let fd = FdConfig::default();
    let sp = ExtSpace::<f64>::euclidean(3);
    let c = ConstantForm(KForm::basis(&sp, &[0, 1]).unwrap());
    let d = covariant_derivative_form(&c, &Euclidean(3), &e(3, 0), &[0.0; 3], &fd).unwrap();
    assert_eq!(d.max_abs(), 0.0);
    let sp2 = sp.clone();
    let lin = FnForm::new(3, 2, move |x: &[f64]| KForm::basis(&sp2, &[0, 1]).unwrap().scale(x[0]));
    let d = covariant_derivative_form(&lin, &Euclidean(3), &e(3, 0), &[0.4, 0.0, 0.0], &fd).unwrap();
    assert!((d.coeff(&[0, 1]) - 1.0).abs() < 1e-9);
}

#[test]
fn volume_form_is_parallel() {
    // vol_g = √det g dx¹∧dx²∧dx³ for a curved g
    let metric = |x: &[f64]| {
        DMatrix::from_row_slice(3, 3, &[
            1.0 + 0.3 * x[0].sin(), 0.1 * x[1], 0.0,
            0.1 * x[1], 2.0 + x[2] * x[2], 0.2,
            0.0, 0.2, 1.5 + 0.2 * x[0].cos(),
        ])
    };
    let g = Arc::new(FnMetric::new(3, metric));
    let sp = ExtSpace::<f64>::euclidean(3);
    let vol = FnForm::new(3, 3, move |x: &[f64]| KForm::volume(&sp).scale(metric(x).determinant().sqrt()));
    for v in [e(3, 0), e(3, 1), e(3, 2)] {
        let d = covariant_derivative_form(&vol, g.as_ref(), &v, &[0.3, -0.2, 0.5], &FdConfig::default()).unwrap();
        assert!(d.max_abs() < 1e-6, "{}", d.max_abs());
    }
}

#[test]
fn metricity_of_christoffels() {
    // ∂_k g_ij = Γ^l_ki g_lj + Γ^l_kj g_il
    let g = FnMetric::new(2, |x: &[f64]| {
        DMatrix::from_row_slice(2, 2, &[2.0 + x[0].sin(), 0.3 * x[1], 0.3 * x[1], 1.0 + x[0] * x[0]])
    });
    let fd = FdConfig::with_step(1e-4);
    let x = [0.4, 0.9];
    let c = christoffel(&g, &x, &fd).unwrap();
    let dg = metric_derivatives(&g, &x, &fd);
    let gx = g.eval(&x);
    for k in 0..2 {
        for i in 0..2 {
            for j in 0..2 {
                let mut s = 0.0;
                for l in 0..2 {
                    s += c.get(l, k, i) * gx[(l, j)] + c.get(l, k, j) * gx[(i, l)];
                }
                assert!((dg[k][(i, j)] - s).abs() < 2e-6);
            }
        }
    }
}

#[test]
fn divergence_examples() {
    let fd = FdConfig::default();
    let lin = AffineMap::linear(DMatrix::from_row_slice(2, 3, &[1.0, 2.0, 0.0, -1.0, 0.5, 3.0]));
    let du = lin.a.clone();
    let b = move |_: &[f64]| du.clone();
    let d = divergence_mixed(&b, &lin, &Euclidean(3), &Euclidean(2), &[0.1, 0.2, 0.3], &fd).unwrap();
    assert!(d.norm() < 1e-12);
    // B = x¹ e¹ ⊗ ∂_b: divergence is ∂_b
    let b = |x: &[f64]| {
        let mut m = DMatrix::zeros(2, 3);
        m[(1, 0)] = x[0];
        m
    };
    let d = divergence_mixed(&b, &lin, &Euclidean(3), &Euclidean(2), &[0.1, 0.2, 0.3], &fd).unwrap();
    assert!(d[0].abs() < 1e-10 && (d[1] - 1.0).abs() < 1e-9);
}

#[test]
fn div_lambda_commute_examples() {
    let fd = FdConfig::with_step(1e-3);
    // constant P = · ⌟ β with β = e^{124}, q = 2, linear u ℝ⁴ → ℝ²
    let sp = ExtSpace::<f64>::euclidean(4);
    let beta = KForm::basis(&sp, &[0, 1, 3]).unwrap();
    let cols: Vec<DVector<f64>> =
        (0..4).map(|j| DVector::from_vec(beta.interior(&e(4, j)).unwrap().raise().coeffs().to_vec())).collect();
    let pm = DMatrix::from_columns(&cols);
    let p = move |_: &[f64]| pm.clone();
    let lin = AffineMap::linear(DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 2.0, 0.0, 0.0, 1.0, 0.0, -1.0]));
    let d = div_lambda_commute_check(&p, &lin, &Euclidean(4), &Euclidean(2), 2, &[0.2, 0.1, 0.0, 0.3], &fd).unwrap();
    assert!(d < 1e-10);
    // polynomial P = · ⌟ (f β) and quadratic u
    let beta2 = beta.clone();
    let p2 = move |x: &[f64]| {
        let c = 1.0 + x[0] * x[1] + 0.5 * x[2] * x[2];
        let cols: Vec<DVector<f64>> = (0..4)
            .map(|j| DVector::from_vec(beta2.interior(&e(4, j)).unwrap().raise().coeffs().to_vec()) * c)
            .collect();
        DMatrix::from_columns(&cols)
    };
    let quad = FnMap::new(4, 2, |x: &[f64]| MapJet {
        x: x.to_vec(),
        u: vec![x[0] + 0.3 * x[2] * x[2], x[1] - 0.2 * x[0] * x[3]],
        jacobian: DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.6 * x[2], 0.0, -0.2 * x[3], 1.0, 0.0, -0.2 * x[0]]),
        hessian: None,
    });
    let d = div_lambda_commute_check(&p2, &quad, &Euclidean(4), &Euclidean(2), 2, &[0.2, 0.1, 0.4, 0.3], &fd).unwrap();
    assert!(d < 1e-5, "{d}");
    // non-skew input is refused
    let bad = |_: &[f64]| DMatrix::from_element(6, 4, 1.0);
    assert!(div_lambda_commute_check(&bad, &lin, &Euclidean(4), &Euclidean(2), 2, &[0.0; 4], &fd).is_err());
}

#[test]
fn jet_batch_roundtrip() {
    let text = "{\"n1\":2,\"n2\":3}\n{\"x\":[0,0],\"u\":[0,0,0],\"J\":[[1,0],[0,1],[0,0]]}\n";
    let b = JetBatch::<f64>::read(text.as_bytes()).unwrap();
    assert_eq!(b.jets.len(), 1);
    let again = JetBatch::<f64>::read(b.to_jsonl().as_bytes()).unwrap();
    assert_eq!(again.jets[0].jacobian, b.jets[0].jacobian);
    let wrong = "{\"n1\":2,\"n2\":3}\n{\"x\":[0],\"u\":[0,0,0],\"J\":[[1,0],[0,1],[0,0]]}\n";
    assert!(JetBatch::<f64>::read(wrong.as_bytes()).is_err());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn split_invariants(n in 2usize..=7, kk in 1usize..=6, seed in any::<u64>()) {
        let k = kk.min(n - 1).max(1);
        let mut r = rng(seed);
        let h = random_spd(&mut r, n);
        let du = gauss_mat(&mut r, k, n);
        let s = split_of(du.clone(), Some(h.clone()));
        let f = s.frame().unwrap();
        prop_assert_eq!(f.rank, k);
        let mut all = f.vertical.clone();
        all.extend(f.horizontal.iter().cloned());
        for (i, a) in all.iter().enumerate() {
            for (j, b) in all.iter().enumerate() {
                let want = if i == j { 1.0 } else { 0.0 };
                prop_assert!(((a.transpose() * &h * b)[(0, 0)] - want).abs() < 1e-10);
            }
        }
        // tr_h h^{(0,2)} = k
        let hinv = h.clone().try_inverse().unwrap();
        prop_assert!(((&hinv * f.h02()).trace() - k as f64).abs() < 1e-10);
        // pullbacks are horizontal
        let target = ExtSpace::euclidean(k);
        let sp = ExtSpace::with_metric(h, Orientation::Positive).unwrap();
        let beta = KForm::from_coeffs(&target, 1, (0..k).map(|_| gauss(&mut r)).collect()).unwrap();
        let pulled = beta.pullback_matrix(&du, &sp).unwrap();
        prop_assert!(f.off_type_norm(&pulled, Some((0, 1))).unwrap() < 1e-12 * (1.0 + pulled.coeff_norm()));
    }

    #[test]
    fn interior_types(seed in any::<u64>()) {
        let mut r = rng(seed);
        let s = split_of(gauss_mat(&mut r, 3, 6), None);
        let f = s.frame().unwrap();
        let sp = ExtSpace::euclidean(6);
        let a = KForm::from_coeffs(&sp, 3, (0..20).map(|_| gauss(&mut r)).collect()).unwrap();
        let parts = f.type_decompose(&a).unwrap();
        let v = gauss_vec(&mut r, 6);
        for c in parts.values() {
            let rep = f.interior_type_check(&v, c, 1e-10).unwrap();
            prop_assert!(rep.vertical_defect < 1e-12 && rep.horizontal_defect < 1e-12);
        }
    }

    #[test]
    fn norm_formulas_agree(n1 in 1usize..=6, n2 in 1usize..=6, seed in any::<u64>()) {
        let mut r = rng(seed);
        let g = random_spd(&mut r, n1);
        let h = random_spd(&mut r, n2);
        let du = gauss_mat(&mut r, n2, n1);
        let a = du_norm_sq(&du, &g, &h).unwrap();
        let b = du_norm_sq_frame(&du, &g, &h).unwrap();
        prop_assert!((a - b).abs() <= 1e-12 * (1.0 + a));
    }
}
