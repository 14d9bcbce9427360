mod common;

use approx::assert_abs_diff_eq;
use common::*;
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use smithcal::calibration::*;
use smithcal::exterior::{index::subsets, ExtSpace, KForm, KVector, Orientation};
use smithcal::geometry::{horizontal_split, Split};
use smithcal::Error;

fn e(n: usize, i: usize) -> DVector<f64> {
    DVector::from_fn(n, |r, _| if r == i { 1.0 } else { 0.0 })
}

fn terms_of(a: &KForm<f64>) -> Terms {
    a.terms().into_iter().collect()
}

fn phi() -> KForm<f64> {
    standard_form(StandardCalibration::Associative, 7).unwrap().form
}

#[test]
fn phi_matches_table_expansion() {
    assert_eq!(terms_of(&phi()), expand_words(&phi_table()));
    assert_eq!(phi().evaluate(&[e(7, 0), e(7, 1), e(7, 3)]).unwrap(), 0.0);
    assert_eq!(phi().evaluate(&[e(7, 0), e(7, 1), e(7, 2)]).unwrap(), 1.0);
}

#[test]
fn e1_contract_phi() {
    let s = ExtSpace::<f64>::euclidean(7);
    let expect = KForm::from_terms(&s, 2, [(&[1usize, 2][..], 1.0), (&[3, 4][..], 1.0), (&[5, 6][..], 1.0)]).unwrap();
    assert_eq!(phi().interior(&e(7, 0)).unwrap(), expect);
}

#[test]
fn psi_is_star_phi() {
    let psi = standard_form::<f64>(StandardCalibration::Coassociative, 7).unwrap().form;
    // independent star: c_{I^c} = sign(I, I^c) a_I on Euclidean ℝ⁷
    let mut oracle = Terms::new();
    for (idx, c) in terms_of(&phi()) {
        let comp: Vec<usize> = (0..7).filter(|i| !idx.contains(i)).collect();
        let mut word = idx.clone();
        word.extend(comp.iter());
        oracle.insert(comp, c * perm_sign(&word));
    }
    assert_eq!(terms_of(&psi), oracle);
}

#[test]
fn kaehler_examples() {
    let w = standard_form::<f64>(StandardCalibration::Kaehler, 4).unwrap().form;
    assert_eq!(w.evaluate(&[e(4, 0), e(4, 1)]).unwrap(), 1.0);
    let w2 = standard_form::<f64>(StandardCalibration::KaehlerPower(2), 6).unwrap().form;
    // ω²/2 by hand: ω² = Σ_{i≠j} ω_i ω_j, halved
    let pairs = [[1, 2], [3, 4], [5, 6]];
    let mut words = Vec::new();
    for a in pairs {
        for b in pairs {
            words.push((vec![a[0], a[1], b[0], b[1]], 0.5));
        }
    }
    assert_eq!(terms_of(&w2), expand_words(&words));
}

#[test]
fn special_lagrangian_small_cases() {
    let s4 = ExtSpace::<f64>::euclidean(4);
    let re = standard_form::<f64>(StandardCalibration::SpecialLagrangian, 4).unwrap().form;
    let expect = KForm::from_terms(&s4, 2, [(&[0usize, 2][..], 1.0), (&[1, 3][..], -1.0)]).unwrap();
    assert_eq!(re, expect);
    // m = 3: Re (dz1 dz2 dz3) = e135 − e146 − e236 − e245
    let re3 = standard_form::<f64>(StandardCalibration::SpecialLagrangian, 6).unwrap().form;
    let words = vec![(vec![1, 3, 5], 1.0), (vec![1, 4, 6], -1.0), (vec![2, 3, 6], -1.0), (vec![2, 4, 5], -1.0)];
    assert_eq!(terms_of(&re3), expand_words(&words));
}

#[test]
fn cayley_structure() {
    let c = standard_form::<f64>(StandardCalibration::Cayley, 8).unwrap().form;
    assert_eq!(c.coeff(&[0, 1, 2, 3]), 1.0);
    assert_eq!(c.coeff(&[4, 5, 6, 7]), 1.0);
    assert!(c.hodge_star().max_abs_diff(&c) < 1e-15);
    assert_eq!(c.terms().len(), 14);
}

#[test]
fn unknown_pairs_rejected() {
    assert!(matches!(standard_form::<f64>(StandardCalibration::Associative, 8), Err(Error::UnknownCalibration { .. })));
    assert!(matches!(standard_form::<f64>(StandardCalibration::Kaehler, 5), Err(Error::UnknownCalibration { .. })));
    assert!(matches!(standard_form::<f64>(StandardCalibration::KaehlerPower(3), 4), Err(Error::UnknownCalibration { .. })));
    assert!("octonionic".parse::<StandardCalibration>().is_err());
    assert_eq!("kaehler-power:3".parse::<StandardCalibration>().unwrap(), StandardCalibration::KaehlerPower(3));
}

fn quick() -> ComassConfig<f64> {
    ComassConfig { restarts: 24, ..Default::default() }
}

#[test]
fn comass_trivial_cases() {
    let s = ExtSpace::<f64>::euclidean(4);
    let a = KForm::basis(&s, &[0, 1]).unwrap();
    let est = comass_estimate(&a, &quick()).unwrap();
    assert_abs_diff_eq!(est.value, 1.0, epsilon = 1e-10);
    let est2 = comass_estimate(&a.scale(2.0), &quick()).unwrap();
    assert_abs_diff_eq!(est2.value, 2.0, epsilon = 1e-10);
    assert!(matches!(
        comass_estimate(&a, &ComassConfig { restarts: 0, ..Default::default() }),
        Err(Error::InvalidInput(_))
    ));
    assert!(matches!(comass_estimate(&KForm::one(&s), &quick()), Err(Error::Degree(_))));
    // top degree: |c| exactly
    let v = KForm::basis(&s, &[0, 1, 2, 3]).unwrap().scale(-3.0);
    assert_abs_diff_eq!(comass_estimate(&v, &quick()).unwrap().value, 3.0, epsilon = 1e-14);
}

#[test]
fn comass_under_metric() {
    // on (ℝ², diag(4, 9)) the unit form e¹² has comass 1/√det g = 1/6
    let s = ExtSpace::with_metric(DMatrix::from_diagonal(&DVector::from_vec(vec![4.0, 9.0, 1.0])), Orientation::Positive).unwrap();
    let a = KForm::basis(&s, &[0, 1]).unwrap();
    let est = comass_estimate(&a, &quick()).unwrap();
    assert_abs_diff_eq!(est.value, 1.0 / 6.0, epsilon = 1e-10);
    assert!(gram_defect(&s, &est.frame) < 1e-12);
}

#[test]
fn comass_of_phi_and_frame_is_calibrated() {
    let est = comass_estimate(&phi(), &ComassConfig { restarts: 40, ..Default::default() }).unwrap();
    assert!((est.value - 1.0).abs() < 1e-6, "{}", est.value);
    let t = is_calibrated_plane(&phi(), &est.frame, 1e-8).unwrap();
    assert!(t.calibrated);
}

#[test]
fn broken_table_is_not_a_calibration() {
    let mut table = ConventionTable::default();
    let t = table.phi.iter_mut().find(|t| t.indices == [2, 5, 7]).unwrap();
    t.sign = 1;
    let broken = standard_form_with::<f64>(StandardCalibration::Associative, 7, &table).unwrap().form;
    let est = comass_estimate(&broken, &ComassConfig { restarts: 40, ..Default::default() }).unwrap();
    assert!(est.value > 1.0 + 1e-3, "{}", est.value);
    let star = comass_estimate(&broken.hodge_star(), &ComassConfig { restarts: 40, ..Default::default() }).unwrap();
    assert!(star.value > 1.0 + 1e-3, "{}", star.value);
}

#[test]
fn plane_examples() {
    let p = phi();
    let t = is_calibrated_plane(&p, &[e(7, 0), e(7, 1), e(7, 2)], 1e-12).unwrap();
    assert!(t.calibrated && t.value == 1.0);
    let t = is_calibrated_plane(&p, &[e(7, 1), e(7, 0), e(7, 2)], 1e-12).unwrap();
    assert!(!t.calibrated && t.value == -1.0);
    let w = kaehler::<f64>(4);
    let t = is_calibrated_plane(&w, &[e(4, 0), e(4, 2)], 1e-12).unwrap();
    assert!(!t.calibrated && t.value == 0.0);
    let bad = vec![e(7, 0), e(7, 0) * 2.0, e(7, 2)];
    assert!(matches!(is_calibrated_plane(&p, &bad, 1e-12), Err(Error::NotOrthonormal(_))));
}

#[test]
fn first_cousin_examples() {
    let p = phi();
    let f = [e(7, 0), e(7, 1), e(7, 2)];
    assert_eq!(first_cousin_check(&p, &f, &e(7, 3)).unwrap(), 0.0);
    assert_eq!(first_cousin_check(&p, &f, &DVector::zeros(7)).unwrap(), 0.0);
    let w2 = kaehler_power::<f64>(6, 2);
    let f4 = [e(6, 0), e(6, 1), e(6, 2), e(6, 3)];
    assert_eq!(first_cousin_check(&w2, &f4, &e(6, 4)).unwrap(), 0.0);
    // uncalibrated frame: the lemma does not apply
    let g = [e(7, 0), e(7, 1), e(7, 3)];
    assert!(matches!(first_cousin_check(&p, &g, &e(7, 4)), Err(Error::Precondition(_))));
}

#[test]
fn p_alpha_examples() {
    let p = phi();
    let s7 = p.space().clone();
    let w = KVector::basis(&s7, &[0, 1]).unwrap();
    assert_eq!(p_alpha(&p, &w).unwrap(), e(7, 2));
    let om = kaehler::<f64>(4);
    let s4 = om.space().clone();
    assert_eq!(p_alpha(&om, &KVector::basis(&s4, &[0]).unwrap()).unwrap(), e(4, 1));
    assert_eq!(p_alpha(&om, &KVector::zero(&s4, 1)).unwrap(), DVector::zeros(4));
    assert!(matches!(p_alpha(&om, &KVector::basis(&s4, &[0, 1]).unwrap()), Err(Error::Degree(_))));
    assert_eq!(p_alpha_adjoint(&om, &e(4, 1)).unwrap(), KVector::basis(&s4, &[0]).unwrap());
    assert_eq!(p_alpha_adjoint(&om, &DVector::zeros(4)).unwrap(), KVector::zero(&s4, 1));
}

#[test]
fn pp_top_examples() {
    let s = ExtSpace::<f64>::euclidean(4);
    let du = DMatrix::from_row_slice(2, 4, &[1.0, 0.0, 0.0, 0.0, 0.0, 1.0, 0.0, 0.0]);
    let Split::Regular(f) = horizontal_split(&du, &s, &ExtSpace::euclidean(2), 1e-8).unwrap() else { panic!() };
    let a = KForm::basis(&s, &[0, 1]).unwrap();
    assert!(pp_top_check(&a, &f, 1e-12).unwrap() < 1e-14);
    assert!(pp_top_check(&KForm::zero(&s, 2), &f, 1e-12).unwrap() == 0.0);
    assert!(pp_top_check(&a.scale(3.5), &f, 1e-12).unwrap() < 1e-13);
    let mixed = KForm::basis(&s, &[0, 2]).unwrap();
    assert!(matches!(pp_top_check(&mixed, &f, 1e-12), Err(Error::Precondition(_))));
}

#[test]
fn json_loader() {
    let a: KForm<f64> = form_from_json(r#"{"dim":4,"degree":2,"terms":[{"indices":[1,2],"coeff":2.0}]}"#).unwrap();
    assert_eq!(a.coeff(&[0, 1]), 2.0);
    for bad in [
        r#"{"dim":4,"degree":2,"terms":[{"indices":[1,2],"coeff":1},{"indices":[1,2],"coeff":1}]}"#,
        r#"{"dim":4,"degree":2,"terms":[{"indices":[2,1],"coeff":1}]}"#,
        r#"{"dim":4,"degree":2,"terms":[{"indices":[0,1],"coeff":1}]}"#,
        r#"{"dim":4,"degree":2,"terms":[{"indices":[1,5],"coeff":1}]}"#,
        r#"{"dim":4,"degree":2,"terms":[{"indices":[1],"coeff":1}]}"#,
        r#"{"dim":4,"degree":5,"terms":[]}"#,
    ] {
        assert!(form_from_json::<f64>(bad).is_err(), "{bad}");
    }
    let doc = FormDocument::from_form(&phi());
    let back: KForm<f64> = doc.to_form().unwrap();
    assert_eq!(back, phi());
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(300))]

    #[test]
    fn adjoint_identity(n in 2usize..=7, seed in any::<u64>()) {
        let mut r = rng(seed);
        let k = 1 + (seed as usize) % n;
        let s = if seed % 2 == 0 { ExtSpace::euclidean(n) } else { ExtSpace::with_metric(random_spd(&mut r, n), Orientation::Positive).unwrap() };
        let a = KForm::from_coeffs(&s, k, (0..subsets(n, k).len()).map(|_| gauss(&mut r)).collect()).unwrap();
        let w = KVector::from_coeffs(&s, k - 1, (0..subsets(n, k - 1).len()).map(|_| gauss(&mut r)).collect()).unwrap();
        let v = gauss_vec(&mut r, n);
        let pw = p_alpha(&a, &w).unwrap();
        let lhs = (pw.transpose() * s.metric() * &v)[(0, 0)];
        let rhs = w.inner(&p_alpha_adjoint(&a, &v).unwrap()).unwrap();
        prop_assert!((lhs - rhs).abs() <= 1e-12 * (1.0 + a.norm() * w.norm() * v.norm()) * 10.0);
        // defining property on basis vectors
        for j in 0..n {
            let ej = e(n, j);
            let val = a.pair(&w.wedge(&KVector::from_vector(&s, &ej).unwrap()).unwrap()).unwrap();
            let lhs = (pw.transpose() * s.metric() * &ej)[(0, 0)];
            prop_assert!((lhs - val).abs() <= 1e-11 * (1.0 + val.abs()));
        }
    }
}
