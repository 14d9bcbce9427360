//! Independent oracles shared by the integration tests. Nothing here calls into
//! the library's combinatorics; forms are handled as plain coefficient maps.
#![allow(dead_code)]

use std::collections::BTreeMap;

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;

pub type Terms = BTreeMap<Vec<usize>, f64>;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn gauss(r: &mut ChaCha8Rng) -> f64 {
    r.sample(StandardNormal)
}

pub fn gauss_vec(r: &mut ChaCha8Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| gauss(r))
}

pub fn gauss_mat(r: &mut ChaCha8Rng, m: usize, n: usize) -> DMatrix<f64> {
    DMatrix::from_fn(m, n, |_, _| gauss(r))
}

/// Well-conditioned random SPD matrix.
pub fn random_spd(r: &mut ChaCha8Rng, n: usize) -> DMatrix<f64> {
    let b = gauss_mat(r, n, n) * 0.4;
    b.transpose() * b + DMatrix::identity(n, n)
}

/// Sign of a permutation of distinct integers, by counting inversions.
pub fn perm_sign(p: &[usize]) -> f64 {
    let mut inv = 0;
    for i in 0..p.len() {
        for j in i + 1..p.len() {
            if p[i] > p[j] {
                inv += 1;
            }
        }
    }
    if inv % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub fn permutations(k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for p in permutations(k - 1) {
        for pos in 0..=p.len() {
            let mut q = p.clone();
            q.insert(pos, k - 1);
            out.push(q);
        }
    }
    out
}

/// Value of the alternating tensor with coefficients `terms` on basis vectors `tuple`.
pub fn alt_value(terms: &Terms, tuple: &[usize]) -> f64 {
    let mut sorted = tuple.to_vec();
    sorted.sort();
    if sorted.windows(2).any(|w| w[0] == w[1]) {
        return 0.0;
    }
    let c = terms.get(&sorted).copied().unwrap_or(0.0);
    if c == 0.0 {
        return 0.0;
    }
    // sign of the permutation taking sorted to tuple
    let pos: Vec<usize> = tuple.iter().map(|t| sorted.iter().position(|s| s == t).unwrap()).collect();
    perm_sign(&pos) * c
}

pub fn factorial(k: usize) -> f64 {
    (1..=k).map(|i| i as f64).product()
}

pub fn k_subsets(n: usize, k: usize) -> Vec<Vec<usize>> {
    if k == 0 {
        return vec![vec![]];
    }
    let mut out = Vec::new();
    for last in k - 1..n {
        for mut s in k_subsets(last, k - 1) {
            s.push(last);
            out.push(s);
        }
    }
    out
}

/// Wedge by the permutation-sum definition (a∧b)(v) = Σ_σ sgn σ a(v_σ…) b(v_σ…) / (p! q!).
pub fn wedge_oracle(n: usize, a: &Terms, p: usize, b: &Terms, q: usize) -> Terms {
    let mut out = Terms::new();
    for idx in k_subsets(n, p + q) {
        let mut s = 0.0;
        for perm in permutations(p + q) {
            let t: Vec<usize> = perm.iter().map(|&i| idx[i]).collect();
            s += perm_sign(&perm) * alt_value(a, &t[..p]) * alt_value(b, &t[p..]);
        }
        s /= factorial(p) * factorial(q);
        if s != 0.0 {
            out.insert(idx, s);
        }
    }
    out
}

/// Determinant by Laplace cofactor expansion along the first row.
pub fn det_laplace(m: &DMatrix<f64>) -> f64 {
    let k = m.nrows();
    if k == 0 {
        return 1.0;
    }
    if k == 1 {
        return m[(0, 0)];
    }
    let mut s = 0.0;
    for j in 0..k {
        let sub = m.clone().remove_row(0).remove_column(j);
        let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
        s += sign * m[(0, j)] * det_laplace(&sub);
    }
    s
}

/// Minor det A[rows, cols] by cofactor expansion.
pub fn minor_oracle(a: &DMatrix<f64>, rows: &[usize], cols: &[usize]) -> f64 {
    let sub = DMatrix::from_fn(rows.len(), cols.len(), |i, j| a[(rows[i], cols[j])]);
    det_laplace(&sub)
}

/// Expand a product of sums of 1-based index words (each a Vec of (word, coeff)) into
/// a sorted-coefficient map; used to expand ω^p and similar by hand.
pub fn expand_words(words: &[(Vec<usize>, f64)]) -> Terms {
    let mut out = Terms::new();
    for (w, c) in words {
        let zero_based: Vec<usize> = w.iter().map(|i| i - 1).collect();
        let mut sorted = zero_based.clone();
        sorted.sort();
        if sorted.windows(2).any(|x| x[0] == x[1]) {
            continue;
        }
        let pos: Vec<usize> = zero_based.iter().map(|t| sorted.iter().position(|s| s == t).unwrap()).collect();
        *out.entry(sorted).or_insert(0.0) += perm_sign(&pos) * c;
    }
    out.retain(|_, v| *v != 0.0);
    out
}

/// Associative 3-form words under the documented table (1-based).
pub fn phi_table() -> Vec<(Vec<usize>, f64)> {
    vec![
        (vec![1, 2, 3], 1.0),
        (vec![1, 4, 5], 1.0),
        (vec![1, 6, 7], 1.0),
        (vec![2, 4, 6], 1.0),
        (vec![2, 5, 7], -1.0),
        (vec![3, 4, 7], -1.0),
        (vec![3, 5, 6], -1.0),
    ]
}
pub mod variation;
