//! Multi-index bookkeeping: colex ranks, complements and permutation signs.

use std::sync::OnceLock;

/// Largest supported dimension.
pub const MAX_DIM: usize = 16;

const fn binomial_table() -> [[usize; MAX_DIM + 1]; MAX_DIM + 1] {
    let mut t = [[0usize; MAX_DIM + 1]; MAX_DIM + 1];
    let mut n = 0;
    while n <= MAX_DIM {
        t[n][0] = 1;
        let mut k = 1;
        while k <= n {
            t[n][k] = t[n - 1][k - 1] + if k < n { t[n - 1][k] } else { 0 };
            k += 1;
        }
        n += 1;
    }
    t
}

static BINOM: [[usize; MAX_DIM + 1]; MAX_DIM + 1] = binomial_table();

/// C(n, k), zero when k > n.
#[inline]
pub fn binomial(n: usize, k: usize) -> usize {
    if k > n || n > MAX_DIM {
        if k > n {
            return 0;
        }
        panic!("dimension {n} exceeds cap {MAX_DIM}");
    }
    BINOM[n][k]
}

/// Colex rank of a strictly increasing 0-based index list.
#[inline]
pub fn rank(idx: &[usize]) -> usize {
    idx.iter().enumerate().map(|(m, &i)| if i > m { BINOM[i][m + 1] } else { 0 }).sum()
}

#[allow(clippy::declare_interior_mutable_const)]
const EMPTY: OnceLock<Vec<Vec<usize>>> = OnceLock::new();
#[allow(clippy::declare_interior_mutable_const)]
const ROW: [OnceLock<Vec<Vec<usize>>>; MAX_DIM + 1] = [EMPTY; MAX_DIM + 1];
static SUBSETS: [[OnceLock<Vec<Vec<usize>>>; MAX_DIM + 1]; MAX_DIM + 1] = [ROW; MAX_DIM + 1];

/// All k-subsets of {0..n} in colex order, so `subsets(n,k)[rank(I)] == I`.
pub fn subsets(n: usize, k: usize) -> &'static [Vec<usize>] {
    assert!(n <= MAX_DIM, "dimension {n} exceeds cap {MAX_DIM}");
    if k > n {
        return &[];
    }
    SUBSETS[n][k].get_or_init(|| {
        let mut out = Vec::with_capacity(binomial(n, k));
        let mut cur: Vec<usize> = (0..k).collect();
        loop {
            out.push(cur.clone());
            // colex successor: bump the first index that has room
            let mut m = 0;
            while m < k {
                let limit = if m + 1 < k { cur[m + 1] } else { n };
                if cur[m] + 1 < limit {
                    cur[m] += 1;
                    for (j, c) in cur.iter_mut().enumerate().take(m) {
                        *c = j;
                    }
                    break;
                }
                m += 1;
            }
            if m == k {
                break;
            }
        }
        out
    })
}

/// Sign of the permutation sorting `idx`, or `None` if an index repeats.
pub fn sort_sign(idx: &[usize]) -> Option<(Vec<usize>, i32)> {
    let mut v = idx.to_vec();
    let mut sign = 1;
    for i in 1..v.len() {
        let mut j = i;
        while j > 0 && v[j - 1] > v[j] {
            v.swap(j - 1, j);
            sign = -sign;
            j -= 1;
        }
    }
    if v.windows(2).any(|w| w[0] == w[1]) {
        None
    } else {
        Some((v, sign))
    }
}

/// Sign of the shuffle that sorts the concatenation (I, J) of disjoint sorted lists.
pub fn shuffle_sign(a: &[usize], b: &[usize]) -> i32 {
    let mut inversions = 0usize;
    for &i in a {
        inversions += b.iter().filter(|&&j| j < i).count();
    }
    if inversions.is_multiple_of(2) {
        1
    } else {
        -1
    }
}

/// Sorted union of disjoint sorted lists, or `None` when they meet.
pub fn merge_disjoint(a: &[usize], b: &[usize]) -> Option<Vec<usize>> {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i] < b[j]) {
            out.push(a[i]);
            i += 1;
        } else if i == a.len() || b[j] < a[i] {
            out.push(b[j]);
            j += 1;
        } else {
            return None;
        }
    }
    Some(out)
}

/// Complement of a sorted index list in {0..n}.
pub fn complement(idx: &[usize], n: usize) -> Vec<usize> {
    (0..n).filter(|i| !idx.contains(i)).collect()
}
