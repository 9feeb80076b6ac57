use std::collections::BTreeMap;

use crate::rational::Rational;

/// Solves `A x = b` exactly, `A` given as sparse rows `column -> coefficient`.
///
/// Returns `None` if `A` is singular.
pub fn solve_sparse(mut rows: Vec<BTreeMap<usize, Rational>>, mut rhs: Vec<Rational>) -> Option<Vec<Rational>> {
    let n = rows.len();
    assert_eq!(rhs.len(), n);
    for k in 0..n {
        // Sparsest row with a nonzero in column k keeps fill-in down.
        let pivot = (k..n)
            .filter(|&i| rows[i].contains_key(&k))
            .min_by_key(|&i| rows[i].len())?;
        rows.swap(k, pivot);
        rhs.swap(k, pivot);
        let (head, tail) = rows.split_at_mut(k + 1);
        let prow = &head[k];
        let pval = prow[&k].clone();
        for (off, row) in tail.iter_mut().enumerate() {
            let Some(coef) = row.remove(&k) else { continue };
            let factor = &coef / &pval;
            for (&j, v) in prow.range(k + 1..) {
                let entry = row.entry(j).or_default();
                *entry = &*entry - &(&factor * v);
                if entry.is_zero() {
                    row.remove(&j);
                }
            }
            let i = k + 1 + off;
            rhs[i] = &rhs[i] - &(&factor * &rhs[k]);
        }
    }
    let mut x = vec![Rational::zero(); n];
    for k in (0..n).rev() {
        let mut acc = rhs[k].clone();
        for (&j, v) in rows[k].range(k + 1..) {
            acc = &acc - &(v * &x[j]);
        }
        x[k] = &acc / &rows[k][&k];
    }
    Some(x)
}
