//! Order-independent summation.
//!
//! Floating-point addition is not associative, so a neighbor sum taken in
//! node-id order changes in the last bits when the graph is relabeled. Every
//! aggregation in this crate sorts its terms first, which makes the result a
//! function of the multiset of terms alone: isomorphic inputs give bitwise
//! identical outputs.

use std::cmp::Ordering;

/// Sum of `values` after sorting them ascending (by `total_cmp`).
pub fn canonical_sum(values: &mut [f64]) -> f64 {
    values.sort_unstable_by(f64::total_cmp);
    values.iter().sum()
}

pub(crate) fn lex_cmp(a: &[f64], b: &[f64]) -> Ordering {
    for (x, y) in a.iter().zip(b) {
        match x.total_cmp(y) {
            Ordering::Equal => continue,
            other => return other,
        }
    }
    a.len().cmp(&b.len())
}

/// Reusable buffers for [`weighted_row_sum`].
#[derive(Default)]
pub struct SumScratch {
    rows: Vec<f64>,
    order: Vec<usize>,
}

/// Writes `Σ coef · rows[idx]` into `out`, where `rows` is a row-major matrix
/// of width `out.len()`. The scaled rows are summed in lexicographic order.
pub fn weighted_row_sum(
    terms: impl Iterator<Item = (usize, f64)>,
    rows: &[f64],
    out: &mut [f64],
    scratch: &mut SumScratch,
) {
    let w = out.len();
    scratch.rows.clear();
    for (idx, coef) in terms {
        scratch
            .rows
            .extend(rows[idx * w..(idx + 1) * w].iter().map(|x| coef * x));
    }
    let count = if w == 0 { 0 } else { scratch.rows.len() / w };
    scratch.order.clear();
    scratch.order.extend(0..count);
    let buf = &scratch.rows;
    scratch
        .order
        .sort_unstable_by(|&a, &b| lex_cmp(&buf[a * w..(a + 1) * w], &buf[b * w..(b + 1) * w]));
    out.iter_mut().for_each(|x| *x = 0.0);
    for &i in &scratch.order {
        for (o, x) in out.iter_mut().zip(&buf[i * w..(i + 1) * w]) {
            *o += x;
        }
    }
}
