//! Longest monotone subsequences with deterministic (lexicographically
//! smallest) position sets.

use super::diff::DiffMatrix;

/// Positions of a longest strictly increasing subsequence of `values`.
///
/// Among all maximum-length answers the lexicographically smallest position
/// set is returned.
pub fn longest_increasing_subsequence<T: Ord>(values: &[T]) -> Vec<usize> {
    longest_chain(values, true)
}

/// Like [`longest_increasing_subsequence`] but allows equal neighbors.
pub fn longest_nondecreasing_subsequence<T: Ord>(values: &[T]) -> Vec<usize> {
    longest_chain(values, false)
}

/// Rows of `dm` whose best-matching reference indices form a longest
/// strictly increasing run.
pub fn lis_of_best_indices(dm: &DiffMatrix) -> Vec<usize> {
    longest_increasing_subsequence(dm.best_index())
}

fn longest_chain<T: Ord>(values: &[T], strict: bool) -> Vec<usize> {
    let n = values.len();
    // chain[i]: length of the longest chain starting at i.
    // tails[l]: largest value that starts a chain of length l + 1.
    let mut chain = vec![0; n];
    let mut tails: Vec<&T> = Vec::new();
    for i in (0..n).rev() {
        let v = &values[i];
        let p = if strict {
            tails.partition_point(|t| *t > v)
        } else {
            tails.partition_point(|t| *t >= v)
        };
        if p == tails.len() {
            tails.push(v);
        } else {
            tails[p] = v;
        }
        chain[i] = p + 1;
    }

    let mut need = tails.len();
    let mut out = Vec::with_capacity(need);
    let mut last: Option<&T> = None;
    for i in 0..n {
        if need == 0 {
            break;
        }
        let fits = last.is_none_or(|l| if strict { values[i] > *l } else { values[i] >= *l });
        if chain[i] == need && fits {
            out.push(i);
            last = Some(&values[i]);
            need -= 1;
        }
    }
    out
}
