//! Exhaustive small-instance minimizers used to verify the entropic solvers.
//!
//! Both oracles enumerate permutations in lexicographic order and keep the
//! first strict minimum, so ties resolve to the lexicographically smallest
//! assignment. They are deliberately brute force and refuse inputs past
//! desk scale.

use crate::error::{Error, Result};
use crate::matrix::CostMatrix;
use crate::tensor::CostTensor3;

/// Largest instance `exact_assignment_oracle` will enumerate (d! permutations).
pub const MAX_ORACLE_DIM: usize = 10;

/// Largest instance `exact_triple_oracle` will enumerate ((d!)^2 pairs).
pub const MAX_TRIPLE_ORACLE_DIM: usize = 6;

/// A pair of permutations describing deterministic triples:
/// `first` maps source i to mid j, `second` maps mid j to target k.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TripleAssignment {
    pub first: Vec<usize>,
    pub second: Vec<usize>,
}

/// Calls `f` with every permutation of `0..d` in lexicographic order.
fn for_each_permutation(d: usize, mut f: impl FnMut(&[usize])) {
    let mut perm: Vec<usize> = (0..d).collect();
    loop {
        f(&perm);
        // next_permutation in lexicographic order
        let Some(i) = (0..d.saturating_sub(1)).rev().find(|&i| perm[i] < perm[i + 1]) else {
            return;
        };
        let j = (i + 1..d).rev().find(|&j| perm[j] > perm[i]).unwrap();
        perm.swap(i, j);
        perm[i + 1..].reverse();
    }
}

/// Minimizes the uniform-marginal transport value `(1/d) * sum_i m[i][sigma(i)]`
/// over all permutations `sigma` by exhaustive enumeration.
///
/// Returns the minimizing permutation (lexicographically smallest on ties)
/// and the minimum value.
pub fn exact_assignment_oracle(cost: &CostMatrix) -> Result<(Vec<usize>, f64)> {
    let d = cost.d();
    if d > MAX_ORACLE_DIM {
        return Err(Error::OracleTooLarge {
            d,
            max: MAX_ORACLE_DIM,
        });
    }
    let mut best: Option<(Vec<usize>, f64)> = None;
    for_each_permutation(d, |perm| {
        let total: f64 = perm.iter().enumerate().map(|(i, &j)| cost.get(i, j)).sum();
        match &mut best {
            Some((_, v)) if total >= *v => {}
            _ => best = Some((perm.to_vec(), total)),
        }
    });
    let (perm, total) = best.expect("d >= 1 enforced by CostMatrix");
    Ok((perm, total / d as f64))
}

/// Minimizes `(1/d) * sum_i m[i][sigma(i)][tau(sigma(i))]` over all pairs of
/// permutations `(sigma, tau)` by exhaustive enumeration.
///
/// Ties resolve to the lexicographically smallest pair, comparing `sigma`
/// first and then `tau`.
pub fn exact_triple_oracle(cost: &CostTensor3) -> Result<(TripleAssignment, f64)> {
    let d = cost.d();
    if d > MAX_TRIPLE_ORACLE_DIM {
        return Err(Error::OracleTooLarge {
            d,
            max: MAX_TRIPLE_ORACLE_DIM,
        });
    }
    let mut best: Option<(TripleAssignment, f64)> = None;
    for_each_permutation(d, |sigma| {
        for_each_permutation(d, |tau| {
            let total: f64 = sigma
                .iter()
                .enumerate()
                .map(|(i, &j)| cost.get(i, j, tau[j]))
                .sum();
            match &mut best {
                Some((_, v)) if total >= *v => {}
                _ => {
                    best = Some((
                        TripleAssignment {
                            first: sigma.to_vec(),
                            second: tau.to_vec(),
                        },
                        total,
                    ))
                }
            }
        });
    });
    let (assignment, total) = best.expect("d >= 1 enforced by CostTensor3");
    Ok((assignment, total / d as f64))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn permutations_are_lexicographic() {
        let mut seen = Vec::new();
        for_each_permutation(3, |p| seen.push(p.to_vec()));
        assert_eq!(
            seen,
            vec![
                vec![0, 1, 2],
                vec![0, 2, 1],
                vec![1, 0, 2],
                vec![1, 2, 0],
                vec![2, 0, 1],
                vec![2, 1, 0],
            ]
        );
    }

    #[test]
    fn zero_diagonal_picks_identity() {
        let cost = CostMatrix::from_rows(&[vec![0.0, 1.0], vec![1.0, 0.0]]).unwrap();
        let (perm, value) = exact_assignment_oracle(&cost).unwrap();
        assert_eq!(perm, vec![0, 1]);
        assert_eq!(value, 0.0);
    }

    #[test]
    fn zero_antidiagonal_picks_swap() {
        let cost = CostMatrix::from_rows(&[vec![1.0, 0.0], vec![0.0, 1.0]]).unwrap();
        let (perm, value) = exact_assignment_oracle(&cost).unwrap();
        assert_eq!(perm, vec![1, 0]);
        assert_eq!(value, 0.0);
    }

    #[test]
    fn three_by_three_enumeration() {
        let cost = CostMatrix::from_rows(&[
            vec![1.0, 2.0, 3.0],
            vec![2.0, 1.0, 3.0],
            vec![3.0, 2.0, 1.0],
        ])
        .unwrap();
        let (perm, value) = exact_assignment_oracle(&cost).unwrap();
        assert_eq!(perm, vec![0, 1, 2]);
        assert_eq!(value, 1.0);
    }

    #[test]
    fn ties_break_lexicographically() {
        // All-equal costs: every permutation achieves the same value.
        let cost = CostMatrix::from_fn(4, |_, _| 2.5).unwrap();
        let (perm, value) = exact_assignment_oracle(&cost).unwrap();
        assert_eq!(perm, vec![0, 1, 2, 3]);
        assert_eq!(value, 2.5);
    }

    #[test]
    fn oracle_rejects_large_instances() {
        let cost = CostMatrix::from_fn(11, |i, j| (i + j) as f64).unwrap();
        assert!(matches!(
            exact_assignment_oracle(&cost),
            Err(Error::OracleTooLarge { d: 11, max: 10 })
        ));
    }

    #[test]
    fn triple_oracle_single_cell() {
        let cost = CostTensor3::from_fn(1, |_, _, _| 0.75).unwrap();
        let (assignment, value) = exact_triple_oracle(&cost).unwrap();
        assert_eq!(assignment.first, vec![0]);
        assert_eq!(assignment.second, vec![0]);
        assert_eq!(value, 0.75);
    }

    #[test]
    fn triple_oracle_zero_diagonal() {
        // Zero cost only on the (i, i, i) diagonal: identity pair wins.
        let cost =
            CostTensor3::from_fn(3, |i, j, k| if i == j && j == k { 0.0 } else { 1.0 }).unwrap();
        let (assignment, value) = exact_triple_oracle(&cost).unwrap();
        assert_eq!(assignment.first, vec![0, 1, 2]);
        assert_eq!(assignment.second, vec![0, 1, 2]);
        assert_eq!(value, 0.0);
    }

    #[test]
    fn triple_oracle_matches_independent_scan() {
        // Deterministic pseudo-random tensor; re-minimize with an
        // independently written nested scan over all 36 pairs.
        let cost = CostTensor3::from_fn(3, |i, j, k| {
            let x = (i * 7 + j * 13 + k * 29) % 17;
            x as f64 * 0.25 + 0.1
        })
        .unwrap();
        let (assignment, value) = exact_triple_oracle(&cost).unwrap();

        let perms3 = [
            [0usize, 1, 2],
            [0, 2, 1],
            [1, 0, 2],
            [1, 2, 0],
            [2, 0, 1],
            [2, 1, 0],
        ];
        let mut best = f64::INFINITY;
        for sigma in &perms3 {
            for tau in &perms3 {
                let total: f64 = (0..3).map(|i| cost.get(i, sigma[i], tau[sigma[i]])).sum();
                best = best.min(total / 3.0);
            }
        }
        assert_eq!(value, best);
        let realized: f64 = (0..3)
            .map(|i| cost.get(i, assignment.first[i], assignment.second[assignment.first[i]]))
            .sum::<f64>()
            / 3.0;
        assert_eq!(realized, value);
    }

    #[test]
    fn triple_oracle_rejects_large_instances() {
        let cost = CostTensor3::from_fn(7, |_, _, _| 1.0).unwrap();
        assert!(matches!(
            exact_triple_oracle(&cost),
            Err(Error::OracleTooLarge { d: 7, max: 6 })
        ));
    }
}
