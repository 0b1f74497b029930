//! Pareto dominance, non-dominated sorting and the two-tier combined ranking.
//!
//! A candidate carries two objective vectors. Its tier-1 rank comes from
//! sorting the whole population on `f1`; its tier-2 rank from sorting, on
//! `f2`, only the members of its own tier-1 front. Candidates are then ordered
//! lexicographically by `(rank1, rank2)`, so the best combined set is exactly
//! the `f2`-non-dominated subset of the `f1`-non-dominated front.

use std::cmp::Ordering;

use crate::error::{Error, Result};

/// `a` dominates `b` (minimization): no worse everywhere, better somewhere.
pub fn pareto_dominates(a: &[f64], b: &[f64]) -> Result<bool> {
    if a.len() != b.len() {
        return Err(Error::DimensionMismatch { expected: a.len(), got: b.len() });
    }
    Ok(dominates(a, b))
}

#[inline]
pub(crate) fn dominates(a: &[f64], b: &[f64]) -> bool {
    let mut strict = false;
    for (x, y) in a.iter().zip(b) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// 1-based front index of every point (fast non-dominated sort).
pub fn nondominated_sort<P: AsRef<[f64]>>(points: &[P]) -> Result<Vec<usize>> {
    if points.is_empty() {
        return Err(Error::InvalidArgument("cannot sort an empty population".into()));
    }
    let m = points[0].as_ref().len();
    for p in points {
        let p = p.as_ref();
        if p.len() != m {
            return Err(Error::DimensionMismatch { expected: m, got: p.len() });
        }
        if p.iter().any(|v| v.is_nan()) {
            return Err(Error::NonFinite("objective vector"));
        }
    }

    let n = points.len();
    let mut dominated_by_me: Vec<Vec<usize>> = vec![Vec::new(); n];
    let mut count = vec![0usize; n];
    for i in 0..n {
        let a = points[i].as_ref();
        for j in i + 1..n {
            let b = points[j].as_ref();
            if dominates(a, b) {
                dominated_by_me[i].push(j);
                count[j] += 1;
            } else if dominates(b, a) {
                dominated_by_me[j].push(i);
                count[i] += 1;
            }
        }
    }

    let mut ranks = vec![0usize; n];
    let mut front: Vec<usize> = (0..n).filter(|&i| count[i] == 0).collect();
    let mut rank = 1;
    while !front.is_empty() {
        let mut next = Vec::new();
        for &i in &front {
            ranks[i] = rank;
            for &j in &dominated_by_me[i] {
                count[j] -= 1;
                if count[j] == 0 {
                    next.push(j);
                }
            }
        }
        front = next;
        rank += 1;
    }
    Ok(ranks)
}

#[derive(Debug, Clone, PartialEq)]
pub struct ScoredCandidate {
    /// Unit-hypercube coordinates.
    pub x: Vec<f64>,
    pub f1: Vec<f64>,
    pub f2: Vec<f64>,
    pub rank1: usize,
    pub rank2: usize,
}

impl ScoredCandidate {
    pub fn new(x: Vec<f64>, f1: Vec<f64>, f2: Vec<f64>) -> Self {
        Self { x, f1, f2, rank1: 0, rank2: 0 }
    }

    pub fn combined_key(&self) -> (usize, usize) {
        (self.rank1, self.rank2)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Preference {
    ABetter,
    BBetter,
    Equivalent,
}

/// Lexicographic comparison of `(rank1, rank2)`. Ranks must come from the
/// same population.
pub fn combined_compare(a: &ScoredCandidate, b: &ScoredCandidate) -> Preference {
    match a.combined_key().cmp(&b.combined_key()) {
        Ordering::Less => Preference::ABetter,
        Ordering::Greater => Preference::BBetter,
        Ordering::Equal => Preference::Equivalent,
    }
}

/// Fills `rank1`/`rank2` of every candidate and returns dense combined ranks
/// (1 = best key).
pub fn multi_dominance_rank(pop: &mut [ScoredCandidate]) -> Result<Vec<usize>> {
    let f1: Vec<&[f64]> = pop.iter().map(|c| c.f1.as_slice()).collect();
    let r1 = nondominated_sort(&f1)?;
    let fronts = r1.iter().copied().max().unwrap_or(0);
    let mut members: Vec<Vec<usize>> = vec![Vec::new(); fronts];
    for (i, r) in r1.iter().enumerate() {
        members[r - 1].push(i);
    }
    let mut r2 = vec![0usize; pop.len()];
    for front in &members {
        if front.is_empty() {
            continue;
        }
        let f2: Vec<&[f64]> = front.iter().map(|&i| pop[i].f2.as_slice()).collect();
        for (&i, r) in front.iter().zip(nondominated_sort(&f2)?) {
            r2[i] = r;
        }
    }
    for (c, (a, b)) in pop.iter_mut().zip(r1.iter().zip(&r2)) {
        c.rank1 = *a;
        c.rank2 = *b;
    }
    Ok(dense_rank(pop))
}

fn dense_rank(pop: &[ScoredCandidate]) -> Vec<usize> {
    let mut keys: Vec<(usize, usize)> = pop.iter().map(|c| c.combined_key()).collect();
    keys.sort_unstable();
    keys.dedup();
    pop.iter()
        .map(|c| keys.binary_search(&c.combined_key()).expect("key present") + 1)
        .collect()
}

/// Indices of the candidates holding combined rank 1.
pub fn best_indices(combined: &[usize]) -> Vec<usize> {
    combined
        .iter()
        .enumerate()
        .filter(|(_, r)| **r == 1)
        .map(|(i, _)| i)
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    fn cand(f1: &[f64], f2: &[f64]) -> ScoredCandidate {
        ScoredCandidate::new(vec![0.0], f1.to_vec(), f2.to_vec())
    }

    fn keyed(r1: usize, r2: usize) -> ScoredCandidate {
        ScoredCandidate { rank1: r1, rank2: r2, ..cand(&[], &[]) }
    }

    #[test]
    fn dominance_examples() {
        assert!(!pareto_dominates(&[1.0, 1.0], &[1.0, 1.0]).unwrap());
        assert!(pareto_dominates(&[0.0, 2.0], &[1.0, 2.0]).unwrap());
        assert!(!pareto_dominates(&[0.0, 3.0], &[1.0, 2.0]).unwrap());
        assert!(pareto_dominates(&[0.0], &[1.0, 2.0]).is_err());
    }

    #[test]
    fn sort_examples() {
        let same = vec![vec![1.0, 2.0]; 4];
        assert_eq!(nondominated_sort(&same).unwrap(), vec![1; 4]);
        let chain = vec![vec![0.0, 0.0], vec![1.0, 1.0], vec![2.0, 2.0]];
        assert_eq!(nondominated_sort(&chain).unwrap(), vec![1, 2, 3]);
    }

    #[test]
    fn sort_rejects_nan_and_empty() {
        assert!(nondominated_sort(&[vec![0.0, f64::NAN]]).is_err());
        assert!(nondominated_sort::<Vec<f64>>(&[]).is_err());
    }

    #[test]
    fn compare_examples() {
        assert_eq!(combined_compare(&keyed(1, 5), &keyed(2, 1)), Preference::ABetter);
        assert_eq!(combined_compare(&keyed(1, 2), &keyed(1, 3)), Preference::ABetter);
        assert_eq!(combined_compare(&keyed(2, 4), &keyed(2, 4)), Preference::Equivalent);
        assert_eq!(combined_compare(&keyed(3, 1), &keyed(2, 9)), Preference::BBetter);
    }

    #[test]
    fn combined_order_is_strict_weak() {
        let keys: Vec<ScoredCandidate> =
            (1..=4).flat_map(|a| (1..=4).map(move |b| keyed(a, b))).collect();
        let better = |a: &ScoredCandidate, b: &ScoredCandidate| combined_compare(a, b) == Preference::ABetter;
        for a in &keys {
            assert!(!better(a, a));
            for b in &keys {
                if better(a, b) {
                    assert!(!better(b, a));
                }
                for c in &keys {
                    if better(a, b) && better(b, c) {
                        assert!(better(a, c));
                    }
                    // incomparability is transitive
                    let inc = |x: &ScoredCandidate, y: &ScoredCandidate| !better(x, y) && !better(y, x);
                    if inc(a, b) && inc(b, c) {
                        assert!(inc(a, c));
                    }
                }
            }
        }
    }

    #[test]
    fn multi_rank_examples() {
        let mut single = vec![cand(&[1.0, 2.0], &[0.0, 0.0, 0.0])];
        assert_eq!(multi_dominance_rank(&mut single).unwrap(), vec![1]);

        let mut twins = vec![cand(&[1.0, 2.0], &[3.0, 1.0, 0.0]); 2];
        assert_eq!(multi_dominance_rank(&mut twins).unwrap(), vec![1, 1]);
    }

    #[test]
    fn dense_ranking() {
        // keys (1,1), (1,3), (2,1) -> 1, 2, 3
        let pop = vec![keyed(2, 1), keyed(1, 1), keyed(1, 3)];
        assert_eq!(dense_rank(&pop), vec![3, 1, 2]);
    }

    #[test]
    fn tier_two_is_ranked_inside_the_front() {
        // a and b form the f1 front and are f2-incomparable; c sits behind
        // them in f1 but f2-dominates a. Both a and b must stay on top.
        let mut pop = vec![
            cand(&[0.0, 1.0], &[1.0, 1.0, 1.0]),
            cand(&[1.0, 0.0], &[0.5, 2.0, 2.0]),
            cand(&[2.0, 2.0], &[0.0, 0.0, 0.0]),
        ];
        let ranks = multi_dominance_rank(&mut pop).unwrap();
        assert_eq!(best_indices(&ranks), vec![0, 1]);
        assert_eq!(pop[2].combined_key(), (2, 1));
    }

    #[test]
    fn empty_tier_one_reduces_to_single_level() {
        let mut pop = vec![cand(&[], &[1.0]), cand(&[], &[0.0]), cand(&[], &[2.0])];
        assert_eq!(multi_dominance_rank(&mut pop).unwrap(), vec![2, 1, 3]);
    }

    mod props {
        use super::*;
        use proptest::prelude::*;

        proptest! {
            #[test]
            fn sort_is_permutation_equivariant(
                pts in proptest::collection::vec(proptest::collection::vec(0i32..5, 3), 1..40),
                rot in 0usize..40,
            ) {
                let pts: Vec<Vec<f64>> = pts.into_iter().map(|p| p.into_iter().map(f64::from).collect()).collect();
                let k = rot % pts.len();
                let mut moved = pts.clone();
                moved.rotate_left(k);
                let r = nondominated_sort(&pts).unwrap();
                let mut r_moved = nondominated_sort(&moved).unwrap();
                r_moved.rotate_right(k);
                prop_assert_eq!(r, r_moved);
            }
        }
    }
}
