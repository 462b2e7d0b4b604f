use alloc::vec::Vec;

use super::{BcsPolicy, Engine};
use crate::rank::ConcordanceMatrix;

/// Column sums computed once, then repaired on each transposition and
/// elimination. `total` tracks the sum over the live prefix so the halting
/// test costs O(1).
pub(crate) struct Incremental<'a> {
    c: &'a ConcordanceMatrix,
    colsum: Vec<i32>,
    total: i64,
    len: usize,
    #[cfg_attr(not(feature = "std"), allow(dead_code))]
    policy: BcsPolicy,
}

impl<'a> Incremental<'a> {
    pub(crate) fn new(c: &'a ConcordanceMatrix, policy: &BcsPolicy) -> Self {
        let n = c.n();
        // the matrix is symmetric, so column sums are row sums
        let row_sum = |p: usize| c.row(p).iter().map(|&v| v as i32).sum::<i32>();
        let colsum = if policy.parallel_at(n) {
            crate::par::map_indexed(n, row_sum)
        } else {
            (0..n).map(row_sum).collect()
        };
        let total = colsum.iter().map(|&v| v as i64).sum();
        Incremental { c, colsum, total, len: n, policy: *policy }
    }

    /// `colsum[p] += sign * C[obs][order[p]]` for `p < upto`.
    fn add_row(&mut self, order: &[usize], obs: usize, upto: usize, sign: i32) {
        let row = self.c.row(obs);
        let update = |(s, &o): (&mut i32, &usize)| *s += sign * row[o] as i32;
        #[cfg(feature = "std")]
        if self.policy.parallel_at(upto) {
            use rayon::prelude::*;
            self.colsum[..upto].par_iter_mut().zip(&order[..upto]).for_each(update);
            return;
        }
        self.colsum[..upto].iter_mut().zip(&order[..upto]).for_each(update);
    }
}

impl Engine for Incremental<'_> {
    fn stage(&mut self, _order: &[usize], i: usize) -> (&[i32], i64) {
        debug_assert_eq!(i, self.len);
        (&self.colsum[..i], self.total)
    }

    fn swapped(&mut self, _order: &[usize], p: usize, q: usize) {
        self.colsum.swap(p, q);
    }

    fn shrink(&mut self, order: &[usize], i: usize) {
        debug_assert_eq!(i, self.len);
        self.total -= 2 * self.colsum[i - 1] as i64;
        self.add_row(order, order[i - 1], i - 1, -1);
        self.len = i - 1;
    }

    fn regrow(&mut self, order: &[usize], from: usize, to: usize) {
        debug_assert_eq!(from, self.len);
        for u in from..to {
            self.add_row(order, order[u], from, 1);
        }
        for p in from..to {
            let row = self.c.row(order[p]);
            self.colsum[p] = order[..to].iter().map(|&o| row[o] as i32).sum();
        }
        self.total = self.colsum[..to].iter().map(|&v| v as i64).sum();
        self.len = to;
    }

    #[inline]
    fn entry(&self, order: &[usize], p: usize, u: usize) -> i8 {
        self.c.get(order[p], order[u])
    }
}
