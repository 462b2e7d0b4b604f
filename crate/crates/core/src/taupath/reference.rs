use alloc::vec;
use alloc::vec::Vec;

use super::Engine;
use crate::rank::ConcordanceMatrix;

/// Re-sums the whole leading block `C[order[..i]][order[..i]]` at every
/// stage, with no state carried between stages.
///
/// Rows of `C` are stored as bit sets: `pos` marks +1 entries and `neg` marks
/// -1 entries. Each stage builds a mask of the observations in the prefix, and
/// a column sum is a masked popcount of the (symmetric) row. Without zero
/// off-diagonal entries `neg` is left empty and implied by `pos`.
pub(crate) struct Permuted {
    words: usize,
    pos: Vec<u64>,
    neg: Option<Vec<u64>>,
    mask: Vec<u64>,
    colsum: Vec<i32>,
}

fn masked_ones(row: &[u64], mask: &[u64]) -> u32 {
    row.iter().zip(mask).map(|(r, m)| (r & m).count_ones()).sum()
}

fn has_bit(rows: &[u64], words: usize, obs: usize, other: usize) -> bool {
    rows[obs * words + other / 64] >> (other % 64) & 1 == 1
}

impl Permuted {
    pub(crate) fn new(c: &ConcordanceMatrix) -> Self {
        let n = c.n();
        let words = n.div_ceil(64);
        let mut pos = vec![0u64; n * words];
        let mut neg = vec![0u64; n * words];
        let mut zeros = false;
        for (p, row) in c.as_slice().chunks_exact(n).enumerate() {
            let (pr, nr) = (&mut pos[p * words..(p + 1) * words], &mut neg[p * words..(p + 1) * words]);
            for (q, &v) in row.iter().enumerate() {
                pr[q / 64] |= ((v == 1) as u64) << (q % 64);
                nr[q / 64] |= ((v == -1) as u64) << (q % 64);
                zeros |= v == 0 && p != q;
            }
        }
        Permuted { words, pos, neg: zeros.then_some(neg), mask: vec![0; words], colsum: vec![0; n] }
    }
}

impl Engine for Permuted {
    fn stage(&mut self, order: &[usize], i: usize) -> (&[i32], i64) {
        let words = self.words;
        self.mask.fill(0);
        for &obs in &order[..i] {
            self.mask[obs / 64] |= 1 << (obs % 64);
        }
        let colsum = &mut self.colsum[..i];
        for (s, &obs) in colsum.iter_mut().zip(order) {
            let plus = masked_ones(&self.pos[obs * words..(obs + 1) * words], &self.mask) as i32;
            *s = match &self.neg {
                Some(neg) => plus - masked_ones(&neg[obs * words..(obs + 1) * words], &self.mask) as i32,
                // every off-diagonal entry is +1 or -1
                None => 2 * plus - (i as i32 - 1),
            };
        }
        let total = colsum.iter().map(|&v| v as i64).sum();
        (colsum, total)
    }

    fn swapped(&mut self, _order: &[usize], _p: usize, _q: usize) {}

    fn shrink(&mut self, _order: &[usize], _i: usize) {}

    fn regrow(&mut self, _order: &[usize], _from: usize, _to: usize) {}

    #[inline]
    fn entry(&self, order: &[usize], p: usize, u: usize) -> i8 {
        let (a, b) = (order[p], order[u]);
        if has_bit(&self.pos, self.words, a, b) {
            1
        } else if match &self.neg {
            Some(neg) => has_bit(neg, self.words, a, b),
            None => a != b,
        } {
            -1
        } else {
            0
        }
    }
}
