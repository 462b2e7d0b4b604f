use alloc::vec::Vec;

/// Tiesets recorded by backward elimination, keyed by stage.
///
/// Live stages always decrease in insertion order: a backward step only
/// moves to smaller stages and a forward step to stage `k - 1` first drops
/// every stage `<= k`.
#[derive(Debug, Clone, Default)]
pub struct TieLedger {
    // (stage, sorted observation indices), stages strictly decreasing
    sets: Vec<(usize, Vec<usize>)>,
}

impl TieLedger {
    pub fn new() -> Self {
        Self::default()
    }

    /// Records the tieset of stage `i`. Singletons are not ties and are
    /// ignored.
    pub fn record(&mut self, stage: usize, mut members: Vec<usize>) {
        if members.len() < 2 {
            return;
        }
        debug_assert!(self.sets.last().map_or(true, |(s, _)| *s > stage));
        members.sort_unstable();
        self.sets.push((stage, members));
    }

    /// Drops every tieset at a stage `<= k`.
    pub fn clear_through(&mut self, k: usize) {
        while self.sets.last().is_some_and(|(s, _)| *s <= k) {
            self.sets.pop();
        }
    }

    /// Stages above `stage` whose tieset contains `obs`, largest first.
    pub fn containing(&self, obs: usize, stage: usize) -> impl Iterator<Item = usize> + '_ {
        self.sets
            .iter()
            .take_while(move |(s, _)| *s > stage)
            .filter(move |(_, m)| m.binary_search(&obs).is_ok())
            .map(|(s, _)| *s)
    }

    pub fn get(&self, stage: usize) -> Option<&[usize]> {
        self.sets.iter().find(|(s, _)| *s == stage).map(|(_, m)| m.as_slice())
    }

    pub fn stages(&self) -> impl Iterator<Item = usize> + '_ {
        self.sets.iter().map(|(s, _)| *s)
    }

    pub fn is_empty(&self) -> bool {
        self.sets.is_empty()
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    #[test]
    fn records_only_ties_and_clears_by_stage() {
        let mut t = TieLedger::new();
        t.record(9, vec![4, 1, 2]);
        t.record(8, vec![3]);
        t.record(6, vec![2, 7]);
        t.record(5, vec![0, 2]);
        assert_eq!(t.stages().collect::<Vec<_>>(), vec![9, 6, 5]);
        assert_eq!(t.get(9), Some(&[1, 2, 4][..]));
        assert_eq!(t.containing(2, 5).collect::<Vec<_>>(), vec![9, 6]);
        assert_eq!(t.containing(7, 2).collect::<Vec<_>>(), vec![6]);
        t.clear_through(6);
        assert_eq!(t.stages().collect::<Vec<_>>(), vec![9]);
        t.clear_through(9);
        assert!(t.is_empty());
    }
}
