//! Indexing of unordered node pairs `{i, j}`, `i < j`, as a dense range
//! `0..C(n,2)`, plus a value table keyed by pair.

/// Bijection between unordered pairs of `0..n` and `0..n*(n-1)/2`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct PairIndex {
    n: usize,
}

impl PairIndex {
    pub fn new(node_count: usize) -> PairIndex {
        PairIndex { n: node_count }
    }

    pub fn node_count(&self) -> usize {
        self.n
    }

    /// Total number of pair variables, `C(n, 2)`.
    pub fn len(&self) -> usize {
        self.n * (self.n - 1) / 2
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    /// Index of the unordered pair `{i, j}`; symmetric in its arguments.
    pub fn index(&self, i: u32, j: u32) -> usize {
        debug_assert!(i != j, "the diagonal is not a pair variable");
        let (i, j) = if i < j { (i as usize, j as usize) } else { (j as usize, i as usize) };
        debug_assert!(j < self.n);
        i * self.n - i * (i + 1) / 2 + (j - i - 1)
    }

    /// Inverse of [`PairIndex::index`], returning `(i, j)` with `i < j`.
    pub fn pair(&self, index: usize) -> (u32, u32) {
        debug_assert!(index < self.len());
        // Walk rows; fine for the sizes in play, callers iterating all pairs
        // should use `iter` instead.
        let mut i = 0usize;
        let mut offset = 0usize;
        loop {
            let row = self.n - i - 1;
            if index < offset + row {
                return (i as u32, (i + 1 + index - offset) as u32);
            }
            offset += row;
            i += 1;
        }
    }

    /// All pairs in index order.
    pub fn iter(&self) -> impl Iterator<Item = (u32, u32)> + '_ {
        (0..self.n as u32)
            .flat_map(move |i| (i + 1..self.n as u32).map(move |j| (i, j)))
    }
}

/// A per-pair table of `f64` values (distances, coefficients, ...).
#[derive(Debug, Clone, PartialEq)]
pub struct PairTable {
    index: PairIndex,
    values: Vec<f64>,
}

impl PairTable {
    pub fn filled(node_count: usize, value: f64) -> PairTable {
        let index = PairIndex::new(node_count);
        PairTable { index, values: vec![value; index.len()] }
    }

    pub fn from_values(node_count: usize, values: Vec<f64>) -> PairTable {
        let index = PairIndex::new(node_count);
        assert_eq!(values.len(), index.len());
        PairTable { index, values }
    }

    pub fn node_count(&self) -> usize {
        self.index.node_count()
    }

    pub fn pair_index(&self) -> PairIndex {
        self.index
    }

    pub fn get(&self, i: u32, j: u32) -> f64 {
        self.values[self.index.index(i, j)]
    }

    pub fn set(&mut self, i: u32, j: u32, value: f64) {
        let at = self.index.index(i, j);
        self.values[at] = value;
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn into_values(self) -> Vec<f64> {
        self.values
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn index_is_a_bijection() {
        let idx = PairIndex::new(9);
        let mut seen = vec![false; idx.len()];
        for (i, j) in idx.iter() {
            let at = idx.index(i, j);
            assert!(!seen[at]);
            seen[at] = true;
            assert_eq!(idx.index(j, i), at);
            assert_eq!(idx.pair(at), (i, j));
        }
        assert!(seen.iter().all(|&s| s));
        assert_eq!(idx.len(), 36);
    }
}
