//! Binary-indexed tree over per-bond rates.
//!
//! Supports O(log N) point updates (only the bonds adjacent to a swap change
//! rate) and O(log N) sampling of a bond proportionally to its rate. The
//! descent is branch-free over a power-of-two layout padded with `+inf`
//! sentinels. Leaf values are mirrored in a plain array so updates can set
//! exact recomputed rates, and the prefix structure is rebuilt periodically
//! to shed float accumulation drift over very long runs.

#[derive(Debug, Clone)]
pub struct RateTree {
    /// Fenwick array, 1-based; indices `n+1..` hold `+inf` sentinels so the
    /// search never steps outside the live range.
    tree: Vec<f64>,
    /// Current exact leaf values, 0-based.
    leaf: Vec<f64>,
    /// Highest power of two <= padded size, the search's first stride.
    top_mask: usize,
    total: f64,
    updates_since_rebuild: u64,
}

const REBUILD_PERIOD: u64 = 1 << 21;

impl RateTree {
    pub fn new(rates: Vec<f64>) -> RateTree {
        let top_mask = rates.len().next_power_of_two();
        let mut t = RateTree {
            tree: vec![0.0; 2 * top_mask + 1],
            leaf: rates,
            top_mask,
            total: 0.0,
            updates_since_rebuild: 0,
        };
        t.rebuild();
        t
    }

    pub fn len(&self) -> usize {
        self.leaf.len()
    }

    pub fn is_empty(&self) -> bool {
        self.leaf.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.total
    }

    pub fn value(&self, i: usize) -> f64 {
        self.leaf[i]
    }

    fn rebuild(&mut self) {
        let n = self.leaf.len();
        for v in self.tree.iter_mut() {
            *v = 0.0;
        }
        for i in 0..n {
            let mut j = i + 1;
            let v = self.leaf[i];
            while j <= n {
                self.tree[j] += v;
                j += j & j.wrapping_neg();
            }
        }
        for v in self.tree.iter_mut().skip(n + 1) {
            *v = f64::INFINITY;
        }
        self.total = self.leaf.iter().sum();
        self.updates_since_rebuild = 0;
    }

    /// Set leaf `i` to the exact value `v`.
    #[inline]
    pub fn set(&mut self, i: usize, v: f64) {
        let delta = v - self.leaf[i];
        if delta == 0.0 {
            return;
        }
        self.leaf[i] = v;
        self.total += delta;
        let n = self.leaf.len();
        let mut j = i + 1;
        while j <= n {
            self.tree[j] += delta;
            j += j & j.wrapping_neg();
        }
        self.updates_since_rebuild += 1;
        if self.updates_since_rebuild >= REBUILD_PERIOD {
            self.rebuild();
        }
    }

    /// Index of the first leaf whose prefix sum exceeds `target`.
    /// `target` must lie in `[0, total)`; rounding at the upper edge clamps
    /// to the last positive leaf.
    #[inline]
    pub fn find(&self, target: f64) -> usize {
        let mut pos = 0usize;
        let mut remaining = target;
        let mut mask = self.top_mask;
        while mask > 0 {
            // sentinel +inf beyond the live range makes `take` false there;
            // select-style updates keep the descent branch-free
            let candidate = remaining - self.tree[pos + mask];
            let take = candidate >= 0.0;
            remaining = if take { candidate } else { remaining };
            pos += mask & (take as usize).wrapping_neg();
            mask >>= 1;
        }
        if pos >= self.leaf.len() || self.leaf[pos] == 0.0 {
            self.fixup(pos)
        } else {
            pos
        }
    }

    /// Float round-off can land on a zero-rate leaf; step back to the
    /// nearest positive one.
    #[cold]
    fn fixup(&self, pos: usize) -> usize {
        let n = self.leaf.len();
        let mut i = pos.min(n - 1);
        while i > 0 && self.leaf[i] == 0.0 {
            i -= 1;
        }
        if self.leaf[i] == 0.0 {
            i = (0..n).find(|&j| self.leaf[j] > 0.0).unwrap_or(0);
        }
        i
    }
}
