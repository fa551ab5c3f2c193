//! Ring configurations over the three-letter species alphabet.

use crate::error::{Error, Result};

/// Particle species occupying a single site.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
#[repr(u8)]
pub enum Species {
    A = 0,
    B = 1,
    C = 2,
}

impl Species {
    pub const ALL: [Species; 3] = [Species::A, Species::B, Species::C];

    pub fn from_index(i: usize) -> Species {
        match i {
            0 => Species::A,
            1 => Species::B,
            _ => Species::C,
        }
    }

    pub fn as_char(self) -> char {
        match self {
            Species::A => 'A',
            Species::B => 'B',
            Species::C => 'C',
        }
    }

    pub fn from_char(c: char) -> Option<Species> {
        match c {
            'A' | 'a' => Some(Species::A),
            'B' | 'b' => Some(Species::B),
            'C' | 'c' => Some(Species::C),
            _ => None,
        }
    }
}

/// Assignment of one species per site on the discrete ring, with cached
/// per-species counts. Counts are conserved by bond swaps.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Configuration {
    sites: Vec<Species>,
    counts: [usize; 3],
}

impl Configuration {
    pub fn new(sites: Vec<Species>) -> Result<Configuration> {
        if sites.len() < 3 {
            return Err(Error::RingTooSmall(sites.len()));
        }
        let mut counts = [0usize; 3];
        for &s in &sites {
            counts[s as usize] += 1;
        }
        Ok(Configuration { sites, counts })
    }

    /// All sites occupied by one species.
    pub fn uniform(n: usize, s: Species) -> Result<Configuration> {
        Configuration::new(vec![s; n])
    }

    pub fn len(&self) -> usize {
        self.sites.len()
    }

    pub fn is_empty(&self) -> bool {
        self.sites.is_empty()
    }

    #[inline]
    pub fn site(&self, x: usize) -> Species {
        // callers mostly pre-wrap; fall back to a modulo only when needed
        let n = self.sites.len();
        let i = if x < n { x } else { x % n };
        self.sites[i]
    }

    pub fn sites(&self) -> &[Species] {
        &self.sites
    }

    pub fn counts(&self) -> [usize; 3] {
        self.counts
    }

    pub fn count(&self, s: Species) -> usize {
        self.counts[s as usize]
    }

    /// Occupation indicator of `species` at site `x`.
    #[inline]
    pub fn occupation(&self, x: usize, species: Species) -> f64 {
        if self.site(x) == species {
            1.0
        } else {
            0.0
        }
    }

    /// Conserved empirical density of `species`.
    pub fn density(&self, species: Species) -> f64 {
        self.counts[species as usize] as f64 / self.sites.len() as f64
    }

    /// Exchange the occupants of sites `x` and `x+1` (ring indices).
    #[inline]
    pub fn swap_bond(&mut self, x: usize) {
        let n = self.sites.len();
        let y = if x + 1 == n { 0 } else { x + 1 };
        self.sites.swap(x, y);
    }

    /// True when every site carries the same species (absorbing for the dynamics).
    pub fn is_degenerate(&self) -> bool {
        self.counts.iter().any(|&c| c == self.sites.len())
    }

    /// Check the counts cache against the site sequence.
    pub fn counts_consistent(&self) -> bool {
        let mut counts = [0usize; 3];
        for &s in &self.sites {
            counts[s as usize] += 1;
        }
        counts == self.counts
    }

    pub fn from_counts(n_a: usize, n_b: usize, n_c: usize) -> Result<Configuration> {
        let n = n_a + n_b + n_c;
        let mut sites = Vec::with_capacity(n);
        sites.extend(std::iter::repeat(Species::A).take(n_a));
        sites.extend(std::iter::repeat(Species::B).take(n_b));
        sites.extend(std::iter::repeat(Species::C).take(n_c));
        Configuration::new(sites)
    }
}

impl std::fmt::Display for Configuration {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        for &s in &self.sites {
            write!(f, "{}", s.as_char())?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn counts_track_swaps() {
        let mut c = Configuration::new(vec![Species::A, Species::B, Species::C, Species::A]).unwrap();
        assert_eq!(c.counts(), [2, 1, 1]);
        c.swap_bond(1);
        c.swap_bond(3); // wraps to sites 3,0
        assert_eq!(c.counts(), [2, 1, 1]);
        assert!(c.counts_consistent());
    }

    #[test]
    fn degenerate_detection() {
        let c = Configuration::uniform(5, Species::C).unwrap();
        assert!(c.is_degenerate());
        let c = Configuration::from_counts(4, 1, 0).unwrap();
        assert!(!c.is_degenerate());
    }

    #[test]
    fn rejects_tiny_ring() {
        assert!(Configuration::new(vec![Species::A, Species::B]).is_err());
    }
}
