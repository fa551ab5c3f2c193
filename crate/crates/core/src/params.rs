//! Model parameters: ring size, asymmetry exponent, time scale and field strengths.

use crate::error::{Error, Result};
use crate::lattice::Species;

/// Parameters of the three-species exchange dynamics.
///
/// A pair `(alpha, beta)` sitting on a bond swaps to `(beta, alpha)` at rate
/// `1 + (E_alpha - E_beta) / (2 N^gamma)`; the whole chain runs on the clock
/// `N^a * t` so that `t` is macroscopic time. Construction rejects parameter
/// sets for which any swap rate fails to be strictly positive.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelParams {
    n: usize,
    gamma: f64,
    a: f64,
    field: [f64; 3],
    seed: u64,
}

impl ModelParams {
    pub fn new(n: usize, gamma: f64, field: [f64; 3], seed: u64) -> Result<ModelParams> {
        ModelParams::with_time_scale(n, gamma, 2.0, field, seed)
    }

    pub fn with_time_scale(
        n: usize,
        gamma: f64,
        a: f64,
        field: [f64; 3],
        seed: u64,
    ) -> Result<ModelParams> {
        if n < 3 {
            return Err(Error::RingTooSmall(n));
        }
        if !gamma.is_finite() || gamma < 0.0 {
            return Err(Error::BadParameter(format!(
                "gamma must be finite and non-negative, got {gamma}"
            )));
        }
        if !a.is_finite() {
            return Err(Error::BadParameter(format!("a must be finite, got {a}")));
        }
        if field.iter().any(|e| !e.is_finite()) {
            return Err(Error::BadParameter(format!("field strengths {field:?} must be finite")));
        }
        let p = ModelParams { n, gamma, a, field, seed };
        for &l in &Species::ALL {
            for &r in &Species::ALL {
                if l != r {
                    let rate = p.swap_rate(l, r);
                    if !(rate > 0.0) {
                        return Err(Error::NonPositiveRate {
                            left: l.as_char(),
                            right: r.as_char(),
                            rate,
                        });
                    }
                }
            }
        }
        Ok(p)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn a(&self) -> f64 {
        self.a
    }

    pub fn field(&self) -> [f64; 3] {
        self.field
    }

    pub fn field_strength(&self, s: Species) -> f64 {
        self.field[s as usize]
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn with_seed(mut self, seed: u64) -> ModelParams {
        self.seed = seed;
        self
    }

    pub fn with_n(&self, n: usize) -> Result<ModelParams> {
        ModelParams::with_time_scale(n, self.gamma, self.a, self.field, self.seed)
    }

    /// `N^gamma`, the asymmetry scale.
    pub fn n_pow_gamma(&self) -> f64 {
        (self.n as f64).powf(self.gamma)
    }

    /// `N^a`, the clock speed-up folded into macroscopic time.
    pub fn n_pow_a(&self) -> f64 {
        (self.n as f64).powf(self.a)
    }

    /// Swap rate for the ordered bond pair `(left, right) -> (right, left)`.
    /// Same-species pairs never swap.
    #[inline]
    pub fn swap_rate(&self, left: Species, right: Species) -> f64 {
        if left == right {
            return 0.0;
        }
        1.0 + (self.field[left as usize] - self.field[right as usize]) / (2.0 * self.n_pow_gamma())
    }

    /// The 3x3 table of bond swap rates, indexed `[left][right]`.
    pub fn rate_table(&self) -> [[f64; 3]; 3] {
        let mut t = [[0.0; 3]; 3];
        for &l in &Species::ALL {
            for &r in &Species::ALL {
                t[l as usize][r as usize] = self.swap_rate(l, r);
            }
        }
        t
    }

    /// Same dynamics with every ordered rate pair exchanged
    /// (`c^{ab} <-> c^{ba}`), i.e. the adjoint chain.
    pub fn reversed(&self) -> ModelParams {
        ModelParams {
            field: [-self.field[0], -self.field[1], -self.field[2]],
            ..*self
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn equal_strengths_cancel() {
        let p = ModelParams::new(10, 1.0, [1.0, 1.0, 0.0], 0).unwrap();
        assert_eq!(p.swap_rate(Species::A, Species::B), 1.0);
    }

    #[test]
    fn rate_formula_value() {
        // E_A - E_C = 1, gamma = 1, N = 10 -> 1 + 1/20 = 1.05
        let p = ModelParams::new(10, 1.0, [1.0, 0.0, 0.0], 0).unwrap();
        assert!((p.swap_rate(Species::A, Species::C) - 1.05).abs() < 1e-15);
        assert_eq!(p.swap_rate(Species::B, Species::B), 0.0);
    }

    #[test]
    fn pairwise_balance() {
        // c^{AB} + c^{BC} + c^{CA} = c^{BA} + c^{CB} + c^{AC} for any fields.
        use Species::{A, B, C};
        for field in [[0.3, -1.2, 0.9], [2.0, 2.0, 2.0], [-0.5, 0.25, 1.75]] {
            let p = ModelParams::new(7, 0.5, field, 0).unwrap();
            let lhs = p.swap_rate(A, B) + p.swap_rate(B, C) + p.swap_rate(C, A);
            let rhs = p.swap_rate(B, A) + p.swap_rate(C, B) + p.swap_rate(A, C);
            assert!((lhs - rhs).abs() < 1e-14);
        }
    }

    #[test]
    fn rejects_negative_rates() {
        // |E_A - E_B| = 3 N^gamma > 2 N^gamma
        let err = ModelParams::new(4, 0.0, [3.0, 0.0, 0.0], 0);
        assert!(err.is_err());
    }

    #[test]
    fn reversed_swaps_rate_table() {
        use Species::{A, B};
        let p = ModelParams::new(16, 0.5, [1.0, -0.5, 0.25], 0).unwrap();
        let q = p.reversed();
        assert!((p.swap_rate(A, B) - q.swap_rate(B, A)).abs() < 1e-15);
        // symmetric dynamics is self-adjoint
        let s = ModelParams::new(16, 0.5, [1.0, 1.0, 1.0], 0).unwrap();
        assert_eq!(s.rate_table(), s.reversed().rate_table());
    }
}
