//! Samplers for the invariant measures: site-wise product measures and the
//! uniform canonical measure at fixed species counts.

use rand::seq::SliceRandom;
use rand::Rng;

use crate::error::{Error, Result};
use crate::lattice::{Configuration, Species};

/// i.i.d. sites with `P(A) = rho_a`, `P(B) = rho_b`, `P(C) = 1 - rho_a - rho_b`.
pub fn sample_product_measure<R: Rng>(
    rho_a: f64,
    rho_b: f64,
    n: usize,
    rng: &mut R,
) -> Result<Configuration> {
    if !(rho_a >= 0.0 && rho_b >= 0.0 && rho_a + rho_b <= 1.0 + 1e-12) {
        return Err(Error::BadDensities { rho_a, rho_b });
    }
    let sites = (0..n)
        .map(|_| {
            let u: f64 = rng.gen();
            if u < rho_a {
                Species::A
            } else if u < rho_a + rho_b {
                Species::B
            } else {
                Species::C
            }
        })
        .collect();
    Configuration::new(sites)
}

/// Uniform draw over all arrangements with the given counts.
pub fn sample_canonical<R: Rng>(
    n_a: usize,
    n_b: usize,
    n_c: usize,
    n: usize,
    rng: &mut R,
) -> Result<Configuration> {
    if n_a + n_b + n_c != n {
        return Err(Error::CountMismatch(n_a, n_b, n_c, n));
    }
    let mut config = Configuration::from_counts(n_a, n_b, n_c)?;
    let mut sites = config.sites().to_vec();
    sites.shuffle(rng);
    config = Configuration::new(sites)?;
    Ok(config)
}

/// Two-site second moment `E[(xi^alpha_x - xi^alpha_{x+1})^2] = 2 rho (1 - rho)`
/// under the product measure at density `rho` (equals 4/9 at `rho = 1/3`).
pub fn two_site_increment_second_moment(rho: f64) -> f64 {
    2.0 * rho * (1.0 - rho)
}
