//! Microscopic instantaneous currents across bonds, plus a brute-force
//! generator application used as an oracle in tests.
//!
//! The occupation variables evolve by `L_N xi^alpha_x = N^a (j^alpha_{x-1,x}
//! - j^alpha_{x,x+1})`; both the raw current and the version written in the
//! centred variables `xi - 1/3` are exposed. For fixed parameters the two
//! differ by a configuration-independent constant.

use crate::lattice::{Configuration, Species};
use crate::params::ModelParams;

/// Raw instantaneous current of `species` (A or B) across bond `(x, x+1)`.
pub fn instantaneous_current(
    config: &Configuration,
    x: usize,
    species: Species,
    params: &ModelParams,
) -> f64 {
    let n = config.len();
    let x1 = (x + 1) % n;
    let (this, other) = match species {
        Species::A => (Species::A, Species::B),
        Species::B => (Species::B, Species::A),
        Species::C => panic!("currents are tracked for the two independent species A and B"),
    };
    let e = params.field();
    let scale = 2.0 * params.n_pow_gamma();
    let e_this = e[this as usize];
    let e_other = e[other as usize];
    let e_c = e[Species::C as usize];

    let s0 = config.occupation(x, this);
    let s1 = config.occupation(x1, this);
    let o0 = config.occupation(x, other);
    let o1 = config.occupation(x1, other);

    s0 - s1
        + (e_this - e_other) / scale * (s0 * o1 + o0 * s1)
        + (e_this - e_c) / scale * (s1 + s0 - 2.0 * s0 * s1 - s0 * o1 - o0 * s1)
}

/// Current of `species` across bond `(x, x+1)` written in centred variables
/// `xi - 1/3`.
pub fn centred_current(
    config: &Configuration,
    x: usize,
    species: Species,
    params: &ModelParams,
) -> f64 {
    let n = config.len();
    let x1 = (x + 1) % n;
    let e = params.field();
    let ng = params.n_pow_gamma();
    let (e_a, e_b, e_c) = (e[0], e[1], e[2]);

    let a0 = config.occupation(x, Species::A) - 1.0 / 3.0;
    let a1 = config.occupation(x1, Species::A) - 1.0 / 3.0;
    let b0 = config.occupation(x, Species::B) - 1.0 / 3.0;
    let b1 = config.occupation(x1, Species::B) - 1.0 / 3.0;

    match species {
        Species::A => {
            a0 - a1
                - (e_b - e_a) / (6.0 * ng) * (a0 + a1)
                - (e_b - e_c) / (6.0 * ng) * (b0 + b1)
                + (e_c - e_a) / ng * a0 * a1
                - (e_b - e_c) / (2.0 * ng) * (a0 * b1 + b0 * a1)
        }
        Species::B => {
            b0 - b1
                + (e_b - e_a) / (6.0 * ng) * (b0 + b1)
                - (e_a - e_c) / (6.0 * ng) * (a0 + a1)
                + (e_c - e_b) / ng * b0 * b1
                - (e_a - e_c) / (2.0 * ng) * (a0 * b1 + b0 * a1)
        }
        Species::C => panic!("currents are tracked for the two independent species A and B"),
    }
}

/// The configuration-independent offset `raw - centred` for `species`.
pub fn current_offset(species: Species, params: &ModelParams) -> f64 {
    let e = params.field();
    let ng = params.n_pow_gamma();
    match species {
        Species::A => (2.0 * e[0] - e[1] - e[2]) / (9.0 * ng),
        Species::B => (2.0 * e[1] - e[0] - e[2]) / (9.0 * ng),
        Species::C => panic!("currents are tracked for the two independent species A and B"),
    }
}

/// Brute-force action of the generator on the occupation observable
/// `xi^species_x`: sums `rate * [f(eta^{y,y+1}) - f(eta)]` over all bonds
/// including the `N^a` clock factor. Exponential in nothing, linear in `N`;
/// this is the oracle the event engine and the current identities are
/// checked against.
pub fn generator_on_occupation(
    config: &Configuration,
    x: usize,
    species: Species,
    params: &ModelParams,
) -> f64 {
    let n = config.len();
    let base = config.occupation(x, species);
    let mut acc = 0.0;
    for y in 0..n {
        let l = config.site(y);
        let r = config.site((y + 1) % n);
        if l == r {
            continue;
        }
        let mut swapped = config.clone();
        swapped.swap_bond(y);
        acc += params.swap_rate(l, r) * (swapped.occupation(x, species) - base);
    }
    params.n_pow_a() * acc
}

/// Iterator over every configuration of a ring of `n` sites. Intended for
/// exhaustive oracles at small `n` only (3^n states).
pub fn enumerate_configurations(n: usize) -> impl Iterator<Item = Configuration> {
    let total = 3usize.pow(n as u32);
    (0..total).map(move |mut code| {
        let sites = (0..n)
            .map(|_| {
                let s = Species::from_index(code % 3);
                code /= 3;
                s
            })
            .collect();
        Configuration::new(sites).expect("n >= 3")
    })
}
