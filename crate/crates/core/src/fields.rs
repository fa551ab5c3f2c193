//! Fluctuation fields paired with lattice test functions, frame
//! translations with the floor convention, and one-sided block averages.

use num_complex::Complex64;

use crate::error::{Error, Result};
use crate::lattice::{Configuration, Species};
use crate::mode_coupling::NormalModeSpec;
use crate::params::ModelParams;

/// How occupation variables are centred inside fields.
///
/// `Conserved` subtracts the exact conserved density `N_alpha / N` (making
/// the pairing with `f == 1` exactly zero); `Fixed` subtracts a constant
/// reference density, e.g. `1/3`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum CenterMode {
    Conserved,
    Fixed(f64),
}

impl CenterMode {
    pub const THIRD: CenterMode = CenterMode::Fixed(1.0 / 3.0);

    pub fn reference(&self, config: &Configuration, species: Species) -> f64 {
        match self {
            CenterMode::Conserved => config.density(species),
            CenterMode::Fixed(r) => *r,
        }
    }
}

/// Test function on the discrete torus `{0, 1/N, ..., (N-1)/N}`.
///
/// `Fourier { k }` evaluates `e_k(x) = exp(2 pi i k x)` (times an
/// accumulated exact translation phase); `Sampled` holds arbitrary real
/// values per site. Discrete derivatives use the forward gradient
/// `grad f(x/N) = N [f((x+1)/N) - f(x/N)]` and the three-point Laplacian,
/// with periodic indices.
#[derive(Debug, Clone, PartialEq)]
pub enum TestFunction {
    Fourier { k: i64, phase: Complex64 },
    Sampled { values: Vec<f64> },
}

/// `exp(2 pi i k x)` for `x` on the unit torus.
pub fn fourier_mode(k: i64, x: f64) -> Complex64 {
    Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * k as f64 * x)
}

impl TestFunction {
    pub fn fourier(k: i64) -> TestFunction {
        TestFunction::Fourier { k, phase: Complex64::new(1.0, 0.0) }
    }

    pub fn sampled(values: Vec<f64>) -> TestFunction {
        TestFunction::Sampled { values }
    }

    /// Value at lattice point `x/n`.
    pub fn eval(&self, x: usize, n: usize) -> Complex64 {
        match self {
            TestFunction::Fourier { k, phase } => {
                phase * fourier_mode(*k, (x % n) as f64 / n as f64)
            }
            TestFunction::Sampled { values } => Complex64::new(values[x % values.len()], 0.0),
        }
    }

    /// Forward discrete gradient at `x/n`.
    pub fn grad_n(&self, x: usize, n: usize) -> Complex64 {
        n as f64 * (self.eval(x + 1, n) - self.eval(x, n))
    }

    /// Three-point discrete Laplacian at `x/n`.
    pub fn lap_n(&self, x: usize, n: usize) -> Complex64 {
        let xm = (x + n - 1) % n;
        (n as f64) * (n as f64) * (self.eval(x + 1, n) - 2.0 * self.eval(x, n) + self.eval(xm, n))
    }

    /// Gradient multiplier for a Fourier mode: `grad e_k = nu_k e_k` with
    /// `nu_k = N (e^{2 pi i k / N} - 1)`.
    pub fn fourier_grad_factor(k: i64, n: usize) -> Complex64 {
        n as f64 * (fourier_mode(k, 1.0 / n as f64) - 1.0)
    }

    /// Laplacian multiplier for a Fourier mode:
    /// `lap e_k = -mu_k e_k` with `mu_k = 4 N^2 sin^2(pi k / N)`.
    pub fn fourier_lap_factor(k: i64, n: usize) -> f64 {
        let s = (std::f64::consts::PI * k as f64 / n as f64).sin();
        -4.0 * (n as f64) * (n as f64) * s * s
    }

    /// Lattice translation by `shift` sites, floored: sampled values move by
    /// `floor(shift)` positions, Fourier modes pick up the exact phase
    /// `e_{-k}(floor(shift)/N)`.
    pub fn translate(&self, shift: f64, n: usize) -> TestFunction {
        let m = shift.floor() as i64;
        match self {
            TestFunction::Fourier { k, phase } => TestFunction::Fourier {
                k: *k,
                phase: phase * fourier_mode(-*k, m as f64 / n as f64),
            },
            TestFunction::Sampled { values } => {
                let len = values.len() as i64;
                let shifted = (0..values.len())
                    .map(|x| {
                        let idx = (x as i64 - m).rem_euclid(len) as usize;
                        values[idx]
                    })
                    .collect();
                TestFunction::Sampled { values: shifted }
            }
        }
    }

    /// Lattice L2 norm squared, `(1/N) sum |f(x/N)|^2`.
    pub fn norm2_lattice(&self, n: usize) -> f64 {
        (0..n).map(|x| self.eval(x, n).norm_sqr()).sum::<f64>() / n as f64
    }
}

/// Density fluctuation field: `N^{-1/2} sum_x (xi^alpha_x - ref) f(x/N)`.
pub fn density_field(
    config: &Configuration,
    species: Species,
    f: &TestFunction,
    center: CenterMode,
) -> Complex64 {
    let n = config.len();
    let reference = center.reference(config, species);
    let mut acc = Complex64::new(0.0, 0.0);
    for x in 0..n {
        acc += (config.occupation(x, species) - reference) * f.eval(x, n);
    }
    acc / (n as f64).sqrt()
}

/// Moving-frame normal-mode field
/// `D1 Y^A(T_{v N^a t} f) + D2 Y^B(T_{v N^a t} f)`.
pub fn normal_field(
    config: &Configuration,
    t: f64,
    spec: &NormalModeSpec,
    f: &TestFunction,
    params: &ModelParams,
    center: CenterMode,
) -> Complex64 {
    let shift = spec.v * params.n_pow_a() * t;
    let tf = f.translate(shift, config.len());
    spec.d1 * density_field(config, Species::A, &tf, center)
        + spec.d2 * density_field(config, Species::B, &tf, center)
}

/// Which side of the anchor site a block covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockSide {
    /// sites `x+1 ..= x+L`
    Right,
    /// sites `x-L ..= x-1`
    Left,
}

/// Averaging kernel over the block.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BlockKernel {
    /// flat average
    Indicator,
    /// raised-cosine bump `u -> (1 - cos(2 pi u / l)) / l` on `[0, l]`
    SmoothBump,
}

/// One-sided block average specification. Width is either a site count or a
/// macroscopic fraction `eps` (width `floor(eps N)` sites).
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlockAverageSpec {
    pub side: BlockSide,
    pub kernel: BlockKernel,
    pub width: BlockWidth,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum BlockWidth {
    Sites(usize),
    Fraction(f64),
}

impl BlockAverageSpec {
    pub fn width_sites(&self, n: usize) -> Result<usize> {
        let l = match self.width {
            BlockWidth::Sites(l) => l,
            BlockWidth::Fraction(eps) => {
                let w = (eps * n as f64).floor();
                if w < 1.0 {
                    return Err(Error::EmptyKernel(eps * n as f64));
                }
                w as usize
            }
        };
        if l == 0 {
            return Err(Error::EmptyKernel(0.0));
        }
        if l > n {
            return Err(Error::BlockTooWide { width: l, n });
        }
        Ok(l)
    }
}

/// Normalized kernel weights over offsets `1..=l` (right) or `-l..=-1`
/// (left, returned in site order nearest-first). Weights sum to one exactly
/// up to one final renormalization.
pub fn kernel_weights(kernel: BlockKernel, l: usize) -> Vec<f64> {
    let raw: Vec<f64> = match kernel {
        BlockKernel::Indicator => vec![1.0; l],
        // the width-1 bump has no interior point; fall back to the indicator
        BlockKernel::SmoothBump if l == 1 => vec![1.0],
        BlockKernel::SmoothBump => (1..=l)
            .map(|j| 1.0 - (2.0 * std::f64::consts::PI * j as f64 / l as f64).cos())
            .collect(),
    };
    let sum: f64 = raw.iter().sum();
    raw.into_iter().map(|w| w / sum).collect()
}

/// Centred one-sided block average of `species` at anchor `x`.
pub fn block_average(
    config: &Configuration,
    x: usize,
    spec: &BlockAverageSpec,
    species: Species,
    center: CenterMode,
) -> Result<f64> {
    let n = config.len();
    let l = spec.width_sites(n)?;
    let w = kernel_weights(spec.kernel, l);
    let reference = center.reference(config, species);
    let mut acc = 0.0;
    for (j, wj) in w.iter().enumerate() {
        let y = match spec.side {
            BlockSide::Right => (x + 1 + j) % n,
            BlockSide::Left => (x + n - 1 - j) % n,
        };
        acc += wj * (config.occupation(y, species) - reference);
    }
    Ok(acc)
}
