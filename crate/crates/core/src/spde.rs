//! Reference integrators for the limiting equations: the conservative-noise
//! stochastic Burgers / Ornstein-Uhlenbeck equation on the torus in spectral
//! form, and the deterministic two-component hydrodynamic system.

use num_complex::Complex64;
use rand::Rng;
use rand_distr::StandardNormal;

use crate::error::{Error, Result};
use crate::estimators::dft::{dft, idft, SpectralSeries};
use crate::rng::ChaCha8Rng;

/// Real spectral field `Z(x) = sum_{|k| <= M} c_k e_k(x)` with
/// `c_{-k} = conj(c_k)`; only `k = 0..=M` is stored.
#[derive(Debug, Clone)]
pub struct SpectralField {
    pub coeffs: Vec<Complex64>,
    pub time: f64,
}

impl SpectralField {
    pub fn zero(modes: usize) -> SpectralField {
        SpectralField { coeffs: vec![Complex64::default(); modes + 1], time: 0.0 }
    }

    pub fn modes(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Stationary white-noise sample: independent complex Gaussian modes
    /// with `E|c_k|^2 = sigma2` (`c_0 = 0`).
    pub fn white_noise(modes: usize, sigma2: f64, rng: &mut ChaCha8Rng) -> SpectralField {
        let mut coeffs = vec![Complex64::default(); modes + 1];
        let s = (sigma2 / 2.0).sqrt();
        for c in coeffs.iter_mut().skip(1) {
            let re: f64 = rng.sample(StandardNormal);
            let im: f64 = rng.sample(StandardNormal);
            *c = Complex64::new(s * re, s * im);
        }
        SpectralField { coeffs, time: 0.0 }
    }

    /// Values on a real-space grid of `grid_size >= 2 modes + 1` points.
    pub fn to_grid(&self, grid_size: usize) -> Vec<f64> {
        let m = self.modes();
        assert!(grid_size > 2 * m, "grid must resolve all modes");
        let mut full = vec![Complex64::default(); grid_size];
        full[0] = self.coeffs[0];
        for k in 1..=m {
            full[k] = self.coeffs[k];
            full[grid_size - k] = self.coeffs[k].conj();
        }
        idft(&SpectralSeries { coeffs: full })
            .into_iter()
            .map(|c| c.re)
            .collect()
    }
}

/// Solver configuration. The defaults (`modes = 256`, `dt = 1e-5`) are a
/// starting point, not a hard-coded choice; with a nonzero nonlinearity the
/// step must also satisfy [`SbeSolver::stability_bound`].
#[derive(Debug, Clone, Copy)]
pub struct SbeConfig {
    pub modes: usize,
    pub dt: f64,
    pub lambda: f64,
    pub sigma2: f64,
}

impl Default for SbeConfig {
    fn default() -> Self {
        SbeConfig { modes: 256, dt: 1e-5, lambda: 0.0, sigma2: 1.0 }
    }
}

/// Spectral exponential-Euler integrator for
/// `dZ = lap Z dt + lambda grad(Z^2) dt + sqrt(2 sigma2) grad dW`.
///
/// The linear part and the conservative noise are integrated exactly per
/// mode (the white-noise invariant measure is preserved exactly when
/// `lambda = 0`); the nonlinearity is evaluated pseudo-spectrally on a
/// `4 modes` grid, which zero-pads beyond the 2/3 rule so the quadratic
/// term is alias-free.
pub struct SbeSolver {
    config: SbeConfig,
    pub state: SpectralField,
    rng: ChaCha8Rng,
    grid: usize,
    /// `e^{-4 pi^2 k^2 dt}` per mode
    decay: Vec<f64>,
    /// std dev of the exact OU noise increment per mode component
    noise_std: Vec<f64>,
    steps: u64,
}

impl SbeSolver {
    pub fn new(config: SbeConfig, init: SpectralField, rng: ChaCha8Rng) -> Result<SbeSolver> {
        if init.modes() != config.modes {
            return Err(Error::BadParameter("initial field modes != config.modes".into()));
        }
        if !(config.dt > 0.0) {
            return Err(Error::BadParameter(format!("dt must be positive, got {}", config.dt)));
        }
        if config.lambda != 0.0 && config.dt > Self::stability_bound(config.modes) {
            return Err(Error::UnstableStep {
                dt: config.dt,
                bound: Self::stability_bound(config.modes),
            });
        }
        let grid = (4 * config.modes).next_power_of_two().max(8);
        let mut decay = Vec::with_capacity(config.modes + 1);
        let mut noise_std = Vec::with_capacity(config.modes + 1);
        for k in 0..=config.modes {
            let nu = 4.0 * std::f64::consts::PI.powi(2) * (k * k) as f64;
            let d = (-nu * config.dt).exp();
            decay.push(d);
            // exact stationary-variance-preserving increment: per complex
            // component, E|eta|^2 = sigma2 (1 - e^{-2 nu dt})
            let var = if k == 0 { 0.0 } else { config.sigma2 * (1.0 - d * d) };
            noise_std.push((var / 2.0).sqrt());
        }
        Ok(SbeSolver { config, state: init, rng, grid, decay, noise_std, steps: 0 })
    }

    /// Step bound constraining the explicit nonlinear substep,
    /// `1/(2 pi M)^2`.
    pub fn stability_bound(modes: usize) -> f64 {
        1.0 / (2.0 * std::f64::consts::PI * modes as f64).powi(2)
    }

    pub fn config(&self) -> &SbeConfig {
        &self.config
    }

    /// `grad(Z^2)` in mode space, alias-free.
    fn nonlinearity(&self) -> Vec<Complex64> {
        let m = self.config.modes;
        let mut values = self.state.to_grid(self.grid);
        for v in values.iter_mut() {
            *v = *v * *v;
        }
        let spec = dft(&values);
        (0..=m)
            .map(|k| {
                let ik = Complex64::new(0.0, 2.0 * std::f64::consts::PI * k as f64);
                ik * spec.coeffs[k]
            })
            .collect()
    }

    pub fn step(&mut self) -> Result<()> {
        let m = self.config.modes;
        let dt = self.config.dt;
        let nl = if self.config.lambda != 0.0 {
            Some(self.nonlinearity())
        } else {
            None
        };
        for k in 1..=m {
            let mut c = self.state.coeffs[k];
            if let Some(nl) = &nl {
                c += dt * self.config.lambda * nl[k];
            }
            c *= self.decay[k];
            let re: f64 = self.rng.sample(StandardNormal);
            let im: f64 = self.rng.sample(StandardNormal);
            c += Complex64::new(self.noise_std[k] * re, self.noise_std[k] * im);
            if !c.re.is_finite() || !c.im.is_finite() {
                return Err(Error::NonFinite(self.steps));
            }
            self.state.coeffs[k] = c;
        }
        self.steps += 1;
        self.state.time += dt;
        Ok(())
    }
}

/// Stationary two-time mode covariance of the Ornstein-Uhlenbeck equation:
/// `E[c_k(t) conj(c_k(0))] = sigma2 e^{-4 pi^2 k^2 t}`.
pub fn ou_mode_covariance(sigma2: f64, k: i64, t: f64) -> f64 {
    sigma2 * (-4.0 * std::f64::consts::PI.powi(2) * (k * k) as f64 * t).exp()
}

/// Side-by-side comparison rows of particle two-time covariances against
/// the analytic Ornstein-Uhlenbeck curve.
#[derive(Debug, Clone)]
pub struct OuComparisonRow {
    pub t: f64,
    pub particle: f64,
    pub particle_stderr: f64,
    pub analytic: f64,
    pub ratio: f64,
}

pub fn ou_vs_particle(
    sigma2: f64,
    k: i64,
    ts: &[f64],
    particle: &[f64],
    stderr: &[f64],
) -> Vec<OuComparisonRow> {
    ts.iter()
        .zip(particle.iter().zip(stderr))
        .map(|(&t, (&p, &se))| {
            let a = ou_mode_covariance(sigma2, k, t);
            OuComparisonRow { t, particle: p, particle_stderr: se, analytic: a, ratio: p / a }
        })
        .collect()
}

/// Two-component density profile on a uniform mesh.
#[derive(Debug, Clone)]
pub struct HydroState {
    pub rho_a: Vec<f64>,
    pub rho_b: Vec<f64>,
}

impl HydroState {
    pub fn masses(&self) -> (f64, f64) {
        let dx = 1.0 / self.rho_a.len() as f64;
        (
            self.rho_a.iter().sum::<f64>() * dx,
            self.rho_b.iter().sum::<f64>() * dx,
        )
    }

    pub fn validate(&self) -> Result<()> {
        for (a, b) in self.rho_a.iter().zip(&self.rho_b) {
            if !(*a >= 0.0 && *b >= 0.0 && a + b <= 1.0 + 1e-9) {
                return Err(Error::BadDensities { rho_a: *a, rho_b: *b });
            }
        }
        Ok(())
    }
}

/// Explicit finite-difference integration of
/// `dt rho = lap rho - div(chi(rho) g_E)` with mobility
/// `chi = [[ra(1-ra), -ra rb], [-ra rb, rb(1-rb)]]`, periodic mesh.
/// Requires the parabolic CFL condition `dt <= dx^2 / 4`.
pub fn hydro_solve(
    init: &HydroState,
    g_e: (f64, f64),
    t_max: f64,
    dt: f64,
) -> Result<HydroState> {
    let m = init.rho_a.len();
    if m < 4 || init.rho_b.len() != m {
        return Err(Error::BadParameter("mesh too small or mismatched".into()));
    }
    init.validate()?;
    let dx = 1.0 / m as f64;
    if dt > dx * dx / 4.0 {
        return Err(Error::UnstableStep { dt, bound: dx * dx / 4.0 });
    }
    let mut state = init.clone();
    let steps = (t_max / dt).round() as u64;
    let mut flux_a = vec![0.0; m];
    let mut flux_b = vec![0.0; m];
    let mut next_a = vec![0.0; m];
    let mut next_b = vec![0.0; m];
    for _ in 0..steps {
        for i in 0..m {
            let ra = state.rho_a[i];
            let rb = state.rho_b[i];
            flux_a[i] = ra * (1.0 - ra) * g_e.0 - ra * rb * g_e.1;
            flux_b[i] = rb * (1.0 - rb) * g_e.1 - ra * rb * g_e.0;
        }
        for i in 0..m {
            let ip = (i + 1) % m;
            let im = (i + m - 1) % m;
            let lap_a = (state.rho_a[ip] - 2.0 * state.rho_a[i] + state.rho_a[im]) / (dx * dx);
            let lap_b = (state.rho_b[ip] - 2.0 * state.rho_b[i] + state.rho_b[im]) / (dx * dx);
            let div_a = (flux_a[ip] - flux_a[im]) / (2.0 * dx);
            let div_b = (flux_b[ip] - flux_b[im]) / (2.0 * dx);
            next_a[i] = state.rho_a[i] + dt * (lap_a - div_a);
            next_b[i] = state.rho_b[i] + dt * (lap_b - div_b);
        }
        std::mem::swap(&mut state.rho_a, &mut next_a);
        std::mem::swap(&mut state.rho_b, &mut next_b);
    }
    Ok(state)
}
