//! Space-time structure functions of the lattice normal-mode variables and
//! the dynamical-exponent fit from profile widths.

use crate::engine::Engine;
use crate::ensemble::map_seeds;
use crate::error::{Error, Result};
use crate::estimators::dft;
use crate::estimators::stats;
use crate::lattice::{Configuration, Species};
use crate::measures::sample_product_measure;
use crate::mode_coupling::{coupling_report, DensityPoint};
use crate::params::ModelParams;

/// Which mode pair a correlation row refers to.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ModePair {
    PlusPlus,
    MinusMinus,
    PlusMinus,
}

/// Space- and ensemble-averaged correlations
/// `S(t, u) = E[ phi_a(x + u + frame, t) phi_b(x, 0) ]`,
/// reported in the co-moving frame of the first index (its peak offset
/// `floor(v N^a t)` is subtracted).
#[derive(Debug, Clone)]
pub struct StructureFunctionEstimate {
    pub t_grid: Vec<f64>,
    /// lattice offsets `u`, length `N`, in `0..N` circular order
    pub n: usize,
    /// `values[pair][ti][u]`
    pub values: [Vec<Vec<f64>>; 3],
    pub stderr: [Vec<Vec<f64>>; 3],
    pub v_plus: f64,
    pub v_minus: f64,
    pub n_samples: usize,
}

impl StructureFunctionEstimate {
    pub fn row(&self, pair: ModePair, ti: usize) -> &[f64] {
        &self.values[pair as usize][ti]
    }

    /// Total correlation mass `sum_u S(t, u)`; exactly conserved in `t`
    /// trajectory-wise because the mode sums are conserved quantities.
    pub fn total_mass(&self, pair: ModePair, ti: usize) -> f64 {
        self.values[pair as usize][ti].iter().sum()
    }
}

/// Lattice normal-mode variables `phi^{+-}_x` from the diagonalizing matrix
/// rows at equal densities.
fn mode_fields(config: &Configuration, r: &[[f64; 2]; 2]) -> (Vec<f64>, Vec<f64>) {
    let n = config.len();
    let mut plus = Vec::with_capacity(n);
    let mut minus = Vec::with_capacity(n);
    for x in 0..n {
        let a = config.occupation(x, Species::A) - 1.0 / 3.0;
        let b = config.occupation(x, Species::B) - 1.0 / 3.0;
        plus.push(r[0][0] * a + r[0][1] * b);
        minus.push(r[1][0] * a + r[1][1] * b);
    }
    (plus, minus)
}

/// Circular cross-correlation `(1/N) sum_x f(x + r) g(x)` for all lags.
fn cross_correlation(f: &[f64], g: &[f64]) -> Vec<f64> {
    let n = f.len();
    let ff = dft::dft(f);
    let fg = dft::dft(g);
    let prod: Vec<num_complex::Complex64> = (0..n as i64)
        .map(|k| ff.at(k) * fg.at(-k))
        .collect();
    dft::idft(&dft::SpectralSeries { coeffs: prod })
        .into_iter()
        .map(|c| c.re)
        .collect()
}

/// Estimate the structure functions over `t_grid` from `n_traj` stationary
/// trajectories.
pub fn structure_function(
    params: &ModelParams,
    t_grid: &[f64],
    n_traj: usize,
    master_seed: u64,
) -> Result<StructureFunctionEstimate> {
    if t_grid.is_empty() {
        return Err(Error::BadEstimatorInput("empty time grid".into()));
    }
    let n = params.n();
    let report = coupling_report(DensityPoint::equal_thirds(), params)?;
    let r_rows = report.r.0;
    let v_plus = report.v_plus * report.scale;
    let v_minus = report.v_minus * report.scale;
    let speed = params.n_pow_a();

    struct Recorder {
        r_rows: [[f64; 2]; 2],
        base: Option<(Vec<f64>, Vec<f64>)>,
        // rows[pair][ti][u]
        rows: [Vec<Vec<f64>>; 3],
    }
    impl crate::engine::TrajectoryObserver for Recorder {
        fn sample(&mut self, config: &Configuration, _t: f64) {
            let (plus, minus) = mode_fields(config, &self.r_rows);
            if self.base.is_none() {
                self.base = Some((plus.clone(), minus.clone()));
            }
            let (p0, m0) = self.base.as_ref().unwrap();
            self.rows[0].push(cross_correlation(&plus, p0));
            self.rows[1].push(cross_correlation(&minus, m0));
            self.rows[2].push(cross_correlation(&plus, m0));
        }
    }

    let per_traj = map_seeds(master_seed, n_traj, |_, mut rng| {
        let init = sample_product_measure(1.0 / 3.0, 1.0 / 3.0, n, &mut rng)
            .expect("valid densities");
        let mut engine = Engine::new(*params, init, rng).expect("matching sizes");
        let mut rec = Recorder {
            r_rows,
            base: None,
            rows: [Vec::new(), Vec::new(), Vec::new()],
        };
        let mut grid = vec![0.0];
        grid.extend(t_grid.iter().copied().filter(|&t| t > 0.0));
        {
            let mut obs: Vec<&mut dyn crate::engine::TrajectoryObserver> = vec![&mut rec];
            let horizon = grid.last().copied().unwrap_or(0.0);
            engine.run_to(horizon, &grid, &mut obs);
        }
        rec.rows
    });

    // realign rows: recorder sampled at [0] + positive grid times; map back
    // to the requested grid (t == 0 rows reuse the base sample).
    let sampled_times: Vec<f64> = {
        let mut g = vec![0.0];
        g.extend(t_grid.iter().copied().filter(|&t| t > 0.0));
        g
    };
    let mut values: [Vec<Vec<f64>>; 3] = Default::default();
    let mut stderr: [Vec<Vec<f64>>; 3] = Default::default();
    for pair in 0..3 {
        for &t in t_grid {
            let si = sampled_times
                .iter()
                .position(|&s| (s - t).abs() < 1e-15)
                .ok_or_else(|| Error::BadEstimatorInput("grid alignment".into()))?;
            // co-moving frame of the first index
            let v = if pair == 1 { v_minus } else { v_plus };
            let frame = (v * speed * t).floor() as i64;
            let mut mean_row = vec![0.0; n];
            let mut se_row = vec![0.0; n];
            for u in 0..n {
                let lag = ((u as i64 + frame).rem_euclid(n as i64)) as usize;
                let samples: Vec<f64> =
                    per_traj.iter().map(|rows| rows[pair][si][lag]).collect();
                let (m, se) = stats::mean_with_stderr(&samples);
                mean_row[u] = m;
                se_row[u] = se;
            }
            values[pair].push(mean_row);
            stderr[pair].push(se_row);
        }
    }
    Ok(StructureFunctionEstimate {
        t_grid: t_grid.to_vec(),
        n,
        values,
        stderr,
        v_plus,
        v_minus,
        n_samples: n_traj,
    })
}

/// Standard deviation of the normalized profile `s/sum(s)` over signed
/// offsets. Errors when the profile has non-positive total mass or spread.
pub fn profile_width(s: &[f64]) -> Result<f64> {
    let n = s.len() as i64;
    let mass: f64 = s.iter().sum();
    if mass <= 0.0 {
        return Err(Error::BadEstimatorInput(format!("non-positive profile mass {mass}")));
    }
    let signed = |u: i64| -> i64 {
        if u > n / 2 {
            u - n
        } else {
            u
        }
    };
    let mut m1 = 0.0;
    let mut m2 = 0.0;
    for (u, &v) in s.iter().enumerate() {
        let x = signed(u as i64) as f64;
        m1 += x * v / mass;
        m2 += x * x * v / mass;
    }
    let var = m2 - m1 * m1;
    if var <= 0.0 {
        return Err(Error::BadEstimatorInput(format!("non-positive profile variance {var}")));
    }
    Ok(var.sqrt())
}

/// Least-squares dynamical exponent from `width(t) ~ t^{1/z}`:
/// fits `log width` against `log t` and returns `(z, stderr)`.
pub fn exponent_fit(ts: &[f64], widths: &[f64]) -> Result<(f64, f64)> {
    if ts.len() < 4 || ts.len() != widths.len() {
        return Err(Error::BadEstimatorInput(
            "need at least 4 (t, width) points".into(),
        ));
    }
    if widths.iter().any(|&w| w <= 0.0) || ts.iter().any(|&t| t <= 0.0) {
        return Err(Error::BadEstimatorInput("non-positive width or time".into()));
    }
    let xs: Vec<f64> = ts.iter().map(|t| t.ln()).collect();
    let ys: Vec<f64> = widths.iter().map(|w| w.ln()).collect();
    let (slope, se) = stats::ols_slope(&xs, &ys);
    if slope <= 0.0 {
        return Err(Error::BadEstimatorInput(format!("non-positive growth slope {slope}")));
    }
    Ok((1.0 / slope, se / (slope * slope)))
}
