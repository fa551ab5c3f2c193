//! Block-average replacement residuals: how well products of neighbouring
//! centred occupations are replaced by one-sided block averages (sharp
//! indicator blocks, integrated exactly along the event stream) or by smooth
//! kernel pairings (dense midpoint quadrature).
//!
//! Both estimators return the Monte Carlo second moment of the time
//! integral together with the corresponding scaling bracket,
//! `t [L/N^{a-1} + t N/L^2] |v|^2` for blocks of `L` sites and
//! `t [eps + t/(N eps^2)] |v|^2` for kernels of macroscopic width `eps`
//! (the overall constant is not identifiable, so only shapes are tested).

use crate::engine::{Engine, Event, TrajectoryObserver};
use crate::ensemble::map_seeds;
use crate::error::{Error, Result};
use crate::estimators::dft::circular_correlate;
use crate::estimators::stats;
use crate::fields::{kernel_weights, BlockKernel};
use crate::lattice::{Configuration, Species};
use crate::measures::sample_product_measure;
use crate::params::ModelParams;

const RHO: f64 = 1.0 / 3.0;

#[inline]
fn centred(occ: bool) -> f64 {
    if occ {
        1.0 - RHO
    } else {
        -RHO
    }
}

/// Exactly-integrated residual observer for one `(alpha, beta, L)` triple:
/// accumulates `int sum_x v(x) { bar xi^a_x bar xi^b_{x+1} - replacement
/// + counter } ds` along the event stream. The counter-term
/// `Var(xi)/L = rho(1-rho)/L` (present when `alpha == beta`, equal to half
/// the two-site increment moment `E[(xi_x - xi_{x+1})^2]`) makes the
/// integrand exactly mean-zero at equilibrium.
pub struct BlockResidualObserver {
    n: usize,
    alpha: Species,
    beta: Species,
    v: Vec<f64>,
    w: Vec<f64>,
    right_beta: Vec<f64>,
    left_alpha: Vec<f64>,
    g_sum: f64,
    h_sum: f64,
    c0: f64,
    pub integral: f64,
    events_since_resync: u64,
}

const RESYNC_PERIOD: u64 = 1 << 20;

impl BlockResidualObserver {
    pub fn new(params: &ModelParams, alpha: Species, beta: Species, v: Vec<f64>, l: usize) -> Result<Self> {
        let n = params.n();
        if l == 0 || l > n / 2 {
            return Err(Error::BlockTooWide { width: l, n });
        }
        if v.len() != n {
            return Err(Error::BadEstimatorInput("weight vector length != N".into()));
        }
        let c0 = if alpha == beta {
            RHO * (1.0 - RHO) / l as f64 * v.iter().sum::<f64>()
        } else {
            0.0
        };
        Ok(BlockResidualObserver {
            n,
            alpha,
            beta,
            v,
            w: kernel_weights(BlockKernel::Indicator, l),
            right_beta: vec![0.0; n],
            left_alpha: vec![0.0; n],
            g_sum: 0.0,
            h_sum: 0.0,
            c0,
            integral: 0.0,
            events_since_resync: 0,
        })
    }

    fn recompute(&mut self, config: &Configuration) {
        let n = self.n;
        for x in 0..n {
            let mut r = 0.0;
            let mut lft = 0.0;
            for (j, wj) in self.w.iter().enumerate() {
                r += wj * centred(config.site((x + 1 + j) % n) == self.beta);
                lft += wj * centred(config.site((x + n - 1 - j) % n) == self.alpha);
            }
            self.right_beta[x] = r;
            self.left_alpha[x] = lft;
        }
        self.g_sum = (0..n)
            .map(|x| {
                self.v[x]
                    * centred(config.site(x) == self.alpha)
                    * centred(config.site((x + 1) % n) == self.beta)
            })
            .sum();
        self.h_sum = if self.alpha == self.beta {
            (0..n).map(|x| self.v[x] * self.right_beta[x] * self.right_beta[x]).sum()
        } else {
            (0..n).map(|x| self.v[x] * self.left_alpha[x] * self.right_beta[x]).sum()
        };
        self.events_since_resync = 0;
    }

    /// Occupancy of `species` at site `z` flips by `d` (+1 appears, -1 leaves).
    fn site_change(&mut self, z: usize, species: Species, d: f64) {
        let n = self.n;
        let same_pair = self.alpha == self.beta;
        if species == self.beta {
            // right windows containing z: x = z - j, j = 1..=L
            let mut x = if z == 0 { n - 1 } else { z - 1 };
            for wj in self.w.iter() {
                let delta = d * wj;
                if same_pair {
                    self.h_sum += self.v[x] * (2.0 * self.right_beta[x] * delta + delta * delta);
                } else {
                    self.h_sum += self.v[x] * self.left_alpha[x] * delta;
                }
                self.right_beta[x] += delta;
                x = if x == 0 { n - 1 } else { x - 1 };
            }
        }
        if species == self.alpha && !same_pair {
            // left windows containing z: x = z + j, j = 1..=L
            let mut x = if z + 1 == n { 0 } else { z + 1 };
            for wj in self.w.iter() {
                let delta = d * wj;
                self.h_sum += self.v[x] * delta * self.right_beta[x];
                self.left_alpha[x] += delta;
                x = if x + 1 == n { 0 } else { x + 1 };
            }
        }
    }
}

impl TrajectoryObserver for BlockResidualObserver {
    fn begin(&mut self, config: &Configuration, _t: f64) {
        self.recompute(config);
    }

    fn constant_interval(&mut self, _config: &Configuration, t0: f64, t1: f64) {
        self.integral += (self.g_sum - self.h_sum + self.c0) * (t1 - t0);
    }

    fn apply_event(&mut self, config: &Configuration, ev: &Event) {
        let n = self.n;
        let x = ev.bond;
        let x1 = (x + 1) % n;
        let site_after = |z: usize| -> Species {
            if z == x {
                ev.right
            } else if z == x1 {
                ev.left
            } else {
                config.site(z)
            }
        };
        // bond products at x-1, x, x+1
        for &y in &[(x + n - 1) % n, x, x1] {
            let y1 = (y + 1) % n;
            let old = centred(config.site(y) == self.alpha) * centred(config.site(y1) == self.beta);
            let new = centred(site_after(y) == self.alpha) * centred(site_after(y1) == self.beta);
            self.g_sum += self.v[y] * (new - old);
        }
        // block averages: apply the two site changes sequentially
        if ev.left != ev.right {
            for (z, gone, came) in [(x, ev.left, ev.right), (x1, ev.right, ev.left)] {
                self.site_change(z, gone, -1.0);
                self.site_change(z, came, 1.0);
            }
        }
        self.events_since_resync += 1;
        if self.events_since_resync >= RESYNC_PERIOD {
            let mut after = config.clone();
            after.swap_bond(x);
            self.recompute(&after);
        }
    }
}

/// Result of a replacement-residual estimate.
#[derive(Debug, Clone, Copy)]
pub struct BgEstimate {
    /// Monte Carlo estimate of `E[(int ...)^2]`.
    pub lhs: f64,
    pub stderr: f64,
    /// The scaling bracket of the matching bound (constant factor dropped).
    pub bracket: f64,
    pub n_samples: usize,
}

/// `|v|^2_{2,N} = (1/N) sum v(x)^2`.
fn weight_norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>() / v.len() as f64
}

pub fn block_bracket(params: &ModelParams, l: usize, t: f64, v: &[f64]) -> f64 {
    let n = params.n() as f64;
    t * (l as f64 / n.powf(params.a() - 1.0) + t * n / (l as f64 * l as f64)) * weight_norm2(v)
}

pub fn kernel_bracket(params: &ModelParams, eps: f64, t: f64, v: &[f64]) -> f64 {
    let n = params.n() as f64;
    t * (eps + t / (n * eps * eps)) * weight_norm2(v)
}

/// Sharp-block replacement residual `E[(int_0^t sum_x v(x) {...} ds)^2]`
/// with exact event-driven time integration, over `n_traj` stationary
/// trajectories.
pub fn bg_residual(
    params: &ModelParams,
    pair: (Species, Species),
    v: &[f64],
    l: usize,
    t: f64,
    n_traj: usize,
    master_seed: u64,
) -> Result<BgEstimate> {
    BlockResidualObserver::new(params, pair.0, pair.1, v.to_vec(), l)?; // validate early
    let n = params.n();
    let integrals = map_seeds(master_seed, n_traj, |_, mut rng| {
        let init = sample_product_measure(RHO, RHO, n, &mut rng).expect("densities");
        let mut engine = Engine::new(*params, init, rng).expect("sizes");
        let mut obs =
            BlockResidualObserver::new(params, pair.0, pair.1, v.to_vec(), l).expect("validated");
        {
            let mut list: Vec<&mut dyn TrajectoryObserver> = vec![&mut obs];
            engine.run_to(t, &[], &mut list);
        }
        obs.integral
    });
    let squares: Vec<f64> = integrals.iter().map(|x| x * x).collect();
    let (lhs, stderr) = stats::mean_with_stderr(&squares);
    Ok(BgEstimate { lhs, stderr, bracket: block_bracket(params, l, t, v), n_samples: n_traj })
}

/// Smooth-kernel replacement residual, quadrature version: the integrand is
/// evaluated by FFT kernel pairings on a dense midpoint grid (`n_quad`
/// points). Kernel pairings decorrelate on times of order `eps^2`, so
/// `n_quad >> t/eps^2` makes the quadrature error negligible next to the
/// Monte Carlo error.
pub fn bg_residual_smooth(
    params: &ModelParams,
    pair: (Species, Species),
    v: &[f64],
    eps: f64,
    t: f64,
    n_traj: usize,
    n_quad: usize,
    master_seed: u64,
) -> Result<BgEstimate> {
    let out = bg_residual_smooth_multi(params, pair, v, &[eps], t, n_traj, n_quad, master_seed)?;
    Ok(out.into_iter().next().expect("one width"))
}

/// [`bg_residual_smooth`] for several widths over one shared set of
/// trajectories (so width comparisons see identical noise).
#[allow(clippy::too_many_arguments)]
pub fn bg_residual_smooth_multi(
    params: &ModelParams,
    pair: (Species, Species),
    v: &[f64],
    eps_list: &[f64],
    t: f64,
    n_traj: usize,
    n_quad: usize,
    master_seed: u64,
) -> Result<Vec<BgEstimate>> {
    let n = params.n();
    let mut kernels = Vec::new();
    for &eps in eps_list {
        let l = (eps * n as f64).floor();
        if l < 1.0 {
            return Err(Error::EmptyKernel(l));
        }
        if !(0.0..0.25).contains(&eps) {
            return Err(Error::BadEstimatorInput(format!("eps = {eps} outside (0, 1/4)")));
        }
        let l = l as usize;
        // raw raised-cosine kernel over one side, paired as
        // (1/(N eps)) sum_j raw_j xi(x -+ j)
        let scale = 1.0 / (n as f64 * eps);
        let raw: Vec<f64> = (1..=l)
            .map(|j| 1.0 - (2.0 * std::f64::consts::PI * j as f64 / l as f64).cos())
            .collect();
        let left: Vec<(i64, f64)> =
            raw.iter().enumerate().map(|(j, &r)| (j as i64 + 1, r * scale)).collect();
        let right: Vec<(i64, f64)> =
            raw.iter().enumerate().map(|(j, &r)| (-(j as i64) - 1, r * scale)).collect();
        kernels.push((left, right));
    }

    let sample_times: Vec<f64> = (0..n_quad)
        .map(|m| (m as f64 + 0.5) * t / n_quad as f64)
        .collect();

    struct QuadObserver<'a> {
        alpha: Species,
        beta: Species,
        v: &'a [f64],
        kernels: &'a [(Vec<(i64, f64)>, Vec<(i64, f64)>)],
        sums: Vec<f64>,
    }
    impl TrajectoryObserver for QuadObserver<'_> {
        fn sample(&mut self, config: &Configuration, _t: f64) {
            let n = config.len();
            let xa: Vec<f64> = (0..n).map(|x| centred(config.site(x) == self.alpha)).collect();
            let xb: Vec<f64> = (0..n).map(|x| centred(config.site(x) == self.beta)).collect();
            let sharp: f64 = (0..n).map(|x| self.v[x] * xa[x] * xb[(x + 1) % n]).sum();
            for (i, (left, right)) in self.kernels.iter().enumerate() {
                let pl = circular_correlate(&xa, left);
                let pr = circular_correlate(&xb, right);
                let paired: f64 = (0..n).map(|x| self.v[x] * pl[x] * pr[x]).sum();
                self.sums[i] += sharp - paired;
            }
        }
    }

    let integrals = map_seeds(master_seed, n_traj, |_, mut rng| {
        let init = sample_product_measure(RHO, RHO, n, &mut rng).expect("densities");
        let mut engine = Engine::new(*params, init, rng).expect("sizes");
        let mut obs = QuadObserver {
            alpha: pair.0,
            beta: pair.1,
            v,
            kernels: &kernels,
            sums: vec![0.0; kernels.len()],
        };
        {
            let mut list: Vec<&mut dyn TrajectoryObserver> = vec![&mut obs];
            engine.run_to(t, &sample_times, &mut list);
        }
        obs.sums.iter().map(|s| s * t / n_quad as f64).collect::<Vec<f64>>()
    });
    Ok(eps_list
        .iter()
        .enumerate()
        .map(|(i, &eps)| {
            let squares: Vec<f64> = integrals.iter().map(|x| x[i] * x[i]).collect();
            let (lhs, stderr) = stats::mean_with_stderr(&squares);
            BgEstimate { lhs, stderr, bracket: kernel_bracket(params, eps, t, v), n_samples: n_traj }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::rng::single_rng;

    fn cosine_weights(n: usize) -> Vec<f64> {
        (0..n)
            .map(|x| (2.0 * std::f64::consts::PI * x as f64 / n as f64).cos())
            .collect()
    }

    #[test]
    fn incremental_state_matches_recompute() {
        // drive a short trajectory and compare the incrementally-updated
        // sums against a from-scratch recompute
        let params = ModelParams::new(64, 0.0, [1.0, -0.5, 0.25], 4).unwrap();
        let v = cosine_weights(64);
        for pair in [(Species::A, Species::A), (Species::A, Species::B)] {
            let mut rng = single_rng(17);
            let init = sample_product_measure(RHO, RHO, 64, &mut rng).unwrap();
            let mut engine = Engine::new(params, init, rng).unwrap();
            let mut obs =
                BlockResidualObserver::new(&params, pair.0, pair.1, v.clone(), 6).unwrap();
            {
                let mut list: Vec<&mut dyn TrajectoryObserver> = vec![&mut obs];
                engine.run_to(0.02, &[], &mut list);
            }
            let (g_inc, h_inc) = (obs.g_sum, obs.h_sum);
            obs.recompute(engine.config());
            assert!((g_inc - obs.g_sum).abs() < 1e-9, "g drift: {g_inc} vs {}", obs.g_sum);
            assert!((h_inc - obs.h_sum).abs() < 1e-9, "h drift: {h_inc} vs {}", obs.h_sum);
        }
    }

    #[test]
    fn residual_integrand_is_mean_zero_at_equilibrium() {
        // with the Var/L counter-term the integrand averages to zero under
        // the product measure
        let params = ModelParams::new(256, 0.5, [1.0, 1.0, 0.0], 0).unwrap();
        let v = vec![1.0; 256];
        let mut rng = single_rng(23);
        let mut acc = 0.0;
        let trials = 4000;
        for _ in 0..trials {
            let config = sample_product_measure(RHO, RHO, 256, &mut rng).unwrap();
            let mut obs =
                BlockResidualObserver::new(&params, Species::A, Species::A, v.clone(), 8).unwrap();
            obs.recompute(&config);
            acc += obs.g_sum - obs.h_sum + obs.c0;
        }
        let mean = acc / trials as f64;
        // per-draw sd is O(sqrt(N)/L); 3 sigma band
        assert!(mean.abs() < 3.0 * (256.0f64).sqrt() / 8.0 / (trials as f64).sqrt(), "mean {mean}");
    }

    #[test]
    fn smooth_variant_rejects_degenerate_width() {
        let params = ModelParams::new(32, 0.5, [1.0, 1.0, 0.0], 0).unwrap();
        let v = vec![1.0; 32];
        let err = bg_residual_smooth(&params, (Species::A, Species::B), &v, 0.01, 0.1, 2, 8, 1);
        assert!(err.is_err());
    }
}
