//! The regularized quadratic (energy) process of a normal-mode field:
//! `B^eps_t(phi) = int_0^t (1/N) sum_z grad phi(z/N) Z_s(left indicator at
//! (z+m)/N) Z_s(right indicator at (z+m)/N) ds` in the mode's co-moving
//! frame, and the Cauchy gap between two regularization widths.

use crate::engine::{Engine, Event, TrajectoryObserver};
use crate::ensemble::map_seeds;
use crate::error::{Error, Result};
use crate::estimators::stats;
use crate::lattice::{Configuration, Species};
use crate::measures::sample_product_measure;
use crate::mode_coupling::NormalModeSpec;
use crate::params::ModelParams;

/// One-sided indicator pairings of the mode field maintained per site:
/// `P_left(y) = sqrt(N)/(eps N) sum_{j=1..L} w(y-j)`, `w = D1 a + D2 b`.
struct EnergyObserver {
    n: usize,
    l: usize,
    d1: f64,
    d2: f64,
    inv_eps_sqrt_n: f64, // 1/(eps sqrt(N)), the pairing scale
    grad_phi: Vec<f64>,
    p_left: Vec<f64>,
    p_right: Vec<f64>,
    frame_speed: f64,
    shift: i64,
    sum_cur: f64, // sum_z grad phi(z) P_left(z+m) P_right(z+m)
    acc: f64,
}

impl EnergyObserver {
    fn new(
        params: &ModelParams,
        spec: &NormalModeSpec,
        grad_phi: Vec<f64>,
        eps: f64,
    ) -> Result<EnergyObserver> {
        let n = params.n();
        let l = (eps * n as f64).floor();
        if l < 1.0 {
            return Err(Error::EmptyKernel(l));
        }
        if (l as usize) * 2 >= n {
            return Err(Error::BlockTooWide { width: l as usize, n });
        }
        Ok(EnergyObserver {
            n,
            l: l as usize,
            d1: spec.d1,
            d2: spec.d2,
            inv_eps_sqrt_n: 1.0 / (eps * (n as f64).sqrt()),
            grad_phi,
            p_left: vec![0.0; n],
            p_right: vec![0.0; n],
            frame_speed: spec.v * params.n_pow_a(),
            shift: 0,
            sum_cur: 0.0,
            acc: 0.0,
        })
    }

    #[inline]
    fn weight(&self, s: Species) -> f64 {
        match s {
            Species::A => self.d1 * (1.0 - 1.0 / 3.0) - 1.0 / 3.0 * self.d2,
            Species::B => self.d2 * (1.0 - 1.0 / 3.0) - 1.0 / 3.0 * self.d1,
            Species::C => -(self.d1 + self.d2) / 3.0,
        }
    }

    fn recompute(&mut self, config: &Configuration) {
        let n = self.n;
        for y in 0..n {
            let mut left = 0.0;
            let mut right = 0.0;
            for j in 1..=self.l {
                left += self.weight(config.site((y + n - j) % n));
                right += self.weight(config.site((y + j) % n));
            }
            self.p_left[y] = left * self.inv_eps_sqrt_n;
            self.p_right[y] = right * self.inv_eps_sqrt_n;
        }
        self.recompute_sum();
    }

    fn recompute_sum(&mut self) {
        let n = self.n;
        let m = self.shift.rem_euclid(n as i64) as usize;
        self.sum_cur = (0..n)
            .map(|z| {
                let y = (z + m) % n;
                self.grad_phi[z] * self.p_left[y] * self.p_right[y]
            })
            .sum();
    }

    fn site_change(&mut self, z: usize, delta_w: f64) {
        let n = self.n;
        let m = self.shift.rem_euclid(n as i64) as usize;
        let d = delta_w * self.inv_eps_sqrt_n;
        // z lies in the left window of y = z+1..z+L and the right window of
        // y = z-L..z-1
        let step_up = |v: usize| if v + 1 == n { 0 } else { v + 1 };
        let step_dn = |v: usize| if v == 0 { n - 1 } else { v - 1 };
        let mut y_left = z;
        let mut y_right = z;
        for _ in 1..=self.l {
            y_left = step_up(y_left);
            let zq = if y_left >= m { y_left - m } else { y_left + n - m };
            self.sum_cur += self.grad_phi[zq] * d * self.p_right[y_left];
            self.p_left[y_left] += d;

            y_right = step_dn(y_right);
            let zq = if y_right >= m { y_right - m } else { y_right + n - m };
            self.sum_cur += self.grad_phi[zq] * self.p_left[y_right] * d;
            self.p_right[y_right] += d;
        }
    }
}

impl TrajectoryObserver for EnergyObserver {
    fn begin(&mut self, config: &Configuration, t: f64) {
        self.shift = (self.frame_speed * t).floor() as i64;
        self.recompute(config);
    }

    fn constant_interval(&mut self, _config: &Configuration, t0: f64, t1: f64) {
        let g = self.frame_speed;
        if g == 0.0 {
            self.acc += self.sum_cur / self.n as f64 * (t1 - t0);
            return;
        }
        let m1 = (g * t1).floor() as i64;
        let mut cur = t0;
        while self.shift != m1 {
            let step: i64 = if m1 > self.shift { 1 } else { -1 };
            let boundary = (if step > 0 {
                (self.shift + 1) as f64 / g
            } else {
                self.shift as f64 / g
            })
            .clamp(cur, t1);
            self.acc += self.sum_cur / self.n as f64 * (boundary - cur);
            self.shift += step;
            self.recompute_sum();
            cur = boundary;
        }
        self.acc += self.sum_cur / self.n as f64 * (t1 - cur);
    }

    fn apply_event(&mut self, _config: &Configuration, ev: &Event) {
        if ev.left == ev.right {
            return;
        }
        let x = ev.bond;
        let x1 = (x + 1) % self.n;
        let dw = self.weight(ev.right) - self.weight(ev.left);
        self.site_change(x, dw);
        self.site_change(x1, -dw);
    }
}

/// Cauchy-gap estimate between regularizations `eps` and `delta <= eps`:
/// `E[(B^eps_t - B^delta_t)^2]` and its ratio to `eps * t * |grad phi|^2`.
#[derive(Debug, Clone, Copy)]
pub struct EnergyGap {
    pub gap: f64,
    pub gap_stderr: f64,
    pub ratio: f64,
    pub b_eps_mean: f64,
    pub n_samples: usize,
}

pub fn energy_increment_gap(
    params: &ModelParams,
    spec: &NormalModeSpec,
    grad_phi: &[f64],
    eps: f64,
    delta: f64,
    t: f64,
    n_traj: usize,
    master_seed: u64,
) -> Result<EnergyGap> {
    if !(delta > 0.0 && delta <= eps) {
        return Err(Error::BadEstimatorInput(format!(
            "need 0 < delta <= eps, got delta={delta}, eps={eps}"
        )));
    }
    let n = params.n();
    if grad_phi.len() != n {
        return Err(Error::BadEstimatorInput("grad phi length != N".into()));
    }
    let pairs = map_seeds(master_seed, n_traj, |_, mut rng| {
        let init = sample_product_measure(1.0 / 3.0, 1.0 / 3.0, n, &mut rng).expect("densities");
        let mut engine = Engine::new(*params, init, rng).expect("sizes");
        let mut obs_eps = EnergyObserver::new(params, spec, grad_phi.to_vec(), eps).expect("eps");
        let mut obs_del = EnergyObserver::new(params, spec, grad_phi.to_vec(), delta).expect("delta");
        {
            let mut list: Vec<&mut dyn TrajectoryObserver> = vec![&mut obs_eps, &mut obs_del];
            engine.run_to(t, &[], &mut list);
        }
        (obs_eps.acc, obs_del.acc)
    });
    let gaps: Vec<f64> = pairs.iter().map(|(a, b)| (a - b) * (a - b)).collect();
    let b_eps: Vec<f64> = pairs.iter().map(|(a, _)| *a).collect();
    let (gap, gap_stderr) = stats::mean_with_stderr(&gaps);
    let grad_norm2 = grad_phi.iter().map(|g| g * g).sum::<f64>() / n as f64;
    Ok(EnergyGap {
        gap,
        gap_stderr,
        ratio: gap / (eps * t * grad_norm2),
        b_eps_mean: stats::mean(&b_eps),
        n_samples: n_traj,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mode_coupling::{normal_mode_spec, CaseTag};

    fn grad_cos(n: usize) -> Vec<f64> {
        // exact discrete gradient of cos(2 pi u)
        (0..n)
            .map(|x| {
                let f0 = (2.0 * std::f64::consts::PI * x as f64 / n as f64).cos();
                let f1 = (2.0 * std::f64::consts::PI * (x + 1) as f64 / n as f64).cos();
                n as f64 * (f1 - f0)
            })
            .collect()
    }

    #[test]
    fn equal_widths_give_zero_gap() {
        let p = ModelParams::new(64, 0.5, [1.0, 1.0, 0.0], 0).unwrap();
        let (_, minus) = normal_mode_spec(CaseTag::I, &p).unwrap();
        let g = energy_increment_gap(&p, &minus, &grad_cos(64), 0.125, 0.125, 0.02, 4, 3).unwrap();
        assert_eq!(g.gap, 0.0);
    }

    #[test]
    fn incremental_pairings_match_recompute() {
        let p = ModelParams::new(48, 0.5, [2.0, 2.0, 0.0], 0).unwrap();
        let (_, minus) = normal_mode_spec(CaseTag::I, &p).unwrap();
        let mut rng = crate::rng::single_rng(6);
        let init = sample_product_measure(1.0 / 3.0, 1.0 / 3.0, 48, &mut rng).unwrap();
        let mut engine = Engine::new(p, init, rng).unwrap();
        let mut obs = EnergyObserver::new(&p, &minus, grad_cos(48), 0.25).unwrap();
        {
            let mut list: Vec<&mut dyn TrajectoryObserver> = vec![&mut obs];
            engine.run_to(0.02, &[], &mut list);
        }
        let sum_inc = obs.sum_cur;
        obs.recompute(engine.config());
        assert!((sum_inc - obs.sum_cur).abs() < 1e-9, "{sum_inc} vs {}", obs.sum_cur);
    }

    #[test]
    fn symmetric_dynamics_centres_at_zero() {
        // disjoint left/right windows of centred variables have mean-zero
        // product under the product measure
        let p = ModelParams::new(128, 0.5, [0.0, 0.0, 0.0], 0).unwrap();
        let (_, minus) = normal_mode_spec(CaseTag::I, &p).unwrap();
        let g = energy_increment_gap(&p, &minus, &grad_cos(128), 0.125, 0.0625, 0.05, 48, 9).unwrap();
        let scale = 0.05; // crude scale of one B sample
        assert!(g.b_eps_mean.abs() < scale, "mean {}", g.b_eps_mean);
    }
}
