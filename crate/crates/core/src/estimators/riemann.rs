//! Oscillatory time integrals of piecewise-constant processes against
//! floored travelling phases, integrated exactly:
//! `| int_0^t prod_i A_i(s) exp(-2 pi i k_i floor(v_i s)/N) ds |`.

use num_complex::Complex64;

use crate::error::{Error, Result};

/// Right-continuous step process: `values[i]` on `[times[i], times[i+1])`,
/// the last value extending to infinity. `times[0]` must be `0`.
#[derive(Debug, Clone)]
pub struct StepProcess {
    pub times: Vec<f64>,
    pub values: Vec<f64>,
}

impl StepProcess {
    pub fn constant(v: f64) -> StepProcess {
        StepProcess { times: vec![0.0], values: vec![v] }
    }

    /// Piecewise-constant scaled random-walk bridge on `[0, horizon]`:
    /// `steps` increments of size `sqrt(horizon/steps)`, pinned to zero at
    /// both ends. Its increments scale like `(t - s)^{1/2}`.
    pub fn random_walk_bridge<R: rand::Rng>(
        horizon: f64,
        steps: usize,
        rng: &mut R,
    ) -> StepProcess {
        let dt = horizon / steps as f64;
        let scale = dt.sqrt();
        let mut walk = Vec::with_capacity(steps + 1);
        let mut acc = 0.0;
        walk.push(0.0);
        for _ in 0..steps {
            acc += if rng.gen::<bool>() { scale } else { -scale };
            walk.push(acc);
        }
        let last = *walk.last().unwrap();
        let times = (0..=steps).map(|i| i as f64 * dt).collect();
        let values = walk
            .iter()
            .enumerate()
            .map(|(i, w)| w - last * i as f64 / steps as f64)
            .collect();
        StepProcess { times, values }
    }

    fn value_at(&self, t: f64) -> f64 {
        match self.times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => self.values[i],
            Err(0) => self.values[0],
            Err(i) => self.values[i - 1],
        }
    }

    /// Empirical sup and a mean increment over a uniform probe grid
    /// (diagnostics for the moment-bound hypotheses).
    pub fn sup_and_mean_increment(&self, t: f64, probes: usize) -> (f64, f64) {
        let mut sup: f64 = 0.0;
        let mut inc = 0.0;
        let mut prev = self.value_at(0.0);
        for i in 1..=probes {
            let v = self.value_at(t * i as f64 / probes as f64);
            sup = sup.max(v.abs());
            inc += (v - prev).abs();
            prev = v;
        }
        (sup, inc / probes as f64)
    }
}

/// Exact value of
/// `| int_0^t prod_i A_i(s) exp(-2 pi i sum_i k_i floor(v_i s)/N) ds |`.
/// The integrand is constant between process jumps and phase-floor
/// crossings, so the integral is a finite sum over merged breakpoints.
pub fn oscillatory_integral(
    processes: &[&StepProcess],
    ks: &[i64],
    vs: &[f64],
    n: usize,
    t: f64,
) -> Result<f64> {
    if processes.len() != ks.len() || ks.len() != vs.len() {
        return Err(Error::BadEstimatorInput("mismatched process/k/v lists".into()));
    }
    let mut cuts: Vec<f64> = vec![0.0, t];
    for p in processes {
        cuts.extend(p.times.iter().copied().filter(|&s| s > 0.0 && s < t));
    }
    for (&v, &k) in vs.iter().zip(ks) {
        if k == 0 || v == 0.0 {
            continue;
        }
        // crossing times of floor(v s): s = j / v
        let lo = (v * 0.0).min(v * t);
        let hi = (v * 0.0).max(v * t);
        let mut j = lo.ceil() as i64;
        while (j as f64) < hi {
            let s = j as f64 / v;
            if s > 0.0 && s < t {
                cuts.push(s);
            }
            j += 1;
        }
    }
    cuts.sort_by(|a, b| a.partial_cmp(b).unwrap());
    cuts.dedup();
    let mut acc = Complex64::default();
    for w in cuts.windows(2) {
        let (a, b) = (w[0], w[1]);
        let dt = b - a;
        if dt <= 0.0 {
            continue;
        }
        let mut term = Complex64::new(dt, 0.0);
        let mut phase_num = 0i64;
        for i in 0..processes.len() {
            term *= processes[i].value_at(a);
            phase_num += ks[i] * (vs[i] * a).floor() as i64;
        }
        let angle = -2.0 * std::f64::consts::PI * (phase_num.rem_euclid(n as i64)) as f64 / n as f64;
        acc += term * Complex64::from_polar(1.0, angle);
    }
    Ok(acc.norm())
}

/// Decay table over ring sizes for given processes-by-size.
pub fn riemann_decay_table<F>(
    n_list: &[usize],
    ks: &[i64],
    velocity: F,
    t: f64,
    make_processes: impl Fn(usize) -> Vec<StepProcess>,
) -> Result<Vec<(usize, f64)>>
where
    F: Fn(usize) -> f64,
{
    let mut rows = Vec::new();
    for &n in n_list {
        let procs = make_processes(n);
        let refs: Vec<&StepProcess> = procs.iter().collect();
        let vs = vec![velocity(n); refs.len()];
        rows.push((n, oscillatory_integral(&refs, ks, &vs, n, t)?));
    }
    Ok(rows)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn constant_process_phase_bound() {
        // single constant process, v = N^{3/2}: magnitude within the
        // geometric bound ~ N/(pi k N^{3/2})
        for n in [256usize, 1024, 4096] {
            let p = StepProcess::constant(1.0);
            let v = (n as f64).powf(1.5);
            let val = oscillatory_integral(&[&p], &[1], &[v], n, 0.5).unwrap();
            let bound = 1.2 * n as f64 / (std::f64::consts::PI * v);
            assert!(val < bound, "n={n}: {val} vs {bound}");
        }
    }

    #[test]
    fn zero_mode_never_decays() {
        let p = StepProcess::constant(1.0);
        let val =
            oscillatory_integral(&[&p], &[0], &[(4096f64).powf(1.5)], 4096, 0.5).unwrap();
        assert!((val - 0.5).abs() < 1e-12);
    }

    #[test]
    fn matches_brute_force_quadrature() {
        let mut rng = crate::rng::single_rng(12);
        let p1 = StepProcess::random_walk_bridge(0.3, 64, &mut rng);
        let p2 = StepProcess::random_walk_bridge(0.3, 32, &mut rng);
        let n = 64;
        let vs = [37.0, -21.0];
        let ks = [2i64, 3];
        let exact =
            oscillatory_integral(&[&p1, &p2], &ks, &vs, n, 0.3).unwrap();
        // fine Riemann sum as an independent check
        let m = 400_000;
        let mut acc = Complex64::default();
        for i in 0..m {
            let s = 0.3 * (i as f64 + 0.5) / m as f64;
            let phase = ks[0] * (vs[0] * s).floor() as i64 + ks[1] * (vs[1] * s).floor() as i64;
            let angle = -2.0 * std::f64::consts::PI * phase.rem_euclid(n as i64) as f64 / n as f64;
            acc += p1.value_at(s) * p2.value_at(s) * Complex64::from_polar(1.0, angle) * (0.3 / m as f64);
        }
        assert!((exact - acc.norm()).abs() < 2e-4, "{exact} vs {}", acc.norm());
    }
}
