//! Dynamics-level checks: the event engine against the explicit rate
//! matrix, invariance of the product and canonical measures, adjoint
//! dynamics under reversed rates, and total-event-rate concentration.

use std::collections::HashMap;

use abc_ring::engine::{simulate, Engine, Event, TrajectoryObserver};
use abc_ring::ensemble::map_seeds;
use abc_ring::estimators::stats;
use abc_ring::lattice::{Configuration, Species};
use abc_ring::measures::{sample_canonical, sample_product_measure};
use abc_ring::params::ModelParams;
use abc_ring::rng::single_rng;

fn config_code(c: &Configuration) -> usize {
    c.sites().iter().rev().fold(0, |acc, &s| acc * 3 + s as usize)
}

fn config_from_code(mut code: usize, n: usize) -> Configuration {
    let sites = (0..n)
        .map(|_| {
            let s = Species::from_index(code % 3);
            code /= 3;
            s
        })
        .collect();
    Configuration::new(sites).unwrap()
}

/// Transition kernel `P(t)` row by uniformization from the explicitly
/// constructed 3^N x 3^N rate matrix.
fn uniformized_row(params: &ModelParams, from: &Configuration, t: f64) -> Vec<f64> {
    let n = params.n();
    let states = 3usize.pow(n as u32);
    let na = params.n_pow_a();
    // generator rows: transitions by single bond swaps
    let mut rates: Vec<Vec<(usize, f64)>> = Vec::with_capacity(states);
    let mut out_rate = vec![0.0; states];
    for code in 0..states {
        let c = config_from_code(code, n);
        let mut row = Vec::new();
        for x in 0..n {
            let l = c.site(x);
            let r = c.site((x + 1) % n);
            if l == r {
                continue;
            }
            let mut s = c.clone();
            s.swap_bond(x);
            let rate = na * params.swap_rate(l, r);
            row.push((config_code(&s), rate));
            out_rate[code] += rate;
        }
        rates.push(row);
    }
    let lambda = out_rate.iter().cloned().fold(0.0f64, f64::max) * 1.05;
    // P(t) e_from via the uniformized series sum_k e^{-lt} (lt)^k/k! U^k
    let mut dist = vec![0.0; states];
    dist[config_code(from)] = 1.0;
    let mut result = vec![0.0; states];
    let lt = lambda * t;
    let mut weight = (-lt).exp();
    let terms = (lt + 8.0 * lt.sqrt() + 40.0) as usize;
    for k in 0..=terms {
        for (s, &p) in dist.iter().enumerate() {
            result[s] += weight * p;
        }
        // dist <- U dist with U = I + Q/lambda
        let mut next = vec![0.0; states];
        for (s, &p) in dist.iter().enumerate() {
            if p == 0.0 {
                continue;
            }
            next[s] += p * (1.0 - out_rate[s] / lambda);
            for &(s2, r) in &rates[s] {
                next[s2] += p * r / lambda;
            }
        }
        dist = next;
        weight *= lt / (k + 1) as f64;
    }
    result
}

#[test]
fn engine_matches_explicit_rate_matrix() {
    // N = 4: empirical distribution after a short horizon vs the
    // uniformized 81-state kernel, in total variation
    let params = ModelParams::new(4, 0.0, [1.0, -0.5, 0.25], 0).unwrap();
    let init = Configuration::new(vec![Species::A, Species::B, Species::C, Species::A]).unwrap();
    let t = 0.02; // mean ~5 events at N^a = 16
    let want = uniformized_row(&params, &init, t);
    let trials = 200_000;
    let counts = map_seeds(41, trials, |_, rng| {
        let mut engine = Engine::new(params, init.clone(), rng).unwrap();
        engine.run_to(t, &[], &mut []);
        config_code(engine.config())
    });
    let mut hist = vec![0u64; 81];
    for c in counts {
        hist[c] += 1;
    }
    let tv: f64 = hist
        .iter()
        .zip(&want)
        .map(|(&h, &p)| (h as f64 / trials as f64 - p).abs())
        .sum::<f64>()
        / 2.0;
    assert!(tv < 0.015, "total variation distance {tv}");
}

#[test]
fn event_count_concentrates_at_mean_total_rate() {
    // N = 64, symmetric rates, t = 1: counts near N^2 * (2N/3) * t within
    // 5 sigma over 100 runs
    let n = 64usize;
    let params = ModelParams::new(n, 1.0, [0.0, 0.0, 0.0], 0).unwrap();
    let counts = map_seeds(55, 100, |_, mut rng| {
        let init = sample_product_measure(1.0 / 3.0, 1.0 / 3.0, n, &mut rng).unwrap();
        let mut engine = Engine::new(params, init, rng).unwrap();
        engine.run_to(1.0, &[], &mut []);
        engine.events_executed() as f64
    });
    let want = (n * n) as f64 * (2.0 * n as f64 / 3.0);
    let (mean, se) = stats::mean_with_stderr(&counts);
    assert!(
        (mean - want).abs() < 5.0 * se,
        "events {mean} +- {se} vs predicted {want}"
    );
}

#[test]
fn product_measure_marginals_stay_uniform() {
    // quick stationarity check: single-site marginal at a fixed macroscopic
    // time stays (1/3, 1/3, 1/3) within pooled binomial bands
    let n = 64usize;
    let params = ModelParams::new(n, 0.5, [1.0, 0.25, -0.5], 0).unwrap();
    let finals = map_seeds(61, 200, |_, mut rng| {
        let init = sample_product_measure(1.0 / 3.0, 1.0 / 3.0, n, &mut rng).unwrap();
        let mut engine = Engine::new(params, init, rng).unwrap();
        engine.run_to(0.05, &[], &mut []);
        engine.config().counts()
    });
    let total: usize = finals.iter().map(|c| c[0] + c[1] + c[2]).sum();
    for species in 0..3 {
        let hits: usize = finals.iter().map(|c| c[species]).sum();
        let p = hits as f64 / total as f64;
        let band = 3.0 * (2.0 / 9.0 / total as f64).sqrt();
        assert!((p - 1.0 / 3.0).abs() < band, "species {species}: {p}");
    }
}

#[test]
fn canonical_measure_is_stationary_quick() {
    // N = 6, counts (2,2,2): after evolving each uniform sample, the state
    // distribution over the 90 arrangements passes a chi-square test
    let n = 6usize;
    let params = ModelParams::new(n, 0.0, [1.2, -0.3, 0.4], 0).unwrap();
    let trials = 30_000usize;
    let finals = map_seeds(71, trials, |_, mut rng| {
        let init = sample_canonical(2, 2, 2, n, &mut rng).unwrap();
        let mut engine = Engine::new(params, init, rng).unwrap();
        engine.run_to(0.3, &[], &mut []);
        config_code(engine.config())
    });
    let mut hist: HashMap<usize, u64> = HashMap::new();
    for f in finals {
        *hist.entry(f).or_insert(0) += 1;
    }
    assert_eq!(hist.len(), 90);
    let counts: Vec<u64> = hist.values().copied().collect();
    let stat = stats::chi_square_uniform_statistic(&counts);
    let threshold = stats::chi_square_quantile(89, 0.99);
    assert!(stat < threshold, "chi2 = {stat} vs threshold {threshold}");
}

/// Net rightward transport of A particles per unit time.
fn mean_a_drift(params: &ModelParams, seed: u64) -> (f64, f64) {
    struct FluxCounter {
        net: i64,
    }
    impl TrajectoryObserver for FluxCounter {
        fn apply_event(&mut self, _c: &Configuration, ev: &Event) {
            if ev.left == Species::A && ev.right != Species::A {
                self.net += 1;
            } else if ev.right == Species::A && ev.left != Species::A {
                self.net -= 1;
            }
        }
    }
    let n = params.n();
    let drifts = map_seeds(seed, 64, |_, mut rng| {
        let init = sample_product_measure(1.0 / 3.0, 1.0 / 3.0, n, &mut rng).unwrap();
        let mut engine = Engine::new(*params, init, rng).unwrap();
        let mut flux = FluxCounter { net: 0 };
        {
            let mut obs: Vec<&mut dyn TrajectoryObserver> = vec![&mut flux];
            engine.run_to(0.05, &[], &mut obs);
        }
        flux.net as f64 / 0.05
    });
    stats::mean_with_stderr(&drifts)
}

#[test]
fn reversed_rates_realize_the_adjoint_dynamics() {
    // swapping every ordered rate pair negates the mean species drift;
    // with symmetric rates the two engines have identical rate tables
    let params = ModelParams::new(32, 0.0, [1.0, 0.0, 0.0], 0).unwrap();
    let (fwd, fwd_se) = mean_a_drift(&params, 81);
    let (rev, rev_se) = mean_a_drift(&params.reversed(), 82);
    assert!(fwd > 4.0 * fwd_se, "forward drift not positive: {fwd} +- {fwd_se}");
    let se = (fwd_se * fwd_se + rev_se * rev_se).sqrt();
    assert!((fwd + rev).abs() < 4.0 * se, "{fwd} vs {rev}");
}

#[test]
fn simulate_records_replayable_history() {
    let params = ModelParams::new(24, 0.5, [0.8, -0.2, 0.1], 12).unwrap();
    let mut rng = single_rng(3);
    let init = sample_product_measure(1.0 / 3.0, 1.0 / 3.0, 24, &mut rng).unwrap();
    let (log, fin) = simulate(&params, init.clone(), 0.05, &[], &mut []).unwrap();
    assert!(log.times_strictly_increasing());
    assert_eq!(log.replay(&init), fin);
    assert_eq!(log.elapsed, 0.05);
}

#[test]
fn time_averaged_current_matches_closed_form() {
    // net species-A transport per macroscopic unit time over the whole ring
    // equals N^a * N * E[j^A], with E[j^A] from the closed-form drift
    use abc_ring::mode_coupling::{average_current, DensityPoint};
    struct NetFlux(i64);
    impl TrajectoryObserver for NetFlux {
        fn apply_event(&mut self, _c: &Configuration, ev: &Event) {
            if ev.left == Species::A && ev.right != Species::A {
                self.0 += 1;
            } else if ev.right == Species::A && ev.left != Species::A {
                self.0 -= 1;
            }
        }
    }
    let n = 512usize;
    let t = 0.002;
    let params = ModelParams::new(n, 0.0, [1.0, 0.5, 0.0], 0).unwrap();
    let fluxes = map_seeds(91, 48, |_, mut rng| {
        let init = sample_product_measure(1.0 / 3.0, 1.0 / 3.0, n, &mut rng).unwrap();
        let mut engine = Engine::new(params, init, rng).unwrap();
        let mut flux = NetFlux(0);
        {
            let mut obs: Vec<&mut dyn TrajectoryObserver> = vec![&mut flux];
            engine.run_to(t, &[], &mut obs);
        }
        flux.0 as f64 / t
    });
    let (mean, se) = stats::mean_with_stderr(&fluxes);
    let j = average_current(DensityPoint::equal_thirds(), &params);
    let want = params.n_pow_a() * n as f64 * j[0];
    assert!(
        (mean - want).abs() < 3.0 * se,
        "net A flux {mean} +- {se} vs closed form {want}"
    );
}
