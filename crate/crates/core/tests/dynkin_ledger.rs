//! Pathwise validation of the martingale decomposition: the ledger pieces
//! must recompose the field exactly, the fast Fourier accumulator must match
//! the slow reference accumulator, and the compensated process must agree
//! with a brute-force application of the generator.

use num_complex::Complex64;

use abc_ring::dynkin::{FourierDynkin, ReferenceDynkin};
use abc_ring::engine::{Engine, Event, TrajectoryObserver};
use abc_ring::ensemble::map_seeds;
use abc_ring::estimators::stats;
use abc_ring::fields::{normal_field, CenterMode, TestFunction};
use abc_ring::lattice::{Configuration, Species};
use abc_ring::measures::sample_product_measure;
use abc_ring::mode_coupling::{normal_mode_spec, CaseTag, NormalModeSpec};
use abc_ring::params::ModelParams;
use abc_ring::rng::single_rng;

/// Observer computing `int (L_N + d_s) Z_s(f) ds` by brute force: the
/// generator is applied by summing `rate * [Z(swapped) - Z(eta)]` over every
/// bond, and the frame term by accumulating `Z` jumps at floor crossings.
struct BruteCompensator {
    params: ModelParams,
    spec: NormalModeSpec,
    f: TestFunction,
    shift: i64,
    acc: Complex64,
    z0: Complex64,
    samples: Vec<(f64, Complex64)>, // (t, M_t) computed brute force
}

impl BruteCompensator {
    fn new(params: ModelParams, spec: NormalModeSpec, f: TestFunction) -> Self {
        BruteCompensator {
            params,
            spec,
            f,
            shift: 0,
            acc: Complex64::default(),
            z0: Complex64::default(),
            samples: Vec::new(),
        }
    }

    fn z_at(&self, config: &Configuration, shift: i64) -> Complex64 {
        // evaluate the framed field at integer shift
        let tf = self.f.translate(shift as f64, self.params.n());
        self.spec.d1
            * abc_ring::fields::density_field(config, Species::A, &tf, CenterMode::THIRD)
            + self.spec.d2
                * abc_ring::fields::density_field(config, Species::B, &tf, CenterMode::THIRD)
    }

    fn generator_on_field(&self, config: &Configuration, shift: i64) -> Complex64 {
        let n = self.params.n();
        let base = self.z_at(config, shift);
        let mut acc = Complex64::default();
        for y in 0..n {
            let l = config.site(y);
            let r = config.site((y + 1) % n);
            if l == r {
                continue;
            }
            let mut swapped = config.clone();
            swapped.swap_bond(y);
            acc += self.params.swap_rate(l, r) * (self.z_at(&swapped, shift) - base);
        }
        self.params.n_pow_a() * acc
    }
}

impl TrajectoryObserver for BruteCompensator {
    fn begin(&mut self, config: &Configuration, t: f64) {
        let g = self.spec.v * self.params.n_pow_a();
        self.shift = (g * t).floor() as i64;
        self.z0 = self.z_at(config, self.shift);
    }

    fn constant_interval(&mut self, config: &Configuration, t0: f64, t1: f64) {
        let g = self.spec.v * self.params.n_pow_a();
        let m1 = if g == 0.0 { self.shift } else { (g * t1).floor() as i64 };
        let mut cur = t0;
        while self.shift != m1 {
            let step: i64 = if m1 > self.shift { 1 } else { -1 };
            let boundary = (if step > 0 {
                (self.shift + 1) as f64 / g
            } else {
                self.shift as f64 / g
            })
            .clamp(cur, t1);
            self.acc += self.generator_on_field(config, self.shift) * (boundary - cur);
            // frame jump contributes the field increment
            self.acc += self.z_at(config, self.shift + step) - self.z_at(config, self.shift);
            self.shift += step;
            cur = boundary;
        }
        self.acc += self.generator_on_field(config, self.shift) * (t1 - cur);
    }

    fn sample(&mut self, config: &Configuration, t: f64) {
        let m = self.z_at(config, self.shift) - self.z0 - self.acc;
        self.samples.push((t, m));
    }
}

fn run_with_observers(
    params: &ModelParams,
    seed: u64,
    t_max: f64,
    samples: &[f64],
    observers: &mut [&mut dyn TrajectoryObserver],
) {
    let mut rng = single_rng(seed);
    let init = sample_product_measure(1.0 / 3.0, 1.0 / 3.0, params.n(), &mut rng).unwrap();
    let mut engine = Engine::new(*params, init, rng).unwrap();
    engine.run_to(t_max, samples, observers);
}

#[test]
fn fast_ledger_matches_reference_ledger() {
    // moving frame, all coefficient groups active (case III)
    let params = ModelParams::new(24, 0.0, [0.9, -0.4, 0.2], 1).unwrap();
    let (plus, minus) = normal_mode_spec(CaseTag::III, &params).unwrap();
    for (spec, k) in [(plus, 1i64), (minus, 2i64)] {
        let mut fast = FourierDynkin::new(&params, spec, k);
        let mut slow = ReferenceDynkin::new(&params, spec, TestFunction::fourier(k));
        let grid: Vec<f64> = (0..=20).map(|i| i as f64 * 0.002).collect();
        {
            let mut obs: Vec<&mut dyn TrajectoryObserver> = vec![&mut fast, &mut slow];
            run_with_observers(&params, 7, 0.04, &grid, &mut obs);
        }
        let lf = fast.ledger();
        let ls = slow.ledger();
        assert_eq!(lf.rows.len(), ls.rows.len());
        for (a, b) in lf.rows.iter().zip(&ls.rows) {
            assert!((a.z - b.z).norm() < 1e-10, "z: {} vs {}", a.z, b.z);
            assert!((a.i_t - b.i_t).norm() < 1e-9, "i: {} vs {}", a.i_t, b.i_t);
            assert!((a.b_t - b.b_t).norm() < 1e-9, "b: {} vs {}", a.b_t, b.b_t);
            assert!((a.r_t - b.r_t).norm() < 1e-9, "r: {} vs {}", a.r_t, b.r_t);
            assert!((a.m_t - b.m_t).norm() < 1e-9, "m: {} vs {}", a.m_t, b.m_t);
            assert!((a.qv - b.qv).abs() < 1e-9, "qv: {} vs {}", a.qv, b.qv);
        }
    }
}

#[test]
fn ledger_martingale_matches_brute_force_compensator() {
    // M_t must equal Z_t - Z_0 - int (L_N + d_s) Z ds with the generator
    // applied by exhaustive bond sums; this pins every coefficient in the
    // I/B/R split.
    for (field, case) in [
        ([1.0, 1.0, 0.0], CaseTag::I),
        ([0.0, 0.7, 0.7], CaseTag::II),
        ([0.9, -0.4, 0.2], CaseTag::III),
    ] {
        let params = ModelParams::new(12, 0.0, field, 3).unwrap();
        let (plus, minus) = normal_mode_spec(case, &params).unwrap();
        for spec in [plus, minus] {
            for k in [1i64, 3] {
                let mut fast = FourierDynkin::new(&params, spec, k);
                let mut brute = BruteCompensator::new(params, spec, TestFunction::fourier(k));
                let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.005).collect();
                {
                    let mut obs: Vec<&mut dyn TrajectoryObserver> = vec![&mut fast, &mut brute];
                    run_with_observers(&params, 11, 0.05, &grid, &mut obs);
                }
                let ledger = fast.ledger();
                for (row, (tb, mb)) in ledger.rows.iter().zip(&brute.samples) {
                    assert!((row.t - tb).abs() < 1e-14);
                    assert!(
                        (row.m_t - mb).norm() < 1e-9,
                        "case {case:?} {:?} k={k} t={}: ledger M {} vs brute {}",
                        spec.label,
                        row.t,
                        row.m_t,
                        mb
                    );
                }
            }
        }
    }
}

#[test]
fn sampled_test_function_ledger_matches_brute_force() {
    // the reference ledger handles arbitrary real test functions
    let params = ModelParams::new(12, 0.0, [0.9, -0.4, 0.2], 3).unwrap();
    let (_, minus) = normal_mode_spec(CaseTag::III, &params).unwrap();
    let values: Vec<f64> = (0..12)
        .map(|x| (2.0 * std::f64::consts::PI * x as f64 / 12.0).sin() + 0.3)
        .collect();
    let f = TestFunction::sampled(values);
    let mut slow = ReferenceDynkin::new(&params, minus, f.clone());
    let mut brute = BruteCompensator::new(params, minus, f);
    let grid: Vec<f64> = (0..=10).map(|i| i as f64 * 0.005).collect();
    {
        let mut obs: Vec<&mut dyn TrajectoryObserver> = vec![&mut slow, &mut brute];
        run_with_observers(&params, 13, 0.05, &grid, &mut obs);
    }
    for (row, (_, mb)) in slow.rows.iter().zip(&brute.samples) {
        assert!((row.m_t - mb).norm() < 1e-9, "{} vs {}", row.m_t, mb);
    }
}

#[test]
fn bookkeeping_identity_and_incremental_consistency() {
    // Z_t recomputed from the configuration agrees with the incrementally
    // tracked value, and the five pieces recompose exactly
    let params = ModelParams::new(64, 0.5, [1.5, 1.5, 0.0], 5).unwrap();
    let (_, minus) = normal_mode_spec(CaseTag::I, &params).unwrap();
    struct Checker {
        params: ModelParams,
        spec: NormalModeSpec,
        inner: FourierDynkin,
        worst: f64,
    }
    impl TrajectoryObserver for Checker {
        fn begin(&mut self, c: &Configuration, t: f64) {
            self.inner.begin(c, t);
        }
        fn constant_interval(&mut self, c: &Configuration, t0: f64, t1: f64) {
            self.inner.constant_interval(c, t0, t1);
        }
        fn apply_event(&mut self, c: &Configuration, e: &Event) {
            self.inner.apply_event(c, e);
        }
        fn sample(&mut self, c: &Configuration, t: f64) {
            self.inner.sample(c, t);
            let row = *self.inner.rows.last().unwrap();
            let fresh = normal_field(
                c,
                t,
                &self.spec,
                &TestFunction::fourier(1),
                &self.params,
                CenterMode::THIRD,
            );
            self.worst = self.worst.max((row.z - fresh).norm());
        }
    }
    let mut checker =
        Checker { params, spec: minus, inner: FourierDynkin::new(&params, minus, 1), worst: 0.0 };
    let grid: Vec<f64> = (0..=16).map(|i| i as f64 * 0.00125).collect();
    {
        let mut obs: Vec<&mut dyn TrajectoryObserver> = vec![&mut checker];
        run_with_observers(&params, 17, 0.02, &grid, &mut obs);
    }
    assert!(checker.worst < 1e-9, "incremental field drift {}", checker.worst);
    let ledger = checker.inner.ledger();
    assert!(ledger.bookkeeping_residual() < 1e-9);
}

#[test]
fn symmetric_rates_kill_quadratic_and_lower_order_terms() {
    let params = ModelParams::new(32, 0.5, [1.0, 1.0, 1.0], 9).unwrap();
    let (plus, _) = normal_mode_spec(CaseTag::I, &params).unwrap();
    let mut acc = FourierDynkin::new(&params, plus, 2);
    let grid = [0.005, 0.01];
    {
        let mut obs: Vec<&mut dyn TrajectoryObserver> = vec![&mut acc];
        run_with_observers(&params, 23, 0.01, &grid, &mut obs);
    }
    for row in &acc.ledger().rows {
        assert_eq!(row.b_t, Complex64::default());
        assert_eq!(row.r_t, Complex64::default());
    }
}

#[test]
fn martingale_jump_bound_for_ab_swaps() {
    // |Z_s - Z_{s-}| = N^{-1/2} |f(x/N) - f((x+1)/N)| |D2 - D1| for AB swaps,
    // bounded by N^{-3/2} |grad f|_inf |D2 - D1|
    let params = ModelParams::new(48, 0.5, [1.0, 1.0, 0.0], 2).unwrap();
    let (plus, _) = normal_mode_spec(CaseTag::I, &params).unwrap();
    struct JumpCheck {
        inner: FourierDynkin,
        bound: f64,
        checked: usize,
    }
    impl TrajectoryObserver for JumpCheck {
        fn begin(&mut self, c: &Configuration, t: f64) {
            self.inner.begin(c, t);
        }
        fn apply_event(&mut self, c: &Configuration, e: &Event) {
            let jump = self.inner.event_jump(e);
            let ab_swap = (e.left == Species::A && e.right == Species::B)
                || (e.left == Species::B && e.right == Species::A);
            if ab_swap {
                assert!(jump <= self.bound + 1e-14, "jump {jump} exceeds {}", self.bound);
                self.checked += 1;
            }
            self.inner.apply_event(c, e);
        }
    }
    let n = 48f64;
    // |grad e_1|_inf on the lattice: |nu_1| = N |e^{2 pi i/N} - 1|
    let grad_inf = TestFunction::fourier_grad_factor(1, 48).norm();
    let bound = grad_inf * 2.0 / n.powf(1.5); // |D2 - D1| = 2 for the plus mode
    let mut check = JumpCheck { inner: FourierDynkin::new(&params, plus, 1), bound, checked: 0 };
    {
        let mut obs: Vec<&mut dyn TrajectoryObserver> = vec![&mut check];
        run_with_observers(&params, 31, 0.02, &[], &mut obs);
    }
    assert!(check.checked > 50, "too few AB swaps observed: {}", check.checked);
}

#[test]
fn martingale_mean_zero_and_isometry() {
    // E[M_t] = 0 and E[|M_t|^2] = E[<M>_t] within Monte Carlo error
    let params = ModelParams::new(64, 0.5, [1.0, 1.0, 0.0], 4).unwrap();
    let (_, minus) = normal_mode_spec(CaseTag::I, &params).unwrap();
    let t = 0.05;
    let rows = map_seeds(77, 200, |_, mut rng| {
        let init = sample_product_measure(1.0 / 3.0, 1.0 / 3.0, 64, &mut rng).unwrap();
        let mut engine = Engine::new(params, init, rng).unwrap();
        let mut acc = FourierDynkin::new(&params, minus, 1);
        {
            let mut obs: Vec<&mut dyn TrajectoryObserver> = vec![&mut acc];
            engine.run_to(t, &[t], &mut obs);
        }
        let row = acc.ledger().rows[0];
        (row.m_t, row.qv)
    });
    let re: Vec<f64> = rows.iter().map(|(m, _)| m.re).collect();
    let im: Vec<f64> = rows.iter().map(|(m, _)| m.im).collect();
    let m2: Vec<f64> = rows.iter().map(|(m, _)| m.norm_sqr()).collect();
    let qv: Vec<f64> = rows.iter().map(|(_, q)| *q).collect();
    let (re_m, re_se) = stats::mean_with_stderr(&re);
    let (im_m, im_se) = stats::mean_with_stderr(&im);
    assert!(re_m.abs() < 4.0 * re_se, "E[Re M] = {re_m} +- {re_se}");
    assert!(im_m.abs() < 4.0 * im_se, "E[Im M] = {im_m} +- {im_se}");
    let (m2_m, m2_se) = stats::mean_with_stderr(&m2);
    let (qv_m, qv_se) = stats::mean_with_stderr(&qv);
    let se = (m2_se * m2_se + qv_se * qv_se).sqrt();
    assert!(
        (m2_m - qv_m).abs() < 4.0 * se,
        "isometry: E|M|^2 = {m2_m} vs E<M> = {qv_m} (se {se})"
    );
}

#[test]
fn lean_observers_match_full_ledger() {
    use abc_ring::dynkin::{ModeAmplitudeSampler, QvAccumulator};
    let params = ModelParams::new(48, 0.5, [1.0, 1.0, 0.0], 5).unwrap();
    let (plus, _) = normal_mode_spec(CaseTag::I, &params).unwrap();
    let mut full = FourierDynkin::new(&params, plus, 1);
    let mut lean_qv = QvAccumulator::new(&params, &plus, 1);
    let mut lean_amp = ModeAmplitudeSampler::new(&params, plus, 1);
    let grid: Vec<f64> = (1..=8).map(|i| i as f64 * 0.005).collect();
    {
        let mut obs: Vec<&mut dyn TrajectoryObserver> =
            vec![&mut full, &mut lean_qv, &mut lean_amp];
        run_with_observers(&params, 19, 0.04, &grid, &mut obs);
    }
    let ledger = full.ledger();
    for ((row, (tq, qv)), (ta, z)) in
        ledger.rows.iter().zip(&lean_qv.rows).zip(&lean_amp.samples)
    {
        assert_eq!(row.t, *tq);
        assert_eq!(row.t, *ta);
        assert!((row.qv - qv).abs() < 1e-10, "{} vs {qv}", row.qv);
        assert!((row.z - z).norm() < 1e-10, "{} vs {z}", row.z);
    }
}
