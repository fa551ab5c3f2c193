//! Exact pathwise decomposition of a moving-frame normal-mode field into
//! Laplacian, quadratic, lower-order and martingale pieces,
//! `Z_t - Z_0 = I_t + B_t - R_t + M_t`,
//! accumulated in closed form over the event stream: between swaps the
//! configuration is constant and the frame shift `floor(v N^a s)` is
//! piecewise constant, so every time integral is a finite sum.
//!
//! The decomposition is written in the variables `xi - 1/3`:
//!
//! * `I_t = N^{a-2} int Z_s(lap f) ds`
//! * `B_t = N^{a-3/2-gamma} int sum_x grad T f(x/N) [ D1(E_C-E_A) a_x a_{x+1}
//!   + D2(E_C-E_B) b_x b_{x+1} - ((D1(E_B-E_C)+D2(E_A-E_C))/2)(a_x b_{x+1} +
//!   b_x a_{x+1}) ] ds` with `a = xi^A - 1/3`, `b = xi^B - 1/3`
//! * `R_t = -(Lin_t + Frame_t)` collects the one-site terms
//!   `Lin_t = v N^{a-1} int Z_s(grad f) ds - (v N^{a-2}/2) int Z_s(lap f) ds`
//!   and the frame-shift jumps `Frame_t = sum [Z(shift+1) - Z(shift)]`
//! * `M_t` is the remaining compensated-jump martingale; its running
//!   quadratic variation integrates
//!   `N^{a-3} sum_x c_x |grad T f(x/N)|^2 (w_{x+1} - w_x)^2` with
//!   `w = D1 xi^A + D2 xi^B`.
//!
//! `M_t` jumps only at swaps (frame jumps cancel between `Z` and `R`), with
//! `|M_s - M_{s-}| = N^{-1/2} |f(x/N) - f((x+1)/N)| |D_swap|`.

use num_complex::Complex64;

use crate::engine::{Event, TrajectoryObserver};
use crate::fields::TestFunction;
use crate::lattice::{Configuration, Species};
use crate::mode_coupling::NormalModeSpec;
use crate::params::ModelParams;

/// Ledger values at one sampling time.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LedgerRow {
    pub t: f64,
    pub z: Complex64,
    pub i_t: Complex64,
    pub b_t: Complex64,
    pub r_t: Complex64,
    pub m_t: Complex64,
    /// Running quadratic variation of `M`.
    pub qv: f64,
}

/// Sampled decomposition of one mode/test-function pair along a trajectory.
#[derive(Debug, Clone)]
pub struct DynkinLedger {
    pub spec: NormalModeSpec,
    pub rows: Vec<LedgerRow>,
}

impl DynkinLedger {
    /// Max over rows of `|Z_t - Z_0 - I - B + R - M|` (identity residual;
    /// zero by construction up to float accumulation).
    pub fn bookkeeping_residual(&self) -> f64 {
        let z0 = self.rows.first().map(|r| r.z).unwrap_or_default();
        self.rows
            .iter()
            .map(|r| (r.z - z0 - r.i_t - r.b_t + r.r_t - r.m_t).norm())
            .fold(0.0, f64::max)
    }
}

struct Coefficients {
    d1: f64,
    d2: f64,
    /// frame speed in sites per macroscopic time, `v N^a`
    frame_speed: f64,
    /// quadratic coefficients (field differences over `N^gamma`)
    q_aa: f64,
    q_bb: f64,
    q_x: f64,
    pre_i: f64,   // N^{a-2}
    pre_b: f64,   // N^{a-3/2}
    pre_qv: f64,  // N^{a-3}
    lin_grad: f64, // v N^{a-1}
    lin_lap: f64,  // v N^{a-2} / 2
    inv_sqrt_n: f64,
}

impl Coefficients {
    fn new(params: &ModelParams, spec: &NormalModeSpec) -> Coefficients {
        let n = params.n() as f64;
        let a = params.a();
        let ng = params.n_pow_gamma();
        let e = params.field();
        let (d1, d2) = (spec.d1, spec.d2);
        Coefficients {
            d1,
            d2,
            frame_speed: spec.v * params.n_pow_a(),
            q_aa: d1 * (e[2] - e[0]) / ng,
            q_bb: d2 * (e[2] - e[1]) / ng,
            q_x: -(d1 * (e[1] - e[2]) + d2 * (e[0] - e[2])) / (2.0 * ng),
            pre_i: n.powf(a - 2.0),
            pre_b: n.powf(a - 1.5),
            pre_qv: n.powf(a - 3.0),
            lin_grad: spec.v * n.powf(a - 1.0),
            lin_lap: spec.v * n.powf(a - 2.0) / 2.0,
            inv_sqrt_n: 1.0 / n.sqrt(),
        }
    }

    #[inline]
    fn weight(&self, s: Species) -> f64 {
        match s {
            Species::A => self.d1,
            Species::B => self.d2,
            Species::C => 0.0,
        }
    }
}

#[inline]
fn centred(occ: bool) -> f64 {
    if occ {
        2.0 / 3.0
    } else {
        -1.0 / 3.0
    }
}

/// Exact ledger for a Fourier test function `e_k`, O(1) work per event.
pub struct FourierDynkin {
    n: usize,
    k: i64,
    spec: NormalModeSpec,
    co: Coefficients,
    rate_table: [[f64; 3]; 3],
    /// `omega^j = e_1(j/N)` lookup (phase factors)
    omega: Vec<Complex64>,
    /// `e_k(x/N)` per site
    mode_tab: Vec<Complex64>,
    nu: Complex64,
    mu: f64,
    // lattice sums in the static frame
    s_mode: Complex64,   // sum_x w_x e_k(x/N), w centred at 1/3
    prod_aa: Complex64,  // sum_x e_k(x/N) a_x a_{x+1}
    prod_bb: Complex64,
    prod_x: Complex64,   // sum_x e_k(x/N) (a_x b_{x+1} + b_x a_{x+1})
    u_qv: f64,           // sum_x c_x (w_{x+1} - w_x)^2
    // frame state
    shift: i64,
    // accumulators
    i_acc: Complex64,
    b_acc: Complex64,
    lin_acc: Complex64,
    frame_acc: Complex64,
    qv_acc: f64,
    z0: Complex64,
    t_cur: f64,
    events_since_resync: u64,
    pub rows: Vec<LedgerRow>,
}

const RESYNC_PERIOD: u64 = 1 << 20;

impl FourierDynkin {
    pub fn new(params: &ModelParams, spec: NormalModeSpec, k: i64) -> FourierDynkin {
        let n = params.n();
        let omega: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64))
            .collect();
        let mode_tab = (0..n)
            .map(|x| omega[(k * x as i64).rem_euclid(n as i64) as usize])
            .collect();
        FourierDynkin {
            n,
            k,
            spec,
            co: Coefficients::new(params, &spec),
            rate_table: params.rate_table(),
            omega,
            mode_tab,
            nu: TestFunction::fourier_grad_factor(k, n),
            mu: TestFunction::fourier_lap_factor(k, n),
            s_mode: Complex64::default(),
            prod_aa: Complex64::default(),
            prod_bb: Complex64::default(),
            prod_x: Complex64::default(),
            u_qv: 0.0,
            shift: 0,
            i_acc: Complex64::default(),
            b_acc: Complex64::default(),
            lin_acc: Complex64::default(),
            frame_acc: Complex64::default(),
            qv_acc: 0.0,
            z0: Complex64::default(),
            t_cur: 0.0,
            events_since_resync: 0,
            rows: Vec::new(),
        }
    }

    #[inline]
    fn mode_value(&self, x: usize) -> Complex64 {
        self.mode_tab[if x < self.n { x } else { x - self.n }]
    }

    fn phase(&self, shift: i64) -> Complex64 {
        let idx = (-self.k * shift).rem_euclid(self.n as i64) as usize;
        self.omega[idx]
    }

    fn recompute_sums(&mut self, config: &Configuration) {
        let n = self.n;
        let mut s = Complex64::default();
        let mut q_aa = Complex64::default();
        let mut q_bb = Complex64::default();
        let mut q_x = Complex64::default();
        let mut u = 0.0;
        for x in 0..n {
            let x1 = (x + 1) % n;
            let (sx, sx1) = (config.site(x), config.site(x1));
            let a0 = centred(sx == Species::A);
            let b0 = centred(sx == Species::B);
            let a1 = centred(sx1 == Species::A);
            let b1 = centred(sx1 == Species::B);
            let e = self.mode_value(x);
            s += (self.co.d1 * a0 + self.co.d2 * b0) * e;
            q_aa += (a0 * a1) * e;
            q_bb += (b0 * b1) * e;
            q_x += (a0 * b1 + b0 * a1) * e;
            let dw = self.co.weight(sx1) - self.co.weight(sx);
            u += self.rate_table[sx as usize][sx1 as usize] * dw * dw;
        }
        self.s_mode = s;
        self.prod_aa = q_aa;
        self.prod_bb = q_bb;
        self.prod_x = q_x;
        self.u_qv = u;
        self.events_since_resync = 0;
    }

    fn z_value(&self, shift: i64) -> Complex64 {
        self.co.inv_sqrt_n * self.phase(shift) * self.s_mode
    }

    /// Integrate the constant stretch `[t0, t1)` at frame shift `shift`.
    fn accumulate_piece(&mut self, t0: f64, t1: f64, shift: i64) {
        let dt = (t1 - t0).max(0.0);
        if dt == 0.0 {
            return;
        }
        let phase = self.phase(shift);
        let z = self.co.inv_sqrt_n * phase * self.s_mode;
        self.i_acc += self.co.pre_i * self.mu * z * dt;
        self.lin_acc += (self.co.lin_grad * self.nu - self.co.lin_lap * self.mu) * z * dt;
        let quad =
            self.co.q_aa * self.prod_aa + self.co.q_bb * self.prod_bb + self.co.q_x * self.prod_x;
        self.b_acc += self.co.pre_b * self.nu * phase * quad * dt;
        self.qv_acc += self.co.pre_qv * self.nu.norm_sqr() * self.u_qv * dt;
    }

    /// Advance through `[t0, t1)`, splitting at frame-floor crossings.
    fn advance(&mut self, t0: f64, t1: f64) {
        let g = self.co.frame_speed;
        if g == 0.0 {
            self.accumulate_piece(t0, t1, self.shift);
            return;
        }
        let m1 = (g * t1).floor() as i64;
        let mut cur = t0;
        while self.shift != m1 {
            let step: i64 = if m1 > self.shift { 1 } else { -1 };
            let boundary = if step > 0 {
                (self.shift + 1) as f64 / g
            } else {
                self.shift as f64 / g
            };
            let boundary = boundary.clamp(cur, t1);
            self.accumulate_piece(cur, boundary, self.shift);
            let old_phase = self.phase(self.shift);
            let new_phase = self.phase(self.shift + step);
            self.frame_acc += self.co.inv_sqrt_n * self.s_mode * (new_phase - old_phase);
            self.shift += step;
            cur = boundary;
        }
        self.accumulate_piece(cur, t1, self.shift);
    }

    fn push_row(&mut self, t: f64) {
        let z = self.z_value(self.shift);
        let r_t = -(self.lin_acc + self.frame_acc);
        let m_t = z - self.z0 - self.i_acc - self.b_acc + r_t;
        self.rows.push(LedgerRow {
            t,
            z,
            i_t: self.i_acc,
            b_t: self.b_acc,
            r_t,
            m_t,
            qv: self.qv_acc,
        });
    }

    pub fn ledger(self) -> DynkinLedger {
        DynkinLedger { spec: self.spec, rows: self.rows }
    }

    /// Size of the field jump caused by a swap at bond `x` (used by the
    /// martingale-jump bound check): `N^{-1/2} |f(x) - f(x+1)| |dw|`.
    pub fn event_jump(&self, ev: &Event) -> f64 {
        let dw = self.co.weight(ev.right) - self.co.weight(ev.left);
        let fx = self.mode_value(ev.bond % self.n);
        let fx1 = self.mode_value((ev.bond + 1) % self.n);
        self.co.inv_sqrt_n * ((fx - fx1) * dw).norm()
    }
}

impl TrajectoryObserver for FourierDynkin {
    fn begin(&mut self, config: &Configuration, t: f64) {
        self.recompute_sums(config);
        self.t_cur = t;
        self.shift = (self.co.frame_speed * t).floor() as i64;
        self.z0 = self.z_value(self.shift);
    }

    fn constant_interval(&mut self, _config: &Configuration, t0: f64, t1: f64) {
        self.advance(t0, t1);
        self.t_cur = t1;
    }

    fn apply_event(&mut self, config: &Configuration, ev: &Event) {
        let n = self.n;
        let x = ev.bond;
        let x1 = (x + 1) % n;
        // occupation after the swap
        let site_after = |z: usize| -> Species {
            if z == x {
                ev.right
            } else if z == x1 {
                ev.left
            } else {
                config.site(z)
            }
        };
        // field sum: only sites x, x+1 change
        let dwx = self.co.weight(ev.right) - self.co.weight(ev.left);
        self.s_mode += dwx * self.mode_value(x) - dwx * self.mode_value(x1);
        // products: bonds x-1, x, x+1 change
        for &y in &[(x + n - 1) % n, x, x1] {
            let y1 = (y + 1) % n;
            let (b0, b1) = (config.site(y), config.site(y1));
            let (n0, n1) = (site_after(y), site_after(y1));
            let e = self.mode_value(y);
            let (ba0, bb0) = (centred(b0 == Species::A), centred(b0 == Species::B));
            let (ba1, bb1) = (centred(b1 == Species::A), centred(b1 == Species::B));
            let (na0, nb0) = (centred(n0 == Species::A), centred(n0 == Species::B));
            let (na1, nb1) = (centred(n1 == Species::A), centred(n1 == Species::B));
            self.prod_aa += (na0 * na1 - ba0 * ba1) * e;
            self.prod_bb += (nb0 * nb1 - bb0 * bb1) * e;
            self.prod_x += (na0 * nb1 + nb0 * na1 - ba0 * bb1 - bb0 * ba1) * e;
            let dwb = self.co.weight(b1) - self.co.weight(b0);
            let dwn = self.co.weight(n1) - self.co.weight(n0);
            self.u_qv += self.rate_table[n0 as usize][n1 as usize] * dwn * dwn
                - self.rate_table[b0 as usize][b1 as usize] * dwb * dwb;
        }
        self.events_since_resync += 1;
        if self.events_since_resync >= RESYNC_PERIOD {
            let mut after = config.clone();
            after.swap_bond(x);
            self.recompute_sums(&after);
        }
    }

    fn sample(&mut self, _config: &Configuration, t: f64) {
        self.push_row(t);
    }
}

/// Reference ledger for arbitrary test functions: every quantity is
/// recomputed by full lattice sums per constant piece. O(N) per event, for
/// small rings and as an oracle for [`FourierDynkin`].
pub struct ReferenceDynkin {
    n: usize,
    f: TestFunction,
    spec: NormalModeSpec,
    co: Coefficients,
    rate_table: [[f64; 3]; 3],
    shift: i64,
    i_acc: Complex64,
    b_acc: Complex64,
    lin_acc: Complex64,
    frame_acc: Complex64,
    qv_acc: f64,
    z0: Complex64,
    pub rows: Vec<LedgerRow>,
}

impl ReferenceDynkin {
    pub fn new(params: &ModelParams, spec: NormalModeSpec, f: TestFunction) -> ReferenceDynkin {
        ReferenceDynkin {
            n: params.n(),
            f,
            spec,
            co: Coefficients::new(params, &spec),
            rate_table: params.rate_table(),
            shift: 0,
            i_acc: Complex64::default(),
            b_acc: Complex64::default(),
            lin_acc: Complex64::default(),
            frame_acc: Complex64::default(),
            qv_acc: 0.0,
            z0: Complex64::default(),
            rows: Vec::new(),
        }
    }

    /// `T^shift f` evaluated at site `x`.
    fn tf(&self, x: i64, shift: i64) -> Complex64 {
        let idx = (x - shift).rem_euclid(self.n as i64) as usize;
        self.f.eval(idx, self.n)
    }

    fn tf_grad(&self, x: i64, shift: i64) -> Complex64 {
        self.n as f64 * (self.tf(x + 1, shift) - self.tf(x, shift))
    }

    fn tf_lap(&self, x: i64, shift: i64) -> Complex64 {
        (self.n as f64) * (self.n as f64)
            * (self.tf(x + 1, shift) - 2.0 * self.tf(x, shift) + self.tf(x - 1, shift))
    }

    fn z_value(&self, config: &Configuration, shift: i64) -> Complex64 {
        let mut acc = Complex64::default();
        for x in 0..self.n {
            let s = config.site(x);
            let w = self.co.d1 * centred(s == Species::A) + self.co.d2 * centred(s == Species::B);
            acc += w * self.tf(x as i64, shift);
        }
        self.co.inv_sqrt_n * acc
    }

    fn accumulate_piece(&mut self, config: &Configuration, t0: f64, t1: f64, shift: i64) {
        let dt = (t1 - t0).max(0.0);
        if dt == 0.0 {
            return;
        }
        let mut z_grad = Complex64::default();
        let mut z_lap = Complex64::default();
        let mut quad = Complex64::default();
        let mut u = 0.0;
        for x in 0..self.n {
            let x1 = (x + 1) % self.n;
            let (s0, s1) = (config.site(x), config.site(x1));
            let a0 = centred(s0 == Species::A);
            let b0 = centred(s0 == Species::B);
            let a1 = centred(s1 == Species::A);
            let b1 = centred(s1 == Species::B);
            let w0 = self.co.d1 * a0 + self.co.d2 * b0;
            let grad = self.tf_grad(x as i64, shift);
            z_grad += w0 * grad;
            z_lap += w0 * self.tf_lap(x as i64, shift);
            quad += grad
                * (self.co.q_aa * a0 * a1 + self.co.q_bb * b0 * b1
                    + self.co.q_x * (a0 * b1 + b0 * a1));
            let dw = self.co.weight(s1) - self.co.weight(s0);
            u += self.rate_table[s0 as usize][s1 as usize] * dw * dw * grad.norm_sqr();
        }
        let inv = self.co.inv_sqrt_n;
        self.i_acc += self.co.pre_i * inv * z_lap * dt;
        self.lin_acc += (self.co.lin_grad * inv * z_grad - self.co.lin_lap * inv * z_lap) * dt;
        self.b_acc += self.co.pre_b * quad * dt;
        self.qv_acc += self.co.pre_qv * u * dt;
    }

    fn advance(&mut self, config: &Configuration, t0: f64, t1: f64) {
        let g = self.co.frame_speed;
        if g == 0.0 {
            self.accumulate_piece(config, t0, t1, self.shift);
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
            self.accumulate_piece(config, cur, boundary, self.shift);
            self.frame_acc +=
                self.z_value(config, self.shift + step) - self.z_value(config, self.shift);
            self.shift += step;
            cur = boundary;
        }
        self.accumulate_piece(config, cur, t1, self.shift);
    }

    pub fn ledger(self) -> DynkinLedger {
        DynkinLedger { spec: self.spec, rows: self.rows }
    }
}

impl TrajectoryObserver for ReferenceDynkin {
    fn begin(&mut self, config: &Configuration, t: f64) {
        self.shift = (self.co.frame_speed * t).floor() as i64;
        self.z0 = self.z_value(config, self.shift);
    }

    fn constant_interval(&mut self, config: &Configuration, t0: f64, t1: f64) {
        self.advance(config, t0, t1);
    }

    fn sample(&mut self, config: &Configuration, t: f64) {
        let z = self.z_value(config, self.shift);
        let r_t = -(self.lin_acc + self.frame_acc);
        let m_t = z - self.z0 - self.i_acc - self.b_acc + r_t;
        self.rows.push(LedgerRow {
            t,
            z,
            i_t: self.i_acc,
            b_t: self.b_acc,
            r_t,
            m_t,
            qv: self.qv_acc,
        });
    }
}

/// Lean observer recording `Z_t(e_k)` for one mode at sample times: tracks
/// only the mode sum, O(1) per event with no integral bookkeeping.
pub struct ModeAmplitudeSampler {
    n: usize,
    k: i64,
    d1: f64,
    d2: f64,
    frame_speed: f64,
    inv_sqrt_n: f64,
    omega: Vec<Complex64>,
    mode_tab: Vec<Complex64>,
    s_mode: Complex64,
    events_since_resync: u64,
    pub samples: Vec<(f64, Complex64)>,
}

impl ModeAmplitudeSampler {
    pub fn new(params: &ModelParams, spec: NormalModeSpec, k: i64) -> ModeAmplitudeSampler {
        let n = params.n();
        let omega: Vec<Complex64> = (0..n)
            .map(|j| Complex64::from_polar(1.0, 2.0 * std::f64::consts::PI * j as f64 / n as f64))
            .collect();
        let mode_tab = (0..n)
            .map(|x| omega[(k * x as i64).rem_euclid(n as i64) as usize])
            .collect();
        ModeAmplitudeSampler {
            n,
            k,
            d1: spec.d1,
            d2: spec.d2,
            frame_speed: spec.v * params.n_pow_a(),
            inv_sqrt_n: 1.0 / (n as f64).sqrt(),
            omega,
            mode_tab,
            s_mode: Complex64::default(),
            events_since_resync: 0,
            samples: Vec::new(),
        }
    }

    #[inline]
    fn weight(&self, s: Species) -> f64 {
        match s {
            Species::A => self.d1,
            Species::B => self.d2,
            Species::C => 0.0,
        }
    }

    fn recompute(&mut self, config: &Configuration) {
        let mut s = Complex64::default();
        for x in 0..self.n {
            let site = config.site(x);
            let w = self.d1 * centred(site == Species::A) + self.d2 * centred(site == Species::B);
            s += w * self.mode_tab[x];
        }
        self.s_mode = s;
        self.events_since_resync = 0;
    }
}

impl TrajectoryObserver for ModeAmplitudeSampler {
    fn begin(&mut self, config: &Configuration, _t: f64) {
        self.recompute(config);
    }

    fn apply_event(&mut self, config: &Configuration, ev: &Event) {
        let x = ev.bond;
        let x1 = if x + 1 == self.n { 0 } else { x + 1 };
        let dw = self.weight(ev.right) - self.weight(ev.left);
        self.s_mode += dw * (self.mode_tab[x] - self.mode_tab[x1]);
        self.events_since_resync += 1;
        if self.events_since_resync >= RESYNC_PERIOD {
            let mut after = config.clone();
            after.swap_bond(x);
            self.recompute(&after);
        }
    }

    fn sample(&mut self, _config: &Configuration, t: f64) {
        let m = (self.frame_speed * t).floor() as i64;
        let phase = self.omega[(-self.k * m).rem_euclid(self.n as i64) as usize];
        self.samples.push((t, self.inv_sqrt_n * phase * self.s_mode));
    }
}

/// Running quadratic variation of one mode/Fourier-function martingale:
/// integrates `N^{a-3} |nu_k|^2 sum_x c_x (w_{x+1} - w_x)^2` only, O(1) per
/// event with no complex tracking.
pub struct QvAccumulator {
    n: usize,
    d1: f64,
    d2: f64,
    rate_table: [[f64; 3]; 3],
    pre: f64, // N^{a-3} |nu_k|^2
    u: f64,
    pub qv: f64,
    pub rows: Vec<(f64, f64)>,
}

impl QvAccumulator {
    pub fn new(params: &ModelParams, spec: &NormalModeSpec, k: i64) -> QvAccumulator {
        let n = params.n();
        QvAccumulator {
            n,
            d1: spec.d1,
            d2: spec.d2,
            rate_table: params.rate_table(),
            pre: (n as f64).powf(params.a() - 3.0)
                * TestFunction::fourier_grad_factor(k, n).norm_sqr(),
            u: 0.0,
            qv: 0.0,
            rows: Vec::new(),
        }
    }

    #[inline]
    fn weight(&self, s: Species) -> f64 {
        match s {
            Species::A => self.d1,
            Species::B => self.d2,
            Species::C => 0.0,
        }
    }

    fn recompute(&mut self, config: &Configuration) {
        let n = self.n;
        self.u = (0..n)
            .map(|x| {
                let (l, r) = (config.site(x), config.site(if x + 1 == n { 0 } else { x + 1 }));
                let dw = self.weight(r) - self.weight(l);
                self.rate_table[l as usize][r as usize] * dw * dw
            })
            .sum();
    }
}

impl TrajectoryObserver for QvAccumulator {
    fn begin(&mut self, config: &Configuration, _t: f64) {
        self.recompute(config);
    }

    fn constant_interval(&mut self, _config: &Configuration, t0: f64, t1: f64) {
        self.qv += self.pre * self.u * (t1 - t0);
    }

    fn apply_event(&mut self, config: &Configuration, ev: &Event) {
        let n = self.n;
        let x = ev.bond;
        let x1 = if x + 1 == n { 0 } else { x + 1 };
        let site_after = |z: usize| -> Species {
            if z == x {
                ev.right
            } else if z == x1 {
                ev.left
            } else {
                config.site(z)
            }
        };
        for &y in &[if x == 0 { n - 1 } else { x - 1 }, x, x1] {
            let y1 = if y + 1 == n { 0 } else { y + 1 };
            let (b0, b1) = (config.site(y), config.site(y1));
            let (n0, n1) = (site_after(y), site_after(y1));
            let dwb = self.weight(b1) - self.weight(b0);
            let dwn = self.weight(n1) - self.weight(n0);
            self.u += self.rate_table[n0 as usize][n1 as usize] * dwn * dwn
                - self.rate_table[b0 as usize][b1 as usize] * dwb * dwb;
        }
    }

    fn sample(&mut self, _config: &Configuration, t: f64) {
        self.rows.push((t, self.qv));
    }
}
