//! Event-driven dynamics: Gillespie direct method over bond rates.
//!
//! Time is kept in macroscopic units throughout; the `N^a` clock speed-up is
//! folded into the total event rate, so an exchange process at microscopic
//! time `t N^a` is observed here at time `t`.

use rand::distributions::Open01;
use rand::Rng;

use crate::error::{Error, Result};
use crate::fenwick::RateTree;
use crate::lattice::{Configuration, Species};
use crate::params::ModelParams;
use crate::rng::ChaCha8Rng;

/// `x + 1` on the ring, for `x < n`.
#[inline]
fn next_site(x: usize, n: usize) -> usize {
    if x + 1 == n {
        0
    } else {
        x + 1
    }
}

/// One executed swap. `left`/`right` are the occupants of `(bond, bond+1)`
/// immediately before the exchange.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Event {
    /// Absolute macroscopic time of the swap.
    pub time: f64,
    /// Bond index `x`, exchanging sites `x` and `x+1 (mod N)`.
    pub bond: usize,
    pub left: Species,
    pub right: Species,
}

/// Ordered record of the swaps of one trajectory.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EventLog {
    pub events: Vec<Event>,
    /// Total elapsed macroscopic time (the run horizon, not the last event time).
    pub elapsed: f64,
}

impl EventLog {
    /// Replay the log from `init`, reproducing the final configuration.
    pub fn replay(&self, init: &Configuration) -> Configuration {
        let mut config = init.clone();
        for ev in &self.events {
            config.swap_bond(ev.bond);
        }
        config
    }

    pub fn times_strictly_increasing(&self) -> bool {
        self.events.windows(2).all(|w| w[0].time < w[1].time)
    }
}

/// Callbacks driven by the exact event stream of one trajectory.
///
/// Between swaps the configuration is constant, so estimators can integrate
/// observables exactly: `constant_interval` covers each maximal interval on
/// which nothing changes, `apply_event` fires with the configuration *before*
/// the swap, and `sample` fires at every requested grid time (grid times
/// split the surrounding interval).
pub trait TrajectoryObserver {
    fn begin(&mut self, _config: &Configuration, _t: f64) {}
    fn constant_interval(&mut self, _config: &Configuration, _t0: f64, _t1: f64) {}
    fn apply_event(&mut self, _config_before: &Configuration, _event: &Event) {}
    fn sample(&mut self, _config: &Configuration, _t: f64) {}
    fn end(&mut self, _config: &Configuration, _t: f64) {}
}

/// No-op observer, useful when only the final configuration matters.
pub struct NullObserver;
impl TrajectoryObserver for NullObserver {}

/// Gillespie engine for one trajectory.
pub struct Engine {
    params: ModelParams,
    rate_table: [[f64; 3]; 3],
    clock_rate: f64, // N^a
    config: Configuration,
    tree: RateTree,
    rng: ChaCha8Rng,
    time: f64,
    events: u64,
}

impl Engine {
    pub fn new(params: ModelParams, init: Configuration, rng: ChaCha8Rng) -> Result<Engine> {
        if init.len() != params.n() {
            return Err(Error::BadParameter(format!(
                "configuration has {} sites but params.n = {}",
                init.len(),
                params.n()
            )));
        }
        let rate_table = params.rate_table();
        let n = params.n();
        let rates: Vec<f64> = (0..n)
            .map(|x| {
                let l = init.site(x) as usize;
                let r = init.site((x + 1) % n) as usize;
                rate_table[l][r]
            })
            .collect();
        Ok(Engine {
            clock_rate: params.n_pow_a(),
            params,
            rate_table,
            config: init,
            tree: RateTree::new(rates),
            rng,
            time: 0.0,
            events: 0,
        })
    }

    pub fn params(&self) -> &ModelParams {
        &self.params
    }

    pub fn config(&self) -> &Configuration {
        &self.config
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn events_executed(&self) -> u64 {
        self.events
    }

    /// Total macroscopic event rate `N^a * sum_x c_x(eta)`.
    pub fn total_rate(&self) -> f64 {
        self.clock_rate * self.tree.total()
    }

    /// Draw the next swap without applying it. Returns `None` from an
    /// absorbing (single-species) configuration.
    #[inline]
    pub fn sample_next(&mut self) -> Option<Event> {
        let micro_total = self.tree.total();
        if micro_total <= 0.0 {
            return None;
        }
        let u: f64 = self.rng.sample(Open01);
        let dt = -u.ln() / (self.clock_rate * micro_total);
        let target = self.rng.gen::<f64>() * micro_total;
        let bond = self.tree.find(target);
        let n = self.params.n();
        Some(Event {
            time: self.time + dt,
            bond,
            left: self.config.site(bond),
            right: self.config.site(next_site(bond, n)),
        })
    }

    /// Apply a swap previously drawn by `sample_next`.
    #[inline]
    pub fn apply(&mut self, ev: &Event) {
        let n = self.params.n();
        self.config.swap_bond(ev.bond);
        // Only the swapped bond and its two neighbours change rate.
        let lo = if ev.bond == 0 { n - 1 } else { ev.bond - 1 };
        for &x in &[lo, ev.bond, next_site(ev.bond, n)] {
            let l = self.config.site(x) as usize;
            let r = self.config.site(next_site(x, n)) as usize;
            self.tree.set(x, self.rate_table[l][r]);
        }
        self.time = ev.time;
        self.events += 1;
    }

    /// Perform one Gillespie step. Returns the macroscopic waiting time,
    /// `f64::INFINITY` (with no change) from an absorbing configuration.
    pub fn step(&mut self) -> f64 {
        let before = self.time;
        match self.sample_next() {
            None => f64::INFINITY,
            Some(ev) => {
                self.apply(&ev);
                self.time - before
            }
        }
    }

    /// Drive the trajectory to `t_max`, feeding observers the exact event
    /// stream and sampling each at the (sorted, deduplicated) `sample_times`.
    pub fn run_to(
        &mut self,
        t_max: f64,
        sample_times: &[f64],
        observers: &mut [&mut dyn TrajectoryObserver],
    ) {
        for obs in observers.iter_mut() {
            obs.begin(&self.config, self.time);
        }
        let mut si = sample_times.partition_point(|&s| s < self.time);
        loop {
            let ev = self.sample_next();
            let (horizon, live) = match &ev {
                Some(e) if e.time <= t_max => (e.time, true),
                _ => (t_max, false),
            };
            // Emit samples inside the constant stretch [time, horizon].
            while si < sample_times.len() && sample_times[si] <= horizon {
                let s = sample_times[si];
                for obs in observers.iter_mut() {
                    obs.constant_interval(&self.config, self.time, s);
                }
                self.time = s;
                for obs in observers.iter_mut() {
                    obs.sample(&self.config, s);
                }
                si += 1;
            }
            if live {
                let e = ev.unwrap();
                for obs in observers.iter_mut() {
                    obs.constant_interval(&self.config, self.time, e.time);
                    obs.apply_event(&self.config, &e);
                }
                self.apply(&e);
            } else {
                for obs in observers.iter_mut() {
                    obs.constant_interval(&self.config, self.time, t_max);
                }
                self.time = t_max;
                break;
            }
        }
        for obs in observers.iter_mut() {
            obs.end(&self.config, self.time);
        }
    }
}

/// Observer that records every event into an [`EventLog`].
pub struct EventRecorder {
    pub log: EventLog,
}

impl EventRecorder {
    pub fn new() -> EventRecorder {
        EventRecorder { log: EventLog::default() }
    }
}

impl Default for EventRecorder {
    fn default() -> Self {
        Self::new()
    }
}

impl TrajectoryObserver for EventRecorder {
    fn apply_event(&mut self, _config: &Configuration, event: &Event) {
        self.log.events.push(*event);
    }
    fn end(&mut self, _config: &Configuration, t: f64) {
        self.log.elapsed = t;
    }
}

/// Run the dynamics from `init` until macroscopic time `t_max`, invoking
/// `observers` along the way, and return the full event log. Deterministic
/// given `(params.seed, init, t_max, sample_times)`.
pub fn simulate(
    params: &ModelParams,
    init: Configuration,
    t_max: f64,
    sample_times: &[f64],
    observers: &mut [&mut dyn TrajectoryObserver],
) -> Result<(EventLog, Configuration)> {
    let rng = crate::rng::single_rng(params.seed());
    let mut engine = Engine::new(*params, init, rng)?;
    let mut recorder = EventRecorder::new();
    {
        let mut all: Vec<&mut dyn TrajectoryObserver> = Vec::with_capacity(observers.len() + 1);
        all.push(&mut recorder);
        for obs in observers.iter_mut() {
            all.push(&mut **obs);
        }
        engine.run_to(t_max, sample_times, &mut all);
    }
    Ok((recorder.log, engine.config().clone()))
}
