//! Experiment execution: simulations with per-trajectory outputs, wired
//! estimators, and the output manifest.

use std::fmt::Write as _;
use std::path::Path;

use anyhow::{Context, Result};

use abc_ring::dynkin::{FourierDynkin, QvAccumulator};
use abc_ring::engine::{Engine, EventRecorder, TrajectoryObserver};
use abc_ring::ensemble::map_seeds;
use abc_ring::estimators::{bg_residual, bg_residual_smooth, crossed_decay_table};
use abc_ring::estimators::stats;
use abc_ring::fields::BlockKernel;
use abc_ring::io;
use abc_ring::lattice::Configuration;
use abc_ring::measures::sample_product_measure;
use abc_ring::mode_coupling::{normal_mode_spec, NormalModeSpec};

use crate::config::{parse_pair, ExperimentConfig};
use crate::manifest::Manifest;

struct TrajectoryOutput {
    index: usize,
    events_csv: Option<Vec<u8>>,
    snapshots: Vec<(f64, Configuration)>,
    field_csvs: Vec<(String, Vec<u8>)>,
    qv_final: Option<f64>,
    error: Option<String>,
}

/// Execute the configured experiment; returns the manifest (already written
/// to the output directory together with every product).
pub fn run_experiment(config: &ExperimentConfig, root: &Path) -> Result<Manifest> {
    let diags = config.diagnostics();
    if !diags.is_empty() {
        anyhow::bail!("configuration invalid:\n  {}", diags.join("\n  "));
    }
    std::fs::create_dir_all(root)
        .with_context(|| format!("creating {}", root.display()))?;
    let params = config.params()?;
    let tag = config.case_tag()?;
    let (plus, minus) = normal_mode_spec(tag, &params)?;
    let pick = |mode: &str| -> NormalModeSpec {
        if mode == "plus" {
            plus
        } else {
            minus
        }
    };
    let exp = &config.experiment;
    let config_text = config.to_toml()?;
    let mut manifest = Manifest::new(&config_text);

    // --- simulations ---------------------------------------------------
    let fields: Vec<(String, NormalModeSpec, i64)> = config
        .fields
        .iter()
        .map(|f| (f.mode.clone(), pick(&f.mode), f.k))
        .collect();
    let qv_spec = config.estimators.qv.as_ref().map(|q| (pick("minus"), q.k));
    let n = params.n();
    let record_events = exp.record_events;
    let sample_times = exp.sample_times.clone();
    let t_max = exp.t_max;

    let outputs = map_seeds(exp.master_seed, exp.trajectories, |i, mut rng| {
        let init = match sample_product_measure(1.0 / 3.0, 1.0 / 3.0, n, &mut rng) {
            Ok(c) => c,
            Err(e) => {
                return TrajectoryOutput {
                    index: i,
                    events_csv: None,
                    snapshots: Vec::new(),
                    field_csvs: Vec::new(),
                    qv_final: None,
                    error: Some(e.to_string()),
                }
            }
        };
        let mut engine = match Engine::new(params, init, rng) {
            Ok(e) => e,
            Err(e) => {
                return TrajectoryOutput {
                    index: i,
                    events_csv: None,
                    snapshots: Vec::new(),
                    field_csvs: Vec::new(),
                    qv_final: None,
                    error: Some(e.to_string()),
                }
            }
        };
        let mut recorder = record_events.then(EventRecorder::new);
        let mut ledgers: Vec<FourierDynkin> = fields
            .iter()
            .map(|(_, spec, k)| FourierDynkin::new(&params, *spec, *k))
            .collect();
        let mut qv = qv_spec.map(|(spec, k)| QvAccumulator::new(&params, &spec, k));
        struct SnapshotTaker {
            shots: Vec<(f64, Configuration)>,
        }
        impl TrajectoryObserver for SnapshotTaker {
            fn sample(&mut self, config: &Configuration, t: f64) {
                self.shots.push((t, config.clone()));
            }
        }
        let mut taker = SnapshotTaker { shots: Vec::new() };
        {
            let mut obs: Vec<&mut dyn TrajectoryObserver> = Vec::new();
            if let Some(r) = recorder.as_mut() {
                obs.push(r);
            }
            for l in ledgers.iter_mut() {
                obs.push(l);
            }
            if let Some(q) = qv.as_mut() {
                obs.push(q);
            }
            obs.push(&mut taker);
            engine.run_to(t_max, &sample_times, &mut obs);
        }
        let events_csv = recorder.map(|r| {
            let mut buf = Vec::new();
            io::write_event_log_csv(&mut buf, &r.log).expect("in-memory write");
            buf
        });
        let field_csvs = fields
            .iter()
            .zip(ledgers)
            .map(|((mode, _, k), ledger)| {
                let mut buf = Vec::new();
                io::write_field_trajectory_csv(&mut buf, &ledger.ledger(), *k)
                    .expect("in-memory write");
                (format!("fields_{mode}_k{k}_traj{i:03}.csv"), buf)
            })
            .collect();
        TrajectoryOutput {
            index: i,
            events_csv,
            snapshots: taker.shots,
            field_csvs,
            qv_final: qv.map(|q| q.qv),
            error: None,
        }
    });

    // write outputs in index order so results are identical however many
    // workers ran
    let encoding = if exp.packed_snapshots {
        io::SnapshotEncoding::Packed
    } else {
        io::SnapshotEncoding::Bytes
    };
    let mut qv_rows = Vec::new();
    for out in &outputs {
        if let Some(err) = &out.error {
            manifest.failed.push(format!("traj{:03}: {err}", out.index));
            continue;
        }
        if let Some(events) = &out.events_csv {
            let rel = format!("traj{:03}.events.csv", out.index);
            std::fs::write(root.join(&rel), events)?;
            manifest.add_file(root, &rel)?;
        }
        for (t, snap) in &out.snapshots {
            let rel = format!("traj{:03}.t{t:.6}.snap", out.index);
            let mut buf = Vec::new();
            io::write_snapshot(&mut buf, &params, snap, *t, encoding)?;
            std::fs::write(root.join(&rel), buf)?;
            manifest.add_file(root, &rel)?;
        }
        for (rel, buf) in &out.field_csvs {
            std::fs::write(root.join(rel), buf)?;
            manifest.add_file(root, rel)?;
        }
        if let Some(q) = out.qv_final {
            qv_rows.push((out.index, q));
        }
    }
    if let Some(qcfg) = &config.estimators.qv {
        let mut csv = String::from("trajectory,qv\n");
        for (i, q) in &qv_rows {
            writeln!(csv, "{i},{q}").unwrap();
        }
        let values: Vec<f64> = qv_rows.iter().map(|(_, q)| *q).collect();
        if !values.is_empty() {
            let (mean, se) = stats::mean_with_stderr(&values);
            writeln!(csv, "# k={} mean={mean} stderr={se}", qcfg.k).unwrap();
        }
        let rel = "qv.csv";
        std::fs::write(root.join(rel), csv)?;
        manifest.add_file(root, rel)?;
    }

    // --- estimators ------------------------------------------------------
    if let Some(b) = &config.estimators.bg {
        let pair = parse_pair(&b.pair).expect("validated");
        let v: Vec<f64> = (0..n)
            .map(|x| (2.0 * std::f64::consts::PI * x as f64 / n as f64).cos())
            .collect();
        let mut csv = String::from("block_sites,lhs,stderr,bracket,n_samples\n");
        for &l in &b.block_sites {
            match bg_residual(&params, pair, &v, l, b.t, b.trajectories, exp.master_seed ^ 0xb6) {
                Ok(est) => {
                    writeln!(csv, "{l},{},{},{},{}", est.lhs, est.stderr, est.bracket, est.n_samples)
                        .unwrap()
                }
                Err(e) => manifest.failed.push(format!("bg L={l}: {e}")),
            }
        }
        std::fs::write(root.join("bg.csv"), csv)?;
        manifest.add_file(root, "bg.csv")?;
    }
    if let Some(b) = &config.estimators.bg_smooth {
        let pair = parse_pair(&b.pair).expect("validated");
        let v: Vec<f64> = (0..n)
            .map(|x| (2.0 * std::f64::consts::PI * x as f64 / n as f64).cos())
            .collect();
        let mut csv = String::from("eps,lhs,stderr,bracket,n_samples\n");
        for &eps in &b.eps_list {
            match bg_residual_smooth(
                &params,
                pair,
                &v,
                eps,
                b.t,
                b.trajectories,
                b.quad_points,
                exp.master_seed ^ 0xb5,
            ) {
                Ok(est) => writeln!(
                    csv,
                    "{eps},{},{},{},{}",
                    est.lhs, est.stderr, est.bracket, est.n_samples
                )
                .unwrap(),
                Err(e) => manifest.failed.push(format!("bg_smooth eps={eps}: {e}")),
            }
        }
        std::fs::write(root.join("bg_smooth.csv"), csv)?;
        manifest.add_file(root, "bg_smooth.csv")?;
    }
    if let Some(c) = &config.estimators.crossed {
        match crossed_decay_table(
            &params,
            tag,
            BlockKernel::SmoothBump,
            c.eps,
            c.k,
            c.t,
            &c.n_sweep,
            c.trajectories,
            exp.master_seed ^ 0xc0,
        ) {
            Ok((main_rows, ctl_rows)) => {
                let mut csv = String::from("kind,n,estimate,stderr,n_samples\n");
                for r in &main_rows {
                    writeln!(csv, "crossed,{},{},{},{}", r.n, r.estimate, r.stderr, r.n_samples)
                        .unwrap();
                }
                for r in &ctl_rows {
                    writeln!(csv, "control,{},{},{},{}", r.n, r.estimate, r.stderr, r.n_samples)
                        .unwrap();
                }
                std::fs::write(root.join("crossed.csv"), csv)?;
                manifest.add_file(root, "crossed.csv")?;
            }
            Err(e) => manifest.failed.push(format!("crossed: {e}")),
        }
    }
    if let Some(s) = &config.estimators.structure {
        match abc_ring::estimators::structure_function(
            &params,
            &s.t_grid,
            s.trajectories,
            exp.master_seed ^ 0x57,
        ) {
            Ok(est) => {
                let mut csv = String::from("pair,t,u,value,stderr\n");
                let names = ["plus_plus", "minus_minus", "plus_minus"];
                for (pi, name) in names.iter().enumerate() {
                    for (ti, &t) in est.t_grid.iter().enumerate() {
                        for u in 0..est.n {
                            writeln!(
                                csv,
                                "{name},{t},{u},{},{}",
                                est.values[pi][ti][u], est.stderr[pi][ti][u]
                            )
                            .unwrap();
                        }
                    }
                }
                std::fs::write(root.join("structure.csv"), csv)?;
                manifest.add_file(root, "structure.csv")?;
            }
            Err(e) => manifest.failed.push(format!("structure: {e}")),
        }
    }

    manifest.write(root)?;
    Ok(manifest)
}

/// Deterministic replay: rebuild the configuration embedded in a manifest
/// into `target` and verify every checksum matches.
pub fn reproduce(manifest: &Manifest, target: &Path) -> Result<Vec<String>> {
    let config = ExperimentConfig::from_toml(&manifest.config_toml)?;
    run_experiment(&config, target)?;
    Ok(manifest.verify(target))
}

/// Summary statistics over field-trajectory CSVs (the `analyze` entry).
pub fn analyze_field_csvs(paths: &[std::path::PathBuf]) -> Result<String> {
    #[derive(Default)]
    struct Acc {
        z2: Vec<f64>,
        qv: Vec<f64>,
        m_re: Vec<f64>,
        residual: f64,
    }
    use std::collections::BTreeMap;
    let mut groups: BTreeMap<(String, i64), Acc> = BTreeMap::new();
    for path in paths {
        let mut file = std::fs::File::open(path)
            .with_context(|| format!("opening {}", path.display()))?;
        let rows = io::read_field_trajectory_csv(&mut file)?;
        if rows.is_empty() {
            continue;
        }
        let label = if rows[0].plus_mode { "plus" } else { "minus" };
        let acc = groups.entry((label.to_string(), rows[0].k)).or_default();
        let last = rows.last().unwrap();
        acc.z2.push(last.z.0 * last.z.0 + last.z.1 * last.z.1);
        acc.qv.push(last.qv);
        acc.m_re.push(last.m_t.0);
        // bookkeeping holds between any two sampled times:
        // (Z_t - Z_s) = (I + B - R + M)_t - (I + B - R + M)_s
        for w in rows.windows(2) {
            let (a, b) = (&w[0], &w[1]);
            let re = (b.z.0 - a.z.0)
                - (b.i_t.0 - a.i_t.0)
                - (b.b_t.0 - a.b_t.0)
                + (b.r_t.0 - a.r_t.0)
                - (b.m_t.0 - a.m_t.0);
            let im = (b.z.1 - a.z.1)
                - (b.i_t.1 - a.i_t.1)
                - (b.b_t.1 - a.b_t.1)
                + (b.r_t.1 - a.r_t.1)
                - (b.m_t.1 - a.m_t.1);
            acc.residual = acc.residual.max((re * re + im * im).sqrt());
        }
    }
    let mut out = String::from(
        "mode,k,n_trajectories,mean_abs_z2,stderr_abs_z2,mean_qv,mean_m_re,max_bookkeeping_residual\n",
    );
    for ((label, k), acc) in groups {
        let (z2, z2se) = stats::mean_with_stderr(&acc.z2);
        let (qv, _) = stats::mean_with_stderr(&acc.qv);
        let (mre, _) = stats::mean_with_stderr(&acc.m_re);
        writeln!(
            out,
            "{label},{k},{},{z2},{z2se},{qv},{mre},{}",
            acc.z2.len(),
            acc.residual
        )
        .unwrap();
    }
    Ok(out)
}

/// Per-site mean occupation profile over a set of binary snapshots
/// (the `analyze` entry for snapshot streams).
pub fn analyze_snapshots(paths: &[std::path::PathBuf]) -> Result<String> {
    let mut profile: Option<Vec<[f64; 3]>> = None;
    let mut count = 0usize;
    for path in paths {
        let mut file = std::fs::File::open(path)
            .with_context(|| format!("opening {}", path.display()))?;
        let snap = io::read_snapshot(&mut file)?;
        let prof = profile.get_or_insert_with(|| vec![[0.0; 3]; snap.n]);
        anyhow::ensure!(prof.len() == snap.n, "snapshot sizes differ");
        for (x, acc) in prof.iter_mut().enumerate() {
            acc[snap.config.site(x) as usize] += 1.0;
        }
        count += 1;
    }
    let profile = profile.unwrap_or_default();
    let mut out = String::from("site,rho_a,rho_b,rho_c\n");
    for (x, acc) in profile.iter().enumerate() {
        writeln!(
            out,
            "{x},{},{},{}",
            acc[0] / count as f64,
            acc[1] / count as f64,
            acc[2] / count as f64
        )
        .unwrap();
    }
    Ok(out)
}
