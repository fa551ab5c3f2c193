//! Experiment configuration: a flat TOML file with a model block, a field
//! list and optional estimator sections. Round-trips losslessly through
//! serde.

use abc_ring::mode_coupling::CaseTag;
use abc_ring::params::ModelParams;
use anyhow::{bail, Context, Result};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ModelBlock {
    pub n: usize,
    pub gamma: f64,
    #[serde(default = "default_a")]
    pub a: f64,
    pub e_a: f64,
    pub e_b: f64,
    pub e_c: f64,
}

fn default_a() -> f64 {
    2.0
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentBlock {
    /// structural case tag: "I", "II" or "III"
    pub case: String,
    pub master_seed: u64,
    pub trajectories: usize,
    pub t_max: f64,
    pub output_dir: String,
    /// snapshot / field sampling times (macroscopic)
    #[serde(default)]
    pub sample_times: Vec<f64>,
    /// write per-trajectory event logs (can be very large)
    #[serde(default)]
    pub record_events: bool,
    /// snapshot payloads packed four sites per byte
    #[serde(default)]
    pub packed_snapshots: bool,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct FieldBlock {
    /// "plus" or "minus"
    pub mode: String,
    pub k: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq, Default)]
pub struct EstimatorBlock {
    pub qv: Option<QvBlock>,
    pub bg: Option<BgBlock>,
    pub bg_smooth: Option<BgSmoothBlock>,
    pub crossed: Option<CrossedBlock>,
    pub structure: Option<StructureBlock>,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct QvBlock {
    pub k: i64,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BgBlock {
    /// species pair, e.g. "AA" or "AB"
    pub pair: String,
    pub block_sites: Vec<usize>,
    pub t: f64,
    pub trajectories: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct BgSmoothBlock {
    pub pair: String,
    pub eps_list: Vec<f64>,
    pub t: f64,
    pub trajectories: usize,
    #[serde(default = "default_quad")]
    pub quad_points: usize,
}

fn default_quad() -> usize {
    400
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct CrossedBlock {
    pub eps: f64,
    pub k: i64,
    pub t: f64,
    pub n_sweep: Vec<usize>,
    pub trajectories: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct StructureBlock {
    pub t_grid: Vec<f64>,
    pub trajectories: usize,
}

#[derive(Debug, Clone, Serialize, Deserialize, PartialEq)]
pub struct ExperimentConfig {
    pub model: ModelBlock,
    pub experiment: ExperimentBlock,
    #[serde(default)]
    pub fields: Vec<FieldBlock>,
    #[serde(default)]
    pub estimators: EstimatorBlock,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<ExperimentConfig> {
        toml::from_str(text).context("parsing experiment config")
    }

    pub fn to_toml(&self) -> Result<String> {
        toml::to_string_pretty(self).context("serializing experiment config")
    }

    pub fn load(path: &std::path::Path) -> Result<ExperimentConfig> {
        let text = std::fs::read_to_string(path)
            .with_context(|| format!("reading {}", path.display()))?;
        ExperimentConfig::from_toml(&text)
    }

    pub fn params(&self) -> Result<ModelParams> {
        let m = &self.model;
        Ok(ModelParams::with_time_scale(
            m.n,
            m.gamma,
            m.a,
            [m.e_a, m.e_b, m.e_c],
            self.experiment.master_seed,
        )?)
    }

    pub fn case_tag(&self) -> Result<CaseTag> {
        match self.experiment.case.trim() {
            "I" | "i" | "1" => Ok(CaseTag::I),
            "II" | "ii" | "2" => Ok(CaseTag::II),
            "III" | "iii" | "3" => Ok(CaseTag::III),
            other => bail!("unknown case tag {other:?} (expected I, II or III)"),
        }
    }

    /// Diagnostics: every constraint violation with its source. Empty means
    /// the configuration is valid.
    pub fn diagnostics(&self) -> Vec<String> {
        let mut out = Vec::new();
        let m = &self.model;
        match self.params() {
            Err(e) => out.push(format!("model: {e} (swap rates must be strictly positive)")),
            Ok(params) => {
                match self.case_tag() {
                    Err(e) => out.push(format!("experiment.case: {e}")),
                    Ok(tag) => {
                        if let Err(e) = tag.check(&params) {
                            out.push(format!(
                                "experiment.case: {e} (field strengths do not realize the tag)"
                            ));
                        }
                    }
                }
            }
        }
        if m.n < 3 {
            out.push(format!("model.n = {} below the minimum ring size 3", m.n));
        }
        if self.experiment.t_max < 0.0 {
            out.push("experiment.t_max must be non-negative".into());
        }
        if self
            .experiment
            .sample_times
            .windows(2)
            .any(|w| w[0] >= w[1])
        {
            out.push("experiment.sample_times must be strictly increasing".into());
        }
        for f in &self.fields {
            if f.mode != "plus" && f.mode != "minus" {
                out.push(format!("fields.mode {:?} must be \"plus\" or \"minus\"", f.mode));
            }
        }
        if let Some(c) = &self.estimators.crossed {
            if c.n_sweep.windows(2).any(|w| w[0] >= w[1]) {
                out.push("estimators.crossed.n_sweep must be strictly increasing".into());
            }
            if !(0.0..0.25).contains(&c.eps) {
                out.push(format!("estimators.crossed.eps = {} outside (0, 1/4)", c.eps));
            }
        }
        if let Some(c) = &self.estimators.qv {
            if c.k == 0 {
                out.push("estimators.qv.k must be nonzero".into());
            }
        }
        if let Some(b) = &self.estimators.bg {
            if parse_pair(&b.pair).is_none() {
                out.push(format!("estimators.bg.pair {:?} must be two of A/B/C", b.pair));
            }
        }
        if let Some(b) = &self.estimators.bg_smooth {
            if parse_pair(&b.pair).is_none() {
                out.push(format!("estimators.bg_smooth.pair {:?} must be two of A/B/C", b.pair));
            }
        }
        // theorem coefficients need the proven regime
        if m.gamma < 0.5 && (self.estimators.qv.is_some() || !self.fields.is_empty()) {
            out.push(format!(
                "model.gamma = {} below 1/2: limit coefficients are undefined there",
                m.gamma
            ));
        }
        out
    }
}

pub fn parse_pair(s: &str) -> Option<(abc_ring::Species, abc_ring::Species)> {
    let mut chars = s.trim().chars();
    let a = abc_ring::Species::from_char(chars.next()?)?;
    let b = abc_ring::Species::from_char(chars.next()?)?;
    if chars.next().is_some() {
        return None;
    }
    Some((a, b))
}

#[cfg(test)]
mod tests {
    use super::*;

    pub const SAMPLE: &str = r#"
[model]
n = 64
gamma = 0.5
e_a = 1.0
e_b = 1.0
e_c = 0.0

[experiment]
case = "I"
master_seed = 42
trajectories = 4
t_max = 0.01
output_dir = "out"
sample_times = [0.005, 0.01]

[[fields]]
mode = "plus"
k = 1

[estimators.qv]
k = 1
"#;

    #[test]
    fn round_trips_losslessly() {
        let cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        let text = cfg.to_toml().unwrap();
        let cfg2 = ExperimentConfig::from_toml(&text).unwrap();
        assert_eq!(cfg, cfg2);
        assert!(cfg.diagnostics().is_empty(), "{:?}", cfg.diagnostics());
    }

    #[test]
    fn flags_rate_violation_and_case_mismatch() {
        let mut cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        cfg.model.e_a = 3.0 * (64f64).sqrt(); // |E_A - E_C| = 3 N^gamma
        let diags = cfg.diagnostics();
        assert!(diags.iter().any(|d| d.contains("strictly positive")), "{diags:?}");

        let mut cfg = ExperimentConfig::from_toml(SAMPLE).unwrap();
        cfg.model.e_b = 0.5; // case I requires E_A = E_B
        let diags = cfg.diagnostics();
        assert!(diags.iter().any(|d| d.contains("case")), "{diags:?}");
    }
}
