//! Settings layered from an optional JSON file and command-line flags.

use std::fs;
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use peterlin::study::StudyConfig;
use peterlin::verify::CheckConfig;
use serde::Deserialize;

/// One optional value per flag. JSON keys are the flag names with dashes
/// turned into underscores.
#[derive(Clone, Debug, Default, Deserialize, PartialEq)]
#[serde(deny_unknown_fields)]
pub struct Overrides {
    pub nu: Option<f64>,
    pub eps: Option<f64>,
    pub delta0: Option<f64>,
    pub levels: Option<Vec<usize>>,
    pub dt_ratio: Option<f64>,
    pub t_end: Option<f64>,
    pub newton_tol: Option<f64>,
    pub newton_max_iter: Option<usize>,
    pub out: Option<PathBuf>,
    pub plot_out: Option<PathBuf>,
    pub assert: Option<bool>,
    pub seed: Option<u64>,
    pub samples: Option<usize>,
}

impl Overrides {
    pub fn from_file(path: &Path) -> Result<Self> {
        let text = fs::read_to_string(path).with_context(|| format!("reading {}", path.display()))?;
        serde_json::from_str(&text).with_context(|| format!("parsing {}", path.display()))
    }

    /// Values set in `top` win.
    pub fn layered(self, top: Overrides) -> Overrides {
        Overrides {
            nu: top.nu.or(self.nu),
            eps: top.eps.or(self.eps),
            delta0: top.delta0.or(self.delta0),
            levels: top.levels.or(self.levels),
            dt_ratio: top.dt_ratio.or(self.dt_ratio),
            t_end: top.t_end.or(self.t_end),
            newton_tol: top.newton_tol.or(self.newton_tol),
            newton_max_iter: top.newton_max_iter.or(self.newton_max_iter),
            out: top.out.or(self.out),
            plot_out: top.plot_out.or(self.plot_out),
            assert: top.assert.or(self.assert),
            seed: top.seed.or(self.seed),
            samples: top.samples.or(self.samples),
        }
    }
}

pub const DEFAULT_LEVELS: [usize; 3] = [32, 64, 128];

#[derive(Clone, Debug, PartialEq)]
pub struct RunConfig {
    pub study: StudyConfig,
    pub levels: Vec<usize>,
    pub out: Option<PathBuf>,
    pub plot_out: Option<PathBuf>,
    pub assert: bool,
}

impl RunConfig {
    pub fn resolve(o: Overrides) -> Result<Self> {
        let mut study = StudyConfig::new(o.nu.unwrap_or(0.1), o.eps.unwrap_or(0.1));
        if let Some(v) = o.delta0 {
            study.delta0 = v;
        }
        if let Some(v) = o.dt_ratio {
            study.dt_ratio = v;
        }
        if let Some(v) = o.t_end {
            study.t_end = v;
        }
        if let Some(v) = o.newton_tol {
            study.newton_tol = v;
        }
        if let Some(v) = o.newton_max_iter {
            study.newton_max_iter = v;
        }
        let levels = o.levels.unwrap_or_else(|| DEFAULT_LEVELS.to_vec());
        if levels.is_empty() {
            bail!("levels must not be empty");
        }
        if levels.contains(&0) {
            bail!("levels must be positive, got {levels:?}");
        }
        if levels.windows(2).any(|w| w[0] >= w[1]) {
            bail!("levels must be strictly ascending, got {levels:?}");
        }
        if !(study.dt_ratio > 0.0 && study.dt_ratio.is_finite()) {
            bail!("dt_ratio must be positive, got {}", study.dt_ratio);
        }
        study.params(levels[0]).validate().context("invalid parameters")?;
        Ok(Self {
            study,
            levels,
            out: o.out,
            plot_out: o.plot_out,
            assert: o.assert.unwrap_or(false),
        })
    }
}

pub fn check_config(o: &Overrides) -> CheckConfig {
    let d = CheckConfig::default();
    CheckConfig {
        nu: o.nu.unwrap_or(d.nu),
        eps: o.eps.unwrap_or(d.eps),
        delta0: o.delta0.unwrap_or(d.delta0),
        seed: o.seed.unwrap_or(d.seed),
        samples: o.samples.unwrap_or(d.samples),
    }
}
