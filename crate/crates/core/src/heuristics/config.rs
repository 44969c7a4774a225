use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Window sizes and per-phase budgets (seconds).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct HeuristicConfig {
    pub lambda_rf: usize,
    pub gamma_rf: usize,
    pub lambda_fo: usize,
    pub gamma_fo: usize,
    /// PR period cutoff; `None` means `ceil(2p/3)`.
    pub zeta: Option<usize>,
    /// Treat the shortcut set as empty (the starred variants).
    pub psi_empty: bool,
    /// Fix the FO window and free its complement instead of the reverse.
    pub fo_literal: bool,
    pub time_limit_rf: f64,
    pub time_limit_fo: f64,
    pub time_limit_pr: f64,
    pub time_limit_ks: f64,
    /// Budget of the base-model solve that supplies the lower bound.
    pub time_limit_lb: f64,
    /// Budget of the `exact` method when the oracle guard does not apply.
    pub time_limit_exact: f64,
}

impl Default for HeuristicConfig {
    fn default() -> Self {
        HeuristicConfig {
            lambda_rf: 4,
            gamma_rf: 3,
            lambda_fo: 4,
            gamma_fo: 2,
            zeta: None,
            psi_empty: false,
            fo_literal: false,
            time_limit_rf: 1200.0,
            time_limit_fo: 1200.0,
            time_limit_pr: 1200.0,
            time_limit_ks: 1200.0,
            time_limit_lb: 3600.0,
            time_limit_exact: 3600.0,
        }
    }
}

impl HeuristicConfig {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: HeuristicConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        cfg.check()?;
        Ok(cfg)
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text).map_err(|e| Error::Config(format!("{}: {e}", path.display())))
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("config serializes")
    }

    /// Multiplies every time limit by `factor`.
    pub fn scaled(&self, factor: f64) -> Result<Self> {
        if !(factor.is_finite() && factor > 0.0) {
            return Err(Error::Config(format!(
                "scale must be positive, got {factor}"
            )));
        }
        let mut c = self.clone();
        for t in c.limits_mut() {
            *t *= factor;
        }
        Ok(c)
    }

    fn limits_mut(&mut self) -> [&mut f64; 6] {
        [
            &mut self.time_limit_rf,
            &mut self.time_limit_fo,
            &mut self.time_limit_pr,
            &mut self.time_limit_ks,
            &mut self.time_limit_lb,
            &mut self.time_limit_exact,
        ]
    }

    pub fn check(&self) -> Result<()> {
        let windows = [self.lambda_rf, self.gamma_rf, self.lambda_fo, self.gamma_fo];
        if windows.contains(&0) {
            return Err(Error::Config(
                "window lengths and overlaps must be positive".into(),
            ));
        }
        if self.gamma_rf >= self.lambda_rf || self.gamma_fo >= self.lambda_fo {
            return Err(Error::Config(
                "overlap must be smaller than the window".into(),
            ));
        }
        if self.zeta == Some(0) {
            return Err(Error::Config("zeta must be positive".into()));
        }
        let mut c = self.clone();
        if c.limits_mut().iter().any(|t| !(t.is_finite() && **t > 0.0)) {
            return Err(Error::Config("time limits must be positive".into()));
        }
        Ok(())
    }

    /// `zeta` for a horizon of `p` periods, clamped to `p`.
    pub fn zeta_for(&self, p: usize) -> usize {
        self.zeta.unwrap_or((2 * p).div_ceil(3)).min(p)
    }
}
