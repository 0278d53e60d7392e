//! Run configuration: command-line flags layered over a flat JSON file
//! layered over defaults.

use std::path::{Path, PathBuf};

use clap::Args;
use serde::Deserialize;

use carnot_core::oracle::{DEFAULT_GRID_POINTS, DEFAULT_SLACK_TOL, DEFAULT_TOL};
use carnot_core::verify::{DEFAULT_DRAWS, DEFAULT_SEED};
use carnot_core::EngineParams;

use crate::CliError;

/// Every setting the subcommands read. Each field is optional so the
/// same struct serves as the flag set and as the config-file schema.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Settings {
    /// Path to a flat JSON config file.
    #[arg(long, global = true)]
    #[serde(skip)]
    pub config: Option<PathBuf>,

    #[arg(long, global = true)]
    pub beta_hot: Option<f64>,
    #[arg(long, global = true)]
    pub beta_cold: Option<f64>,
    /// Qubit gap E. Defaults to 0.4/(beta_cold - beta_hot).
    #[arg(long, global = true)]
    pub gap: Option<f64>,
    #[arg(long, global = true)]
    pub n: Option<u32>,
    #[arg(long, global = true)]
    pub alpha_star: Option<f64>,
    /// Quasi-static step; for `converge` a single-row g list.
    #[arg(long, global = true)]
    pub g: Option<f64>,
    /// Comma-separated, strictly decreasing g values for `converge`.
    #[arg(long, global = true, value_delimiter = ',')]
    pub g_list: Option<Vec<f64>>,
    /// Override the designed epsilon1 in `converge`.
    #[arg(long, global = true)]
    pub epsilon1: Option<f64>,

    /// Swept parameter: alpha_star, beta_cold or gap.
    #[arg(long, global = true)]
    pub vary: Option<String>,
    /// Sweep range as start:stop:step (stop inclusive).
    #[arg(long, global = true)]
    pub range: Option<String>,
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads; 0 uses every core, 1 runs sequentially.
    #[arg(long, global = true)]
    pub jobs: Option<usize>,
    #[arg(long, global = true)]
    pub draws: Option<usize>,

    /// Oracle bisection tolerance on w.
    #[arg(long, global = true)]
    pub tol: Option<f64>,
    #[arg(long, global = true)]
    pub slack_tol: Option<f64>,
    /// Geometric alpha-grid points of the oracle.
    #[arg(long, global = true)]
    pub grid_points: Option<usize>,

    /// Epsilon family for `classify`: power, loglinear or perfect.
    #[arg(long, global = true)]
    pub family: Option<String>,
    #[arg(long, global = true)]
    pub c: Option<f64>,
    #[arg(long, global = true)]
    pub r: Option<f64>,
}

impl Settings {
    /// Fields set in `self` win over those in `lower`.
    pub fn over(self, lower: Settings) -> Settings {
        Settings {
            config: self.config.or(lower.config),
            beta_hot: self.beta_hot.or(lower.beta_hot),
            beta_cold: self.beta_cold.or(lower.beta_cold),
            gap: self.gap.or(lower.gap),
            n: self.n.or(lower.n),
            alpha_star: self.alpha_star.or(lower.alpha_star),
            g: self.g.or(lower.g),
            g_list: self.g_list.or(lower.g_list),
            epsilon1: self.epsilon1.or(lower.epsilon1),
            vary: self.vary.or(lower.vary),
            range: self.range.or(lower.range),
            out: self.out.or(lower.out),
            seed: self.seed.or(lower.seed),
            jobs: self.jobs.or(lower.jobs),
            draws: self.draws.or(lower.draws),
            tol: self.tol.or(lower.tol),
            slack_tol: self.slack_tol.or(lower.slack_tol),
            grid_points: self.grid_points.or(lower.grid_points),
            family: self.family.or(lower.family),
            c: self.c.or(lower.c),
            r: self.r.or(lower.r),
        }
    }

    pub fn from_file(path: &Path) -> Result<Settings, CliError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("cannot read config {}: {e}", path.display())))?;
        serde_json::from_str(&text).map_err(|e| CliError::Config(format!("bad config {}: {e}", path.display())))
    }

    /// Flags over the config file named by `--config` (if any).
    pub fn layered(self) -> Result<Settings, CliError> {
        match &self.config {
            Some(path) => {
                let file = Settings::from_file(path)?;
                Ok(self.over(file))
            }
            None => Ok(self),
        }
    }
}

pub const DEFAULT_BETA_HOT: f64 = 1.0;
pub const DEFAULT_BETA_COLD: f64 = 10.0;
pub const DEFAULT_ALPHA_STAR: f64 = 1.2;
pub const DEFAULT_G_LIST: [f64; 3] = [1e-2, 1e-3, 1e-4];

/// Gap tied to the bath temperatures when none is given.
pub fn default_gap(beta_hot: f64, beta_cold: f64) -> f64 {
    0.4 / (beta_cold - beta_hot)
}

/// Settings with defaults filled in and checked.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub beta_hot: f64,
    pub beta_cold: f64,
    pub gap: Option<f64>,
    pub n: u32,
    pub alpha_star: f64,
    pub g_list: Vec<f64>,
    pub epsilon1: Option<f64>,
    pub out: Option<PathBuf>,
    pub seed: u64,
    pub jobs: usize,
    pub draws: usize,
    pub tol: f64,
    pub slack_tol: f64,
    pub grid_points: usize,
}

impl RunConfig {
    pub fn resolve(s: &Settings) -> Result<RunConfig, CliError> {
        let g_list = match (&s.g_list, s.g) {
            (Some(list), _) => list.clone(),
            (None, Some(g)) => vec![g],
            (None, None) => DEFAULT_G_LIST.to_vec(),
        };
        let cfg = RunConfig {
            beta_hot: s.beta_hot.unwrap_or(DEFAULT_BETA_HOT),
            beta_cold: s.beta_cold.unwrap_or(DEFAULT_BETA_COLD),
            gap: s.gap,
            n: s.n.unwrap_or(1),
            alpha_star: s.alpha_star.unwrap_or(DEFAULT_ALPHA_STAR),
            g_list,
            epsilon1: s.epsilon1,
            out: s.out.clone(),
            seed: s.seed.unwrap_or(DEFAULT_SEED),
            jobs: s.jobs.unwrap_or(0),
            draws: s.draws.unwrap_or(DEFAULT_DRAWS),
            tol: s.tol.unwrap_or(DEFAULT_TOL),
            slack_tol: s.slack_tol.unwrap_or(DEFAULT_SLACK_TOL),
            grid_points: s.grid_points.unwrap_or(DEFAULT_GRID_POINTS),
        };
        for (name, v) in [("tol", cfg.tol), ("slack_tol", cfg.slack_tol)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(CliError::Config(format!("{name} must be positive, got {v}")));
            }
        }
        if cfg.grid_points < 2 {
            return Err(CliError::Config("grid_points must be at least 2".into()));
        }
        if cfg.g_list.is_empty() {
            return Err(CliError::Config("g list is empty".into()));
        }
        if cfg.g_list.windows(2).any(|w| !(w[0] > w[1])) {
            return Err(CliError::Config(format!("g list must be strictly decreasing, got {:?}", cfg.g_list)));
        }
        Ok(cfg)
    }

    pub fn gap(&self) -> f64 {
        self.gap.unwrap_or_else(|| default_gap(self.beta_hot, self.beta_cold))
    }

    pub fn params(&self) -> Result<EngineParams, CliError> {
        Ok(EngineParams::new(self.beta_hot, self.beta_cold, self.gap(), self.n)?)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Vary {
    AlphaStar,
    BetaCold,
    Gap,
}

impl Vary {
    pub fn parse(name: &str) -> Result<Vary, CliError> {
        match name {
            "alpha_star" | "alpha-star" => Ok(Vary::AlphaStar),
            "beta_cold" | "beta-cold" => Ok(Vary::BetaCold),
            "gap" => Ok(Vary::Gap),
            other => Err(CliError::Unsupported(format!("cannot sweep {other:?}; use alpha_star, beta_cold or gap"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepSpec {
    pub vary: Vary,
    pub start: f64,
    pub stop: f64,
    pub step: f64,
}

impl SweepSpec {
    pub fn from_settings(s: &Settings) -> Result<SweepSpec, CliError> {
        let vary = Vary::parse(s.vary.as_deref().ok_or_else(|| CliError::Config("sweep needs --vary".into()))?)?;
        let range = s.range.as_deref().ok_or_else(|| CliError::Config("sweep needs --range".into()))?;
        let (start, stop, step) = parse_range(range)?;
        Ok(SweepSpec { vary, start, stop, step })
    }

    /// `start + i·step` up to and including `stop` (with a 1e-9·step slack).
    pub fn points(&self) -> Vec<f64> {
        let count = ((self.stop - self.start) / self.step + 1e-9).floor() as usize + 1;
        (0..count).map(|i| self.start + i as f64 * self.step).collect()
    }
}

pub fn parse_range(text: &str) -> Result<(f64, f64, f64), CliError> {
    let parts: Vec<&str> = text.split(':').collect();
    let bad =
        || CliError::Config(format!("range must be start:stop:step with start < stop and step > 0, got {text:?}"));
    if parts.len() != 3 {
        return Err(bad());
    }
    let nums: Vec<f64> = parts.iter().map(|p| p.trim().parse::<f64>()).collect::<Result<_, _>>().map_err(|_| bad())?;
    let (start, stop, step) = (nums[0], nums[1], nums[2]);
    if !(start.is_finite() && stop.is_finite() && step.is_finite() && start < stop && step > 0.0) {
        return Err(bad());
    }
    Ok((start, stop, step))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn flags_beat_file_beat_defaults() {
        let file = Settings { beta_hot: Some(2.0), n: Some(3), seed: Some(9), ..Settings::default() };
        let flags = Settings { beta_hot: Some(1.5), ..Settings::default() };
        let cfg = RunConfig::resolve(&flags.over(file)).unwrap();
        assert_eq!(cfg.beta_hot, 1.5);
        assert_eq!(cfg.n, 3);
        assert_eq!(cfg.seed, 9);
        assert_eq!(cfg.beta_cold, DEFAULT_BETA_COLD);
        assert_eq!(cfg.gap(), 0.4 / 8.5);
    }

    #[test]
    fn config_file_uses_underscore_keys() {
        let s: Settings =
            serde_json::from_str(r#"{"beta_hot": 1.0, "alpha_star": 1.5, "g_list": [0.01, 0.001]}"#).unwrap();
        assert_eq!(s.alpha_star, Some(1.5));
        assert_eq!(s.g_list, Some(vec![0.01, 0.001]));
        assert!(serde_json::from_str::<Settings>(r#"{"beta-hot": 1.0}"#).is_err());
    }

    #[test]
    fn range_parsing() {
        assert_eq!(parse_range("1.05:1.95:0.01").unwrap(), (1.05, 1.95, 0.01));
        for bad in ["1:2", "2:1:0.1", "1:2:0", "1:2:-1", "a:2:0.1", "1:inf:0.1"] {
            assert!(parse_range(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn sweep_points_include_stop() {
        let spec = SweepSpec { vary: Vary::AlphaStar, start: 1.05, stop: 1.95, step: 0.01 };
        let pts = spec.points();
        assert_eq!(pts.len(), 91);
        assert!((pts[90] - 1.95).abs() < 1e-12);
    }

    #[test]
    fn tolerances_must_be_positive() {
        let s = Settings { tol: Some(0.0), ..Settings::default() };
        assert!(RunConfig::resolve(&s).is_err());
        let s = Settings { g_list: Some(vec![1e-3, 1e-2]), ..Settings::default() };
        assert!(RunConfig::resolve(&s).is_err());
    }

    #[test]
    fn unknown_sweep_variable_is_unsupported() {
        assert!(matches!(Vary::parse("n"), Err(CliError::Unsupported(_))));
    }
}
