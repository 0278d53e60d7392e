//! The five subcommands. Each returns its full output; the caller owns
//! the single writer.

use serde::Serialize;

use carnot_core::engine::{check_conditions, classify_regime, design_epsilon1, EpsilonFamily};
use carnot_core::oracle::alpha_grid;
use carnot_core::par;
use carnot_core::verify::{run_verify, VerifyConfig};
use carnot_core::{minimize_w, EngineParams, Exec, Oracle, QuasiStaticConfig};

use crate::config::{default_gap, RunConfig, Settings, SweepSpec, Vary};
use crate::CliError;

/// Text produced by a command, plus a description of any invariant
/// violation it detected along the way.
#[derive(Debug, Clone, PartialEq)]
pub struct Report {
    pub body: String,
    pub violation: Option<String>,
}

impl Report {
    fn ok(body: String) -> Self {
        Report { body, violation: None }
    }
}

/// Twelve significant digits, locale independent.
pub fn fmt_float(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.11e}")
    } else if x.is_nan() {
        "nan".into()
    } else if x > 0.0 {
        "inf".into()
    } else {
        "-inf".into()
    }
}

fn csv<I, R>(header: &[&str], rows: I) -> Result<String, CliError>
where
    I: IntoIterator<Item = R>,
    R: IntoIterator<Item = String>,
{
    let mut w = csv::WriterBuilder::new().terminator(csv::Terminator::Any(b'\n')).from_writer(Vec::new());
    let io = |e: csv::Error| CliError::Io(e.to_string());
    w.write_record(header).map_err(io)?;
    for row in rows {
        w.write_record(row).map_err(io)?;
    }
    let bytes = w.into_inner().map_err(|e| CliError::Io(e.to_string()))?;
    String::from_utf8(bytes).map_err(|e| CliError::Io(e.to_string()))
}

fn json<T: Serialize>(value: &T) -> Result<String, CliError> {
    let mut s = serde_json::to_string_pretty(value).map_err(|e| CliError::Io(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub x: f64,
    pub eta: Option<f64>,
    pub eta_carnot: f64,
    pub epsilon1: f64,
    pub conditions_ok: bool,
}

fn sweep_point(spec: &SweepSpec, cfg: &RunConfig, x: f64) -> Result<SweepRow, CliError> {
    let (alpha_star, params) = match spec.vary {
        Vary::AlphaStar => (x, cfg.params()?),
        // E follows β_c through E = 0.4/(β_c − β_h)
        Vary::BetaCold => (cfg.alpha_star, EngineParams::new(cfg.beta_hot, x, default_gap(cfg.beta_hot, x), cfg.n)?),
        Vary::Gap => (cfg.alpha_star, EngineParams::new(cfg.beta_hot, cfg.beta_cold, x, cfg.n)?),
    };
    let report = check_conditions(alpha_star, &params)?;
    Ok(SweepRow {
        x,
        eta: report.eta,
        eta_carnot: report.eta_carnot,
        epsilon1: report.epsilon1,
        conditions_ok: report.ok(),
    })
}

pub fn sweep_rows(spec: &SweepSpec, cfg: &RunConfig) -> Result<Vec<SweepRow>, CliError> {
    let points = spec.points();
    par::with_threads(cfg.jobs, || par::map(Exec::from_jobs(cfg.jobs), &points, |&x| sweep_point(spec, cfg, x)))
        .into_iter()
        .collect()
}

pub fn cmd_sweep(spec: &SweepSpec, cfg: &RunConfig) -> Result<Report, CliError> {
    let rows = sweep_rows(spec, cfg)?;
    let body = csv(
        &["x", "eta", "eta_carnot", "epsilon1", "conditions_ok"],
        rows.iter().map(|r| {
            [
                fmt_float(r.x),
                r.eta.map(fmt_float).unwrap_or_default(),
                fmt_float(r.eta_carnot),
                fmt_float(r.epsilon1),
                r.conditions_ok.to_string(),
            ]
        }),
    )?;
    Ok(Report::ok(body))
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ConvergeRow {
    pub g: f64,
    pub w_oracle: f64,
    pub w_closed: f64,
    pub rel_dev: f64,
}

pub fn converge_rows(cfg: &RunConfig) -> Result<(f64, Vec<ConvergeRow>), CliError> {
    let params = cfg.params()?;
    let epsilon1 = match cfg.epsilon1 {
        Some(e) => e,
        None => design_epsilon1(cfg.alpha_star, &params)?,
    };
    let oracle = Oracle {
        alpha_grid: alpha_grid(cfg.grid_points),
        tol: cfg.tol,
        slack_tol: cfg.slack_tol,
        refine: true,
        exec: Exec::from_jobs(cfg.jobs),
    };
    let rows = par::with_threads(cfg.jobs, || {
        cfg.g_list
            .iter()
            .map(|&g| {
                let qs = QuasiStaticConfig::new(g, epsilon1)?;
                let w_oracle = oracle.max_extractable_work(&params, g, qs.epsilon(), None)?.w_ext;
                let w_closed = minimize_w(&qs, &params)?.w_ext;
                Ok(ConvergeRow { g, w_oracle, w_closed, rel_dev: (w_oracle / w_closed - 1.0).abs() })
            })
            .collect::<Result<Vec<_>, CliError>>()
    })?;
    Ok((epsilon1, rows))
}

pub fn cmd_converge(cfg: &RunConfig) -> Result<Report, CliError> {
    let (epsilon1, rows) = converge_rows(cfg)?;
    let body = csv(
        &["g", "w_oracle", "w_closed", "rel_dev"],
        rows.iter().map(|r| [fmt_float(r.g), fmt_float(r.w_oracle), fmt_float(r.w_closed), fmt_float(r.rel_dev)]),
    )?;
    // With ε = 0 there is nothing to converge to.
    let violation =
        (epsilon1 > 0.0).then(|| rows.windows(2).find(|w| !(w[1].rel_dev < w[0].rel_dev))).flatten().map(|w| {
            format!(
                "rel_dev did not shrink from g = {} ({}) to g = {} ({})",
                w[0].g, w[0].rel_dev, w[1].g, w[1].rel_dev
            )
        });
    Ok(Report { body, violation })
}

pub fn cmd_classify(s: &Settings) -> Result<Report, CliError> {
    let name = s.family.as_deref().ok_or_else(|| CliError::Config("classify needs --family".into()))?;
    let family = EpsilonFamily::parse(name, s.c, s.r)?;
    Ok(Report::ok(json(&classify_regime(&family)?)?))
}

pub fn cmd_verify(cfg: &RunConfig) -> Result<Report, CliError> {
    let vc = VerifyConfig { seed: cfg.seed, draws: cfg.draws, exec: Exec::from_jobs(cfg.jobs) };
    let report = par::with_threads(cfg.jobs, || run_verify(&vc));
    let violation = (!report.all_passed()).then(|| {
        format!("{} lemma violations with seed {}; offending draws are listed above", report.violations(), cfg.seed)
    });
    Ok(Report { body: report.render(), violation })
}

pub fn cmd_efficiency(cfg: &RunConfig) -> Result<Report, CliError> {
    let report = check_conditions(cfg.alpha_star, &cfg.params()?)?;
    Ok(Report::ok(json(&report)?))
}
