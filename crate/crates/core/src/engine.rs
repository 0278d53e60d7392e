//! Heat-engine design and analysis: the ε₁ design rule that pins the
//! minimum of `W_α` at a chosen α*, its validity conditions, efficiencies,
//! the ΔS/W_ext regime classifier, and the no-go bound for
//! entropy-comparable failure probabilities.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numeric::{binary_entropy, bisect, brent_minimize, geomspace, serialize_extended};
use crate::quasistatic::{b_alpha, b_alpha_prime, delta_c, minimize_w, QuasiStaticConfig};
use crate::states::EngineParams;

/// Absolute tolerance for comparisons against the Carnot efficiency.
pub const ETA_TOL: f64 = 1e-9;

/// `ε₁(α*) = n(α*(α*−1)·B′_{α*} − B_{α*})`, which makes α* a stationary
/// point of `W_α`.
pub fn design_epsilon1(alpha_star: f64, params: &EngineParams) -> Result<f64> {
    if !(alpha_star.is_finite() && alpha_star >= 1.0) {
        return Err(domain(format!("alpha_star must be finite and >= 1, got {alpha_star}")));
    }
    let n = params.n() as f64;
    Ok(n * (alpha_star * (alpha_star - 1.0) * b_alpha_prime(alpha_star, params) - b_alpha(alpha_star, params)))
}

/// α* values on a 1e-3 grid over (1, 2) for which the designed ε₁ is positive.
pub fn positive_epsilon1_alphas(params: &EngineParams) -> Vec<f64> {
    (1..1000).map(|i| 1.0 + i as f64 * 1e-3).filter(|&a| design_epsilon1(a, params).is_ok_and(|e| e > 0.0)).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct DesignConditions {
    /// `E < 1/(2(β_c − β_h))`
    pub gap_small: bool,
    /// `E < (2/(β_c − β_h))·(1 + e^{β_c E})/(e^{β_c E} − 1)`
    pub eps1_positive: bool,
    /// `E < 1/(β_c − β_h)` with α* ∈ (1, 2)
    pub second_deriv_positive: bool,
    /// `α*·E < 1/(β_c − β_h)`
    pub below_w_infinity: bool,
}

impl DesignConditions {
    pub fn failed(&self) -> Vec<String> {
        [
            ("gap_small", self.gap_small),
            ("eps1_positive", self.eps1_positive),
            ("second_deriv_positive", self.second_deriv_positive),
            ("below_w_infinity", self.below_w_infinity),
        ]
        .into_iter()
        .filter(|(_, ok)| !ok)
        .map(|(name, _)| name.to_string())
        .collect()
    }

    pub fn all(&self) -> bool {
        self.gap_small && self.eps1_positive && self.second_deriv_positive && self.below_w_infinity
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct DesignReport {
    pub alpha_star: f64,
    pub epsilon1: f64,
    pub conditions: DesignConditions,
    /// Present only when every condition holds and ε₁ > 0.
    pub eta: Option<f64>,
    pub eta_carnot: f64,
}

impl DesignReport {
    pub fn ok(&self) -> bool {
        self.eta.is_some()
    }
}

pub fn check_conditions(alpha_star: f64, params: &EngineParams) -> Result<DesignReport> {
    let epsilon1 = design_epsilon1(alpha_star, params)?;
    let e = params.gap();
    let db = params.delta_beta();
    let c = params.beta_cold() * e;
    let conditions = DesignConditions {
        gap_small: e < 1.0 / (2.0 * db),
        // (1 + e^c)/(e^c − 1) = coth(c/2)
        eps1_positive: e < 2.0 / db / (0.5 * c).tanh(),
        second_deriv_positive: e < 1.0 / db && alpha_star > 1.0 && alpha_star < 2.0,
        below_w_infinity: alpha_star * e < 1.0 / db,
    };
    let eta = (conditions.all() && epsilon1 > 0.0).then(|| eta_formula(alpha_star, params));
    Ok(DesignReport { alpha_star, epsilon1, conditions, eta, eta_carnot: carnot(params) })
}

fn eta_formula(alpha_star: f64, params: &EngineParams) -> f64 {
    let ratio = b_alpha_prime(1.0, params) / b_alpha_prime(alpha_star, params);
    1.0 / (1.0 + params.beta_hot() / params.delta_beta() / (alpha_star * alpha_star) * ratio)
}

/// `η = 1/(1 + (β_h/(β_c−β_h))·(1/α*²)·(B′₁/B′_{α*}))`.
pub fn efficiency_quasistatic(alpha_star: f64, params: &EngineParams) -> Result<f64> {
    let report = check_conditions(alpha_star, params)?;
    if let Some(eta) = report.eta {
        return Ok(eta);
    }
    let mut failed = report.conditions.failed();
    if report.epsilon1 <= 0.0 {
        failed.push(format!("epsilon1 = {} is not positive", report.epsilon1));
    }
    Err(Error::Design(failed))
}

/// `η = 1/(1 − ε + ΔC/W_ext)`.
pub fn efficiency_from_components(epsilon: f64, delta_c: f64, w_ext: f64) -> Result<f64> {
    if !(w_ext > 0.0) {
        return Err(domain(format!("extracted work must be positive, got {w_ext}")));
    }
    Ok(1.0 / (1.0 - epsilon + delta_c / w_ext))
}

/// `η_C = 1 − β_h/β_c`.
pub fn carnot(params: &EngineParams) -> f64 {
    1.0 - params.beta_hot() / params.beta_cold()
}

/// Parametric failure-probability schedules ε(g).
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum EpsilonFamily {
    /// ε ≡ 0.
    Perfect,
    /// ε = c·g^r.
    Power { c: f64, r: f64 },
    /// ε·ln(1/ε) = c·g.
    LogLinear { c: f64 },
}

impl EpsilonFamily {
    /// Builds a family from its command-line name.
    pub fn parse(name: &str, c: Option<f64>, r: Option<f64>) -> Result<Self> {
        let positive = |label: &str, v: Option<f64>| match v {
            Some(x) if x.is_finite() && x > 0.0 => Ok(x),
            Some(x) => Err(domain(format!("{label} must be positive, got {x}"))),
            None => Err(domain(format!("family '{name}' needs --{label}"))),
        };
        let family = match name.to_ascii_lowercase().replace(['-', '_'], "").as_str() {
            "perfect" | "zero" => EpsilonFamily::Perfect,
            "power" => EpsilonFamily::Power { c: positive("c", c)?, r: positive("r", r)? },
            "loglinear" => EpsilonFamily::LogLinear { c: positive("c", c)? },
            _ => return Err(Error::UnsupportedFamily(name.to_string())),
        };
        Ok(family)
    }

    pub fn epsilon(&self, g: f64) -> Result<f64> {
        match *self {
            EpsilonFamily::Perfect => Ok(0.0),
            EpsilonFamily::Power { c, r } => Ok(c * g.powf(r)),
            EpsilonFamily::LogLinear { c } => solve_loglinear_epsilon(c * g),
        }
    }
}

/// Root of `ε·ln(1/ε) = target` on (0, 1/e), where the left side is increasing.
pub fn solve_loglinear_epsilon(target: f64) -> Result<f64> {
    let top = (-1f64).exp();
    if !(target > 0.0 && target < top) {
        return Err(Error::Solver(format!("epsilon ln(1/epsilon) = {target} has no root in (0, 1/e)")));
    }
    // Bisect in ln ε so tiny roots keep full relative precision.
    let ln_target = target.ln();
    let f = |x: f64| (-x).ln() + x - ln_target;
    let root = bisect(f, -800.0, -1.0, 1e-14)?;
    Ok(root.x.exp())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum WorkClass {
    Perfect,
    NearPerfect,
    ImperfectFinite,
    ImperfectDivergent,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct RegimeReport {
    #[serde(serialize_with = "serialize_extended")]
    pub kappa_bar: f64,
    #[serde(serialize_with = "serialize_extended")]
    pub sigma: f64,
    /// Limit of ΔS/W_ext, reported through its parameter-free
    /// characterization: 0, the finite `lim ε ln(1/ε)/g`, or ∞.
    #[serde(rename = "limit", serialize_with = "serialize_extended")]
    pub entropy_work_limit: f64,
    pub work_class: WorkClass,
}

/// Regime from the exponents of an ε(g) schedule: κ̄, σ and
/// `L = lim ε ln(1/ε)/g`.
pub fn classify_exponents(kappa_bar: f64, sigma: f64, entropy_rate: f64) -> RegimeReport {
    let (limit, class) = if kappa_bar < 1.0 {
        (0.0, WorkClass::NearPerfect)
    } else if kappa_bar > 1.0 || sigma > 0.0 || entropy_rate == f64::INFINITY {
        (f64::INFINITY, WorkClass::ImperfectDivergent)
    } else if entropy_rate == 0.0 {
        (0.0, WorkClass::NearPerfect)
    } else {
        (entropy_rate, WorkClass::ImperfectFinite)
    };
    RegimeReport { kappa_bar, sigma, entropy_work_limit: limit, work_class: class }
}

pub fn classify_regime(family: &EpsilonFamily) -> Result<RegimeReport> {
    Ok(match *family {
        EpsilonFamily::Perfect => {
            RegimeReport { kappa_bar: 0.0, sigma: 0.0, entropy_work_limit: 0.0, work_class: WorkClass::Perfect }
        }
        EpsilonFamily::Power { c, r } => {
            if !(c > 0.0 && r > 0.0 && c.is_finite() && r.is_finite()) {
                return Err(domain(format!("power family needs c, r > 0, got c = {c}, r = {r}")));
            }
            let kappa_bar = 1.0 / r;
            // ε ln(1/ε)/g ~ c r g^{r−1} ln(1/g)
            let rate = if r > 1.0 { 0.0 } else { f64::INFINITY };
            classify_exponents(kappa_bar, c.powf(kappa_bar), rate)
        }
        EpsilonFamily::LogLinear { c } => {
            if !(c > 0.0 && c.is_finite()) {
                return Err(domain(format!("log-linear family needs c > 0, got {c}")));
            }
            // ε/g = c/ln(1/ε) → 0
            classify_exponents(1.0, 0.0, c)
        }
    })
}

/// `ΔS/W_ext` with `ΔS = h₂(ε₁g)` and `W_ext` from [`minimize_w`], per `g`.
pub fn entropy_work_ratio(cfg: &QuasiStaticConfig, params: &EngineParams, g_list: &[f64]) -> Result<Vec<f64>> {
    g_list
        .iter()
        .map(|&g| {
            let at_g = QuasiStaticConfig::new(g, cfg.epsilon1())?;
            let w = minimize_w(&at_g, params)?.w_ext;
            Ok(binary_entropy(at_g.epsilon()) / w)
        })
        .collect()
}

/// Battery free-energy change `(1−ε)·W_ext − h₂(ε)/β_h`.
pub fn battery_free_energy_change(epsilon: f64, w_ext: f64, beta_hot: f64) -> Result<f64> {
    if !(0.0..1.0).contains(&epsilon) {
        return Err(domain(format!("failure probability must lie in [0, 1), got {epsilon}")));
    }
    if !(beta_hot > 0.0) {
        return Err(domain(format!("beta_hot must be positive, got {beta_hot}")));
    }
    Ok((1.0 - epsilon) * w_ext - binary_entropy(epsilon) / beta_hot)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BoundRow {
    pub g: f64,
    pub epsilon: f64,
    /// `(n·g/β_h)·B′₁`, the limit of `g·W̃_α` as α → 1⁺.
    pub w_bound: f64,
    pub delta_c: f64,
    /// Efficiency bound with `W_ext ≤ w_bound` and ε → 0.
    pub eta_bound: f64,
    /// `g·W̃₁`, including the `+c` entropy term.
    pub w_tilde_one: f64,
    /// Finite-g diagnostic: minimum of `g·W̃_α` over α > 1 with the ε terms kept.
    pub w_finite: f64,
    pub alpha_finite: f64,
    pub eta_finite: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EntropyComparableReport {
    pub c: f64,
    pub eta_carnot: f64,
    pub rows: Vec<BoundRow>,
}

/// `W̃_α = (αnB_α − ε^α/g + αε/g)/(β_h(α−1))` for α > 1.
fn w_tilde(alpha: f64, epsilon: f64, g: f64, params: &EngineParams) -> f64 {
    let n = params.n() as f64;
    let eps_pow_over_g = (alpha * epsilon.ln() - g.ln()).exp();
    (alpha * n * b_alpha(alpha, params) - eps_pow_over_g + alpha * epsilon / g) / (params.beta_hot() * (alpha - 1.0))
}

/// No-go bound for ε·ln(1/ε) = c·g: the extractable work is capped by
/// `(n·g/β_h)·B′₁` and the efficiency by η_C.
pub fn entropy_comparable_bound(params: &EngineParams, c: f64, g_list: &[f64]) -> Result<EntropyComparableReport> {
    if !(c > 0.0 && c.is_finite()) {
        return Err(domain(format!("c must be positive, got {c}")));
    }
    let eta_carnot = carnot(params);
    let n = params.n() as f64;
    let b1 = b_alpha_prime(1.0, params);
    let mut rows = Vec::with_capacity(g_list.len());
    for &g in g_list {
        let cfg = QuasiStaticConfig::new(g, 0.0)?;
        let epsilon = solve_loglinear_epsilon(c * g)?;
        let w_bound = n * g / params.beta_hot() * b1;
        let dc = delta_c(&cfg, params);
        let eta_bound = efficiency_from_components(0.0, dc, w_bound)?;
        if eta_bound > eta_carnot + ETA_TOL {
            return Err(Error::InvariantViolation(format!(
                "efficiency bound {eta_bound} exceeds Carnot {eta_carnot} at g = {g}"
            )));
        }

        let grid = geomspace(1.0 + 1e-6, 50.0, 2000);
        let (i_best, _) = grid
            .iter()
            .map(|&a| w_tilde(a, epsilon, g, params))
            .enumerate()
            .fold((0, f64::INFINITY), |best, (i, v)| if v < best.1 { (i, v) } else { best });
        let lo = grid[i_best.saturating_sub(1)];
        let hi = grid[(i_best + 1).min(grid.len() - 1)];
        let m = brent_minimize(|a| w_tilde(a, epsilon, g, params), lo, hi, 1e-12, 200);
        let w_finite = g * m.value;
        let eta_finite = efficiency_from_components(epsilon, dc, w_finite)?;

        rows.push(BoundRow {
            g,
            epsilon,
            w_bound,
            delta_c: dc,
            eta_bound,
            w_tilde_one: g * (n * b1 + c) / params.beta_hot(),
            w_finite,
            alpha_finite: m.x,
            eta_finite,
        });
    }
    Ok(EntropyComparableReport { c, eta_carnot, rows })
}
