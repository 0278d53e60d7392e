//! Quasi-static closed forms for a cold bath of `n` identical qubits:
//! `B_α` and its α-derivatives, the work family `W_α` with its α → 1 and
//! α → ∞ limits, and the search for the infimum over α.
//!
//! With `a = β_h E`, `c = β_c E`, `k = (β_c − β_h)E` and `u = a + αk`,
//! `B_α = E(σ(u) − σ(c))`, which is how every quantity here is evaluated.

use serde::Serialize;

use crate::divergences::AlphaValue;
use crate::error::{domain, Error, Result};
use crate::numeric::{bisect, brent_minimize, geomspace, log_sum_exp, sigmoid};
use crate::oracle::WorkResult;
use crate::par::{self, Exec};
use crate::states::{DiagonalState, EngineParams};

pub const MAX_G: f64 = 0.1;
pub const DEFAULT_SCAN_POINTS: usize = 4000;
pub const DEFAULT_WINDOW: (f64, f64) = (1.0 + 1e-4, 50.0);
const ROOT_XTOL: f64 = 1e-10;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct QuasiStaticConfig {
    g: f64,
    epsilon1: f64,
}

impl QuasiStaticConfig {
    pub fn new(g: f64, epsilon1: f64) -> Result<Self> {
        if !(g > 0.0 && g <= MAX_G) {
            return Err(domain(format!("quasi-static parameter must lie in (0, {MAX_G}], got {g}")));
        }
        if !(epsilon1.is_finite() && epsilon1 >= 0.0) {
            return Err(domain(format!("epsilon1 must be finite and non-negative, got {epsilon1}")));
        }
        Ok(Self { g, epsilon1 })
    }

    pub fn g(&self) -> f64 {
        self.g
    }

    pub fn epsilon1(&self) -> f64 {
        self.epsilon1
    }

    /// Failure probability `ε = ε₁·g`.
    pub fn epsilon(&self) -> f64 {
        self.epsilon1 * self.g
    }
}

fn u_of(alpha: f64, p: &EngineParams) -> f64 {
    p.beta_hot() * p.gap() + alpha * p.delta_beta() * p.gap()
}

/// `σ(u)σ(−u)`
fn phi(u: f64) -> f64 {
    sigmoid(u) * sigmoid(-u)
}

pub fn b_alpha(alpha: f64, params: &EngineParams) -> f64 {
    let e = params.gap();
    let k = params.delta_beta() * e;
    let u = u_of(alpha, params);
    // E σ(−c) (1 − e^{−(α−1)k}) σ(u)
    e * sigmoid(-params.beta_cold() * e) * -(-(alpha - 1.0) * k).exp_m1() * sigmoid(u)
}

/// `B_∞ = E / (1 + e^{β_c E})`.
pub fn b_infinity(params: &EngineParams) -> f64 {
    params.gap() * sigmoid(-params.beta_cold() * params.gap())
}

pub fn b_alpha_prime(alpha: f64, params: &EngineParams) -> f64 {
    let e = params.gap();
    e * e * params.delta_beta() * phi(u_of(alpha, params))
}

pub fn b_alpha_double_prime(alpha: f64, params: &EngineParams) -> f64 {
    let e = params.gap();
    let u = u_of(alpha, params);
    // 1 − 2σ(u) = −tanh(u/2)
    e.powi(3) * params.delta_beta().powi(2) * phi(u) * -(0.5 * u).tanh()
}

/// General-spectrum `B_α` for one cold subsystem: the `p^α q^{1−α}`-weighted
/// mean of `⟨H⟩_{β_c} − E_i`.
pub fn b_alpha_general(alpha: f64, single_system: &DiagonalState, reference: &DiagonalState) -> Result<f64> {
    if !single_system.is_aligned_with(reference) {
        return Err(Error::Alignment("cold subsystem and reference differ in level set".into()));
    }
    if !(alpha.is_finite() && alpha > 0.0) {
        return Err(domain(format!("alpha must be finite and positive, got {alpha}")));
    }
    let mean = single_system.mean_energy();
    let mut log_w = Vec::with_capacity(single_system.len());
    let mut dev = Vec::with_capacity(single_system.len());
    for (((&p, &q), &d), &e) in single_system
        .probs()
        .iter()
        .zip(reference.probs())
        .zip(single_system.degeneracies())
        .zip(single_system.energies())
    {
        if p == 0.0 || q == 0.0 {
            continue;
        }
        log_w.push((d as f64).ln() + alpha * p.ln() + (1.0 - alpha) * q.ln());
        dev.push(mean - e);
    }
    let norm = log_sum_exp(&log_w);
    Ok(log_w.iter().zip(&dev).map(|(lw, dv)| (lw - norm).exp() * dv).sum())
}

fn require_above_one(alpha: f64) -> Result<()> {
    if alpha.is_finite() && alpha > 1.0 {
        Ok(())
    } else {
        Err(domain(format!("alpha must be finite and > 1, got {alpha}")))
    }
}

/// `W_α = (α·n·g·B_α − ε^α + α·ε) / (β_h(α − 1))`.
pub fn w_alpha(alpha: f64, cfg: &QuasiStaticConfig, params: &EngineParams) -> Result<f64> {
    require_above_one(alpha)?;
    let n = params.n() as f64;
    let eps = cfg.epsilon();
    let num = alpha * n * cfg.g * b_alpha(alpha, params) - eps.powf(alpha) + alpha * eps;
    Ok(num / (params.beta_hot() * (alpha - 1.0)))
}

/// `W_α` without the `ε^α` term: the function whose α-derivatives are
/// [`dw_dalpha`] and [`d2w_dalpha2`].
pub fn w_alpha_leading(alpha: f64, cfg: &QuasiStaticConfig, params: &EngineParams) -> Result<f64> {
    require_above_one(alpha)?;
    let n = params.n() as f64;
    let num = alpha * (n * b_alpha(alpha, params) + cfg.epsilon1);
    Ok(cfg.g * num / (params.beta_hot() * (alpha - 1.0)))
}

/// α → 1⁺ limit of [`w_alpha`]: `(g/β_h)(n·B′₁ − ε₁ ln(ε₁g) + ε₁)`.
pub fn w_one(cfg: &QuasiStaticConfig, params: &EngineParams) -> f64 {
    cfg.g * w_one_over_g(cfg.g.ln(), cfg.epsilon1, params)
}

/// `W₁/g` as a function of `ln g`, usable where `g` itself would underflow.
pub(crate) fn w_one_over_g(ln_g: f64, epsilon1: f64, params: &EngineParams) -> f64 {
    let n = params.n() as f64;
    let entropy = if epsilon1 > 0.0 { -epsilon1 * (epsilon1.ln() + ln_g) + epsilon1 } else { 0.0 };
    (n * b_alpha_prime(1.0, params) + entropy) / params.beta_hot()
}

/// `(g/β_h)(n·E/(1 + e^{β_c E}) + ε₁)`.
pub fn w_infinity(cfg: &QuasiStaticConfig, params: &EngineParams) -> f64 {
    cfg.g * w_infinity_over_g(cfg.epsilon1, params)
}

pub(crate) fn w_infinity_over_g(epsilon1: f64, params: &EngineParams) -> f64 {
    (params.n() as f64 * b_infinity(params) + epsilon1) / params.beta_hot()
}

/// `α(α−1)·n·B′_α − n·B_α − ε₁`, the bracket that sets the sign of `dW/dα`.
pub(crate) fn stationarity(alpha: f64, epsilon1: f64, params: &EngineParams) -> f64 {
    let n = params.n() as f64;
    alpha * (alpha - 1.0) * n * b_alpha_prime(alpha, params) - n * b_alpha(alpha, params) - epsilon1
}

pub fn dw_dalpha(alpha: f64, cfg: &QuasiStaticConfig, params: &EngineParams) -> Result<f64> {
    require_above_one(alpha)?;
    let scale = cfg.g / (params.beta_hot() * (alpha - 1.0).powi(2));
    Ok(scale * stationarity(alpha, cfg.epsilon1, params))
}

pub fn d2w_dalpha2(alpha: f64, cfg: &QuasiStaticConfig, params: &EngineParams) -> Result<f64> {
    require_above_one(alpha)?;
    let n = params.n() as f64;
    let am1 = alpha - 1.0;
    let curvature = n * am1 * am1 * (2.0 * b_alpha_prime(alpha, params) + alpha * b_alpha_double_prime(alpha, params));
    let h = stationarity(alpha, cfg.epsilon1, params);
    Ok(cfg.g / (params.beta_hot() * am1.powi(3)) * (curvature - 2.0 * h))
}

/// `f′(α) = 2α − 2 + B·B″/B′² + ε₁·B″/(n·B′²)`, strictly concave on (1, ∞).
pub fn f_prime(alpha: f64, epsilon1: f64, params: &EngineParams) -> f64 {
    let n = params.n() as f64;
    let b = b_alpha(alpha, params);
    let b1 = b_alpha_prime(alpha, params);
    let b2 = b_alpha_double_prime(alpha, params);
    2.0 * alpha - 2.0 + (b + epsilon1 / n) * b2 / (b1 * b1)
}

/// Leading-order cold-bath heat uptake `n·B′₁·g/(β_c − β_h)`.
pub fn delta_c(cfg: &QuasiStaticConfig, params: &EngineParams) -> f64 {
    params.n() as f64 * b_alpha_prime(1.0, params) * cfg.g / params.delta_beta()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum StationaryKind {
    Minimum,
    Maximum,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct StationaryPoint {
    pub alpha: f64,
    pub kind: StationaryKind,
}

/// Sign changes of `dW/dα`, without the lemma checks.
pub(crate) fn locate_stationary(
    epsilon1: f64,
    params: &EngineParams,
    window: (f64, f64),
    points: usize,
    exec: Exec,
) -> Result<Vec<StationaryPoint>> {
    let (lo, hi) = window;
    if !(lo > 1.0 && hi >= 10.0 && hi > lo && points >= 2) {
        return Err(domain(format!("invalid scan window ({lo}, {hi}) with {points} points")));
    }
    let grid = geomspace(lo, hi, points);
    // An exact zero counts as positive, so a touching zero is not a crossing.
    let negative = par::map(exec, &grid, |&a| stationarity(a, epsilon1, params) < 0.0);
    let mut found = Vec::new();
    for i in 0..grid.len() - 1 {
        if negative[i] == negative[i + 1] {
            continue;
        }
        let root = bisect(|a| stationarity(a, epsilon1, params), grid[i], grid[i + 1], ROOT_XTOL)?;
        let kind = if negative[i] { StationaryKind::Minimum } else { StationaryKind::Maximum };
        found.push(StationaryPoint { alpha: root.x, kind });
    }
    Ok(found)
}

fn scan_stationary(
    epsilon1: f64,
    params: &EngineParams,
    window: (f64, f64),
    points: usize,
    exec: Exec,
) -> Result<Vec<StationaryPoint>> {
    let found = locate_stationary(epsilon1, params, window, points, exec)?;
    if found.len() > 3 {
        return Err(Error::InvariantViolation(format!(
            "{} stationary points of W_alpha found at {:?}",
            found.len(),
            found.iter().map(|p| p.alpha).collect::<Vec<_>>()
        )));
    }
    let minima = found.iter().filter(|p| p.kind == StationaryKind::Minimum).count();
    if minima > 1 {
        return Err(Error::InvariantViolation(format!("{minima} local minima of W_alpha")));
    }
    Ok(found)
}

/// Stationary points of `W_α` in the window, classified as minima or maxima.
pub fn stationary_points(
    cfg: &QuasiStaticConfig,
    params: &EngineParams,
    window: (f64, f64),
    points: usize,
    exec: Exec,
) -> Result<Vec<StationaryPoint>> {
    scan_stationary(cfg.epsilon1, params, window, points, exec)
}

/// Roots of `dW/dα` on `window` from a 4000-point geometric scan refined by
/// bisection to 1e-10.
pub fn find_stationary_points(cfg: &QuasiStaticConfig, params: &EngineParams, window: (f64, f64)) -> Result<Vec<f64>> {
    Ok(stationary_points(cfg, params, window, DEFAULT_SCAN_POINTS, Exec::default())?
        .into_iter()
        .map(|p| p.alpha)
        .collect())
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlphaCurve {
    pub alphas: Vec<f64>,
    pub w_values: Vec<f64>,
    pub stationary_points: Vec<f64>,
}

pub fn alpha_curve(cfg: &QuasiStaticConfig, params: &EngineParams, alphas: &[f64]) -> Result<AlphaCurve> {
    let mut sorted = alphas.to_vec();
    sorted.sort_by(f64::total_cmp);
    let w_values = sorted.iter().map(|&a| w_alpha(a, cfg, params)).collect::<Result<Vec<_>>>()?;
    let stationary_points = find_stationary_points(cfg, params, DEFAULT_WINDOW)?;
    Ok(AlphaCurve { alphas: sorted, w_values, stationary_points })
}

/// Infimum of `W_α` over α ∈ (1, ∞) with the default scan.
pub fn minimize_w(cfg: &QuasiStaticConfig, params: &EngineParams) -> Result<WorkResult> {
    minimize_w_with(cfg, params, DEFAULT_SCAN_POINTS)
}

/// The candidates are the α → ∞ limit, the α → 1⁺ limit, and the unique
/// local minimum (if any). The stationary structure comes from the leading
/// part of `W_α`; the `−ε^α` term shifts the minimum slightly, so it is
/// re-located by a Brent search on the full `W_α` between the neighbouring
/// stationary points.
pub fn minimize_w_with(cfg: &QuasiStaticConfig, params: &EngineParams, points: usize) -> Result<WorkResult> {
    let stationary = scan_stationary(cfg.epsilon1, params, DEFAULT_WINDOW, points, Exec::Sequential)?;
    let mut best = (AlphaValue::Infinity, w_infinity(cfg, params));
    let one = w_one(cfg, params);
    if one < best.1 {
        best = (AlphaValue::One, one);
    }
    for (j, p) in stationary.iter().enumerate() {
        if p.kind != StationaryKind::Minimum {
            continue;
        }
        let lo = if j > 0 { stationary[j - 1].alpha } else { DEFAULT_WINDOW.0 };
        let hi = stationary.get(j + 1).map_or(DEFAULT_WINDOW.1, |q| q.alpha);
        let mut failure = None;
        let m = brent_minimize(
            |a| {
                w_alpha(a, cfg, params).unwrap_or_else(|e| {
                    failure.get_or_insert(e);
                    f64::INFINITY
                })
            },
            lo,
            hi,
            1e-12,
            500,
        );
        if let Some(e) = failure {
            return Err(e);
        }
        let at_stationary = w_alpha(p.alpha, cfg, params)?;
        let (alpha, w) = if m.value <= at_stationary { (m.x, m.value) } else { (p.alpha, at_stationary) };
        if w < best.1 {
            best = (AlphaValue::new(alpha)?, w);
        }
    }
    Ok(WorkResult { w_ext: best.1, achieved_epsilon: cfg.epsilon(), alpha_binding: best.0, bisection_iters: 0 })
}
