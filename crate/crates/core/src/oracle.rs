//! Brute-force work oracle: feasibility of a transition under every
//! generalized second law on an α grid, and the largest battery gap that
//! stays feasible, found by bisection.

use serde::Serialize;

use crate::divergences::{renyi_divergence, AlphaValue};
use crate::error::{domain, Error, Result};
use crate::numeric::{brent_minimize, geomspace};
use crate::par::{self, Exec};
use crate::states::{battery_pair, n_qubit_bath, tensor, thermal_state, DiagonalState, EngineParams};

pub const DEFAULT_GRID_POINTS: usize = 400;
pub const DEFAULT_TOL: f64 = 1e-12;
pub const DEFAULT_SLACK_TOL: f64 = 1e-13;
const AUDIT_SAMPLES: usize = 8;

/// `{0} ∪ geomspace(1e-3, 50, points) ∪ {1, ∞}`.
pub fn alpha_grid(points: usize) -> Vec<AlphaValue> {
    let mut grid = vec![AlphaValue::Zero, AlphaValue::One];
    grid.extend(
        geomspace(1e-3, 50.0, points.max(2)).into_iter().map(|a| AlphaValue::new(a).expect("grid values are positive")),
    );
    grid.push(AlphaValue::Infinity);
    grid
}

pub fn default_alpha_grid() -> Vec<AlphaValue> {
    alpha_grid(DEFAULT_GRID_POINTS)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct FeasibilityReport {
    pub feasible: bool,
    pub worst_alpha: AlphaValue,
    /// `F_α(initial) − F_α(final)` at `worst_alpha`.
    pub min_slack: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct WorkResult {
    pub w_ext: f64,
    pub achieved_epsilon: f64,
    pub alpha_binding: AlphaValue,
    pub bisection_iters: usize,
}

/// Oracle settings. The default uses the 400-point grid, `tol = 1e-12`,
/// slack tolerance `1e-13`, local refinement of the binding α, and the
/// parallel executor.
#[derive(Debug, Clone)]
pub struct Oracle {
    pub alpha_grid: Vec<AlphaValue>,
    pub tol: f64,
    pub slack_tol: f64,
    pub refine: bool,
    pub exec: Exec,
}

impl Default for Oracle {
    fn default() -> Self {
        Self {
            alpha_grid: default_alpha_grid(),
            tol: DEFAULT_TOL,
            slack_tol: DEFAULT_SLACK_TOL,
            refine: true,
            exec: Exec::default(),
        }
    }
}

impl Oracle {
    pub fn with_grid(alpha_grid: Vec<AlphaValue>) -> Self {
        Self { alpha_grid, ..Self::default() }
    }

    pub fn feasibility(
        &self,
        initial: &DiagonalState,
        final_: &DiagonalState,
        beta_hot: f64,
    ) -> Result<FeasibilityReport> {
        if !initial.is_aligned_with(final_) {
            return Err(Error::Alignment("initial and final states live on different level sets".into()));
        }
        if self.alpha_grid.is_empty() {
            return Err(domain("alpha grid is empty"));
        }
        let tau = thermal_state(initial.energies(), initial.degeneracies(), beta_hot)?;
        let slack = |alpha: AlphaValue| -> Result<f64> {
            let d_init = renyi_divergence(initial, &tau, alpha)?;
            let d_final = renyi_divergence(final_, &tau, alpha)?;
            Ok(if d_init == d_final { 0.0 } else { (d_init - d_final) / beta_hot })
        };

        let slacks = par::map(self.exec, &self.alpha_grid, |&a| slack(a));
        let mut worst = (self.alpha_grid[0], f64::INFINITY);
        for (&alpha, s) in self.alpha_grid.iter().zip(slacks) {
            let s = s?;
            if s.is_nan() {
                return Err(domain(format!("slack is NaN at alpha = {}", alpha.value())));
            }
            if s < worst.1 {
                worst = (alpha, s);
            }
        }

        if self.refine {
            if let Some(better) = self.refine_worst(worst.0, slack)? {
                if better.1 < worst.1 {
                    worst = better;
                }
            }
        }

        Ok(FeasibilityReport { feasible: worst.1 >= -self.slack_tol, worst_alpha: worst.0, min_slack: worst.1 })
    }

    /// Brent search for a lower slack between the grid neighbours of a
    /// finite, positive binding α.
    fn refine_worst(
        &self,
        worst: AlphaValue,
        slack: impl Fn(AlphaValue) -> Result<f64>,
    ) -> Result<Option<(AlphaValue, f64)>> {
        if matches!(worst, AlphaValue::Zero | AlphaValue::Infinity) {
            return Ok(None);
        }
        let mut finite: Vec<f64> =
            self.alpha_grid.iter().map(AlphaValue::value).filter(|a| a.is_finite() && *a > 0.0).collect();
        finite.sort_by(f64::total_cmp);
        finite.dedup();
        let Some(idx) = finite.iter().position(|&a| a == worst.value()) else {
            return Ok(None);
        };
        let lo = finite[idx.saturating_sub(1)];
        let hi = finite[(idx + 1).min(finite.len() - 1)];
        if hi <= lo {
            return Ok(None);
        }
        let mut failure = None;
        let mut objective = |a: f64| match AlphaValue::new(a).and_then(&slack) {
            Ok(s) => s,
            Err(e) => {
                failure.get_or_insert(e);
                f64::INFINITY
            }
        };
        let m = brent_minimize(&mut objective, lo, hi, 1e-10 * hi, 200);
        if let Some(e) = failure {
            return Err(e);
        }
        Ok(Some((AlphaValue::new(m.x)?, m.value)))
    }

    /// Largest battery gap `w` such that
    /// `τ_{β_c}^{⊗n} ⊗ |0⟩⟨0| → τ_{β_c−g}^{⊗n} ⊗ (ε|0⟩⟨0| + (1−ε)|w⟩⟨w|)` is feasible.
    pub fn max_extractable_work(
        &self,
        params: &EngineParams,
        g: f64,
        epsilon: f64,
        w_bracket: Option<(f64, f64)>,
    ) -> Result<WorkResult> {
        if !(g.is_finite() && g >= 0.0 && g < params.beta_cold()) {
            return Err(domain(format!("need 0 <= g < beta_cold, got g = {g}")));
        }
        if !(0.0..1.0).contains(&epsilon) {
            return Err(domain(format!("failure probability must lie in [0, 1), got {epsilon}")));
        }
        if !(self.tol > 0.0) {
            return Err(domain("bisection tolerance must be positive"));
        }
        let cold = n_qubit_bath(params, params.beta_cold())?;
        let heated = n_qubit_bath(params, params.beta_cold() - g)?;
        let beta = params.beta_hot();
        let check = |w: f64| -> Result<FeasibilityReport> {
            let (b0, b1) = battery_pair(0.0, w, epsilon);
            self.feasibility(&tensor(&cold, &b0)?, &tensor(&heated, &b1)?, beta)
        };

        if epsilon == 0.0 {
            // The α = 0 law forbids any w > 0; confirm at the resolution limit.
            let probe = check(self.tol)?;
            if probe.feasible {
                return Err(Error::InvariantViolation(format!("perfect work of {} was reported feasible", self.tol)));
            }
            return Ok(WorkResult {
                w_ext: 0.0,
                achieved_epsilon: 0.0,
                alpha_binding: probe.worst_alpha,
                bisection_iters: 0,
            });
        }

        let (mut lo, mut hi) = w_bracket.unwrap_or_else(|| default_bracket(params, g, epsilon));
        if !(lo.is_finite() && hi.is_finite() && 0.0 <= lo && lo < hi) {
            return Err(Error::Bracket { low: lo, high: hi, reason: "need 0 <= low < high".into() });
        }
        if !check(lo)?.feasible {
            return Err(Error::Bracket { low: lo, high: hi, reason: "low end is infeasible".into() });
        }
        let mut binding = check(hi)?;
        if binding.feasible {
            return Err(Error::Bracket { low: lo, high: hi, reason: "high end is feasible".into() });
        }

        // Endpoint audit: interior samples must switch from feasible to
        // infeasible exactly once.
        let samples: Vec<f64> =
            (1..=AUDIT_SAMPLES).map(|i| lo + (hi - lo) * i as f64 / (AUDIT_SAMPLES + 1) as f64).collect();
        let mut seen_infeasible = false;
        for &w in &samples {
            let ok = check(w)?.feasible;
            if ok && seen_infeasible {
                return Err(Error::Monotonicity { w });
            }
            seen_infeasible |= !ok;
        }

        let mut iters = 0;
        while hi - lo > self.tol {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let report = check(mid)?;
            iters += 1;
            if report.feasible {
                lo = mid;
            } else {
                hi = mid;
                binding = report;
            }
        }
        Ok(WorkResult {
            w_ext: lo,
            achieved_epsilon: epsilon,
            alpha_binding: binding.worst_alpha,
            bisection_iters: iters,
        })
    }
}

/// `(0, ln(1/(1−ε))/β_h + 10·n·g·E)`.
pub fn default_bracket(params: &EngineParams, g: f64, epsilon: f64) -> (f64, f64) {
    let battery = -(-epsilon).ln_1p() / params.beta_hot();
    (0.0, battery + 10.0 * params.n() as f64 * g * params.gap())
}

/// Feasibility with the default oracle settings.
pub fn transition_feasible(
    initial: &DiagonalState,
    final_: &DiagonalState,
    beta_hot: f64,
    alpha_grid: &[AlphaValue],
) -> Result<FeasibilityReport> {
    Oracle::with_grid(alpha_grid.to_vec()).feasibility(initial, final_, beta_hot)
}

pub fn max_extractable_work(
    params: &EngineParams,
    g: f64,
    epsilon: f64,
    w_bracket: Option<(f64, f64)>,
    tol: f64,
    alpha_grid: &[AlphaValue],
) -> Result<WorkResult> {
    Oracle { tol, ..Oracle::with_grid(alpha_grid.to_vec()) }.max_extractable_work(params, g, epsilon, w_bracket)
}
