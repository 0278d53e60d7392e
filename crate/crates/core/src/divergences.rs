//! α-Rényi divergences between energy-diagonal states and the generalized
//! free energies built from them.

use serde::{Serialize, Serializer};

use crate::error::{domain, Error, Result};
use crate::numeric::log_sum_exp;
use crate::states::{log_partition, thermal_state, DiagonalState};

/// α values within this distance of 1 use the relative-entropy branch.
pub const ALPHA_ONE_SNAP: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum AlphaValue {
    Zero,
    One,
    Infinity,
    General(f64),
}

impl AlphaValue {
    /// Classifies a raw α ≥ 0, snapping values near 1 to [`AlphaValue::One`].
    pub fn new(alpha: f64) -> Result<Self> {
        if alpha.is_nan() || alpha < 0.0 {
            return Err(domain(format!("alpha must be non-negative, got {alpha}")));
        }
        Ok(if alpha == 0.0 {
            AlphaValue::Zero
        } else if alpha == f64::INFINITY {
            AlphaValue::Infinity
        } else if (alpha - 1.0).abs() < ALPHA_ONE_SNAP {
            AlphaValue::One
        } else {
            AlphaValue::General(alpha)
        })
    }

    pub fn value(&self) -> f64 {
        match *self {
            AlphaValue::Zero => 0.0,
            AlphaValue::One => 1.0,
            AlphaValue::Infinity => f64::INFINITY,
            AlphaValue::General(a) => a,
        }
    }
}

impl Serialize for AlphaValue {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            AlphaValue::Infinity => s.serialize_str("inf"),
            other => s.serialize_f64(other.value()),
        }
    }
}

fn check_aligned(p: &DiagonalState, q: &DiagonalState) -> Result<()> {
    if p.is_aligned_with(q) {
        Ok(())
    } else {
        Err(Error::Alignment(format!(
            "states with {} and {} levels do not share energies and degeneracies",
            p.len(),
            q.len()
        )))
    }
}

/// `D_α(p‖q)` in nats. May be `+inf` when `p` is not dominated by `q`.
pub fn renyi_divergence(p: &DiagonalState, q: &DiagonalState, alpha: AlphaValue) -> Result<f64> {
    check_aligned(p, q)?;
    let levels = p.probs().iter().zip(q.probs()).zip(p.degeneracies()).filter(|((pi, _), _)| **pi > 0.0);

    match alpha {
        AlphaValue::Zero => {
            let terms: Vec<f64> =
                levels.filter(|((_, qi), _)| **qi > 0.0).map(|((_, qi), &d)| (d as f64).ln() + qi.ln()).collect();
            Ok(-log_sum_exp(&terms))
        }
        AlphaValue::One => {
            let mut sum = 0.0;
            for ((&pi, &qi), &d) in levels {
                if qi == 0.0 {
                    return Ok(f64::INFINITY);
                }
                sum += d as f64 * pi * (pi.ln() - qi.ln());
            }
            Ok(sum)
        }
        AlphaValue::Infinity => {
            let mut best = f64::NEG_INFINITY;
            for ((&pi, &qi), _) in levels {
                if qi == 0.0 {
                    return Ok(f64::INFINITY);
                }
                best = best.max(pi.ln() - qi.ln());
            }
            Ok(best)
        }
        AlphaValue::General(a) => {
            // term_i = ln(d p) + (1-α)(ln q - ln p)
            let mut mass = Vec::with_capacity(p.len());
            let mut exponent = Vec::with_capacity(p.len());
            for ((&pi, &qi), &d) in levels {
                if qi == 0.0 {
                    if a > 1.0 {
                        return Ok(f64::INFINITY);
                    }
                    continue;
                }
                mass.push(d as f64 * pi);
                exponent.push((1.0 - a) * (qi.ln() - pi.ln()));
            }
            let terms: Vec<f64> = mass.iter().zip(&exponent).map(|(m, x)| m.ln() + x).collect();
            let mut log_s = log_sum_exp(&terms);
            if log_s.abs() < 0.5 {
                // S - 1 accumulated directly keeps precision when α is near 1.
                let s_minus_one: f64 = mass.iter().zip(&exponent).map(|(m, x)| m * x.exp_m1()).sum::<f64>()
                    + (mass.iter().sum::<f64>() - 1.0);
                log_s = s_minus_one.ln_1p();
            }
            Ok(log_s / (a - 1.0))
        }
    }
}

/// `F_α(p, τ) = (D_α(p‖τ) − ln Z) / β_h`.
pub fn free_energy(
    p: &DiagonalState,
    tau_ref: &DiagonalState,
    alpha: AlphaValue,
    beta_hot: f64,
    log_z: f64,
) -> Result<f64> {
    if !(beta_hot.is_finite() && beta_hot > 0.0) {
        return Err(domain(format!("beta_hot must be positive, got {beta_hot}")));
    }
    Ok((renyi_divergence(p, tau_ref, alpha)? - log_z) / beta_hot)
}

/// Thermal reference at `beta` on `p`'s level set together with its `ln Z`.
pub fn thermal_reference(p: &DiagonalState, beta: f64) -> Result<(DiagonalState, f64)> {
    let tau = thermal_state(p.energies(), p.degeneracies(), beta)?;
    let log_z = log_partition(p.energies(), p.degeneracies(), beta);
    Ok((tau, log_z))
}
