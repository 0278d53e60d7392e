//! Energy-diagonal states of the engine: thermal states, the compressed
//! n-qubit cold bath, and the two-level battery.
//!
//! Probabilities are stored per microstate. A level with degeneracy `d`
//! and probability `p` carries total mass `d·p`.

use serde::Serialize;

use crate::error::{domain, Error, Result};
use crate::numeric::{log_sum_exp, softplus};

/// Absolute tolerance on `Σ d·p = 1`.
pub const NORMALIZATION_TOL: f64 = 1e-12;

/// Largest level count [`tensor`] will build.
pub const DEFAULT_MAX_LEVELS: usize = 1 << 22;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DiagonalState {
    probs: Vec<f64>,
    energies: Vec<f64>,
    degeneracies: Vec<u64>,
}

impl DiagonalState {
    pub fn new(probs: Vec<f64>, energies: Vec<f64>, degeneracies: Vec<u64>) -> Result<Self> {
        if probs.is_empty() || probs.len() != energies.len() || probs.len() != degeneracies.len() {
            return Err(domain(format!(
                "probs/energies/degeneracies lengths {}/{}/{} must be equal and non-zero",
                probs.len(),
                energies.len(),
                degeneracies.len()
            )));
        }
        if let Some(e) = energies.iter().find(|e| !e.is_finite()) {
            return Err(domain(format!("non-finite energy {e}")));
        }
        if let Some(p) = probs.iter().find(|p| !(p.is_finite() && **p >= 0.0)) {
            return Err(domain(format!("invalid probability {p}")));
        }
        if degeneracies.contains(&0) {
            return Err(domain("degeneracies must be positive"));
        }
        let total: f64 = probs.iter().zip(&degeneracies).map(|(p, &d)| d as f64 * p).sum();
        if (total - 1.0).abs() > NORMALIZATION_TOL {
            return Err(domain(format!("state is not normalized: Σ d·p = {total}")));
        }
        Ok(Self { probs, energies, degeneracies })
    }

    /// Non-degenerate state.
    pub fn from_probs(probs: Vec<f64>, energies: Vec<f64>) -> Result<Self> {
        let degeneracies = vec![1; probs.len()];
        Self::new(probs, energies, degeneracies)
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn degeneracies(&self) -> &[u64] {
        &self.degeneracies
    }

    pub fn len(&self) -> usize {
        self.probs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.probs.is_empty()
    }

    pub fn microstates(&self) -> u128 {
        self.degeneracies.iter().map(|&d| d as u128).sum()
    }

    /// `(energy, d·p)` per listed level.
    pub fn level_masses(&self) -> Vec<(f64, f64)> {
        self.energies.iter().zip(&self.probs).zip(&self.degeneracies).map(|((&e, &p), &d)| (e, d as f64 * p)).collect()
    }

    pub fn mean_energy(&self) -> f64 {
        self.level_masses().iter().map(|(e, m)| e * m).sum()
    }

    /// Shannon entropy in nats over microstates.
    pub fn entropy(&self) -> f64 {
        self.probs
            .iter()
            .zip(&self.degeneracies)
            .filter(|(p, _)| **p > 0.0)
            .map(|(&p, &d)| -(d as f64) * p * p.ln())
            .sum()
    }

    /// Same energies and degeneracies, entry by entry.
    pub fn is_aligned_with(&self, other: &DiagonalState) -> bool {
        self.len() == other.len()
            && self.degeneracies == other.degeneracies
            && self
                .energies
                .iter()
                .zip(&other.energies)
                .all(|(a, b)| (a - b).abs() <= 1e-12 * (1.0 + a.abs().max(b.abs())))
    }
}

/// Physical configuration: hot/cold inverse temperatures and a cold bath of
/// `n` identical qubits with gap `gap`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EngineParams {
    beta_hot: f64,
    beta_cold: f64,
    gap: f64,
    n: u32,
}

impl EngineParams {
    pub fn new(beta_hot: f64, beta_cold: f64, gap: f64, n: u32) -> Result<Self> {
        if !(beta_hot.is_finite() && beta_cold.is_finite() && beta_hot > 0.0 && beta_cold > beta_hot) {
            return Err(domain(format!(
                "need 0 < beta_hot < beta_cold, got beta_hot = {beta_hot}, beta_cold = {beta_cold}"
            )));
        }
        if !(gap.is_finite() && gap > 0.0) {
            return Err(domain(format!("gap must be positive, got {gap}")));
        }
        if n == 0 {
            return Err(domain("qubit count must be at least 1"));
        }
        Ok(Self { beta_hot, beta_cold, gap, n })
    }

    /// β_h = 1, β_c = 10, E = 0.4/(β_c − β_h).
    pub fn theorem1(n: u32) -> Self {
        Self { beta_hot: 1.0, beta_cold: 10.0, gap: 0.4 / 9.0, n }
    }

    pub fn beta_hot(&self) -> f64 {
        self.beta_hot
    }

    pub fn beta_cold(&self) -> f64 {
        self.beta_cold
    }

    pub fn gap(&self) -> f64 {
        self.gap
    }

    pub fn n(&self) -> u32 {
        self.n
    }

    pub fn delta_beta(&self) -> f64 {
        self.beta_cold - self.beta_hot
    }
}

/// Two-level battery `(e_low, e_low + w)` with failure probability `epsilon`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct BatterySpec {
    pub(crate) e_low: f64,
    pub(crate) w: f64,
    pub(crate) epsilon: f64,
}

impl BatterySpec {
    pub fn new(e_low: f64, w: f64, epsilon: f64) -> Result<Self> {
        if !e_low.is_finite() {
            return Err(domain(format!("battery ground level must be finite, got {e_low}")));
        }
        if !(w.is_finite() && w > 0.0) {
            return Err(domain(format!("battery gap must be positive, got {w}")));
        }
        if !(0.0..1.0).contains(&epsilon) {
            return Err(domain(format!("failure probability must lie in [0, 1), got {epsilon}")));
        }
        Ok(Self { e_low, w, epsilon })
    }

    pub fn e_low(&self) -> f64 {
        self.e_low
    }

    pub fn w(&self) -> f64 {
        self.w
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }
}

/// `ln Z = ln Σ d_i e^{-β E_i}`.
pub fn log_partition(energies: &[f64], degeneracies: &[u64], beta: f64) -> f64 {
    let terms: Vec<f64> = energies.iter().zip(degeneracies).map(|(&e, &d)| (d as f64).ln() - beta * e).collect();
    log_sum_exp(&terms)
}

pub fn thermal_state(energies: &[f64], degeneracies: &[u64], beta: f64) -> Result<DiagonalState> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(domain(format!("inverse temperature must be finite and non-negative, got {beta}")));
    }
    if let Some(e) = energies.iter().find(|e| !e.is_finite()) {
        return Err(domain(format!("non-finite energy {e}")));
    }
    if energies.len() != degeneracies.len() {
        return Err(domain("energies and degeneracies differ in length"));
    }
    let log_z = log_partition(energies, degeneracies, beta);
    let probs = energies.iter().map(|&e| (-beta * e - log_z).exp()).collect();
    DiagonalState::new(probs, energies.to_vec(), degeneracies.to_vec())
}

fn binomials(n: u32) -> Result<Vec<u64>> {
    if n > 63 {
        return Err(Error::Size(format!("{n} qubits exceed the 2^63 microstate limit")));
    }
    let mut out = Vec::with_capacity(n as usize + 1);
    let mut c: u128 = 1;
    for k in 0..=n as u128 {
        out.push(u64::try_from(c).map_err(|_| Error::Size(format!("binomial({n}, {k}) overflows")))?);
        c = c * (n as u128 - k) / (k + 1);
    }
    Ok(out)
}

/// Product thermal state of `n` qubits at `beta`, compressed to `n + 1`
/// levels `k·E` with binomial degeneracies.
pub fn n_qubit_bath(params: &EngineParams, beta: f64) -> Result<DiagonalState> {
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(domain(format!("inverse temperature must be finite and non-negative, got {beta}")));
    }
    let n = params.n;
    let gap = params.gap;
    let degeneracies = binomials(n)?;
    // ln p0 = -ln(1 + e^{-βE}), ln p1 = -βE + ln p0
    let ln_p0 = -softplus(-beta * gap);
    let ln_p1 = -beta * gap + ln_p0;
    let probs = (0..=n).map(|k| (k as f64 * ln_p1 + (n - k) as f64 * ln_p0).exp()).collect();
    let energies = (0..=n).map(|k| k as f64 * gap).collect();
    DiagonalState::new(probs, energies, degeneracies)
}

pub(crate) fn battery_pair(e_low: f64, w: f64, epsilon: f64) -> (DiagonalState, DiagonalState) {
    let energies = vec![e_low, e_low + w];
    let initial = DiagonalState { probs: vec![1.0, 0.0], energies: energies.clone(), degeneracies: vec![1, 1] };
    let final_ = DiagonalState { probs: vec![epsilon, 1.0 - epsilon], energies, degeneracies: vec![1, 1] };
    (initial, final_)
}

/// Pure ground level `|E_j⟩⟨E_j|`.
pub fn battery_state_initial(spec: &BatterySpec) -> DiagonalState {
    battery_pair(spec.e_low, spec.w, spec.epsilon).0
}

/// `ε|E_j⟩⟨E_j| + (1 − ε)|E_k⟩⟨E_k|`.
pub fn battery_state_final(spec: &BatterySpec) -> DiagonalState {
    battery_pair(spec.e_low, spec.w, spec.epsilon).1
}

pub fn tensor(a: &DiagonalState, b: &DiagonalState) -> Result<DiagonalState> {
    tensor_with_cap(a, b, DEFAULT_MAX_LEVELS)
}

pub fn tensor_with_cap(a: &DiagonalState, b: &DiagonalState, max_levels: usize) -> Result<DiagonalState> {
    let levels = a
        .len()
        .checked_mul(b.len())
        .filter(|&l| l <= max_levels)
        .ok_or_else(|| Error::Size(format!("{} x {} levels exceeds the cap of {max_levels}", a.len(), b.len())))?;
    let mut probs = Vec::with_capacity(levels);
    let mut energies = Vec::with_capacity(levels);
    let mut degeneracies = Vec::with_capacity(levels);
    for i in 0..a.len() {
        for j in 0..b.len() {
            probs.push(a.probs[i] * b.probs[j]);
            energies.push(a.energies[i] + b.energies[j]);
            let d = a.degeneracies[i]
                .checked_mul(b.degeneracies[j])
                .ok_or_else(|| Error::Size("product degeneracy overflows u64".into()))?;
            degeneracies.push(d);
        }
    }
    Ok(DiagonalState { probs, energies, degeneracies })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn thermal_state_examples() {
        let s = thermal_state(&[0.0, 1.0], &[1, 1], 0.0).unwrap();
        assert_eq!(s.probs(), &[0.5, 0.5]);

        let s = thermal_state(&[0.0, 1.0], &[1, 1], 1e6).unwrap();
        assert_relative_eq!(s.probs()[0], 1.0, epsilon = 1e-12);
        assert!(s.probs()[1] < 1e-12);

        // 1/(1+e^-1), e^-1/(1+e^-1)
        let s = thermal_state(&[0.0, 1.0], &[1, 1], 1.0).unwrap();
        assert_relative_eq!(s.probs()[0], 0.731_058_578_630_004_9, epsilon = 1e-15);
        assert_relative_eq!(s.probs()[1], 0.268_941_421_369_995_1, epsilon = 1e-15);
    }

    #[test]
    fn thermal_state_rejects_bad_input() {
        assert!(matches!(thermal_state(&[0.0, f64::NAN], &[1, 1], 1.0), Err(Error::Domain(_))));
        assert!(matches!(thermal_state(&[0.0, f64::INFINITY], &[1, 1], 1.0), Err(Error::Domain(_))));
        assert!(thermal_state(&[0.0, 1.0], &[1, 1], -1.0).is_err());
    }

    #[test]
    fn thermal_state_with_huge_energies_is_finite() {
        let s = thermal_state(&[0.0, 1e4, 2e4], &[1, 3, 1], 10.0).unwrap();
        assert_eq!(s.probs()[0], 1.0);
        assert_eq!(s.probs()[2], 0.0);
    }

    #[test]
    fn n_qubit_bath_small_cases() {
        let params = EngineParams::new(1.0, 10.0, 0.7, 1).unwrap();
        let bath = n_qubit_bath(&params, 2.0).unwrap();
        let direct = thermal_state(&[0.0, 0.7], &[1, 1], 2.0).unwrap();
        for (a, b) in bath.probs().iter().zip(direct.probs()) {
            assert_relative_eq!(a, b, epsilon = 1e-15);
        }

        let params = EngineParams::new(1.0, 10.0, 1.0, 2).unwrap();
        let bath = n_qubit_bath(&params, 0.0).unwrap();
        assert_eq!(bath.energies(), &[0.0, 1.0, 2.0]);
        assert_eq!(bath.degeneracies(), &[1, 2, 1]);
        for p in bath.probs() {
            assert_relative_eq!(*p, 0.25, epsilon = 1e-15);
        }
        assert_eq!(bath.microstates(), 4);
    }

    #[test]
    fn n_qubit_bath_size_limit() {
        let params = EngineParams::new(1.0, 2.0, 1.0, 64).unwrap();
        assert!(matches!(n_qubit_bath(&params, 1.0), Err(Error::Size(_))));
        let params = EngineParams::new(1.0, 2.0, 1.0, 63).unwrap();
        assert!(n_qubit_bath(&params, 1.0).is_ok());
    }

    #[test]
    fn battery_states() {
        let spec = BatterySpec::new(0.0, 1.0, 0.1).unwrap();
        let init = battery_state_initial(&spec);
        assert_eq!(init.probs(), &[1.0, 0.0]);
        assert_eq!(init.energies(), &[0.0, 1.0]);
        assert_eq!(init.entropy(), 0.0);

        let spec = BatterySpec::new(2.0, 3.0, 0.0).unwrap();
        assert_eq!(battery_state_initial(&spec).energies(), &[2.0, 5.0]);
        assert_eq!(battery_state_final(&spec).probs(), &[0.0, 1.0]);

        let spec = BatterySpec::new(0.0, 1.0, 0.5).unwrap();
        assert_relative_eq!(battery_state_final(&spec).mean_energy(), 0.5);

        let spec = BatterySpec::new(0.0, 1.0, 0.1).unwrap();
        assert_relative_eq!(battery_state_final(&spec).entropy(), 0.325_083, epsilon = 1e-6);
    }

    #[test]
    fn battery_spec_validation() {
        assert!(BatterySpec::new(0.0, 0.0, 0.1).is_err());
        assert!(BatterySpec::new(0.0, 1.0, 1.0).is_err());
        assert!(BatterySpec::new(0.0, 1.0, -0.1).is_err());
    }

    #[test]
    fn engine_params_validation() {
        assert!(EngineParams::new(2.0, 1.0, 1.0, 1).is_err());
        assert!(EngineParams::new(0.0, 1.0, 1.0, 1).is_err());
        assert!(EngineParams::new(1.0, 2.0, 0.0, 1).is_err());
        assert!(EngineParams::new(1.0, 2.0, 1.0, 0).is_err());
    }

    #[test]
    fn tensor_identity_and_uniform() {
        let point = DiagonalState::from_probs(vec![1.0], vec![0.0]).unwrap();
        let b = thermal_state(&[0.0, 0.3, 1.1], &[1, 2, 1], 0.8).unwrap();
        let t = tensor(&point, &b).unwrap();
        assert_eq!(t.probs(), b.probs());
        assert_eq!(t.energies(), b.energies());

        let u = DiagonalState::from_probs(vec![0.5, 0.5], vec![0.0, 1.0]).unwrap();
        let t = tensor(&u, &u).unwrap();
        assert_eq!(t.probs(), &[0.25; 4]);
    }

    #[test]
    fn tensor_cap() {
        let u = DiagonalState::from_probs(vec![0.5, 0.5], vec![0.0, 1.0]).unwrap();
        assert!(matches!(tensor_with_cap(&u, &u, 3), Err(Error::Size(_))));
    }

    #[test]
    fn unnormalized_state_is_rejected() {
        assert!(matches!(DiagonalState::from_probs(vec![0.5, 0.6], vec![0.0, 1.0]), Err(Error::Domain(_))));
        assert!(DiagonalState::from_probs(vec![1.0, -0.0], vec![0.0, 1.0]).is_ok());
        assert!(DiagonalState::new(vec![1.0], vec![0.0, 1.0], vec![1]).is_err());
    }
}
