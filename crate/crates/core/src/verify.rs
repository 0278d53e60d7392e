//! Randomized verification of the lemma chain behind Theorem 1 and of the
//! divergence and efficiency invariants. Every draw gets its own seeded
//! ChaCha stream, so verdicts do not depend on thread scheduling.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::divergences::{renyi_divergence, AlphaValue};
use crate::engine::{
    carnot, check_conditions, design_epsilon1, efficiency_quasistatic, entropy_comparable_bound, ETA_TOL,
};
use crate::numeric::geomspace;
use crate::par::{self, Exec};
use crate::quasistatic::{
    b_alpha, b_alpha_double_prime, b_alpha_prime, b_infinity, d2w_dalpha2, f_prime, locate_stationary, w_alpha_leading,
    w_infinity, w_infinity_over_g, w_one_over_g, QuasiStaticConfig, StationaryKind, DEFAULT_SCAN_POINTS,
    DEFAULT_WINDOW,
};
use crate::states::{tensor, DiagonalState, EngineParams};

pub const DEFAULT_SEED: u64 = 20_190_417;
pub const DEFAULT_DRAWS: usize = 1000;
const MAX_REPORTED_FAILURES: usize = 5;

/// Names of the checks, in report order.
pub const LEMMAS: [&str; 17] = [
    "b_one_zero",
    "b_prime_positive",
    "b_double_prime_negative",
    "eps1_at_one_zero",
    "f_prime_concave",
    "stationary_points_at_most_3",
    "local_minima_at_most_1",
    "w_one_above_w_infinity",
    "second_derivative_positive",
    "w_star_below_w_infinity",
    "w_infinity_from_above",
    "divergence_identity",
    "divergence_nonnegative",
    "divergence_monotone_in_alpha",
    "divergence_additive",
    "carnot_recovery",
    "no_go_entropy_comparable",
];

#[derive(Debug, Clone, Copy)]
pub struct VerifyConfig {
    pub seed: u64,
    pub draws: usize,
    pub exec: Exec,
}

impl Default for VerifyConfig {
    fn default() -> Self {
        Self { seed: DEFAULT_SEED, draws: DEFAULT_DRAWS, exec: Exec::default() }
    }
}

/// One random parameter point.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Draw {
    pub index: usize,
    pub beta_hot: f64,
    pub beta_cold: f64,
    pub gap: f64,
    pub n: u32,
    pub alpha_star: f64,
    pub epsilon1: f64,
    pub c: f64,
    pub p: Vec<f64>,
    pub q: Vec<f64>,
    pub r: Vec<f64>,
    pub s: Vec<f64>,
    pub energies: Vec<f64>,
    pub degeneracies: Vec<u64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Outcome {
    Pass,
    /// The check's precondition does not hold for this draw.
    Skip,
    Fail(String),
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    rng.gen_range(lo.ln()..hi.ln()).exp()
}

fn random_distribution(rng: &mut ChaCha8Rng, len: usize, degeneracies: &[u64], allow_zeros: bool) -> Vec<f64> {
    let mut w: Vec<f64> = (0..len)
        .map(|_| if allow_zeros && rng.gen_bool(0.15) { 0.0 } else { -rng.gen_range(1e-12f64..1.0).ln() })
        .collect();
    if w.iter().all(|&x| x == 0.0) {
        w[0] = 1.0;
    }
    let total: f64 = w.iter().zip(degeneracies).map(|(x, &d)| x * d as f64).sum();
    w.iter().map(|x| x / total).collect()
}

/// The `index`-th draw of the stream seeded by `seed`.
pub fn draw(seed: u64, index: usize) -> Draw {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(index as u64);
    let beta_hot = rng.gen_range(0.1..5.0);
    let delta_beta = rng.gen_range(0.1..20.0);
    let gap = rng.gen_range(0.01..1.5) / delta_beta;
    let n = rng.gen_range(1..=6);
    let alpha_star = rng.gen_range(1.01..1.99);
    let epsilon1 = log_uniform(&mut rng, 1e-6, 1e-1);
    let c = log_uniform(&mut rng, 1e-3, 10.0);
    let levels = rng.gen_range(2..=5);
    let energies: Vec<f64> = (0..levels).map(|_| rng.gen_range(0.0..3.0)).collect();
    let degeneracies: Vec<u64> = (0..levels).map(|_| rng.gen_range(1..=3)).collect();
    let p = random_distribution(&mut rng, levels, &degeneracies, true);
    let q = random_distribution(&mut rng, levels, &degeneracies, false);
    let r = random_distribution(&mut rng, levels, &degeneracies, true);
    let s = random_distribution(&mut rng, levels, &degeneracies, false);
    Draw {
        index,
        beta_hot,
        beta_cold: beta_hot + delta_beta,
        gap,
        n,
        alpha_star,
        epsilon1,
        c,
        p,
        q,
        r,
        s,
        energies,
        degeneracies,
    }
}

fn pass_if(ok: bool, detail: impl FnOnce() -> String) -> Outcome {
    if ok {
        Outcome::Pass
    } else {
        Outcome::Fail(detail())
    }
}

fn first_failure<I: IntoIterator<Item = Outcome>>(outcomes: I) -> Outcome {
    let mut skipped = true;
    for o in outcomes {
        match o {
            Outcome::Fail(_) => return o,
            Outcome::Pass => skipped = false,
            Outcome::Skip => {}
        }
    }
    if skipped {
        Outcome::Skip
    } else {
        Outcome::Pass
    }
}

fn check_stationary(eps1: f64, params: &EngineParams) -> (Outcome, Outcome) {
    match locate_stationary(eps1, params, DEFAULT_WINDOW, DEFAULT_SCAN_POINTS, Exec::Sequential) {
        Ok(pts) => {
            let minima = pts.iter().filter(|p| p.kind == StationaryKind::Minimum).count();
            (
                pass_if(pts.len() <= 3, || format!("{} stationary points for epsilon1 = {eps1}", pts.len())),
                pass_if(minima <= 1, || format!("{minima} local minima for epsilon1 = {eps1}")),
            )
        }
        Err(e) => (Outcome::Fail(e.to_string()), Outcome::Fail(e.to_string())),
    }
}

fn engine_checks(d: &Draw, params: &EngineParams) -> Vec<Outcome> {
    let alphas = geomspace(0.01, 50.0, 40);
    let n = params.n() as f64;
    let e = params.gap();
    let db = params.delta_beta();
    let designed = design_epsilon1(d.alpha_star, params).unwrap_or(f64::NAN);

    let b_one_zero = {
        let b = b_alpha(1.0, params);
        pass_if(b == 0.0, || format!("B_1 = {b}"))
    };
    let b_prime_positive = first_failure(alphas.iter().map(|&a| {
        let v = b_alpha_prime(a, params);
        pass_if(v > 0.0, || format!("B'({a}) = {v}"))
    }));
    let b_double_prime_negative = first_failure(alphas.iter().map(|&a| {
        let v = b_alpha_double_prime(a, params);
        pass_if(v < 0.0, || format!("B''({a}) = {v}"))
    }));
    let eps1_at_one_zero = match design_epsilon1(1.0, params) {
        Ok(v) => pass_if(v == 0.0, || format!("epsilon1(1) = {v}")),
        Err(err) => Outcome::Fail(err.to_string()),
    };

    let h = 0.05;
    let f_prime_concave = first_failure((0..=378).map(|i| {
        let a = 1.0 + 1.1 * h + i as f64 * h;
        let second = f_prime(a + h, d.epsilon1, params) - 2.0 * f_prime(a, d.epsilon1, params)
            + f_prime(a - h, d.epsilon1, params);
        pass_if(second < 0.0, || format!("second difference of f' at {a} is {second}"))
    }));

    let (count_random, minima_random) = check_stationary(d.epsilon1, params);
    let (count_designed, minima_designed) =
        if designed > 0.0 { check_stationary(designed, params) } else { (Outcome::Skip, Outcome::Skip) };
    let stationary_count = first_failure([count_random, count_designed]);
    let local_minima = first_failure([minima_random, minima_designed]);

    // W₁ > W_∞ holds below g′ = e^{−K/ε₁}/ε₁; test at min(1e-3, g′/2).
    let w_one_above = {
        let k = n * (b_infinity(params) - b_alpha_prime(1.0, params));
        let ln_g_crossover = -k / d.epsilon1 - d.epsilon1.ln();
        let ln_g = (1e-3f64).ln().min(ln_g_crossover - std::f64::consts::LN_2);
        let one = w_one_over_g(ln_g, d.epsilon1, params);
        let inf = w_infinity_over_g(d.epsilon1, params);
        pass_if(one > inf, || format!("W1/g = {one} <= Winf/g = {inf} at ln g = {ln_g}"))
    };

    let designed_cfg = (designed > 0.0).then(|| QuasiStaticConfig::new(1e-4, designed).ok()).flatten();
    let second_derivative = match designed_cfg {
        Some(cfg) if e < 1.0 / db => match d2w_dalpha2(d.alpha_star, &cfg, params) {
            Ok(v) => pass_if(v > 0.0, || format!("d2W/da2 at alpha* = {v}")),
            Err(err) => Outcome::Fail(err.to_string()),
        },
        _ => Outcome::Skip,
    };
    let below_infinity = match designed_cfg {
        Some(cfg) if d.alpha_star * e < 1.0 / db => match w_alpha_leading(d.alpha_star, &cfg, params) {
            Ok(w) => {
                let inf = w_infinity(&cfg, params);
                pass_if(w < inf, || format!("W(alpha*) = {w} >= Winf = {inf}"))
            }
            Err(err) => Outcome::Fail(err.to_string()),
        },
        _ => Outcome::Skip,
    };

    let from_above = match QuasiStaticConfig::new(1e-4, d.epsilon1) {
        Ok(cfg) => {
            let a0 = (40.0 / (e * db)).max(10.0);
            let inf = w_infinity(&cfg, params);
            first_failure(geomspace(a0, 4.0 * a0, 12).into_iter().map(|a| match w_alpha_leading(a, &cfg, params) {
                Ok(w) => pass_if(w > inf, || format!("W({a}) = {w} <= Winf = {inf}")),
                Err(err) => Outcome::Fail(err.to_string()),
            }))
        }
        Err(err) => Outcome::Fail(err.to_string()),
    };

    let carnot_recovery = match check_conditions(1.0 + 1e-6, params) {
        Ok(r) if r.conditions.gap_small => match efficiency_quasistatic(1.0 + 1e-6, params) {
            Ok(eta) => {
                let diff = (eta - carnot(params)).abs();
                pass_if(diff <= 1e-5, || format!("|eta - eta_C| = {diff}"))
            }
            Err(err) => Outcome::Fail(err.to_string()),
        },
        Ok(_) => Outcome::Skip,
        Err(err) => Outcome::Fail(err.to_string()),
    };

    let no_go = match entropy_comparable_bound(params, d.c, &[1e-3, 1e-5]) {
        Ok(report) => first_failure(report.rows.iter().map(|row| {
            pass_if(row.eta_bound <= report.eta_carnot + ETA_TOL, || {
                format!("eta bound {} > eta_C {} at g = {}", row.eta_bound, report.eta_carnot, row.g)
            })
        })),
        Err(err) => Outcome::Fail(err.to_string()),
    };

    vec![
        b_one_zero,
        b_prime_positive,
        b_double_prime_negative,
        eps1_at_one_zero,
        f_prime_concave,
        stationary_count,
        local_minima,
        w_one_above,
        second_derivative,
        below_infinity,
        from_above,
        carnot_recovery,
        no_go,
    ]
}

fn divergence_checks(d: &Draw) -> Vec<Outcome> {
    let state = |probs: &[f64]| DiagonalState::new(probs.to_vec(), d.energies.clone(), d.degeneracies.clone());
    let (p, q, r, s) = match (state(&d.p), state(&d.q), state(&d.r), state(&d.s)) {
        (Ok(p), Ok(q), Ok(r), Ok(s)) => (p, q, r, s),
        _ => return vec![Outcome::Fail("random state failed validation".into()); 4],
    };
    let mut grid: Vec<AlphaValue> = (0..=50).map(|i| AlphaValue::new(i as f64 / 10.0).expect("non-negative")).collect();
    grid.push(AlphaValue::Infinity);
    let div = |a: &DiagonalState, b: &DiagonalState, alpha: AlphaValue| renyi_divergence(a, b, alpha);

    let identity = first_failure(grid.iter().map(|&a| match div(&p, &p, a) {
        Ok(v) => pass_if(v.abs() <= 1e-12, || format!("D_{}(p||p) = {v}", a.value())),
        Err(err) => Outcome::Fail(err.to_string()),
    }));
    let values: Vec<_> = grid.iter().map(|&a| div(&p, &q, a)).collect();
    let nonneg = first_failure(grid.iter().zip(&values).map(|(a, v)| match v {
        Ok(v) => pass_if(*v >= -1e-12, || format!("D_{}(p||q) = {v}", a.value())),
        Err(err) => Outcome::Fail(err.to_string()),
    }));
    let monotone = first_failure(values.windows(2).zip(grid.windows(2)).map(|(v, a)| match (&v[0], &v[1]) {
        (Ok(x), Ok(y)) => pass_if(*y >= x - 1e-12 * (1.0 + x.abs()), || {
            format!("D_{} = {x} > D_{} = {y}", a[0].value(), a[1].value())
        }),
        _ => Outcome::Fail("divergence error".into()),
    }));
    let additive = match (tensor(&p, &r), tensor(&q, &s)) {
        (Ok(pr), Ok(qs)) => {
            first_failure(grid.iter().map(|&a| match (div(&pr, &qs, a), div(&p, &q, a), div(&r, &s, a)) {
                (Ok(joint), Ok(x), Ok(y)) => {
                    let err = (joint - x - y).abs();
                    pass_if(err <= 1e-10 * (1.0 + joint.abs()), || {
                        format!("additivity error {err} at alpha = {}", a.value())
                    })
                }
                _ => Outcome::Fail("divergence error".into()),
            }))
        }
        _ => Outcome::Fail("tensor product failed".into()),
    };
    vec![identity, nonneg, monotone, additive]
}

/// All checks for one draw, in [`LEMMAS`] order.
pub fn check_draw(d: &Draw) -> Vec<Outcome> {
    let params = match EngineParams::new(d.beta_hot, d.beta_cold, d.gap, d.n) {
        Ok(p) => p,
        Err(e) => return vec![Outcome::Fail(e.to_string()); LEMMAS.len()],
    };
    let engine = engine_checks(d, &params);
    let divergence = divergence_checks(d);
    // engine_checks ends with carnot_recovery and no_go, which come last in LEMMAS
    let (lemma_part, tail) = engine.split_at(11);
    lemma_part.iter().cloned().chain(divergence).chain(tail.iter().cloned()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LemmaTally {
    pub name: &'static str,
    pub passed: usize,
    pub skipped: usize,
    pub failed: usize,
    /// The first few failures, each with its reproducing draw.
    pub failures: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct VerifyReport {
    pub seed: u64,
    pub draws: usize,
    pub lemmas: Vec<LemmaTally>,
}

impl VerifyReport {
    pub fn all_passed(&self) -> bool {
        self.lemmas.iter().all(|l| l.failed == 0)
    }

    pub fn violations(&self) -> usize {
        self.lemmas.iter().map(|l| l.failed).sum()
    }

    /// Verdicts only, for comparing runs with different seeds.
    pub fn verdicts(&self) -> Vec<(&'static str, bool)> {
        self.lemmas.iter().map(|l| (l.name, l.failed == 0)).collect()
    }

    pub fn render(&self) -> String {
        let mut out = format!("seed {} draws {}\n", self.seed, self.draws);
        for l in &self.lemmas {
            let verdict = if l.failed == 0 { "PASS" } else { "FAIL" };
            out.push_str(&format!(
                "{verdict} {:<30} passed {:>5} skipped {:>5} failed {:>5}\n",
                l.name, l.passed, l.skipped, l.failed
            ));
            for f in &l.failures {
                out.push_str(&format!("    {f}\n"));
            }
        }
        out
    }
}

pub fn run_verify(cfg: &VerifyConfig) -> VerifyReport {
    let per_draw = par::map_range(cfg.exec, cfg.draws, |i| {
        let d = draw(cfg.seed, i);
        let outcomes = check_draw(&d);
        (d, outcomes)
    });
    let mut lemmas: Vec<LemmaTally> = LEMMAS
        .iter()
        .map(|&name| LemmaTally { name, passed: 0, skipped: 0, failed: 0, failures: Vec::new() })
        .collect();
    for (d, outcomes) in per_draw {
        for (tally, outcome) in lemmas.iter_mut().zip(outcomes) {
            match outcome {
                Outcome::Pass => tally.passed += 1,
                Outcome::Skip => tally.skipped += 1,
                Outcome::Fail(msg) => {
                    tally.failed += 1;
                    if tally.failures.len() < MAX_REPORTED_FAILURES {
                        tally.failures.push(format!("{msg}; draw {d:?}"));
                    }
                }
            }
        }
    }
    VerifyReport { seed: cfg.seed, draws: cfg.draws, lemmas }
}
