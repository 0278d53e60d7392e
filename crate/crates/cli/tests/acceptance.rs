//! Acceptance suite: one PASS/FAIL line per criterion. Exits non-zero if
//! any criterion fails.

use std::time::{Duration, Instant};

use astro_float::{BigFloat, Consts, RoundingMode};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use carnot_breaker::config::Settings;
use carnot_breaker::{execute, Command};
use carnot_core::engine::{
    carnot, design_epsilon1, efficiency_quasistatic, entropy_comparable_bound, entropy_work_ratio,
};
use carnot_core::quasistatic::{b_alpha_double_prime, b_alpha_prime};
use carnot_core::states::tensor;
use carnot_core::{renyi_divergence, AlphaValue, DiagonalState, EngineParams, QuasiStaticConfig};

const SEED: u64 = 0x5eed_ca27;

type Check = Result<String, String>;

fn rng(stream: u64) -> ChaCha8Rng {
    let mut r = ChaCha8Rng::seed_from_u64(SEED);
    r.set_stream(stream);
    r
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn csv_rows(body: &str) -> Vec<Vec<String>> {
    body.lines().skip(1).map(|l| l.split(',').map(str::to_string).collect()).collect()
}

fn num(field: &str) -> f64 {
    field.parse().unwrap_or(f64::NAN)
}

/// Parameters drawn with 0 < E < 1/(2(β_c − β_h)).
fn draw_params(r: &mut ChaCha8Rng) -> EngineParams {
    let beta_hot = r.gen_range(0.1..5.0);
    let delta = r.gen_range(0.1..20.0);
    let gap = r.gen_range(0.01..0.99) / (2.0 * delta);
    EngineParams::new(beta_hot, beta_hot + delta, gap, r.gen_range(1..=6)).unwrap()
}

fn criterion_1() -> Check {
    let settings = Settings {
        vary: Some("alpha_star".into()),
        range: Some("1.05:1.95:0.01".into()),
        beta_hot: Some(1.0),
        beta_cold: Some(10.0),
        gap: Some(0.4 / 9.0),
        ..Settings::default()
    };
    let body = execute(Command::Sweep, &settings).map_err(|e| e.to_string())?.body;
    let rows = csv_rows(&body);
    ensure(rows.len() == 91, || format!("{} rows, expected 91", rows.len()))?;
    let mut min_excess = f64::INFINITY;
    for row in &rows {
        let (eta, eta_c) = (num(&row[1]), num(&row[2]));
        ensure(row[4] == "true" && eta > 0.9 && (eta_c - 0.9).abs() < 1e-12, || format!("row {row:?}"))?;
        min_excess = min_excess.min(eta - 0.9);
    }
    let edge = efficiency_quasistatic(1.0 + 1e-6, &EngineParams::theorem1(1)).map_err(|e| e.to_string())?;
    ensure((edge - 0.9).abs() <= 1e-5, || format!("eta(1 + 1e-6) = {edge}"))?;
    Ok(format!("min eta - 0.9 = {min_excess:.3e}, eta(1+1e-6) - 0.9 = {:.3e}", edge - 0.9))
}

fn criterion_2() -> Check {
    let mut r = rng(2);
    let mut worst = 0.0f64;
    for i in 0..100 {
        let p = draw_params(&mut r);
        let eta = efficiency_quasistatic(1.0 + 1e-6, &p).map_err(|e| format!("draw {i} {p:?}: {e}"))?;
        let dev = (eta - carnot(&p)).abs();
        ensure(dev <= 1e-5, || format!("draw {i} {p:?}: |eta - eta_C| = {dev}"))?;
        worst = worst.max(dev);
    }
    Ok(format!("max |eta - eta_C| = {worst:.3e}"))
}

fn criterion_3() -> Check {
    let mut finals = Vec::new();
    for n in 1..=3 {
        let settings = Settings { n: Some(n), alpha_star: Some(1.2), ..Settings::default() };
        let report = execute(Command::Converge, &settings).map_err(|e| e.to_string())?;
        let rows = csv_rows(&report.body);
        let gs: Vec<f64> = rows.iter().map(|r| num(&r[0])).collect();
        ensure(gs == [1e-2, 1e-3, 1e-4], || format!("g column {gs:?}"))?;
        let dev: Vec<f64> = rows.iter().map(|r| (num(&r[1]) / num(&r[2]) - 1.0).abs()).collect();
        ensure(dev.windows(2).all(|w| w[1] < w[0]), || format!("n = {n}: deviations {dev:?} not decreasing"))?;
        ensure(dev[2] <= 0.05, || format!("n = {n}: final deviation {}", dev[2]))?;
        ensure(report.violation.is_none(), || format!("n = {n}: {:?}", report.violation))?;
        finals.push(format!("n={n}: {:.2e}", dev[2]));
    }
    Ok(format!("rel_dev at g = 1e-4: {}", finals.join(", ")))
}

/// `B_α` from its ratio of exponentials at 256 bits.
struct Reference {
    cc: Consts,
}

const PREC: usize = 256;
const RM: RoundingMode = RoundingMode::ToEven;

impl Reference {
    fn big(x: f64) -> BigFloat {
        BigFloat::from_f64(x, PREC)
    }

    fn b(&mut self, alpha: &BigFloat, p: &EngineParams) -> BigFloat {
        let (bh, bc, e) = (Self::big(p.beta_hot()), Self::big(p.beta_cold()), Self::big(p.gap()));
        let mut ex = |x: BigFloat| x.mul(&e, PREC, RM).exp(PREC, RM, &mut self.cc);
        let a_bc = alpha.mul(&bc, PREC, RM);
        let a_bh = alpha.mul(&bh, PREC, RM);
        let t1 = ex(bh.add(&a_bc, PREC, RM));
        let t2 = ex(bc.add(&a_bh, PREC, RM));
        let t3 = ex(a_bh);
        let pref = e.div(&Self::big(1.0).add(&ex(bc), PREC, RM), PREC, RM);
        pref.mul(&t1.sub(&t2, PREC, RM), PREC, RM).div(&t3.add(&t1, PREC, RM), PREC, RM)
    }

    fn to_f64(x: &BigFloat) -> f64 {
        format!("{x}").parse().unwrap_or(f64::NAN)
    }

    /// Central first and second differences with steps `h1` and `h2`.
    fn differences(&mut self, alpha: f64, h1: f64, h2: f64, p: &EngineParams) -> (f64, f64) {
        let a = Self::big(alpha);
        let at = |s: &mut Self, h: f64| s.b(&a.add(&Self::big(h), PREC, RM), p);
        let d1 = at(self, h1).sub(&at(self, -h1), PREC, RM).div(&Self::big(2.0 * h1), PREC, RM);
        let centre = self.b(&a, p).mul(&Self::big(2.0), PREC, RM);
        let d2 = at(self, h2).add(&at(self, -h2), PREC, RM).sub(&centre, PREC, RM).div(&Self::big(h2 * h2), PREC, RM);
        (Self::to_f64(&d1), Self::to_f64(&d2))
    }
}

fn criterion_4() -> Check {
    let mut r = rng(4);
    let mut reference = Reference { cc: Consts::new().map_err(|e| format!("{e:?}"))? };
    let (mut worst1, mut worst2) = (0.0f64, 0.0f64);
    for i in 0..1000 {
        let beta_hot = r.gen_range(0.1..5.0);
        let delta = r.gen_range(0.1..20.0);
        let gap = r.gen_range(0.01..1.5) / delta;
        let p = EngineParams::new(beta_hot, beta_hot + delta, gap, r.gen_range(1..=6)).unwrap();
        // α ∈ (1, 20]
        let alpha = 20.0 - r.gen_range(0.0..19.0);
        let (fd1, fd2) = reference.differences(alpha, 1e-6, 1e-4, &p);
        let rel1 = (b_alpha_prime(alpha, &p) / fd1 - 1.0).abs();
        let rel2 = (b_alpha_double_prime(alpha, &p) / fd2 - 1.0).abs();
        ensure(rel1 <= 1e-6 && rel2 <= 1e-4, || format!("draw {i} alpha {alpha} {p:?}: {rel1:e}, {rel2:e}"))?;
        worst1 = worst1.max(rel1);
        worst2 = worst2.max(rel2);
    }
    Ok(format!("max rel dev B' {worst1:.2e}, B'' {worst2:.2e}"))
}

fn criterion_5() -> Check {
    let run =
        |seed: u64| execute(Command::Verify, &Settings { seed: Some(seed), draws: Some(1000), ..Settings::default() });
    let first = run(carnot_core::verify::DEFAULT_SEED).map_err(|e| e.to_string())?;
    ensure(first.violation.is_none(), || first.body.clone())?;
    let again = run(carnot_core::verify::DEFAULT_SEED).map_err(|e| e.to_string())?;
    ensure(again.body == first.body, || "repeat run differs".into())?;
    let other = run(7).map_err(|e| e.to_string())?;
    ensure(other.violation.is_none(), || other.body.clone())?;
    let lemmas = first.body.lines().filter(|l| l.starts_with("PASS")).count();
    Ok(format!("{lemmas} lemmas, zero violations for two seeds"))
}

fn criterion_6() -> Check {
    let mut r = rng(6);
    let mut worst = f64::NEG_INFINITY;
    for i in 0..100 {
        let p = draw_params(&mut r);
        let c = 10f64.powf(r.gen_range(-3.0..1.0));
        let report = entropy_comparable_bound(&p, c, &[1e-3, 1e-5]).map_err(|e| format!("draw {i}: {e}"))?;
        for row in &report.rows {
            let excess = row.eta_bound - report.eta_carnot;
            ensure(excess <= 1e-9, || format!("draw {i} {p:?} c {c} g {}: excess {excess}", row.g))?;
            worst = worst.max(excess);
        }
    }
    Ok(format!("max eta - eta_C = {worst:.3e}"))
}

fn criterion_7() -> Check {
    let mut parts = Vec::new();
    let mut failed = false;
    for n in 1..=3 {
        let p = EngineParams::theorem1(n);
        let eps1 = design_epsilon1(1.2, &p).map_err(|e| e.to_string())?;
        let cfg = QuasiStaticConfig::new(1e-3, eps1).map_err(|e| e.to_string())?;
        let r = entropy_work_ratio(&cfg, &p, &[1e-3, 1e-6]).map_err(|e| e.to_string())?;
        let ratio = r[1] / r[0];
        failed |= !(r[1] > r[0] && (ratio / 2.0 - 1.0).abs() <= 0.25);
        parts.push(format!("n={n}: {ratio:.4}"));
    }
    let summary = format!("ratio dS/W (1e-6 vs 1e-3), target 2 +/- 25%: {}", parts.join(", "));
    if failed {
        Err(summary)
    } else {
        Ok(summary)
    }
}

fn random_state(r: &mut ChaCha8Rng, len: usize) -> DiagonalState {
    let w: Vec<f64> = (0..len).map(|_| r.gen_range(1e-3..1.0)).collect();
    let t: f64 = w.iter().sum();
    DiagonalState::from_probs(w.iter().map(|x| x / t).collect(), (0..len).map(|i| i as f64).collect()).unwrap()
}

fn criterion_8() -> Check {
    let d = |p: &DiagonalState, q: &DiagonalState, a: AlphaValue| renyi_divergence(p, q, a).map_err(|e| e.to_string());
    let mut ladder: Vec<AlphaValue> = (0..=50).map(|i| AlphaValue::new(i as f64 / 10.0).unwrap()).collect();
    ladder.push(AlphaValue::Infinity);
    let mut r = rng(8);
    for i in 0..1000 {
        let len = r.gen_range(2..=5);
        let (p, q) = (random_state(&mut r, len), random_state(&mut r, len));
        let len2 = r.gen_range(2..=3);
        let (p2, q2) = (random_state(&mut r, len2), random_state(&mut r, len2));
        let (pp, qq) = (tensor(&p, &p2).unwrap(), tensor(&q, &q2).unwrap());
        let mut last = f64::NEG_INFINITY;
        for &a in &ladder {
            let v = d(&p, &q, a)?;
            ensure(d(&p, &p, a)?.abs() < 1e-12, || format!("pair {i}: identity fails at {a:?}"))?;
            ensure(v >= -1e-12, || format!("pair {i}: D = {v} at {a:?}"))?;
            ensure(v >= last - 1e-12, || format!("pair {i}: not monotone at {a:?}"))?;
            let sum = v + d(&p2, &q2, a)?;
            let joint = d(&pp, &qq, a)?;
            ensure((joint - sum).abs() <= 1e-10 * sum.abs().max(1.0), || {
                format!("pair {i}: {joint} vs {sum} at {a:?}")
            })?;
            last = v;
        }
    }
    let half = DiagonalState::from_probs(vec![0.5, 0.5], vec![0.0, 1.0]).unwrap();
    let quarter = DiagonalState::from_probs(vec![0.25, 0.75], vec![0.0, 1.0]).unwrap();
    let worked = d(&half, &quarter, AlphaValue::One)?;
    let expected = 0.5 * (4.0f64 / 3.0).ln();
    ensure((worked - expected).abs() <= 1e-12, || format!("worked example {worked} vs {expected}"))?;
    Ok("1000 pairs; D_1((1/2,1/2)||(1/4,3/4)) = 0.5 ln(4/3)".into())
}

struct Criterion(u32, &'static str, Duration, fn() -> Check);

fn main() {
    let criteria = [
        Criterion(1, "carnot-surpassing sweep", Duration::from_secs(1), criterion_1),
        Criterion(2, "carnot recovery at alpha* -> 1", Duration::from_secs(1), criterion_2),
        Criterion(3, "oracle convergence", Duration::from_secs(60), criterion_3),
        Criterion(4, "derivative cross-checks", Duration::from_secs(10), criterion_4),
        Criterion(5, "lemma suite", Duration::from_secs(120), criterion_5),
        Criterion(6, "entropy-comparable no-go", Duration::from_secs(30), criterion_6),
        Criterion(7, "divergence regime ratio", Duration::from_secs(10), criterion_7),
        Criterion(8, "divergence invariants", Duration::from_secs(10), criterion_8),
    ];
    let mut failures = 0;
    for Criterion(id, name, budget, check) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let (verdict, detail) = match outcome {
            Ok(msg) if elapsed <= budget => ("PASS", msg),
            Ok(msg) => ("FAIL", format!("{msg}; took {elapsed:.2?}, budget {budget:?}")),
            Err(msg) => ("FAIL", msg),
        };
        if verdict == "FAIL" {
            failures += 1;
        }
        println!("{verdict} criterion {id} ({name}) [{elapsed:.2?}]: {detail}");
    }
    println!("{} of 8 criteria passed", 8 - failures);
    if failures > 0 {
        std::process::exit(1);
    }
}
