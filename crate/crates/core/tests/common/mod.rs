//! Arbitrary-precision reference evaluations, independent of the f64
//! formulas in the crate.

#![allow(dead_code)]

use astro_float::{BigFloat, Consts, RoundingMode};

pub const PREC: usize = 512;
const RM: RoundingMode = RoundingMode::ToEven;

pub struct Hp {
    cc: Consts,
}

impl Hp {
    pub fn new() -> Self {
        Self { cc: Consts::new().expect("constant cache") }
    }

    pub fn num(&self, x: f64) -> BigFloat {
        BigFloat::from_f64(x, PREC)
    }

    pub fn exp(&mut self, x: &BigFloat) -> BigFloat {
        x.exp(PREC, RM, &mut self.cc)
    }

    pub fn to_f64(&self, x: &BigFloat) -> f64 {
        format!("{x}").parse().expect("decimal rendering")
    }

    /// `B_α` from the printed ratio of exponentials.
    pub fn b_alpha(&mut self, alpha: &BigFloat, beta_hot: f64, beta_cold: f64, gap: f64) -> BigFloat {
        let (bh, bc, e) = (self.num(beta_hot), self.num(beta_cold), self.num(gap));
        let one = self.num(1.0);
        let ex = |s: &mut Self, v: BigFloat| s.exp(&v.mul(&e, PREC, RM));
        let a_bc = alpha.mul(&bc, PREC, RM);
        let a_bh = alpha.mul(&bh, PREC, RM);
        let t1 = ex(self, bh.add(&a_bc, PREC, RM));
        let t2 = ex(self, bc.add(&a_bh, PREC, RM));
        let t3 = ex(self, a_bh.clone());
        let pref = e.div(&one.add(&ex(self, bc.clone()), PREC, RM), PREC, RM);
        pref.mul(&t1.sub(&t2, PREC, RM), PREC, RM).div(&t3.add(&t1, PREC, RM), PREC, RM)
    }

    /// Central first difference of the reference `B_α` with step `h`.
    pub fn b_prime_fd(&mut self, alpha: f64, h: f64, bh: f64, bc: f64, e: f64) -> f64 {
        let a = self.num(alpha);
        let step = self.num(h);
        let up = self.b_alpha(&a.add(&step, PREC, RM), bh, bc, e);
        let down = self.b_alpha(&a.sub(&step, PREC, RM), bh, bc, e);
        let two_h = step.mul(&self.num(2.0), PREC, RM);
        self.to_f64(&up.sub(&down, PREC, RM).div(&two_h, PREC, RM))
    }

    /// Central second difference of the reference `B_α` with step `h`.
    pub fn b_second_fd(&mut self, alpha: f64, h: f64, bh: f64, bc: f64, e: f64) -> f64 {
        let a = self.num(alpha);
        let step = self.num(h);
        let up = self.b_alpha(&a.add(&step, PREC, RM), bh, bc, e);
        let mid = self.b_alpha(&a, bh, bc, e);
        let down = self.b_alpha(&a.sub(&step, PREC, RM), bh, bc, e);
        let num = up.add(&down, PREC, RM).sub(&mid.mul(&self.num(2.0), PREC, RM), PREC, RM);
        self.to_f64(&num.div(&step.mul(&step, PREC, RM), PREC, RM))
    }

    pub fn b_alpha_f64(&mut self, alpha: f64, bh: f64, bc: f64, e: f64) -> f64 {
        let a = self.num(alpha);
        let v = self.b_alpha(&a, bh, bc, e);
        self.to_f64(&v)
    }
}
