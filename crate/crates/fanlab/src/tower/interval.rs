//! Directed-rounding interval helpers over arbitrary-precision floats.
//!
//! Every bound produced here is one-sided: `lo` is computed with rounding
//! toward negative infinity, `hi` toward positive infinity, so an
//! [`Interval`] always contains the true real value it stands for.

use astro_float::{BigFloat, Consts, RoundingMode, Sign};
use num_bigint::BigUint;

pub const MIN_PRECISION: usize = 64;
pub const MAX_PRECISION: usize = 4096;

/// Escalation schedule used by certified comparison.
pub const PRECISION_LADDER: [usize; 4] = [64, 256, 1024, 4096];

/// Shared transcendental-constant cache for one computation.
pub(crate) struct Ctx {
    pub cc: Consts,
    ln3: Vec<(usize, BigFloat, BigFloat)>,
}

impl Ctx {
    pub fn new() -> Self {
        Ctx {
            cc: Consts::new().expect("constant cache allocation"),
            ln3: Vec::new(),
        }
    }

    /// Lower and upper bounds of ln(3) at precision `p`.
    pub fn ln3(&mut self, p: usize) -> (BigFloat, BigFloat) {
        if let Some((_, lo, hi)) = self.ln3.iter().find(|(q, _, _)| *q == p) {
            return (lo.clone(), hi.clone());
        }
        let three = BigFloat::from_u64(3, p);
        let lo = three.ln(p, RoundingMode::Down, &mut self.cc);
        let hi = three.ln(p, RoundingMode::Up, &mut self.cc);
        self.ln3.push((p, lo.clone(), hi.clone()));
        (lo, hi)
    }
}

#[derive(Debug, Clone)]
pub struct Interval {
    pub lo: BigFloat,
    pub hi: BigFloat,
}

pub(crate) fn bf_le(a: &BigFloat, b: &BigFloat) -> bool {
    a.cmp(b).map(|s| s <= 0).unwrap_or(false)
}

pub(crate) fn bf_lt(a: &BigFloat, b: &BigFloat) -> bool {
    a.cmp(b).map(|s| s < 0).unwrap_or(false)
}

pub(crate) fn bf_ge(a: &BigFloat, b: &BigFloat) -> bool {
    a.cmp(b).map(|s| s >= 0).unwrap_or(false)
}

impl Interval {
    pub fn point_u64(v: u64, p: usize) -> Self {
        let x = BigFloat::from_u64(v, p);
        Interval { lo: x.clone(), hi: x }
    }

    pub fn point_f64(v: f64, p: usize) -> Self {
        let x = BigFloat::from_f64(v, p);
        Interval { lo: x.clone(), hi: x }
    }

    pub fn zero(p: usize) -> Self {
        Self::point_u64(0, p)
    }

    pub fn from_biguint(v: &BigUint, p: usize) -> Self {
        Interval {
            lo: bf_from_biguint(v, p, false),
            hi: bf_from_biguint(v, p, true),
        }
    }

    pub fn lo_f64(&self) -> f64 {
        f64_down(&self.lo)
    }

    pub fn hi_f64(&self) -> f64 {
        f64_up(&self.hi)
    }

    pub fn width(&self, p: usize) -> BigFloat {
        self.hi.sub(&self.lo, p, RoundingMode::Up)
    }

    pub fn width_f64(&self, p: usize) -> f64 {
        f64_up(&self.width(p))
    }

    pub fn contains_f64(&self, v: f64, p: usize) -> bool {
        let x = BigFloat::from_f64(v, p);
        bf_le(&self.lo, &x) && bf_le(&x, &self.hi)
    }

    /// True when this interval is certainly at or above `other`'s upper end.
    pub fn certainly_ge(&self, other: &Interval) -> bool {
        bf_ge(&self.lo, &other.hi)
    }
}

/// Image of an interval under F(t) = 3^t - 1, outward rounded.
pub(crate) fn f_fwd(iv: &Interval, p: usize, ctx: &mut Ctx) -> Interval {
    let three = BigFloat::from_u64(3, p);
    let one = BigFloat::from_u64(1, p);
    let lo = three
        .pow(&iv.lo, p, RoundingMode::Down, &mut ctx.cc)
        .sub(&one, p, RoundingMode::Down);
    let hi = three
        .pow(&iv.hi, p, RoundingMode::Up, &mut ctx.cc)
        .sub(&one, p, RoundingMode::Up);
    Interval { lo, hi }
}

/// Image under F^{-1}(t) = log_3(1 + t), outward rounded. Needs 1 + lo > 0.
pub(crate) fn f_inv(iv: &Interval, p: usize, ctx: &mut Ctx) -> Interval {
    let one = BigFloat::from_u64(1, p);
    let arg_lo = one.add(&iv.lo, p, RoundingMode::Down);
    let arg_hi = one.add(&iv.hi, p, RoundingMode::Up);
    Interval {
        lo: log3_lo(&arg_lo, p, ctx),
        hi: log3_hi(&arg_hi, p, ctx),
    }
}

/// Lower bound of log_3(x) for x > 0.
pub(crate) fn log3_lo(x: &BigFloat, p: usize, ctx: &mut Ctx) -> BigFloat {
    let n = x.ln(p, RoundingMode::Down, &mut ctx.cc);
    let (l3_lo, l3_hi) = ctx.ln3(p);
    // dividing a negative numerator by a smaller positive denominator
    // pushes the quotient further down
    let den = if n.is_negative() { l3_lo } else { l3_hi };
    n.div(&den, p, RoundingMode::Down)
}

/// Upper bound of log_3(x) for x > 0.
pub(crate) fn log3_hi(x: &BigFloat, p: usize, ctx: &mut Ctx) -> BigFloat {
    let n = x.ln(p, RoundingMode::Up, &mut ctx.cc);
    let (l3_lo, l3_hi) = ctx.ln3(p);
    let den = if n.is_negative() { l3_hi } else { l3_lo };
    n.div(&den, p, RoundingMode::Up)
}

pub(crate) fn add_i64(iv: &Interval, c: i64, p: usize) -> Interval {
    let k = BigFloat::from_i64(c, p);
    Interval {
        lo: iv.lo.add(&k, p, RoundingMode::Down),
        hi: iv.hi.add(&k, p, RoundingMode::Up),
    }
}

pub(crate) fn add(a: &Interval, b: &Interval, p: usize) -> Interval {
    Interval {
        lo: a.lo.add(&b.lo, p, RoundingMode::Down),
        hi: a.hi.add(&b.hi, p, RoundingMode::Up),
    }
}

/// A one-sided dyadic bound of a big natural number.
/// `up == false` gives a value `<= v`, `up == true` a value `>= v`.
pub(crate) fn bf_from_biguint(v: &BigUint, p: usize, up: bool) -> BigFloat {
    let nbits = v.bits();
    if nbits == 0 {
        return BigFloat::from_u64(0, p);
    }
    if nbits <= 63 {
        let words = v.to_u64_digits();
        return BigFloat::from_u64(words[0], p);
    }
    let keep = (p as u64).min(nbits);
    let shift = (nbits - keep) as usize;
    let mut top: BigUint = v >> shift;
    if up && ((&top << shift) != *v) {
        top += 1u32;
    }
    let digits = top.to_u64_digits();
    let tb = top.bits();
    let e = shift as i64 + tb as i64;
    debug_assert!(e <= i32::MAX as i64);
    BigFloat::from_words(&digits, Sign::Pos, e as i32)
}

/// Best-effort conversion for display and report output.
pub fn bf_to_f64(x: &BigFloat) -> f64 {
    if x.is_nan() {
        return f64::NAN;
    }
    if x.is_inf() {
        return if x.is_negative() {
            f64::NEG_INFINITY
        } else {
            f64::INFINITY
        };
    }
    if x.is_zero() {
        return 0.0;
    }
    let (words, _n, sign, e, _) = x.as_raw_parts().expect("finite value");
    let mut f = 0.0f64;
    let len = words.len();
    f += words[len - 1] as f64 * 2f64.powi(-64);
    if len >= 2 {
        f += words[len - 2] as f64 * 2f64.powi(-128);
    }
    let v = f * pow2_f64(e);
    if sign == Sign::Neg {
        -v
    } else {
        v
    }
}

fn pow2_f64(e: i32) -> f64 {
    if e > 1100 {
        f64::INFINITY
    } else if e < -1100 {
        0.0
    } else {
        2f64.powi(e)
    }
}

fn f64_next_down(f: f64) -> f64 {
    if f.is_nan() || f == f64::NEG_INFINITY {
        return f;
    }
    let bits = f.to_bits();
    let next = if f > 0.0 {
        bits - 1
    } else if f < 0.0 {
        bits + 1
    } else {
        (1u64 << 63) | 1
    };
    f64::from_bits(next)
}

fn f64_next_up(f: f64) -> f64 {
    -f64_next_down(-f)
}

/// f64 guaranteed `<=` the big-float value.
pub fn f64_down(x: &BigFloat) -> f64 {
    let v = bf_to_f64(x);
    if v.is_nan() || v.is_infinite() {
        return v;
    }
    f64_next_down(f64_next_down(v))
}

/// f64 guaranteed `>=` the big-float value.
pub fn f64_up(x: &BigFloat) -> f64 {
    let v = bf_to_f64(x);
    if v.is_nan() || v.is_infinite() {
        return v;
    }
    f64_next_up(f64_next_up(v))
}
