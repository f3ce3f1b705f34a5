//! Exact-or-enclosed nonnegative reals of tower magnitude, and the
//! certified total-order comparison used by every inequality check.
//!
//! A nonzero value is kept either symbolically as F^{-inv}(expr), or as a
//! canonical enclosure (level m, mantissa interval): the value lies in
//! F^m([lo, hi]) with the true mantissa in [log_3(2), 1). Levels order
//! values: a smaller canonical level means a smaller value, because F maps
//! [log_3(2), 1) onto [1, 2).

use std::cmp::Ordering;
use std::fmt;

use astro_float::{BigFloat, RoundingMode};
use num_bigint::BigUint;
use num_traits::One;

use super::error::TowerError;
use super::expr::TowerExpr;
use super::interval::{
    bf_le, bf_lt, f_inv, f64_down, f64_up, Ctx, Interval, MAX_PRECISION, MIN_PRECISION,
    PRECISION_LADDER,
};

#[derive(Debug, Clone)]
pub enum TowerReal {
    Zero,
    /// F^{-inv}(expr); `inv == 0` is the exact integer itself.
    Exact { inv: u64, expr: TowerExpr },
    Encl(Enclosure),
}

/// Leveled mantissa interval. `Zero` is kept apart because 0 = F^m(0) has
/// no canonical mantissa.
#[derive(Debug, Clone)]
pub enum Enclosure {
    Zero,
    Level { level: i64, lo: BigFloat, hi: BigFloat },
}

impl Enclosure {
    pub fn width_f64(&self, p: usize) -> f64 {
        match self {
            Enclosure::Zero => 0.0,
            Enclosure::Level { lo, hi, .. } => f64_up(&hi.sub(lo, p, RoundingMode::Up)),
        }
    }

    /// Numeric bounds of the represented value itself, when the level is
    /// small enough to exponentiate (used by numeric-mode callers).
    pub fn value_interval(&self, p: usize) -> Option<Interval> {
        match self {
            Enclosure::Zero => Some(Interval::zero(p)),
            Enclosure::Level { level, lo, hi } => {
                if *level > 5 {
                    return None;
                }
                let mut ctx = Ctx::new();
                let mut iv = Interval {
                    lo: lo.clone(),
                    hi: hi.clone(),
                };
                let mut l = *level;
                while l > 0 {
                    iv = super::interval::f_fwd(&iv, p, &mut ctx);
                    if iv.hi.is_inf() {
                        return None;
                    }
                    l -= 1;
                }
                while l < 0 {
                    iv = f_inv(&iv, p, &mut ctx);
                    l += 1;
                }
                Some(iv)
            }
        }
    }
}

impl TowerReal {
    pub fn zero() -> Self {
        TowerReal::Zero
    }

    /// Exact integer value of a canonical expression.
    pub fn exact(expr: TowerExpr) -> Self {
        Self::exact_inv(0, expr)
    }

    /// F^{-inv} applied to an exact expression, canonicalized: inverse
    /// applications cancel against F layers, and literals of the form
    /// 3^a - 1 unfold one inverse step exactly.
    pub fn exact_inv(inv: u64, expr: TowerExpr) -> Self {
        let mut inv = inv;
        let mut expr = expr;
        loop {
            match expr {
                TowerExpr::Lit(0) => return TowerReal::Zero,
                TowerExpr::FApp { j, base } if inv > 0 => {
                    let cancel = j.min(inv);
                    inv -= cancel;
                    expr = TowerExpr::f_app(j - cancel, *base);
                }
                TowerExpr::Lit(n) if inv > 0 => {
                    match exact_f_inverse(n) {
                        Some(m) => {
                            expr = TowerExpr::Lit(m);
                            inv -= 1;
                        }
                        None => break TowerReal::Exact {
                            inv,
                            expr: TowerExpr::Lit(n),
                        },
                    }
                }
                other => break TowerReal::Exact { inv, expr: other },
            }
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, TowerReal::Zero)
    }

    /// F^j of the value; exact index shift on symbolic forms, a level
    /// shift on enclosures.
    pub fn f_shift(&self, j: i64) -> Self {
        match self {
            TowerReal::Zero => TowerReal::Zero,
            TowerReal::Exact { inv, expr } => {
                if j >= 0 {
                    let cancel = (*inv).min(j as u64);
                    let rest = j as u64 - cancel;
                    TowerReal::exact_inv(inv - cancel, TowerExpr::f_app(rest, expr.clone()))
                } else {
                    TowerReal::exact_inv(inv + j.unsigned_abs(), expr.clone())
                }
            }
            TowerReal::Encl(Enclosure::Zero) => TowerReal::Zero,
            TowerReal::Encl(Enclosure::Level { level, lo, hi }) => {
                TowerReal::Encl(Enclosure::Level {
                    level: level + j,
                    lo: lo.clone(),
                    hi: hi.clone(),
                })
            }
        }
    }

    pub fn as_exact_expr(&self) -> Option<&TowerExpr> {
        match self {
            TowerReal::Exact { inv: 0, expr } => Some(expr),
            _ => None,
        }
    }
}

impl From<TowerExpr> for TowerReal {
    fn from(e: TowerExpr) -> Self {
        TowerReal::exact(e)
    }
}

/// F^{-1}(n) when exact: n + 1 = 3^a gives a.
fn exact_f_inverse(n: u64) -> Option<u64> {
    let m = n + 1;
    let mut v = 1u64;
    let mut a = 0u64;
    while v < m {
        v = v.checked_mul(3)?;
        a += 1;
    }
    (v == m).then_some(a)
}

fn structurally_equal(a: &TowerReal, b: &TowerReal) -> bool {
    match (a, b) {
        (TowerReal::Zero, TowerReal::Zero) => true,
        (
            TowerReal::Exact { inv: ia, expr: ea },
            TowerReal::Exact { inv: ib, expr: eb },
        ) => ia == ib && ea == eb,
        (
            TowerReal::Encl(Enclosure::Level {
                level: la,
                lo: alo,
                hi: ahi,
            }),
            TowerReal::Encl(Enclosure::Level {
                level: lb,
                lo: blo,
                hi: bhi,
            }),
        ) => la == lb && alo.cmp(blo) == Some(0) && ahi.cmp(bhi) == Some(0),
        (TowerReal::Encl(Enclosure::Zero), TowerReal::Encl(Enclosure::Zero)) => true,
        (TowerReal::Encl(Enclosure::Zero), TowerReal::Zero) => true,
        (TowerReal::Zero, TowerReal::Encl(Enclosure::Zero)) => true,
        _ => false,
    }
}

/// Mantissa widening used when an increment sits on a tower too large to
/// evaluate: the base exceeds 3^20000, so adding |c| <= 10^6 moves the
/// level-(m-1) representative by less than 10^6 * 3^(-20000) / ln 3, and
/// every inverse step below only contracts. 2^-30000 dominates that.
fn inc_slack(p: usize) -> BigFloat {
    let mut d = BigFloat::from_u64(1, p);
    d.set_exponent(-30000);
    d
}

fn enclose_expr(e: &TowerExpr, p: usize, ctx: &mut Ctx) -> Result<Enclosure, TowerError> {
    match e {
        TowerExpr::Lit(0) => Ok(Enclosure::Zero),
        TowerExpr::Lit(n) => Ok(normalize_int(&BigUint::from(*n), p, ctx)),
        TowerExpr::FApp { j, base } => match enclose_expr(base, p, ctx)? {
            Enclosure::Zero => Ok(Enclosure::Zero),
            Enclosure::Level { level, lo, hi } => Ok(Enclosure::Level {
                level: level + *j as i64,
                lo,
                hi,
            }),
        },
        TowerExpr::Inc { base, c } => match base.eval_exact() {
            Ok(v) => {
                let w = if *c >= 0 {
                    v + BigUint::from(*c as u64)
                } else {
                    v - BigUint::from(c.unsigned_abs())
                };
                if w == BigUint::from(0u32) {
                    return Ok(Enclosure::Zero);
                }
                Ok(normalize_int(&w, p, ctx))
            }
            Err(TowerError::TooLarge) => match enclose_expr(base, p, ctx)? {
                Enclosure::Zero => unreachable!("oversized tower cannot be zero"),
                Enclosure::Level { level, lo, hi } => {
                    let d = inc_slack(p);
                    Ok(Enclosure::Level {
                        level,
                        lo: lo.sub(&d, p, RoundingMode::Down),
                        hi: hi.add(&d, p, RoundingMode::Up),
                    })
                }
            },
            Err(other) => Err(other),
        },
    }
}

/// Canonical enclosure of a positive integer: pull the value down with
/// F^{-1} until the interval drops below 1. Since log_3(1 + x) >= log_3 2
/// for x >= 1, the final mantissa cannot undershoot the canonical range by
/// more than outward rounding.
fn normalize_int(w: &BigUint, p: usize, ctx: &mut Ctx) -> Enclosure {
    debug_assert!(*w >= BigUint::one());
    let mut iv = Interval::from_biguint(w, p);
    let mut level: i64 = 0;
    let one = BigFloat::from_u64(1, p);
    let mut guard = 0;
    while bf_le(&one, &iv.hi) {
        iv = f_inv(&iv, p, ctx);
        level += 1;
        guard += 1;
        assert!(guard < 10_000, "normalization runaway");
    }
    Enclosure::Level {
        level,
        lo: iv.lo,
        hi: iv.hi,
    }
}

pub(crate) fn enclosure_of(
    x: &TowerReal,
    p: usize,
    ctx: &mut Ctx,
) -> Result<Enclosure, TowerError> {
    match x {
        TowerReal::Zero => Ok(Enclosure::Zero),
        TowerReal::Exact { inv, expr } => match enclose_expr(expr, p, ctx)? {
            Enclosure::Zero => Ok(Enclosure::Zero),
            Enclosure::Level { level, lo, hi } => Ok(Enclosure::Level {
                level: level - *inv as i64,
                lo,
                hi,
            }),
        },
        TowerReal::Encl(e) => Ok(e.clone()),
    }
}

/// Outward enclosure of the value at a requested bit precision.
pub fn eval_enclosure(x: &TowerReal, precision: usize) -> Result<Enclosure, TowerError> {
    if !(MIN_PRECISION..=MAX_PRECISION).contains(&precision) {
        return Err(TowerError::BadPrecision(precision));
    }
    let mut ctx = Ctx::new();
    enclosure_of(x, precision, &mut ctx)
}

/// Enclosure of an expression (exact integers included for convenience).
pub fn eval_enclosure_expr(e: &TowerExpr, precision: usize) -> Result<Enclosure, TowerError> {
    eval_enclosure(&TowerReal::exact(e.clone()), precision)
}

const PULL_CAP: i64 = 100_000;

/// Decide order of two leveled intervals by moving both to the higher
/// level with F^{-1} (a contraction) and comparing mantissa intervals.
fn separate(a: &Enclosure, b: &Enclosure, p: usize, ctx: &mut Ctx) -> Option<Ordering> {
    match (a, b) {
        (Enclosure::Zero, Enclosure::Zero) => Some(Ordering::Equal),
        (Enclosure::Zero, Enclosure::Level { .. }) => Some(Ordering::Less),
        (Enclosure::Level { .. }, Enclosure::Zero) => Some(Ordering::Greater),
        (
            Enclosure::Level {
                level: la,
                lo: alo,
                hi: ahi,
            },
            Enclosure::Level {
                level: lb,
                lo: blo,
                hi: bhi,
            },
        ) => {
            let target = (*la).max(*lb);
            if target - la > PULL_CAP || target - lb > PULL_CAP {
                return None;
            }
            let mut ia = Interval {
                lo: alo.clone(),
                hi: ahi.clone(),
            };
            let mut ib = Interval {
                lo: blo.clone(),
                hi: bhi.clone(),
            };
            for _ in *la..target {
                ia = f_inv(&ia, p, ctx);
            }
            for _ in *lb..target {
                ib = f_inv(&ib, p, ctx);
            }
            if bf_lt(&ia.hi, &ib.lo) {
                Some(Ordering::Less)
            } else if bf_lt(&ib.hi, &ia.lo) {
                Some(Ordering::Greater)
            } else {
                None
            }
        }
    }
}

/// Exact integer route: only usable when both sides reduce to integers of
/// the same inverse depth within the evaluation guard.
fn exact_route(a: &TowerReal, b: &TowerReal) -> Result<Option<Ordering>, TowerError> {
    let (ia, ea, ib, eb) = match (a, b) {
        (TowerReal::Exact { inv: ia, expr: ea }, TowerReal::Exact { inv: ib, expr: eb }) => {
            (*ia, ea, *ib, eb)
        }
        _ => return Ok(None),
    };
    // align inverse depths by lifting the shallower side
    let (lifted_a, lifted_b) = if ia == ib {
        (ea.clone(), eb.clone())
    } else if ia < ib {
        (TowerExpr::f_app(ib - ia, ea.clone()), eb.clone())
    } else {
        (ea.clone(), TowerExpr::f_app(ia - ib, eb.clone()))
    };
    let va = match lifted_a.eval_exact() {
        Ok(v) => v,
        Err(TowerError::TooLarge) => return Ok(None),
        Err(e) => return Err(e),
    };
    let vb = match lifted_b.eval_exact() {
        Ok(v) => v,
        Err(TowerError::TooLarge) => return Ok(None),
        Err(e) => return Err(e),
    };
    match va.cmp(&vb) {
        Ordering::Equal => {
            // value-equal but structurally distinct: refuse to guess
            Err(TowerError::UnresolvedComparison {
                lhs: a.to_string(),
                rhs: b.to_string(),
            })
        }
        ord => Ok(Some(ord)),
    }
}

/// Certified three-way comparison. `Equal` is returned only on structural
/// identity of canonical forms; `Less`/`Greater` come from interval
/// separation under precision escalation or from exact integer evaluation.
pub fn compare(a: &TowerReal, b: &TowerReal) -> Result<Ordering, TowerError> {
    compare_report(a, b).map(|(ord, _)| ord)
}

/// Like [`compare`], also reporting the precision (bits) that decided;
/// 0 means a structural or exact-integer decision.
pub fn compare_report(a: &TowerReal, b: &TowerReal) -> Result<(Ordering, usize), TowerError> {
    if structurally_equal(a, b) {
        return Ok((Ordering::Equal, 0));
    }
    match (a.is_zero(), b.is_zero()) {
        (true, false) => return Ok((Ordering::Less, 0)),
        (false, true) => return Ok((Ordering::Greater, 0)),
        _ => {}
    }
    let mut ctx = Ctx::new();
    for (step, &p) in PRECISION_LADDER.iter().enumerate() {
        let ma = enclosure_of(a, p, &mut ctx)?;
        let mb = enclosure_of(b, p, &mut ctx)?;
        if let Some(ord) = separate(&ma, &mb, p, &mut ctx) {
            return Ok((ord, p));
        }
        if step == 0 {
            if let Some(ord) = exact_route(a, b)? {
                return Ok((ord, 0));
            }
        }
    }
    Err(TowerError::UnresolvedComparison {
        lhs: a.to_string(),
        rhs: b.to_string(),
    })
}

pub fn compare_expr(a: &TowerExpr, b: &TowerExpr) -> Result<Ordering, TowerError> {
    compare(&TowerReal::exact(a.clone()), &TowerReal::exact(b.clone()))
}

/// The membership threshold F^{k-n}(1), exact for any sign of k - n.
pub fn threshold(k: i64, n: i64) -> TowerReal {
    let d = k - n;
    if d >= 0 {
        TowerReal::exact(TowerExpr::f_app(d as u64, TowerExpr::one()))
    } else {
        TowerReal::exact_inv(d.unsigned_abs(), TowerExpr::one())
    }
}

/// F^j of a value (j may be negative).
pub fn f_apply(x: &TowerReal, j: i64) -> TowerReal {
    x.f_shift(j)
}

/// Guard used by `eval_exact`: callers sometimes want to know whether the
/// exact route can work before paying for it.
pub fn exact_feasible(e: &TowerExpr) -> bool {
    e.eval_exact().is_ok()
}

impl fmt::Display for TowerReal {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TowerReal::Zero => write!(f, "0"),
            TowerReal::Exact { inv: 0, expr } => write!(f, "{expr}"),
            TowerReal::Exact { inv, expr } => write!(f, "F^-{inv}({expr})"),
            TowerReal::Encl(e) => write!(f, "{e}"),
        }
    }
}

impl fmt::Display for Enclosure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Enclosure::Zero => write!(f, "0"),
            Enclosure::Level { level, lo, hi } => {
                write!(
                    f,
                    "F^{}([{:.6e}, {:.6e}])",
                    level,
                    f64_down(lo),
                    f64_up(hi)
                )
            }
        }
    }
}
