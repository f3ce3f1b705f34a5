//! Symbolic nonnegative integers of tower magnitude.
//!
//! Values are generated by literals, the map F(t) = 3^t - 1, and small
//! integer increments. Constructors canonicalize, so structural equality
//! of two expressions implies equality of their values.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint};
use num_traits::ToPrimitive;

use super::error::TowerError;

/// Literal cap.
pub const LIT_MAX: u64 = 1_000_000;
/// Increment magnitude cap.
pub const INC_MAX: i64 = 1_000_000;
/// `eval_exact` refuses results beyond 3^EXACT_EXP_MAX.
pub const EXACT_EXP_MAX: u64 = 20_000;

/// Canonical form:
/// - `Lit(n)` with `n <= LIT_MAX`;
/// - `FApp { j >= 1, base }` where `base` is not an `FApp`, and a `Lit`
///   base is not foldable (applying F once would exceed `LIT_MAX`);
/// - `Inc { base, c != 0 }` where `base` is an `FApp`.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum TowerExpr {
    Lit(u64),
    FApp { j: u64, base: Box<TowerExpr> },
    Inc { base: Box<TowerExpr>, c: i64 },
}

/// F on small integers, when the result stays a literal.
fn f_small(n: u64) -> Option<u64> {
    // 3^13 - 1 already exceeds the literal cap
    if n <= 12 {
        Some(3u64.pow(n as u32) - 1)
    } else {
        None
    }
}

/// Exponent a with 3^a == m, if any.
fn log3_exact(m: u64) -> Option<u64> {
    let mut v = 1u64;
    let mut a = 0u64;
    while v < m {
        v = v.checked_mul(3)?;
        a += 1;
    }
    (v == m).then_some(a)
}

impl TowerExpr {
    pub fn lit(n: u64) -> Result<Self, TowerError> {
        if n > LIT_MAX {
            return Err(TowerError::LitTooLarge(n));
        }
        Ok(TowerExpr::Lit(n))
    }

    pub fn zero() -> Self {
        TowerExpr::Lit(0)
    }

    pub fn one() -> Self {
        TowerExpr::Lit(1)
    }

    /// F^j applied to a canonical expression; canonicalizing, total.
    pub fn f_app(j: u64, e: TowerExpr) -> Self {
        if j == 0 {
            return e;
        }
        match e {
            TowerExpr::FApp { j: j2, base } => Self::f_app(j + j2, *base),
            TowerExpr::Lit(mut n) => {
                if n == 0 {
                    return TowerExpr::Lit(0);
                }
                let mut j = j;
                while j > 0 {
                    match f_small(n) {
                        Some(m) => {
                            n = m;
                            j -= 1;
                        }
                        None => break,
                    }
                }
                if j == 0 {
                    TowerExpr::Lit(n)
                } else {
                    TowerExpr::FApp {
                        j,
                        base: Box::new(TowerExpr::Lit(n)),
                    }
                }
            }
            inc @ TowerExpr::Inc { .. } => TowerExpr::FApp {
                j,
                base: Box::new(inc),
            },
        }
    }

    /// Increment by a small signed constant; canonicalizing.
    pub fn inc(e: TowerExpr, c: i64) -> Result<Self, TowerError> {
        if c == 0 {
            return Ok(e);
        }
        if c.unsigned_abs() as u64 > INC_MAX as u64 {
            return Err(TowerError::IncTooLarge(c));
        }
        match e {
            TowerExpr::Lit(n) => {
                let m = n as i64 + c;
                if m < 0 {
                    return Err(TowerError::NegativeValue);
                }
                Self::lit(m as u64)
            }
            TowerExpr::Inc { base, c: c2 } => {
                let sum = c
                    .checked_add(c2)
                    .ok_or(TowerError::IncTooLarge(c))?;
                Self::inc(*base, sum)
            }
            fapp @ TowerExpr::FApp { .. } => Ok(TowerExpr::Inc {
                base: Box::new(fapp),
                c,
            }),
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, TowerExpr::Lit(0))
    }

    pub fn as_lit(&self) -> Option<u64> {
        match self {
            TowerExpr::Lit(n) => Some(*n),
            _ => None,
        }
    }

    /// Total count of F applications in the expression.
    pub fn level_weight(&self) -> u64 {
        match self {
            TowerExpr::Lit(_) => 0,
            TowerExpr::FApp { j, base } => j + base.level_weight(),
            TowerExpr::Inc { base, .. } => base.level_weight(),
        }
    }

    /// Exact integer value, guarded against unrepresentable magnitudes.
    pub fn eval_exact(&self) -> Result<BigUint, TowerError> {
        match self {
            TowerExpr::Lit(n) => Ok(BigUint::from(*n)),
            TowerExpr::Inc { base, c } => {
                let v = base.eval_exact()?;
                let w = BigInt::from(v) + BigInt::from(*c);
                match w.to_biguint() {
                    Some(u) => Ok(u),
                    // constructors reject negative values
                    None => Err(TowerError::NegativeValue),
                }
            }
            TowerExpr::FApp { j, base } => {
                let mut v = base.eval_exact()?;
                let cap = BigUint::from(EXACT_EXP_MAX);
                for _ in 0..*j {
                    if v > cap {
                        return Err(TowerError::TooLarge);
                    }
                    let e = v.to_u32().expect("bounded exponent");
                    v = BigUint::from(3u32).pow(e) - 1u32;
                }
                Ok(v)
            }
        }
    }
}

impl fmt::Display for TowerExpr {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            TowerExpr::Lit(n) => write!(f, "{n}"),
            TowerExpr::FApp { j, base } => write!(f, "F^{j}({base})"),
            TowerExpr::Inc { base, c } => {
                if *c >= 0 {
                    write!(f, "{base}+{c}")
                } else {
                    write!(f, "{base}-{}", -c)
                }
            }
        }
    }
}

impl FromStr for TowerExpr {
    type Err = TowerError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut p = Parser {
            s: s.as_bytes(),
            pos: 0,
        };
        p.skip_ws();
        let e = p.expr()?;
        p.skip_ws();
        if p.pos != p.s.len() {
            return Err(p.err("trailing input"));
        }
        Ok(e)
    }
}

struct Parser<'a> {
    s: &'a [u8],
    pos: usize,
}

impl<'a> Parser<'a> {
    fn err(&self, msg: &str) -> TowerError {
        TowerError::Parse {
            pos: self.pos,
            msg: msg.to_string(),
        }
    }

    fn skip_ws(&mut self) {
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_whitespace() {
            self.pos += 1;
        }
    }

    fn peek(&self) -> Option<u8> {
        self.s.get(self.pos).copied()
    }

    fn eat(&mut self, b: u8) -> Result<(), TowerError> {
        if self.peek() == Some(b) {
            self.pos += 1;
            Ok(())
        } else {
            Err(self.err(&format!("expected '{}'", b as char)))
        }
    }

    fn int(&mut self) -> Result<u64, TowerError> {
        let start = self.pos;
        while self.pos < self.s.len() && self.s[self.pos].is_ascii_digit() {
            self.pos += 1;
        }
        if self.pos == start {
            return Err(self.err("expected integer"));
        }
        std::str::from_utf8(&self.s[start..self.pos])
            .expect("digits")
            .parse::<u64>()
            .map_err(|_| self.err("integer out of range"))
    }

    fn primary(&mut self) -> Result<TowerExpr, TowerError> {
        self.skip_ws();
        match self.peek() {
            Some(b'F') => {
                self.pos += 1;
                self.eat(b'^')?;
                let j = self.int()?;
                if j == 0 {
                    return Err(self.err("F^j requires j >= 1"));
                }
                self.eat(b'(')?;
                let inner = self.expr()?;
                self.skip_ws();
                self.eat(b')')?;
                Ok(TowerExpr::f_app(j, inner))
            }
            Some(d) if d.is_ascii_digit() => {
                let n = self.int()?;
                TowerExpr::lit(n)
            }
            _ => Err(self.err("expected literal or F^j(...)")),
        }
    }

    fn expr(&mut self) -> Result<TowerExpr, TowerError> {
        let mut e = self.primary()?;
        loop {
            self.skip_ws();
            match self.peek() {
                Some(b'+') => {
                    self.pos += 1;
                    self.skip_ws();
                    let c = self.int()?;
                    let c = i64::try_from(c).map_err(|_| self.err("increment too large"))?;
                    e = TowerExpr::inc(e, c)?;
                }
                Some(b'-') => {
                    self.pos += 1;
                    self.skip_ws();
                    let c = self.int()?;
                    let c = i64::try_from(c).map_err(|_| self.err("increment too large"))?;
                    e = TowerExpr::inc(e, -c)?;
                }
                _ => break,
            }
        }
        Ok(e)
    }
}

impl serde::Serialize for TowerExpr {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        ser.serialize_str(&self.to_string())
    }
}

impl<'de> serde::Deserialize<'de> for TowerExpr {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        let s = String::deserialize(de)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn folding_collapses_small_towers() {
        let e = TowerExpr::f_app(3, TowerExpr::one());
        assert_eq!(e, TowerExpr::Lit(6560));
        let e = TowerExpr::f_app(1, TowerExpr::lit(3).unwrap());
        assert_eq!(e, TowerExpr::Lit(26));
        // F^8(1) folds three layers and keeps the rest symbolic
        let e = TowerExpr::f_app(8, TowerExpr::one());
        assert_eq!(
            e,
            TowerExpr::FApp {
                j: 5,
                base: Box::new(TowerExpr::Lit(6560))
            }
        );
    }

    #[test]
    fn zero_is_fixed() {
        assert_eq!(TowerExpr::f_app(17, TowerExpr::zero()), TowerExpr::Lit(0));
    }

    #[test]
    fn nested_increments_collapse() {
        let e = TowerExpr::f_app(8, TowerExpr::one());
        let e = TowerExpr::inc(e, 2).unwrap();
        let e = TowerExpr::inc(e, -1).unwrap();
        match &e {
            TowerExpr::Inc { c, .. } => assert_eq!(*c, 1),
            other => panic!("unexpected {other:?}"),
        }
        let e = TowerExpr::inc(e, -1).unwrap();
        match &e {
            TowerExpr::FApp { j: 5, .. } => {}
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn negative_literal_rejected() {
        let err = TowerExpr::inc(TowerExpr::lit(3).unwrap(), -5).unwrap_err();
        assert!(matches!(err, TowerError::NegativeValue));
    }

    #[test]
    fn eval_exact_examples() {
        let e = TowerExpr::f_app(3, TowerExpr::one());
        assert_eq!(e.eval_exact().unwrap(), BigUint::from(6560u32));
        let e = TowerExpr::f_app(1, TowerExpr::lit(3).unwrap());
        assert_eq!(e.eval_exact().unwrap(), BigUint::from(26u32));
        // F^4(1) = 3^6560 - 1, a 3130-digit integer
        let e = TowerExpr::FApp {
            j: 1,
            base: Box::new(TowerExpr::Lit(6560)),
        };
        let v = e.eval_exact().unwrap();
        let oracle = BigUint::from(3u32).pow(6560) - 1u32;
        assert_eq!(v, oracle);
        assert_eq!(v.to_string().len(), 3130);
    }

    #[test]
    fn eval_exact_guard() {
        // F^5(1) needs 3^(3^6560 - 1)
        let e = TowerExpr::f_app(5, TowerExpr::one());
        assert!(matches!(e.eval_exact(), Err(TowerError::TooLarge)));
    }

    #[test]
    fn parse_and_display_round_trip() {
        for s in ["0", "5", "F^3(1)", "F^11(3)", "F^2(1)+1"] {
            let e: TowerExpr = s.parse().unwrap();
            let back: TowerExpr = e.to_string().parse().unwrap();
            assert_eq!(e, back);
        }
        // canonical output folds
        let e: TowerExpr = "F^3(1)".parse().unwrap();
        assert_eq!(e.to_string(), "6560");
    }

    #[test]
    fn parse_rejects_zero_exponent() {
        assert!("F^0(1)".parse::<TowerExpr>().is_err());
    }
}
