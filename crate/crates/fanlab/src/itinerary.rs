//! Finitely described integer sequences with shifts and the certified
//! supremum t*(s, n) = sup_{k>=1} F^{-k} |s_{n+k}|.
//!
//! A sequence is an explicit finite prefix over a tail rule. Only tail
//! families whose shifted suprema are attained (or exactly known) are
//! representable, so every certificate stays exact.

use std::collections::BTreeMap;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::tower::{compare, f_apply, TowerError, TowerExpr, TowerReal, LIT_MAX};

#[derive(Debug, Clone, thiserror::Error)]
pub enum SeqError {
    #[error("periodic tail block must be non-empty")]
    EmptyBlock,

    #[error("periodic tail entry {0} exceeds the 10^6 cap")]
    BlockEntryTooLarge(u64),

    #[error("witness tail core must be a positive value")]
    ZeroCore,

    #[error("witness tail start 2*{l0}^2+1 does not clear its base {base}")]
    WitnessBase { l0: u64, base: u64 },

    #[error("sequence spec: {0}")]
    Spec(String),
}

/// Tail certificate. Rules are evaluated at the original (unshifted)
/// position; shifting a sequence only moves the viewpoint.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum TailCert {
    /// All-zero tail.
    Zero,
    /// Block repeated over all positions, indexed by position mod length.
    Periodic { block: Vec<u64> },
    /// Magnitude F^{q - base}(core) at original positions q = 2l^2 + 1
    /// for l >= l0, zero elsewhere.
    Witness {
        core: TowerExpr,
        base: u64,
        l0: u64,
    },
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Entry {
    pub mag: TowerExpr,
    pub sign: i8,
}

/// An element of the sequence space: explicit prefix entries over a tail
/// rule, plus the shift offset accumulated so far. Prefix overrides tail
/// on overlapping positions.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ItinerarySeq {
    prefix: BTreeMap<u64, Entry>,
    tail: TailCert,
    offset: u64,
}

impl ItinerarySeq {
    pub fn new(
        prefix: impl IntoIterator<Item = (u64, Entry)>,
        tail: TailCert,
    ) -> Result<Self, SeqError> {
        match &tail {
            TailCert::Zero => {}
            TailCert::Periodic { block } => {
                if block.is_empty() {
                    return Err(SeqError::EmptyBlock);
                }
                if let Some(&b) = block.iter().find(|&&b| b > LIT_MAX) {
                    return Err(SeqError::BlockEntryTooLarge(b));
                }
            }
            TailCert::Witness { core, base, l0 } => {
                if core.is_zero() {
                    return Err(SeqError::ZeroCore);
                }
                if 2 * l0 * l0 + 1 <= *base {
                    return Err(SeqError::WitnessBase {
                        l0: *l0,
                        base: *base,
                    });
                }
            }
        }
        let mut map = BTreeMap::new();
        for (pos, e) in prefix {
            map.insert(pos, e);
        }
        Ok(ItinerarySeq {
            prefix: map,
            tail,
            offset: 0,
        })
    }

    pub fn zero() -> Self {
        Self::new([], TailCert::Zero).expect("zero tail")
    }

    pub fn constant(v: u64) -> Self {
        if v == 0 {
            Self::zero()
        } else {
            Self::new([], TailCert::Periodic { block: vec![v] }).expect("constant tail")
        }
    }

    pub fn periodic(block: Vec<u64>) -> Result<Self, SeqError> {
        Self::new([], TailCert::Periodic { block })
    }

    /// The canonical stratum witness: magnitude F^{2l^2+1}(c) at every
    /// position 2l^2+1 with l >= k0, zero elsewhere.
    pub fn witness(c: u64, k0: u64) -> Result<Self, SeqError> {
        let core = TowerExpr::lit(c).map_err(|e| SeqError::Spec(e.to_string()))?;
        Self::new(
            [],
            TailCert::Witness {
                core,
                base: 0,
                l0: k0.max(1),
            },
        )
    }

    pub fn with_prefix(mut self, pos: u64, mag: TowerExpr, sign: i8) -> Self {
        self.prefix.insert(pos, Entry { mag, sign });
        self
    }

    pub fn prefix(&self) -> &BTreeMap<u64, Entry> {
        &self.prefix
    }

    pub fn tail(&self) -> &TailCert {
        &self.tail
    }

    pub fn offset(&self) -> u64 {
        self.offset
    }

    pub fn max_prefix_pos(&self) -> Option<u64> {
        self.prefix.keys().next_back().copied()
    }

    /// sigma^n: prefix positions drop by n (entries below n vanish), the
    /// tail is re-indexed through the accumulated offset.
    pub fn shift(&self, n: u64) -> Self {
        if n == 0 {
            return self.clone();
        }
        let prefix = self
            .prefix
            .iter()
            .filter_map(|(&pos, e)| pos.checked_sub(n).map(|p| (p, e.clone())))
            .collect();
        // a zero tail carries no positional information
        let offset = match &self.tail {
            TailCert::Zero => self.offset,
            _ => self.offset + n,
        };
        ItinerarySeq {
            prefix,
            tail: self.tail.clone(),
            offset,
        }
    }

    fn tail_magnitude(&self, original_pos: u64) -> TowerExpr {
        match &self.tail {
            TailCert::Zero => TowerExpr::zero(),
            TailCert::Periodic { block } => {
                let b = block[(original_pos % block.len() as u64) as usize];
                TowerExpr::lit(b).expect("validated block entry")
            }
            TailCert::Witness { core, base, l0 } => match witness_index(original_pos) {
                Some(l) if l >= *l0 => {
                    debug_assert!(original_pos > *base);
                    TowerExpr::f_app(original_pos - base, core.clone())
                }
                _ => TowerExpr::zero(),
            },
        }
    }

    /// |s_k|, resolved through the prefix-overrides-tail rule.
    pub fn magnitude_at(&self, k: u64) -> TowerExpr {
        match self.prefix.get(&k) {
            Some(e) => e.mag.clone(),
            None => self.tail_magnitude(k + self.offset),
        }
    }

    pub fn sign_at(&self, k: u64) -> i8 {
        self.prefix.get(&k).map(|e| e.sign).unwrap_or(1)
    }

    /// True when every magnitude from position `from` on is zero.
    pub fn zero_beyond(&self, from: u64) -> bool {
        let tail_zero = match &self.tail {
            TailCert::Zero => true,
            TailCert::Periodic { block } => block.iter().all(|&b| b == 0),
            TailCert::Witness { .. } => false,
        };
        tail_zero
            && self
                .prefix
                .range(from..)
                .all(|(_, e)| e.mag.is_zero())
    }

    /// Largest index that needs inspection when the tail is periodic:
    /// beyond it every residue class has already produced its maximal
    /// term, because F^{-k}(B) strictly decreases in k.
    fn periodic_window(&self, n: u64, block_len: u64) -> u64 {
        let prefix_span = self
            .max_prefix_pos()
            .map(|p| p.saturating_sub(n))
            .unwrap_or(0);
        prefix_span + block_len + 1
    }
}

fn witness_index(q: u64) -> Option<u64> {
    // q = 2 l^2 + 1
    if q % 2 == 0 || q == 0 {
        return None;
    }
    let half = (q - 1) / 2;
    let l = (half as f64).sqrt().round() as u64;
    for cand in l.saturating_sub(1)..=l + 1 {
        if cand * cand == half {
            return Some(cand);
        }
    }
    None
}

/// How the supremum is attained.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
pub enum Attainment {
    /// Every term is zero.
    AllZero,
    /// Attained by the explicit prefix entry at shifted index k.
    PrefixIndex { k: u64 },
    /// Attained by a periodic-tail term at shifted index k.
    PeriodicIndex { k: u64 },
    /// Attained by the witness-tail rule, first at parameter l.
    WitnessRule { l: u64 },
}

/// Exact value of a shifted supremum together with its attainment witness
/// and the window beyond which all terms are certified below the value.
#[derive(Debug, Clone)]
pub struct SupCertificate {
    pub value: TowerReal,
    pub attained: Attainment,
    pub window: u64,
}

/// t*(s, n) = sup_{k>=1} F^{-k} |s_{n+k}|, exact.
pub fn t_star(s: &ItinerarySeq, n: u64) -> Result<SupCertificate, TowerError> {
    let mut candidates: Vec<(TowerReal, Attainment)> = Vec::new();
    let mut window = 0u64;

    for (&pos, e) in s.prefix.range(n + 1..) {
        let k = pos - n;
        window = window.max(k);
        if e.mag.is_zero() {
            continue;
        }
        candidates.push((
            TowerReal::exact_inv(k, e.mag.clone()),
            Attainment::PrefixIndex { k },
        ));
    }

    match &s.tail {
        TailCert::Zero => {}
        TailCert::Periodic { block } => {
            let len = block.len() as u64;
            let end = s.periodic_window(n, len);
            let mut seen = vec![false; block.len()];
            let mut covered = 0usize;
            for k in 1..=end {
                let pos = n + k;
                if s.prefix.contains_key(&pos) {
                    continue;
                }
                let q = pos + s.offset;
                let r = (q % len) as usize;
                if seen[r] {
                    continue;
                }
                seen[r] = true;
                covered += 1;
                window = window.max(k);
                let b = block[r];
                if b > 0 {
                    candidates.push((
                        TowerReal::exact_inv(k, TowerExpr::lit(b).expect("validated")),
                        Attainment::PeriodicIndex { k },
                    ));
                }
                if covered == block.len() {
                    break;
                }
            }
        }
        TailCert::Witness { core, base, l0 } => {
            // every uncovered witness position beyond the shift contributes
            // exactly F^{n + offset - base}(core)
            let mut l = *l0;
            let first = loop {
                let q = 2 * l * l + 1;
                let visible = q > n + s.offset && !s.prefix.contains_key(&(q - s.offset));
                if visible {
                    break l;
                }
                l += 1;
            };
            let d = (n + s.offset) as i64 - *base as i64;
            let value = if d >= 0 {
                TowerReal::exact(TowerExpr::f_app(d as u64, core.clone()))
            } else {
                TowerReal::exact_inv(d.unsigned_abs(), core.clone())
            };
            let k_first = 2 * first * first + 1 - s.offset - n;
            window = window.max(k_first);
            candidates.push((value, Attainment::WitnessRule { l: first }));
        }
    }

    let mut best: Option<(TowerReal, Attainment)> = None;
    for (v, a) in candidates {
        match &best {
            None => best = Some((v, a)),
            Some((bv, _)) => {
                if compare(&v, bv)? == std::cmp::Ordering::Greater {
                    best = Some((v, a));
                }
            }
        }
    }
    match best {
        Some((value, attained)) => Ok(SupCertificate {
            value,
            attained,
            window,
        }),
        None => Ok(SupCertificate {
            value: TowerReal::zero(),
            attained: Attainment::AllZero,
            window,
        }),
    }
}

/// The orbit-aligned supremum sup_{k>=1} F^{-k} |s_{n+k-1}|, which brackets
/// the minimal escape height of the n-shift: it satisfies
/// P <= t_{sigma^n(s)} <= P + 1, with the current entry included.
/// Identity used: P = F^{-1}(max(|s_n|, t*(s, n))).
pub fn escape_sup(s: &ItinerarySeq, n: u64) -> Result<TowerReal, TowerError> {
    let head = TowerReal::exact(s.magnitude_at(n));
    let rest = t_star(s, n)?.value;
    let m = match compare(&head, &rest)? {
        std::cmp::Ordering::Less => rest,
        _ => head,
    };
    Ok(f_apply(&m, -1))
}

// ---------------------------------------------------------------------
// JSON sequence specification

#[derive(Serialize, Deserialize)]
struct SeqSpec {
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    prefix: Vec<PrefixSpec>,
    tail: TailSpec,
    #[serde(default, skip_serializing_if = "is_zero_u64")]
    offset: u64,
}

fn is_zero_u64(v: &u64) -> bool {
    *v == 0
}

#[derive(Serialize, Deserialize)]
struct PrefixSpec {
    pos: u64,
    mag: TowerExpr,
    #[serde(default = "default_sign")]
    sign: i8,
}

fn default_sign() -> i8 {
    1
}

#[derive(Serialize, Deserialize)]
#[serde(untagged)]
enum TailSpec {
    Name(String),
    Typed(TypedTail),
}

#[derive(Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
enum TypedTail {
    Zero,
    Periodic {
        block: Vec<u64>,
    },
    Witness {
        #[serde(default, skip_serializing_if = "Option::is_none")]
        c: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        k0: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        core: Option<TowerExpr>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        base: Option<u64>,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        l0: Option<u64>,
    },
}

impl Serialize for ItinerarySeq {
    fn serialize<S: serde::Serializer>(&self, ser: S) -> Result<S::Ok, S::Error> {
        let tail = match &self.tail {
            TailCert::Zero => TailSpec::Typed(TypedTail::Zero),
            TailCert::Periodic { block } => TailSpec::Typed(TypedTail::Periodic {
                block: block.clone(),
            }),
            TailCert::Witness { core, base, l0 } => {
                if *base == 0 {
                    if let Some(c) = core.as_lit() {
                        TailSpec::Typed(TypedTail::Witness {
                            c: Some(c),
                            k0: Some(*l0),
                            core: None,
                            base: None,
                            l0: None,
                        })
                    } else {
                        TailSpec::Typed(TypedTail::Witness {
                            c: None,
                            k0: None,
                            core: Some(core.clone()),
                            base: Some(*base),
                            l0: Some(*l0),
                        })
                    }
                } else {
                    TailSpec::Typed(TypedTail::Witness {
                        c: None,
                        k0: None,
                        core: Some(core.clone()),
                        base: Some(*base),
                        l0: Some(*l0),
                    })
                }
            }
        };
        let spec = SeqSpec {
            prefix: self
                .prefix
                .iter()
                .map(|(&pos, e)| PrefixSpec {
                    pos,
                    mag: e.mag.clone(),
                    sign: e.sign,
                })
                .collect(),
            tail,
            offset: self.offset,
        };
        spec.serialize(ser)
    }
}

impl<'de> Deserialize<'de> for ItinerarySeq {
    fn deserialize<D: serde::Deserializer<'de>>(de: D) -> Result<Self, D::Error> {
        use serde::de::Error;
        let spec = SeqSpec::deserialize(de)?;
        let tail = match spec.tail {
            TailSpec::Name(name) => match name.as_str() {
                "zero" => TailCert::Zero,
                other => {
                    return Err(D::Error::custom(format!(
                        "unknown tail name {other:?}; expected \"zero\""
                    )))
                }
            },
            TailSpec::Typed(TypedTail::Zero) => TailCert::Zero,
            TailSpec::Typed(TypedTail::Periodic { block }) => TailCert::Periodic { block },
            TailSpec::Typed(TypedTail::Witness {
                c,
                k0,
                core,
                base,
                l0,
            }) => match (c, core) {
                (Some(c), None) => TailCert::Witness {
                    core: TowerExpr::lit(c).map_err(D::Error::custom)?,
                    base: base.unwrap_or(0),
                    l0: k0.or(l0).unwrap_or(1),
                },
                (None, Some(core)) => TailCert::Witness {
                    core,
                    base: base.unwrap_or(0),
                    l0: l0.or(k0).unwrap_or(1),
                },
                _ => {
                    return Err(D::Error::custom(
                        "witness tail needs either \"c\" or \"core\"",
                    ))
                }
            },
        };
        let mut seq = ItinerarySeq::new(
            spec.prefix
                .into_iter()
                .map(|p| (p.pos, Entry {
                    mag: p.mag,
                    sign: p.sign,
                })),
            tail,
        )
        .map_err(D::Error::custom)?;
        seq.offset = spec.offset;
        Ok(seq)
    }
}

impl fmt::Display for ItinerarySeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let json = serde_json::to_string(self).map_err(|_| fmt::Error)?;
        f.write_str(&json)
    }
}

/// Parse a sequence from the external shorthand or JSON form:
/// `zero`, `const:<v>`, `canonical:<n>:<c>`, or an inline JSON spec.
pub fn parse_seq_spec(text: &str) -> Result<ItinerarySeq, SeqError> {
    let t = text.trim();
    if t == "zero" {
        return Ok(ItinerarySeq::zero());
    }
    if let Some(rest) = t.strip_prefix("const:") {
        let v: u64 = rest
            .parse()
            .map_err(|_| SeqError::Spec(format!("bad constant in {t:?}")))?;
        if v > LIT_MAX {
            return Err(SeqError::BlockEntryTooLarge(v));
        }
        return Ok(ItinerarySeq::constant(v));
    }
    if let Some(rest) = t.strip_prefix("canonical:") {
        let mut it = rest.split(':');
        let n: u64 = it
            .next()
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| SeqError::Spec(format!("bad stratum index in {t:?}")))?;
        let c: u64 = it
            .next()
            .and_then(|x| x.parse().ok())
            .ok_or_else(|| SeqError::Spec(format!("bad seed in {t:?}")))?;
        if it.next().is_some() {
            return Err(SeqError::Spec(format!("trailing fields in {t:?}")));
        }
        if c == 0 {
            return Err(SeqError::ZeroCore);
        }
        return ItinerarySeq::witness(c, n + 1);
    }
    if t.starts_with('{') {
        return serde_json::from_str(t).map_err(|e| SeqError::Spec(e.to_string()));
    }
    Err(SeqError::Spec(format!(
        "unrecognized sequence spec {t:?}; expected zero | const:<v> | canonical:<n>:<c> | JSON"
    )))
}
