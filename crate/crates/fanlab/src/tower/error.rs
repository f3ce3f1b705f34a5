use thiserror::Error;

#[derive(Debug, Error)]
pub enum TowerError {
    #[error("literal {0} exceeds the 10^6 cap")]
    LitTooLarge(u64),

    #[error("increment {0} exceeds the |c| <= 10^6 cap")]
    IncTooLarge(i64),

    #[error("expression value would be negative")]
    NegativeValue,

    #[error("exact evaluation exceeds the 3^20000 guard")]
    TooLarge,

    #[error("precision {0} outside the supported range [64, 4096]")]
    BadPrecision(usize),

    #[error("comparison unresolved at the precision cap: {lhs} vs {rhs}")]
    UnresolvedComparison { lhs: String, rhs: String },

    #[error("parse error at byte {pos}: {msg}")]
    Parse { pos: usize, msg: String },
}
