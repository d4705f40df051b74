use rug::Float;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const DEFAULT_PRECISION: u32 = 256;
pub const MIN_PRECISION: u32 = 64;

/// Working precision and the two relative thresholds that separate
/// "numerically zero" from "genuinely nonzero".
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PrecisionContext {
    pub precision_bits: u32,
    pub vanish_threshold: f64,
    pub rank_threshold: f64,
}

impl Default for PrecisionContext {
    fn default() -> Self {
        PrecisionContext {
            precision_bits: DEFAULT_PRECISION,
            vanish_threshold: 2f64.powi(-100),
            rank_threshold: 2f64.powi(-64),
        }
    }
}

impl PrecisionContext {
    pub fn new(precision_bits: u32, vanish_threshold: f64, rank_threshold: f64) -> Result<Self> {
        let ctx = PrecisionContext { precision_bits, vanish_threshold, rank_threshold };
        ctx.validate()?;
        Ok(ctx)
    }

    pub fn with_bits(precision_bits: u32) -> Result<Self> {
        Self::new(precision_bits, 2f64.powi(-100), 2f64.powi(-64))
    }

    pub fn validate(&self) -> Result<()> {
        if self.precision_bits < MIN_PRECISION {
            return Err(Error::arg(format!(
                "precision must be at least {MIN_PRECISION} bits, got {}",
                self.precision_bits
            )));
        }
        for (name, t) in [("vanish", self.vanish_threshold), ("rank", self.rank_threshold)] {
            if !(t > 0.0 && t < 1.0) {
                return Err(Error::arg(format!("{name} threshold must lie in (0, 1), got {t}")));
            }
        }
        Ok(())
    }

    pub fn prec(&self) -> u32 {
        self.precision_bits
    }

    /// Precision used for intermediate sums.
    pub fn guarded(&self) -> u32 {
        self.precision_bits + 32
    }

    pub fn vanish(&self) -> Float {
        Float::with_val(self.precision_bits, self.vanish_threshold)
    }

    /// Upper edge of the ambiguity band for vanishing tests.
    pub fn vanish_upper(&self) -> Float {
        self.vanish().sqrt()
    }

    pub fn rank(&self) -> Float {
        Float::with_val(self.precision_bits, self.rank_threshold)
    }

    pub fn rank_upper(&self) -> Float {
        self.rank().sqrt()
    }

    /// 2^-(bits - 8): the round-off floor for identities that should hold
    /// to working precision.
    pub fn working_eps(&self) -> Float {
        Float::with_val(self.precision_bits, 1) >> (self.precision_bits - 8)
    }

    /// 2^-(bits / 2).
    pub fn half_eps(&self) -> Float {
        Float::with_val(self.precision_bits, 1) >> (self.precision_bits / 2)
    }
}

/// Parses thresholds written either as decimals (`1e-30`) or as powers of
/// two (`2^-100`).
pub fn parse_threshold(s: &str) -> Result<f64> {
    let s = s.trim();
    let v = if let Some(exp) = s.strip_prefix("2^") {
        let e: i32 = exp.parse().map_err(|_| Error::arg(format!("bad threshold {s}")))?;
        2f64.powi(e)
    } else {
        s.parse::<f64>().map_err(|_| Error::arg(format!("bad threshold {s}")))?
    };
    if !(v > 0.0 && v < 1.0) {
        return Err(Error::arg(format!("threshold {s} must lie in (0, 1)")));
    }
    Ok(v)
}
