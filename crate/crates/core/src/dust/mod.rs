//! A Cantor dust in `[0,1]^n` of Hausdorff dimension zero that is not
//! microscopic.
//!
//! Level `k` consists of `2^(nk)` closed cubes of volume `V_k = c^(-k^2)`,
//! each placed flush in a corner of its parent. The constant `c` is taken
//! to be `b^n` for an integer `b >= 3`, so every side `b^(-k^2)` is rational
//! and every invariant can be checked exactly.

mod adversary;
mod counting;
mod gaps;
mod refute;
mod tree;

pub use adversary::{random_cover, strip_cover, swallow_cover};
pub use counting::{ak_bound_table, bucket_of, buckets, bullet_bound, intersect_count, AkRow, AkTable, BucketTable};
pub use gaps::{epsilon_star_lower, gap_table, hmeasure_bound, hmeasure_profile, GapRow, GapTable, HMeasureProfile};
pub use refute::{
    examined_prefix, survivor_refute, validate_certificate, RefuterFailure, SurvivorCertificate,
};
pub use tree::{generate, DustTree, Word};

use num_bigint::BigInt;
use num_traits::Pow;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scalar::Scalar;

/// Parameters of the construction. Corners are enumerated in lexicographic
/// order of their 0/1 coordinates, so letter 1 is the origin corner and
/// letter `2^n` the opposite one.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct DustSpec {
    n: usize,
    b: u64,
    depth: u32,
    corner_order: CornerOrder,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CornerOrder {
    Lexicographic,
}

#[derive(Deserialize)]
struct RawDustSpec {
    n: usize,
    b: u64,
    depth: u32,
    #[serde(default = "default_order")]
    corner_order: CornerOrder,
}

fn default_order() -> CornerOrder {
    CornerOrder::Lexicographic
}

impl<'de> Deserialize<'de> for DustSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawDustSpec::deserialize(deserializer)?;
        let _ = raw.corner_order;
        DustSpec::new(raw.n, raw.b, raw.depth).map_err(serde::de::Error::custom)
    }
}

/// A failed admissibility inequality.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SpecViolation {
    /// `delta_k = V_{k-1} - 2^n V_k` is not positive.
    NonPositiveDelta { k: u32, delta: Scalar },
    /// `c < 2^n + 1`.
    ConstantTooSmall { c: Scalar, min: Scalar },
}

impl DustSpec {
    pub fn new(n: usize, b: u64, depth: u32) -> Result<Self> {
        if n == 0 || n > 16 {
            return Err(Error::invalid("dimension must be in 1..=16"));
        }
        if b < 3 {
            return Err(Error::invalid("side base b must be at least 3"));
        }
        if depth == 0 {
            return Err(Error::invalid("depth must be at least 1"));
        }
        let spec = DustSpec::new_unchecked(n, b, depth);
        if let Err(v) = spec.validate() {
            return Err(Error::invalid(format!("inadmissible spec: {v:?}")));
        }
        Ok(spec)
    }

    /// Skips the admissibility checks; only for exercising [`DustSpec::validate`].
    #[doc(hidden)]
    pub fn new_unchecked(n: usize, b: u64, depth: u32) -> Self {
        DustSpec {
            n,
            b,
            depth,
            corner_order: CornerOrder::Lexicographic,
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn base(&self) -> u64 {
        self.b
    }

    pub fn depth(&self) -> u32 {
        self.depth
    }

    pub fn with_depth(&self, depth: u32) -> Result<Self> {
        DustSpec::new(self.n, self.b, depth)
    }

    /// `c = b^n`.
    pub fn c(&self) -> BigInt {
        Pow::pow(BigInt::from(self.b), self.n)
    }

    pub fn corners(&self) -> u32 {
        1 << self.n
    }

    /// `V_k = c^(-k^2)`, with `V_0 = 1`.
    pub fn volume(&self, k: u32) -> Scalar {
        Scalar::int(self.c()).powu(k as u64 * k as u64).recip()
    }

    /// `b^(-k^2)`.
    pub fn side(&self, k: u32) -> Scalar {
        Scalar::int(self.b).powu(k as u64 * k as u64).recip()
    }

    /// `delta_k = V_{k-1} - 2^n V_k`.
    pub fn delta(&self, k: u32) -> Scalar {
        assert!(k >= 1);
        self.volume(k - 1) - Scalar::int(self.corners()) * self.volume(k)
    }

    /// Checks `delta_k > 0` for `k <= depth`, then `c >= 2^n + 1`, and
    /// returns the first failure.
    pub fn validate(&self) -> Result<(), SpecViolation> {
        for k in 1..=self.depth {
            let delta = self.delta(k);
            if !delta.is_positive() {
                return Err(SpecViolation::NonPositiveDelta { k, delta });
            }
        }
        let c = Scalar::int(self.c());
        let min = Scalar::int(self.corners() + 1);
        if c < min {
            return Err(SpecViolation::ConstantTooSmall { c, min });
        }
        Ok(())
    }
}
