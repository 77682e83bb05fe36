use num_bigint::BigInt;
use serde::{Deserialize, Serialize};

use super::DustTree;
use crate::enclose::isqrt;
use crate::error::{check_dim, Error, Result};
use crate::geometry::{box_dist_sq, Aabb};

/// Explicit buckets `H_k = {h >= 1 : k^2 <= 4h < (k+1)^2}` for `k = 1..=k_max`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct BucketTable {
    pub k_max: u32,
    /// `buckets[k - 1]` lists `H_k` in increasing order.
    pub buckets: Vec<Vec<u64>>,
}

/// Bucket containing position `h >= 1`.
pub fn bucket_of(h: u64) -> u32 {
    assert!(h >= 1);
    isqrt(4 * h) as u32
}

/// Enumerates the buckets by scanning positions and checks that they
/// partition `1..=N`, `N` being the last position below `(k_max + 1)^2 / 4`.
pub fn buckets(k_max: u32) -> Result<BucketTable> {
    if k_max == 0 {
        return Err(Error::invalid("k_max must be at least 1"));
    }
    let k1 = k_max as u64 + 1;
    let mut table = vec![Vec::new(); k_max as usize];
    let mut h = 1u64;
    while 4 * h < k1 * k1 {
        for k in 1..=k_max as u64 {
            if k * k <= 4 * h && 4 * h < (k + 1) * (k + 1) {
                table[k as usize - 1].push(h);
            }
        }
        h += 1;
    }
    let last = h - 1;
    let mut seen = 0u64;
    for (i, hk) in table.iter().enumerate() {
        for &x in hk {
            if x != seen + 1 || bucket_of(x) as usize != i + 1 {
                return Err(Error::invariant(format!("bucket partition broken at h={x}")));
            }
            seen = x;
        }
    }
    if seen != last {
        return Err(Error::invariant("buckets do not exhaust their range"));
    }
    Ok(BucketTable { k_max, buckets: table })
}

impl BucketTable {
    pub fn bucket(&self, k: u32) -> Option<&[u64]> {
        self.buckets.get((k as usize).checked_sub(1)?).map(Vec::as_slice)
    }

    pub fn size(&self, k: u32) -> Option<u64> {
        self.bucket(k).map(|b| b.len() as u64)
    }

    /// Largest position covered by the table.
    pub fn last_position(&self) -> u64 {
        self.buckets.iter().rev().find_map(|b| b.last().copied()).unwrap_or(0)
    }
}

/// Number of level-`k` cubes meeting the closed box `b`.
pub fn intersect_count(tree: &DustTree, k: u32, b: &Aabb) -> Result<usize> {
    check_dim(tree.spec().dim(), b.dim())?;
    let level = tree.level(k)?;
    Ok(level.iter().filter(|q| box_dist_sq(q.as_box(), b).is_zero()).count())
}

/// `2^(nk) - 2^((n-1)k) * k`.
pub fn bullet_bound(n: u32, k: u32) -> BigInt {
    let two = BigInt::from(2);
    two.pow(n * k) - two.pow((n - 1) * k) * BigInt::from(k)
}

/// Big integers as decimal strings.
mod decimal {
    use num_bigint::BigInt;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(v: &BigInt, s: S) -> Result<S::Ok, S::Error> {
        s.collect_str(v)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BigInt, D::Error> {
        String::deserialize(d)?.parse().map_err(serde::de::Error::custom)
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct AkRow {
    pub k: u32,
    #[serde(with = "decimal")]
    pub a_k: BigInt,
    #[serde(with = "decimal")]
    pub bound: BigInt,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum AkTable {
    Holds { n: u32, rows: Vec<AkRow> },
    Counterexample {
        n: u32,
        rows: Vec<AkRow>,
        k: u32,
        #[serde(with = "decimal")]
        a_k: BigInt,
        #[serde(with = "decimal")]
        bound: BigInt,
    },
}

impl AkTable {
    pub fn holds(&self) -> bool {
        matches!(self, AkTable::Holds { .. })
    }
}

/// Iterates the worst case `a_{k+1} = 2^n a_k + 2^((n-1)k) |H_{k+1}|` from
/// `a_3 = 2^(3n) - 2^(3(n-1)) * 3` and compares against the bullet bound at
/// every `k <= k_max`. Stops at the first violation.
pub fn ak_bound_table(n: u32, k_max: u32, h_counts: &BucketTable) -> Result<AkTable> {
    if n == 0 {
        return Err(Error::invalid("dimension must be positive"));
    }
    if k_max < 4 {
        return Err(Error::invalid("k_max must be at least 4"));
    }
    if h_counts.k_max < k_max {
        return Err(Error::invalid("bucket table shorter than k_max"));
    }
    let two = BigInt::from(2);
    let mut a = bullet_bound(n, 3);
    let mut rows = vec![AkRow {
        k: 3,
        a_k: a.clone(),
        bound: bullet_bound(n, 3),
    }];
    for k in 3..k_max {
        let h_next = h_counts.size(k + 1).expect("checked length");
        a = two.pow(n) * &a + two.pow((n - 1) * k) * BigInt::from(h_next);
        let bound = bullet_bound(n, k + 1);
        let row = AkRow {
            k: k + 1,
            a_k: a.clone(),
            bound: bound.clone(),
        };
        rows.push(row);
        if a > bound {
            return Ok(AkTable::Counterexample {
                n,
                rows,
                k: k + 1,
                a_k: a,
                bound,
            });
        }
    }
    Ok(AkTable::Holds { n, rows })
}
