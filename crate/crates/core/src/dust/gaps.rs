use num_bigint::BigInt;
use num_traits::Pow;
use serde::{Deserialize, Serialize};

use super::{generate, DustSpec, DustTree};
use crate::enclose::{exact_root, pow_ratio, root, Precision};
use crate::error::{Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapRow {
    pub k: u32,
    pub volume: Scalar,
    pub delta: Scalar,
    pub d: Scalar,
    #[serde(rename = "D")]
    pub d_min: Scalar,
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GapTable {
    pub spec: DustSpec,
    pub rows: Vec<GapRow>,
}

/// Levels above this many cubes get only the sibling cross-check.
const ALL_PAIRS_LIMIT: usize = 1024;

impl GapTable {
    /// The table from the closed forms, without building the tree. `d_k` is
    /// evaluated in its root form `1/c^((k-1)^2/n) - 2/c^(k^2/n)`; the roots
    /// are exact because `c = b^n`.
    pub fn from_formulas(spec: &DustSpec) -> Result<GapTable> {
        let n = spec.dim() as u32;
        let c = spec.c();
        let root_pow = |e: u64| -> Result<Scalar> {
            let x = Scalar::int(Pow::pow(c.clone(), e));
            exact_root(&x, n).ok_or_else(|| Error::invariant("c is not a perfect power"))
        };
        let mut rows: Vec<GapRow> = Vec::with_capacity(spec.depth() as usize);
        for k in 1..=spec.depth() {
            let k64 = k as u64;
            let d = root_pow((k64 - 1) * (k64 - 1))?.recip() - Scalar::int(2) / root_pow(k64 * k64)?;
            let d_min = match rows.last() {
                Some(prev) => Scalar::min_of(d.clone(), prev.d_min.clone()),
                None => d.clone(),
            };
            let row = GapRow {
                k,
                volume: spec.volume(k),
                delta: spec.delta(k),
                d,
                d_min,
            };
            if !(row.delta.is_positive() && row.d.is_positive() && row.d_min.is_positive()) {
                return Err(Error::invariant(format!("level {k}: non-positive gap")));
            }
            rows.push(row);
        }
        Ok(GapTable {
            spec: spec.clone(),
            rows,
        })
    }

    pub fn row(&self, k: u32) -> Option<&GapRow> {
        self.rows.get((k as usize).checked_sub(1)?)
    }

    /// Checks the table against measured distances in `tree`: the closest
    /// siblings are exactly `d_k` apart and no two level-`k` cubes are closer
    /// than `D_k`. Levels with more than 1024 cubes skip the all-pairs scan.
    pub fn cross_check(&self, tree: &DustTree) -> Result<()> {
        if tree.spec() != &self.spec {
            return Err(Error::invalid("tree and table specs differ"));
        }
        for row in &self.rows {
            let k = row.k;
            let d_sq = &row.d * &row.d;
            let sib = tree.min_sibling_dist_sq(k)?;
            if sib != d_sq {
                return Err(Error::invariant(format!(
                    "level {k}: closest siblings at distance^2 {sib}, expected {d_sq}"
                )));
            }
            if tree.level(k)?.len() <= ALL_PAIRS_LIMIT {
                let all = tree.min_pair_dist_sq(k)?;
                if all < &row.d_min * &row.d_min {
                    return Err(Error::invariant(format!("level {k}: pair closer than D_k")));
                }
            }
        }
        Ok(())
    }
}

/// Formula table, cross-checked against a freshly generated tree.
pub fn gap_table(spec: &DustSpec) -> Result<GapTable> {
    let table = GapTable::from_formulas(spec)?;
    let tree = generate(spec)?;
    table.cross_check(&tree)?;
    Ok(table)
}

fn split_alpha(alpha: &Scalar) -> Result<(BigInt, u32)> {
    if !alpha.is_positive() {
        return Err(Error::invalid("alpha must be positive"));
    }
    let q: u32 = alpha
        .denom()
        .try_into()
        .map_err(|_| Error::invalid("alpha denominator too large"))?;
    Ok((alpha.numer().clone(), q))
}

/// Upper bound for `2^(nk) * n^(alpha/2) * b^(-alpha k^2)`, the alpha-sum of
/// the level-`k` cubes' diameters.
pub fn hmeasure_bound(spec: &DustSpec, alpha: &Scalar, k: u32, prec: &Precision) -> Result<Scalar> {
    let (p, q) = split_alpha(alpha)?;
    let p: i64 = (&p).try_into().map_err(|_| Error::invalid("alpha numerator too large"))?;
    let count = Scalar::int(BigInt::from(2).pow(spec.dim() as u64 * k as u64));
    let n = Scalar::int(spec.dim() as u64);
    let diam_factor = pow_ratio(&n, p, 2 * q, prec)?.hi;
    let e = p
        .checked_mul(k as i64 * k as i64)
        .ok_or_else(|| Error::invalid("exponent overflow"))?;
    // b^(-e/q) shrinks fast; keep the enclosure relative by scaling precision
    let side = side_power_upper(spec.base(), e, q, prec)?;
    Ok(count * diam_factor * side)
}

/// Upper enclosure of `b^(-e/q)` with relative error about `1/prec`.
fn side_power_upper(b: u64, e: i64, q: u32, prec: &Precision) -> Result<Scalar> {
    let base = Scalar::int(b);
    let whole = e / q as i64;
    let rest = e % q as i64;
    let exact = base.powu(whole as u64).recip();
    if rest == 0 {
        return Ok(exact);
    }
    Ok(exact * pow_ratio(&base, -rest, q, prec)?.hi)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HMeasureProfile {
    pub alpha: Scalar,
    pub bounds: Vec<Scalar>,
    /// Smallest `k0` such that the bound strictly decreases from `k0` to the
    /// end of the profile.
    pub decreasing_from: Option<u32>,
    /// First `k` whose bound is below the threshold.
    pub first_below: Option<u32>,
}

/// Bounds for `k = 1..=k_max` together with where they start decreasing and
/// where they first drop below `threshold`.
pub fn hmeasure_profile(
    spec: &DustSpec,
    alpha: &Scalar,
    k_max: u32,
    threshold: &Scalar,
    prec: &Precision,
) -> Result<HMeasureProfile> {
    let bounds = (1..=k_max)
        .map(|k| hmeasure_bound(spec, alpha, k, prec))
        .collect::<Result<Vec<_>>>()?;
    let mut decreasing_from = None;
    if !bounds.is_empty() {
        let mut k0 = bounds.len();
        while k0 > 1 && bounds[k0 - 1] < bounds[k0 - 2] {
            k0 -= 1;
        }
        if k0 < bounds.len() {
            decreasing_from = Some(k0 as u32);
        }
    }
    let first_below = bounds.iter().position(|v| v < threshold).map(|i| i as u32 + 1);
    Ok(HMeasureProfile {
        alpha: alpha.clone(),
        bounds,
        decreasing_from,
        first_below,
    })
}

/// Lower enclosure of `(r - 2)^(4n) / c^4` where `r` is the `n`-th root of
/// `2^n + 1`, rounded down.
pub fn epsilon_star_lower(spec: &DustSpec, prec: &Precision) -> Result<Scalar> {
    let n = spec.dim() as u32;
    let r = root(&Scalar::int(spec.corners() + 1), n, prec).lo;
    let gap = r - Scalar::int(2);
    if !gap.is_positive() {
        return Err(Error::Precision(format!(
            "root of 2^{n}+1 not separated from 2 at this precision"
        )));
    }
    let c4 = Scalar::int(spec.c()).powu(4);
    Ok(gap.powu(4 * n as u64) / c4)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(p: i64, q: i64) -> Scalar {
        Scalar::ratio(p, q)
    }

    #[test]
    fn line_gaps() {
        let t = gap_table(&DustSpec::new(1, 3, 3).unwrap()).unwrap();
        assert_eq!(t.row(1).unwrap().d, s(1, 3));
        assert_eq!(t.row(2).unwrap().d, s(25, 81));
        assert_eq!(t.row(2).unwrap().d_min, s(25, 81));
        assert_eq!(t.row(1).unwrap().d_min, t.row(1).unwrap().d);
    }

    #[test]
    fn planar_volumes() {
        let t = gap_table(&DustSpec::new(2, 3, 2).unwrap()).unwrap();
        assert_eq!(t.row(2).unwrap().volume, s(1, 6561));
        assert_eq!(t.row(2).unwrap().delta, s(725, 6561));
    }

    #[test]
    fn cross_check_catches_wrong_table() {
        let spec = DustSpec::new(1, 3, 2).unwrap();
        let mut t = GapTable::from_formulas(&spec).unwrap();
        t.rows[1].d = s(1, 3);
        assert!(t.cross_check(&generate(&spec).unwrap()).is_err());
    }

    #[test]
    fn measure_bounds() {
        let p = Precision::default();
        let line = DustSpec::new(1, 3, 1).unwrap();
        let one = Scalar::one();
        assert_eq!(hmeasure_bound(&line, &one, 1, &p).unwrap(), s(2, 3));
        assert_eq!(hmeasure_bound(&line, &one, 2, &p).unwrap(), s(4, 81));
        assert_eq!(hmeasure_bound(&line, &one, 3, &p).unwrap(), s(8, 19683));
        let plane = DustSpec::new(2, 3, 1).unwrap();
        assert_eq!(hmeasure_bound(&plane, &Scalar::int(2), 1, &p).unwrap(), s(8, 9));
        assert!(hmeasure_bound(&plane, &Scalar::zero(), 1, &p).is_err());
    }

    #[test]
    fn fractional_alpha_is_an_upper_bound() {
        let p = Precision::default();
        let spec = DustSpec::new(2, 3, 1).unwrap();
        let v = hmeasure_bound(&spec, &s(1, 2), 2, &p).unwrap();
        // 16 * 2^(1/4) * 3^(-2)
        let approx = 16.0 * 2f64.powf(0.25) / 9.0;
        assert!(v.to_f64() >= approx * (1.0 - 1e-12));
        assert!(v.to_f64() <= approx * (1.0 + 1e-9));
    }

    #[test]
    fn profile_vanishes() {
        let p = Precision::default();
        let spec = DustSpec::new(3, 3, 1).unwrap();
        let prof = hmeasure_profile(&spec, &s(1, 10), 60, &s(1, 1_000_000_000), &p).unwrap();
        assert!(prof.decreasing_from.is_some());
        assert!(prof.first_below.is_some());
    }

    #[test]
    fn epsilon_star() {
        let p = Precision::default();
        assert_eq!(epsilon_star_lower(&DustSpec::new(1, 3, 1).unwrap(), &p).unwrap(), s(1, 81));
        let e2 = epsilon_star_lower(&DustSpec::new(2, 3, 1).unwrap(), &p).unwrap();
        assert!(e2 >= s(1, 1_000_000_000));
        assert!(e2.to_f64() < 1.48e-9);
        let e3 = epsilon_star_lower(&DustSpec::new(3, 3, 1).unwrap(), &p).unwrap();
        assert!(e3.is_positive());
    }
}
