//! Constructive strong covers and the budget bounds that refute them.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::covers::cover::{check_eps, verify_cover, CoverSeq};
use crate::digital::{CellIndex, DigitalSet};
use crate::enclose::{self, Precision};
use crate::error::{Error, Result};
use crate::geometry::Cube;
use crate::scalar::Scalar;

/// Why a finite greedy search stopped without a cover.
///
/// Only [`SearchFailure::BudgetInfeasible`] is a proof that no strong cover
/// exists; the other two just mean the greedy strategy gave up.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum SearchFailure {
    /// Cube sides summed over all positions cannot reach the length of the
    /// projection of the set onto `axis`.
    BudgetInfeasible {
        axis: usize,
        projection: Scalar,
        side_sum_bound: Scalar,
    },
    MaxPiecesExhausted { pieces: usize, uncovered: usize },
    /// The admissible cube at `position` is smaller than one grid cell.
    PieceBelowCellSize {
        position: usize,
        side: Scalar,
        cell_side: Scalar,
    },
}

impl SearchFailure {
    pub fn is_refutation(&self) -> bool {
        matches!(self, SearchFailure::BudgetInfeasible { .. })
    }
}

/// Certified upper bound of `sum_{k>=1} eps^(k/n)`.
///
/// The first `terms` summands are enclosed one by one, the rest by the
/// geometric tail `r^(terms+1) / (1 - r)` with `r` an upper enclosure of
/// `eps^(1/n)`. A strong cover of budget `eps` has cube sides at most
/// `eps^(k/n)`, so its projections onto any axis have total length at most
/// this bound; a value below 1 rules out covering any set with a full
/// projection.
pub fn strong_budget_sidesum(eps: &Scalar, n: usize, terms: usize, prec: &Precision) -> Result<Scalar> {
    check_eps(eps)?;
    if terms == 0 {
        return Err(Error::invalid("terms must be at least 1"));
    }
    geometric_upper(&Scalar::one(), eps, n as u32, 1, 1, terms, prec)
}

/// Upper bound of `sum_{k>=1} scale * eps^(k * p / (q * n))` with
/// `scale >= 0`, given as a prefix of enclosed terms plus a tail.
fn geometric_upper(
    scale: &Scalar,
    eps: &Scalar,
    n: u32,
    p: i64,
    q: u32,
    terms: usize,
    prec: &Precision,
) -> Result<Scalar> {
    let root_order = q
        .checked_mul(n)
        .ok_or_else(|| Error::invalid("exponent denominator overflow"))?;
    let ratio = enclose::pow_ratio(eps, p, root_order, prec)?.hi;
    if ratio >= 1 {
        return Err(Error::Precision(format!(
            "upper enclosure {ratio} of the ratio is not below 1"
        )));
    }
    let mut sum = Scalar::zero();
    let mut ratio_pow = Scalar::one();
    for k in 1..=terms {
        ratio_pow *= &ratio;
        let direct = enclose::pow_ratio(eps, p * k as i64, root_order, prec)?.hi;
        // Never exceed the geometric majorant, so more terms never loosen the bound.
        sum += Scalar::min_of(direct, ratio_pow.clone());
    }
    let tail = &ratio_pow * &ratio / (Scalar::one() - &ratio);
    Ok(scale * (sum + tail))
}

/// Upper bound of `sum_k diam(I_k)^alpha` over any strong cover with the
/// budget of `cover`, i.e. of `sum_k (sqrt(n) * eps^(k/n))^alpha`.
pub fn hmeasure_upper_from_cover(cover: &CoverSeq, alpha: &Scalar, terms: usize, prec: &Precision) -> Result<Scalar> {
    if !alpha.is_positive() {
        return Err(Error::invalid("alpha must be positive"));
    }
    if !cover.is_strong() {
        return Err(Error::invalid("the alpha-measure bound needs a strong cover"));
    }
    if let Some(v) = cover.first_budget_violation() {
        return Err(Error::invalid(format!("cover breaks its budget at position {}", v.position)));
    }
    if terms == 0 {
        return Err(Error::invalid("terms must be at least 1"));
    }
    let p: i64 = alpha
        .numer()
        .try_into()
        .map_err(|_| Error::invalid("alpha numerator too large"))?;
    let q: u32 = alpha
        .denom()
        .try_into()
        .map_err(|_| Error::invalid("alpha denominator too large"))?;
    let n = cover.dim();
    // sqrt(n)^alpha = n^(p / 2q)
    let scale = enclose::pow_ratio(&Scalar::int(n as u64), p, 2 * q, prec)?.hi;
    geometric_upper(&scale, cover.eps(), n as u32, p, q, terms, prec)
}

/// Greedy strong cover of `e` with budget `eps`.
///
/// Cells are taken in Morton order. At position `k` the admissible cube side
/// is a lower enclosure of `eps^(k/n)`, rounded down to whole grid cells; the
/// cube is placed over the first uncovered cell at the offset that swallows
/// the most uncovered cells and then shrunk to what it actually swallows.
/// The result is verified before it is returned.
pub fn greedy_strong_cover(
    e: &DigitalSet,
    eps: &Scalar,
    max_pieces: usize,
    prec: &Precision,
) -> Result<Result<CoverSeq, SearchFailure>> {
    check_eps(eps)?;
    let n = e.dim();
    let terms = max_pieces.clamp(1, 64);
    let bound = strong_budget_sidesum(eps, n, terms, prec)?;
    for axis in 0..n {
        let projection = e.projection_length(axis);
        if projection > bound {
            return Ok(Err(SearchFailure::BudgetInfeasible {
                axis,
                projection,
                side_sum_bound: bound,
            }));
        }
    }

    let w = e.cell_side();
    let size = e.base().pow(e.depth());
    let order = e.morton_order();
    let mut uncovered: BTreeSet<CellIndex> = e.cells().clone();
    let mut next = 0usize;
    let mut cubes = Vec::new();
    let mut budget = Scalar::one();

    for position in 1..=max_pieces {
        while next < order.len() && !uncovered.contains(&order[next]) {
            next += 1;
        }
        if next == order.len() {
            break;
        }
        budget *= eps;
        let side = enclose::root(&budget, n as u32, prec).lo;
        let span = (&side / &w).floor();
        let span: u64 = match u64::try_from(span) {
            Ok(0) => {
                return Ok(Err(SearchFailure::PieceBelowCellSize {
                    position,
                    side,
                    cell_side: w,
                }))
            }
            Ok(t) => t.min(size),
            Err(_) => size,
        };
        let anchor = &order[next];
        let (lo, swallowed) = best_placement(anchor, span, size, &uncovered);
        let (lo, span) = shrink(&swallowed, &lo, size);
        for c in &swallowed {
            uncovered.remove(c);
        }
        let corner: Vec<Scalar> = lo.iter().map(|&j| Scalar::int(j) * &w).collect();
        cubes.push(Cube::new(&corner, Scalar::int(span) * &w)?);
    }

    if !uncovered.is_empty() {
        return Ok(Err(SearchFailure::MaxPiecesExhausted {
            pieces: cubes.len(),
            uncovered: uncovered.len(),
        }));
    }
    let cover = CoverSeq::strong(n, eps.clone(), cubes)?;
    let report = verify_cover(e, &cover)?;
    if !report.is_ok() {
        return Err(Error::invariant(format!("greedy cover failed verification: {report:?}")));
    }
    Ok(Ok(cover))
}

/// Chooses a grid-aligned cube of `span` cells containing `anchor`.
fn best_placement(
    anchor: &[u64],
    span: u64,
    size: u64,
    uncovered: &BTreeSet<CellIndex>,
) -> (Vec<u64>, Vec<CellIndex>) {
    let options: Vec<Vec<u64>> = anchor
        .iter()
        .map(|&a| {
            let mut o: Vec<u64> = [0, (span - 1) / 2, span - 1]
                .iter()
                .map(|&off| a.saturating_sub(off).min(size - span))
                .collect();
            o.dedup();
            o
        })
        .collect();
    let mut best: Option<(Vec<u64>, Vec<CellIndex>)> = None;
    let mut idx = vec![0usize; anchor.len()];
    loop {
        let lo: Vec<u64> = idx.iter().zip(&options).map(|(&i, o)| o[i]).collect();
        let inside: Vec<CellIndex> = uncovered
            .iter()
            .filter(|c| c.iter().zip(&lo).all(|(&j, &l)| l <= j && j < l + span))
            .cloned()
            .collect();
        if best.as_ref().is_none_or(|(_, b)| inside.len() > b.len()) {
            best = Some((lo, inside));
        }
        // odometer over the per-axis options
        let mut axis = anchor.len();
        loop {
            if axis == 0 {
                return best.expect("at least one placement");
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < options[axis].len() {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// Smallest grid cube (inside the grid) containing all `cells`.
fn shrink(cells: &[CellIndex], lo: &[u64], size: u64) -> (Vec<u64>, u64) {
    let n = lo.len();
    let mut min = vec![u64::MAX; n];
    let mut max = vec![0u64; n];
    for c in cells {
        for i in 0..n {
            min[i] = min[i].min(c[i]);
            max[i] = max[i].max(c[i]);
        }
    }
    let span = (0..n).map(|i| max[i] - min[i] + 1).max().unwrap_or(1);
    let lo = min.iter().map(|&m| m.min(size - span)).collect();
    (lo, span)
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "outcome", rename_all = "snake_case")]
pub enum KsOutcome {
    Witness { cover: CoverSeq },
    Unknown { reason: SearchFailure },
}

impl KsOutcome {
    pub fn is_witness(&self) -> bool {
        matches!(self, KsOutcome::Witness { .. })
    }
}

/// Finite-depth membership test for the set of compacta coverable by cubes
/// with `vol(I_j) <= (1/s)^j`. A failed search is reported as unknown.
pub fn ks_membership(e: &DigitalSet, s: u64, max_pieces: usize, prec: &Precision) -> Result<KsOutcome> {
    if s < 2 {
        return Err(Error::invalid("s must be at least 2 so that 1/s < 1"));
    }
    let eps = Scalar::ratio(1, s as i64);
    Ok(match greedy_strong_cover(e, &eps, max_pieces, prec)? {
        Ok(cover) => KsOutcome::Witness { cover },
        Err(reason) => KsOutcome::Unknown { reason },
    })
}
