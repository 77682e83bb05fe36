//! Certified brackets for the Hausdorff distance between compact sets.
//!
//! The distance function to a set is 1-Lipschitz, so for any cell of side
//! `w` the supremum of `dist(., B)` over the cell is at most its value at the
//! cell center plus half the cell diameter `sqrt(n) * w / 2`. Sampling the
//! centers of a refinement of `A` therefore brackets `sup_{a in A} dist(a, B)`
//! from both sides; the Hausdorff distance is the larger of the two directed
//! values.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::digital::DigitalSet;
use crate::enclose::{self, Precision};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{box_dist_sq, Aabb, BoxUnion, Point};
use crate::scalar::Scalar;

/// `lo <= H(A, B) <= hi`, with `hi - lo <= width_bound`, an upper enclosure
/// of `sqrt(n) * b^(-sample_depth)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct HBracket {
    pub lo: Scalar,
    pub hi: Scalar,
    pub sample_depth: u32,
    pub width_bound: Scalar,
}

impl HBracket {
    pub fn contains(&self, v: &Scalar) -> bool {
        &self.lo <= v && v <= &self.hi
    }

    pub fn width(&self) -> Scalar {
        &self.hi - &self.lo
    }
}

/// A compact set that can be sampled on a grid for the Lipschitz bracket.
trait Sampled: Sync {
    fn dim(&self) -> usize;
    fn boxes(&self) -> Vec<Aabb>;
    /// Sample points and the squared sampling radius.
    fn samples(&self, depth: u32) -> Result<(Vec<Point>, Scalar)>;
}

impl Sampled for DigitalSet {
    fn dim(&self) -> usize {
        BoxUnion::dim(self)
    }

    fn boxes(&self) -> Vec<Aabb> {
        BoxUnion::boxes(self)
    }

    fn samples(&self, depth: u32) -> Result<(Vec<Point>, Scalar)> {
        let fine = self.refine(depth)?;
        let w = fine.cell_side();
        let radius_sq = Scalar::int(self.dim() as u64) * &w * &w / Scalar::int(4);
        let pts = fine.cells().iter().map(|c| fine.cell_center(c)).collect();
        Ok((pts, radius_sq))
    }
}

struct PointSet<'a>(&'a [Point]);

impl Sampled for PointSet<'_> {
    fn dim(&self) -> usize {
        self.0[0].dim()
    }

    fn boxes(&self) -> Vec<Aabb> {
        self.0.iter().map(Point::to_box).collect()
    }

    fn samples(&self, _depth: u32) -> Result<(Vec<Point>, Scalar)> {
        Ok((self.0.to_vec(), Scalar::zero()))
    }
}

fn min_dist_sq(p: &Point, boxes: &[Aabb]) -> Scalar {
    let pb = p.to_box();
    let mut best: Option<Scalar> = None;
    for b in boxes {
        let d = box_dist_sq(&pb, b);
        if d.is_zero() {
            return d;
        }
        if best.as_ref().is_none_or(|x| d < *x) {
            best = Some(d);
        }
    }
    best.expect("target set is nonempty")
}

/// Bracket of `sup_{a in A} dist(a, B)`.
fn directed(a: &dyn Sampled, b: &dyn Sampled, depth: u32, prec: &Precision) -> Result<(Scalar, Scalar)> {
    let (pts, radius_sq) = a.samples(depth)?;
    let target = b.boxes();
    let far_sq = pts
        .par_iter()
        .map(|p| min_dist_sq(p, &target))
        .max()
        .expect("sample set is nonempty");
    let far = enclose::sqrt(&far_sq, prec);
    let radius = enclose::sqrt(&radius_sq, prec);
    Ok((far.lo, far.hi + radius.hi))
}

fn bracket(a: &dyn Sampled, b: &dyn Sampled, depth: u32, base: u64, prec: &Precision) -> Result<HBracket> {
    check_dim(a.dim(), b.dim())?;
    let (lo_ab, hi_ab) = directed(a, b, depth, prec)?;
    let (lo_ba, hi_ba) = directed(b, a, depth, prec)?;
    let w = Scalar::int(base).pow(-(depth as i32));
    let width_bound = enclose::sqrt(&(Scalar::int(a.dim() as u64) * &w * &w), prec).hi;
    let out = HBracket {
        lo: Scalar::max_of(lo_ab, lo_ba),
        hi: Scalar::max_of(hi_ab, hi_ba),
        sample_depth: depth,
        width_bound,
    };
    if out.width() > out.width_bound {
        return Err(Error::Precision(format!(
            "bracket width {} exceeds {}; raise the precision",
            out.width(),
            out.width_bound
        )));
    }
    Ok(out)
}

/// Certified bracket of `H(A, B)` from cell-center samples at `sample_depth`.
pub fn hausdorff_bracket(a: &DigitalSet, b: &DigitalSet, sample_depth: u32, prec: &Precision) -> Result<HBracket> {
    check_dim(a.dim(), b.dim())?;
    if a.base() != b.base() {
        return Err(Error::BaseMismatch(a.base(), b.base()));
    }
    if sample_depth < a.depth().max(b.depth()) {
        return Err(Error::invalid(format!(
            "sample depth {sample_depth} below set depths {} and {}",
            a.depth(),
            b.depth()
        )));
    }
    bracket(a, b, sample_depth, a.base(), prec)
}

/// Bracket of `H(E, S)` for a finite point set `S`; distances from the
/// points are exact, only `E` is sampled.
pub fn hausdorff_bracket_points(e: &DigitalSet, pts: &[Point], sample_depth: u32, prec: &Precision) -> Result<HBracket> {
    if pts.is_empty() {
        return Err(Error::invalid("point set must be nonempty"));
    }
    for p in pts {
        check_dim(e.dim(), p.dim())?;
    }
    if sample_depth < e.depth() {
        return Err(Error::invalid("sample depth below set depth"));
    }
    bracket(e, &PointSet(pts), sample_depth, e.base(), prec)
}
