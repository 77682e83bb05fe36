//! Basic open sets `B(I_1, ..., I_t)` of the hyperspace of compacta and
//! the radius that keeps a member inside one.
//!
//! The `I_i` are open boxes relative to `[0,1]^n`: a box `(lo, hi)` stands
//! for `{x in [0,1]^n : lo_j < x_j < hi_j}`. A box reaching past the unit
//! cube (`lo_j < 0` or `hi_j > 1`) therefore contains the corresponding
//! face of the cube.
//!
//! Coverage of closed boxes by open ones is decided on *atoms*: along each
//! axis the relevant endpoints split the line into points and open gaps,
//! and every product of such pieces is either inside an open box or not.

use serde::{Deserialize, Serialize};

use crate::digital::DigitalSet;
use crate::enclose::{self, Precision};
use crate::error::{check_dim, Error, Result};
use crate::geometry::{box_dist_sq, Aabb, BoxUnion, Point};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct BallSpec {
    n: usize,
    intervals: Vec<Aabb>,
}

#[derive(Deserialize)]
struct RawBallSpec {
    n: usize,
    intervals: Vec<Aabb>,
}

impl<'de> Deserialize<'de> for BallSpec {
    fn deserialize<D: serde::Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let raw = RawBallSpec::deserialize(deserializer)?;
        BallSpec::new(raw.n, raw.intervals).map_err(serde::de::Error::custom)
    }
}

impl BallSpec {
    pub fn new(n: usize, intervals: Vec<Aabb>) -> Result<Self> {
        if intervals.is_empty() {
            return Err(Error::invalid("a basic open set needs at least one box"));
        }
        for (i, b) in intervals.iter().enumerate() {
            check_dim(n, b.dim())?;
            for (lo, hi) in b.bounds() {
                if lo >= hi || *lo >= 1 || *hi <= 0 {
                    return Err(Error::invalid(format!(
                        "box {} has empty interior relative to the unit cube",
                        i + 1
                    )));
                }
            }
        }
        Ok(BallSpec { n, intervals })
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn intervals(&self) -> &[Aabb] {
        &self.intervals
    }

    /// Whether the point lies in the relative open box `i`.
    pub fn contains_point(&self, i: usize, p: &Point) -> bool {
        open_contains_point(&self.intervals[i], p)
    }

    /// `l_I` of box `i` taken relative to the unit cube.
    pub fn relative_min_side(&self, i: usize) -> Scalar {
        self.intervals[i]
            .bounds()
            .iter()
            .map(|(lo, hi)| {
                Scalar::min_of(hi.clone(), Scalar::one()) - Scalar::max_of(lo.clone(), Scalar::zero())
            })
            .min()
            .expect("boxes have at least one axis")
    }

    /// Whether the union of the open boxes is all of `[0,1]^n`.
    pub fn covers_unit_cube(&self) -> bool {
        uncovered_atoms(&Aabb::unit(self.n), &self.intervals).is_empty()
    }
}

fn open_contains_point(b: &Aabb, p: &Point) -> bool {
    b.bounds().iter().zip(p.coords()).all(|((lo, hi), x)| lo < x && x < hi)
}

/// Closed box meets open box.
fn meets_open(closed: &Aabb, open: &Aabb) -> bool {
    closed
        .bounds()
        .iter()
        .zip(open.bounds())
        .all(|((a, b), (lo, hi))| a < hi && lo < b)
}

#[derive(Clone, Debug)]
enum Piece {
    At(Scalar),
    Between(Scalar, Scalar),
}

impl Piece {
    fn inside(&self, lo: &Scalar, hi: &Scalar) -> bool {
        match self {
            Piece::At(v) => lo < v && v < hi,
            Piece::Between(u, v) => lo <= u && v <= hi,
        }
    }

    fn closure(&self) -> (Scalar, Scalar) {
        match self {
            Piece::At(v) => (v.clone(), v.clone()),
            Piece::Between(u, v) => (u.clone(), v.clone()),
        }
    }
}

fn axis_pieces(target: &Aabb, opens: &[&Aabb], axis: usize) -> Vec<Piece> {
    let (a, b) = (target.lo(axis), target.hi(axis));
    let mut cuts = vec![a.clone(), b.clone()];
    for o in opens {
        for v in [o.lo(axis), o.hi(axis)] {
            if a < v && v < b {
                cuts.push(v.clone());
            }
        }
    }
    cuts.sort();
    cuts.dedup();
    let mut out = Vec::with_capacity(2 * cuts.len());
    for (i, v) in cuts.iter().enumerate() {
        out.push(Piece::At(v.clone()));
        if let Some(next) = cuts.get(i + 1) {
            out.push(Piece::Between(v.clone(), next.clone()));
        }
    }
    out
}

/// Closures of the atoms of `target` that no open box contains.
fn uncovered_atoms(target: &Aabb, opens: &[Aabb]) -> Vec<Aabb> {
    let near: Vec<&Aabb> = opens.iter().filter(|o| meets_open(target, o)).collect();
    let per_axis: Vec<Vec<Piece>> = (0..target.dim()).map(|i| axis_pieces(target, &near, i)).collect();
    let mut out = Vec::new();
    let mut idx = vec![0usize; per_axis.len()];
    loop {
        let atom: Vec<&Piece> = idx.iter().zip(&per_axis).map(|(&i, p)| &p[i]).collect();
        let covered = near.iter().any(|o| {
            atom.iter()
                .zip(o.bounds())
                .all(|(piece, (lo, hi))| piece.inside(lo, hi))
        });
        if !covered {
            out.push(Aabb::new(atom.iter().map(|p| p.closure()).collect()).expect("ordered bounds"));
        }
        let mut axis = per_axis.len();
        loop {
            if axis == 0 {
                return out;
            }
            axis -= 1;
            idx[axis] += 1;
            if idx[axis] < per_axis[axis].len() {
                break;
            }
            idx[axis] = 0;
        }
    }
}

/// Decides whether a closed box lies inside a union of open boxes.
pub fn open_union_covers(target: &Aabb, opens: &[Aabb]) -> bool {
    uncovered_atoms(target, opens).is_empty()
}

/// Membership of a finite union of closed boxes in `B(I_1, ..., I_t)`.
pub fn ball_membership_boxes(k: &[Aabb], ball: &BallSpec) -> Result<bool> {
    for b in k {
        check_dim(ball.dim(), b.dim())?;
    }
    if k.is_empty() {
        return Err(Error::invalid("compact set must be nonempty"));
    }
    let inside = k.iter().all(|b| open_union_covers(b, ball.intervals()));
    let hits = ball
        .intervals()
        .iter()
        .all(|o| k.iter().any(|b| meets_open(b, o)));
    Ok(inside && hits)
}

/// `K ⊆ ∪ I_i` and `K ∩ I_i ≠ ∅` for every `i`.
pub fn ball_membership(k: &DigitalSet, ball: &BallSpec) -> Result<bool> {
    check_dim(k.dim(), ball.dim())?;
    ball_membership_boxes(&k.boxes(), ball)
}

/// For each box, a point of `K ∩ I_i`: the midpoint of the overlap with the
/// first cell (in lexicographic order) that meets the box.
pub fn default_witnesses(k: &DigitalSet, ball: &BallSpec) -> Result<Vec<Point>> {
    check_dim(k.dim(), ball.dim())?;
    let two = Scalar::int(2);
    ball.intervals()
        .iter()
        .enumerate()
        .map(|(i, o)| {
            let cell = k
                .cells()
                .iter()
                .map(|c| k.cell_box(c))
                .find(|c| meets_open(c, o))
                .ok_or_else(|| Error::invalid(format!("box {} misses the set", i + 1)))?;
            let coords = cell
                .bounds()
                .iter()
                .zip(o.bounds())
                .map(|((a, b), (lo, hi))| {
                    (Scalar::max_of(a.clone(), lo.clone()) + Scalar::min_of(b.clone(), hi.clone())) / &two
                })
                .collect();
            Point::new(coords)
        })
        .collect()
}

/// The radius `eps = min(eps_0, eps_1, ..., eps_t)` such that every compact
/// `T` with `H(T, K) < eps` stays in `B(I_1, ..., I_t)`.
///
/// * `eps_i` is the distance from the witness `x_i` to `[0,1]^n \ I_i`, or
///   `l_{I_i}` when `x_i` is a vertex of the unit cube.
/// * `eps_0` is 1 when the boxes cover the unit cube, else the distance from
///   `K` to the uncovered part.
///
/// The `eps_i` are exact; `eps_0` needs a square root and is enclosed from
/// below, so the returned value is a certified lower bound.
pub fn lemma_epsilon(k: &DigitalSet, ball: &BallSpec, witnesses: &[Point], prec: &Precision) -> Result<Scalar> {
    check_dim(k.dim(), ball.dim())?;
    if !ball_membership(k, ball)? {
        return Err(Error::invalid("the set is not in the basic open set"));
    }
    if witnesses.len() != ball.intervals().len() {
        return Err(Error::invalid(format!(
            "need {} witnesses, got {}",
            ball.intervals().len(),
            witnesses.len()
        )));
    }
    let cells = k.boxes();
    let mut eps: Option<Scalar> = None;
    let mut take = |v: Scalar| {
        if eps.as_ref().is_none_or(|e| v < *e) {
            eps = Some(v);
        }
    };

    for (i, x) in witnesses.iter().enumerate() {
        check_dim(k.dim(), x.dim())?;
        if !ball.contains_point(i, x) || !cells.iter().any(|c| c.contains_point(x)) {
            return Err(Error::invalid(format!("witness {} is not in K ∩ I_{}", i + 1, i + 1)));
        }
        if x.is_unit_vertex() {
            take(ball.relative_min_side(i));
        } else if let Some(d) = dist_to_complement(&ball.intervals()[i], x) {
            take(d);
        }
    }

    let rest = uncovered_atoms(&Aabb::unit(k.dim()), ball.intervals());
    if rest.is_empty() {
        take(Scalar::one());
    } else {
        let d_sq = cells
            .iter()
            .flat_map(|c| rest.iter().map(move |a| box_dist_sq(c, a)))
            .min()
            .expect("both sides nonempty");
        take(enclose::sqrt(&d_sq, prec).lo);
    }
    let eps = eps.expect("eps_0 always contributes");
    if !eps.is_positive() {
        return Err(Error::Precision("radius enclosure collapsed to zero".into()));
    }
    Ok(eps)
}

/// `dist(x, [0,1]^n \ I)` for `x` in the relative open box `I`; `None` when
/// the complement is empty.
fn dist_to_complement(b: &Aabb, x: &Point) -> Option<Scalar> {
    b.bounds()
        .iter()
        .zip(x.coords())
        .flat_map(|((lo, hi), xi)| {
            let below = (!lo.is_negative()).then(|| xi - lo);
            let above = (*hi <= 1).then(|| hi - xi);
            below.into_iter().chain(above)
        })
        .min()
}
