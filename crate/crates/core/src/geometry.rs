//! Points, axis-aligned boxes and cubes with exact measurements.
//!
//! Euclidean distances are only ever compared in squared form, so every
//! function here returns an exact [`Scalar`].

use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{check_dim, Error, Result};
use crate::scalar::Scalar;

#[derive(Clone, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Point {
    coords: Vec<Scalar>,
}

impl Point {
    /// Builds a point of `[0,1]^n`.
    pub fn new(coords: Vec<Scalar>) -> Result<Self> {
        if coords.is_empty() {
            return Err(Error::invalid("point needs at least one coordinate"));
        }
        if let Some(c) = coords.iter().find(|c| !c.is_in_unit_interval()) {
            return Err(Error::invalid(format!("coordinate {c} outside [0,1]")));
        }
        Ok(Point { coords })
    }

    pub fn dim(&self) -> usize {
        self.coords.len()
    }

    pub fn coords(&self) -> &[Scalar] {
        &self.coords
    }

    pub fn to_box(&self) -> Aabb {
        Aabb {
            bounds: self.coords.iter().map(|c| (c.clone(), c.clone())).collect(),
        }
    }

    /// Whether every coordinate is 0 or 1.
    pub fn is_unit_vertex(&self) -> bool {
        self.coords.iter().all(|c| c.is_zero() || *c == 1)
    }
}

/// A closed axis-aligned box `[lo_1,hi_1] x ... x [lo_n,hi_n]`.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Aabb {
    bounds: Vec<(Scalar, Scalar)>,
}

impl Aabb {
    pub fn new(bounds: Vec<(Scalar, Scalar)>) -> Result<Self> {
        if bounds.is_empty() {
            return Err(Error::invalid("box needs at least one axis"));
        }
        if let Some((i, (lo, hi))) = bounds.iter().enumerate().find(|(_, (lo, hi))| lo > hi) {
            return Err(Error::invalid(format!("axis {i}: lo {lo} > hi {hi}")));
        }
        Ok(Aabb { bounds })
    }

    pub fn unit(n: usize) -> Self {
        Aabb {
            bounds: vec![(Scalar::zero(), Scalar::one()); n],
        }
    }

    pub fn cube_at(lo: &[Scalar], side: &Scalar) -> Self {
        Aabb {
            bounds: lo.iter().map(|l| (l.clone(), l + side)).collect(),
        }
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(Scalar, Scalar)] {
        &self.bounds
    }

    pub fn lo(&self, axis: usize) -> &Scalar {
        &self.bounds[axis].0
    }

    pub fn hi(&self, axis: usize) -> &Scalar {
        &self.bounds[axis].1
    }

    pub fn side(&self, axis: usize) -> Scalar {
        &self.bounds[axis].1 - &self.bounds[axis].0
    }

    pub fn sides(&self) -> impl Iterator<Item = Scalar> + '_ {
        self.bounds.iter().map(|(lo, hi)| hi - lo)
    }

    pub fn is_degenerate(&self) -> bool {
        self.bounds.iter().any(|(lo, hi)| lo == hi)
    }

    /// `Some(side)` when all sides are equal and positive.
    pub fn cube_side(&self) -> Option<Scalar> {
        let s = self.side(0);
        (s.is_positive() && self.sides().all(|t| t == s)).then_some(s)
    }

    pub fn contains_box(&self, other: &Aabb) -> bool {
        self.bounds
            .iter()
            .zip(&other.bounds)
            .all(|((lo, hi), (olo, ohi))| lo <= olo && ohi <= hi)
    }

    pub fn contains_point(&self, p: &Point) -> bool {
        self.bounds
            .iter()
            .zip(p.coords())
            .all(|((lo, hi), x)| lo <= x && x <= hi)
    }

    /// Closed intersection test.
    pub fn intersects(&self, other: &Aabb) -> bool {
        self.bounds
            .iter()
            .zip(&other.bounds)
            .all(|((lo, hi), (olo, ohi))| lo <= ohi && olo <= hi)
    }

    pub fn center(&self) -> Vec<Scalar> {
        let two = Scalar::int(2);
        self.bounds.iter().map(|(lo, hi)| (lo + hi) / &two).collect()
    }

    pub fn vertices(&self) -> Vec<Vec<Scalar>> {
        let n = self.dim();
        (0..1usize << n)
            .map(|mask| {
                (0..n)
                    .map(|i| {
                        if mask >> (n - 1 - i) & 1 == 1 {
                            self.bounds[i].1.clone()
                        } else {
                            self.bounds[i].0.clone()
                        }
                    })
                    .collect()
            })
            .collect()
    }

    pub(crate) fn with_axis(&self, axis: usize, lo: Scalar, hi: Scalar) -> Aabb {
        let mut b = self.clone();
        b.bounds[axis] = (lo, hi);
        b
    }

    pub fn translate(&self, v: &[Scalar]) -> Aabb {
        Aabb {
            bounds: self
                .bounds
                .iter()
                .zip(v)
                .map(|((lo, hi), d)| (lo + d, hi + d))
                .collect(),
        }
    }

    /// Per-axis clamp into `[0,1]`.
    pub fn clamp_unit(&self) -> Aabb {
        let cl = |x: &Scalar| Scalar::min_of(Scalar::max_of(x.clone(), Scalar::zero()), Scalar::one());
        Aabb {
            bounds: self.bounds.iter().map(|(lo, hi)| (cl(lo), cl(hi))).collect(),
        }
    }
}

impl Serialize for Aabb {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        let pairs: Vec<[&Scalar; 2]> = self.bounds.iter().map(|(lo, hi)| [lo, hi]).collect();
        pairs.serialize(serializer)
    }
}

impl<'de> Deserialize<'de> for Aabb {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let pairs: Vec<[Scalar; 2]> = Vec::deserialize(deserializer)?;
        Aabb::new(pairs.into_iter().map(|[lo, hi]| (lo, hi)).collect())
            .map_err(serde::de::Error::custom)
    }
}

/// A non-degenerate closed cube.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Cube {
    aabb: Aabb,
    side: Scalar,
}

impl Cube {
    pub fn new(lo: &[Scalar], side: Scalar) -> Result<Self> {
        if lo.is_empty() {
            return Err(Error::invalid("cube needs at least one axis"));
        }
        if !side.is_positive() {
            return Err(Error::invalid(format!("cube side {side} must be positive")));
        }
        Ok(Cube {
            aabb: Aabb::cube_at(lo, &side),
            side,
        })
    }

    pub fn from_box(b: Aabb) -> Result<Self> {
        let side = b
            .cube_side()
            .ok_or_else(|| Error::invalid("box is not a non-degenerate cube"))?;
        Ok(Cube { aabb: b, side })
    }

    pub fn side(&self) -> &Scalar {
        &self.side
    }

    pub fn as_box(&self) -> &Aabb {
        &self.aabb
    }

    pub fn into_box(self) -> Aabb {
        self.aabb
    }

    pub fn lo(&self) -> Vec<Scalar> {
        self.aabb.bounds.iter().map(|(lo, _)| lo.clone()).collect()
    }
}

/// Lebesgue measure: the product of the side lengths.
pub fn volume(b: &Aabb) -> Scalar {
    b.sides().product()
}

/// `l_I`, the shortest side.
pub fn min_side(b: &Aabb) -> Scalar {
    b.sides().min().expect("boxes have at least one axis")
}

pub fn diam_sq(b: &Aabb) -> Scalar {
    b.sides().map(|s| &s * &s).sum()
}

/// Squared distance between two closed boxes of equal dimension.
pub fn box_dist_sq(a: &Aabb, b: &Aabb) -> Scalar {
    debug_assert_eq!(a.dim(), b.dim());
    let mut acc = Scalar::zero();
    for ((alo, ahi), (blo, bhi)) in a.bounds.iter().zip(&b.bounds) {
        let gap = if ahi < blo {
            blo - ahi
        } else if bhi < alo {
            alo - bhi
        } else {
            continue;
        };
        acc += &gap * &gap;
    }
    acc
}

/// Anything that is a finite union of closed boxes.
pub trait BoxUnion {
    fn dim(&self) -> usize;
    fn boxes(&self) -> Vec<Aabb>;
}

impl BoxUnion for Aabb {
    fn dim(&self) -> usize {
        self.bounds.len()
    }
    fn boxes(&self) -> Vec<Aabb> {
        vec![self.clone()]
    }
}

impl BoxUnion for Cube {
    fn dim(&self) -> usize {
        self.aabb.dim()
    }
    fn boxes(&self) -> Vec<Aabb> {
        vec![self.aabb.clone()]
    }
}

impl BoxUnion for Point {
    fn dim(&self) -> usize {
        self.coords.len()
    }
    fn boxes(&self) -> Vec<Aabb> {
        vec![self.to_box()]
    }
}

impl BoxUnion for [Aabb] {
    fn dim(&self) -> usize {
        self.first().map_or(0, Aabb::dim)
    }
    fn boxes(&self) -> Vec<Aabb> {
        self.to_vec()
    }
}

/// Exact squared Euclidean distance `dist(A, B)^2` between two closed sets.
pub fn dist_sq<A, B>(a: &A, b: &B) -> Result<Scalar>
where
    A: BoxUnion + ?Sized,
    B: BoxUnion + ?Sized,
{
    check_dim(a.dim(), b.dim())?;
    let (ab, bb) = (a.boxes(), b.boxes());
    let mut best: Option<Scalar> = None;
    for x in &ab {
        for y in &bb {
            let d = box_dist_sq(x, y);
            if d.is_zero() {
                return Ok(d);
            }
            if best.as_ref().is_none_or(|b| d < *b) {
                best = Some(d);
            }
        }
    }
    best.ok_or_else(|| Error::invalid("distance to an empty set"))
}

/// Decides `target ⊆ ∪ pieces` exactly for closed boxes.
///
/// If one piece contains the target we are done. Otherwise the target is cut
/// by a piece face that properly crosses it and both halves are decided
/// recursively. When no face crosses and no piece contains the target, every
/// piece meets it in at most a lower-dimensional face, so it is not covered.
pub fn covers_box(target: &Aabb, pieces: &[Aabb]) -> Result<bool> {
    for p in pieces {
        check_dim(target.dim(), p.dim())?;
    }
    let relevant: Vec<&Aabb> = pieces.iter().filter(|p| p.intersects(target)).collect();
    Ok(covers_rec(target, &relevant))
}

fn covers_rec(target: &Aabb, pieces: &[&Aabb]) -> bool {
    if pieces.iter().any(|p| p.contains_box(target)) {
        return true;
    }
    for p in pieces {
        for axis in 0..target.dim() {
            let (tlo, thi) = &target.bounds[axis];
            for v in [p.lo(axis), p.hi(axis)] {
                if tlo < v && v < thi {
                    let left = target.with_axis(axis, tlo.clone(), v.clone());
                    let right = target.with_axis(axis, v.clone(), thi.clone());
                    let lp: Vec<&Aabb> = pieces.iter().copied().filter(|q| q.intersects(&left)).collect();
                    if !covers_rec(&left, &lp) {
                        return false;
                    }
                    let rp: Vec<&Aabb> = pieces.iter().copied().filter(|q| q.intersects(&right)).collect();
                    return covers_rec(&right, &rp);
                }
            }
        }
    }
    false
}

#[cfg(test)]
mod tests {
    use super::*;

    fn r(n: i64, d: i64) -> Scalar {
        Scalar::ratio(n, d)
    }

    fn bx(b: &[(i64, i64, i64, i64)]) -> Aabb {
        Aabb::new(b.iter().map(|&(a, b, c, d)| (r(a, b), r(c, d))).collect()).unwrap()
    }

    #[test]
    fn volume_examples() {
        assert_eq!(volume(&Aabb::unit(3)), Scalar::one());
        assert_eq!(volume(&bx(&[(0, 1, 1, 3), (0, 1, 1, 3)])), r(1, 9));
        assert_eq!(volume(&bx(&[(0, 1, 0, 1), (0, 1, 1, 1)])), Scalar::zero());
    }

    #[test]
    fn min_side_examples() {
        assert_eq!(min_side(&bx(&[(0, 1, 1, 3), (0, 1, 1, 2)])), r(1, 3));
        assert_eq!(min_side(&Aabb::unit(1)), Scalar::one());
        let c = Cube::new(&[Scalar::zero(), Scalar::zero(), Scalar::zero()], r(1, 81)).unwrap();
        assert_eq!(min_side(c.as_box()), r(1, 81));
    }

    #[test]
    fn dist_examples() {
        let a = bx(&[(0, 1, 1, 2)]);
        let b = bx(&[(1, 3, 1, 1)]);
        assert_eq!(dist_sq(&a, &b).unwrap(), Scalar::zero());
        let a = bx(&[(0, 1, 1, 3)]);
        let b = bx(&[(2, 3, 1, 1)]);
        assert_eq!(dist_sq(&a, &b).unwrap(), r(1, 9));
        let a = bx(&[(0, 1, 1, 3), (0, 1, 1, 3)]);
        let b = bx(&[(2, 3, 1, 1), (2, 3, 1, 1)]);
        assert_eq!(dist_sq(&a, &b).unwrap(), r(2, 9));
        assert!(matches!(
            dist_sq(&Aabb::unit(1), &Aabb::unit(2)),
            Err(Error::DimensionMismatch(1, 2))
        ));
    }

    #[test]
    fn diam_examples() {
        assert_eq!(diam_sq(&Aabb::unit(2)), Scalar::int(2));
        let p = Point::new(vec![r(1, 2), r(1, 3)]).unwrap();
        assert_eq!(diam_sq(&p.to_box()), Scalar::zero());
        assert_eq!(diam_sq(&bx(&[(0, 1, 1, 3), (0, 1, 1, 3)])), r(2, 9));
    }

    #[test]
    fn covers_examples() {
        let u = Aabb::unit(1);
        assert!(covers_box(&u, std::slice::from_ref(&u)).unwrap());
        let halves = [bx(&[(0, 1, 1, 2)]), bx(&[(1, 2, 1, 1)])];
        assert!(covers_box(&u, &halves).unwrap());
        let corners = [
            bx(&[(0, 1, 1, 3), (0, 1, 1, 3)]),
            bx(&[(0, 1, 1, 3), (2, 3, 1, 1)]),
            bx(&[(2, 3, 1, 1), (0, 1, 1, 3)]),
            bx(&[(2, 3, 1, 1), (2, 3, 1, 1)]),
        ];
        assert!(!covers_box(&Aabb::unit(2), &corners).unwrap());
    }

    #[test]
    fn degenerate_target_on_shared_face() {
        let seg = bx(&[(1, 2, 1, 2), (0, 1, 1, 1)]);
        let left = bx(&[(0, 1, 1, 2), (0, 1, 1, 1)]);
        assert!(covers_box(&seg, &[left]).unwrap());
    }

    #[test]
    fn cube_rejects_degenerate() {
        assert!(Cube::new(&[Scalar::zero()], Scalar::zero()).is_err());
        assert!(Cube::from_box(bx(&[(0, 1, 1, 2), (0, 1, 1, 3)])).is_err());
    }

    #[test]
    fn box_json_shape() {
        let b = bx(&[(0, 1, 1, 3), (2, 3, 1, 1)]);
        let j = serde_json::to_string(&b).unwrap();
        assert_eq!(j, r#"[["0/1","1/3"],["2/3","1/1"]]"#);
        assert_eq!(serde_json::from_str::<Aabb>(&j).unwrap(), b);
        assert!(serde_json::from_str::<Aabb>(r#"[["1/2","1/3"]]"#).is_err());
    }

    #[test]
    fn vertex_order_is_lexicographic() {
        let v = Aabb::unit(2).vertices();
        let s: Vec<Vec<String>> = v
            .iter()
            .map(|p| p.iter().map(|c| c.to_string()).collect())
            .collect();
        assert_eq!(s[0], ["0/1", "0/1"]);
        assert_eq!(s[1], ["0/1", "1/1"]);
        assert_eq!(s[2], ["1/1", "0/1"]);
        assert_eq!(s[3], ["1/1", "1/1"]);
    }
}
